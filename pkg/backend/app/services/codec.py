"""
8-bit model quantization and the ``.gsv`` container (layout in docs/FORMAT.md).

All integers are little-endian. The stream is

    magic "GSVC" | version u16 | payload_len u64 | payload | crc32(payload) u32

and the payload is

    header_len u32 | header JSON (utf-8) | tensor_count u32 | tensor sections...

with each tensor section

    name_len u16 | name | bits u8 | ndim u8 | dims u32 * ndim | min f32 | scale f32 | codes
"""
from typing import Dict, List
import io
import logging
import struct
import zlib
import numpy as np

from ..core.exceptions import (
    NonFiniteError, BadMagicError, VersionMismatchError, TruncatedPayloadError,
    ChecksumError, BitstreamError,
)
from ..models.codec import QuantizedTensor, StreamHeader, FORMAT_VERSION
from ..models.gaussian_video import GaussianVideoModel
from .model_factory import empty_model

logger = logging.getLogger(__name__)

MAGIC = b"GSVC"
_PREAMBLE = struct.Struct("<4sHQ")
_CRC = struct.Struct("<I")


# ============================= Tensors ============================= #

def _scale_for(min_val: np.float32, hi: float, levels: int) -> np.float32:
    """float32 step covering [min_val, hi] in ``levels`` steps.

    Floored at the float32 spacing of ``min_val`` so rounding the minimum to
    float32 costs at most half a step.
    """
    floor = np.float32(np.spacing(np.abs(min_val)))
    return max(np.float32((hi - float(min_val)) / levels), floor)


def quantize_tensor(values: np.ndarray, bits: int = 8, name: str = "") -> QuantizedTensor:
    """Per-tensor affine quantization; a constant tensor gets scale 1 and all-zero codes.

    Quantizing the dequantized tensor again reproduces min, scale and codes exactly.
    """
    values = np.asarray(values, dtype=np.float64)
    if not np.isfinite(values).all():
        raise NonFiniteError("cannot quantize non-finite values", group=name or None)
    levels = (1 << bits) - 1
    code_dtype = np.uint8 if bits == 8 else np.uint16

    if values.size == 0:
        lo, hi = 0.0, 0.0
    else:
        lo, hi = float(values.min()), float(values.max())
    min_val = np.float32(lo)
    scale = np.float32(1.0)
    codes = np.zeros(values.shape, dtype=code_dtype)
    if hi != lo:
        step = _scale_for(min_val, hi, levels)
        fitted = np.clip(np.round((values - float(min_val)) / float(step)), 0, levels).astype(code_dtype)
        if fitted.any():
            scale, codes = step, fitted
    return QuantizedTensor(
        name=name, codes=codes, min_val=float(min_val), scale=float(scale),
        shape=tuple(values.shape), bits=bits,
    )


def dequantize_tensor(q: QuantizedTensor) -> np.ndarray:
    """min + scale * code from the stored float32 min and scale, evaluated in float64."""
    min_val = float(np.float32(q.min_val))
    scale = float(np.float32(q.scale))
    return (min_val + scale * q.codes.astype(np.float64)).reshape(q.shape)


def compute_bpp(stream_bytes: int, num_frames: int, height: int, width: int) -> float:
    if min(num_frames, height, width) < 1:
        raise ValueError("T, H and W must all be >= 1")
    return 8.0 * stream_bytes / (num_frames * height * width)


# ============================= Model ============================= #

def quantize_model(model: GaussianVideoModel) -> List[QuantizedTensor]:
    mean_bits = model.config.quantization.mean_bits
    return [
        quantize_tensor(array, bits=mean_bits if name == "means" else 8, name=name)
        for name, array in model.parameters().items()
    ]


def load_quantized(model: GaussianVideoModel, tensors: List[QuantizedTensor]) -> GaussianVideoModel:
    """Write dequantized values into the model's arrays in place."""
    params = model.parameters()
    for q in tensors:
        if q.name not in params:
            raise BitstreamError(f"stream carries unknown tensor {q.name!r}")
        target = params[q.name]
        if tuple(target.shape) != tuple(q.shape):
            raise BitstreamError(f"tensor {q.name!r} has shape {q.shape}, model expects {target.shape}")
        target[...] = dequantize_tensor(q)
    missing = set(params) - {q.name for q in tensors}
    if missing:
        raise BitstreamError(f"stream is missing tensors: {sorted(missing)}")
    return model


def quantized_copy(model: GaussianVideoModel) -> GaussianVideoModel:
    """The model exactly as a decoder will see it after a write/read round trip."""
    return load_quantized(model.copy(), quantize_model(model))


def lock_means(model: GaussianVideoModel) -> GaussianVideoModel:
    """Snap the base means onto the values their stored codes decode to."""
    means = model.cloud.means
    means[...] = dequantize_tensor(quantize_tensor(means, bits=model.config.quantization.mean_bits, name="means"))
    return model


# ============================= Container ============================= #

def _write_tensor(buf: io.BytesIO, q: QuantizedTensor) -> None:
    name = q.name.encode("utf-8")
    buf.write(struct.pack("<H", len(name)))
    buf.write(name)
    buf.write(struct.pack("<BB", q.bits, len(q.shape)))
    buf.write(struct.pack(f"<{len(q.shape)}I", *q.shape))
    buf.write(struct.pack("<ff", q.min_val, q.scale))
    code_dtype = "<u1" if q.bits == 8 else "<u2"
    buf.write(np.ascontiguousarray(q.codes, dtype=code_dtype).tobytes(order="C"))


def write_bitstream(model: GaussianVideoModel) -> bytes:
    header = StreamHeader(num_frames=model.num_frames, model=model.config)
    header_bytes = header.model_dump_json().encode("utf-8")
    tensors = quantize_model(model)

    payload = io.BytesIO()
    payload.write(struct.pack("<I", len(header_bytes)))
    payload.write(header_bytes)
    payload.write(struct.pack("<I", len(tensors)))
    for q in tensors:
        _write_tensor(payload, q)
    body = payload.getvalue()

    stream = _PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(body)) + body + _CRC.pack(zlib.crc32(body) & 0xFFFFFFFF)
    logger.info(f"Wrote bitstream: {len(stream)} bytes, {len(tensors)} tensors")
    return stream


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedPayloadError(f"payload ends at byte {len(self.data)}, needed {self.pos + n}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size))


def parse_stream(data: bytes):
    """Validate framing and checksum; returns (StreamHeader, [QuantizedTensor])."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError("not a GSVC bitstream (bad magic)")
    if len(data) < _PREAMBLE.size:
        raise TruncatedPayloadError("stream shorter than its preamble")
    _, version, payload_len = _PREAMBLE.unpack_from(data, 0)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"stream version {version}, reader supports {FORMAT_VERSION}")
    expected = _PREAMBLE.size + payload_len + _CRC.size
    if len(data) < expected:
        raise TruncatedPayloadError(f"stream has {len(data)} bytes, header promises {expected}")
    if len(data) > expected:
        raise BitstreamError(f"{len(data) - expected} trailing bytes after checksum")

    body = data[_PREAMBLE.size:_PREAMBLE.size + payload_len]
    (stored_crc,) = _CRC.unpack_from(data, _PREAMBLE.size + payload_len)
    if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
        raise ChecksumError("CRC-32 mismatch: payload is corrupted")

    reader = _Reader(body)
    (header_len,) = reader.unpack("<I")
    header = StreamHeader.model_validate_json(reader.take(header_len).decode("utf-8"))
    (count,) = reader.unpack("<I")
    tensors: List[QuantizedTensor] = []
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        bits, ndim = reader.unpack("<BB")
        shape = reader.unpack(f"<{ndim}I") if ndim else ()
        min_val, scale = reader.unpack("<ff")
        size = int(np.prod(shape)) if ndim else 1
        code_dtype = np.dtype("<u1") if bits == 8 else np.dtype("<u2")
        codes = np.frombuffer(reader.take(size * code_dtype.itemsize), dtype=code_dtype).reshape(shape)
        tensors.append(QuantizedTensor(
            name=name, codes=codes.astype(code_dtype.newbyteorder("=")), min_val=min_val, scale=scale,
            shape=tuple(shape), bits=bits,
        ))
    if reader.pos != len(body):
        raise BitstreamError("payload has unparsed bytes after the last tensor")
    return header, tensors


def read_bitstream(data: bytes) -> GaussianVideoModel:
    header, tensors = parse_stream(data)
    model = empty_model(header.model, header.num_frames)
    return load_quantized(model, tensors)


def tensor_table(tensors: List[QuantizedTensor]) -> List[Dict]:
    return [
        {"name": q.name, "shape": list(q.shape), "bits": q.bits,
         "min": q.min_val, "scale": q.scale, "bytes": q.nbytes()}
        for q in tensors
    ]
