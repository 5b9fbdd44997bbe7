from pathlib import Path
import struct
import zlib
import numpy as np
import pytest

from app.core.exceptions import (
    BadMagicError, VersionMismatchError, TruncatedPayloadError, ChecksumError, NonFiniteError,
)
from app.models.config import QuantizationConfig, RasterConfig
from app.services.codec import (
    MAGIC, quantize_tensor, dequantize_tensor, quantize_model, quantized_copy,
    write_bitstream, read_bitstream, parse_stream, compute_bpp,
)
from app.services.rasterizer import TileRasterizer, naive_render
from app.services.trainer import render_video


def test_constant_tensor_quantizes_to_zero_codes():
    q = quantize_tensor(np.full((3, 4), 0.75))
    assert q.scale == 1.0
    assert not q.codes.any()
    np.testing.assert_array_equal(dequantize_tensor(q), np.full((3, 4), 0.75))


def test_two_value_tensor_hits_both_ends():
    q = quantize_tensor(np.array([-1.0, 3.0, -1.0]))
    np.testing.assert_array_equal(q.codes, [0, 255, 0])
    np.testing.assert_allclose(dequantize_tensor(q), [-1.0, 3.0, -1.0], atol=1e-6)


def _within_half_step(q, values) -> bool:
    # float64 evaluation of min + scale * code stays far inside this slack
    return bool((np.abs(dequantize_tensor(q) - values) <= q.scale / 2 * (1.0 + 1e-6)).all())


def test_quantization_error_within_half_step(rng):
    values = rng.normal(0.0, 3.0, size=(64, 5))
    assert _within_half_step(quantize_tensor(values), values)


@pytest.mark.parametrize("values", [
    np.linspace(1000.0, 1000.001, 256),
    900.0 + np.random.default_rng(7).uniform(0.0, 0.05, size=(500, 2)),
    -3.0e4 + np.random.default_rng(8).uniform(0.0, 1e-3, size=64),
])
def test_offset_tensor_error_within_half_step(values):
    for bits in (8, 16):
        q = quantize_tensor(values, bits=bits)
        assert _within_half_step(q, values)
        # the step never drops below float32 resolution at the minimum
        assert q.scale >= float(np.spacing(np.float32(abs(q.min_val))))


def test_range_below_float32_resolution_is_stored_as_constant():
    values = np.array([1.0, 1.0 + 1e-12, 1.0 + 2e-12])
    q = quantize_tensor(values)
    assert q.scale == 1.0
    assert not q.codes.any()
    assert _within_half_step(q, values)


def test_sixteen_bit_codes(rng):
    values = rng.random(100)
    q = quantize_tensor(values, bits=16)
    assert q.codes.dtype == np.uint16
    assert _within_half_step(q, values)


def test_quantize_rejects_non_finite():
    with pytest.raises(NonFiniteError):
        quantize_tensor(np.array([0.0, np.inf]), name="means")


def test_bpp_formula():
    assert compute_bpp(1000, 16, 64, 64) == 8.0 * 1000 / (16 * 64 * 64)
    with pytest.raises(ValueError):
        compute_bpp(10, 0, 4, 4)


# ============================= Bitstream ============================= #

def test_round_trip_is_byte_identical(tiny_model):
    stream = write_bitstream(tiny_model)
    decoded = read_bitstream(stream)
    assert write_bitstream(decoded) == stream


def test_decoded_model_equals_quantized_copy(tiny_model):
    decoded = read_bitstream(write_bitstream(tiny_model))
    expected = quantized_copy(tiny_model)
    assert decoded.num_frames == tiny_model.num_frames
    assert decoded.config == tiny_model.config
    for name, array in expected.parameters().items():
        np.testing.assert_array_equal(decoded.parameters()[name], array)


def test_requantization_is_idempotent(tiny_model):
    first = quantize_model(tiny_model)
    second = quantize_model(quantized_copy(tiny_model))
    for a, b in zip(first, second):
        assert a.name == b.name
        np.testing.assert_array_equal(a.codes, b.codes)
        assert (a.min_val, a.scale) == (b.min_val, b.scale)


@pytest.mark.parametrize("bits", [8, 16])
def test_requantizing_offset_tensor_reproduces_it(bits):
    values = 900.0 + np.random.default_rng(3).uniform(0.0, 0.05, size=(200, 2))
    first = quantize_tensor(values, bits=bits)
    second = quantize_tensor(dequantize_tensor(first), bits=bits)
    assert (first.min_val, first.scale) == (second.min_val, second.scale)
    np.testing.assert_array_equal(first.codes, second.codes)


def test_round_trip_of_trained_scale_model_is_byte_identical(tiny_model, rng):
    # head weights with a range whose float32 step is not exactly representable after refitting
    tiny_model.head.weights[0][...] = rng.normal(0.0, 0.12, size=tiny_model.head.weights[0].shape)
    tiny_model.cloud.means[...] += 400.0
    stream = write_bitstream(tiny_model)
    assert write_bitstream(read_bitstream(stream)) == stream


def test_sixteen_bit_means_in_stream(tiny_model):
    tiny_model.config = tiny_model.config.model_copy(update={"quantization": QuantizationConfig(mean_bits=16)})
    stream = write_bitstream(tiny_model)
    _, tensors = parse_stream(stream)
    by_name = {t.name: t for t in tensors}
    assert by_name["means"].bits == 16
    assert by_name["colors"].bits == 8
    decoded = read_bitstream(stream)
    assert np.abs(decoded.cloud.means - tiny_model.cloud.means).max() <= by_name["means"].scale / 2 * (1.0 + 1e-6)


def test_stream_framing(tiny_model):
    stream = write_bitstream(tiny_model)
    assert stream[:4] == MAGIC
    version, payload_len = struct.unpack_from("<HQ", stream, 4)
    assert version == 1
    assert len(stream) == 4 + 2 + 8 + payload_len + 4
    body = stream[14:14 + payload_len]
    assert struct.unpack_from("<I", stream, 14 + payload_len)[0] == zlib.crc32(body)


def test_bad_magic(tiny_model):
    stream = bytearray(write_bitstream(tiny_model))
    stream[0:4] = b"RIFF"
    with pytest.raises(BadMagicError):
        read_bitstream(bytes(stream))


def test_version_mismatch(tiny_model):
    stream = bytearray(write_bitstream(tiny_model))
    struct.pack_into("<H", stream, 4, 2)
    with pytest.raises(VersionMismatchError):
        read_bitstream(bytes(stream))


@pytest.mark.parametrize("cut", [5, 20, 200, -1])
def test_truncated_stream(tiny_model, cut):
    stream = write_bitstream(tiny_model)
    with pytest.raises(TruncatedPayloadError):
        read_bitstream(stream[:cut])


def test_flipped_payload_byte_fails_checksum(tiny_model):
    stream = bytearray(write_bitstream(tiny_model))
    stream[len(stream) // 2] ^= 0x01
    with pytest.raises(ChecksumError):
        read_bitstream(bytes(stream))


def test_stream_size_accounts_for_every_parameter(tiny_model):
    stream = write_bitstream(tiny_model)
    code_bytes = sum(t.nbytes() for t in parse_stream(stream)[1])
    assert code_bytes == tiny_model.param_count()
    assert len(stream) > code_bytes


# ============================= Golden stream ============================= #

GOLDEN = Path(__file__).parent / "fixtures" / "golden.gsv"


@pytest.fixture
def golden_bytes() -> bytes:
    return GOLDEN.read_bytes()


def test_golden_stream_decodes_to_fixed_tensors(golden_bytes):
    model = read_bitstream(golden_bytes)
    assert model.num_frames == 3
    assert (model.width, model.height) == (8, 8)
    assert model.param_count() == 62
    np.testing.assert_array_equal(model.cloud.means, [[2.0, 2.0], [5.984375, 5.984375]])
    np.testing.assert_array_equal(model.cloud.chol_raw, [[0.9921875, -1.0, 0.9921875]] * 2)
    np.testing.assert_array_equal(model.cloud.colors, [[0.99609375, 0.0, 0.0], [0.0, 0.0, 0.99609375]])
    level = model.planes.levels[0]
    np.testing.assert_array_equal(level.xy, np.zeros((2, 2, 1)))
    np.testing.assert_array_equal(level.xt, np.ones((2, 2, 1)))
    np.testing.assert_array_equal(level.yt, np.ones((2, 2, 1)))
    assert not any(a.any() for name, a in model.parameters().items() if name.startswith(("fusion", "head")))


def test_golden_stream_renders_its_static_cloud(golden_bytes):
    model = read_bitstream(golden_bytes)
    frames = render_video(model, TileRasterizer(RasterConfig(tile_size=4, cutoff_sigma=float("inf"))))
    expected = naive_render(model.cloud, 8, 8)
    for frame in frames:
        np.testing.assert_allclose(frame, expected, rtol=0.0, atol=1e-12)


def test_golden_stream_re_encodes_byte_identically(golden_bytes):
    assert write_bitstream(read_bitstream(golden_bytes)) == golden_bytes


def test_golden_stream_bpp_matches_hand_count(golden_bytes):
    assert len(golden_bytes) == 823
    # 8 bits * 823 bytes over 3 frames of 8x8 pixels
    assert compute_bpp(len(golden_bytes), 3, 8, 8) == 6584 / 192
    assert compute_bpp(len(golden_bytes), 3, 8, 8) == pytest.approx(34.291667, abs=1e-6)
