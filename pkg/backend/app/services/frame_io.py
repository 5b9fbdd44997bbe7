"""
Frame sequences on disk: a directory of 8-bit RGB PNGs, or a raw ``.rgb24``
file (T*H*W*3 bytes, frame-major) next to a sidecar ``<name>.json`` holding
``{"width", "height", "frames"}``.
"""
from pathlib import Path
from typing import List, Union
import json
import logging
import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from ..core.exceptions import (
    EmptySourceError, MixedDimensionsError, UnreadableFrameError,
    SizeMismatchError, UnwritablePathError,
)
from ..models.video import FrameSequence

logger = logging.getLogger(__name__)

RAW_SUFFIX = ".rgb24"
FRAME_PATTERN = "frame_{:05d}.png"


def to_uint8(frames: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize with round(v * 255)."""
    return np.round(np.clip(frames, 0.0, 1.0) * 255.0).astype(np.uint8)


def _read_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode not in ("RGB", "RGBA", "L", "P"):
                raise UnreadableFrameError(f"{path.name}: unsupported mode {img.mode}")
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as e:
        raise UnreadableFrameError(f"{path.name}: {e}") from e


def _load_png_dir(directory: Path) -> FrameSequence:
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise EmptySourceError(f"no PNG frames in {directory}")

    frames: List[np.ndarray] = []
    for path in files:
        data = _read_png(path)
        if frames and data.shape != frames[0].shape:
            raise MixedDimensionsError(
                f"{path.name} is {data.shape[1]}x{data.shape[0]}, "
                f"first frame is {frames[0].shape[1]}x{frames[0].shape[0]}"
            )
        frames.append(data)

    stack = np.stack(frames).astype(np.float64) / 255.0
    logger.info(f"Loaded {len(frames)} PNG frames ({stack.shape[2]}x{stack.shape[1]}) from {directory}")
    return FrameSequence(frames=stack, source=str(directory))


def _sidecar_path(raw_path: Path) -> Path:
    return raw_path.with_suffix(".json")


def _load_raw(raw_path: Path) -> FrameSequence:
    sidecar = _sidecar_path(raw_path)
    try:
        meta = json.loads(sidecar.read_text())
        width, height, num_frames = int(meta["width"]), int(meta["height"]), int(meta["frames"])
    except FileNotFoundError as e:
        raise UnreadableFrameError(f"missing sidecar {sidecar.name} for {raw_path.name}") from e
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise UnreadableFrameError(f"bad sidecar {sidecar.name}: {e}") from e
    if num_frames < 1:
        raise EmptySourceError(f"{sidecar.name} declares {num_frames} frames")

    data = raw_path.read_bytes()
    expected = num_frames * height * width * 3
    if len(data) != expected:
        raise SizeMismatchError(
            f"{raw_path.name} has {len(data)} bytes, {num_frames}x{height}x{width}x3 needs {expected}"
        )
    stack = np.frombuffer(data, dtype=np.uint8).reshape(num_frames, height, width, 3).astype(np.float64) / 255.0
    logger.info(f"Loaded {num_frames} raw frames ({width}x{height}) from {raw_path}")
    return FrameSequence(frames=stack, source=str(raw_path))


def load_frames(path: Union[str, Path]) -> FrameSequence:
    path = Path(path)
    if path.is_dir():
        return _load_png_dir(path)
    if path.suffix == RAW_SUFFIX and path.is_file():
        return _load_raw(path)
    if not path.exists():
        raise EmptySourceError(f"{path} does not exist")
    raise UnreadableFrameError(f"{path} is neither a PNG directory nor a {RAW_SUFFIX} file")


def _prepare_dir(directory: Path) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise UnwritablePathError(f"cannot create {directory}: {e}") from e
    if not directory.is_dir():
        raise UnwritablePathError(f"{directory} is not a directory")


def save_frames(seq: Union[FrameSequence, np.ndarray], path: Union[str, Path], start_index: int = 0) -> List[Path]:
    """Write frame_00000.png, frame_00001.png, ... and return the written paths."""
    frames = seq.frames if isinstance(seq, FrameSequence) else np.asarray(seq)
    directory = Path(path)
    _prepare_dir(directory)

    written: List[Path] = []
    for i, frame in enumerate(to_uint8(frames)):
        out = directory / FRAME_PATTERN.format(start_index + i)
        try:
            Image.fromarray(frame).save(out, format="PNG")
        except OSError as e:
            raise UnwritablePathError(f"cannot write {out}: {e}") from e
        written.append(out)
    logger.info(f"Wrote {len(written)} frames to {directory}")
    return written


def save_raw(seq: Union[FrameSequence, np.ndarray], path: Union[str, Path]) -> Path:
    """Write ``<path>.rgb24`` plus its sidecar JSON."""
    frames = seq.frames if isinstance(seq, FrameSequence) else np.asarray(seq)
    raw_path = Path(path)
    if raw_path.suffix != RAW_SUFFIX:
        raw_path = raw_path.with_suffix(RAW_SUFFIX)
    _prepare_dir(raw_path.parent)

    num_frames, height, width = frames.shape[:3]
    try:
        raw_path.write_bytes(to_uint8(frames).tobytes(order="C"))
        _sidecar_path(raw_path).write_text(
            json.dumps({"width": width, "height": height, "frames": num_frames})
        )
    except OSError as e:
        raise UnwritablePathError(f"cannot write {raw_path}: {e}") from e
    return raw_path


def write_report(report: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write a CSV report (training history, bench timings) without the index column."""
    out = Path(path)
    try:
        report.to_csv(out, index=False)
    except OSError as e:
        raise UnwritablePathError(f"cannot write {out}: {e}") from e
    return out
