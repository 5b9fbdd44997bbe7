import argparse
import logging
import time
from pathlib import Path

from ..core.exceptions import ConfigError, FrameIOError
from ..models.config import RasterConfig
from ..services.codec import read_bitstream
from ..services.frame_io import save_frames
from ..services.rasterizer import TileRasterizer
from ..services.trainer import render_video

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("decode", help="Render every frame of a .gsv bitstream to PNGs")
    parser.add_argument("--model", required=True, help=".gsv bitstream")
    parser.add_argument("--out", required=True, help="output PNG directory")
    parser.add_argument("--frames", default=None, help="inclusive frame range a..b")
    parser.add_argument("--workers", type=int, default=None)
    parser.set_defaults(handler=run)


def parse_frame_range(text: str, num_frames: int) -> range:
    """``a..b`` inclusive, either end optional; clipped to the clip length."""
    try:
        start_text, end_text = text.split("..")
        start = int(start_text) if start_text else 0
        end = int(end_text) if end_text else num_frames - 1
    except ValueError as e:
        raise ConfigError(f"--frames expects a..b, got {text!r}") from e
    if start < 0 or end < start:
        raise ConfigError(f"invalid frame range {text!r}")
    if end >= num_frames:
        logger.warning(f"frame range {text} clipped to {num_frames} frames")
        end = num_frames - 1
    if start > end:
        raise ConfigError(f"frame range {text!r} is outside the {num_frames}-frame clip")
    return range(start, end + 1)


def read_model_file(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise FrameIOError(f"cannot read {path}: {e}") from e
    return read_bitstream(data)


def run(args: argparse.Namespace) -> int:
    model = read_model_file(args.model)
    frames = parse_frame_range(args.frames, model.num_frames) if args.frames else range(model.num_frames)
    rasterizer = TileRasterizer(RasterConfig.from_settings(num_workers=args.workers))

    started = time.perf_counter()
    video = render_video(model, rasterizer, frames)
    seconds = time.perf_counter() - started
    save_frames(video, args.out, start_index=frames.start)

    fps = len(frames) / seconds if seconds > 0 else float("inf")
    print(f"frames={len(frames)}")
    print(f"decode_seconds={seconds:.4f}")
    print(f"decode_fps={fps:.2f}")
    return 0
