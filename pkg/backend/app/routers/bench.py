import argparse
import logging
import time
from typing import Optional

import numpy as np
import pandas as pd

from ..core.config import settings
from ..models.config import RasterConfig
from ..models.gaussian_video import GaussianVideoModel
from ..services.rasterizer import TileRasterizer
from ..services.frame_io import write_report
from ..services.trainer import render_video
from .decode import read_model_file

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["repeat", "frames", "seconds", "fps"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("bench", help="Time full-clip decodes and report FPS as CSV")
    parser.add_argument("--model", required=True, help=".gsv bitstream")
    parser.add_argument("--repeat", type=int, default=5, help="timed decodes")
    parser.add_argument("--warmup", type=int, default=None, help="untimed decodes first")
    parser.add_argument("--csv", default=None, help="write the report here instead of stdout")
    parser.add_argument("--workers", type=int, default=None)
    parser.set_defaults(handler=run)


def bench_model(
    model: GaussianVideoModel, repeat: int, warmup: int = 0, rasterizer: Optional[TileRasterizer] = None
) -> pd.DataFrame:
    """``warmup`` untimed clip decodes, then ``repeat`` timed ones; the last row holds medians."""
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    rasterizer = rasterizer or TileRasterizer()
    for _ in range(warmup):
        render_video(model, rasterizer)

    rows = []
    for k in range(repeat):
        started = time.perf_counter()
        render_video(model, rasterizer)
        seconds = time.perf_counter() - started
        rows.append({"repeat": str(k), "frames": model.num_frames, "seconds": seconds,
                     "fps": model.num_frames / seconds if seconds > 0 else float("inf")})

    report = pd.DataFrame(rows, columns=BENCH_COLUMNS)
    summary = {"repeat": "median", "frames": model.num_frames,
               "seconds": float(np.median(report["seconds"])), "fps": float(np.median(report["fps"]))}
    logger.info(f"Bench: median {summary['fps']:.2f} FPS over {repeat} decodes of {model.num_frames} frames")
    return pd.concat([report, pd.DataFrame([summary], columns=BENCH_COLUMNS)], ignore_index=True)


def run(args: argparse.Namespace) -> int:
    model = read_model_file(args.model)
    warmup = settings.BENCH_WARMUP if args.warmup is None else args.warmup
    rasterizer = TileRasterizer(RasterConfig.from_settings(num_workers=args.workers))
    report = bench_model(model, args.repeat, warmup, rasterizer)
    if args.csv:
        write_report(report, args.csv)
        print(f"median_fps={report['fps'].iloc[-1]:.2f}")
    else:
        print(report.to_csv(index=False), end="")
    return 0
