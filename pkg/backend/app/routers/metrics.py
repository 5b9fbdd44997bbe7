import argparse
from typing import List

from ..core.exceptions import ShapeMismatchError
from ..models.reports import EvaluationReport, FrameMetrics
from ..services.frame_io import load_frames
from ..services.metrics import metric_report
from ..services.trainer import summarize


def register(subparsers) -> None:
    parser = subparsers.add_parser("metrics", help="Per-frame and mean PSNR / MS-SSIM between two clips")
    parser.add_argument("--ref", required=True, help="reference PNG directory or .rgb24 file")
    parser.add_argument("--test", required=True, help="test PNG directory or .rgb24 file")
    parser.set_defaults(handler=run)


def compare_clips(ref_path: str, test_path: str) -> EvaluationReport:
    ref = load_frames(ref_path)
    test = load_frames(test_path)
    if ref.frames.shape != test.frames.shape:
        raise ShapeMismatchError(f"clips differ in shape: {ref.frames.shape} vs {test.frames.shape}")

    frames: List[FrameMetrics] = []
    scales = 0
    for t in range(ref.num_frames):
        report = metric_report(ref.frames[t], test.frames[t])
        scales = report.ms_ssim_scales
        frames.append(FrameMetrics(frame=t, psnr_db=report.psnr_db, ms_ssim=report.ms_ssim))
    return summarize(frames, scales)


def run(args: argparse.Namespace) -> int:
    report = compare_clips(args.ref, args.test)
    print("frame,psnr_db,ms_ssim")
    for f in report.frames:
        print(f"{f.frame},{f.psnr_db:.4f},{f.ms_ssim:.6f}")
    print(f"mean,{report.mean_psnr_db:.4f},{report.mean_ms_ssim:.6f}")
    return 0
