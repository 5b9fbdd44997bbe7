import argparse
import logging
from pathlib import Path

from ..models.config import TrainConfig, RasterConfig, OptimizerKind
from ..models.reports import EncodeSummary
from ..services.codec import write_bitstream, read_bitstream, compute_bpp
from ..services.frame_io import load_frames, write_report
from ..services.presets import load_model_config
from ..services.rasterizer import TileRasterizer
from ..services.trainer import train, evaluate
from ..core.exceptions import UnwritablePathError

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("encode", help="Fit a model to a clip and write a .gsv bitstream")
    parser.add_argument("--input", required=True, help="PNG directory or .rgb24 file")
    parser.add_argument("--config", required=True, help="ModelConfig JSON file or preset name")
    parser.add_argument("--out", required=True, help="output .gsv path")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--log", default=None, help="per-epoch metrics CSV")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--tv-lambda", type=float, default=None)
    parser.add_argument("--optimizer", choices=[k.value for k in OptimizerKind], default=None)
    parser.add_argument("--max-steps", type=int, default=None)
    parser.add_argument("--quantize-aware-steps", type=int, default=None,
                        help="extra steps trained through the 8-bit model after the main run")
    parser.add_argument("--workers", type=int, default=None)
    parser.set_defaults(handler=run)


def encode(args: argparse.Namespace) -> EncodeSummary:
    video = load_frames(args.input)
    model_cfg = load_model_config(args.config)
    train_cfg = TrainConfig.from_settings(
        seed=args.seed, epochs=args.epochs, lr=args.lr, tv_lambda=args.tv_lambda,
        optimizer=args.optimizer, max_steps=args.max_steps,
        quantize_aware_steps=args.quantize_aware_steps,
    )
    raster_cfg = RasterConfig.from_settings(num_workers=args.workers)

    result = train(video, model_cfg, train_cfg, raster_cfg)
    stream = write_bitstream(result.model)
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(stream)
    except OSError as e:
        raise UnwritablePathError(f"cannot write {out}: {e}") from e
    if args.log:
        write_report(result.history, args.log)

    rasterizer = TileRasterizer(raster_cfg)
    trained = evaluate(result.model, video, rasterizer)
    # scored exactly as decode + metrics would score the written stream
    decoded = evaluate(read_bitstream(stream), video, rasterizer, quantize_output=True)
    return EncodeSummary(
        psnr_db=trained.mean_psnr_db,
        ms_ssim=decoded.mean_ms_ssim,
        bpp=compute_bpp(len(stream), video.num_frames, video.height, video.width),
        train_seconds=result.train_seconds,
        stream_bytes=len(stream),
        num_params=result.model.param_count(),
        quantized_psnr_db=decoded.mean_psnr_db,
    )


def run(args: argparse.Namespace) -> int:
    summary = encode(args)
    print(f"psnr_db={summary.psnr_db:.4f}")
    print(f"quantized_psnr_db={summary.quantized_psnr_db:.4f}")
    print(f"ms_ssim={summary.ms_ssim:.6f}")
    print(f"bpp={summary.bpp:.6f}")
    print(f"train_seconds={summary.train_seconds:.2f}")
    print(f"stream_bytes={summary.stream_bytes}")
    print(f"params={summary.num_params}")
    return 0
