import argparse
import json
from pathlib import Path
from typing import Any, Dict

from ..core.exceptions import FrameIOError
from ..services.codec import parse_stream, compute_bpp, tensor_table
from ..services.model_factory import count_params


def register(subparsers) -> None:
    parser = subparsers.add_parser("probe", help="Dump a .gsv header, config, tensor table and BPP")
    parser.add_argument("--model", required=True, help=".gsv bitstream")
    parser.set_defaults(handler=run)


def probe(data: bytes) -> Dict[str, Any]:
    header, tensors = parse_stream(data)
    cfg = header.model
    return {
        "format_version": header.format_version,
        "num_frames": header.num_frames,
        "width": cfg.width,
        "height": cfg.height,
        "backend": cfg.backend.value,
        "num_gaussians": cfg.num_gaussians,
        "params": count_params(cfg),
        "stream_bytes": len(data),
        "bpp": compute_bpp(len(data), header.num_frames, cfg.height, cfg.width),
        "config": cfg.model_dump(mode="json"),
        "tensors": tensor_table(tensors),
    }


def run(args: argparse.Namespace) -> int:
    try:
        data = Path(args.model).read_bytes()
    except OSError as e:
        raise FrameIOError(f"cannot read {args.model}: {e}") from e
    info = probe(data)
    for key in ("format_version", "num_frames", "width", "height", "backend",
                "num_gaussians", "params", "stream_bytes"):
        print(f"{key}={info[key]}")
    print(f"bpp={info['bpp']:.6f}")
    print(f"config={json.dumps(info['config'], sort_keys=True)}")
    for row in info["tensors"]:
        shape = "x".join(str(d) for d in row["shape"])
        print(f"tensor {row['name']} shape={shape} bits={row['bits']} "
              f"min={row['min']:.6g} scale={row['scale']:.6g} bytes={row['bytes']}")
    return 0
