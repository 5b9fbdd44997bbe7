from .rasterizer import TileRasterizer
from .trainer import VideoTrainer, train, evaluate
from .codec import write_bitstream, read_bitstream, compute_bpp
from .frame_io import load_frames, save_frames, save_raw
from .model_factory import build_model, count_params

__all__ = [
    "TileRasterizer",
    "VideoTrainer",
    "train",
    "evaluate",
    "write_bitstream",
    "read_bitstream",
    "compute_bpp",
    "load_frames",
    "save_frames",
    "save_raw",
    "build_model",
    "count_params",
]
