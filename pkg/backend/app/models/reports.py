from pydantic import BaseModel
from typing import List, Optional


class MetricReport(BaseModel):
    psnr_db: float
    ms_ssim: float
    ms_ssim_scales: int = 5


class FrameMetrics(BaseModel):
    frame: int
    psnr_db: float
    ms_ssim: float


class EvaluationReport(BaseModel):
    frames: List[FrameMetrics]
    mean_psnr_db: float
    mean_ms_ssim: float
    ms_ssim_scales: int


class EpochMetrics(BaseModel):
    epoch: int
    step: int
    loss: float
    psnr: float
    wall_ms: float


class EncodeSummary(BaseModel):
    psnr_db: float
    ms_ssim: float
    bpp: float
    train_seconds: float
    stream_bytes: int
    num_params: int
    quantized_psnr_db: Optional[float] = None
