from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple, Union
import logging
import time
import numpy as np
import pandas as pd

from ..core.exceptions import NonFiniteError
from ..models.config import ModelConfig, TrainConfig, RasterConfig, FrameOrder, DeformBackend
from ..models.gaussian_video import GaussianVideoModel
from ..models.reports import EpochMetrics, EvaluationReport, FrameMetrics
from ..models.video import FrameSequence
from .codec import lock_means, quantized_copy
from .frame_io import to_uint8, write_report
from .losses import tv_loss, total_loss
from .metrics import psnr, metric_report
from .model_factory import build_model
from .optimizer import build_optimizer
from .pipeline import frame_gradients, render_frame
from .rasterizer import TileRasterizer

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = list(EpochMetrics.model_fields)


class TrainResult(NamedTuple):
    model: GaussianVideoModel
    history: pd.DataFrame       # one row per epoch, HISTORY_COLUMNS
    train_seconds: float


class VideoTrainer:
    """
    Fits the base cloud, deformation field and decoder head of a model to a video.

    One optimizer step per frame; frames are visited sequentially or in a
    per-epoch permutation drawn from the training seed.
    """

    def __init__(self, config: TrainConfig, raster_config: Optional[RasterConfig] = None):
        self.config = config
        self.rasterizer = TileRasterizer(raster_config)
        self.optimizer = build_optimizer(config)
        self._rng = np.random.default_rng(config.seed)

    def frame_order(self, num_frames: int) -> np.ndarray:
        if self.config.frame_order == FrameOrder.SHUFFLED:
            return self._rng.permutation(num_frames)
        return np.arange(num_frames)

    def _step_gradients(self, model: GaussianVideoModel, t_index: int, target: np.ndarray):
        recon, image, grads = frame_gradients(model, t_index, target, self.rasterizer)
        tv = 0.0
        lam = self.config.tv_lambda
        if model.backend == DeformBackend.MULTIPLANE and lam > 0:
            tv, tv_grads = tv_loss(model.planes)
            for name, grad in tv_grads.items():
                grads[name] = grads[name] + lam * grad
        if self.config.freeze_head:
            grads = {k: v for k, v in grads.items() if not k.startswith("head.")}
        return total_loss(recon, tv, lam), image, grads

    def _train_step(self, model: GaussianVideoModel, params: Dict[str, np.ndarray], t_index: int,
                    target: np.ndarray, quantized: bool) -> Tuple[float, np.ndarray]:
        # quantized steps render the decoder's view and pass gradients straight through to the floats
        source = quantized_copy(model) if quantized else model
        loss, image, grads = self._step_gradients(source, t_index, target)
        if quantized:
            grads.pop("means", None)
        self.optimizer.step(params, grads)
        return loss, image

    def _run_epoch(self, video: FrameSequence, model: GaussianVideoModel, params: Dict[str, np.ndarray],
                   epoch: int, budget: Optional[int], quantized: bool) -> Tuple[List[float], List[float]]:
        losses, psnrs = [], []
        for t_index in self.frame_order(video.num_frames):
            if budget is not None and len(losses) >= budget:
                break
            t_index = int(t_index)
            target = video.frames[t_index]
            try:
                loss, image = self._train_step(model, params, t_index, target, quantized)
            except NonFiniteError as e:
                logger.error(f"Training diverged at epoch {epoch}, frame {t_index}: {e}")
                raise e.with_context(epoch, t_index) from e
            losses.append(loss)
            psnrs.append(psnr(np.clip(image, 0.0, 1.0), target))
        return losses, psnrs

    @staticmethod
    def _epoch_row(epoch: int, step: int, losses: List[float], psnrs: List[float], epoch_started: float) -> Dict:
        metrics = EpochMetrics(
            epoch=epoch,
            step=step,
            loss=float(np.mean(losses)),
            psnr=float(np.mean(psnrs)),
            wall_ms=(time.perf_counter() - epoch_started) * 1000.0,
        )
        logger.debug(f"epoch {epoch}: loss={metrics.loss:.6f} psnr={metrics.psnr:.2f} dB")
        return metrics.model_dump()

    def finish_quantized(
        self, video: FrameSequence, model: GaussianVideoModel, steps: int, first_epoch: int = 0, first_step: int = 0
    ) -> List[Dict]:
        """Lock the means to their codes, then train ``steps`` more steps through the quantized model.

        Continues this trainer's optimizer state; returns one history row per (partial) epoch.
        """
        params = model.parameters()
        lock_means(model)
        logger.info(f"Quantization-aware finish: {steps} steps with means on their code grid")
        rows: List[Dict] = []
        step, epoch = first_step, first_epoch
        while step - first_step < steps:
            epoch_started = time.perf_counter()
            budget = steps - (step - first_step)
            losses, psnrs = self._run_epoch(video, model, params, epoch, budget, quantized=True)
            step += len(losses)
            rows.append(self._epoch_row(epoch, step, losses, psnrs, epoch_started))
            epoch += 1
        return rows

    def fit(self, video: FrameSequence, model: GaussianVideoModel, log_path: Union[str, Path, None] = None) -> TrainResult:
        cfg = self.config
        params = model.parameters()
        rows: List[Dict] = []
        step = 0
        started = time.perf_counter()

        for epoch in range(cfg.epochs):
            budget = None if cfg.max_steps is None else cfg.max_steps - step
            if budget is not None and budget <= 0:
                break
            epoch_started = time.perf_counter()
            losses, psnrs = self._run_epoch(video, model, params, epoch, budget, quantized=False)
            if not losses:
                break
            step += len(losses)
            rows.append(self._epoch_row(epoch, step, losses, psnrs, epoch_started))

        if cfg.quantize_aware_steps:
            rows += self.finish_quantized(video, model, cfg.quantize_aware_steps, first_epoch=len(rows), first_step=step)
            step += cfg.quantize_aware_steps

        train_seconds = time.perf_counter() - started
        history = pd.DataFrame(rows, columns=HISTORY_COLUMNS)
        if rows:
            last = rows[-1]
            logger.info(
                f"Trained {len(rows)} epochs / {step} steps in {train_seconds:.1f}s, "
                f"last epoch PSNR {last['psnr']:.2f} dB"
            )
        if log_path is not None:
            write_report(history, log_path)
        return TrainResult(model=model, history=history, train_seconds=train_seconds)


def train(
    video: FrameSequence,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    raster_cfg: Optional[RasterConfig] = None,
    log_path: Union[str, Path, None] = None,
) -> TrainResult:
    model = build_model(video, model_cfg, seed=train_cfg.seed)
    return VideoTrainer(train_cfg, raster_cfg).fit(video, model, log_path=log_path)


def render_video(
    model: GaussianVideoModel, rasterizer: Optional[TileRasterizer] = None, frames: Optional[range] = None
) -> np.ndarray:
    """(T, H, W, 3) unclamped renders for every requested frame index."""
    rasterizer = rasterizer or TileRasterizer()
    indices = frames if frames is not None else range(model.num_frames)
    return np.stack([render_frame(model, t, rasterizer) for t in indices])


def evaluate(
    model: GaussianVideoModel,
    video: FrameSequence,
    rasterizer: Optional[TileRasterizer] = None,
    quantize_output: bool = False,
) -> EvaluationReport:
    """Per-frame PSNR / MS-SSIM of clamped renders; ``quantize_output`` scores the 8-bit frames decode would write."""
    rasterizer = rasterizer or TileRasterizer()
    frames: List[FrameMetrics] = []
    scales = 0
    for t in range(video.num_frames):
        image = render_frame(model, t, rasterizer)
        if quantize_output:
            image = to_uint8(image) / 255.0
        report = metric_report(video.frames[t], image)
        scales = report.ms_ssim_scales
        frames.append(FrameMetrics(frame=t, psnr_db=report.psnr_db, ms_ssim=report.ms_ssim))
    return summarize(frames, scales)


def summarize(frames: List[FrameMetrics], scales: int) -> EvaluationReport:
    return EvaluationReport(
        frames=frames,
        mean_psnr_db=float(np.mean([f.psnr_db for f in frames])),
        mean_ms_ssim=float(np.mean([f.ms_ssim for f in frames])),
        ms_ssim_scales=scales,
    )
