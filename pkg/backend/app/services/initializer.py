from typing import Optional
import logging
import numpy as np

from ..models.config import ModelConfig
from ..models.gaussian import GaussianCloud
from ..models.video import FrameSequence, TemporalMap
from .gaussian_core import isotropic_chol_raw

logger = logging.getLogger(__name__)


def temporal_gradient_map(video: FrameSequence) -> TemporalMap:
    """Sum over t of |I_{t+1} - I_t|, reduced over channels by summation."""
    frames = video.frames
    if frames.shape[0] < 2:
        data = np.zeros(frames.shape[1:3])
    else:
        data = np.abs(np.diff(frames, axis=0)).sum(axis=(0, 3))
    return TemporalMap(data=data, total=float(data.sum()))


def sample_means(
    tmap: TemporalMap, n: int, floor_eps: float = 0.02, seed: Optional[int] = 0
) -> np.ndarray:
    """Draw n pixel positions with p ∝ map + floor_eps * mean(map), jittered inside the pixel."""
    if n < 1:
        raise ValueError(f"need at least one Gaussian, got n={n}")
    height, width = tmap.data.shape
    rng = np.random.default_rng(seed)
    weights = tmap.data.ravel().astype(np.float64)
    weights = weights + floor_eps * weights.mean()
    total = weights.sum()
    if total <= 0.0:
        probs = np.full(weights.size, 1.0 / weights.size)
    else:
        probs = weights / total
    flat = rng.choice(weights.size, size=n, p=probs)
    rows, cols = np.divmod(flat, width)
    jitter = rng.random((n, 2))
    return np.stack([cols + jitter[:, 0], rows + jitter[:, 1]], axis=1)


def random_means(n: int, width: int, height: int, seed: Optional[int] = 0) -> np.ndarray:
    if n < 1:
        raise ValueError(f"need at least one Gaussian, got n={n}")
    rng = np.random.default_rng(seed)
    return rng.random((n, 2)) * np.array([width, height], dtype=np.float64)


def init_cloud(video: FrameSequence, means: np.ndarray, config: ModelConfig = None) -> GaussianCloud:
    """
    Base cloud from sampled means: isotropic Sigma with s = sqrt(H*W/N) so the
    Gaussians tile the frame on average, color = temporal mean at the nearest pixel.
    """
    n = means.shape[0]
    if config is not None and config.num_gaussians != n:
        raise ValueError(f"config asks for {config.num_gaussians} Gaussians, got {n} means")
    height, width = video.height, video.width
    scale = np.sqrt(height * width / n)

    mean_frame = video.frames.mean(axis=0)
    cols = np.clip(np.floor(means[:, 0]).astype(np.int64), 0, width - 1)
    rows = np.clip(np.floor(means[:, 1]).astype(np.int64), 0, height - 1)

    logger.info(f"Initialized {n} Gaussians on {width}x{height}, scale {scale:.2f}px")
    return GaussianCloud(
        means=means.astype(np.float64).copy(),
        chol_raw=np.tile(isotropic_chol_raw(scale), (n, 1)),
        colors=mean_frame[rows, cols].astype(np.float64),
        frame_width=width,
        frame_height=height,
        num_frames=video.num_frames,
    )
