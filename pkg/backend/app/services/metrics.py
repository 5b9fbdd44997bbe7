from typing import Optional, Tuple
import logging
import math
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.exceptions import ShapeMismatchError
from ..models.reports import MetricReport

logger = logging.getLogger(__name__)

PSNR_CAP_DB = 100.0
MS_SSIM_WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])
WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
K1 = 0.01
K2 = 0.03


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")


def psnr(a: np.ndarray, b: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    """10 log10(1 / MSE) for [0, 1] images; identical inputs give the 100 dB cap.

    ``mask`` (H, W) restricts the MSE to selected pixels (region PSNR).
    """
    _check_pair(a, b)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if mask is not None:
        diff = diff[mask]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / mse))


# ============================= SSIM ============================= #

def gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _filter_valid(x: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Separable 'valid' filtering of (H, W, C) along both spatial axes."""
    rows = np.einsum("hwck,k->hwc", sliding_window_view(x, window.size, axis=0), window)
    return np.einsum("hwck,k->hwc", sliding_window_view(rows, window.size, axis=1), window)


def _ssim_maps(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-pixel SSIM and contrast-structure maps over the valid region."""
    window = gaussian_window()
    c1 = (K1 * 1.0) ** 2
    c2 = (K2 * 1.0) ** 2
    mu_a = _filter_valid(a, window)
    mu_b = _filter_valid(b, window)
    var_a = _filter_valid(a * a, window) - mu_a * mu_a
    var_b = _filter_valid(b * b, window) - mu_b * mu_b
    cov = _filter_valid(a * b, window) - mu_a * mu_b
    cs = (2.0 * cov + c2) / (var_a + var_b + c2)
    luminance = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    return luminance * cs, cs


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale SSIM, Gaussian window, averaged over channels and the valid region."""
    _check_pair(a, b)
    a, b = _as_hwc(a), _as_hwc(b)
    if min(a.shape[0], a.shape[1]) < WINDOW_SIZE:
        raise ShapeMismatchError(f"image {a.shape[:2]} is smaller than the {WINDOW_SIZE}px SSIM window")
    s_map, _ = _ssim_maps(a, b)
    return float(s_map.mean())


def ms_ssim_scales(height: int, width: int, max_scales: int = 5) -> int:
    """Largest scale count whose coarsest image still holds one window."""
    scales = 0
    size = min(height, width)
    while scales < max_scales and size >= WINDOW_SIZE:
        scales += 1
        size //= 2
    return scales


def _downsample(x: np.ndarray) -> np.ndarray:
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    x = x[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def _as_hwc(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[:, :, None] if x.ndim == 2 else x


def ms_ssim_with_scales(a: np.ndarray, b: np.ndarray) -> Tuple[float, int]:
    _check_pair(a, b)
    a, b = _as_hwc(a), _as_hwc(b)
    scales = ms_ssim_scales(a.shape[0], a.shape[1])
    if scales == 0:
        raise ShapeMismatchError(f"image {a.shape[:2]} is smaller than the {WINDOW_SIZE}px SSIM window")
    if scales < len(MS_SSIM_WEIGHTS):
        logger.debug(f"MS-SSIM on {a.shape[0]}x{a.shape[1]} uses {scales} scales")
    weights = MS_SSIM_WEIGHTS[:scales] / MS_SSIM_WEIGHTS[:scales].sum()

    value = 1.0
    for level in range(scales):
        s_map, cs_map = _ssim_maps(a, b)
        term = s_map.mean() if level == scales - 1 else cs_map.mean()
        # negative structure terms are clipped so the weighted power stays real
        value *= max(float(term), 0.0) ** weights[level]
        if level < scales - 1:
            a, b = _downsample(a), _downsample(b)
    return float(value), scales


def ms_ssim(a: np.ndarray, b: np.ndarray) -> float:
    return ms_ssim_with_scales(a, b)[0]


def metric_report(reference: np.ndarray, test: np.ndarray) -> MetricReport:
    ref = np.clip(reference, 0.0, 1.0)
    out = np.clip(test, 0.0, 1.0)
    value, scales = ms_ssim_with_scales(ref, out)
    return MetricReport(psnr_db=psnr(ref, out), ms_ssim=value, ms_ssim_scales=scales)
