from typing import Dict, Tuple
import numpy as np

from ..core.exceptions import ShapeMismatchError
from ..models.field import PlaneSet


def l2_loss(pred: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """(1 / HW) * sum over pixels of the squared RGB distance, and its gradient."""
    if pred.shape != target.shape:
        raise ShapeMismatchError(f"prediction {pred.shape} vs target {target.shape}")
    num_pixels = pred.shape[0] * pred.shape[1]
    diff = pred - target
    loss = float(np.sum(diff * diff) / num_pixels)
    return loss, (2.0 / num_pixels) * diff


def grid_total_variation(grid: np.ndarray) -> Tuple[float, np.ndarray]:
    """Unnormalized anisotropic TV over both grid axes and all channels, with its subgradient."""
    d0 = grid[1:, :, :] - grid[:-1, :, :]
    d1 = grid[:, 1:, :] - grid[:, :-1, :]
    value = float(np.abs(d0).sum() + np.abs(d1).sum())
    grad = np.zeros_like(grid)
    s0 = np.sign(d0)
    s1 = np.sign(d1)
    grad[1:, :, :] += s0
    grad[:-1, :, :] -= s0
    grad[:, 1:, :] += s1
    grad[:, :-1, :] -= s1
    return value, grad


def tv_loss(planes: PlaneSet) -> Tuple[float, Dict[str, np.ndarray]]:
    """TV summed over every grid of every level, normalized by the total element count.

    Gradients come back keyed like ``PlaneSet.named_arrays`` (``planes.<level>.<plane>``).
    """
    total = 0.0
    count = 0
    grads: Dict[str, np.ndarray] = {}
    for i, level in enumerate(planes.levels):
        for name, grid in level.grids().items():
            value, grad = grid_total_variation(grid)
            total += value
            count += grid.size
            grads[f"planes.{i}.{name}"] = grad
    if count == 0:
        return 0.0, grads
    for key in grads:
        grads[key] /= count
    return total / count, grads


def total_loss(recon: float, tv: float, tv_lambda: float) -> float:
    if tv_lambda < 0:
        raise ValueError("tv_lambda must be >= 0")
    return recon + tv_lambda * tv
