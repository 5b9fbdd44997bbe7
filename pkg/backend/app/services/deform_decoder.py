from typing import Tuple
import numpy as np

from ..core.exceptions import ShapeMismatchError
from ..models.field import MlpWeights
from ..models.gaussian import Gaussian2D, GaussianCloud, DeformDelta
from .mlp import mlp_forward, mlp_backward

DELTA_WIDTH = 8  # 2 mean | 3 raw Cholesky | 3 color


def check_head(head: MlpWeights, feature_dim: int) -> None:
    if head.in_dim != feature_dim or head.out_dim != DELTA_WIDTH:
        raise ShapeMismatchError(
            f"decoder head maps {head.in_dim}->{head.out_dim}, expected {feature_dim}->{DELTA_WIDTH}"
        )


def decode(head: MlpWeights, f_out: np.ndarray, freeze_mean: bool = False) -> DeformDelta:
    packed, _ = mlp_forward(head, np.atleast_2d(f_out))
    if freeze_mean:
        packed = packed.copy()
        packed[:, 0:2] = 0.0
    return DeformDelta.from_packed(packed)


def decode_backward(
    head: MlpWeights, f_out: np.ndarray, d_delta: np.ndarray, freeze_mean: bool = False
) -> Tuple[MlpWeights, np.ndarray]:
    """d_delta is the (N, 8) packed gradient; returns (head grads, dL/dF_out)."""
    f_out = np.atleast_2d(f_out)
    _, cache = mlp_forward(head, f_out)
    if freeze_mean:
        d_delta = d_delta.copy()
        d_delta[:, 0:2] = 0.0
    return mlp_backward(head, cache, d_delta)


def apply_deform(base: GaussianCloud, delta: DeformDelta) -> GaussianCloud:
    """Additive deltas in raw parameter space; softplus is reapplied when the cloud is used."""
    return base.model_copy(update={
        "means": base.means + delta.d_mean,
        "chol_raw": base.chol_raw + delta.d_chol_raw,
        "colors": base.colors + delta.d_color,
    })


def apply_deform_single(base: Gaussian2D, d_mean, d_chol_raw, d_color) -> Gaussian2D:
    return Gaussian2D(
        mean=tuple(np.add(base.mean, d_mean)),
        chol_raw=tuple(np.add(base.chol_raw, d_chol_raw)),
        color=tuple(np.add(base.color, d_color)),
    )
