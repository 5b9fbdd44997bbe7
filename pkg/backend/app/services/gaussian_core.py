from typing import Tuple
import logging
import numpy as np

from ..models.gaussian import Gaussian2D

logger = logging.getLogger(__name__)

# Keeps the Cholesky diagonal away from zero so no Gaussian collapses to zero area.
CHOL_EPS = 1e-4


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def inverse_softplus(y: np.ndarray) -> np.ndarray:
    """log(exp(y) - 1), stable for large and small y > 0."""
    y = np.asarray(y, dtype=np.float64)
    return y + np.log(-np.expm1(-y))


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def cholesky_factors(chol_raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(..., 3) raw values -> (l11, l21, l22) of L = [[l11, 0], [l21, l22]]."""
    chol_raw = np.asarray(chol_raw)
    l11 = softplus(chol_raw[..., 0]) + CHOL_EPS
    l21 = chol_raw[..., 1]
    l22 = softplus(chol_raw[..., 2]) + CHOL_EPS
    return l11, l21, l22


def inverse_cov_entries(chol_raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Entries (a, b, c) of Sigma^-1 = [[a, b], [b, c]] computed from L^-1 directly."""
    l11, l21, l22 = cholesky_factors(chol_raw)
    a = 1.0 / (l11 * l11) + (l21 * l21) / (l11 * l11 * l22 * l22)
    b = -l21 / (l11 * l22 * l22)
    c = 1.0 / (l22 * l22)
    return a, b, c


def inverse_cov_backward(
    chol_raw: np.ndarray, d_a: np.ndarray, d_b: np.ndarray, d_c: np.ndarray
) -> np.ndarray:
    """Chain dL/d(a, b, c) back to dL/d(chol_raw); returns (N, 3)."""
    l11, l21, l22 = cholesky_factors(chol_raw)
    inv11 = 1.0 / l11
    inv22 = 1.0 / l22
    # a = 1/l11^2 + l21^2/(l11^2 l22^2), b = -l21/(l11 l22^2), c = 1/l22^2
    da_dl11 = -2.0 * (inv11 ** 3) * (1.0 + (l21 * inv22) ** 2)
    da_dl21 = 2.0 * l21 * (inv11 * inv22) ** 2
    da_dl22 = -2.0 * (l21 ** 2) * (inv11 ** 2) * (inv22 ** 3)
    db_dl11 = l21 * (inv11 ** 2) * (inv22 ** 2)
    db_dl21 = -inv11 * (inv22 ** 2)
    db_dl22 = 2.0 * l21 * inv11 * (inv22 ** 3)
    dc_dl22 = -2.0 * (inv22 ** 3)

    d_l11 = d_a * da_dl11 + d_b * db_dl11
    d_l21 = d_a * da_dl21 + d_b * db_dl21
    d_l22 = d_a * da_dl22 + d_b * db_dl22 + d_c * dc_dl22

    chol_raw = np.asarray(chol_raw)
    return np.stack(
        [d_l11 * sigmoid(chol_raw[..., 0]), d_l21, d_l22 * sigmoid(chol_raw[..., 2])],
        axis=-1,
    )


def cov_from_chol(chol_raw) -> Tuple[np.ndarray, np.ndarray, float]:
    """Sigma = L L^T for one raw 3-vector; returns (Sigma, Sigma^-1, log det Sigma)."""
    l11, l21, l22 = cholesky_factors(np.asarray(chol_raw, dtype=np.float64))
    L = np.array([[l11, 0.0], [l21, l22]], dtype=np.float64)
    sigma = L @ L.T
    a, b, c = inverse_cov_entries(np.asarray(chol_raw, dtype=np.float64))
    sigma_inv = np.array([[a, b], [b, c]], dtype=np.float64)
    logdet = float(2.0 * (np.log(l11) + np.log(l22)))
    return sigma, sigma_inv, logdet


def chol_raw_from_cov(sigma: np.ndarray) -> np.ndarray:
    """Inverse of cov_from_chol: factor Sigma and undo softplus + eps on the diagonal."""
    sigma = np.asarray(sigma, dtype=np.float64)
    l11 = np.sqrt(sigma[0, 0])
    l21 = sigma[1, 0] / l11
    l22 = np.sqrt(sigma[1, 1] - l21 * l21)
    return np.array([inverse_softplus(l11 - CHOL_EPS), l21, inverse_softplus(l22 - CHOL_EPS)])


def isotropic_chol_raw(scale: float) -> np.ndarray:
    """Raw values giving Sigma = diag(scale^2, scale^2)."""
    d = float(inverse_softplus(max(scale - CHOL_EPS, 1e-12)))
    return np.array([d, 0.0, d])


def eval_weight(g: Gaussian2D, p) -> float:
    """exp(-1/2 (p - mu)^T Sigma^-1 (p - mu)) for a single Gaussian and point."""
    a, b, c = inverse_cov_entries(np.asarray(g.chol_raw, dtype=np.float64))
    dx = float(p[0]) - g.mean[0]
    dy = float(p[1]) - g.mean[1]
    return float(np.exp(-0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy)))


def marginal_std(chol_raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """sqrt(Sigma_xx), sqrt(Sigma_yy) per Gaussian, used for culling boxes."""
    l11, l21, l22 = cholesky_factors(chol_raw)
    return l11, np.sqrt(l21 * l21 + l22 * l22)
