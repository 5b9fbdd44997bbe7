from typing import Dict, List, Tuple
import logging
import numpy as np

from ..models.field import MlpWeights, PlaneLevel, PlaneSet, EncoderGrads, FieldGrads
from .mlp import mlp_forward, mlp_backward

logger = logging.getLogger(__name__)

# Which query columns (x=0, y=1, t=2) index each plane's two grid axes.
PLANE_AXES: Dict[str, Tuple[int, int]] = {"xy": (0, 1), "xt": (0, 2), "yt": (1, 2)}


# ============================= Queries ============================= #

def gaussian_queries(means: np.ndarray, width: int, height: int, t_norm: float) -> Tuple[np.ndarray, np.ndarray]:
    """Normalized (x, y, t) per Gaussian plus the (N, 2) mask where clamping let gradients through."""
    raw = means / np.array([width, height], dtype=np.float64)
    inside = ((raw >= 0.0) & (raw <= 1.0)).astype(np.float64)
    q = np.empty((means.shape[0], 3))
    q[:, :2] = np.clip(raw, 0.0, 1.0)
    q[:, 2] = t_norm
    return q, inside


def query_grad_to_means(d_query: np.ndarray, inside: np.ndarray, width: int, height: int) -> np.ndarray:
    return d_query[:, :2] * inside / np.array([width, height], dtype=np.float64)


# ============================= Bilinear planes ============================= #

def _footprint(n_u: int, n_v: int, u: np.ndarray, v: np.ndarray):
    # align-corners: continuous index u * (n - 1)
    fu = u * (n_u - 1)
    fv = v * (n_v - 1)
    i0 = np.clip(np.floor(fu), 0, n_u - 2).astype(np.int64)
    j0 = np.clip(np.floor(fv), 0, n_v - 2).astype(np.int64)
    return i0, j0, (fu - i0)[:, None], (fv - j0)[:, None]


def bilinear_sample(grid: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample an (n_u, n_v, C) grid at N points in [0, 1]^2 -> (N, C)."""
    i0, j0, wu, wv = _footprint(grid.shape[0], grid.shape[1], u, v)
    return ((1.0 - wu) * (1.0 - wv) * grid[i0, j0]
            + wu * (1.0 - wv) * grid[i0 + 1, j0]
            + (1.0 - wu) * wv * grid[i0, j0 + 1]
            + wu * wv * grid[i0 + 1, j0 + 1])


def bilinear_backward(
    grid: np.ndarray, u: np.ndarray, v: np.ndarray, d_out: np.ndarray, d_grid: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Scatter d_out into d_grid (in place) and return (d_u, d_v)."""
    n_u, n_v = grid.shape[0], grid.shape[1]
    i0, j0, wu, wv = _footprint(n_u, n_v, u, v)
    np.add.at(d_grid, (i0, j0), (1.0 - wu) * (1.0 - wv) * d_out)
    np.add.at(d_grid, (i0 + 1, j0), wu * (1.0 - wv) * d_out)
    np.add.at(d_grid, (i0, j0 + 1), (1.0 - wu) * wv * d_out)
    np.add.at(d_grid, (i0 + 1, j0 + 1), wu * wv * d_out)

    g00, g10 = grid[i0, j0], grid[i0 + 1, j0]
    g01, g11 = grid[i0, j0 + 1], grid[i0 + 1, j0 + 1]
    d_u = (n_u - 1) * (d_out * ((1.0 - wv) * (g10 - g00) + wv * (g11 - g01))).sum(axis=1)
    d_v = (n_v - 1) * (d_out * ((1.0 - wu) * (g01 - g00) + wu * (g11 - g10))).sum(axis=1)
    return d_u, d_v


def sample_plane(grid: np.ndarray, u: float, v: float) -> np.ndarray:
    """Single-point bilinear lookup; u, v already clamped to [0, 1]."""
    return bilinear_sample(grid, np.array([u], dtype=np.float64), np.array([v], dtype=np.float64))[0]


# ============================= Multi-plane encoder ============================= #

def _level_samples(level: PlaneLevel, q: np.ndarray) -> Dict[str, np.ndarray]:
    return {
        name: bilinear_sample(grid, q[:, PLANE_AXES[name][0]], q[:, PLANE_AXES[name][1]])
        for name, grid in level.grids().items()
    }


def plane_features(planes: PlaneSet, q: np.ndarray) -> Tuple[np.ndarray, List[Dict[str, np.ndarray]]]:
    """Concatenated per-level Hadamard products F_xy * F_xt * F_yt, (N, R*C)."""
    samples = [_level_samples(level, q) for level in planes.levels]
    features = [s["xy"] * s["xt"] * s["yt"] for s in samples]
    return np.concatenate(features, axis=1), samples


def encode(planes: PlaneSet, q: np.ndarray) -> np.ndarray:
    """F_out = MLP(concat_r(F_xy^r * F_xt^r * F_yt^r)) for (3,) or (N, 3) queries."""
    single = np.ndim(q) == 1
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    concat, _ = plane_features(planes, q)
    out, _ = mlp_forward(planes.fusion, concat)
    return out[0] if single else out


def encode_backward(planes: PlaneSet, q: np.ndarray, dL_dFout: np.ndarray) -> EncoderGrads:
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    dL_dFout = np.atleast_2d(dL_dFout)
    concat, samples = plane_features(planes, q)
    _, cache = mlp_forward(planes.fusion, concat)
    fusion_grads, d_concat = mlp_backward(planes.fusion, cache, dL_dFout)

    grads = planes.zeros_like()
    grads.fusion = fusion_grads
    d_query = np.zeros_like(q)
    width = planes.feature_dim
    for r, (level, s) in enumerate(zip(planes.levels, samples)):
        d_feat = d_concat[:, r * width:(r + 1) * width]
        # product rule across the three factors
        d_samples = {
            "xy": d_feat * s["xt"] * s["yt"],
            "xt": d_feat * s["xy"] * s["yt"],
            "yt": d_feat * s["xy"] * s["xt"],
        }
        level_grads = grads.levels[r].grids()
        for name, grid in level.grids().items():
            axis_u, axis_v = PLANE_AXES[name]
            d_u, d_v = bilinear_backward(grid, q[:, axis_u], q[:, axis_v], d_samples[name], level_grads[name])
            d_query[:, axis_u] += d_u
            d_query[:, axis_v] += d_v
    return EncoderGrads(planes=grads, d_query=d_query)


# ============================= Pure-MLP field (ablation) ============================= #

def positional_encoding(q: np.ndarray, num_bands: int) -> np.ndarray:
    """[q, sin(2^k pi q), cos(2^k pi q) for k < num_bands] -> (N, 3 + 6 * num_bands)."""
    parts = [q]
    for k in range(num_bands):
        freq = (2.0 ** k) * np.pi
        parts.append(np.sin(freq * q))
        parts.append(np.cos(freq * q))
    return np.concatenate(parts, axis=1)


def positional_encoding_backward(q: np.ndarray, num_bands: int, d_enc: np.ndarray) -> np.ndarray:
    d_q = d_enc[:, 0:3].copy()
    for k in range(num_bands):
        freq = (2.0 ** k) * np.pi
        base = 3 + 6 * k
        d_q += d_enc[:, base:base + 3] * freq * np.cos(freq * q)
        d_q -= d_enc[:, base + 3:base + 6] * freq * np.sin(freq * q)
    return d_q


def mlp_field_encode(weights: MlpWeights, q: np.ndarray, num_bands: int) -> np.ndarray:
    single = np.ndim(q) == 1
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    out, _ = mlp_forward(weights, positional_encoding(q, num_bands))
    return out[0] if single else out


def mlp_field_encode_backward(
    weights: MlpWeights, q: np.ndarray, num_bands: int, dL_dFout: np.ndarray
) -> FieldGrads:
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    enc = positional_encoding(q, num_bands)
    _, cache = mlp_forward(weights, enc)
    mlp_grads, d_enc = mlp_backward(weights, cache, np.atleast_2d(dL_dFout))
    return FieldGrads(mlp=mlp_grads, d_query=positional_encoding_backward(q, num_bands, d_enc))
