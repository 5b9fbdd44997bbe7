from typing import Callable
import numpy as np
import pytest

from app.models.config import ModelConfig, PlaneResolution, RasterConfig
from app.models.field import MlpWeights
from app.models.gaussian import GaussianCloud
from app.models.video import FrameSequence
from app.services.mlp import mlp_forward
from app.services.model_factory import build_model


def moving_square(num_frames: int = 16, size: int = 64, square: int = 16, step: int = 2) -> FrameSequence:
    """Gray background with a red square sliding right by ``step`` px per frame."""
    frames = np.full((num_frames, size, size, 3), 0.25)
    top = (size - square) // 2
    for t in range(num_frames):
        left = (t * step) % (size - square)
        frames[t, top:top + square, left:left + square] = (0.9, 0.2, 0.1)
    return FrameSequence(frames=frames, source="synthetic:moving_square")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def make_cloud(rng) -> Callable[..., GaussianCloud]:
    """Random clouds with means inside the frame and scales of a few pixels."""
    def _make(n: int = 8, width: int = 24, height: int = 20, scale: float = 0.6) -> GaussianCloud:
        means = rng.uniform(0.0, 1.0, size=(n, 2)) * np.array([width, height])
        chol_raw = np.column_stack([
            rng.normal(1.5, scale, size=n),
            rng.normal(0.0, scale, size=n),
            rng.normal(1.5, scale, size=n),
        ])
        colors = rng.uniform(-0.5, 1.0, size=(n, 3))
        return GaussianCloud(
            means=means, chol_raw=chol_raw, colors=colors, frame_width=width, frame_height=height
        )
    return _make


@pytest.fixture
def central_diff() -> Callable:
    """Central finite differences of a scalar function over every entry of ``x`` (modified in place)."""
    def _grad(f: Callable[[], float], x: np.ndarray, step: float = 1e-4) -> np.ndarray:
        grad = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            orig = x[idx]
            x[idx] = orig + step
            up = f()
            x[idx] = orig - step
            down = f()
            x[idx] = orig
            grad[idx] = (up - down) / (2.0 * step)
        return grad
    return _grad


@pytest.fixture
def assert_grad_close() -> Callable:
    def _check(analytic: np.ndarray, numeric: np.ndarray, rtol: float = 1e-3, atol: float = 1e-6) -> None:
        err = np.abs(analytic - numeric)
        ok = (err <= atol) | (err <= rtol * np.maximum(np.abs(numeric), np.abs(analytic)))
        assert ok.all(), f"max abs error {err.max():.3e} at {np.unravel_index(err.argmax(), err.shape)}"
    return _check


@pytest.fixture
def tiny_clip() -> FrameSequence:
    return moving_square(num_frames=4, size=16, square=6, step=2)


@pytest.fixture(scope="session")
def square_clip() -> Callable[..., FrameSequence]:
    return moving_square


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    return ModelConfig(
        num_gaussians=24,
        plane_resolution=PlaneResolution(x=4, y=4, t=2),
        ratios=[1, 2],
        feature_dim=3,
        fusion_hidden=[6],
        out_dim=5,
    )


@pytest.fixture
def exact_raster() -> RasterConfig:
    return RasterConfig(tile_size=8, cutoff_sigma=float("inf"))


@pytest.fixture
def tiny_model(tiny_clip, tiny_model_config, rng):
    """A built model whose decoder head is non-zero so every parameter receives gradient."""
    model = build_model(tiny_clip, tiny_model_config, seed=0)
    for w, b in zip(model.head.weights, model.head.biases):
        w[...] = rng.normal(0.0, 0.1, size=w.shape)
        b[...] = rng.normal(0.0, 0.1, size=b.shape)
    for level in model.planes.levels:
        level.xt[...] += rng.normal(0.0, 0.1, size=level.xt.shape)
        level.yt[...] += rng.normal(0.0, 0.1, size=level.yt.shape)
    return model


@pytest.fixture
def relu_margin() -> Callable[[MlpWeights, np.ndarray], float]:
    """Smallest |pre-activation| over the hidden ReLU layers for input ``x``."""
    def _margin(mlp: MlpWeights, x: np.ndarray) -> float:
        _, cache = mlp_forward(mlp, x)
        hidden = cache[mlp.depth:][:-1]
        return min((float(np.abs(z).min()) for z in hidden), default=float("inf"))
    return _margin
