from pydantic import BaseModel
from typing import List, Tuple
import numpy as np

# Pixel convention: pixel (row i, col j) has its center at (x, y) = (j + 0.5, i + 0.5).
# Images are numpy arrays of shape (H, W, 3), row-major RGB, unclamped.


class Gaussian2D(BaseModel):
    """One 2D Gaussian: 2 mean + 3 raw Cholesky + 3 color parameters."""
    mean: Tuple[float, float]
    chol_raw: Tuple[float, float, float]
    color: Tuple[float, float, float]


class GaussianCloud(BaseModel):
    """N Gaussians stored column-wise: means (N, 2), chol_raw (N, 3), colors (N, 3)."""
    means: np.ndarray
    chol_raw: np.ndarray
    colors: np.ndarray
    frame_width: int
    frame_height: int
    num_frames: int = 1

    class Config:
        arbitrary_types_allowed = True

    @property
    def size(self) -> int:
        return int(self.means.shape[0])

    @classmethod
    def from_gaussians(
        cls, gaussians: List[Gaussian2D], frame_width: int, frame_height: int, num_frames: int = 1
    ) -> "GaussianCloud":
        return cls(
            means=np.array([g.mean for g in gaussians], dtype=np.float64).reshape(-1, 2),
            chol_raw=np.array([g.chol_raw for g in gaussians], dtype=np.float64).reshape(-1, 3),
            colors=np.array([g.color for g in gaussians], dtype=np.float64).reshape(-1, 3),
            frame_width=frame_width,
            frame_height=frame_height,
            num_frames=num_frames,
        )

    def gaussian(self, index: int) -> Gaussian2D:
        return Gaussian2D(
            mean=tuple(self.means[index]),
            chol_raw=tuple(self.chol_raw[index]),
            color=tuple(self.colors[index]),
        )

    def copy(self) -> "GaussianCloud":
        return self.model_copy(update={
            "means": self.means.copy(),
            "chol_raw": self.chol_raw.copy(),
            "colors": self.colors.copy(),
        })

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.means).all()
            and np.isfinite(self.chol_raw).all()
            and np.isfinite(self.colors).all()
        )


class DeformDelta(BaseModel):
    """Per-Gaussian additive deltas for one time step."""
    d_mean: np.ndarray      # (N, 2) pixels
    d_chol_raw: np.ndarray  # (N, 3) raw Cholesky space
    d_color: np.ndarray     # (N, 3)

    class Config:
        arbitrary_types_allowed = True

    @classmethod
    def zeros(cls, n: int) -> "DeformDelta":
        return cls(d_mean=np.zeros((n, 2)), d_chol_raw=np.zeros((n, 3)), d_color=np.zeros((n, 3)))

    @classmethod
    def from_packed(cls, packed: np.ndarray) -> "DeformDelta":
        """Split an (N, 8) decoder output as 2 | 3 | 3."""
        return cls(d_mean=packed[:, 0:2], d_chol_raw=packed[:, 2:5], d_color=packed[:, 5:8])

    def packed(self) -> np.ndarray:
        return np.concatenate([self.d_mean, self.d_chol_raw, self.d_color], axis=1)

    def __add__(self, other: "DeformDelta") -> "DeformDelta":
        return DeformDelta(
            d_mean=self.d_mean + other.d_mean,
            d_chol_raw=self.d_chol_raw + other.d_chol_raw,
            d_color=self.d_color + other.d_color,
        )


class RenderGrads(BaseModel):
    d_mean: np.ndarray      # (N, 2)
    d_chol_raw: np.ndarray  # (N, 3)
    d_color: np.ndarray     # (N, 3)

    class Config:
        arbitrary_types_allowed = True

    def packed(self) -> np.ndarray:
        return np.concatenate([self.d_mean, self.d_chol_raw, self.d_color], axis=1)
