from pydantic import BaseModel, model_validator
from typing import Optional
import numpy as np


class FrameSequence(BaseModel):
    """T frames of shape (H, W, 3) with values in [0, 1]."""
    frames: np.ndarray          # (T, H, W, 3) float64
    source: Optional[str] = None

    class Config:
        arbitrary_types_allowed = True

    @model_validator(mode="after")
    def _check_shape(self) -> "FrameSequence":
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3 or self.frames.shape[0] < 1:
            raise ValueError(f"frames must have shape (T>=1, H, W, 3), got {self.frames.shape}")
        return self

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    def t_norm(self, t_index: int) -> float:
        return normalized_time(t_index, self.num_frames)


class TemporalMap(BaseModel):
    """Channel-summed cumulative |I_{t+1} - I_t|, shape (H, W)."""
    data: np.ndarray
    total: float

    class Config:
        arbitrary_types_allowed = True


def normalized_time(t_index: int, num_frames: int) -> float:
    """Zero-based frame index to [0, 1]; a single frame maps to 0."""
    if num_frames <= 1:
        return 0.0
    return t_index / (num_frames - 1)
