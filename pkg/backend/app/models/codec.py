from pydantic import BaseModel, Field
from typing import Tuple
import numpy as np

from .config import ModelConfig

FORMAT_VERSION = 1


class QuantizedTensor(BaseModel):
    """Per-tensor affine code: value = min_val + scale * code (float32 min and scale, evaluated in float64)."""
    name: str = ""
    codes: np.ndarray           # uint8 (or uint16 for 16-bit means)
    min_val: float              # stored as float32
    scale: float                # stored as float32
    shape: Tuple[int, ...]
    bits: int = 8

    class Config:
        arbitrary_types_allowed = True

    @property
    def levels(self) -> int:
        return (1 << self.bits) - 1

    def nbytes(self) -> int:
        return int(self.codes.size * (self.bits // 8))


class StreamHeader(BaseModel):
    """Config block stored at the front of every bitstream."""
    format_version: int = FORMAT_VERSION
    num_frames: int = Field(ge=1)
    model: ModelConfig
