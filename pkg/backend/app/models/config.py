from pydantic import BaseModel, Field, field_validator, model_validator
from typing import List, Dict, Optional
from enum import Enum
import math

from ..core.config import settings


class DeformBackend(str, Enum):
    MULTIPLANE = "multiplane"
    MLP = "mlp"


class InitMethod(str, Enum):
    TEMPORAL_GRADIENT = "temporal_gradient"
    RANDOM = "random"


class OptimizerKind(str, Enum):
    ADAN = "adan"
    ADAM = "adam"


class FrameOrder(str, Enum):
    SEQUENTIAL = "sequential"
    SHUFFLED = "shuffled"


class PlaneResolution(BaseModel):
    """Base plane extents along x, y and t; each level multiplies them by its ratio."""
    x: int = Field(default=16, ge=2)
    y: int = Field(default=16, ge=2)
    t: int = Field(default=8, ge=2)

    class Config:
        extra = "forbid"


class QuantizationConfig(BaseModel):
    mean_bits: int = Field(default=8)

    class Config:
        extra = "forbid"

    @field_validator("mean_bits")
    @classmethod
    def _supported_bits(cls, value: int) -> int:
        if value not in (8, 16):
            raise ValueError("mean_bits must be 8 or 16")
        return value


class ModelConfig(BaseModel):
    """Architecture of one GaussianVideo model; the JSON config document."""
    width: Optional[int] = Field(default=None, ge=1)
    height: Optional[int] = Field(default=None, ge=1)
    num_gaussians: int = Field(default=31024, ge=1)

    # Multi-plane encoder
    plane_resolution: PlaneResolution = PlaneResolution()
    ratios: List[int] = Field(default_factory=lambda: [1, 2])
    feature_dim: int = Field(default=16, ge=1)          # C per plane
    fusion_hidden: List[int] = Field(default_factory=lambda: [64])
    out_dim: int = Field(default=64, ge=1)              # h

    # Decoder head
    decoder_depth: int = Field(default=1, ge=1)
    freeze_mean_delta: bool = False

    # Ablation backend
    backend: DeformBackend = DeformBackend.MULTIPLANE
    mlp_hidden: List[int] = Field(default_factory=lambda: [128, 128])
    mlp_bands: int = Field(default=6, ge=0)

    # Initialization
    init: InitMethod = InitMethod.TEMPORAL_GRADIENT
    floor_eps: float = Field(default=0.02, ge=0.0)

    quantization: QuantizationConfig = QuantizationConfig()

    class Config:
        extra = "forbid"

    @field_validator("ratios")
    @classmethod
    def _positive_ratios(cls, value: List[int]) -> List[int]:
        if any(r < 1 for r in value):
            raise ValueError("plane ratios must be >= 1")
        return value

    @field_validator("fusion_hidden", "mlp_hidden")
    @classmethod
    def _positive_widths(cls, value: List[int]) -> List[int]:
        if any(w < 1 for w in value):
            raise ValueError("hidden widths must be >= 1")
        return value

    def resolved(self, width: int, height: int) -> "ModelConfig":
        """Copy with frame dimensions filled in from the video."""
        return self.model_copy(update={"width": width, "height": height})


class TrainConfig(BaseModel):
    epochs: int = Field(default=300, ge=0)
    lr: float = Field(default=0.001, gt=0.0)
    tv_lambda: float = Field(default=1e-4, ge=0.0)
    optimizer: OptimizerKind = OptimizerKind.ADAN
    adan_betas: List[float] = Field(default_factory=lambda: [0.98, 0.92, 0.99])
    adam_betas: List[float] = Field(default_factory=lambda: [0.9, 0.999])
    eps: float = 1e-8
    weight_decay: float = Field(default=0.0, ge=0.0)
    seed: int = 0
    frame_order: FrameOrder = FrameOrder.SHUFFLED
    # Per-group learning rates keyed by parameter-name prefix (means, chol_raw, colors, planes, ...)
    lr_overrides: Dict[str, float] = Field(default_factory=dict)
    # Cap on total optimizer steps; None trains every frame of every epoch
    max_steps: Optional[int] = Field(default=None, ge=0)
    # Extra steps rendered from the quantized model, means frozen on their code grid
    quantize_aware_steps: int = Field(default=0, ge=0)
    freeze_head: bool = False

    class Config:
        extra = "forbid"

    @model_validator(mode="after")
    def _check_betas(self) -> "TrainConfig":
        if len(self.adan_betas) != 3 or len(self.adam_betas) != 2:
            raise ValueError("adan_betas needs 3 values, adam_betas needs 2")
        return self

    @classmethod
    def from_settings(cls, **overrides) -> "TrainConfig":
        values = dict(
            epochs=settings.EPOCHS,
            lr=settings.LEARNING_RATE,
            tv_lambda=settings.TV_LAMBDA,
            optimizer=settings.OPTIMIZER,
            seed=settings.SEED,
            frame_order=settings.FRAME_ORDER,
            quantize_aware_steps=settings.QUANTIZE_AWARE_STEPS,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def lr_for(self, param_name: str) -> float:
        group = param_name.split(".")[0]
        return self.lr_overrides.get(group, self.lr)


class RasterConfig(BaseModel):
    tile_size: int = Field(default=16, ge=1)
    cutoff_sigma: float = 3.0
    deterministic: bool = True
    num_workers: int = Field(default=1, ge=1)

    @field_validator("cutoff_sigma")
    @classmethod
    def _positive_cutoff(cls, value: float) -> float:
        if math.isfinite(value) and value <= 0:
            raise ValueError("cutoff_sigma must be > 0 (or non-finite to disable truncation)")
        return value

    @property
    def truncates(self) -> bool:
        return math.isfinite(self.cutoff_sigma)

    @classmethod
    def from_settings(cls, **overrides) -> "RasterConfig":
        values = dict(
            tile_size=settings.TILE_SIZE,
            cutoff_sigma=settings.CUTOFF_SIGMA,
            deterministic=settings.DETERMINISTIC,
            num_workers=settings.NUM_WORKERS,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
