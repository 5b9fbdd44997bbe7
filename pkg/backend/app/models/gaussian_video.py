from pydantic import BaseModel
from typing import Dict, Optional
import numpy as np

from .config import ModelConfig, DeformBackend
from .field import MlpWeights, PlaneSet
from .gaussian import GaussianCloud


class GaussianVideoModel(BaseModel):
    """Everything needed to render any frame: base cloud, deformation field and decoder head."""
    config: ModelConfig
    num_frames: int
    cloud: GaussianCloud
    planes: Optional[PlaneSet] = None   # multiplane backend
    field: Optional[MlpWeights] = None  # mlp backend
    head: MlpWeights

    class Config:
        arbitrary_types_allowed = True

    @property
    def width(self) -> int:
        return self.cloud.frame_width

    @property
    def height(self) -> int:
        return self.cloud.frame_height

    @property
    def backend(self) -> DeformBackend:
        return self.config.backend

    def parameters(self) -> Dict[str, np.ndarray]:
        """Ordered name -> array mapping; arrays are the live model storage."""
        params: Dict[str, np.ndarray] = {
            "means": self.cloud.means,
            "chol_raw": self.cloud.chol_raw,
            "colors": self.cloud.colors,
        }
        if self.planes is not None:
            params.update(self.planes.named_arrays())
        if self.field is not None:
            params.update(self.field.named_arrays("field"))
        params.update(self.head.named_arrays("head"))
        return params

    def param_count(self) -> int:
        return int(sum(a.size for a in self.parameters().values()))

    def copy(self) -> "GaussianVideoModel":
        return self.model_copy(deep=True)
