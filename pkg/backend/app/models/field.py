from pydantic import BaseModel
from typing import List, Dict
import numpy as np


class MlpWeights(BaseModel):
    """Dense layers ``x @ W + b``; ReLU between layers, nothing after the last."""
    weights: List[np.ndarray]   # (in, out) each
    biases: List[np.ndarray]    # (out,) each

    class Config:
        arbitrary_types_allowed = True

    @property
    def in_dim(self) -> int:
        return int(self.weights[0].shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.weights[-1].shape[1])

    @property
    def depth(self) -> int:
        return len(self.weights)

    def param_count(self) -> int:
        return int(sum(w.size + b.size for w, b in zip(self.weights, self.biases)))

    def named_arrays(self, prefix: str) -> Dict[str, np.ndarray]:
        arrays: Dict[str, np.ndarray] = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"{prefix}.{i}.weight"] = w
            arrays[f"{prefix}.{i}.bias"] = b
        return arrays

    def zeros_like(self) -> "MlpWeights":
        return MlpWeights(
            weights=[np.zeros_like(w) for w in self.weights],
            biases=[np.zeros_like(b) for b in self.biases],
        )


class PlaneLevel(BaseModel):
    """One resolution level: XY (Rx, Ry, C), XT (Rx, Rt, C), YT (Ry, Rt, C).

    Grid axis 0 follows the first letter of the plane name, axis 1 the second.
    """
    ratio: int
    xy: np.ndarray
    xt: np.ndarray
    yt: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @property
    def feature_dim(self) -> int:
        return int(self.xy.shape[2])

    def grids(self) -> Dict[str, np.ndarray]:
        return {"xy": self.xy, "xt": self.xt, "yt": self.yt}

    def element_count(self) -> int:
        return int(self.xy.size + self.xt.size + self.yt.size)


class PlaneSet(BaseModel):
    """Multi-resolution plane encoder: levels plus the fusion MLP."""
    levels: List[PlaneLevel]
    fusion: MlpWeights

    class Config:
        arbitrary_types_allowed = True

    @property
    def feature_dim(self) -> int:
        return self.levels[0].feature_dim

    @property
    def out_dim(self) -> int:
        return self.fusion.out_dim

    def named_arrays(self) -> Dict[str, np.ndarray]:
        arrays: Dict[str, np.ndarray] = {}
        for i, level in enumerate(self.levels):
            for name, grid in level.grids().items():
                arrays[f"planes.{i}.{name}"] = grid
        arrays.update(self.fusion.named_arrays("fusion"))
        return arrays

    def zeros_like(self) -> "PlaneSet":
        return PlaneSet(
            levels=[
                PlaneLevel(
                    ratio=level.ratio,
                    xy=np.zeros_like(level.xy),
                    xt=np.zeros_like(level.xt),
                    yt=np.zeros_like(level.yt),
                )
                for level in self.levels
            ],
            fusion=self.fusion.zeros_like(),
        )


class EncoderGrads(BaseModel):
    """Gradients mirroring a PlaneSet, plus d_query (N, 3) w.r.t. normalized (x, y, t)."""
    planes: PlaneSet
    d_query: np.ndarray

    class Config:
        arbitrary_types_allowed = True


class FieldGrads(BaseModel):
    """Gradients for the pure-MLP deformation field."""
    mlp: MlpWeights
    d_query: np.ndarray

    class Config:
        arbitrary_types_allowed = True
