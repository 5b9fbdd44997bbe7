"""
Adan and Adam written against plain ``name -> ndarray`` dictionaries.

Both update parameters in place so the arrays owned by the model stay live.
"""
from pydantic import BaseModel
from typing import Dict
import logging
import numpy as np

from ..core.exceptions import NonFiniteError, ShapeMismatchError
from ..models.config import TrainConfig, OptimizerKind

logger = logging.getLogger(__name__)


class OptimizerState(BaseModel):
    step: int = 0
    # buffers[param_name][moment_name]
    buffers: Dict[str, Dict[str, np.ndarray]] = {}

    class Config:
        arbitrary_types_allowed = True


def _check_grads(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
    for name, param in params.items():
        if name not in grads:
            continue
        g = grads[name]
        if g.shape != param.shape:
            raise ShapeMismatchError(f"gradient for {name} has shape {g.shape}, parameter {param.shape}")
        if not np.isfinite(g).all():
            raise NonFiniteError("non-finite gradient", group=name)


class Adan:
    """m, v, n moments plus the previous gradient; decoupled weight decay."""

    def __init__(self, config: TrainConfig):
        self.config = config
        self.beta1, self.beta2, self.beta3 = config.adan_betas
        self.eps = config.eps
        self.weight_decay = config.weight_decay
        self.state = OptimizerState()

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        _check_grads(params, grads)
        self.state.step += 1
        k = self.state.step
        bc1 = 1.0 - self.beta1 ** k
        bc2 = 1.0 - self.beta2 ** k
        bc3 = 1.0 - self.beta3 ** k

        for name, param in params.items():
            if name not in grads:
                continue
            g = grads[name]
            buf = self.state.buffers.get(name)
            if buf is None:
                buf = {
                    "m": np.zeros_like(param), "v": np.zeros_like(param),
                    "n": np.zeros_like(param), "prev_grad": g.copy(),
                }
                self.state.buffers[name] = buf
            diff = g - buf["prev_grad"]
            update = g + self.beta2 * diff

            buf["m"] *= self.beta1
            buf["m"] += (1.0 - self.beta1) * g
            buf["v"] *= self.beta2
            buf["v"] += (1.0 - self.beta2) * diff
            buf["n"] *= self.beta3
            buf["n"] += (1.0 - self.beta3) * update * update
            buf["prev_grad"] = g.copy()

            lr = self.config.lr_for(name)
            denom = np.sqrt(buf["n"] / bc3) + self.eps
            if self.weight_decay:
                param *= 1.0 - lr * self.weight_decay
            param -= lr * (buf["m"] / bc1 + self.beta2 * buf["v"] / bc2) / denom


class Adam:
    def __init__(self, config: TrainConfig):
        self.config = config
        self.beta1, self.beta2 = config.adam_betas
        self.eps = config.eps
        self.weight_decay = config.weight_decay
        self.state = OptimizerState()

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        _check_grads(params, grads)
        self.state.step += 1
        bc1 = 1.0 - self.beta1 ** self.state.step
        bc2 = 1.0 - self.beta2 ** self.state.step

        for name, param in params.items():
            if name not in grads:
                continue
            g = grads[name]
            buf = self.state.buffers.setdefault(name, {"m": np.zeros_like(param), "v": np.zeros_like(param)})
            buf["m"] *= self.beta1
            buf["m"] += (1.0 - self.beta1) * g
            buf["v"] *= self.beta2
            buf["v"] += (1.0 - self.beta2) * (g * g)

            lr = self.config.lr_for(name)
            if self.weight_decay:
                param *= 1.0 - lr * self.weight_decay
            param -= (lr / bc1) * buf["m"] / (np.sqrt(buf["v"] / bc2) + self.eps)


def build_optimizer(config: TrainConfig):
    if config.optimizer == OptimizerKind.ADAM:
        return Adam(config)
    return Adan(config)


def optimizer_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], optimizer) -> OptimizerState:
    optimizer.step(params, grads)
    return optimizer.state
