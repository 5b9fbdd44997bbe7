from typing import List, Tuple
import numpy as np

from ..core.exceptions import ShapeMismatchError
from ..models.field import MlpWeights


def init_mlp(dims: List[int], rng: np.random.Generator, zero_last: bool = False) -> MlpWeights:
    """Layers dims[0] -> ... -> dims[-1], uniform in +-1/sqrt(fan_in)."""
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        if zero_last and i == len(dims) - 2:
            weights.append(np.zeros((fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        else:
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
    return MlpWeights(weights=weights, biases=biases)


def mlp_forward(mlp: MlpWeights, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Returns the output and the pre-activations needed by mlp_backward."""
    if x.shape[-1] != mlp.in_dim:
        raise ShapeMismatchError(f"MLP expects input width {mlp.in_dim}, got {x.shape[-1]}")
    inputs = [x]
    pre_acts = []
    h = x
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = h @ w + b
        pre_acts.append(z)
        h = np.maximum(z, 0.0) if i < mlp.depth - 1 else z
        inputs.append(h)
    return h, inputs[:-1] + pre_acts


def mlp_backward(
    mlp: MlpWeights, cache: List[np.ndarray], d_out: np.ndarray
) -> Tuple[MlpWeights, np.ndarray]:
    """Gradients for every layer plus d_input, given the forward cache."""
    depth = mlp.depth
    inputs, pre_acts = cache[:depth], cache[depth:]
    d_weights: List[np.ndarray] = [None] * depth
    d_biases: List[np.ndarray] = [None] * depth
    d = d_out
    for i in range(depth - 1, -1, -1):
        d_weights[i] = inputs[i].T @ d
        d_biases[i] = d.sum(axis=0)
        d = d @ mlp.weights[i].T
        if i > 0:
            d = d * (pre_acts[i - 1] > 0.0)
    return MlpWeights(weights=d_weights, biases=d_biases), d
