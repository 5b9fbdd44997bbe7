from typing import Dict, NamedTuple, Tuple
import numpy as np

from ..models.config import DeformBackend
from ..models.gaussian import GaussianCloud, DeformDelta
from ..models.gaussian_video import GaussianVideoModel
from ..models.video import normalized_time
from .deform_decoder import decode, decode_backward, apply_deform
from .field_encoder import (
    gaussian_queries, query_grad_to_means,
    encode, encode_backward, mlp_field_encode, mlp_field_encode_backward,
)
from .losses import l2_loss
from .rasterizer import TileRasterizer


class FrameState(NamedTuple):
    query: np.ndarray
    inside: np.ndarray
    f_out: np.ndarray
    delta: DeformDelta
    deformed: GaussianCloud


def frame_state(model: GaussianVideoModel, t_index: int) -> FrameState:
    """Encoder -> decoder -> additive deltas for frame t_index."""
    cfg = model.config
    t_norm = normalized_time(t_index, model.num_frames)
    q, inside = gaussian_queries(model.cloud.means, model.width, model.height, t_norm)
    if cfg.backend == DeformBackend.MLP:
        f_out = mlp_field_encode(model.field, q, cfg.mlp_bands)
    else:
        f_out = encode(model.planes, q)
    delta = decode(model.head, f_out, freeze_mean=cfg.freeze_mean_delta)
    return FrameState(q, inside, f_out, delta, apply_deform(model.cloud, delta))


def render_frame(model: GaussianVideoModel, t_index: int, rasterizer: TileRasterizer) -> np.ndarray:
    state = frame_state(model, t_index)
    return rasterizer.render(state.deformed, model.width, model.height)


def frame_gradients(
    model: GaussianVideoModel, t_index: int, target: np.ndarray, rasterizer: TileRasterizer
) -> Tuple[float, np.ndarray, Dict[str, np.ndarray]]:
    """Reconstruction loss, rendered frame and gradients keyed like model.parameters()."""
    cfg = model.config
    state = frame_state(model, t_index)
    image = rasterizer.render(state.deformed, model.width, model.height)
    recon, d_image = l2_loss(image, target)

    render_grads = rasterizer.render_backward(state.deformed, d_image)
    head_grads, d_f_out = decode_backward(
        model.head, state.f_out, render_grads.packed(), freeze_mean=cfg.freeze_mean_delta
    )

    grads: Dict[str, np.ndarray] = {}
    if cfg.backend == DeformBackend.MLP:
        field_grads = mlp_field_encode_backward(model.field, state.query, cfg.mlp_bands, d_f_out)
        d_query = field_grads.d_query
        encoder_arrays = field_grads.mlp.named_arrays("field")
    else:
        enc_grads = encode_backward(model.planes, state.query, d_f_out)
        d_query = enc_grads.d_query
        encoder_arrays = enc_grads.planes.named_arrays()

    # base means feed the rasterizer directly and the encoder through the query
    grads["means"] = render_grads.d_mean + query_grad_to_means(d_query, state.inside, model.width, model.height)
    grads["chol_raw"] = render_grads.d_chol_raw
    grads["colors"] = render_grads.d_color
    grads.update(encoder_arrays)
    grads.update(head_grads.named_arrays("head"))
    return recon, image, grads
