from typing import List
import logging
import numpy as np

from ..core.exceptions import ConfigError
from ..models.config import ModelConfig, DeformBackend, InitMethod
from ..models.field import PlaneLevel, PlaneSet
from ..models.gaussian import GaussianCloud
from ..models.gaussian_video import GaussianVideoModel
from ..models.video import FrameSequence
from .deform_decoder import DELTA_WIDTH, check_head
from .initializer import temporal_gradient_map, sample_means, random_means, init_cloud
from .mlp import init_mlp

logger = logging.getLogger(__name__)


# ============================= Shapes ============================= #

def level_shapes(config: ModelConfig, ratio: int) -> dict:
    res = config.plane_resolution
    rx, ry, rt = res.x * ratio, res.y * ratio, res.t * ratio
    c = config.feature_dim
    return {"xy": (rx, ry, c), "xt": (rx, rt, c), "yt": (ry, rt, c)}


def fusion_dims(config: ModelConfig) -> List[int]:
    return [len(config.ratios) * config.feature_dim, *config.fusion_hidden, config.out_dim]


def field_dims(config: ModelConfig) -> List[int]:
    return [3 + 6 * config.mlp_bands, *config.mlp_hidden, config.out_dim]


def head_dims(config: ModelConfig) -> List[int]:
    return [config.out_dim] * config.decoder_depth + [DELTA_WIDTH]


def _mlp_param_count(dims: List[int]) -> int:
    return sum(fan_in * fan_out + fan_out for fan_in, fan_out in zip(dims[:-1], dims[1:]))


def count_params(config: ModelConfig) -> int:
    """Gaussians (8 each) + encoder (planes and fusion MLP, or the MLP field) + decoder head."""
    total = 8 * config.num_gaussians
    if config.backend == DeformBackend.MLP:
        total += _mlp_param_count(field_dims(config))
    elif config.ratios:
        for ratio in config.ratios:
            total += sum(int(np.prod(shape)) for shape in level_shapes(config, ratio).values())
        total += _mlp_param_count(fusion_dims(config))
    total += _mlp_param_count(head_dims(config))
    return total


# ============================= Construction ============================= #

def init_planes(config: ModelConfig, rng: np.random.Generator) -> PlaneSet:
    """XY ~ U(-0.1, 0.1); XT and YT start at exactly 1 so the field is time-invariant at first."""
    if not config.ratios:
        raise ConfigError("multiplane backend needs at least one resolution level")
    levels = []
    for ratio in config.ratios:
        shapes = level_shapes(config, ratio)
        levels.append(PlaneLevel(
            ratio=ratio,
            xy=rng.uniform(-0.1, 0.1, size=shapes["xy"]),
            xt=np.ones(shapes["xt"]),
            yt=np.ones(shapes["yt"]),
        ))
    return PlaneSet(levels=levels, fusion=init_mlp(fusion_dims(config), rng))


def initial_means(video: FrameSequence, config: ModelConfig, seed: int) -> np.ndarray:
    if config.init == InitMethod.RANDOM:
        return random_means(config.num_gaussians, video.width, video.height, seed=seed)
    tmap = temporal_gradient_map(video)
    return sample_means(tmap, config.num_gaussians, floor_eps=config.floor_eps, seed=seed)


def build_model(video: FrameSequence, config: ModelConfig, seed: int = 0) -> GaussianVideoModel:
    if config.width is not None and config.width != video.width:
        raise ConfigError(f"config width {config.width} does not match video width {video.width}")
    if config.height is not None and config.height != video.height:
        raise ConfigError(f"config height {config.height} does not match video height {video.height}")
    config = config.resolved(video.width, video.height)

    rng = np.random.default_rng(seed)
    means = initial_means(video, config, seed)
    cloud = init_cloud(video, means, config)

    planes = init_planes(config, rng) if config.backend == DeformBackend.MULTIPLANE else None
    field = init_mlp(field_dims(config), rng) if config.backend == DeformBackend.MLP else None
    head = init_mlp(head_dims(config), rng, zero_last=True)
    check_head(head, config.out_dim)

    model = GaussianVideoModel(
        config=config, num_frames=video.num_frames, cloud=cloud, planes=planes, field=field, head=head
    )
    logger.info(
        f"Built {config.backend.value} model: {config.num_gaussians} Gaussians, "
        f"{model.param_count()} parameters ({config.init.value} init)"
    )
    return model


def empty_model(config: ModelConfig, num_frames: int) -> GaussianVideoModel:
    """Zero-filled model with the right shapes, for the bitstream reader to fill in."""
    n = config.num_gaussians
    cloud = GaussianCloud(
        means=np.zeros((n, 2)), chol_raw=np.zeros((n, 3)), colors=np.zeros((n, 3)),
        frame_width=config.width, frame_height=config.height, num_frames=num_frames,
    )
    rng = np.random.default_rng(0)
    planes = init_planes(config, rng).zeros_like() if config.backend == DeformBackend.MULTIPLANE else None
    field = init_mlp(field_dims(config), rng).zeros_like() if config.backend == DeformBackend.MLP else None
    head = init_mlp(head_dims(config), rng).zeros_like()
    return GaussianVideoModel(
        config=config, num_frames=num_frames, cloud=cloud, planes=planes, field=field, head=head
    )
