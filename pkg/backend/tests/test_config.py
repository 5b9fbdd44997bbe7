import math
import pytest
from pydantic import ValidationError

from app.core.config import Settings, settings
from app.core.exceptions import NonFiniteError
from app.models.config import (
    ModelConfig, TrainConfig, RasterConfig, QuantizationConfig, OptimizerKind, FrameOrder,
)


def test_model_config_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        ModelConfig.model_validate({"num_gaussians": 10, "gaussians": 20})
    with pytest.raises(ValidationError):
        ModelConfig.model_validate({"plane_resolution": {"x": 8, "y": 8, "t": 4, "z": 2}})


def test_model_config_validates_ranges():
    with pytest.raises(ValidationError):
        ModelConfig(num_gaussians=0)
    with pytest.raises(ValidationError):
        ModelConfig(ratios=[1, 0])
    with pytest.raises(ValidationError):
        ModelConfig(fusion_hidden=[0])
    with pytest.raises(ValidationError):
        QuantizationConfig(mean_bits=12)


def test_model_config_json_round_trip():
    config = ModelConfig(num_gaussians=123, ratios=[1, 2, 4], quantization=QuantizationConfig(mean_bits=16))
    assert ModelConfig.model_validate_json(config.model_dump_json()) == config


def test_resolved_fills_dimensions():
    config = ModelConfig().resolved(320, 240)
    assert (config.width, config.height) == (320, 240)
    assert ModelConfig().width is None


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("GSV_EPOCHS", "7")
    monkeypatch.setenv("GSV_CUTOFF_SIGMA", "inf")
    monkeypatch.setenv("GSV_DETERMINISTIC", "false")
    fresh = Settings()
    assert fresh.EPOCHS == 7
    assert math.isinf(fresh.CUTOFF_SIGMA)
    assert fresh.DETERMINISTIC is False


def test_train_config_from_settings(monkeypatch):
    monkeypatch.setattr(settings, "EPOCHS", 12)
    monkeypatch.setattr(settings, "OPTIMIZER", "adam")
    cfg = TrainConfig.from_settings(lr=0.01, seed=None)
    assert cfg.epochs == 12
    assert cfg.optimizer == OptimizerKind.ADAM
    assert cfg.lr == 0.01
    assert cfg.seed == settings.SEED


def test_raster_config_from_settings(monkeypatch):
    monkeypatch.setattr(settings, "TILE_SIZE", 32)
    cfg = RasterConfig.from_settings(num_workers=3)
    assert cfg.tile_size == 32
    assert cfg.num_workers == 3


def test_cutoff_sigma():
    assert RasterConfig().truncates
    assert not RasterConfig(cutoff_sigma=float("inf")).truncates
    with pytest.raises(ValidationError):
        RasterConfig(cutoff_sigma=0.0)


def test_train_config_validation():
    with pytest.raises(ValidationError):
        TrainConfig(adan_betas=[0.9, 0.9])
    with pytest.raises(ValidationError):
        TrainConfig(lr=0.0)
    with pytest.raises(ValidationError):
        TrainConfig(tv_lambda=-1.0)
    assert TrainConfig(frame_order="sequential").frame_order == FrameOrder.SEQUENTIAL


def test_lr_for_uses_group_prefix():
    cfg = TrainConfig(lr=0.001, lr_overrides={"means": 0.05, "planes": 0.01})
    assert cfg.lr_for("means") == 0.05
    assert cfg.lr_for("planes.1.xt") == 0.01
    assert cfg.lr_for("head.0.weight") == 0.001
    assert cfg.lr_for("colors") == 0.001


def test_non_finite_error_context_keeps_message_intact():
    error = NonFiniteError("non-finite Gaussian parameters (corrupted model?)", group="means")
    located = error.with_context(epoch=3, frame=7)
    assert located.message == "non-finite Gaussian parameters (corrupted model?)"
    assert str(located) == "non-finite Gaussian parameters (corrupted model?) (group=means, epoch=3, frame=7)"
    relocated = located.with_context(epoch=4, frame=0)
    assert str(relocated) == "non-finite Gaussian parameters (corrupted model?) (group=means, epoch=4, frame=0)"
