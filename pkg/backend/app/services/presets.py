from pathlib import Path
from typing import Dict, List, Union
import json
import logging

from ..core.config import settings
from ..core.exceptions import ConfigError
from ..models.config import ModelConfig
from .model_factory import count_params

logger = logging.getLogger(__name__)


def load_model_config(ref: Union[str, Path]) -> ModelConfig:
    """Read a ModelConfig from a JSON file path or a shipped preset name; unknown keys are rejected."""
    path = settings.preset_path(str(ref))
    if not path.is_file():
        raise ConfigError(f"no config file or preset named {ref!r}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path.name} is not valid JSON: {e}") from e
    config = ModelConfig.model_validate(document)
    logger.debug(f"Loaded model config from {path}")
    return config


def list_presets() -> List[str]:
    presets_dir = Path(settings.PRESETS_DIR)
    if not presets_dir.is_dir():
        return []
    return sorted(p.stem for p in presets_dir.glob("*.json"))


def preset_param_counts() -> Dict[str, int]:
    return {name: count_params(load_model_config(name)) for name in list_presets()}
