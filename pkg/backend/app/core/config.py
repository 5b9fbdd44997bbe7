from pydantic_settings import BaseSettings
from pydantic import Field
from pathlib import Path

BACKEND_DIR = Path(__file__).resolve().parents[2]


class Settings(BaseSettings):
    # Logging
    LOG_LEVEL: str = Field(default="INFO")

    # Training defaults (overridable per run from the CLI)
    EPOCHS: int = Field(default=300)
    LEARNING_RATE: float = Field(default=0.001)
    TV_LAMBDA: float = Field(default=1e-4)
    OPTIMIZER: str = Field(default="adan")
    SEED: int = Field(default=0)
    FRAME_ORDER: str = Field(default="shuffled")
    QUANTIZE_AWARE_STEPS: int = Field(default=0)

    # Rasterizer
    TILE_SIZE: int = Field(default=16)
    CUTOFF_SIGMA: float = Field(default=3.0)  # inf disables truncation
    DETERMINISTIC: bool = Field(default=True)
    NUM_WORKERS: int = Field(default=1)

    # Bench
    BENCH_WARMUP: int = Field(default=2)

    # Paths
    PRESETS_DIR: str = Field(default=str(BACKEND_DIR / "presets"))

    class Config:
        env_file = ".env"
        env_prefix = "GSV_"
        case_sensitive = True

    def preset_path(self, name: str) -> Path:
        """Resolve a shipped preset by bare name (``640x1280_0.35M``) or return the path as given."""
        candidate = Path(name)
        if candidate.exists():
            return candidate
        return Path(self.PRESETS_DIR) / f"{name}.json"


settings = Settings()
