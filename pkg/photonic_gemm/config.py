from pathlib import Path

from pydantic_settings import BaseSettings

DATA_DIR = Path(__file__).resolve().parent / "data"


class Settings(BaseSettings):
    output_dir: str = "./results"
    log_level: str = "INFO"
    workers: int = 1
    seed: int = 0
    n_max: int = 512
    platform_config: str = str(DATA_DIR / "platforms.toml")
    accelerator_config: str = str(DATA_DIR / "accelerators.toml")
    calibration_targets: str = str(DATA_DIR / "calibration_targets.csv")
    models_dir: str = str(DATA_DIR / "models")

    class Config:
        env_prefix = "PHOTONIC_GEMM_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        extra = "ignore"


settings = Settings()
