from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from photonic_gemm.models.params import PlatformId


class Command(str, Enum):
    SPECTRA = "spectra"
    SCALABILITY = "scalability"
    FUNCSIM_VERIFY = "funcsim-verify"
    SIMULATE = "simulate"
    CALIBRATE = "calibrate"
    REPRODUCE_PAPER = "reproduce-paper"


DEFAULT_RATES = [1e9, 5e9, 10e9]


class RunConfig(BaseModel):
    """One declarative CLI run"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    platforms: List[PlatformId] = Field(default_factory=lambda: [PlatformId.SOI, PlatformId.SIN], min_length=1)
    bits: List[int] = Field(default_factory=lambda: [1, 2, 3, 4], min_length=1)
    rates: List[float] = Field(default_factory=lambda: list(DEFAULT_RATES), min_length=1)
    models: List[str] = Field(default_factory=lambda: ["resnet50", "googlenet", "shufflenetv2"], min_length=1)
    targets: Optional[str] = None
    overrides: Optional[str] = None
    trials: int = Field(1000, ge=1)
    noise: bool = False
    baseline: Optional[str] = None
    output_dir: str
    seed: int = 0
    workers: int = Field(1, ge=1)
    verbose: bool = False

    @field_validator("bits")
    @classmethod
    def _check_bits(cls, value: List[int]) -> List[int]:
        bad = [b for b in value if not 1 <= b <= 8]
        if bad:
            raise ValueError(f"bits must lie in 1..8, got {bad}")
        return sorted(set(value))

    @field_validator("rates")
    @classmethod
    def _check_rates(cls, value: List[float]) -> List[float]:
        if any(r <= 0 for r in value):
            raise ValueError("data rates must be positive")
        return sorted(set(value))

    @field_validator("platforms")
    @classmethod
    def _unique_platforms(cls, value: List[PlatformId]) -> List[PlatformId]:
        return sorted(set(value), key=lambda p: p.value)


class ManifestEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    sha256: str
    bytes: int


class Manifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: str
    seed: int
    files: List[ManifestEntry]
