import math
from typing import Dict, List, NamedTuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from photonic_gemm.models.params import PeripheralParams, PlatformId

LATENCY_PHASES = ("compute", "buffer", "peripheral")
ENERGY_COMPONENTS = (
    "laser",
    "mrm_eo",
    "dac",
    "adc",
    "edram",
    "bus",
    "router",
    "reduction",
    "activation",
    "pooling",
    "io",
)


class TpcConfig(BaseModel):
    """Tensor core: M DPEs of N multipliers at a native precision and data rate"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(ge=1)
    m: int = Field(ge=1)
    bits: int = Field(4, ge=1, le=8)
    target_bits: int = Field(8, ge=1, le=16)
    dr_sps: float = Field(gt=0)
    platform_id: PlatformId

    @model_validator(mode="after")
    def _check(self) -> "TpcConfig":
        if self.n != self.m:
            raise ValueError(f"n ({self.n}) must equal m ({self.m})")
        if self.bits * 2 != self.target_bits:
            raise ValueError(
                f"two {self.bits}-bit cores cannot be paired into {self.target_bits}-bit precision"
            )
        return self


class AcceleratorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    tpc: TpcConfig
    tpc_count: int = Field(ge=2)
    tiles: int = Field(ge=1)
    peripheral: PeripheralParams
    laser_mw_per_lambda: float = Field(10.0, ge=0)
    buffer_overlap: float = Field(0.0, ge=0, le=1)
    io_always_on: bool = True

    @model_validator(mode="before")
    @classmethod
    def _default_tiles(cls, data):
        # 4 DPUs per tile
        if isinstance(data, dict) and data.get("tiles") is None and "tpc_count" in data:
            data = {**data, "tiles": math.ceil(int(data["tpc_count"]) / 4)}
        return data

    @model_validator(mode="after")
    def _check_tiles(self) -> "AcceleratorConfig":
        if self.tiles * 4 < self.tpc_count:
            raise ValueError(f"{self.tiles} tiles of 4 cannot hold {self.tpc_count} TPCs")
        return self

    @property
    def paired_tpcs(self) -> int:
        return self.tpc_count // 2


class GemmSchedule(BaseModel):
    """Output-stationary mapping of one GEMM onto the paired cores"""

    model_config = ConfigDict(frozen=True)

    waves: int = Field(ge=0)
    chunks: int = Field(ge=0)
    compute_cycles: int = Field(ge=0)
    serial_accesses: int = Field(ge=0)
    buffer_accesses: int = Field(ge=0)
    symbols: int = Field(ge=0)
    adc_samples: int = Field(ge=0)
    outputs: int = Field(ge=0)
    macs: int = Field(ge=0)
    active_tpcs: int = Field(ge=0)
    active_dpes: int = Field(ge=0)
    active_wavelengths: int = Field(ge=0)


class CostBreakdown(BaseModel):
    model_config = ConfigDict(frozen=True)

    latency_s: Dict[str, float] = Field(default_factory=lambda: dict.fromkeys(LATENCY_PHASES, 0.0))
    energy_j: Dict[str, float] = Field(default_factory=lambda: dict.fromkeys(ENERGY_COMPONENTS, 0.0))

    @model_validator(mode="after")
    def _check_keys(self) -> "CostBreakdown":
        if set(self.latency_s) != set(LATENCY_PHASES):
            raise ValueError(f"latency phases must be {LATENCY_PHASES}")
        if set(self.energy_j) != set(ENERGY_COMPONENTS):
            raise ValueError(f"energy components must be {ENERGY_COMPONENTS}")
        return self

    @computed_field
    @property
    def total_latency_s(self) -> float:
        return math.fsum(self.latency_s[p] for p in LATENCY_PHASES)

    @computed_field
    @property
    def total_energy_j(self) -> float:
        return math.fsum(self.energy_j[c] for c in ENERGY_COMPONENTS)

    @computed_field
    @property
    def fps(self) -> float:
        total = self.total_latency_s
        return 1.0 / total if total > 0 else math.inf

    @computed_field
    @property
    def fps_per_watt(self) -> float:
        total = self.total_energy_j
        return 1.0 / total if total > 0 else math.inf

    @property
    def average_power_w(self) -> float:
        return self.total_energy_j * self.fps


class ReportKey(NamedTuple):
    model: str
    arch: str
    dr_sps: float

    def label(self) -> str:
        return f"{self.model}/{self.arch}/{self.dr_sps:g}"


class SimReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    arch: str
    platform_id: PlatformId
    dr_sps: float
    n: int
    tpc_count: int
    breakdown: CostBreakdown

    @property
    def key(self) -> ReportKey:
        return ReportKey(self.model, self.arch, self.dr_sps)


class NormalizedRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    arch: str
    dr_sps: float
    fps: float
    fps_per_watt: float
    norm_fps: float
    norm_fps_per_watt: float


class GmeanRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    arch: str
    dr_sps: float
    models: int
    gmean_norm_fps: float
    gmean_norm_fps_per_watt: float


class NormalizedReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    baseline: str
    rows: List[NormalizedRow]
    gmeans: List[GmeanRow]


class AcceleratorPreset(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    platform: PlatformId
    dr_sps: float = Field(gt=0)
    n: int = Field(ge=1)
    tpc_count: int = Field(ge=2)
