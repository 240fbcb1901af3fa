from enum import Enum
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field
from scipy import constants

from photonic_gemm.exceptions import MissingAdcRecordError


class PlatformId(str, Enum):
    """Material platform of the photonic tensor core"""

    SOI = "soi"
    SIN = "sin"


class PhysicalConstants(BaseModel):
    """Fixed physical constants used by the noise terms"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    q: float = constants.elementary_charge
    k_b: float = constants.Boltzmann


PHYSICAL = PhysicalConstants()


class PlatformParams(BaseModel):
    """Loss, noise and electrical parameters of one material platform"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    platform_id: PlatformId

    # Optical path (dB, dBm)
    p_laser_dbm: float = 10.0
    p_smf_db: float = Field(0.0, ge=0)
    p_coupling_db: float = Field(1.6, ge=0)
    wg_loss_db_per_cm: float = Field(ge=0)
    p_inc_db_per_cm_per_lambda: float = Field(ge=0)
    splitter_il_db: float = Field(0.01, ge=0)
    mrm_il_db: float = Field(ge=0)
    mrr_il_db: float = Field(0.01, ge=0)
    mrm_obl_db: float = Field(0.01, ge=0)
    mrr_obl_db: float = Field(0.01, ge=0)
    penalty_db: float = Field(1.8, ge=0)

    # Photodetector
    responsivity: float = Field(1.2, gt=0)
    dark_current_a: float = Field(35e-9, ge=0)
    load_resistance_ohm: float = Field(50.0, gt=0)
    temperature_k: float = Field(300.0, gt=0)
    rin_db_per_hz: float = -140.0

    # Ring pitch entering the waveguide loss term
    d_mrr_cm: float = Field(2e-3, gt=0)


class PeripheralRecord(BaseModel):
    """Power, latency and area of one peripheral component"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    power_mw: float = Field(ge=0)
    latency_s: float = Field(ge=0)
    area_mm2: float = Field(ge=0)

    @property
    def energy_per_event_j(self) -> float:
        return self.power_mw * 1e-3 * self.latency_s


class PeripheralParams(BaseModel):
    """Accelerator peripherals and tensor-core device parameters"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    reduction: PeripheralRecord
    activation: PeripheralRecord
    io: PeripheralRecord
    pooling: PeripheralRecord
    edram: PeripheralRecord
    bus: PeripheralRecord
    router: PeripheralRecord
    dac: PeripheralRecord
    adc: Dict[float, PeripheralRecord]
    mrm_eo_energy_pj_per_bit: float = Field(1.4, ge=0)
    mrm_area_mm2: float = Field(0.95e-4, ge=0)
    noc_clock_hz: float = Field(1e9, gt=0)

    def adc_for_rate(self, dr_sps: float) -> PeripheralRecord:
        """ADC record for a data rate; unlisted rates are an error"""
        for rate, record in self.adc.items():
            if abs(rate - dr_sps) <= 1e-9 * max(rate, dr_sps):
                return record
        raise MissingAdcRecordError(dr_sps, sorted(self.adc))

    @property
    def edram_energy_per_access_j(self) -> float:
        return self.edram.energy_per_event_j
