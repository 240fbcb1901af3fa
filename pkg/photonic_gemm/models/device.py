from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ItoStatePoint(BaseModel):
    """One characterized bias point of the ITO-based modulator"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    carrier_conc_cm3: float = Field(gt=0)
    re_n_ito: float
    im_n_ito: float
    re_n_eff: float
    im_n_eff: float
    voltage_v: float = Field(ge=0)
    res_shift_pm: float = Field(ge=0)


ITO_STATE_TABLE: List[ItoStatePoint] = [
    ItoStatePoint(carrier_conc_cm3=1e19, re_n_ito=1.9556, im_n_ito=0.0100,
                  re_n_eff=1.9735, im_n_eff=0.0001, voltage_v=0.0, res_shift_pm=0.0),
    ItoStatePoint(carrier_conc_cm3=5e19, re_n_ito=1.9111, im_n_ito=0.0403,
                  re_n_eff=1.9724, im_n_eff=0.0003, voltage_v=1.8, res_shift_pm=830.0),
    ItoStatePoint(carrier_conc_cm3=9e19, re_n_ito=1.8667, im_n_ito=0.0896,
                  re_n_eff=1.9712, im_n_eff=0.0006, voltage_v=3.7, res_shift_pm=1580.0),
    ItoStatePoint(carrier_conc_cm3=13e19, re_n_ito=1.8222, im_n_ito=0.1289,
                  re_n_eff=1.9701, im_n_eff=0.0011, voltage_v=5.5, res_shift_pm=2470.0),
    ItoStatePoint(carrier_conc_cm3=17e19, re_n_ito=1.7778, im_n_ito=0.1582,
                  re_n_eff=1.9692, im_n_eff=0.0017, voltage_v=7.3, res_shift_pm=3210.0),
    ItoStatePoint(carrier_conc_cm3=20e19, re_n_ito=1.7333, im_n_ito=0.1874,
                  re_n_eff=1.9680, im_n_eff=0.0022, voltage_v=9.2, res_shift_pm=4000.0),
]


class MrmModel(BaseModel):
    """Lorentzian all-pass microring modulator with a measured shift curve"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    resonance_nm: float = Field(1600.0, gt=0)
    q_loaded: float = Field(2000.0, gt=0)
    fsr_nm: float = Field(18.0, gt=0)
    il_db: float = Field(0.235, ge=0)
    er_db: float = Field(8.2, gt=0)
    tuning_pm_per_v: float = Field(450.0, gt=0)
    min_shift_step_pm: float = Field(1.0, gt=0)
    shift_curve: List[ItoStatePoint] = Field(default_factory=lambda: list(ITO_STATE_TABLE))

    @model_validator(mode="after")
    def _check_curve(self) -> "MrmModel":
        curve = self.shift_curve
        if len(curve) < 2:
            raise ValueError("shift_curve needs at least two points")
        for lo, hi in zip(curve, curve[1:]):
            if not (hi.voltage_v > lo.voltage_v and hi.res_shift_pm > lo.res_shift_pm):
                raise ValueError("res_shift_pm must increase strictly with voltage_v")
            if hi.carrier_conc_cm3 > lo.carrier_conc_cm3 and not hi.re_n_ito < lo.re_n_ito:
                raise ValueError("re_n_ito must decrease with carrier concentration")

        span_v = curve[-1].voltage_v - curve[0].voltage_v
        derived = (curve[-1].res_shift_pm - curve[0].res_shift_pm) / span_v
        if abs(derived - self.tuning_pm_per_v) > 0.1 * self.tuning_pm_per_v:
            raise ValueError(
                f"shift curve efficiency {derived:.1f} pm/V disagrees with "
                f"tuning_pm_per_v={self.tuning_pm_per_v} by more than 10%"
            )
        return self

    @property
    def hwhm_nm(self) -> float:
        return self.resonance_nm / (2.0 * self.q_loaded)

    @property
    def t_min(self) -> float:
        return 10.0 ** (-self.er_db / 10.0)

    @property
    def v_max(self) -> float:
        return self.shift_curve[-1].voltage_v

    @property
    def max_shift_pm(self) -> float:
        return self.shift_curve[-1].res_shift_pm


class WeightLevel(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: int
    transmission: float
    shift_pm: float
    voltage_v: float
