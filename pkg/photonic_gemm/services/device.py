import logging
import math
from typing import List, Optional

import numpy as np
import pandas as pd

from photonic_gemm.exceptions import DeviceCapabilityError, OutOfRangeError
from photonic_gemm.models.device import MrmModel, WeightLevel

logger = logging.getLogger(__name__)

MAX_BITS = 8


def _curve_arrays(model: MrmModel):
    volts = np.array([p.voltage_v for p in model.shift_curve], dtype=float)
    shifts = np.array([p.res_shift_pm for p in model.shift_curve], dtype=float)
    return volts, shifts


def resonance_shift_at(model: MrmModel, v: float) -> float:
    """Blue shift (pm) at drive voltage v, linear between characterized points"""
    volts, shifts = _curve_arrays(model)
    if not math.isfinite(v) or v < volts[0] or v > volts[-1]:
        raise OutOfRangeError(
            f"Voltage {v} V outside characterized range [{volts[0]}, {volts[-1]}] V"
        )
    return float(np.interp(v, volts, shifts))


def voltage_for_shift(model: MrmModel, shift_pm: float) -> float:
    """Drive voltage producing a given blue shift"""
    volts, shifts = _curve_arrays(model)
    if not math.isfinite(shift_pm) or shift_pm < shifts[0] or shift_pm > shifts[-1]:
        raise OutOfRangeError(
            f"Shift {shift_pm} pm outside characterized range [{shifts[0]}, {shifts[-1]}] pm"
        )
    return float(np.interp(shift_pm, shifts, volts))


def _check_wavelength(model: MrmModel, lambda_nm) -> None:
    offset = np.abs(np.asarray(lambda_nm, dtype=float) - model.resonance_nm)
    if not np.all(np.isfinite(offset)) or np.any(offset > model.fsr_nm):
        raise OutOfRangeError(
            f"Wavelength outside ±{model.fsr_nm} nm of {model.resonance_nm} nm"
        )


def through_transmission(model: MrmModel, lambda_nm: float, shift_pm: float) -> float:
    """Through-port power transmission of the Lorentzian notch"""
    _check_wavelength(model, lambda_nm)
    detuning = lambda_nm - (model.resonance_nm - shift_pm * 1e-3)
    depth = 1.0 - model.t_min
    return 1.0 - depth / (1.0 + (detuning / model.hwhm_nm) ** 2)


def transmission_spectrum(model: MrmModel, wavelengths_nm: np.ndarray, shift_pm: float) -> np.ndarray:
    wavelengths_nm = np.asarray(wavelengths_nm, dtype=float)
    _check_wavelength(model, wavelengths_nm)
    detuning = wavelengths_nm - (model.resonance_nm - shift_pm * 1e-3)
    return 1.0 - (1.0 - model.t_min) / (1.0 + (detuning / model.hwhm_nm) ** 2)


def shift_for_transmission(model: MrmModel, transmission: float) -> float:
    """Blue shift (pm) bringing light at the rest resonance to a transmission"""
    if not model.t_min <= transmission < 1.0:
        raise OutOfRangeError(
            f"Transmission {transmission} outside [{model.t_min:.6f}, 1)"
        )
    ratio = (1.0 - model.t_min) / (1.0 - transmission) - 1.0
    return model.hwhm_nm * math.sqrt(max(ratio, 0.0)) * 1e3


def cascade_transmission(*transmissions: float) -> float:
    """Power surviving a chain of through-ports"""
    return float(np.prod(transmissions)) if transmissions else 1.0


def _level_shifts(model: MrmModel, bits: int, t_max: float) -> np.ndarray:
    count = 2 ** bits
    targets = model.t_min + np.arange(count) * (t_max - model.t_min) / (count - 1)
    return np.array([shift_for_transmission(model, t) for t in targets])


def _max_feasible_bits(model: MrmModel, t_max: float) -> int:
    for bits in range(MAX_BITS, 0, -1):
        if np.min(np.diff(_level_shifts(model, bits, t_max))) >= model.min_shift_step_pm:
            return bits
    return 0


def weight_levels(model: MrmModel, bits: int, t_max: Optional[float] = None) -> List[WeightLevel]:
    """2^bits transmission levels equally spaced in linear power"""
    if not 1 <= bits <= MAX_BITS:
        raise OutOfRangeError(f"bits must be in [1, {MAX_BITS}], got {bits}")

    t_reach = through_transmission(model, model.resonance_nm, model.max_shift_pm)
    if t_max is None:
        t_max = t_reach
    elif t_max > t_reach:
        best = _max_feasible_bits(model, t_reach)
        raise DeviceCapabilityError(
            f"Requested top level {t_max:.6f} needs more than the "
            f"{model.max_shift_pm:.0f} pm available shift (reachable {t_reach:.6f}); "
            f"max feasible within reach is {best} bits",
            max_feasible_bits=best,
        )

    count = 2 ** bits
    step = (t_max - model.t_min) / (count - 1)
    shifts = _level_shifts(model, bits, t_max)
    if np.min(np.diff(shifts)) < model.min_shift_step_pm:
        best = _max_feasible_bits(model, t_max)
        raise DeviceCapabilityError(
            f"{bits}-bit levels need shift steps below the "
            f"{model.min_shift_step_pm} pm drive resolution; max feasible is {best} bits",
            max_feasible_bits=best,
        )

    levels = []
    for i, shift in enumerate(shifts):
        shift = min(float(shift), model.max_shift_pm)
        levels.append(
            WeightLevel(
                level=i,
                transmission=model.t_min + i * step,
                shift_pm=shift,
                voltage_v=voltage_for_shift(model, shift),
            )
        )
    logger.debug(f"Synthesized {count} levels in [{model.t_min:.4f}, {t_max:.4f}]")
    return levels


def ito_state_table(model: Optional[MrmModel] = None) -> pd.DataFrame:
    model = model or MrmModel()
    return pd.DataFrame([p.model_dump() for p in model.shift_curve])


def shift_curve_check(model: Optional[MrmModel] = None) -> pd.DataFrame:
    """Interpolated shift at every characterized node and segment midpoint"""
    model = model or MrmModel()
    rows = []
    curve = model.shift_curve
    for i, point in enumerate(curve):
        interpolated = resonance_shift_at(model, point.voltage_v)
        rows.append({
            "kind": "node",
            "voltage_v": point.voltage_v,
            "table_shift_pm": point.res_shift_pm,
            "interpolated_shift_pm": interpolated,
            "abs_error_pm": abs(interpolated - point.res_shift_pm),
        })
        if i + 1 < len(curve):
            mid_v = 0.5 * (point.voltage_v + curve[i + 1].voltage_v)
            rows.append({
                "kind": "midpoint",
                "voltage_v": mid_v,
                "table_shift_pm": float("nan"),
                "interpolated_shift_pm": resonance_shift_at(model, mid_v),
                "abs_error_pm": float("nan"),
            })
    return pd.DataFrame(rows)


def spectra_frame(model: MrmModel, bits: int, points: int = 1201, span_nm: float = 6.0) -> pd.DataFrame:
    """Through-port spectra for every weight level around rest resonance"""
    wavelengths = np.linspace(model.resonance_nm - span_nm, model.resonance_nm + span_nm, points)
    frame = pd.DataFrame({"wavelength_nm": wavelengths})
    for level in weight_levels(model, bits):
        frame[f"level_{level.level}"] = transmission_spectrum(model, wavelengths, level.shift_pm)
    return frame
