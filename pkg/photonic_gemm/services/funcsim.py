import logging
import math
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from photonic_gemm.exceptions import (
    AccumulatorSaturationError,
    InvalidParameterError,
    OutOfRangeError,
)
from photonic_gemm.models.device import MrmModel
from photonic_gemm.models.funcsim import (
    AccumulatorState,
    DotProductResult,
    Lane,
    OpticalSymbol,
    QuantizedVector,
    TraceRow,
)
from photonic_gemm.models.params import PHYSICAL, PlatformParams
from photonic_gemm.services.device import weight_levels
from photonic_gemm.services.linkbudget import noise_bandwidth_hz, noise_current_psd
from photonic_gemm.services.params import db_to_linear

logger = logging.getLogger(__name__)

DEFAULT_RESPONSIVITY = 1.2
NOISE_HEADROOM = 0.05
NOISE_FULL_SCALE_W = 1e-3
LEVEL_TOLERANCE = 1e-12


@lru_cache(maxsize=64)
def _levels_for(model_json: str, bits: int) -> Tuple[float, ...]:
    model = MrmModel.model_validate_json(model_json)
    levels = weight_levels(model, bits)
    t_lo, t_hi = levels[0].transmission, levels[-1].transmission
    return tuple((lvl.transmission - t_lo) / (t_hi - t_lo) for lvl in levels)


def normalized_levels(model: MrmModel, bits: int) -> Tuple[float, ...]:
    """Level transmissions mapped affinely onto [0, 1]"""
    return _levels_for(model.model_dump_json(), bits)


def encode_symbol(value: int, bits: int, model: Optional[MrmModel] = None) -> float:
    levels = normalized_levels(model or MrmModel(), bits)
    if not 0 <= value < len(levels):
        raise OutOfRangeError(f"Value {value} outside [0, {len(levels) - 1}] for {bits} bits")
    return levels[value]


def multiply_symbol(input_level: float, weight_level: float) -> float:
    for name, x in (("input_level", input_level), ("weight_level", weight_level)):
        if not -LEVEL_TOLERANCE <= x <= 1.0 + LEVEL_TOLERANCE:
            raise OutOfRangeError(f"{name}={x} outside [0, 1]")
    return input_level * weight_level


def route_sign(product_power: float, sign: int) -> OpticalSymbol:
    if sign not in (-1, 1):
        raise OutOfRangeError(f"sign must be -1 or +1, got {sign}")
    return OpticalSymbol(
        power=product_power,
        lane=Lane.POSITIVE if sign == 1 else Lane.NEGATIVE,
    )


def _lane_sums(symbols: Sequence[OpticalSymbol]) -> Tuple[float, float]:
    positive = math.fsum(s.power for s in symbols if s.lane is Lane.POSITIVE)
    negative = math.fsum(s.power for s in symbols if s.lane is Lane.NEGATIVE)
    return positive, negative


def bpd_superpose(symbols: Sequence[OpticalSymbol], responsivity: float = DEFAULT_RESPONSIVITY) -> float:
    """Balanced photodiode output: positive lane minus negative lane"""
    positive, negative = _lane_sums(symbols)
    return responsivity * (positive - negative)


def accumulate(state: AccumulatorState, cycle_current: float) -> AccumulatorState:
    charge = state.charge + cycle_current
    if abs(charge) > state.capacity:
        raise AccumulatorSaturationError(state.cycles_elapsed, charge, state.capacity)
    return state.model_copy(update={"charge": charge, "cycles_elapsed": state.cycles_elapsed + 1})


def required_adc_bits(length: int, bits: int, weight_bits: Optional[int] = None, headroom: float = 0.0) -> int:
    """ADC resolution at which mid-tread sampling of the full range is bit-exact

    The LSB must stay within half an integer step of the rescaled result.
    """
    scale = (2 ** bits - 1) * (2 ** (weight_bits or bits) - 1)
    levels_needed = math.ceil(2 * length * (1.0 + headroom) * scale)
    return 1 + math.ceil(math.log2(levels_needed + 1))


def adc_sample(analog: float, full_scale: float, adc_bits: int) -> float:
    """Mid-tread uniform quantizer over [-full_scale, full_scale]"""
    levels = 2 ** (adc_bits - 1) - 1
    lsb = full_scale / levels
    code = min(max(round(analog / lsb), -levels), levels)
    return code * lsb


class NoiseModel:
    """Receiver noise with the photodiode terms of the precision equation"""

    def __init__(self, p_full_scale_w: float, dr_sps: float, params: PlatformParams, rng: np.random.Generator):
        if p_full_scale_w <= 0 or dr_sps <= 0:
            raise InvalidParameterError("Noise model needs positive power and data rate")
        self.p_full_scale_w = p_full_scale_w
        self.params = params
        self.bandwidth = noise_bandwidth_hz(dr_sps)
        self.rng = rng
        self._thermal = 4.0 * PHYSICAL.k_b * params.temperature_k / params.load_resistance_ohm
        self._rin = db_to_linear(params.rin_db_per_hz)

    def _component_variances(self, power_norm: float) -> Tuple[float, float, float]:
        current = self.params.responsivity * power_norm * self.p_full_scale_w
        shot = 2.0 * PHYSICAL.q * (current + self.params.dark_current_a) * self.bandwidth
        thermal = self._thermal * self.bandwidth
        rin = current ** 2 * self._rin * self.bandwidth
        return shot, thermal, rin

    def sample(self, positive_sum: float, negative_sum: float) -> float:
        """Noise charge for one cycle, in the same units as bpd_superpose"""
        total = 0.0
        for sign, power in ((1.0, positive_sum), (-1.0, negative_sum)):
            for variance in self._component_variances(power):
                total += sign * self.rng.normal(0.0, math.sqrt(variance))
        return total / self.p_full_scale_w

    def cycle_sigma(self, positive_sum: float, negative_sum: float) -> float:
        """Analytic standard deviation of sample(), via the shared noise density"""
        psd = sum(
            noise_current_psd(self.params.responsivity * p * self.p_full_scale_w, self.params)
            for p in (positive_sum, negative_sum)
        )
        return math.sqrt(psd * self.bandwidth) / self.p_full_scale_w


def dot_product(
    a: QuantizedVector,
    b: QuantizedVector,
    n_per_cycle: int,
    model: Optional[MrmModel] = None,
    adc_bits: Optional[int] = None,
    responsivity: float = DEFAULT_RESPONSIVITY,
    noise: Optional[NoiseModel] = None,
    capacity: Optional[float] = None,
    trace: bool = False,
) -> DotProductResult:
    """Chunked signed dot product through encode, weight, route, superpose, accumulate"""
    if len(a) != len(b):
        raise InvalidParameterError(f"Length mismatch: {len(a)} vs {len(b)}")
    if n_per_cycle < 1:
        raise InvalidParameterError(f"n_per_cycle must be >= 1, got {n_per_cycle}")

    model = model or MrmModel()
    in_levels = normalized_levels(model, a.bits)
    w_levels = normalized_levels(model, b.bits)
    scale = (2 ** a.bits - 1) * (2 ** b.bits - 1)
    headroom = NOISE_HEADROOM if noise is not None else 0.0
    full_scale = len(a) * (1.0 + headroom)
    required = required_adc_bits(len(a), a.bits, b.bits, headroom)
    if adc_bits is None:
        adc_bits = required
    elif adc_bits < 2:
        raise InvalidParameterError(f"adc_bits must be >= 2 for a signed mid-tread ADC, got {adc_bits}")

    state = AccumulatorState(capacity=capacity or full_scale * responsivity * (1.0 + 1e-9))
    rows: List[TraceRow] = []
    for start in range(0, len(a), n_per_cycle):
        symbols = []
        for x, w in zip(a.values[start:start + n_per_cycle], b.values[start:start + n_per_cycle]):
            power = multiply_symbol(in_levels[abs(x)], w_levels[abs(w)])
            sign = -1 if (x < 0) != (w < 0) else 1
            symbols.append(route_sign(power, sign))
        current = bpd_superpose(symbols, responsivity)
        if noise is not None:
            positive, negative = _lane_sums(symbols)
            current += noise.sample(positive, negative)
        state = accumulate(state, current)
        if trace:
            positive, negative = _lane_sums(symbols)
            rows.append(
                TraceRow(
                    cycle=state.cycles_elapsed - 1,
                    positive_sum=positive,
                    negative_sum=negative,
                    bpd_current=current,
                    charge=state.charge,
                )
            )

    analog = state.charge / responsivity
    sampled = adc_sample(analog, full_scale, adc_bits)
    expected = sum(x * w for x, w in zip(a.values, b.values))
    return DotProductResult(
        value=int(round(sampled * scale)),
        analog=analog,
        expected=expected,
        required_adc_bits=required,
        adc_bits=adc_bits,
        cycles=state.cycles_elapsed,
        trace=rows,
    )


def quantize(values: Sequence[float], bits: int) -> QuantizedVector:
    """Symmetric max-abs quantization of real values"""
    arr = np.asarray(values, dtype=float)
    peak = float(np.max(np.abs(arr))) if arr.size else 0.0
    limit = 2 ** bits - 1
    scale = peak / limit if peak > 0 else 1.0
    return QuantizedVector(values=[int(v) for v in np.rint(arr / scale)], bits=bits, scale=scale)


def trace_frame(result: DotProductResult) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in result.trace])


def verify_against_oracle(
    trials: int = 1000,
    bits: int = 4,
    n_choices: Sequence[int] = (8, 47),
    max_len: int = 256,
    seed: int = 0,
    model: Optional[MrmModel] = None,
    noise_params: Optional[PlatformParams] = None,
    dr_sps: float = 1e9,
    p_full_scale_w: float = NOISE_FULL_SCALE_W,
) -> pd.DataFrame:
    """Random signed dot products compared with the exact integer result

    With noise_params set, every trial runs through the receiver noise model
    and the frame carries the integer error instead of being expected exact.
    """
    rng = np.random.default_rng(seed)
    noise = None
    if noise_params is not None:
        noise = NoiseModel(p_full_scale_w, dr_sps, noise_params, np.random.default_rng([seed, 1]))
    limit = 2 ** bits - 1
    rows = []
    for trial in range(trials):
        length = int(rng.integers(1, max_len + 1))
        n = int(rng.choice(n_choices))
        a = QuantizedVector(values=rng.integers(-limit, limit + 1, length).tolist(), bits=bits)
        b = QuantizedVector(values=rng.integers(-limit, limit + 1, length).tolist(), bits=bits)
        result = dot_product(a, b, n, model=model, noise=noise)
        rows.append({
            "trial": trial,
            "length": length,
            "n_per_cycle": n,
            "cycles": result.cycles,
            "adc_bits": result.adc_bits,
            "expected": result.expected,
            "value": result.value,
            "error": result.value - result.expected,
            "analog": result.analog,
            "exact": result.exact,
        })
    frame = pd.DataFrame(rows)
    mismatches = int((~frame["exact"]).sum()) if trials else 0
    if noise is None:
        logger.info(f"Oracle check: {trials - mismatches}/{trials} bit-exact")
    else:
        rms = float(np.sqrt(np.mean(frame["error"] ** 2))) if trials else 0.0
        logger.info(f"Noisy oracle check at {dr_sps:.3g} S/s: {mismatches}/{trials} off, RMS error {rms:.3f}")
    return frame
