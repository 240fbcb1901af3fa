import logging
import math
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize

from photonic_gemm.config import settings
from photonic_gemm.exceptions import (
    ArtifactIOError,
    ConfigurationError,
    InfeasibleConfigurationError,
    InvalidParameterError,
    OutOfRangeError,
    PrecisionUnreachableError,
)
from photonic_gemm.models.linkbudget import (
    CalibrationResidual,
    CalibrationResult,
    CalibrationTarget,
    PrecisionQuery,
    ScalabilityResult,
)
from photonic_gemm.models.params import PHYSICAL, PhysicalConstants, PlatformId, PlatformParams
from photonic_gemm.services.params import db_to_linear, dbm_to_mw, load_platform, parse_platform

logger = logging.getLogger(__name__)

SENSITIVITY_BRACKET_DBM = (-60.0, 10.0)
SENSITIVITY_XTOL_DB = 1e-3
P_INC_ONSET = 20
PLAUSIBLE_D_MRR_CM = (5e-4, 5e-3)


def noise_bandwidth_hz(dr_sps: float) -> float:
    return dr_sps / math.sqrt(2.0)


def noise_current_psd(
    signal_current_a: float,
    params: PlatformParams,
    constants: PhysicalConstants = PHYSICAL,
) -> float:
    """Shot + thermal + RIN current noise density of one photodiode, A^2/Hz"""
    shot = 2.0 * constants.q * (signal_current_a + params.dark_current_a)
    thermal = 4.0 * constants.k_b * params.temperature_k / params.load_resistance_ohm
    rin = signal_current_a ** 2 * db_to_linear(params.rin_db_per_hz)
    return shot + thermal + rin


def bits_from_power(
    p_pd_dbm: float,
    dr_sps: float,
    params: PlatformParams,
    constants: PhysicalConstants = PHYSICAL,
) -> float:
    """Bit precision supported by an optical power at the photodiode"""
    if dr_sps <= 0:
        raise InvalidParameterError(f"dr_sps must be positive, got {dr_sps}")
    signal = params.responsivity * dbm_to_mw(p_pd_dbm) * 1e-3
    noise = (
        math.sqrt(noise_current_psd(signal, params, constants))
        + math.sqrt(noise_current_psd(0.0, params, constants))
    ) * math.sqrt(noise_bandwidth_hz(dr_sps))
    return (20.0 * math.log10(signal / noise) - 1.76) / 6.02


@lru_cache(maxsize=1024)
def _sensitivity(query: PrecisionQuery, params: PlatformParams) -> float:
    lo, hi = SENSITIVITY_BRACKET_DBM

    def excess(p: float) -> float:
        return bits_from_power(p, query.dr_sps, params) - query.bits

    if excess(lo) > 0 or excess(hi) < 0:
        raise PrecisionUnreachableError(
            f"{query.bits}-bit precision at {query.dr_sps:g} S/s is not reachable "
            f"for photodiode power in [{lo}, {hi}] dBm",
            bits=query.bits,
            dr_sps=query.dr_sps,
        )
    return float(optimize.bisect(excess, lo, hi, xtol=SENSITIVITY_XTOL_DB))


def pd_sensitivity(query: PrecisionQuery, params: PlatformParams) -> float:
    """Minimum photodiode power (dBm) for the requested precision"""
    return _sensitivity(query, params)


def path_loss_terms(n: int, params: PlatformParams) -> Tuple[float, float]:
    """Split the surviving power into (fixed dBm, dB lost per cm of ring pitch)"""
    if n < 1:
        raise OutOfRangeError(f"TPC size must be >= 1, got {n}")
    fixed = (
        params.p_laser_dbm
        - params.p_smf_db
        - params.p_coupling_db
        - params.splitter_il_db * math.log2(n)
        - params.mrm_il_db
        - params.mrr_il_db
        - (n - 1) * params.mrm_obl_db
        - (n - 1) * params.mrr_obl_db
        - params.penalty_db
    )
    per_cm = params.wg_loss_db_per_cm * n
    if n > P_INC_ONSET:
        per_cm += params.p_inc_db_per_cm_per_lambda * (n - P_INC_ONSET)
    return fixed, per_cm


def p_output(n: int, params: PlatformParams) -> float:
    """Optical power (dBm) reaching the photodiode through an N-sized core"""
    fixed, per_cm = path_loss_terms(n, params)
    return fixed - per_cm * params.d_mrr_cm


def error_function(n: int, query: PrecisionQuery, params: PlatformParams) -> float:
    return p_output(n, params) - pd_sensitivity(query, params)


def optimal_n(
    query: PrecisionQuery,
    params: PlatformParams,
    n_max: Optional[int] = None,
    method: str = "bisect",
) -> ScalabilityResult:
    """Largest N (= M) whose link budget still meets the photodiode sensitivity"""
    n_max = n_max or settings.n_max
    if n_max < 1:
        raise OutOfRangeError(f"n_max must be >= 1, got {n_max}")
    sensitivity = pd_sensitivity(query, params)

    def feasible(n: int) -> bool:
        return p_output(n, params) - sensitivity >= 0

    if not feasible(1):
        raise InfeasibleConfigurationError(
            f"A single multiplier cannot meet {sensitivity:.3f} dBm on "
            f"{params.platform_id.value} at {query.bits} bits / {query.dr_sps:g} S/s",
            platform=params.platform_id.value,
            bits=query.bits,
            dr_sps=query.dr_sps,
        )

    if method == "scan":
        n_opt = 1
        while n_opt < n_max and feasible(n_opt + 1):
            n_opt += 1
    elif method == "bisect":
        if feasible(n_max):
            n_opt = n_max
        else:
            lo, hi = 1, n_max  # feasible(lo), not feasible(hi)
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if feasible(mid):
                    lo = mid
                else:
                    hi = mid
            n_opt = lo
    else:
        raise ConfigurationError(f"Unknown search method '{method}'")

    out = p_output(n_opt, params)
    if n_opt == n_max:
        logger.warning(f"n_opt reached the search bound {n_max} on {params.platform_id.value}")
    return ScalabilityResult(
        n_opt=n_opt,
        pd_sensitivity_dbm=sensitivity,
        p_output_dbm=out,
        ef_db=out - sensitivity,
        platform_id=params.platform_id,
        query=query,
        capped=n_opt == n_max,
    )


def load_calibration_targets(path: Union[str, Path, None] = None) -> List[CalibrationTarget]:
    path = Path(path or settings.calibration_targets)
    try:
        df = pd.read_csv(path, comment="#")
    except FileNotFoundError:
        raise ArtifactIOError(f"Calibration targets not found: {path}", path=str(path))
    except Exception as e:
        logger.error(f"Error reading calibration targets {path}: {e}")
        raise ArtifactIOError(f"Cannot read {path}: {e}", path=str(path))

    missing = {"platform", "bits", "dr_sps", "expected_n"} - set(df.columns)
    if missing:
        raise InvalidParameterError(
            f"Calibration targets {path} missing column(s): {', '.join(sorted(missing))}"
        )
    return [
        CalibrationTarget(
            platform_id=parse_platform(row.platform),
            bits=int(row.bits),
            dr_sps=float(row.dr_sps),
            expected_n=int(row.expected_n),
        )
        for row in df.itertuples(index=False)
    ]


def _grid(d_min_cm: float, d_max_cm: float, step_cm: float) -> np.ndarray:
    if d_min_cm <= 0 or d_max_cm < d_min_cm or step_cm <= 0:
        raise InvalidParameterError(
            f"Invalid d_mrr search range [{d_min_cm}, {d_max_cm}] cm step {step_cm}"
        )
    count = int(math.floor((d_max_cm - d_min_cm) / step_cm + 1e-9)) + 1
    return d_min_cm + step_cm * np.arange(count)


def n_opt_over_grid(
    query: PrecisionQuery,
    params: PlatformParams,
    grid_cm: np.ndarray,
    n_max: int,
) -> np.ndarray:
    """n_opt for every ring pitch in grid_cm at once

    Size n stays feasible while d <= (fixed(n) - sensitivity) / per_cm(n); those
    thresholds fall with n, so n_opt(d) is the count of thresholds >= d.
    """
    sensitivity = pd_sensitivity(query, params)
    thresholds = np.empty(n_max)
    for n in range(1, n_max + 1):
        fixed, per_cm = path_loss_terms(n, params)
        margin = fixed - sensitivity
        if per_cm > 0:
            thresholds[n - 1] = margin / per_cm
        else:
            thresholds[n - 1] = math.inf if margin >= 0 else -math.inf
    below = np.searchsorted(np.sort(thresholds), grid_cm, side="left")
    return n_max - below


def calibrate_d_mrr(
    targets: Sequence[CalibrationTarget],
    d_min_cm: float = 5e-4,
    d_max_cm: float = 2.0,
    step_cm: float = 1e-4,
    n_max: Optional[int] = None,
    base_params: Optional[Mapping[PlatformId, PlatformParams]] = None,
) -> Dict[PlatformId, CalibrationResult]:
    """Grid-search the ring pitch per platform against published core sizes"""
    if not targets:
        raise ConfigurationError("Calibration needs at least one target")
    n_max = n_max or settings.n_max
    grid = _grid(d_min_cm, d_max_cm, step_cm)
    logger.info(f"Calibrating d_mrr over {len(grid)} grid points for {len(targets)} targets")

    results: Dict[PlatformId, CalibrationResult] = {}
    for platform in sorted({t.platform_id for t in targets}, key=lambda p: p.value):
        params = (base_params or {}).get(platform) or load_platform(platform)
        own = [t for t in targets if t.platform_id == platform]

        total = np.zeros(len(grid), dtype=np.int64)
        for target in own:
            query = PrecisionQuery(bits=target.bits, dr_sps=target.dr_sps)
            total += np.abs(n_opt_over_grid(query, params, grid, n_max) - target.expected_n)

        best = int(np.argmin(total))  # first minimum = smallest d
        d_best = round(float(grid[best]), 7)
        tuned = params.model_copy(update={"d_mrr_cm": d_best})

        residuals = []
        for target in own:
            query = PrecisionQuery(bits=target.bits, dr_sps=target.dr_sps)
            try:
                n = optimal_n(query, tuned, n_max=n_max).n_opt
            except InfeasibleConfigurationError:
                n = 0
            residuals.append(
                CalibrationResidual(
                    bits=target.bits,
                    dr_sps=target.dr_sps,
                    expected_n=target.expected_n,
                    n_opt=n,
                    residual=n - target.expected_n,
                )
            )

        lo, hi = PLAUSIBLE_D_MRR_CM
        plausible = lo <= d_best <= hi
        result = CalibrationResult(
            platform_id=platform,
            d_mrr_cm=d_best,
            total_residual=sum(abs(r.residual) for r in residuals),
            residuals=residuals,
            plausible=plausible,
        )
        if not plausible:
            logger.warning(
                f"Calibrated d_mrr for {platform.value} is {d_best} cm, outside the "
                f"{lo * 1e4:.0f}-{hi * 1e4:.0f} um window (total residual {result.total_residual})"
            )
        logger.info(f"✓ {platform.value}: d_mrr = {d_best} cm, total residual {result.total_residual}")
        results[platform] = result
    return results


def calibration_frame(results: Mapping[PlatformId, CalibrationResult]) -> pd.DataFrame:
    rows = []
    for platform in sorted(results, key=lambda p: p.value):
        result = results[platform]
        for r in result.residuals:
            rows.append({
                "platform": platform.value,
                "d_mrr_cm": result.d_mrr_cm,
                "plausible": result.plausible,
                "bits": r.bits,
                "dr_sps": r.dr_sps,
                "expected_n": r.expected_n,
                "n_opt": r.n_opt,
                "residual": r.residual,
            })
    return pd.DataFrame(rows)


def scalability_grid(
    platforms: Iterable[Union[str, PlatformId]],
    bits: Iterable[int],
    rates: Iterable[float],
    params_by_platform: Optional[Mapping[PlatformId, PlatformParams]] = None,
    n_max: Optional[int] = None,
) -> pd.DataFrame:
    """Supported core size over platform x precision x data-rate"""
    rows = []
    for platform, b, dr in product(
        [parse_platform(p) for p in platforms], list(bits), list(rates)
    ):
        params = (params_by_platform or {}).get(platform) or load_platform(platform)
        result = optimal_n(PrecisionQuery(bits=b, dr_sps=dr), params, n_max=n_max)
        rows.append({
            "platform": platform.value,
            "bits": b,
            "dr_sps": dr,
            "n_opt": result.n_opt,
            "pd_sensitivity_dbm": result.pd_sensitivity_dbm,
            "p_output_dbm": result.p_output_dbm,
            "ef_db": result.ef_db,
        })
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    return frame.sort_values(["platform", "bits", "dr_sps"], kind="mergesort").reset_index(drop=True)
