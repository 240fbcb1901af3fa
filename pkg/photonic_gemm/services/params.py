import json
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from pydantic import ValidationError

from photonic_gemm.config import settings
from photonic_gemm.exceptions import (
    ArtifactIOError,
    InvalidParameterError,
    UnknownParameterError,
)
from photonic_gemm.models.params import (
    PeripheralParams,
    PeripheralRecord,
    PlatformId,
    PlatformParams,
)

logger = logging.getLogger(__name__)

# Values that differ between the two platforms; the rest are PlatformParams defaults
PLATFORM_DEFAULTS: Dict[PlatformId, Dict[str, float]] = {
    PlatformId.SOI: {
        "wg_loss_db_per_cm": 1.5,
        "p_inc_db_per_cm_per_lambda": 0.1,
        "mrm_il_db": 4.0,
    },
    PlatformId.SIN: {
        "wg_loss_db_per_cm": 0.5,
        "p_inc_db_per_cm_per_lambda": 0.01,
        "mrm_il_db": 0.235,
    },
}

NS = 1e-9


def _finite(value: float, name: str) -> float:
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


def dbm_to_mw(p: float) -> float:
    return 10.0 ** (_finite(p, "power (dBm)") / 10.0)


def mw_to_dbm(p: float) -> float:
    if not math.isfinite(p) or p <= 0:
        raise InvalidParameterError(f"power (mW) must be finite and positive, got {p!r}")
    return 10.0 * math.log10(p)


def db_to_linear(x: float) -> float:
    return 10.0 ** (_finite(x, "ratio (dB)") / 10.0)


def linear_to_db(x: float) -> float:
    if not math.isfinite(x) or x <= 0:
        raise InvalidParameterError(f"ratio must be finite and positive, got {x!r}")
    return 10.0 * math.log10(x)


def parse_platform(value: Union[str, PlatformId]) -> PlatformId:
    try:
        return PlatformId(str(value.value if isinstance(value, PlatformId) else value).lower())
    except ValueError:
        options = ", ".join(p.value for p in PlatformId)
        raise InvalidParameterError(f"Unknown platform '{value}' (expected one of {options})")


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a TOML or JSON file into a dict"""
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            with path.open("r", encoding="utf-8") as f:
                return json.load(f)
        with path.open("rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ArtifactIOError(f"Config file not found: {path}", path=str(path))
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise InvalidParameterError(f"Cannot parse {path}: {e}", path=str(path))
    except OSError as e:
        logger.error(f"Error reading {path}: {e}")
        raise ArtifactIOError(f"Cannot read {path}: {e}", path=str(path))


def load_overrides(path: Union[str, Path]) -> Dict[PlatformId, Dict[str, Any]]:
    """Load per-platform override tables ([soi], [sin]) from TOML or JSON"""
    raw = read_config_file(path)
    overrides: Dict[PlatformId, Dict[str, Any]] = {}
    for section, values in raw.items():
        platform = parse_platform(section)
        if not isinstance(values, dict):
            raise InvalidParameterError(f"Section [{section}] in {path} must be a table")
        _check_keys(values, f"[{section}] of {path}")
        overrides[platform] = dict(values)
    return overrides


def _check_keys(values: Mapping[str, Any], where: str) -> None:
    allowed = set(PlatformParams.model_fields) - {"platform_id"}
    unknown = [k for k in values if k not in allowed]
    if unknown:
        raise UnknownParameterError(unknown, where)


def _build_platform(fields: Dict[str, Any], where: str) -> PlatformParams:
    try:
        return PlatformParams(**fields)
    except ValidationError as e:
        problems = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        ]
        raise InvalidParameterError(
            f"Invalid platform parameters in {where}: " + "; ".join(problems),
            problems=problems,
        )


def load_platform(
    platform: Union[str, PlatformId],
    overrides: Optional[Mapping[str, Any]] = None,
    config_path: Optional[Union[str, Path]] = None,
) -> PlatformParams:
    """Platform defaults, then the calibrated config, then explicit overrides"""
    platform_id = parse_platform(platform)
    fields: Dict[str, Any] = dict(PLATFORM_DEFAULTS[platform_id])

    path = Path(config_path or settings.platform_config)
    if path.exists():
        calibrated = load_overrides(path).get(platform_id, {})
        fields.update(calibrated)
    else:
        logger.warning(f"Platform config {path} not found; using uncalibrated d_mrr")

    if overrides:
        _check_keys(overrides, "overrides")
        fields.update(overrides)

    fields["platform_id"] = platform_id
    return _build_platform(fields, "overrides" if overrides else str(path))


def default_peripherals(noc_clock_hz: float = 1e9) -> PeripheralParams:
    """Accelerator peripheral defaults; bus and router latencies are in NoC cycles"""
    cycle = 1.0 / noc_clock_hz
    return PeripheralParams(
        reduction=PeripheralRecord(power_mw=0.050, latency_s=3.125 * NS, area_mm2=3e-5),
        activation=PeripheralRecord(power_mw=0.52, latency_s=0.78 * NS, area_mm2=6e-5),
        io=PeripheralRecord(power_mw=140.18, latency_s=0.78 * NS, area_mm2=2.44e-2),
        pooling=PeripheralRecord(power_mw=0.4, latency_s=3.125 * NS, area_mm2=2.4e-4),
        edram=PeripheralRecord(power_mw=41.1, latency_s=1.56 * NS, area_mm2=0.166),
        bus=PeripheralRecord(power_mw=7.0, latency_s=5 * cycle, area_mm2=9e-3),
        router=PeripheralRecord(power_mw=42.0, latency_s=2 * cycle, area_mm2=1.5e-2),
        dac=PeripheralRecord(power_mw=12.5, latency_s=0.78 * NS, area_mm2=2.5e-3),
        adc={
            1e9: PeripheralRecord(power_mw=2.55, latency_s=0.78 * NS, area_mm2=2e-3),
            5e9: PeripheralRecord(power_mw=11.0, latency_s=0.78 * NS, area_mm2=21e-3),
            10e9: PeripheralRecord(power_mw=30.0, latency_s=0.78 * NS, area_mm2=103e-3),
        },
        mrm_eo_energy_pj_per_bit=1.4,
        mrm_area_mm2=0.95e-4,
        noc_clock_hz=noc_clock_hz,
    )


def load_peripherals(overrides: Optional[Mapping[str, Any]] = None) -> PeripheralParams:
    """Peripheral defaults with strict top-level overrides"""
    base = default_peripherals(
        noc_clock_hz=float((overrides or {}).get("noc_clock_hz", 1e9))
    )
    if not overrides:
        return base

    unknown = [k for k in overrides if k not in PeripheralParams.model_fields]
    if unknown:
        raise UnknownParameterError(unknown, "peripheral overrides")

    data = base.model_dump()
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    try:
        return PeripheralParams(**data)
    except ValidationError as e:
        raise InvalidParameterError(f"Invalid peripheral parameters: {e}")
