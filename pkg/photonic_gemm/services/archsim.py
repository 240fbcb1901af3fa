import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd
from scipy import stats

from photonic_gemm.config import settings
from photonic_gemm.exceptions import (
    ConfigurationError,
    InvalidParameterError,
    MissingBaselineError,
)
from photonic_gemm.models.archsim import (
    ENERGY_COMPONENTS,
    LATENCY_PHASES,
    AcceleratorConfig,
    AcceleratorPreset,
    CostBreakdown,
    GemmSchedule,
    GmeanRow,
    NormalizedReport,
    NormalizedRow,
    ReportKey,
    SimReport,
    TpcConfig,
)
from photonic_gemm.models.linkbudget import PrecisionQuery
from photonic_gemm.models.params import PeripheralParams, PlatformId
from photonic_gemm.models.workload import GemmOp, LayerKind, LayerSpec
from photonic_gemm.services.linkbudget import optimal_n
from photonic_gemm.services.params import default_peripherals, load_platform, parse_platform, read_config_file
from photonic_gemm.services.workload import lower_layer, stack_groups

logger = logging.getLogger(__name__)

TPCS_PER_GROUP = 2  # two native-precision cores recombined by shift-and-add
OPERANDS_PER_MAC = 2  # input and weight modulators
ACCESSES_PER_CHUNK = 2  # one input chunk and one weight chunk


def _breakdown(latency: Dict[str, float], energy: Dict[str, float]) -> CostBreakdown:
    return CostBreakdown(
        latency_s={p: latency.get(p, 0.0) for p in LATENCY_PHASES},
        energy_j={c: energy.get(c, 0.0) for c in ENERGY_COMPONENTS},
    )


def combine(fragments: Iterable[CostBreakdown]) -> CostBreakdown:
    """Component-wise sum of cost fragments"""
    fragments = list(fragments)
    return _breakdown(
        {p: math.fsum(f.latency_s[p] for f in fragments) for p in LATENCY_PHASES},
        {c: math.fsum(f.energy_j[c] for f in fragments) for c in ENERGY_COMPONENTS},
    )


def check_identity(breakdown: CostBreakdown, rel_tol: float = 1e-12) -> None:
    """Totals must match the plain sum of their parts"""
    for total, parts in (
        (breakdown.total_latency_s, breakdown.latency_s.values()),
        (breakdown.total_energy_j, breakdown.energy_j.values()),
    ):
        if not math.isclose(total, sum(parts), rel_tol=rel_tol, abs_tol=0.0):
            raise ConfigurationError(f"Accounting identity violated: {total} != {sum(parts)}")


def schedule_gemm(op: GemmOp, cfg: AcceleratorConfig) -> GemmSchedule:
    """Output-stationary schedule: outputs spread over paired cores, inner over chunks"""
    n, m = cfg.tpc.n, cfg.tpc.m
    lanes = cfg.paired_tpcs * m
    outputs = op.rows * op.cols
    chunks = math.ceil(op.inner / n)
    waves = math.ceil(outputs / lanes)
    compute_cycles = waves * chunks
    active_pairs = min(cfg.paired_tpcs, math.ceil(outputs / m))

    return GemmSchedule(
        waves=waves,
        chunks=chunks,
        compute_cycles=compute_cycles,
        serial_accesses=ACCESSES_PER_CHUNK * compute_cycles,
        buffer_accesses=ACCESSES_PER_CHUNK * TPCS_PER_GROUP * outputs * chunks,
        symbols=OPERANDS_PER_MAC * TPCS_PER_GROUP * outputs * op.inner,
        adc_samples=TPCS_PER_GROUP * outputs,
        outputs=outputs,
        macs=outputs * op.inner,
        active_tpcs=TPCS_PER_GROUP * active_pairs,
        active_dpes=TPCS_PER_GROUP * min(outputs, lanes),
        active_wavelengths=TPCS_PER_GROUP * active_pairs * n,
    )


def cost_gemm(op: GemmOp, cfg: AcceleratorConfig, schedule: Optional[GemmSchedule] = None) -> CostBreakdown:
    """Latency and energy of one scheduled GEMM"""
    schedule = schedule or schedule_gemm(op, cfg)
    p = cfg.peripheral
    dr = cfg.tpc.dr_sps
    adc = p.adc_for_rate(dr)

    compute_s = schedule.compute_cycles / dr
    buffer_s = schedule.serial_accesses * p.edram.latency_s * (1.0 - cfg.buffer_overlap)
    peripheral_s = (
        schedule.waves * adc.latency_s
        + p.reduction.latency_s
        + p.bus.latency_s
        + p.router.latency_s
    )
    energy = {
        "laser": schedule.active_wavelengths * cfg.laser_mw_per_lambda * 1e-3 * compute_s,
        "mrm_eo": p.mrm_eo_energy_pj_per_bit * 1e-12 * cfg.tpc.bits * schedule.symbols,
        "dac": schedule.active_dpes * p.dac.power_mw * 1e-3 * compute_s,
        "adc": schedule.active_dpes * adc.power_mw * 1e-3 * compute_s,
        "edram": schedule.buffer_accesses * p.edram_energy_per_access_j,
        "bus": schedule.waves * p.bus.energy_per_event_j,
        "router": schedule.waves * p.router.energy_per_event_j,
        "reduction": schedule.outputs * p.reduction.energy_per_event_j,
    }
    return _breakdown(
        {"compute": compute_s, "buffer": buffer_s, "peripheral": peripheral_s},
        energy,
    )


def cost_vector_layer(layer: LayerSpec, cfg: AcceleratorConfig) -> CostBreakdown:
    """Pooling or activation, pipelined behind the producing GEMM"""
    if layer.kind is LayerKind.POOL:
        record, component = cfg.peripheral.pooling, "pooling"
    elif layer.kind is LayerKind.ACTIVATION:
        record, component = cfg.peripheral.activation, "activation"
    else:
        raise InvalidParameterError(f"Layer {layer.name} is not a vector layer")
    return _breakdown(
        {"peripheral": record.latency_s},
        {component: layer.output_elements() * record.energy_per_event_j},
    )


def simulate_model(layers: Sequence[LayerSpec], cfg: AcceleratorConfig) -> CostBreakdown:
    """Batch-1 frame cost with layers executed back to back"""
    if not layers:
        raise InvalidParameterError("Cannot simulate an empty workload")

    fragments = []
    for layer in layers:
        if layer.is_gemm:
            op = stack_groups(lower_layer(layer))
            schedule = schedule_gemm(op, cfg)
            if schedule.macs != op.mac_count:
                raise ConfigurationError(f"MAC mismatch on {layer.name}")
            fragments.append(cost_gemm(op, cfg, schedule))
        else:
            fragments.append(cost_vector_layer(layer, cfg))

    io = cfg.peripheral.io
    frame = combine(fragments + [_breakdown({"peripheral": io.latency_s}, {})])
    io_energy = (
        io.power_mw * 1e-3 * frame.total_latency_s if cfg.io_always_on else io.energy_per_event_j
    )
    result = combine([frame, _breakdown({}, {"io": io_energy})])
    check_identity(result)
    logger.debug(f"{cfg.name}: {len(layers)} layers, {result.fps:.1f} FPS, {result.fps_per_watt:.2f} FPS/W")
    return result


def tpc_area_mm2(tpc: TpcConfig, peripherals: PeripheralParams) -> float:
    """Per-core area: M DPEs of 2N modulators, N DACs and one ADC, plus back-end units"""
    adc = peripherals.adc_for_rate(tpc.dr_sps)
    dpe = 2 * tpc.n * peripherals.mrm_area_mm2 + tpc.n * peripherals.dac.area_mm2 + adc.area_mm2
    back_end = (
        peripherals.reduction.area_mm2
        + peripherals.activation.area_mm2
        + peripherals.pooling.area_mm2
    )
    return tpc.m * dpe + back_end


def load_presets(path: Union[str, Path, None] = None) -> List[AcceleratorPreset]:
    raw = read_config_file(path or settings.accelerator_config)
    entries = raw.get("accelerator", [])
    try:
        return [AcceleratorPreset(**entry) for entry in entries]
    except Exception as e:
        raise InvalidParameterError(f"Invalid accelerator preset in {path}: {e}")


def find_preset(
    platform: PlatformId,
    dr_sps: float,
    presets: Optional[Sequence[AcceleratorPreset]] = None,
) -> Optional[AcceleratorPreset]:
    for preset in presets if presets is not None else load_presets():
        if preset.platform == platform and math.isclose(preset.dr_sps, dr_sps, rel_tol=1e-9):
            return preset
    return None


def area_proportionate_counts(
    variants: Sequence[TpcConfig],
    reference_budget: Optional[float] = None,
    peripherals: Optional[PeripheralParams] = None,
    presets: Optional[Sequence[AcceleratorPreset]] = None,
) -> List[int]:
    """TPC count per variant; published counts unless an area budget (mm^2) is given"""
    if not variants:
        raise InvalidParameterError("No accelerator variants given")

    if reference_budget is None:
        counts = []
        for tpc in variants:
            preset = find_preset(tpc.platform_id, tpc.dr_sps, presets)
            if preset is None:
                raise ConfigurationError(
                    f"No published count for {tpc.platform_id.value} at {tpc.dr_sps:g} S/s; "
                    f"give an area budget instead"
                )
            if preset.n != tpc.n:
                logger.warning(
                    f"Passing through count {preset.tpc_count} published for N={preset.n} "
                    f"to a core with N={tpc.n}"
                )
            counts.append(preset.tpc_count)
        return counts

    if reference_budget <= 0:
        raise InvalidParameterError(f"Area budget must be positive, got {reference_budget}")
    peripherals = peripherals or default_peripherals()
    return [int(math.floor(reference_budget / tpc_area_mm2(tpc, peripherals))) for tpc in variants]


def build_accelerator(
    platform: Union[str, PlatformId],
    dr_sps: float,
    n: Optional[int] = None,
    tpc_count: Optional[int] = None,
    area_budget_mm2: Optional[float] = None,
    bits: int = 4,
    peripherals: Optional[PeripheralParams] = None,
    presets: Optional[Sequence[AcceleratorPreset]] = None,
    name: Optional[str] = None,
    **options,
) -> AcceleratorConfig:
    """Accelerator for a platform and data rate; unspecified N comes from the link budget"""
    platform_id = parse_platform(platform)
    peripherals = peripherals or default_peripherals()
    preset = find_preset(platform_id, dr_sps, presets)

    if n is None:
        if preset is not None and bits == 4:
            n = preset.n
        else:
            query = PrecisionQuery(bits=bits, dr_sps=dr_sps)
            n = optimal_n(query, load_platform(platform_id)).n_opt
    tpc = TpcConfig(n=n, m=n, bits=bits, target_bits=2 * bits, dr_sps=dr_sps, platform_id=platform_id)

    if area_budget_mm2 is not None:
        tpc_count = area_proportionate_counts([tpc], area_budget_mm2, peripherals)[0]
    elif tpc_count is None:
        tpc_count = area_proportionate_counts([tpc], None, peripherals, presets)[0]

    return AcceleratorConfig(
        name=name or platform_id.value,
        tpc=tpc,
        tpc_count=tpc_count,
        peripheral=peripherals,
        **options,
    )


def parse_report_key(text: str) -> ReportKey:
    """'model/arch/dr' into a ReportKey"""
    parts = text.split("/")
    if len(parts) != 3:
        raise InvalidParameterError(f"Baseline must look like model/arch/rate, got '{text}'")
    try:
        rate = float(parts[2])
    except ValueError:
        raise InvalidParameterError(f"Bad data rate in baseline '{text}'")
    return ReportKey(parts[0], parts[1], rate)


def _same_key(a: ReportKey, b: ReportKey) -> bool:
    return a.model == b.model and a.arch == b.arch and math.isclose(a.dr_sps, b.dr_sps, rel_tol=1e-9)


def normalize_report(reports: Sequence[SimReport], baseline: ReportKey) -> NormalizedReport:
    """FPS and FPS/W relative to a baseline cell, with per-architecture gmeans"""
    base = next((r for r in reports if _same_key(r.key, baseline)), None)
    if base is None:
        raise MissingBaselineError(
            f"Baseline {baseline.label()} not among {len(reports)} reports",
            baseline=baseline.label(),
        )

    base_fps = base.breakdown.fps
    base_fpw = base.breakdown.fps_per_watt
    rows = []
    for report in sorted(reports, key=lambda r: (r.arch, r.dr_sps, r.model)):
        rows.append(
            NormalizedRow(
                model=report.model,
                arch=report.arch,
                dr_sps=report.dr_sps,
                fps=report.breakdown.fps,
                fps_per_watt=report.breakdown.fps_per_watt,
                norm_fps=report.breakdown.fps / base_fps,
                norm_fps_per_watt=report.breakdown.fps_per_watt / base_fpw,
            )
        )

    groups: Dict[tuple, List[NormalizedRow]] = defaultdict(list)
    for row in rows:
        groups[(row.arch, row.dr_sps)].append(row)
    gmeans = [
        GmeanRow(
            arch=arch,
            dr_sps=dr,
            models=len(members),
            gmean_norm_fps=float(stats.gmean([m.norm_fps for m in members])),
            gmean_norm_fps_per_watt=float(stats.gmean([m.norm_fps_per_watt for m in members])),
        )
        for (arch, dr), members in sorted(groups.items())
    ]
    return NormalizedReport(baseline=baseline.label(), rows=rows, gmeans=gmeans)


def ratio_table(report: NormalizedReport, numerator: str, denominator: str) -> pd.DataFrame:
    """Per-rate gmean ratios between two architectures"""
    by_key = {(g.arch, g.dr_sps): g for g in report.gmeans}
    rows = []
    for (arch, dr), num in sorted(by_key.items()):
        if arch != numerator or (denominator, dr) not in by_key:
            continue
        den = by_key[(denominator, dr)]
        rows.append({
            "dr_sps": dr,
            "fps_ratio": num.gmean_norm_fps / den.gmean_norm_fps,
            "fps_per_watt_ratio": num.gmean_norm_fps_per_watt / den.gmean_norm_fps_per_watt,
        })
    return pd.DataFrame(rows, columns=["dr_sps", "fps_ratio", "fps_per_watt_ratio"])


def simulate_cell(model_name: str, layers: Sequence[LayerSpec], cfg: AcceleratorConfig) -> SimReport:
    breakdown = simulate_model(layers, cfg)
    return SimReport(
        model=model_name,
        arch=cfg.name,
        platform_id=cfg.tpc.platform_id,
        dr_sps=cfg.tpc.dr_sps,
        n=cfg.tpc.n,
        tpc_count=cfg.tpc_count,
        breakdown=breakdown,
    )
