"""Command-line front end: python -m photonic_gemm <command> [flags]

Every command writes its artifacts plus a manifest.json of content hashes
into the output directory. Errors are reported as one JSON object on stderr
and mapped onto the exit codes of photonic_gemm.exceptions.
"""

import argparse
import json
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd
from pydantic import ValidationError

from photonic_gemm.config import settings
from photonic_gemm.exceptions import (
    ArtifactIOError,
    InvalidParameterError,
    PhotonicGemmError,
    VerificationError,
)
from photonic_gemm.models.device import MrmModel
from photonic_gemm.models.funcsim import QuantizedVector
from photonic_gemm.models.linkbudget import PrecisionQuery
from photonic_gemm.models.params import PlatformId, PlatformParams
from photonic_gemm.models.run import DEFAULT_RATES, Command, RunConfig
from photonic_gemm.services import archsim, device, funcsim, linkbudget, workload
from photonic_gemm.services.params import load_overrides, load_platform
from photonic_gemm.services.reports import ArtifactWriter

logger = logging.getLogger(__name__)

T = TypeVar("T")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
PUBLISHED_PLATFORMS = [PlatformId.SIN, PlatformId.SOI]
PUBLISHED_BITS = [1, 2, 3, 4]


def fan_out(fn: Callable[..., T], cells: Sequence[Any], workers: int) -> List[T]:
    """Evaluate independent cells, results in cell order whatever the pool size"""
    if workers <= 1 or len(cells) <= 1:
        return [fn(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def _platform_params(config: RunConfig) -> Dict[PlatformId, PlatformParams]:
    overrides = load_overrides(config.overrides) if config.overrides else {}
    return {p: load_platform(p, overrides.get(p)) for p in config.platforms}


# Pipelines


def run_spectra(config: RunConfig, writer: ArtifactWriter) -> None:
    model = MrmModel()
    writer.write_csv(device.ito_state_table(model), "ito_state_table.csv", "ITO modulator state table")
    writer.write_csv(
        device.shift_curve_check(model),
        "shift_curve_check.csv",
        "resonance shift interpolation at characterized voltages and midpoints",
    )
    for bits in config.bits:
        levels = pd.DataFrame([lvl.model_dump() for lvl in device.weight_levels(model, bits)])
        writer.write_csv(levels, f"weight_levels_{bits}bit.csv", f"{bits}-bit weight levels")
        writer.write_csv(
            device.spectra_frame(model, bits),
            f"spectra_{bits}bit.csv",
            f"through-port spectra of the {bits}-bit weight levels",
        )


def run_scalability(config: RunConfig, writer: ArtifactWriter) -> pd.DataFrame:
    params = _platform_params(config)
    cells = [(p, b, r) for p in config.platforms for b in config.bits for r in config.rates]
    frames = fan_out(
        lambda cell: linkbudget.scalability_grid([cell[0]], [cell[1]], [cell[2]], params),
        cells,
        config.workers,
    )
    grid = pd.concat(frames, ignore_index=True)
    grid = grid.sort_values(["platform", "bits", "dr_sps"], kind="mergesort").reset_index(drop=True)
    writer.write_csv(
        grid,
        "scalability_grid.csv",
        "reproduces the published sweep of supported core size vs bit precision and data rate",
    )
    return grid


def run_funcsim_verify(config: RunConfig, writer: ArtifactWriter) -> pd.DataFrame:
    noise_params = _platform_params(config)[config.platforms[0]] if config.noise else None
    dr = config.rates[0]
    frames = fan_out(
        lambda bits: funcsim.verify_against_oracle(
            trials=config.trials,
            bits=bits,
            seed=config.seed,
            noise_params=noise_params,
            dr_sps=dr,
        ).assign(bits=bits),
        config.bits,
        config.workers,
    )
    results = pd.concat(frames, ignore_index=True)
    if noise_params is not None:
        description = f"noisy dot products on {noise_params.platform_id.value} at {dr:.3g} S/s vs exact integer oracle"
    else:
        description = "noiseless dot products vs exact integer oracle"
    writer.write_csv(results, "funcsim_verify.csv", description)

    if config.verbose:
        rng = np.random.default_rng(config.seed)
        bits = config.bits[-1]
        limit = 2 ** bits - 1
        a = QuantizedVector(values=rng.integers(-limit, limit + 1, 64).tolist(), bits=bits)
        b = QuantizedVector(values=rng.integers(-limit, limit + 1, 64).tolist(), bits=bits)
        traced = funcsim.dot_product(a, b, 8, trace=True)
        writer.write_csv(funcsim.trace_frame(traced), "funcsim_trace.csv", "per-cycle accumulator trace")

    mismatches = int((~results["exact"]).sum())
    if mismatches and noise_params is None:
        raise VerificationError(
            f"{mismatches} of {len(results)} dot products differ from the oracle",
            mismatches=mismatches,
        )
    return results


def _simulate_reports(
    models: Sequence[str],
    platforms: Sequence[PlatformId],
    rates: Sequence[float],
    workers: int,
) -> List[archsim.SimReport]:
    descriptions = {name: workload.load_model_description(name) for name in models}
    presets = archsim.load_presets()
    accelerators = {
        (p, r): archsim.build_accelerator(p, r, presets=presets) for p in platforms for r in rates
    }
    cells = [(m, p, r) for m in models for p in platforms for r in rates]

    def simulate(cell):
        model, platform, rate = cell
        description = descriptions[model]
        return archsim.simulate_cell(description.name, description.layers, accelerators[(platform, rate)])

    logger.info(f"Simulating {len(cells)} model/architecture/rate cells")
    reports = fan_out(simulate, cells, workers)
    return sorted(reports, key=lambda r: (r.model, r.arch, r.dr_sps))


def _write_system(
    reports: List[archsim.SimReport],
    baseline: archsim.ReportKey,
    writer: ArtifactWriter,
    source: str = "",
) -> archsim.NormalizedReport:
    normalized = archsim.normalize_report(reports, baseline)
    rows = pd.DataFrame([r.model_dump() for r in normalized.rows])
    gmeans = pd.DataFrame([g.model_dump() for g in normalized.gmeans])

    fps = pd.concat([
        rows[["model", "arch", "dr_sps", "fps", "norm_fps"]],
        gmeans.assign(model="gmean", fps=float("nan")).rename(columns={"gmean_norm_fps": "norm_fps"})[
            ["model", "arch", "dr_sps", "fps", "norm_fps"]
        ],
    ], ignore_index=True)
    fpw = pd.concat([
        rows[["model", "arch", "dr_sps", "fps_per_watt", "norm_fps_per_watt"]],
        gmeans.assign(model="gmean", fps_per_watt=float("nan")).rename(
            columns={"gmean_norm_fps_per_watt": "norm_fps_per_watt"}
        )[["model", "arch", "dr_sps", "fps_per_watt", "norm_fps_per_watt"]],
    ], ignore_index=True)

    label = baseline.label()
    writer.write_csv(fps, "system_fps.csv", f"{source}normalized FPS (baseline {label})")
    writer.write_csv(fpw, "system_fps_per_watt.csv", f"{source}normalized FPS/W (baseline {label})")
    archs = sorted({r.arch for r in reports})
    if PlatformId.SIN.value in archs and PlatformId.SOI.value in archs:
        writer.write_csv(
            archsim.ratio_table(normalized, PlatformId.SIN.value, PlatformId.SOI.value),
            "system_ratios.csv",
            "gmean sin/soi ratios per data rate",
        )
    writer.write_json(
        {
            "baseline": label,
            "reports": [r.model_dump(mode="json") for r in reports],
        },
        "system_reports.json",
    )
    return normalized


def _default_baseline(models: Sequence[str], platforms: Sequence[PlatformId], rates: Sequence[float]) -> str:
    arch = PlatformId.SOI if PlatformId.SOI in platforms else platforms[0]
    name = workload.load_model_description(models[0]).name
    return f"{name}/{arch.value}/{max(rates):g}"


def run_simulate(config: RunConfig, writer: ArtifactWriter) -> archsim.NormalizedReport:
    reports = _simulate_reports(config.models, config.platforms, config.rates, config.workers)
    baseline = config.baseline or _default_baseline(config.models, config.platforms, config.rates)
    return _write_system(reports, archsim.parse_report_key(baseline), writer)


def run_calibrate(config: RunConfig, writer: ArtifactWriter) -> Dict[PlatformId, Any]:
    targets = linkbudget.load_calibration_targets(config.targets)
    overrides = load_overrides(config.overrides) if config.overrides else {}
    base = {t.platform_id: load_platform(t.platform_id, overrides.get(t.platform_id)) for t in targets}
    results = linkbudget.calibrate_d_mrr(targets, base_params=base)
    writer.write_csv(
        linkbudget.calibration_frame(results),
        "calibration.csv",
        "ring pitch calibrated against published core sizes",
    )
    writer.write_json(
        {p.value: r.model_dump(mode="json") for p, r in results.items()},
        "calibration.json",
    )
    return results


def tpc_sizing_frame(overrides: Optional[Dict[PlatformId, Dict[str, Any]]] = None) -> pd.DataFrame:
    """Link-budget core sizes next to the published sizes and counts"""
    overrides = overrides or {}
    presets = archsim.load_presets()
    rows = []
    for target in linkbudget.load_calibration_targets():
        params = load_platform(target.platform_id, overrides.get(target.platform_id))
        result = linkbudget.optimal_n(PrecisionQuery(bits=target.bits, dr_sps=target.dr_sps), params)
        preset = archsim.find_preset(target.platform_id, target.dr_sps, presets) if target.bits == 4 else None
        rows.append({
            "platform": target.platform_id.value,
            "bits": target.bits,
            "dr_sps": target.dr_sps,
            "d_mrr_cm": params.d_mrr_cm,
            "published_n": target.expected_n,
            "n_opt": result.n_opt,
            "residual": result.n_opt - target.expected_n,
            "tpc_count": preset.tpc_count if preset else None,
        })
    frame = pd.DataFrame(rows)
    frame["tpc_count"] = frame["tpc_count"].astype("Int64")
    return frame.sort_values(["platform", "bits", "dr_sps"], kind="mergesort").reset_index(drop=True)


def reproduce_paper(
    output_dir: str,
    workers: int = 1,
    seed: int = 0,
    overrides: Optional[str] = None,
) -> List[Path]:
    """Regenerate every published table and figure dataset in one directory"""
    writer = ArtifactWriter(output_dir)
    model = MrmModel()
    writer.write_csv(
        device.shift_curve_check(model),
        "shift_curve_check.csv",
        "reproduces the published ITO modulator state table, with a resonance shift interpolation check",
    )

    grid_config = RunConfig(
        command=Command.SCALABILITY,
        platforms=PUBLISHED_PLATFORMS,
        bits=PUBLISHED_BITS,
        rates=DEFAULT_RATES,
        output_dir=output_dir,
        overrides=overrides,
        workers=workers,
        seed=seed,
    )
    run_scalability(grid_config, writer)
    writer.write_csv(
        tpc_sizing_frame(load_overrides(overrides) if overrides else None),
        "tpc_sizing.csv",
        "reproduces the published core sizes and core counts per platform and rate",
    )

    models = workload.bundled_models()
    reports = _simulate_reports(models, PUBLISHED_PLATFORMS, DEFAULT_RATES, workers)
    baseline = _default_baseline(models, PUBLISHED_PLATFORMS, DEFAULT_RATES)
    _write_system(
        reports,
        archsim.parse_report_key(baseline),
        writer,
        source="reproduces the published system comparison: ",
    )

    writer.write_manifest(Command.REPRODUCE_PAPER.value, seed)
    logger.info(f"✓ Reproduction bundle complete in {writer.output_dir}")
    return list(writer.written)


PIPELINES = {
    Command.SPECTRA: run_spectra,
    Command.SCALABILITY: run_scalability,
    Command.FUNCSIM_VERIFY: run_funcsim_verify,
    Command.SIMULATE: run_simulate,
    Command.CALIBRATE: run_calibrate,
}


def run(config: RunConfig) -> int:
    """Execute one configured command; raises PhotonicGemmError on failure"""
    logger.info(f"Running {config.command.value} into {config.output_dir}")
    if config.command is Command.REPRODUCE_PAPER:
        reproduce_paper(config.output_dir, config.workers, config.seed, config.overrides)
        return 0

    writer = ArtifactWriter(config.output_dir)
    PIPELINES[config.command](config, writer)
    writer.write_manifest(config.command.value, config.seed)
    return 0


# Argument handling


def parse_bits(text: str) -> List[int]:
    """'1-4' or '1,3,4'"""
    try:
        values: List[int] = []
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                if hi < lo:
                    raise ValueError(part)
                values.extend(range(lo, hi + 1))
            elif part:
                values.append(int(part))
    except ValueError:
        raise InvalidParameterError(f"Cannot parse bit list '{text}'")
    return values


def parse_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def parse_rates(text: str) -> List[float]:
    try:
        return [float(part) for part in parse_list(text)]
    except ValueError:
        raise InvalidParameterError(f"Cannot parse rate list '{text}'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", help=f"artifact directory (default {settings.output_dir})")
    common.add_argument("--workers", type=int, help="parallel grid cells")
    common.add_argument("--seed", type=int, help="seed for randomized runs")
    common.add_argument("--config", help="RunConfig TOML; flags override its values")
    common.add_argument("--overrides", help="per-platform parameter overrides (TOML or JSON)")
    common.add_argument("--verbose", action="store_true", default=None, help="debug logging and trace dumps")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--platforms", help="comma list of soi, sin")
    grid.add_argument("--bits", help="range or list, e.g. 1-4")
    grid.add_argument("--rates", help="comma list of data rates in S/s")

    parser = argparse.ArgumentParser(prog="photonic_gemm", description="Photonic GEMM accelerator design-space toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(Command.SPECTRA.value, parents=[common, grid], help="device tables and spectra")
    sub.add_parser(Command.SCALABILITY.value, parents=[common, grid], help="core size over bits x rates")
    verify = sub.add_parser(Command.FUNCSIM_VERIFY.value, parents=[common, grid], help="functional simulation vs oracle")
    verify.add_argument("--trials", type=int)
    verify.add_argument("--noise", action="store_true", default=None, help="add receiver noise at the first platform and rate")
    simulate = sub.add_parser(Command.SIMULATE.value, parents=[common, grid], help="system FPS and FPS/W")
    simulate.add_argument("--models", help="bundled names or model file paths")
    simulate.add_argument("--baseline", help="normalization cell model/arch/rate")
    calibrate = sub.add_parser(Command.CALIBRATE.value, parents=[common], help="fit the ring pitch")
    calibrate.add_argument("--targets", help="CSV of platform, bits, dr_sps, expected_n")
    sub.add_parser(Command.REPRODUCE_PAPER.value, parents=[common], help="regenerate every published dataset")
    return parser


def _read_run_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ArtifactIOError(f"Run config not found: {path}", path=path)
    except tomllib.TOMLDecodeError as e:
        raise InvalidParameterError(f"Malformed run config {path}: {e}", path=path)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: Dict[str, Any] = _read_run_file(args.config) if args.config else {}
    values["command"] = args.command

    flags = {
        "output_dir": args.output_dir,
        "workers": args.workers,
        "seed": args.seed,
        "overrides": args.overrides,
        "verbose": args.verbose,
        "platforms": parse_list(args.platforms) if getattr(args, "platforms", None) else None,
        "bits": parse_bits(args.bits) if getattr(args, "bits", None) else None,
        "rates": parse_rates(args.rates) if getattr(args, "rates", None) else None,
        "models": parse_list(args.models) if getattr(args, "models", None) else None,
        "trials": getattr(args, "trials", None),
        "noise": getattr(args, "noise", None),
        "baseline": getattr(args, "baseline", None),
        "targets": getattr(args, "targets", None),
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    values.setdefault("output_dir", settings.output_dir)
    values.setdefault("workers", settings.workers)
    values.setdefault("seed", settings.seed)

    try:
        return RunConfig(**values)
    except ValidationError as e:
        problems = [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()]
        raise InvalidParameterError("Invalid run configuration: " + "; ".join(problems), problems=problems)


def setup_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(bool(args.verbose))
    try:
        return run(config_from_args(args))
    except PhotonicGemmError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        print(json.dumps(e.to_report(), sort_keys=True, default=str), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        report = {"error": "internal", "type": type(e).__name__, "message": str(e), "exit_code": 1}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 1
