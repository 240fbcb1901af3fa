from itertools import product

import numpy as np
import pytest

from photonic_gemm.exceptions import (
    ArtifactIOError,
    ConfigurationError,
    InfeasibleConfigurationError,
    InvalidParameterError,
    PrecisionUnreachableError,
)
from photonic_gemm.models.linkbudget import CalibrationTarget, PrecisionQuery
from photonic_gemm.models.params import PlatformId
from photonic_gemm.services.linkbudget import (
    bits_from_power,
    calibrate_d_mrr,
    calibration_frame,
    error_function,
    load_calibration_targets,
    n_opt_over_grid,
    optimal_n,
    p_output,
    path_loss_terms,
    pd_sensitivity,
    scalability_grid,
)
from photonic_gemm.services.params import load_platform

BITS = [1, 2, 3, 4]
RATES = [1e9, 5e9, 10e9]


@pytest.mark.parametrize("bits,dr", list(product(BITS, RATES)))
def test_sensitivity_round_trip(sin_params, bits, dr):
    p = pd_sensitivity(PrecisionQuery(bits=bits, dr_sps=dr), sin_params)
    assert bits_from_power(p, dr, sin_params) == pytest.approx(bits, abs=0.01)


def test_sensitivity_values(sin_params):
    assert pd_sensitivity(PrecisionQuery(bits=4, dr_sps=1e9), sin_params) == pytest.approx(-17.98, abs=0.05)
    assert pd_sensitivity(PrecisionQuery(bits=3, dr_sps=1e9), sin_params) == pytest.approx(-21.01, abs=0.05)


def test_sensitivity_rises_with_bits_and_rate(soi_params):
    grid = np.array([
        [pd_sensitivity(PrecisionQuery(bits=b, dr_sps=dr), soi_params) for dr in RATES]
        for b in BITS
    ])
    assert np.all(np.diff(grid, axis=0) > 0)
    assert np.all(np.diff(grid, axis=1) > 0)


def test_precision_unreachable(sin_params):
    with pytest.raises(PrecisionUnreachableError) as exc:
        pd_sensitivity(PrecisionQuery(bits=8, dr_sps=10e9), sin_params)
    assert exc.value.exit_code == 3


def test_path_loss_terms(sin_params):
    fixed, per_cm = path_loss_terms(1, sin_params)
    assert fixed == pytest.approx(10.0 - 1.6 - 0.235 - 0.01 - 1.8)
    assert per_cm == pytest.approx(0.5)
    assert path_loss_terms(20, sin_params)[1] == pytest.approx(10.0)
    # nonlinear surcharge only above 20 wavelengths
    assert path_loss_terms(21, sin_params)[1] == pytest.approx(10.5 + 0.01)


def test_p_output_falls_with_size(soi_params):
    outputs = [p_output(n, soi_params) for n in range(1, 64)]
    assert np.all(np.diff(outputs) < 0)


@pytest.mark.parametrize("platform,bits,dr,expected", [
    (PlatformId.SIN, 4, 1e9, 46),
    (PlatformId.SIN, 4, 5e9, 39),
    (PlatformId.SIN, 4, 10e9, 36),
    (PlatformId.SIN, 3, 1e9, 52),
    (PlatformId.SOI, 4, 1e9, 22),
    (PlatformId.SOI, 4, 5e9, 18),
    (PlatformId.SOI, 4, 10e9, 16),
    (PlatformId.SOI, 3, 1e9, 25),
])
def test_optimal_n_with_frozen_pitch(request, platform, bits, dr, expected):
    params = request.getfixturevalue(f"{platform.value}_params")
    result = optimal_n(PrecisionQuery(bits=bits, dr_sps=dr), params)
    assert result.n_opt == expected
    assert result.ef_db >= 0
    assert error_function(result.n_opt + 1, result.query, params) < 0


def _search(query, params, method):
    try:
        return optimal_n(query, params, n_max=256, method=method).n_opt
    except (InfeasibleConfigurationError, PrecisionUnreachableError) as e:
        return type(e).__name__


def test_scan_and_bisect_agree():
    rng = np.random.default_rng(17)
    for _ in range(200):
        platform = str(rng.choice(["soi", "sin"]))
        overrides = {
            "p_laser_dbm": float(rng.uniform(4.0, 16.0)),
            "d_mrr_cm": float(10 ** rng.uniform(-3.3, 0.3)),
        }
        params = load_platform(platform, overrides)
        query = PrecisionQuery(bits=int(rng.integers(1, 7)), dr_sps=float(rng.uniform(0.5e9, 20e9)))
        assert _search(query, params, "scan") == _search(query, params, "bisect"), (platform, overrides, query)


def test_precision_equation_term_by_term(sin_params):
    q, k_b = 1.602176634e-19, 1.380649e-23
    current = 1.2 * 1e-5  # -20 dBm at the photodiode
    thermal = 4 * k_b * 300.0 / 50.0
    psd_signal = 2 * q * (current + 35e-9) + thermal + current ** 2 * 1e-14
    psd_dark = 2 * q * 35e-9 + thermal
    noise = (np.sqrt(psd_signal) + np.sqrt(psd_dark)) * np.sqrt(1e9 / np.sqrt(2.0))
    by_hand = (20 * np.log10(current / noise) - 1.76) / 6.02

    assert by_hand == pytest.approx(3.333995618552789, abs=1e-6)
    assert bits_from_power(-20.0, 1e9, sin_params) == pytest.approx(3.333995618552789, abs=1e-6)


def test_p_output_single_multiplier_at_twenty_micron_pitch():
    params = load_platform("sin", {"d_mrr_cm": 2e-3})
    # 10 - 1.6 coupling - 0.235 MRM - 0.01 MRR - 1.8 penalty - 0.5 dB/cm x 20 um
    assert p_output(1, params) == pytest.approx(6.354, abs=1e-9)


def test_unknown_search_method(soi_params):
    with pytest.raises(ConfigurationError):
        optimal_n(PrecisionQuery(bits=4, dr_sps=1e9), soi_params, method="golden")


def test_single_multiplier_infeasible(soi_params):
    weak = soi_params.model_copy(update={"p_laser_dbm": -20.0})
    with pytest.raises(InfeasibleConfigurationError):
        optimal_n(PrecisionQuery(bits=4, dr_sps=1e9), weak)


def test_search_bound_is_flagged(sin_params):
    result = optimal_n(PrecisionQuery(bits=1, dr_sps=1e9), sin_params, n_max=10)
    assert result.n_opt == 10
    assert result.capped


def test_scalability_grid_ordering():
    grid = scalability_grid(["soi", "sin"], BITS, RATES)
    assert len(grid) == 24
    table = grid.pivot_table(index=["bits", "dr_sps"], columns="platform", values="n_opt")
    assert (table["sin"] >= table["soi"]).all()
    for platform in ("soi", "sin"):
        cells = grid[grid["platform"] == platform].set_index(["bits", "dr_sps"])["n_opt"]
        for b, dr in product(BITS, RATES):
            if b < 4:
                assert cells[(b + 1, dr)] <= cells[(b, dr)]
            if dr < RATES[-1]:
                assert cells[(b, RATES[RATES.index(dr) + 1])] <= cells[(b, dr)]


def test_grid_search_matches_scalar_search(soi_params):
    query = PrecisionQuery(bits=4, dr_sps=5e9)
    pitches = np.array([2e-3, 0.1, 0.5906, 1.5])
    vectorized = n_opt_over_grid(query, soi_params, pitches, n_max=512)
    for d, n in zip(pitches, vectorized):
        scalar = optimal_n(query, soi_params.model_copy(update={"d_mrr_cm": float(d)})).n_opt
        assert n == scalar


def test_calibration_reproduces_frozen_pitch():
    results = calibrate_d_mrr(load_calibration_targets())
    sin, soi = results[PlatformId.SIN], results[PlatformId.SOI]
    assert sin.d_mrr_cm == pytest.approx(0.987)
    assert soi.d_mrr_cm == pytest.approx(0.5906)
    assert sin.d_mrr_cm == pytest.approx(load_platform("sin").d_mrr_cm)
    assert soi.d_mrr_cm == pytest.approx(load_platform("soi").d_mrr_cm)
    assert sin.total_residual == 26
    assert soi.total_residual == 16
    assert not sin.plausible and not soi.plausible
    assert sin.total_residual == sum(abs(r.residual) for r in sin.residuals)


def test_calibration_inside_plausible_window():
    targets = [CalibrationTarget(platform_id=PlatformId.SIN, bits=4, dr_sps=1e9, expected_n=47)]
    result = calibrate_d_mrr(targets, d_min_cm=5e-4, d_max_cm=5e-3, step_cm=1e-4)[PlatformId.SIN]
    assert result.plausible
    assert 5e-4 <= result.d_mrr_cm <= 5e-3
    frame = calibration_frame({PlatformId.SIN: result})
    assert list(frame["expected_n"]) == [47]


def test_calibration_needs_targets():
    with pytest.raises(ConfigurationError):
        calibrate_d_mrr([])


def test_calibration_rejects_bad_range():
    targets = [CalibrationTarget(platform_id=PlatformId.SOI, bits=4, dr_sps=1e9, expected_n=22)]
    with pytest.raises(InvalidParameterError):
        calibrate_d_mrr(targets, d_min_cm=0.1, d_max_cm=0.01)


def test_calibration_target_files(tmp_path):
    with pytest.raises(ArtifactIOError):
        load_calibration_targets(tmp_path / "missing.csv")

    bad = tmp_path / "targets.csv"
    bad.write_text("platform,bits,dr_sps\nsoi,4,1e9\n")
    with pytest.raises(InvalidParameterError):
        load_calibration_targets(bad)

    assert len(load_calibration_targets()) == 8
