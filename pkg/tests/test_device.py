import numpy as np
import pytest
from pydantic import ValidationError

from photonic_gemm.exceptions import DeviceCapabilityError, OutOfRangeError
from photonic_gemm.models.device import ITO_STATE_TABLE, MrmModel
from photonic_gemm.services.device import (
    cascade_transmission,
    ito_state_table,
    resonance_shift_at,
    shift_curve_check,
    shift_for_transmission,
    spectra_frame,
    through_transmission,
    voltage_for_shift,
    weight_levels,
)

TABLE_PAIRS = [(0.0, 0.0), (1.8, 830.0), (3.7, 1580.0), (5.5, 2470.0), (7.3, 3210.0), (9.2, 4000.0)]


@pytest.mark.parametrize("voltage,shift", TABLE_PAIRS)
def test_shift_curve_reproduces_table(mrm, voltage, shift):
    assert resonance_shift_at(mrm, voltage) == shift
    assert voltage_for_shift(mrm, shift) == voltage


def test_shift_curve_is_monotone(mrm):
    shifts = [resonance_shift_at(mrm, v) for v in np.linspace(0.0, 9.2, 500)]
    assert np.all(np.diff(shifts) >= 0)


@pytest.mark.parametrize("voltage", [-0.1, 9.3, float("nan")])
def test_voltage_outside_curve(mrm, voltage):
    with pytest.raises(OutOfRangeError):
        resonance_shift_at(mrm, voltage)


def test_ito_index_falls_with_carrier_concentration():
    table = ito_state_table()
    assert len(table) == 6
    assert table["carrier_conc_cm3"].is_monotonic_increasing
    assert table["re_n_ito"].is_monotonic_decreasing


def test_inconsistent_tuning_efficiency_is_rejected():
    with pytest.raises(ValidationError):
        MrmModel(tuning_pm_per_v=300.0)


def test_non_monotone_curve_is_rejected():
    curve = list(ITO_STATE_TABLE)
    curve[2], curve[3] = curve[3], curve[2]
    with pytest.raises(ValidationError):
        MrmModel(shift_curve=curve)


def test_notch_depth_and_shape(mrm):
    assert through_transmission(mrm, mrm.resonance_nm, 0.0) == pytest.approx(mrm.t_min)
    # one half-width away the notch depth halves
    half = through_transmission(mrm, mrm.resonance_nm + mrm.hwhm_nm, 0.0)
    assert half == pytest.approx(1.0 - (1.0 - mrm.t_min) / 2)
    # a blue shift moves the dip away from the carrier
    assert through_transmission(mrm, mrm.resonance_nm, 1000.0) > mrm.t_min


def test_wavelength_outside_fsr(mrm):
    with pytest.raises(OutOfRangeError):
        through_transmission(mrm, mrm.resonance_nm + mrm.fsr_nm + 0.1, 0.0)


def test_shift_for_transmission_inverts_notch(mrm):
    for target in (0.2, 0.5, 0.9):
        shift = shift_for_transmission(mrm, target)
        assert through_transmission(mrm, mrm.resonance_nm, shift) == pytest.approx(target)
    with pytest.raises(OutOfRangeError):
        shift_for_transmission(mrm, 1.0)


def test_cascade_transmission():
    assert cascade_transmission(0.5, 0.5, 0.8) == pytest.approx(0.2)
    assert cascade_transmission() == 1.0


def test_weight_levels_are_uniform_in_power(mrm):
    levels = weight_levels(mrm, 4)
    assert len(levels) == 16
    transmissions = np.array([lvl.transmission for lvl in levels])
    assert np.allclose(np.diff(transmissions), np.diff(transmissions)[0])
    assert levels[0].shift_pm == pytest.approx(0.0)
    assert levels[0].voltage_v == pytest.approx(0.0)
    assert levels[-1].shift_pm <= mrm.max_shift_pm
    assert all(b.shift_pm > a.shift_pm for a, b in zip(levels, levels[1:]))
    for lvl in levels:
        assert through_transmission(mrm, mrm.resonance_nm, lvl.shift_pm) == pytest.approx(lvl.transmission, abs=1e-9)


def test_weight_levels_reports_best_feasible_precision():
    coarse = MrmModel(min_shift_step_pm=50.0)
    with pytest.raises(DeviceCapabilityError) as exc:
        weight_levels(coarse, 4)
    assert exc.value.max_feasible_bits == 3
    assert exc.value.exit_code == 3
    assert len(weight_levels(coarse, 3)) == 8


def test_weight_levels_unreachable_top_level(mrm):
    with pytest.raises(DeviceCapabilityError) as exc:
        weight_levels(mrm, 2, t_max=0.999)
    assert exc.value.max_feasible_bits >= 4

    coarse = MrmModel(min_shift_step_pm=50.0)
    with pytest.raises(DeviceCapabilityError) as exc:
        weight_levels(coarse, 2, t_max=0.999)
    assert exc.value.max_feasible_bits == 3


def test_weight_levels_bits_range(mrm):
    with pytest.raises(OutOfRangeError):
        weight_levels(mrm, 0)
    with pytest.raises(OutOfRangeError):
        weight_levels(mrm, 9)


def test_shift_curve_check(mrm):
    check = shift_curve_check(mrm)
    nodes = check[check["kind"] == "node"]
    assert len(nodes) == 6
    assert len(check) == 11
    assert (nodes["abs_error_pm"] == 0).all()


def test_spectra_frame(mrm):
    frame = spectra_frame(mrm, 2, points=101)
    assert list(frame.columns) == ["wavelength_nm", "level_0", "level_1", "level_2", "level_3"]
    assert len(frame) == 101
    assert frame["level_0"].min() == pytest.approx(mrm.t_min)
    assert ((frame.drop(columns="wavelength_nm") <= 1.0) & (frame.drop(columns="wavelength_nm") > 0)).all().all()
