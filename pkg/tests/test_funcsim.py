import math

import numpy as np
import pytest
from pydantic import ValidationError

from photonic_gemm.exceptions import AccumulatorSaturationError, InvalidParameterError, OutOfRangeError
from photonic_gemm.models.funcsim import AccumulatorState, Lane, OpticalSymbol, QuantizedVector
from photonic_gemm.services.funcsim import (
    NoiseModel,
    accumulate,
    adc_sample,
    bpd_superpose,
    dot_product,
    encode_symbol,
    multiply_symbol,
    normalized_levels,
    quantize,
    required_adc_bits,
    route_sign,
    trace_frame,
    verify_against_oracle,
)


def test_oracle_equivalence():
    frame = verify_against_oracle(trials=1000, bits=4, n_choices=(8, 47), max_len=256, seed=0)
    assert len(frame) == 1000
    assert frame["exact"].all()
    assert (frame["length"] <= 256).all()
    assert set(frame["n_per_cycle"]) <= {8, 47}


def test_levels_span_unit_interval(mrm):
    levels = normalized_levels(mrm, 4)
    assert len(levels) == 16
    assert levels[0] == 0.0
    assert levels[-1] == pytest.approx(1.0)
    assert encode_symbol(5, 4, mrm) == pytest.approx(5 / 15)
    with pytest.raises(OutOfRangeError):
        encode_symbol(16, 4, mrm)


def test_symbol_pipeline():
    assert multiply_symbol(0.5, 0.5) == pytest.approx(0.25)
    with pytest.raises(OutOfRangeError):
        multiply_symbol(1.5, 0.5)
    assert route_sign(0.25, -1).lane is Lane.NEGATIVE
    with pytest.raises(OutOfRangeError):
        route_sign(0.25, 0)

    symbols = [
        OpticalSymbol(power=0.5, lane=Lane.POSITIVE),
        OpticalSymbol(power=0.2, lane=Lane.NEGATIVE),
    ]
    assert bpd_superpose(symbols, responsivity=1.2) == pytest.approx(1.2 * 0.3)


def test_accumulator_saturation():
    state = accumulate(AccumulatorState(capacity=1.0), 0.6)
    assert state.cycles_elapsed == 1
    with pytest.raises(AccumulatorSaturationError) as exc:
        accumulate(state, 0.6)
    assert exc.value.cycle == 1
    assert exc.value.exit_code == 3


def test_required_adc_bits():
    # 2 * 1 * 225 = 450 levels -> 9 magnitude bits + sign
    assert required_adc_bits(1, 4) == 10
    assert required_adc_bits(256, 4) > required_adc_bits(8, 4)


def test_adc_sample_clips_and_rounds():
    assert adc_sample(0.26, 1.0, 3) == pytest.approx(1 / 3)
    assert adc_sample(5.0, 1.0, 3) == pytest.approx(1.0)
    assert adc_sample(-5.0, 1.0, 3) == pytest.approx(-1.0)


def test_dot_product_chunking_and_trace():
    a = QuantizedVector(values=[3, -2, 7, 15, -15, 0, 1, 9, -4, 2], bits=4)
    b = QuantizedVector(values=[1, 5, -7, 15, 15, 3, -1, 2, 8, -6], bits=4)
    result = dot_product(a, b, n_per_cycle=4, trace=True)
    assert result.expected == sum(x * w for x, w in zip(a.values, b.values))
    assert result.exact
    assert result.cycles == math.ceil(10 / 4)
    frame = trace_frame(result)
    assert list(frame["cycle"]) == [0, 1, 2]
    assert frame["charge"].iloc[-1] == pytest.approx(result.analog * 1.2)


def test_dot_product_errors():
    a = QuantizedVector(values=[1, 2, 3], bits=4)
    with pytest.raises(InvalidParameterError):
        dot_product(a, QuantizedVector(values=[1, 2], bits=4), 2)
    with pytest.raises(InvalidParameterError):
        dot_product(a, a, 0)
    with pytest.raises(AccumulatorSaturationError):
        dot_product(a, a, 1, capacity=1e-3)


def test_quantized_vector_range():
    with pytest.raises(ValidationError):
        QuantizedVector(values=[16], bits=4)
    with pytest.raises(ValidationError):
        QuantizedVector(values=[], bits=4)


def test_quantize():
    q = quantize([3.0, -1.5, 0.0], bits=2)
    assert q.values == [3, -2, 0]
    assert q.scale == pytest.approx(1.0)


def test_noise_statistics(sin_params):
    noise = NoiseModel(1e-4, 1e9, sin_params, np.random.default_rng(7))
    samples = np.array([noise.sample(0.6, 0.3) for _ in range(20000)])
    assert abs(samples.mean()) < 4 * noise.cycle_sigma(0.6, 0.3) / math.sqrt(len(samples))
    assert samples.std() == pytest.approx(noise.cycle_sigma(0.6, 0.3), rel=0.05)


def test_noise_model_validation(sin_params):
    with pytest.raises(InvalidParameterError):
        NoiseModel(0.0, 1e9, sin_params, np.random.default_rng(0))


def test_noisy_dot_product_stays_close(sin_params):
    rng = np.random.default_rng(3)
    a = QuantizedVector(values=rng.integers(-15, 16, 64).tolist(), bits=4)
    b = QuantizedVector(values=rng.integers(-15, 16, 64).tolist(), bits=4)
    noise = NoiseModel(1e-3, 1e9, sin_params, np.random.default_rng(11))
    result = dot_product(a, b, 8, noise=noise)
    assert abs(result.value - result.expected) <= 0.01 * 64 * 225


def _random_vector(rng, length, limit=15, bits=4):
    return QuantizedVector(values=rng.integers(-limit, limit + 1, length).tolist(), bits=bits)


def test_noisy_dot_product_error_matches_receiver_sigma(sin_params):
    a = QuantizedVector(values=[15, -9, 4, 12, -15, 7, -3, 10, 6, -11, 2, 14], bits=4)
    b = QuantizedVector(values=[8, 13, -15, 5, 9, -2, 11, -7, 15, 4, -10, 3], bits=4)
    clean = dot_product(a, b, 8, trace=True)

    noise = NoiseModel(1e-3, 1e9, sin_params, np.random.default_rng(2024))
    sigma = math.sqrt(sum(noise.cycle_sigma(r.positive_sum, r.negative_sum) ** 2 for r in clean.trace)) / 1.2
    errors = np.array([dot_product(a, b, 8, noise=noise).analog - clean.analog for _ in range(10_000)])

    assert math.sqrt(np.mean(errors ** 2)) == pytest.approx(sigma, rel=0.10)


@pytest.mark.parametrize("seed", range(5))
def test_dot_product_is_linear_in_the_input(seed):
    rng = np.random.default_rng(seed)
    a1 = _random_vector(rng, 40, limit=7)
    a2 = _random_vector(rng, 40, limit=7)
    b = _random_vector(rng, 40)
    total = QuantizedVector(values=[x + y for x, y in zip(a1.values, a2.values)], bits=4)

    combined = dot_product(total, b, 8)
    parts = [dot_product(a1, b, 8), dot_product(a2, b, 8)]
    assert combined.value == parts[0].value + parts[1].value
    assert combined.analog == pytest.approx(parts[0].analog + parts[1].analog, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_chunk_size_does_not_change_the_result(seed):
    rng = np.random.default_rng(seed)
    a = _random_vector(rng, 30)
    b = _random_vector(rng, 30)
    reference = dot_product(a, b, 30)
    for n in range(1, 31):
        result = dot_product(a, b, n)
        assert result.cycles == math.ceil(30 / n)
        assert result.value == reference.value == reference.expected
        assert result.analog == pytest.approx(reference.analog, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_negating_the_input_negates_the_result(seed):
    rng = np.random.default_rng(seed)
    a = _random_vector(rng, 50)
    b = _random_vector(rng, 50)
    negated = QuantizedVector(values=[-x for x in a.values], bits=4)

    forward = dot_product(a, b, 8)
    mirrored = dot_product(negated, b, 8)
    assert mirrored.value == -forward.value
    assert mirrored.analog == pytest.approx(-forward.analog, abs=1e-12)


def test_balanced_detector_ignores_arm_order():
    rng = np.random.default_rng(9)
    symbols = [
        OpticalSymbol(power=float(p), lane=Lane.POSITIVE if s else Lane.NEGATIVE)
        for p, s in zip(rng.uniform(0, 1, 47), rng.integers(0, 2, 47))
    ]
    reference = bpd_superpose(symbols)
    for _ in range(20):
        shuffled = [symbols[i] for i in rng.permutation(len(symbols))]
        assert bpd_superpose(shuffled) == reference


def test_element_order_within_a_cycle_is_irrelevant():
    rng = np.random.default_rng(4)
    a = _random_vector(rng, 24)
    b = _random_vector(rng, 24)
    reference = dot_product(a, b, 24)
    for _ in range(10):
        order = rng.permutation(24)
        pa = QuantizedVector(values=[a.values[i] for i in order], bits=4)
        pb = QuantizedVector(values=[b.values[i] for i in order], bits=4)
        result = dot_product(pa, pb, 24)
        assert result.analog == reference.analog
        assert result.value == reference.value


def test_explicit_adc_resolution_is_honored():
    a = QuantizedVector(values=[15, -15, 7, 3], bits=4)
    coarse = dot_product(a, a, 2, adc_bits=4)
    assert coarse.adc_bits == 4
    assert coarse.required_adc_bits > 4
    with pytest.raises(InvalidParameterError):
        dot_product(a, a, 2, adc_bits=0)


def test_noisy_oracle_frame_is_seeded(sin_params):
    first = verify_against_oracle(trials=30, max_len=64, seed=5, noise_params=sin_params)
    second = verify_against_oracle(trials=30, max_len=64, seed=5, noise_params=sin_params)
    assert first.equals(second)
    assert (first["error"] == first["value"] - first["expected"]).all()
