import math

import numpy as np
import pytest
from pydantic import ValidationError

from dsp.channel import (
    AwgnSpec,
    ImpulseNoiseSpec,
    apply_awgn,
    apply_impulse_noise,
    error_signal,
    impulse_positions,
)
from dsp.chrestenson import Signal
from dsp.errors import DimensionMismatch, ZeroSignalEnergy


def test_impulse_positions_follow_the_burst_grid():
    spec = ImpulseNoiseSpec(period=10, burst_len=2)
    np.testing.assert_array_equal(impulse_positions(25, spec), [0, 1, 10, 11, 20, 21])
    assert impulse_positions(25, ImpulseNoiseSpec(period=10, burst_len=0)).size == 0


def test_impulses_are_seeded_and_scaled_to_the_signal_peak():
    s = Signal(2.0 * np.ones(100))
    spec = ImpulseNoiseSpec(period=10, amp_min=0.1, amp_max=1.0, seed=11)
    first, record = apply_impulse_noise(s, spec)
    second, _ = apply_impulse_noise(s, spec)
    np.testing.assert_array_equal(first.samples, second.samples)

    assert len(record) == 10
    magnitudes = np.abs(record.noise_values)
    assert np.all(magnitudes >= 0.2 - 1e-12)
    assert np.all(magnitudes <= 2.0 + 1e-12)
    untouched = np.setdiff1d(np.arange(100), record.positions)
    np.testing.assert_array_equal(first.samples[untouched], s.samples[untouched])


def test_real_only_impulses_stay_on_the_real_axis():
    _, record = apply_impulse_noise(Signal(np.ones(50)), ImpulseNoiseSpec(seed=1, real_only=True))
    np.testing.assert_array_equal(record.noise_values.imag, 0)


def test_different_seeds_differ():
    s = Signal(np.ones(50))
    a, _ = apply_impulse_noise(s, ImpulseNoiseSpec(seed=1))
    b, _ = apply_impulse_noise(s, ImpulseNoiseSpec(seed=2))
    assert not np.array_equal(a.samples, b.samples)


def test_impulse_spec_validation():
    with pytest.raises(ValidationError):
        ImpulseNoiseSpec(amp_min=0.9, amp_max=0.1)
    with pytest.raises(ValidationError):
        ImpulseNoiseSpec(period=4, burst_len=5)
    with pytest.raises(ValidationError):
        ImpulseNoiseSpec(period=0)


@pytest.mark.parametrize("snr_db", [0.0, 10.0, 30.0])
def test_awgn_hits_the_target_power_exactly(snr_db):
    s = Signal(np.ones(1000))
    noisy = apply_awgn(s, AwgnSpec(snr_db=snr_db, seed=5))
    noise_power = np.mean(np.abs(noisy.samples - s.samples) ** 2)
    assert noise_power == pytest.approx(10 ** (-snr_db / 10), rel=1e-9)


def test_awgn_edge_cases():
    s = Signal([1.0, -1.0])
    assert apply_awgn(s, AwgnSpec(snr_db=math.inf)) is s
    with pytest.raises(ZeroSignalEnergy):
        apply_awgn(Signal(np.zeros(4)), AwgnSpec())
    with pytest.raises(ValidationError):
        AwgnSpec(snr_db=math.nan)
    with pytest.raises(ValidationError):
        AwgnSpec(snr_db=-math.inf)


def test_error_signal_and_nmse():
    error, nmse = error_signal(Signal([1.0, 1.0]), Signal([1.0, 0.0]))
    np.testing.assert_array_equal(error.samples, [0, 1])
    assert nmse == 1.0
    assert error_signal(Signal([3j]), Signal([3j]))[1] == 0.0
    with pytest.raises(ZeroSignalEnergy):
        error_signal(Signal([1.0]), Signal([0.0]))
    with pytest.raises(DimensionMismatch):
        error_signal(Signal([1.0]), Signal([1.0, 2.0]))


@pytest.mark.parametrize("scale", [-2.5, 1e-3, 3j, 1e6])
def test_nmse_does_not_depend_on_the_signal_scale(scale):
    rng = np.random.default_rng(12)
    original = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    recovered = original + 0.1 * rng.standard_normal(64)
    _, nmse = error_signal(Signal(recovered), Signal(original))
    _, scaled = error_signal(Signal(scale * recovered), Signal(scale * original))
    assert scaled == pytest.approx(nmse, rel=1e-12)


def test_nmse_of_a_single_perturbed_sample():
    original = Signal([1.0, 2.0, 2.0])
    _, nmse = error_signal(Signal([1.0, 2.0, 2.0 + 0.3j]), original)
    assert nmse == pytest.approx(0.09 / 9)
    assert error_signal(Signal([2.0, 4.0, 4.0]), original)[1] == pytest.approx(1.0)


@pytest.mark.parametrize("length,period,burst_len", [(100, 10, 1), (101, 10, 3), (7, 3, 2), (5, 8, 4), (64, 1, 1)])
def test_impulses_change_at_most_one_burst_per_period(length, period, burst_len):
    s = Signal(np.arange(1, length + 1, dtype=float))
    spec = ImpulseNoiseSpec(period=period, burst_len=burst_len, seed=length)
    noisy, record = apply_impulse_noise(s, spec)
    changed = np.flatnonzero(noisy.samples != s.samples)
    assert changed.size <= burst_len * math.ceil(length / period)
    assert set(changed.tolist()) <= set(record.positions.tolist())
    assert np.all(np.diff(record.positions) > 0)
    assert record.positions.max() < length


def test_zero_amplitude_impulses_leave_the_signal_alone():
    s = Signal(np.ones(30))
    noisy, record = apply_impulse_noise(s, ImpulseNoiseSpec(amp_min=0.0, amp_max=0.0))
    np.testing.assert_array_equal(noisy.samples, s.samples)
    np.testing.assert_array_equal(record.positions, [0, 10, 20])
