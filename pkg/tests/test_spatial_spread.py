import numpy as np
import pytest

from dsp.chrestenson import Signal
from dsp.errors import DimensionMismatch, RowOutOfRange, SizeLimitExceeded, ZeroSeed
from dsp.spatial_spread import (
    PRIMITIVE_TAPS,
    LfsrSpec,
    ch_code,
    correlation_table,
    cross_correlation,
    default_lfsr,
    demux_user,
    mux_users,
    pn_msequence,
    walsh_code,
)
from settings import settings


def users(rng, count, n):
    return [Signal(rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(count)]


def test_walsh_codes_are_real_and_orthogonal():
    codes = [walsh_code(2, row) for row in range(4)]
    for code in codes:
        assert code.chips.dtype == np.float64
        assert set(code.chips.tolist()) <= {1.0, -1.0}
    table = correlation_table(codes)
    for entry in table:
        expected = 1.0 if entry.first == entry.second else 0.0
        assert abs(entry.zero_lag - expected) < 1e-12


def test_four_walsh_users_separate_exactly():
    rng = np.random.default_rng(4)
    symbols = users(rng, 4, 32)
    codes = [walsh_code(2, row) for row in range(4)]
    composite = mux_users(symbols, codes)
    assert len(composite) == 128
    for symbol, code in zip(symbols, codes):
        recovered = demux_user(composite, code, 32)
        nmse = np.sum(np.abs(recovered.samples - symbol.samples) ** 2) / symbol.energy
        assert nmse < 1e-12


def test_three_ch_users_separate_exactly():
    rng = np.random.default_rng(3)
    symbols = users(rng, 3, 20)
    codes = [ch_code(3, 1, row) for row in range(3)]
    for code in codes:
        np.testing.assert_allclose(np.abs(code.chips), 1.0, atol=1e-15)
    composite = mux_users(symbols, codes)
    for symbol, code in zip(symbols, codes):
        recovered = demux_user(composite, code, 20)
        nmse = np.sum(np.abs(recovered.samples - symbol.samples) ** 2) / symbol.energy
        assert nmse < 1e-12


def test_code_rows_must_exist():
    with pytest.raises(RowOutOfRange):
        walsh_code(2, 4)
    with pytest.raises(RowOutOfRange):
        ch_code(3, 1, -1)


def test_degree_two_register_by_hand():
    code = pn_msequence(default_lfsr(2))
    np.testing.assert_array_equal(code.chips, [1, -1, -1])
    assert code.family == "pn_msequence"


@pytest.mark.parametrize("degree", [2, 3, 4, 5, 6])
def test_msequence_balance_and_two_valued_autocorrelation(degree):
    code = pn_msequence(default_lfsr(degree))
    period = 2 ** degree - 1
    assert len(code) == period
    assert np.sum(code.chips == -1) == 2 ** (degree - 1)
    for lag in range(1, period):
        assert cross_correlation(code, code, lag) == pytest.approx(-1 / period, abs=1e-12)
    assert cross_correlation(code, code, 0) == pytest.approx(1.0)


def test_tabulated_taps_all_give_full_period():
    for degree in PRIMITIVE_TAPS:
        chips = pn_msequence(default_lfsr(degree)).chips
        period = 2 ** degree - 1
        # a maximal sequence is not periodic with any proper divisor of its length
        for divisor in range(1, period):
            if period % divisor == 0:
                assert not np.array_equal(chips, np.roll(chips, divisor))


def test_shifted_msequences_interfere():
    a = pn_msequence(LfsrSpec(degree=3, taps=(3, 2), seed=1))
    b = pn_msequence(LfsrSpec(degree=3, taps=(3, 2), seed=2))
    entry = correlation_table([a, b])[1]
    assert (entry.first, entry.second) == (0, 1)
    assert entry.zero_lag == pytest.approx(-1 / 7)
    assert entry.max_nonzero_lag == pytest.approx(1.0)


def test_lfsr_validation():
    with pytest.raises(ZeroSeed):
        pn_msequence(LfsrSpec(degree=3, taps=(3, 2), seed=0))
    with pytest.raises(ValueError):
        LfsrSpec(degree=3, taps=(2, 1), seed=1)
    with pytest.raises(ValueError):
        LfsrSpec(degree=3, taps=(3, 2), seed=8)
    with pytest.raises(ValueError):
        default_lfsr(40)


def test_mux_dimension_checks():
    codes = [walsh_code(1, 0), walsh_code(1, 1)]
    with pytest.raises(DimensionMismatch):
        mux_users([Signal([1.0])], codes)
    with pytest.raises(DimensionMismatch):
        mux_users([Signal([1.0]), Signal([1.0, 2.0])], codes)
    with pytest.raises(DimensionMismatch):
        mux_users([Signal([1.0]), Signal([1.0])], [walsh_code(1, 0), walsh_code(2, 1)])
    with pytest.raises(DimensionMismatch):
        demux_user(Signal(np.ones(5)), codes[0], 2)


@pytest.mark.parametrize("p,m", [(2, 2), (2, 3), (3, 1), (3, 2)])
def test_full_code_families_separate_exactly(p, m):
    size = p ** m
    rng = np.random.default_rng(size)
    symbols = users(rng, size, 12)
    codes = [walsh_code(m, row) if p == 2 else ch_code(p, m, row) for row in range(size)]
    composite = mux_users(symbols, codes)
    for symbol, code in zip(symbols, codes):
        recovered = demux_user(composite, code, 12)
        assert np.max(np.abs(recovered.samples - symbol.samples)) < 1e-12


def test_mux_is_linear():
    rng = np.random.default_rng(9)
    codes = [ch_code(3, 2, row) for row in (1, 4, 8)]
    s = users(rng, 3, 10)
    t = users(rng, 3, 10)
    summed = [Signal(a.samples + b.samples) for a, b in zip(s, t)]
    expected = mux_users(s, codes).samples + mux_users(t, codes).samples
    np.testing.assert_allclose(mux_users(summed, codes).samples, expected, atol=1e-12)


def test_mux_by_hand():
    codes = [walsh_code(1, 0), walsh_code(1, 1)]
    np.testing.assert_array_equal(mux_users([Signal([2.0]), Signal([3.0])], codes).samples, [5, -1])
    composite = Signal([5.0, -1.0])
    assert demux_user(composite, codes[0], 1).samples[0] == 2
    assert demux_user(composite, codes[1], 1).samples[0] == 3


def test_degree_three_register_by_hand():
    # o[i + 3] = o[i] ^ o[i + 1] from 001: 0010111
    code = pn_msequence(LfsrSpec(degree=3, taps=(3, 2), seed=1))
    np.testing.assert_array_equal(code.chips, [1, 1, -1, 1, -1, -1, -1])
    assert code.id == "pn(r=3,taps=3,2,seed=0b1)"
    assert not code.chips.flags.writeable


def test_msequence_length_is_capped(monkeypatch):
    monkeypatch.setattr(settings, "matrix_size_limit", 1000)
    assert len(pn_msequence(default_lfsr(9))) == 511
    with pytest.raises(SizeLimitExceeded):
        pn_msequence(default_lfsr(10))


@pytest.mark.parametrize("taps", [(3,), (3, 2, 2)])
def test_lfsr_taps_must_be_distinct_and_feed_back(taps):
    with pytest.raises(ValueError):
        LfsrSpec(degree=3, taps=taps, seed=1)
