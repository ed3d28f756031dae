import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ctqw import (
    LatticeSpec,
    WalkerState,
    build_hamiltonian,
    evolve_static,
    inverse_participation_ratio,
    localized_state,
    oracle_evolve,
    probability_distribution,
    relative_quadratic_deviation,
    shannon_entropy,
    standard_deviation,
)
from ctqw.observables import ObservableRecord, ObservableSeries, loglog_slope

from conftest import bessel_amplitudes, state_on

SPEC = LatticeSpec(101)


def uniform(n):
    return WalkerState(np.full(n, 1 / math.sqrt(n), dtype=complex))


def two_peaks():
    return state_on(SPEC, {-1: 1 / math.sqrt(2), 1: 1 / math.sqrt(2)})


def from_distribution(p):
    return WalkerState(np.sqrt(p) * np.exp(1j * np.arange(p.size)))


class TestDistribution:
    def test_localized(self):
        p = probability_distribution(localized_state(SPEC))
        assert p[SPEC.index(0)] == 1 and p.sum() == 1

    def test_uniform(self):
        np.testing.assert_allclose(probability_distribution(uniform(100)), 0.01, rtol=1e-14)

    def test_bessel(self):
        spec = LatticeSpec(201)
        state = evolve_static(localized_state(spec), build_hamiltonian(spec), 10.0)
        exact = np.abs(bessel_amplitudes(spec.sites, 10.0)) ** 2
        assert np.abs(probability_distribution(state) - exact).max() < 1e-8
        assert abs(probability_distribution(state).sum() - 1) < 1e-9


class TestSigma:
    def test_localized(self):
        assert standard_deviation(localized_state(SPEC)) == 0

    def test_two_point(self):
        assert standard_deviation(two_peaks()) == pytest.approx(1, abs=1e-15)

    def test_ballistic_value(self):
        spec = LatticeSpec(501)
        H = build_hamiltonian(spec)
        state = evolve_static(localized_state(spec), H, 100.0)
        assert standard_deviation(state) == pytest.approx(math.sqrt(2) * 100, rel=1e-3)

    def test_dense_cross_check_n511(self):
        spec = LatticeSpec(511)
        H = build_hamiltonian(spec)
        oracle = oracle_evolve(localized_state(spec), H, 100.0)
        assert standard_deviation(oracle) == pytest.approx(math.sqrt(2) * 100, rel=1e-3)

    def test_translation_invariant(self):
        a = state_on(SPEC, {10: 0.6, 13: 0.8})
        b = state_on(SPEC, {-30: 0.6, -27: 0.8})
        assert standard_deviation(a) == pytest.approx(standard_deviation(b), abs=1e-12)


class TestEntropyAndIPR:
    def test_localized(self):
        assert shannon_entropy(localized_state(SPEC)) == 0
        assert inverse_participation_ratio(localized_state(SPEC)) == 1

    def test_uniform(self):
        assert shannon_entropy(uniform(100)) == pytest.approx(math.log(100), rel=1e-13)
        assert inverse_participation_ratio(uniform(100)) == pytest.approx(100, rel=1e-13)

    def test_two_peaks(self):
        assert shannon_entropy(two_peaks()) == pytest.approx(math.log(2), rel=1e-14)
        assert inverse_participation_ratio(two_peaks()) == pytest.approx(2, rel=1e-14)

    def test_tiny_probabilities_skipped(self):
        amps = np.zeros(5, complex)
        amps[2] = 1
        amps[0] = 1e-170  # probability 1e-340 underflows to 0
        assert math.isfinite(shannon_entropy(WalkerState(amps)))


class TestRQD:
    def test_localized(self):
        assert not relative_quadratic_deviation(localized_state(SPEC)).any()

    def test_two_point(self):
        rqd = relative_quadratic_deviation(two_peaks())
        assert rqd[SPEC.index(-1)] == pytest.approx(0.5)
        assert rqd[SPEC.index(1)] == pytest.approx(0.5)
        assert np.count_nonzero(rqd) == 2


probabilities = arrays(np.float64, st.integers(5, 60), elements=st.floats(0, 1)).filter(
    lambda a: a.sum() > 1e-3
)


@settings(max_examples=200, deadline=None)
@given(probabilities)
def test_distribution_invariants(weights):
    p = weights / weights.sum()
    state = from_distribution(p)
    n = p.size
    s = shannon_entropy(state)
    ipr = inverse_participation_ratio(state)
    sigma = standard_deviation(state)
    assert -1e-12 <= s <= math.log(n) + 1e-12
    assert 1 - 1e-12 <= ipr <= n * (1 + 1e-12)
    assert ipr <= math.exp(s) * (1 + 1e-12)
    assert sigma >= 0
    assert relative_quadratic_deviation(state).sum() == pytest.approx(sigma**2, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(probabilities.filter(lambda a: a.size % 2 == 1))
def test_reflection_invariance(weights):
    p = weights / weights.sum()
    a, b = from_distribution(p), from_distribution(p[::-1].copy())
    assert standard_deviation(a) == pytest.approx(standard_deviation(b), abs=1e-9)
    assert shannon_entropy(a) == pytest.approx(shannon_entropy(b), abs=1e-12)
    assert inverse_participation_ratio(a) == pytest.approx(inverse_participation_ratio(b), rel=1e-12)


def test_defect_free_is_ballistic():
    spec = LatticeSpec(1001)
    H = build_hamiltonian(spec)
    state = localized_state(spec)
    times, sigmas = [], []
    for t in np.linspace(50, 200, 16):
        state = evolve_static(state, H, t - state.time)
        times.append(t)
        sigmas.append(standard_deviation(state))
    assert loglog_slope(times, sigmas) == pytest.approx(1.0, abs=0.01)


def test_record_and_series():
    rec = ObservableRecord.measure(two_peaks(), profiles=True)
    assert rec.sigma == pytest.approx(1) and rec.ipr == pytest.approx(2)
    assert rec.rqd.sum() == pytest.approx(1)
    series = ObservableSeries.from_records([rec, rec])
    assert len(series) == 2 and series.sigma_ratio is None
    ref = ObservableSeries(series.time, series.sigma * 2, series.shannon, series.ipr)
    np.testing.assert_allclose(series.with_reference(ref).sigma_ratio, 0.5)
    with pytest.raises(ValueError):
        series.with_reference(ObservableSeries.from_records([rec]))
