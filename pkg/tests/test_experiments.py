import numpy as np
import pytest

from ctqw import BoundaryContamination, ConfigError, DefectProtocol, LatticeSpec, required_sites
from ctqw.experiments import (
    PROTOCOL_NAMES,
    ParrondoCertificate,
    SweepSpec,
    compare_protocols,
    final_sigma,
    peak_ratios,
    refine_omega,
    run_series,
    sample_times,
    snapshot,
    sweep_beta,
    sweep_omega,
)

HORIZON = 50.0
LATTICE = LatticeSpec(required_sites(HORIZON))


def test_sample_times():
    np.testing.assert_allclose(sample_times(10, 2.5), [0, 2.5, 5, 7.5, 10])
    with pytest.raises(ConfigError, match="sample_every"):
        sample_times(10, 3)


@pytest.mark.parametrize("kwargs", [
    dict(kind="gamma", lo=0, hi=1, count=3, horizon=1),
    dict(kind="beta", lo=1, hi=1, count=3, horizon=1),
    dict(kind="beta", lo=0, hi=1, count=1, horizon=1),
    dict(kind="beta", lo=0, hi=1, count=3, horizon=0),
    dict(kind="omega", lo=0, hi=1, count=3, horizon=1),
    dict(kind="beta", lo=0, hi=1, count=3, horizon=1, sample_every=0.3),
])
def test_sweep_spec_invariants(kwargs):
    with pytest.raises(ConfigError):
        SweepSpec(**kwargs)


@pytest.fixture(scope="module")
def table():
    return sweep_beta(SweepSpec("beta", -2.5, 0.5, 13, HORIZON), LATTICE)


@pytest.fixture(scope="module")
def result():
    return compare_protocols(LATTICE, -2.5, -3.0, 2.71, HORIZON, sample_every=5.0, threads=2)


class TestSweepBeta:
    def ratio(self, table, beta):
        return table.sigma_ratio[np.argmin(np.abs(table.values - beta))]

    def test_reference_row(self, table):
        assert self.ratio(table, 0.0) == 1.0

    def test_cancellation(self, table):
        assert self.ratio(table, -1.0) < 1e-10

    def test_enhancement_at_half(self, table):
        assert self.ratio(table, -0.5) > 1

    @pytest.mark.parametrize("delta", [0.25, 0.5, 1.0, 1.5])
    def test_symmetric_about_minus_gamma(self, table, delta):
        assert self.ratio(table, -1 + delta) == pytest.approx(self.ratio(table, -1 - delta), abs=1e-8)

    def test_row_independence(self, table):
        # rows recomputed one by one in reverse order are bit-identical
        for beta, ratio in reversed(table.rows()):
            alone = final_sigma(LATTICE, DefectProtocol.static(beta), HORIZON) / table.sigma0
            assert alone == ratio

    def test_threads_do_not_change_rows(self, table):
        spec = SweepSpec("beta", -2.5, 0.5, 13, HORIZON)
        assert sweep_beta(spec, LATTICE, threads=3).rows() == table.rows()

    def test_errors_are_annotated(self):
        with pytest.raises(BoundaryContamination, match="beta=|enlarge"):
            sweep_beta(SweepSpec("beta", -1, 0, 2, 100.0), LatticeSpec(101))


class TestSweepOmega:
    def test_degenerate_alternation_is_flat(self):
        spec = SweepSpec("omega", 0.5, 5.0, 4, HORIZON, beta1=-3.0, beta2=-3.0)
        table = sweep_omega(spec, LATTICE)
        static = table.certificate.ratio_beta1
        assert static < 1
        np.testing.assert_allclose(table.sigma_ratio, static, atol=1e-9)
        assert not table.certificate.holds

    def test_reports_argmax_and_certificate(self):
        spec = SweepSpec("omega", 1.0, 4.0, 4, HORIZON)
        table = sweep_omega(spec, LATTICE)
        assert table.max_ratio == table.sigma_ratio.max()
        assert table.argmax in table.values
        cert = table.certificate
        assert cert.ratio_alternating == table.max_ratio
        assert cert.ratio_beta1 < 1 and cert.ratio_beta2 < 1


def test_refinement_resolves_narrow_peak():
    spec = SweepSpec("omega", 2.0, 3.4, 8, HORIZON)
    coarse = sweep_omega(spec, LATTICE)
    refined = refine_omega(spec, LATTICE, top=2, points=11)
    assert set(coarse.values) <= set(refined.values)
    assert np.all(np.diff(refined.values) > 0)
    assert refined.max_ratio >= coarse.max_ratio
    assert refined.values.size > 8
    assert refined.certificate.ratio_alternating == refined.max_ratio


def test_certificate_margin():
    assert ParrondoCertificate(0.9, 0.8, 1.02, 0.01).holds
    assert not ParrondoCertificate(0.995, 0.8, 1.02, 0.01).holds
    assert not ParrondoCertificate(0.9, 0.8, 1.005, 0.01).holds
    assert ParrondoCertificate(0.9, 0.8, 1.02).as_dict()["holds"] is True


class TestCompare:
    def test_shared_grid(self, result):
        assert list(result.series) == list(PROTOCOL_NAMES)
        for s in result.series.values():
            np.testing.assert_array_equal(s.time, np.arange(0, 55, 5.0))

    def test_reference_ratio_is_one(self, result):
        np.testing.assert_array_equal(result.series["defect_free"].sigma_ratio, 1.0)

    def test_static_runs_weaken_spreading(self, result):
        assert result.final("static_beta1").sigma_ratio < 1
        assert result.final("static_beta2").sigma_ratio < 1

    def test_matches_standalone_series(self, result):
        alone = run_series(LATTICE, DefectProtocol.alternating(-2.5, -3.0, omega=2.71), HORIZON, 5.0)
        np.testing.assert_array_equal(alone.sigma, result.series["alternating"].sigma)

    def test_phase_option_changes_alternating_only(self, result):
        shifted = compare_protocols(LATTICE, -2.5, -3.0, 2.71, HORIZON, sample_every=5.0, phase=0.5)
        np.testing.assert_array_equal(shifted.series["static_beta1"].sigma, result.series["static_beta1"].sigma)
        assert not np.array_equal(shifted.series["alternating"].sigma, result.series["alternating"].sigma)


class TestSnapshot:
    def test_frozen_walker(self):
        snap = snapshot(LatticeSpec(201), DefectProtocol.static(-1.0), 30.0)
        expected = np.zeros(201)
        expected[100] = 1
        np.testing.assert_allclose(snap.distribution, expected, atol=1e-12)
        assert np.abs(snap.rqd).max() < 1e-12
        assert snap.peaks["p_max_site"] == 0

    def test_defect_free_profile_is_bimodal(self):
        snap = snapshot(LATTICE, DefectProtocol.free(), HORIZON)
        peaks = snap.peaks
        assert 0.7 * 2 * HORIZON <= abs(peaks["p_max_site"]) <= 2 * HORIZON
        assert snap.rqd.sum() == pytest.approx(2 * HORIZON**2, rel=1e-3)
        assert snap.distribution[snap.sites == 0][0] < 0.1 * peaks["p_max"]

    def test_peak_ratios_of_self(self):
        snap = snapshot(LATTICE, DefectProtocol.free(), 10.0)
        assert peak_ratios(snap, snap) == (1.0, 1.0)
