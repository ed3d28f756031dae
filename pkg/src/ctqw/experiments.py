"""Numerical experiments: defect-strength and frequency sweeps, protocol
comparisons and fixed-time snapshots.

Every sweep point starts from a fresh walker, so points are independent and
may run concurrently; results are always assembled by grid index.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ctqw.errors import ConfigError, NumericalError
from ctqw.lattice import LatticeSpec
from ctqw.observables import (
    ObservableRecord,
    ObservableSeries,
    probability_distribution,
    relative_quadratic_deviation,
    standard_deviation,
)
from ctqw.propagator import (
    DefectProtocol,
    PropagatorConfig,
    evolve_protocol,
    localized_state,
)

log = logging.getLogger(__name__)

PROTOCOL_NAMES = ("defect_free", "static_beta1", "static_beta2", "alternating")


def sample_times(horizon: float, sample_every: float) -> np.ndarray:
    """Sampling grid ``0, dt, 2 dt, ..., horizon``; ``dt`` must divide ``horizon``."""
    if not (horizon > 0 and sample_every > 0):
        raise ConfigError("horizon and sample_every must be positive", "sample_every")
    count = round(horizon / sample_every)
    if count < 1 or abs(count * sample_every - horizon) > 1e-9 * horizon:
        raise ConfigError(
            f"sample_every={sample_every:g} does not divide horizon={horizon:g}", "sample_every"
        )
    times = np.arange(count + 1) * sample_every
    times[-1] = horizon
    return times


def _annotate(exc: NumericalError, label: str) -> NumericalError:
    return type(exc)(f"{label}: {exc}")


def run_series(
    lattice: LatticeSpec,
    protocol: DefectProtocol,
    horizon: float,
    sample_every: float,
    cfg: PropagatorConfig | None = None,
    initial_site: int = 0,
) -> ObservableSeries:
    """Evolve a localized walker and record observables on the sampling grid."""
    state = localized_state(lattice, initial_site)
    records = []
    for t in sample_times(horizon, sample_every):
        state = evolve_protocol(state, lattice, protocol, t - state.time, cfg)
        records.append(ObservableRecord.measure(state))
    return ObservableSeries.from_records(records)


def final_sigma(lattice, protocol, horizon, cfg=None, initial_site=0) -> float:
    state = evolve_protocol(localized_state(lattice, initial_site), lattice, protocol, horizon, cfg)
    return standard_deviation(state)


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    lo: float
    hi: float
    count: int
    horizon: float
    beta1: float = -2.5
    beta2: float = -3.0
    sample_every: float | None = None

    def __post_init__(self):
        if self.kind not in ("beta", "omega"):
            raise ConfigError(f"kind must be 'beta' or 'omega', got {self.kind!r}", "kind")
        if not self.lo < self.hi:
            raise ConfigError(f"lo < hi violated ({self.lo} >= {self.hi})", "lo")
        if isinstance(self.count, bool) or int(self.count) != self.count or self.count < 2:
            raise ConfigError(f"count >= 2 violated (count={self.count})", "count")
        if not self.horizon > 0:
            raise ConfigError(f"horizon > 0 violated (horizon={self.horizon})", "horizon")
        if self.kind == "omega" and self.lo <= 0:
            raise ConfigError("omega grid must be positive", "lo")
        if self.sample_every is not None:
            sample_times(self.horizon, self.sample_every)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.count))


@dataclass(frozen=True)
class ParrondoCertificate:
    """The three ratios behind a Parrondo claim, and whether it holds."""

    ratio_beta1: float
    ratio_beta2: float
    ratio_alternating: float
    margin: float = 0.0

    @property
    def holds(self) -> bool:
        m = self.margin
        return (
            self.ratio_beta1 < 1 - m
            and self.ratio_beta2 < 1 - m
            and self.ratio_alternating > 1 + m
        )

    def as_dict(self) -> dict:
        return {
            "ratio_beta1": self.ratio_beta1,
            "ratio_beta2": self.ratio_beta2,
            "ratio_alternating": self.ratio_alternating,
            "margin": self.margin,
            "holds": self.holds,
        }


@dataclass
class SweepTable:
    parameter: str
    values: np.ndarray
    sigma_ratio: np.ndarray
    sigma0: float
    horizon: float
    certificate: ParrondoCertificate | None = None

    @property
    def argmax(self) -> float:
        return float(self.values[int(np.argmax(self.sigma_ratio))])

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.sigma_ratio))

    def rows(self):
        return list(zip(self.values.tolist(), self.sigma_ratio.tolist()))


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sweep_beta(
    spec: SweepSpec,
    lattice: LatticeSpec,
    cfg: PropagatorConfig | None = None,
    initial_site: int = 0,
    threads: int = 1,
) -> SweepTable:
    """Final-time ``sigma / sigma0`` for each static defect strength on the grid."""
    if spec.kind != "beta":
        raise ConfigError("sweep_beta needs a beta sweep", "kind")
    sigma0 = final_sigma(lattice, DefectProtocol.free(), spec.horizon, cfg, initial_site)

    def row(beta):
        try:
            return final_sigma(lattice, DefectProtocol.static(beta), spec.horizon, cfg, initial_site)
        except NumericalError as exc:
            raise _annotate(exc, f"beta={beta:g}") from exc

    sigmas = np.array(_map(row, spec.grid, threads))
    return SweepTable("beta", spec.grid, sigmas / sigma0, sigma0, spec.horizon)


def sweep_omega(
    spec: SweepSpec,
    lattice: LatticeSpec,
    cfg: PropagatorConfig | None = None,
    initial_site: int = 0,
    threads: int = 1,
    phase: float = 0.0,
) -> SweepTable:
    """Final-time ``sigma / sigma0`` of the alternating protocol over a frequency grid.

    The returned table carries a :class:`ParrondoCertificate` built from the
    two static ratios and the best alternating ratio.
    """
    if spec.kind != "omega":
        raise ConfigError("sweep_omega needs an omega sweep", "kind")
    sigma0 = final_sigma(lattice, DefectProtocol.free(), spec.horizon, cfg, initial_site)
    statics = {}
    for beta in dict.fromkeys((spec.beta1, spec.beta2)):
        statics[beta] = (
            final_sigma(lattice, DefectProtocol.static(beta), spec.horizon, cfg, initial_site) / sigma0
        )

    def row(omega):
        period = 2.0 * math.pi / omega
        protocol = DefectProtocol.alternating(
            spec.beta1, spec.beta2, period=period, offset=phase * period
        )
        try:
            return final_sigma(lattice, protocol, spec.horizon, cfg, initial_site)
        except NumericalError as exc:
            raise _annotate(exc, f"omega={omega:g}") from exc

    sigmas = np.array(_map(row, spec.grid, threads))
    table = SweepTable("omega", spec.grid, sigmas / sigma0, sigma0, spec.horizon)
    table.certificate = ParrondoCertificate(
        statics[spec.beta1], statics[spec.beta2], table.max_ratio
    )
    log.info("omega sweep: best omega=%.6g ratio=%.6g", table.argmax, table.max_ratio)
    return table


def refine_omega(
    spec: SweepSpec,
    lattice: LatticeSpec,
    cfg: PropagatorConfig | None = None,
    initial_site: int = 0,
    threads: int = 1,
    phase: float = 0.0,
    top: int = 3,
    points: int = 41,
) -> SweepTable:
    """Frequency sweep followed by fine grids around the best coarse peaks.

    The enhancement is resonant, with a width that shrinks like 1/horizon,
    so a uniform grid easily steps over it. Each of the ``top`` coarse local
    maxima is re-sampled with ``points`` frequencies spanning one coarse step
    on either side. Returns the merged table, sorted by frequency.
    """
    coarse = sweep_omega(spec, lattice, cfg, initial_site, threads, phase)
    ratios = coarse.sigma_ratio
    padded = np.concatenate(([-np.inf], ratios, [-np.inf]))
    peaks = np.nonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))[0]
    peaks = peaks[np.argsort(ratios[peaks])[::-1][:top]]
    step = coarse.values[1] - coarse.values[0]
    values, sigma_ratio = [coarse.values], [ratios]
    for k in peaks:
        lo = max(coarse.values[k] - step, spec.lo)
        hi = min(coarse.values[k] + step, spec.hi)
        fine = sweep_omega(
            SweepSpec("omega", lo, hi, points, spec.horizon, spec.beta1, spec.beta2),
            lattice, cfg, initial_site, threads, phase,
        )
        values.append(fine.values)
        sigma_ratio.append(fine.sigma_ratio)
    values, sigma_ratio = np.concatenate(values), np.concatenate(sigma_ratio)
    values, first = np.unique(values, return_index=True)
    table = SweepTable("omega", values, sigma_ratio[first], coarse.sigma0, spec.horizon)
    c = coarse.certificate
    table.certificate = ParrondoCertificate(c.ratio_beta1, c.ratio_beta2, table.max_ratio)
    return table


@dataclass
class ComparisonResult:
    series: dict = field(default_factory=dict)
    beta1: float = 0.0
    beta2: float = 0.0
    omega: float = 0.0

    def final(self, name: str) -> ObservableRecord:
        return self.series[name].final()

    def certificate(self, margin: float = 0.0) -> ParrondoCertificate:
        return ParrondoCertificate(
            self.final("static_beta1").sigma_ratio,
            self.final("static_beta2").sigma_ratio,
            self.final("alternating").sigma_ratio,
            margin,
        )


def comparison_protocols(beta1, beta2, omega, phase=0.0) -> dict:
    period = 2.0 * math.pi / omega
    return {
        "defect_free": DefectProtocol.free(),
        "static_beta1": DefectProtocol.static(beta1),
        "static_beta2": DefectProtocol.static(beta2),
        "alternating": DefectProtocol.alternating(beta1, beta2, period=period, offset=phase * period),
    }


def compare_protocols(
    lattice: LatticeSpec,
    beta1: float,
    beta2: float,
    omega: float,
    horizon: float,
    cfg: PropagatorConfig | None = None,
    sample_every: float | None = None,
    initial_site: int = 0,
    threads: int = 1,
    phase: float = 0.0,
) -> ComparisonResult:
    """Run the defect-free, both static and the alternating walk on one time grid.

    ``phase`` shifts the alternation by that fraction of a period (0.5 starts
    with ``beta1``).
    """
    sample_every = horizon if sample_every is None else sample_every
    sample_times(horizon, sample_every)
    protocols = comparison_protocols(beta1, beta2, omega, phase)

    def run(name):
        try:
            return run_series(lattice, protocols[name], horizon, sample_every, cfg, initial_site)
        except NumericalError as exc:
            raise _annotate(exc, name) from exc

    runs = dict(zip(PROTOCOL_NAMES, _map(run, PROTOCOL_NAMES, threads)))
    reference = runs["defect_free"]
    series = {name: s.with_reference(reference) for name, s in runs.items()}
    return ComparisonResult(series, float(beta1), float(beta2), float(omega))


@dataclass
class Snapshot:
    time: float
    sites: np.ndarray
    distribution: np.ndarray
    rqd: np.ndarray

    @property
    def peaks(self) -> dict:
        """Maximum probability and RQD with their (leftmost) centered sites."""
        ip = int(np.argmax(self.distribution))
        ir = int(np.argmax(self.rqd))
        return {
            "p_max": float(self.distribution[ip]),
            "p_max_site": int(self.sites[ip]),
            "rqd_max": float(self.rqd[ir]),
            "rqd_max_site": int(self.sites[ir]),
        }


def snapshot(
    lattice: LatticeSpec,
    protocol: DefectProtocol,
    at_time: float,
    cfg: PropagatorConfig | None = None,
    initial_site: int = 0,
) -> Snapshot:
    """Full ``P_j`` and ``RQD(j)`` profiles at ``at_time``."""
    state = evolve_protocol(localized_state(lattice, initial_site), lattice, protocol, at_time, cfg)
    return Snapshot(
        state.time,
        lattice.sites,
        probability_distribution(state),
        relative_quadratic_deviation(state),
    )


def peak_ratios(candidate: Snapshot, reference: Snapshot) -> tuple[float, float]:
    """``(RQD_max ratio, P_max ratio)`` of ``candidate`` over ``reference``."""
    a, b = candidate.peaks, reference.peaks
    return a["rqd_max"] / b["rqd_max"], a["p_max"] / b["p_max"]
