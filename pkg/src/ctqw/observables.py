"""Measurement functionals of a walker state.

All moments are taken in centered site coordinates (site 0 is the middle
of the chain). Functions accept either a :class:`WalkerState` or a raw
amplitude vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ZERO_PROBABILITY = 1e-300


def _amplitudes(state) -> np.ndarray:
    return np.asarray(getattr(state, "amplitudes", state))


def centered_sites(n: int) -> np.ndarray:
    half = (n - 1) // 2
    return np.arange(-half, n - half, dtype=np.float64)


def probability_distribution(state) -> np.ndarray:
    amps = _amplitudes(state)
    return amps.real**2 + amps.imag**2


def _moments(p: np.ndarray):
    j = centered_sites(p.size)
    mean = float(np.dot(j, p))
    return j, mean


def _variance(p: np.ndarray) -> float:
    # two-pass form: equal to <j^2> - <j>^2 for normalized P, without the
    # cancellation that turns 1e-16 rounding into a 1e-8 spread
    j, mean = _moments(p)
    return max(float(np.dot((j - mean) ** 2, p)), 0.0)


def standard_deviation(state) -> float:
    """Spread ``sqrt(<j^2> - <j>^2)`` of the site distribution."""
    return float(np.sqrt(_variance(probability_distribution(state))))


def shannon_entropy(state) -> float:
    """``-sum P ln P`` in nats; vanishing probabilities contribute nothing."""
    p = probability_distribution(state)
    p = p[p >= _ZERO_PROBABILITY]
    return float(-np.dot(p, np.log(p))) + 0.0  # no negative zero


def inverse_participation_ratio(state) -> float:
    p = probability_distribution(state)
    return float(1.0 / np.dot(p, p))


def relative_quadratic_deviation(state) -> np.ndarray:
    """Per-site variance contributions ``(j - <j>)^2 P_j``."""
    p = probability_distribution(state)
    j, mean = _moments(p)
    return (j - mean) ** 2 * p


@dataclass
class ObservableRecord:
    time: float
    sigma: float
    shannon: float
    ipr: float
    sigma_ratio: float | None = None
    distribution: np.ndarray | None = None
    rqd: np.ndarray | None = None

    @classmethod
    def measure(cls, state, *, profiles: bool = False) -> ObservableRecord:
        p = probability_distribution(state)
        rec = cls(
            time=float(getattr(state, "time", 0.0)),
            sigma=float(np.sqrt(_variance(p))),
            shannon=shannon_entropy(state),
            ipr=float(1.0 / np.dot(p, p)),
        )
        if profiles:
            rec.distribution = p
            rec.rqd = relative_quadratic_deviation(state)
        return rec


@dataclass
class ObservableSeries:
    """Observables sampled on a time grid (one entry per sample)."""

    time: np.ndarray = field(default_factory=lambda: np.empty(0))
    sigma: np.ndarray = field(default_factory=lambda: np.empty(0))
    shannon: np.ndarray = field(default_factory=lambda: np.empty(0))
    ipr: np.ndarray = field(default_factory=lambda: np.empty(0))
    sigma_ratio: np.ndarray | None = None

    COLUMNS = ("time", "sigma", "sigma_ratio", "shannon", "ipr")

    @classmethod
    def from_records(cls, records) -> ObservableSeries:
        records = list(records)
        series = cls(
            time=np.array([r.time for r in records]),
            sigma=np.array([r.sigma for r in records]),
            shannon=np.array([r.shannon for r in records]),
            ipr=np.array([r.ipr for r in records]),
        )
        if records and all(r.sigma_ratio is not None for r in records):
            series.sigma_ratio = np.array([r.sigma_ratio for r in records])
        return series

    def __len__(self):
        return self.time.size

    def with_reference(self, reference: ObservableSeries) -> ObservableSeries:
        """Attach ``sigma / sigma_ref`` computed on the shared time grid.

        Where the reference spread is zero (the initial sample) the ratio is 1
        if both spreads vanish and NaN otherwise.
        """
        if not np.array_equal(self.time, reference.time):
            raise ValueError("series do not share a time grid")
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = self.sigma / reference.sigma
        both_zero = (reference.sigma == 0) & (self.sigma == 0)
        ratio[both_zero] = 1.0
        return ObservableSeries(self.time, self.sigma, self.shannon, self.ipr, ratio)

    def final(self) -> ObservableRecord:
        ratio = None if self.sigma_ratio is None else float(self.sigma_ratio[-1])
        return ObservableRecord(
            float(self.time[-1]), float(self.sigma[-1]), float(self.shannon[-1]),
            float(self.ipr[-1]), ratio,
        )


def loglog_slope(times, sigma) -> float:
    """Least-squares exponent of ``sigma ~ t**a``; 1 for ballistic spreading."""
    times = np.asarray(times, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    keep = (times > 0) & (sigma > 0)
    if keep.sum() < 2:
        raise ValueError("need at least two positive samples")
    slope, _ = np.polyfit(np.log(times[keep]), np.log(sigma[keep]), 1)
    return float(slope)
