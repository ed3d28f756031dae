"""Time evolution under static and piecewise-constant chain Hamiltonians.

The short-time propagator ``exp(-i H dt)`` is expanded in Chebyshev
polynomials of the rescaled operator, with Bessel-function coefficients.
Spectral bounds come from Gershgorin circles, so every expansion is
unitary up to the truncation tolerance. States are never renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numba
import numpy as np
from scipy.special import jv

from ctqw.errors import BoundaryContamination, ConfigError, ConvergenceFailure
from ctqw.lattice import HamiltonianOperator, LatticeSpec, build_hamiltonian

ORACLE_MAX_SITES = 512
_MAX_ORDER = 100_000
# longest evolution (units 1/gamma) over which cfg.tolerance caps the
# accumulated truncation error
TRUNCATION_HORIZON = 1e4


@dataclass(frozen=True)
class WalkerState:
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a vector")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "time", float(self.time))

    @property
    def size(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def localized_state(spec: LatticeSpec, site: int = 0, time: float = 0.0) -> WalkerState:
    """Walker sitting on centered site ``site``."""
    amps = np.zeros(spec.num_sites, dtype=np.complex128)
    amps[spec.index(site)] = 1.0
    return WalkerState(amps, time)


@dataclass(frozen=True)
class PropagatorConfig:
    substep: float = 0.05
    tolerance: float = 1e-12
    edge_guard: int = 10
    edge_threshold: float = 1e-8

    def __post_init__(self):
        if not (math.isfinite(self.substep) and self.substep > 0):
            raise ConfigError(f"substep > 0 violated (substep={self.substep})", "substep")
        if not 0 < self.tolerance <= 1e-6:
            raise ConfigError(
                f"tolerance in (0, 1e-6] violated (tolerance={self.tolerance})", "tolerance"
            )
        if isinstance(self.edge_guard, bool) or int(self.edge_guard) != self.edge_guard or self.edge_guard < 1:
            raise ConfigError(f"edge_guard >= 1 violated (edge_guard={self.edge_guard})", "edge_guard")
        if not 0 < self.edge_threshold <= 1e-4:
            raise ConfigError(
                f"edge_threshold in (0, 1e-4] violated (edge_threshold={self.edge_threshold})",
                "edge_threshold",
            )


MODES = ("none", "static", "alternating")


@dataclass(frozen=True)
class DefectProtocol:
    """Defect-strength schedule ``f(t)``.

    In alternating mode the strength is ``beta2`` on the first half of every
    period and ``beta1`` on the second. ``offset`` shifts the protocol clock,
    so ``offset = period / 2`` starts with ``beta1`` instead. Static mode
    uses ``beta1``.
    """

    mode: str = "none"
    beta1: float = 0.0
    beta2: float = 0.0
    period: float | None = None
    offset: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}", "mode")
        for key in ("beta1", "beta2", "offset"):
            if not math.isfinite(getattr(self, key)):
                raise ConfigError("must be finite", key)
        if self.mode == "alternating":
            if self.period is None or not math.isfinite(self.period) or self.period <= 0:
                raise ConfigError(f"period > 0 violated (period={self.period})", "period")

    @classmethod
    def free(cls) -> DefectProtocol:
        return cls("none")

    @classmethod
    def static(cls, beta: float) -> DefectProtocol:
        return cls("static", beta1=float(beta), beta2=float(beta))

    @classmethod
    def alternating(cls, beta1, beta2, *, omega=None, period=None, offset=0.0) -> DefectProtocol:
        if (omega is None) == (period is None):
            raise ConfigError("give exactly one of omega or period", "omega")
        if period is None:
            if not (math.isfinite(omega) and omega > 0):
                raise ConfigError(f"omega > 0 violated (omega={omega})", "omega")
            period = 2.0 * math.pi / omega
        return cls("alternating", float(beta1), float(beta2), float(period), float(offset))

    @property
    def omega(self) -> float | None:
        return None if self.period is None else 2.0 * math.pi / self.period

    def strength_at(self, t: float) -> float:
        """Defect strength active at protocol time ``t``."""
        if self.mode == "none":
            return 0.0
        if self.mode == "static":
            return self.beta1
        phase = (t + self.offset) % self.period
        return self.beta2 if phase <= self.period / 2 else self.beta1

    def segments(self, start: float, stop: float):
        """Yield ``(t0, t1, beta)`` pieces of constant strength covering ``[start, stop]``.

        Piece boundaries fall exactly on the switching instants.
        """
        if stop <= start:
            return
        if self.mode != "alternating":
            yield start, stop, self.strength_at(start)
            return
        half = self.period / 2
        snap = 1e-9 * half
        # switching instants live on the shifted clock s = t + offset
        s, s_stop = start + self.offset, stop + self.offset
        n = math.floor(s / half)
        if (n + 1) * half - s <= snap:
            n += 1
        t0 = start
        while True:
            boundary = (n + 1) * half
            if s_stop <= boundary + snap:
                yield t0, stop, self.beta2 if n % 2 == 0 else self.beta1
                return
            t1 = boundary - self.offset
            yield t0, t1, self.beta2 if n % 2 == 0 else self.beta1
            t0 = t1
            n += 1


@lru_cache(maxsize=256)
def chebyshev_coefficients(x: float, tolerance: float) -> np.ndarray:
    """Coefficients of ``exp(-i x y) = sum_k c_k T_k(y)`` for ``y`` in [-1, 1].

    Terms are dropped once the remaining Bessel tail is below ``tolerance``.
    """
    if x == 0.0:
        return np.ones(1, dtype=np.complex128)
    kmax = int(1.5 * x + 60)
    if kmax > _MAX_ORDER:
        raise ConvergenceFailure(f"expansion for x={x:g} exceeds {_MAX_ORDER} terms")
    k = np.arange(kmax + 1)
    mag = np.abs(jv(k, x))
    mag[1:] *= 2.0
    tail = np.cumsum(mag[::-1])[::-1]
    ok = np.nonzero((tail < tolerance) & (k > x))[0]
    if ok.size == 0:
        raise ConvergenceFailure(f"Bessel tail at x={x:g} does not drop below {tolerance:g}")
    order = int(ok[0])
    coeffs = (-1j) ** k[:order] * jv(k[:order], x)
    coeffs[1:] *= 2.0
    return coeffs.astype(np.complex128)


@numba.njit(cache=True, nogil=True)
def _propagate(diag, hop, psi, coeffs, nsteps, guard, threshold):
    """Apply ``nsteps`` Chebyshev steps in place.

    ``diag``/``hop`` are the shifted and rescaled operator; ``coeffs``
    already carry the global phase. Returns the index of the first step
    after which either edge holds more than ``threshold`` probability, or -1.
    """
    n = psi.size
    prev = np.empty(n, dtype=np.complex128)
    cur = np.empty(n, dtype=np.complex128)
    nxt = np.empty(n, dtype=np.complex128)
    acc = np.empty(n, dtype=np.complex128)
    order = coeffs.size
    for step in range(nsteps):
        c0 = coeffs[0]
        for i in range(n):
            prev[i] = psi[i]
            acc[i] = c0 * psi[i]
        if order > 1:
            c1 = coeffs[1]
            for i in range(n):
                v = diag[i] * prev[i]
                if i > 0:
                    v += hop[i - 1] * prev[i - 1]
                if i < n - 1:
                    v += hop[i] * prev[i + 1]
                cur[i] = v
                acc[i] += c1 * v
            for k in range(2, order):
                ck = coeffs[k]
                for i in range(n):
                    v = diag[i] * cur[i]
                    if i > 0:
                        v += hop[i - 1] * cur[i - 1]
                    if i < n - 1:
                        v += hop[i] * cur[i + 1]
                    v = 2.0 * v - prev[i]
                    nxt[i] = v
                    acc[i] += ck * v
                prev, cur, nxt = cur, nxt, prev
        for i in range(n):
            psi[i] = acc[i]
        left = 0.0
        right = 0.0
        for i in range(guard):
            left += psi[i].real ** 2 + psi[i].imag ** 2
            right += psi[n - 1 - i].real ** 2 + psi[n - 1 - i].imag ** 2
        if left > threshold or right > threshold:
            return step
    return -1


def _check_state(state: WalkerState, H: HamiltonianOperator):
    if state.size != H.size:
        raise ValueError(f"state has {state.size} sites, operator acts on {H.size}")


def evolve_static(
    state: WalkerState,
    H: HamiltonianOperator,
    duration: float,
    cfg: PropagatorConfig | None = None,
    *,
    check_edges: bool = True,
) -> WalkerState:
    """Advance ``state`` by ``duration`` under the time-independent ``H``.

    ``check_edges=False`` evolves the finite chain as is, reflections
    included; it is meant for comparisons against finite-chain references.

    Raises
    ------
    BoundaryContamination
        If either edge strip of ``cfg.edge_guard`` sites holds more than
        ``cfg.edge_threshold`` probability after any sub-step.
    ConvergenceFailure
        If the Chebyshev expansion cannot reach ``cfg.tolerance``.
    """
    cfg = cfg or PropagatorConfig()
    _check_state(state, H)
    duration = float(duration)
    if not (math.isfinite(duration) and duration >= 0):
        raise ValueError(f"duration must be a finite non-negative number, got {duration}")
    if duration == 0.0:
        return state
    if check_edges and 2 * cfg.edge_guard > H.size:
        raise ConfigError(f"edge_guard {cfg.edge_guard} too wide for {H.size} sites", "edge_guard")

    nsteps = max(1, math.ceil(duration / cfg.substep - 1e-9))
    dt = duration / nsteps
    lo, hi = H.spectral_bounds
    center, half_width = 0.5 * (hi + lo), 0.5 * (hi - lo)
    # tolerance bounds the truncation error accumulated over TRUNCATION_HORIZON
    step_tol = cfg.tolerance * min(dt, 1.0) / TRUNCATION_HORIZON
    coeffs = chebyshev_coefficients(half_width * dt, step_tol) * np.exp(-1j * center * dt)
    scale = half_width if half_width > 0 else 1.0
    diag = (H.diagonal - center) / scale
    hop = H.hopping / scale

    psi = state.amplitudes.copy()
    guard = cfg.edge_guard if check_edges else 0
    bad = _propagate(diag, hop, psi, coeffs, nsteps, guard, cfg.edge_threshold)
    if bad >= 0:
        when = state.time + (bad + 1) * dt
        raise BoundaryContamination(
            f"edge probability above {cfg.edge_threshold:g} at t={when:.6g} "
            f"on {H.size} sites; enlarge the lattice"
        )
    return WalkerState(psi, state.time + duration)


def evolve_protocol(
    state: WalkerState,
    spec: LatticeSpec,
    protocol: DefectProtocol,
    duration: float,
    cfg: PropagatorConfig | None = None,
    origin: float = 0.0,
    *,
    check_edges: bool = True,
) -> WalkerState:
    """Advance ``state`` by ``duration`` under ``H0 + f(t) Hd``.

    The protocol clock reads ``state.time - origin``. Each constant-strength
    piece is handed to :func:`evolve_static`, so switching instants are
    always sub-step boundaries.
    """
    cfg = cfg or PropagatorConfig()
    duration = float(duration)
    if not (math.isfinite(duration) and duration >= 0):
        raise ValueError(f"duration must be a finite non-negative number, got {duration}")
    start = state.time - origin
    stop = start + duration
    hamiltonians = {}
    for t0, t1, beta in protocol.segments(start, stop):
        if beta not in hamiltonians:
            hamiltonians[beta] = build_hamiltonian(spec, beta)
        state = evolve_static(state, hamiltonians[beta], t1 - t0, cfg, check_edges=check_edges)
    return replace(state, time=origin + stop) if duration > 0 else state


def oracle_evolve(state: WalkerState, H: HamiltonianOperator, duration: float) -> WalkerState:
    """Exact evolution through a dense eigendecomposition of ``H``."""
    _check_state(state, H)
    if H.size > ORACLE_MAX_SITES:
        raise ValueError(f"oracle limited to {ORACLE_MAX_SITES} sites, got {H.size}")
    if duration == 0:
        return state
    energies, vectors = np.linalg.eigh(H.to_dense())
    psi = vectors @ (np.exp(-1j * energies * duration) * (vectors.T @ state.amplitudes))
    return WalkerState(psi, state.time + duration)
