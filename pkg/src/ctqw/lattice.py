"""Tight-binding chain with a single transition defect.

Sites are addressed in centered coordinates ``j = -(N-1)/2 ... (N-1)/2``;
storage index ``j + (N-1)/2``. The Hamiltonian is kept as a diagonal plus
one real hopping array (link ``k`` joins storage sites ``k`` and ``k+1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ctqw.errors import ConfigError

DEFAULT_MARGIN = 200


@dataclass(frozen=True)
class LatticeSpec:
    num_sites: int
    epsilon: float = 0.0
    gamma: float = 1.0
    defect_site: int = 0

    def __post_init__(self):
        n = self.num_sites
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ConfigError(f"must be an integer, got {n!r}", "N")
        if n < 5:
            raise ConfigError(f"N >= 5 violated (N={n})", "N")
        if n % 2 == 0:
            raise ConfigError(f"N odd violated (N={n})", "N")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"gamma > 0 violated (gamma={self.gamma})", "gamma")
        if not math.isfinite(self.epsilon):
            raise ConfigError("epsilon must be finite", "epsilon")
        d = self.defect_site
        if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
            raise ConfigError(f"must be an integer, got {d!r}", "defect_site")
        if not -self.half_width < d < self.half_width:
            raise ConfigError(
                f"defect site must lie strictly inside ({-self.half_width}, {self.half_width}), got {d}",
                "defect_site",
            )

    @property
    def half_width(self) -> int:
        return (self.num_sites - 1) // 2

    @property
    def sites(self) -> np.ndarray:
        """Centered site coordinates, in storage order."""
        return np.arange(-self.half_width, self.half_width + 1)

    def index(self, j: int) -> int:
        """Storage index of centered site ``j``."""
        if not -self.half_width <= j <= self.half_width:
            raise ConfigError(f"site {j} outside the lattice", "site")
        return int(j) + self.half_width


@dataclass(frozen=True)
class HamiltonianOperator:
    """Real symmetric tridiagonal operator.

    ``hopping[k]`` couples storage sites ``k`` and ``k+1``.
    """

    diagonal: np.ndarray
    hopping: np.ndarray
    _bounds: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        diag = np.array(self.diagonal, dtype=np.float64)
        hop = np.array(self.hopping, dtype=np.float64)
        if diag.ndim != 1 or hop.shape != (diag.size - 1,):
            raise ValueError("hopping must have exactly one entry fewer than diagonal")
        diag.flags.writeable = False
        hop.flags.writeable = False
        object.__setattr__(self, "diagonal", diag)
        object.__setattr__(self, "hopping", hop)
        object.__setattr__(self, "_bounds", _gershgorin(diag, hop))

    @property
    def size(self) -> int:
        return self.diagonal.size

    @property
    def spectral_bounds(self) -> tuple[float, float]:
        """Gershgorin enclosure ``(lo, hi)`` of the spectrum."""
        return self._bounds

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diagonal)
            + np.diag(self.hopping, 1)
            + np.diag(self.hopping, -1)
        )

    def __matmul__(self, psi):
        return apply(self, psi)


def _gershgorin(diag, hop):
    radius = np.zeros_like(diag)
    radius[:-1] += np.abs(hop)
    radius[1:] += np.abs(hop)
    return float(np.min(diag - radius)), float(np.max(diag + radius))


def build_hamiltonian(spec: LatticeSpec, beta: float = 0.0) -> HamiltonianOperator:
    """Chain Hamiltonian ``H0 + beta * Hd`` for the lattice ``spec``.

    Every link carries ``-gamma`` except the two links touching the defect
    site, which carry ``-(gamma + beta)``.
    """
    beta = float(beta)
    if not math.isfinite(beta):
        raise ConfigError(f"beta must be finite, got {beta}", "beta")
    n = spec.num_sites
    diag = np.full(n, float(spec.epsilon))
    hop = np.full(n - 1, -float(spec.gamma))
    if beta != 0.0:
        k = spec.index(spec.defect_site)
        hop[k - 1] = hop[k] = -(spec.gamma + beta)
    return HamiltonianOperator(diag, hop)


def apply(H: HamiltonianOperator, psi) -> np.ndarray:
    """Return ``H @ psi``."""
    psi = np.asarray(psi)
    if psi.shape != (H.size,):
        raise ValueError(f"state has shape {psi.shape}, operator acts on {H.size} sites")
    out = H.diagonal * psi
    out[:-1] += H.hopping * psi[1:]
    out[1:] += H.hopping * psi[:-1]
    return out


def required_sites(t_max: float, gamma: float = 1.0, margin: int = DEFAULT_MARGIN) -> int:
    """Smallest odd chain length that holds a ballistic front up to ``t_max``.

    The defect-free group velocity is bounded by ``2*gamma``; ``margin``
    extra sites are kept on each side.
    """
    reach = math.ceil(2.0 * gamma * t_max)
    n = 2 * (reach + margin) + 1
    return max(n, 5)
