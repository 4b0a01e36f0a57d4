"""
Single-mode probe states in a truncated photon-number basis, and the two
phase channels acting on them.

Phase diffusion is the Gaussian dephasing map

    rho_nm -> exp(-delta^2 (n - m)^2) rho_nm

which equals the average of U_b rho U_b^dagger over a zero-mean Gaussian
phase b with variance 2 delta^2, U_b = exp(-i b a^dagger a).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special, stats

MAX_DIM = 4096
DEFAULT_TAIL_TOL = 1e-12


class TruncationError(ValueError):
    """Raised when a probe cannot be represented within the dimension cap."""


class ProbeKind(str, Enum):
    COHERENT = "coherent"
    SQUEEZED_VACUUM = "sqvac"


@dataclass(frozen=True)
class ProbeSpec:
    """Probe family plus its defining parameter.

    ``amplitude`` is the coherent amplitude alpha for coherent probes and the
    squeezing parameter r for squeezed vacuum.
    """

    kind: ProbeKind
    amplitude: complex | float

    def __post_init__(self):
        object.__setattr__(self, "kind", ProbeKind(self.kind))
        if not np.isfinite(self.amplitude):
            raise ValueError("probe amplitude must be finite")
        if self.kind is ProbeKind.SQUEEZED_VACUUM:
            if np.iscomplexobj(self.amplitude) or self.amplitude < 0:
                raise ValueError("squeezing r must be real and >= 0")

    @classmethod
    def coherent(cls, alpha: complex | float) -> ProbeSpec:
        return cls(ProbeKind.COHERENT, alpha)

    @classmethod
    def squeezed_vacuum(cls, r: float) -> ProbeSpec:
        return cls(ProbeKind.SQUEEZED_VACUUM, float(r))

    @classmethod
    def from_mean_photons(cls, kind: ProbeKind | str, n: float) -> ProbeSpec:
        """Build a probe with mean photon number ``n`` (alpha real >= 0)."""
        if not n >= 0:
            raise ValueError(f"mean photon number must be >= 0, got {n}")
        kind = ProbeKind(kind)
        if kind is ProbeKind.COHERENT:
            return cls.coherent(float(np.sqrt(n)))
        return cls.squeezed_vacuum(float(np.arcsinh(np.sqrt(n))))

    @property
    def mean_photons(self) -> float:
        if self.kind is ProbeKind.COHERENT:
            return float(abs(self.amplitude) ** 2)
        return float(np.sinh(self.amplitude) ** 2)


@dataclass(frozen=True)
class NoiseLevel:
    """Phase-diffusion strength delta (radians); zero means noiseless."""

    delta: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise ValueError(f"delta must be finite and >= 0, got {self.delta}")


@dataclass(frozen=True, eq=False)
class FockStateMatrix:
    """Density matrix rho[n, m] = <n|rho|m> on the basis |0>..|dim-1>."""

    elements: np.ndarray

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
            raise ValueError(f"density matrix must be square, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def n_max(self) -> int:
        return self.dim - 1

    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def photon_distribution(self) -> np.ndarray:
        return np.diag(self.elements).real.copy()

    def mean_photons(self) -> float:
        return float(np.arange(self.dim) @ self.photon_distribution())

    def purity(self) -> float:
        rho = self.elements
        return float(np.sum(np.abs(rho) ** 2))

    def normalized(self) -> FockStateMatrix:
        return FockStateMatrix(self.elements / self.trace())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.elements, dtype=dtype)


def _difference_matrix(dim: int) -> np.ndarray:
    n = np.arange(dim)
    return n[:, None] - n[None, :]


def _check_dim(dim: int, max_dim: int = MAX_DIM):
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if dim > max_dim:
        raise TruncationError(f"dim {dim} exceeds hard cap {max_dim}")


def choose_truncation(probe: ProbeSpec, tail_tol: float = DEFAULT_TAIL_TOL,
                      max_dim: int = MAX_DIM) -> int:
    """Smallest n_max whose photon-number tail P(n > n_max) is below ``tail_tol``.

    Squeezed vacuum only populates even photon numbers, so its cutoff is even.
    """
    if not 0 < tail_tol < 1:
        raise ValueError(f"tail_tol must lie in (0, 1), got {tail_tol}")
    n = np.arange(max_dim)
    if probe.kind is ProbeKind.COHERENT:
        tail = stats.poisson.sf(n, probe.mean_photons)
        hits = np.flatnonzero(tail < tail_tol)
        n_max = int(hits[0]) if hits.size else max_dim
    else:
        # photon pairs k = n/2 follow a negative binomial with shape 1/2
        pairs = np.arange(max_dim // 2 + 1)
        tail = stats.nbinom.sf(pairs, 0.5, 1.0 / np.cosh(probe.amplitude) ** 2)
        hits = np.flatnonzero(tail < tail_tol)
        n_max = 2 * int(hits[0]) if hits.size else max_dim
    if n_max + 1 > max_dim:
        raise TruncationError(
            f"probe with N={probe.mean_photons:.4g} needs more than {max_dim} Fock levels "
            f"for tail_tol={tail_tol:g}"
        )
    return n_max


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    c = np.empty(dim, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def squeezed_vacuum_amplitudes(r: float, dim: int) -> np.ndarray:
    c = np.zeros(dim, dtype=complex)
    c[0] = 1.0 / np.sqrt(np.cosh(r))
    t = np.tanh(r)
    for n in range(2, dim, 2):
        c[n] = -t * np.sqrt((n - 1) / n) * c[n - 2]
    return c


def make_coherent(alpha: complex, dim: int) -> FockStateMatrix:
    """Projector |alpha><alpha| truncated to ``dim`` levels (not renormalized)."""
    _check_dim(dim)
    c = coherent_amplitudes(alpha, dim)
    return FockStateMatrix(np.outer(c, c.conj()))


def make_squeezed_vacuum(r: float, dim: int, min_mass: float = 1 - 1e-8) -> FockStateMatrix:
    if r < 0:
        raise ValueError(f"squeezing r must be >= 0, got {r}")
    _check_dim(dim)
    c = squeezed_vacuum_amplitudes(r, dim)
    mass = float(np.sum(np.abs(c) ** 2))
    if mass < min_mass:
        raise TruncationError(
            f"dim={dim} keeps only {mass:.10f} of the squeezed vacuum with r={r}"
        )
    return FockStateMatrix(np.outer(c, c.conj()))


def make_probe(probe: ProbeSpec, dim: int | None = None,
               tail_tol: float = DEFAULT_TAIL_TOL) -> FockStateMatrix:
    if dim is None:
        dim = choose_truncation(probe, tail_tol) + 1
    if probe.kind is ProbeKind.COHERENT:
        return make_coherent(probe.amplitude, dim)
    return make_squeezed_vacuum(probe.amplitude, dim)


def apply_phase_shift(state: FockStateMatrix, phi: float) -> FockStateMatrix:
    """U_phi rho U_phi^dagger with U_phi = exp(-i phi a^dagger a)."""
    if not np.isfinite(phi):
        raise ValueError("phase must be finite")
    k = _difference_matrix(state.dim)
    return FockStateMatrix(np.exp(-1j * phi * k) * state.elements)


def apply_phase_diffusion(state: FockStateMatrix, noise: NoiseLevel) -> FockStateMatrix:
    if noise.delta == 0:
        return state
    k = _difference_matrix(state.dim)
    return FockStateMatrix(np.exp(-(noise.delta ** 2) * k ** 2) * state.elements)


def hermite_nodes_needed(dim: int, delta: float) -> int:
    """Gauss-Hermite order resolving exp(-i 2 delta u k) for |k| < dim."""
    omega = 2 * delta * (dim - 1)
    return int(min(1200, max(64, np.ceil(omega ** 2 / 4 + 32))))


def phase_average_quadrature(state: FockStateMatrix, noise: NoiseLevel,
                             nodes: int | None = None) -> FockStateMatrix:
    """Average U_b rho U_b^dagger over b ~ Normal(0, 2 delta^2) by Gauss-Hermite.

    Independent route to :func:`apply_phase_diffusion`; substitutes b = 2 delta u
    so the weight becomes exp(-u^2) / sqrt(pi).
    """
    if nodes is None:
        nodes = hermite_nodes_needed(state.dim, noise.delta)
    u, w = special.roots_hermite(nodes)
    k = _difference_matrix(state.dim)
    out = np.zeros_like(state.elements)
    for ui, wi in zip(u, w):
        out += wi / np.sqrt(np.pi) * np.exp(-1j * 2 * noise.delta * ui * k) * state.elements
    return FockStateMatrix(out)
