"""Quantum Fisher information for phase shifts and the Cramer-Rao bound."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fockspace import (
    DEFAULT_TAIL_TOL,
    FockStateMatrix,
    NoiseLevel,
    ProbeKind,
    ProbeSpec,
    _difference_matrix,
    apply_phase_diffusion,
    choose_truncation,
    make_probe,
)

EIGEN_CUTOFF = 1e-12
HERMITIAN_TOL = 1e-10


class DegenerateStateError(ValueError):
    """Every eigenvalue pair fell below the SLD cutoff."""


class UndefinedBoundError(ValueError):
    pass


@dataclass(frozen=True)
class QfiResult:
    value: float
    eigen_cutoff: float
    dim: int
    probe: ProbeSpec | None = None
    noise: NoiseLevel | None = None

    def __float__(self):
        return self.value


def phase_derivative(state: FockStateMatrix) -> np.ndarray:
    """d rho / d phi = -i [a^dagger a, rho] for the phase-shifted family."""
    return -1j * _difference_matrix(state.dim) * state.elements


def sld_qfi(state: FockStateMatrix | np.ndarray, dstate: np.ndarray,
            cutoff: float = EIGEN_CUTOFF) -> QfiResult:
    """QFI from the spectral form of the symmetric logarithmic derivative.

    H = 2 sum_{ij} |<i|d rho|j>|^2 / (l_i + l_j), skipping pairs with
    l_i + l_j <= cutoff * Tr rho. Rows and columns outside the support of
    rho's diagonal are zero in both matrices and are dropped before the
    eigendecomposition.
    """
    rho = np.asarray(state, dtype=complex)
    drho = np.asarray(dstate, dtype=complex)
    if rho.shape != drho.shape or rho.ndim != 2:
        raise ValueError("state and derivative must be square matrices of equal shape")
    scale = max(1.0, float(np.max(np.abs(rho))))
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL * scale:
        raise ValueError("state is not Hermitian")
    if np.max(np.abs(drho - drho.conj().T)) > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(drho)))):
        raise ValueError("state derivative is not Hermitian")
    if abs(np.trace(drho)) > HERMITIAN_TOL:
        raise ValueError("state derivative must be traceless")

    support = np.flatnonzero(np.diag(rho).real > 0)
    rho = rho[np.ix_(support, support)]
    drho = drho[np.ix_(support, support)]
    eps = cutoff * float(np.trace(rho).real)

    lam, vecs = np.linalg.eigh(rho)
    d = vecs.conj().T @ drho @ vecs
    denom = lam[:, None] + lam[None, :]
    keep = denom > eps
    if not keep.any():
        raise DegenerateStateError("all eigenvalue pairs are below the cutoff")
    value = 2.0 * float(np.sum(np.abs(d[keep]) ** 2 / denom[keep]))
    return QfiResult(value=value, eigen_cutoff=eps, dim=len(np.asarray(state)))


def qfi_dimension(probe: ProbeSpec, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    dim = choose_truncation(probe, tail_tol) + 1
    if probe.kind is ProbeKind.SQUEEZED_VACUUM:
        dim *= 2
    return dim


@lru_cache(maxsize=256)
def qfi(probe: ProbeSpec, noise: NoiseLevel = NoiseLevel(),
        tail_tol: float = DEFAULT_TAIL_TOL) -> QfiResult:
    """QFI of the phase-diffused probe, evaluated on the normalized truncated state."""
    dim = qfi_dimension(probe, tail_tol)
    state = apply_phase_diffusion(make_probe(probe, dim), noise).normalized()
    res = sld_qfi(state, phase_derivative(state))
    return QfiResult(res.value, res.eigen_cutoff, dim, probe, noise)


def analytic_qfi(probe: ProbeSpec) -> float:
    """Noiseless benchmarks: 4N for coherent, 8N^2 + 8N for squeezed vacuum."""
    n = probe.mean_photons
    if probe.kind is ProbeKind.COHERENT:
        return 4.0 * n
    return 8.0 * n * n + 8.0 * n


def cr_bound(qfi_value: float, m: int) -> float:
    if not qfi_value > 0:
        raise UndefinedBoundError(f"Cramer-Rao bound undefined for QFI={qfi_value}")
    if m < 1:
        raise ValueError(f"number of measurements must be >= 1, got {m}")
    return 1.0 / (m * qfi_value)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(rho)
    return (vecs * np.sqrt(np.clip(lam, 0, None))) @ vecs.conj().T


def root_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """sqrt(F) = || sqrt(rho) sqrt(sigma) ||_1 (Uhlmann)."""
    s = np.linalg.svd(_psd_sqrt(rho) @ _psd_sqrt(sigma), compute_uv=False)
    return float(np.sum(s))


def fidelity_qfi(state: FockStateMatrix, step: float = 1e-3) -> float:
    """Finite-difference QFI from the Bures metric: 8 (1 - sqrt F) / step^2.

    Independent of the SLD route; used to cross-check it.
    """
    rho = state.normalized().elements
    shifted = np.exp(-1j * step * _difference_matrix(state.dim)) * rho
    return 8.0 * (1.0 - root_fidelity(rho, shifted)) / step ** 2
