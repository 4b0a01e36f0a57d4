"""Grid posterior over phi in [0, pi], posterior mean and variance."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .homodyne import HomodyneSample, LikelihoodModel, fisher_information

DEFAULT_GRID = 2001
MIN_GRID = 64
_CHUNK = 1024

Prior = Union[None, np.ndarray, Callable[[np.ndarray], np.ndarray]]


class PriorKind(str, Enum):
    UNIFORM = "uniform"
    JEFFREYS = "jeffreys"


def phase_grid(g: int = DEFAULT_GRID) -> np.ndarray:
    if g < MIN_GRID:
        raise ValueError(f"grid needs at least {MIN_GRID} nodes, got {g}")
    return np.linspace(0.0, np.pi, g)


def _trapz(y, x):
    return integrate.trapezoid(y, x)


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    phis: np.ndarray
    log_weights: np.ndarray
    densities: np.ndarray

    @classmethod
    def from_log_weights(cls, phis: np.ndarray, log_weights: np.ndarray) -> PosteriorGrid:
        top = np.max(log_weights)
        if not np.isfinite(top):
            raise FloatingPointError("posterior weights underflowed on the whole grid")
        w = np.exp(log_weights - top)
        return cls(phis, log_weights, w / _trapz(w, phis))


@dataclass(frozen=True)
class EstimationResult:
    phi_b: float
    variance: float
    m: int
    prior_kind: str = PriorKind.UNIFORM.value


def log_likelihood_grid(model: LikelihoodModel, x: np.ndarray, g: int,
                        prefixes: list[int] | None = None) -> np.ndarray:
    """Per-node log L(X|phi) over the grid.

    With ``prefixes`` returns one row per prefix length, each holding the
    log-likelihood of the first m outcomes.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    phis = phase_grid(g)
    wanted = sorted(set(prefixes)) if prefixes else [x.size]
    rows = {}
    running = np.zeros(g)
    for start in range(0, wanted[-1], _CHUNK):
        chunk = x[start:min(start + _CHUNK, wanted[-1])]
        lp = model.log_pdf_lattice(chunk, g)
        if lp is None:
            lp = model.logpdf(chunk[:, None], phis[None, :])
        cum = running + np.cumsum(lp, axis=0)
        for m in wanted:
            if start < m <= start + chunk.size:
                rows[m] = cum[m - start - 1]
        running = cum[-1]
    if prefixes is None:
        return rows[x.size]
    return np.array([rows[m] for m in prefixes])


def jeffreys_prior(model: LikelihoodModel, g: int = DEFAULT_GRID) -> np.ndarray:
    """sqrt(F(phi)) on the uniform grid, trapezoid-normalized on [0, pi]."""
    phis = phase_grid(g)
    f = fisher_information(model, phis)
    if np.any(f < 0):
        raise FloatingPointError("negative Fisher information")
    root = np.sqrt(f)
    return root / _trapz(root, phis)


def _log_prior(prior: Prior, phis: np.ndarray) -> np.ndarray:
    if prior is None:
        return np.zeros_like(phis)
    values = prior(phis) if callable(prior) else np.asarray(prior, dtype=float)
    if values.shape != phis.shape:
        raise ValueError(f"prior has shape {values.shape}, grid has {phis.shape}")
    if np.any(values < 0):
        raise ValueError("prior density must be non-negative")
    with np.errstate(divide="ignore"):
        return np.log(values)


def resolve_prior(kind: PriorKind | str, model: LikelihoodModel, g: int) -> np.ndarray | None:
    if PriorKind(kind) is PriorKind.JEFFREYS:
        return jeffreys_prior(model, g)
    return None


def posterior_from_samples(model: LikelihoodModel, samples: HomodyneSample | np.ndarray | None,
                           prior: Prior = None, g: int = DEFAULT_GRID) -> PosteriorGrid:
    """Posterior P(phi|X) on a uniform [0, pi] grid.

    An empty sample yields the prior alone.
    """
    phis = phase_grid(g)
    log_w = _log_prior(prior, phis)
    x = samples.x if isinstance(samples, HomodyneSample) else np.asarray(
        [] if samples is None else samples, dtype=float).reshape(-1)
    if x.size:
        log_w = log_w + log_likelihood_grid(model, x, g)
    return PosteriorGrid.from_log_weights(phis, log_w)


def estimate(grid: PosteriorGrid, m: int | None = None,
             prior_kind: PriorKind | str = PriorKind.UNIFORM) -> EstimationResult:
    phis, p = grid.phis, grid.densities
    mean = float(_trapz(phis * p, phis))
    var = float(_trapz((phis - mean) ** 2 * p, phis))
    return EstimationResult(mean, var, -1 if m is None else m, PriorKind(prior_kind).value)


def estimate_prefixes(model: LikelihoodModel, x: np.ndarray, ms: list[int],
                      prior: Prior = None, g: int = DEFAULT_GRID,
                      prior_kind: PriorKind | str = PriorKind.UNIFORM) -> list[EstimationResult]:
    """Estimates from the first m outcomes for every m in ``ms``, sharing one pass."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if max(ms) > x.size:
        raise ValueError(f"asked for {max(ms)} samples, only {x.size} available")
    phis = phase_grid(g)
    log_prior = _log_prior(prior, phis)
    rows = log_likelihood_grid(model, x, g, prefixes=list(ms))
    return [estimate(PosteriorGrid.from_log_weights(phis, log_prior + row), m, prior_kind)
            for m, row in zip(ms, rows)]
