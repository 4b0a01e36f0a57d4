"""
Homodyne statistics of phase-diffused coherent probes.

The quadrature outcome x (vacuum variance 1/4) given the phase phi is

    p(x|phi) = E_b[ sqrt(2/pi) exp(-2 (x - alpha cos(phi + b))^2) ],
    b ~ Normal(0, 2 delta^2).

The integrand is 2 pi periodic in b, so the Gaussian is wrapped onto the
circle and integrated with the trapezoid rule, which converges
exponentially for periodic analytic integrands. Very narrow diffusion
(where the circle grid would need too many nodes) falls back to
Gauss-Hermite on the real line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from .fockspace import NoiseLevel, ProbeSpec, ProbeKind

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
QUADRATURE_SD = 0.5
MAX_PERIODIC_NODES = 2 ** 16
HERMITE_NODES = 64
X_NODES = 400
X_HALF_WIDTH_PAD = 4.0


class EmptySampleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HomodyneSample:
    """One homodyne record: quadrature outcomes taken at a single LO phase."""

    x: np.ndarray
    theta: float = np.pi / 2

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise ValueError("homodyne outcomes must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def __len__(self):
        return self.x.size

    def __getitem__(self, item):
        if isinstance(item, slice):
            return HomodyneSample(self.x[item], self.theta)
        return self.x[item]


def periodic_nodes_needed(alpha: float, delta: float) -> int:
    """Trapezoid node count on [0, 2 pi) for ~machine-precision p(x|phi).

    Aliasing falls off like exp(-(delta K)^2) from the wrapped Gaussian and
    like exp(-K^2 / 2z) from the likelihood kernel, z = 4 alpha |x| + 2 alpha^2,
    evaluated out to |x| = alpha + 8.
    """
    z = 4 * alpha * (alpha + 8) + 2 * alpha ** 2
    need = max(128.0, 8.0 / delta, 12.0 * np.sqrt(z))
    return int(2 ** np.ceil(np.log2(need)))


def wrapped_gaussian_weights(delta: float, k: int) -> np.ndarray:
    """Weights of Normal(0, 2 delta^2) wrapped onto k equispaced points of the circle."""
    psi = 2 * np.pi * np.arange(k) / k
    psi = np.where(psi > np.pi, psi - 2 * np.pi, psi)
    sd = np.sqrt(2.0) * delta
    images = 2 * np.pi * np.arange(-int(np.ceil(6 * sd / (2 * np.pi))) - 1,
                                   int(np.ceil(6 * sd / (2 * np.pi))) + 2)
    w = np.exp(-((psi[:, None] + images[None, :]) ** 2) / (2 * sd * sd)).sum(axis=1)
    return w / w.sum()


@dataclass(frozen=True, eq=False)
class LikelihoodModel:
    """Evaluable homodyne density p(x|phi) for a phase-diffused coherent probe."""

    alpha_mag: float
    noise: NoiseLevel = field(default_factory=NoiseLevel)
    beta_nodes: np.ndarray = field(init=False, repr=False)
    beta_weights: np.ndarray = field(init=False, repr=False)
    periodic: bool = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.alpha_mag) and self.alpha_mag >= 0):
            raise ValueError(f"alpha_mag must be finite and >= 0, got {self.alpha_mag}")
        if not isinstance(self.noise, NoiseLevel):
            object.__setattr__(self, "noise", NoiseLevel(float(self.noise)))
        delta = self.noise.delta
        k = periodic_nodes_needed(self.alpha_mag, delta) if delta > 0 else 0
        if delta == 0:
            nodes, weights, periodic = np.zeros(1), np.ones(1), False
        elif k <= MAX_PERIODIC_NODES:
            nodes = 2 * np.pi * np.arange(k) / k
            weights, periodic = wrapped_gaussian_weights(delta, k), True
        else:
            u, w = np.polynomial.hermite.hermgauss(HERMITE_NODES)
            nodes, weights, periodic = 2 * delta * u, w / np.sqrt(np.pi), False
        object.__setattr__(self, "beta_nodes", nodes)
        object.__setattr__(self, "beta_weights", weights)
        object.__setattr__(self, "periodic", periodic)

    @classmethod
    def from_probe(cls, probe: ProbeSpec, noise: NoiseLevel) -> LikelihoodModel:
        if probe.kind is not ProbeKind.COHERENT:
            raise ValueError("homodyne likelihood is only modelled for coherent probes")
        return cls(float(abs(probe.amplitude)), noise)

    @classmethod
    def from_mean_photons(cls, n: float, delta: float) -> LikelihoodModel:
        if not n >= 0:
            raise ValueError(f"mean photon number must be >= 0, got {n}")
        return cls(float(np.sqrt(n)), NoiseLevel(delta))

    @property
    def delta(self) -> float:
        return self.noise.delta

    @property
    def mean_photons(self) -> float:
        return self.alpha_mag ** 2

    def _means(self, phi):
        return self.alpha_mag * np.cos(np.asarray(phi, dtype=float)[..., None] + self.beta_nodes)

    def pdf(self, x, phi) -> np.ndarray:
        """p(x|phi), broadcasting over ``x`` and ``phi``."""
        x = np.asarray(x, dtype=float)[..., None]
        kern = np.exp(-2.0 * (x - self._means(phi)) ** 2)
        return SQRT_2_OVER_PI * (kern @ self.beta_weights)

    def logpdf(self, x, phi) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., None]
        e = -2.0 * (x - self._means(phi)) ** 2
        return np.log(SQRT_2_OVER_PI) + special.logsumexp(e, b=self.beta_weights, axis=-1)

    def dpdf_dphi(self, x, phi) -> np.ndarray:
        """Exact phi-derivative of the quadrature sum (nodes do not depend on phi)."""
        x = np.asarray(x, dtype=float)[..., None]
        phi = np.asarray(phi, dtype=float)[..., None]
        mu = self.alpha_mag * np.cos(phi + self.beta_nodes)
        dmu = -self.alpha_mag * np.sin(phi + self.beta_nodes)
        kern = np.exp(-2.0 * (x - mu) ** 2) * 4.0 * (x - mu) * dmu
        return SQRT_2_OVER_PI * (kern @ self.beta_weights)

    def cdf(self, x, phi) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., None]
        z = (x - self._means(phi)) / QUADRATURE_SD
        return special.ndtr(z) @ self.beta_weights

    @cached_property
    def x_rule(self) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes and weights covering every node mean +- 8 sd."""
        half = self.alpha_mag + X_HALF_WIDTH_PAD
        t, w = np.polynomial.legendre.leggauss(X_NODES)
        return half * t, half * w

    def normalization(self, phi: float) -> float:
        xs, wx = self.x_rule
        return float(wx @ self.pdf(xs, phi))

    def mean_quadrature(self, phi: float) -> float:
        xs, wx = self.x_rule
        return float(wx @ (xs * self.pdf(xs, phi)))

    # -- phase lattice -------------------------------------------------------

    def lattice_size(self, grid_points: int) -> int:
        """Circle lattice containing a uniform [0, pi] grid of ``grid_points`` nodes."""
        base = 2 * (grid_points - 1)
        need = periodic_nodes_needed(self.alpha_mag, self.delta) if self.delta > 0 else 1
        return base * int(np.ceil(need / base))

    def log_pdf_lattice(self, x, grid_points: int) -> np.ndarray | None:
        """log p(x_i|phi_j) on the uniform grid phi_j = j pi / (grid_points - 1).

        Uses circular convolution of the kernel with the wrapped Gaussian on a
        lattice that contains the grid, so the cost is one FFT per outcome.
        Returns None when the diffusion is too narrow for a lattice rule.
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.delta > 0 and not self.periodic:
            return None
        k = self.lattice_size(grid_points)
        stride = k // (2 * (grid_points - 1))
        psi = 2 * np.pi * np.arange(k) / k
        e = -2.0 * (x[:, None] - self.alpha_mag * np.cos(psi)[None, :]) ** 2
        if self.delta == 0:
            return np.log(SQRT_2_OVER_PI) + e[:, : stride * grid_points : stride]
        top = e.max(axis=1, keepdims=True)
        w_hat = np.fft.rfft(wrapped_gaussian_weights(self.delta, k)).real
        p = np.fft.irfft(np.fft.rfft(np.exp(e - top), axis=1) * w_hat, n=k, axis=1)
        p = p[:, : stride * grid_points : stride]
        # FFT round-off can leave tiny negatives where the true value is ~0
        p = np.maximum(p, np.finfo(float).tiny)
        return np.log(SQRT_2_OVER_PI) + top + np.log(p)


def log_likelihood_set(model: LikelihoodModel, samples: HomodyneSample | np.ndarray, phi) -> np.ndarray:
    """sum_k log p(x_k|phi); broadcasts over ``phi``."""
    x = samples.x if isinstance(samples, HomodyneSample) else np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise EmptySampleError("log-likelihood needs at least one sample")
    phi = np.asarray(phi, dtype=float)
    return np.sum(model.logpdf(x[:, None], phi.reshape(-1)[None, :]), axis=0).reshape(phi.shape)


def likelihood_point(model: LikelihoodModel, x: float, phi: float) -> float:
    return max(float(model.pdf(x, phi)), np.finfo(float).tiny)


def sample_homodyne(model: LikelihoodModel, true_phi: float, m: int,
                    rng: np.random.Generator, theta: float = np.pi / 2) -> HomodyneSample:
    """Draw b ~ Normal(0, 2 delta^2), then x ~ Normal(alpha cos(phi + b), 1/4)."""
    if m < 1:
        raise ValueError(f"number of samples must be >= 1, got {m}")
    beta = rng.normal(0.0, np.sqrt(2.0) * model.delta, size=m)
    x = rng.normal(model.alpha_mag * np.cos(true_phi + beta), QUADRATURE_SD)
    return HomodyneSample(x, theta)


def fisher_information(model: LikelihoodModel, phis) -> np.ndarray:
    """F(phi) = int dx (dp/dphi)^2 / p on the model's x rule; vectorized over phis."""
    xs, wx = model.x_rule
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    p = model.pdf(xs[:, None], phis[None, :])
    dp = model.dpdf_dphi(xs[:, None], phis[None, :])
    integrand = np.divide(dp ** 2, p, out=np.zeros_like(p), where=p > 0)
    f = wx @ integrand
    if not np.all(np.isfinite(f)):
        raise FloatingPointError("non-finite Fisher integrand; check the quadrature setup")
    return f


def classical_fisher(model: LikelihoodModel, phi: float) -> float:
    if not 0 < phi < np.pi:
        raise ValueError(f"phi must lie in (0, pi), got {phi}")
    return float(fisher_information(model, phi)[0])
