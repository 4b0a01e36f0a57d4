import math

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from phasediff.fockspace import NoiseLevel, ProbeSpec, apply_phase_diffusion, apply_phase_shift, make_coherent
from phasediff.homodyne import (
    EmptySampleError,
    HomodyneSample,
    LikelihoodModel,
    classical_fisher,
    fisher_information,
    likelihood_point,
    log_likelihood_set,
    sample_homodyne,
)
from phasediff.metrology import qfi

NS = [0.90, 4.12, 14.11]
DELTAS = [0, np.pi / 18, np.pi / 9, np.pi / 6]


def model(n, delta):
    return LikelihoodModel.from_mean_photons(n, delta)


def fock_homodyne_density(x, phi, n, delta):
    """<x|rho|x> for x = (a + a^dagger)/2 from Hermite functions in the Fock basis."""
    dim = int(n + 12 * math.sqrt(n) + 30)
    rho = apply_phase_diffusion(apply_phase_shift(make_coherent(math.sqrt(n), dim), phi),
                                NoiseLevel(delta)).elements
    q = math.sqrt(2) * np.asarray(x, dtype=float)
    psi = np.zeros((dim,) + q.shape)
    psi[0] = math.pi ** -0.25 * np.exp(-q * q / 2)
    psi[1] = math.sqrt(2) * q * psi[0]
    for k in range(2, dim):
        psi[k] = math.sqrt(2 / k) * q * psi[k - 1] - math.sqrt((k - 1) / k) * psi[k - 2]
    return math.sqrt(2) * np.einsum("n...,nm,m...->...", psi, rho, psi).real


# -- density ------------------------------------------------------------------

def test_noiseless_peak_value():
    m = model(4.12, 0)
    alpha, phi = math.sqrt(4.12), 0.8
    assert likelihood_point(m, alpha * math.cos(phi), phi) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)


@pytest.mark.parametrize("delta", DELTAS)
def test_reflection_symmetry(delta):
    m = model(4.12, delta)
    xs = np.linspace(-4, 4, 17)
    for phi in (0.2, 0.9, 1.4):
        assert np.allclose(m.pdf(xs, np.pi - phi), m.pdf(-xs, phi), rtol=1e-12, atol=0)


def test_mean_quadrature_characteristic_function():
    n, delta, phi = 4.12, np.pi / 9, 0.6
    m = model(n, delta)
    mean, _ = integrate.quad(lambda x: x * likelihood_point(m, x, phi), -12, 12, epsabs=1e-13, limit=200)
    assert mean == pytest.approx(math.sqrt(n) * math.cos(phi) * math.exp(-delta ** 2), rel=1e-9)


@pytest.mark.parametrize("n", NS)
@pytest.mark.parametrize("delta", DELTAS)
def test_normalization(n, delta):
    m = model(n, delta)
    for phi in np.linspace(0, np.pi, 21):
        assert abs(m.normalization(phi) - 1) <= 1e-6


def test_density_positive_far_in_tails():
    m = model(14.11, np.pi / 6)
    assert np.all(m.pdf(np.array([-20.0, 25.0]), 1.0) >= 0)
    assert likelihood_point(m, 40.0, 1.0) > 0
    assert np.isfinite(m.logpdf(40.0, 1.0))


@pytest.mark.parametrize("n", [0.90, 2.5, 5.0])
@pytest.mark.parametrize("delta", DELTAS)
def test_fock_cross_check(n, delta):
    xs = np.linspace(-4.5, 4.5, 31)
    for phi in (0.3, np.pi / 2, 2.5):
        assert np.max(np.abs(fock_homodyne_density(xs, phi, n, delta) - model(n, delta).pdf(xs, phi))) <= 1e-6


def test_narrow_diffusion_falls_back_to_hermite():
    m = model(4.12, 1e-6)
    assert not m.periodic and m.beta_nodes.size == 64
    xs = np.linspace(-3, 3, 13)
    assert np.allclose(m.pdf(xs, 1.0), model(4.12, 0).pdf(xs, 1.0), rtol=1e-8)


def test_lattice_matches_direct_evaluation():
    m = model(4.12, np.pi / 9)
    xs = np.array([-3.1, -0.4, 0.0, 1.7, 2.9])
    phis = np.linspace(0, np.pi, 257)
    assert np.allclose(m.log_pdf_lattice(xs, 257), m.logpdf(xs[:, None], phis[None, :]), atol=1e-8, rtol=0)


def test_only_coherent_probes_have_a_model():
    with pytest.raises(ValueError):
        LikelihoodModel.from_probe(ProbeSpec.from_mean_photons("sqvac", 1.0), NoiseLevel(0.1))
    assert LikelihoodModel.from_probe(ProbeSpec.coherent(1.5), NoiseLevel(0.1)).alpha_mag == 1.5


# -- log-likelihood ------------------------------------------------------------------

def test_log_likelihood_single_and_duplicate():
    m = model(0.90, np.pi / 18)
    x = 0.37
    single = log_likelihood_set(m, HomodyneSample([x]), 1.1)
    assert single == pytest.approx(math.log(likelihood_point(m, x, 1.1)), rel=1e-13)
    assert log_likelihood_set(m, HomodyneSample([x, x]), 1.1) == pytest.approx(2 * single, rel=1e-13)


def test_log_likelihood_matches_product():
    m = model(4.12, np.pi / 9)
    xs = np.random.default_rng(5).normal(0, 1, 10)
    prod = np.prod([likelihood_point(m, x, 1.2) for x in xs])
    assert log_likelihood_set(m, xs, 1.2) == pytest.approx(math.log(prod), rel=1e-10)


def test_log_likelihood_empty():
    with pytest.raises(EmptySampleError):
        log_likelihood_set(model(1, 0.1), np.array([]), 1.0)


# -- sampler ----------------------------------------------------------------------

def test_sampler_vacuum_variance():
    xs = sample_homodyne(model(0, 0), np.pi / 2, 100_000, np.random.default_rng(11)).x
    var = xs.var(ddof=1)
    # var of the sample variance for a normal is 2 sigma^4 / (M - 1)
    se = math.sqrt(2 * 0.25 ** 2 / (xs.size - 1))
    assert abs(var - 0.25) < 5 * se


def test_sampler_mean():
    n, delta, phi = 4.12, np.pi / 9, 0.7
    xs = sample_homodyne(model(n, delta), phi, 100_000, np.random.default_rng(12)).x
    expected = math.sqrt(n) * math.cos(phi) * math.exp(-delta ** 2)
    assert abs(xs.mean() - expected) < 5 * xs.std(ddof=1) / math.sqrt(xs.size)


def test_sampler_deterministic_and_validated():
    m = model(1.0, 0.2)
    a = sample_homodyne(m, 1.0, 50, np.random.default_rng(3)).x
    b = sample_homodyne(m, 1.0, 50, np.random.default_rng(3)).x
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_homodyne(m, 1.0, 0, np.random.default_rng(3))


def quadrature_cdf(m, x, phi):
    val, _ = integrate.quad(lambda t: likelihood_point(m, t, phi), -m.alpha_mag - 8, x,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def test_sampler_chi_square():
    n, delta, phi = 4.12, np.pi / 9, np.pi / 2
    m = model(n, delta)
    bins = 50
    lo = -m.alpha_mag - 8
    edges = [optimize.brentq(lambda x: quadrature_cdf(m, x, phi) - k / bins, lo, -lo, xtol=1e-12)
             for k in range(1, bins)]
    xs = sample_homodyne(m, phi, 100_000, np.random.default_rng(0)).x
    counts = np.bincount(np.searchsorted(edges, xs), minlength=bins)
    assert stats.chisquare(counts).pvalue > 0.01


def test_sampler_chi_square_pvalues_are_uniform():
    # a single-seed chi-square test fails 1% of seeds by construction; over many
    # seeds a correct sampler gives uniform p-values
    m = model(4.12, np.pi / 9)
    phi, bins = np.pi / 2, 50
    edges = [optimize.brentq(lambda x: m.cdf(x, phi) - k / bins, -12, 12, xtol=1e-13) for k in range(1, bins)]
    pvalues = [stats.chisquare(np.bincount(np.searchsorted(
        edges, sample_homodyne(m, phi, 20_000, np.random.default_rng(seed)).x), minlength=bins)).pvalue
        for seed in range(100)]
    assert stats.kstest(pvalues, "uniform").pvalue > 1e-3


def test_closed_form_cdf_matches_quadrature():
    m = model(4.12, np.pi / 9)
    for x in (-2.0, 0.0, 1.3):
        assert m.cdf(x, 1.0) == pytest.approx(quadrature_cdf(m, x, 1.0), abs=1e-10)


# -- Fisher information ----------------------------------------------------------------

@pytest.mark.parametrize("phi", [0.3, 1.0, np.pi / 2, 2.6])
def test_fisher_noiseless_location_model(phi):
    n = 4.12
    assert classical_fisher(model(n, 0), phi) == pytest.approx(4 * n * math.sin(phi) ** 2, rel=1e-10)


def test_fisher_saturates_qfi_without_noise():
    n = 0.90
    h = qfi(ProbeSpec.from_mean_photons("coherent", n)).value
    assert classical_fisher(model(n, 0), np.pi / 2) == pytest.approx(h, abs=1e-6)


def test_fisher_reflection_symmetry():
    m = model(4.12, np.pi / 9)
    for phi in (0.2, 0.7, 1.3):
        assert abs(classical_fisher(m, phi) - classical_fisher(m, np.pi - phi)) <= 1e-8


def test_fisher_matches_finite_difference_oracle():
    m = model(2.0, np.pi / 12)
    phi, h = 1.1, 1e-4

    def integrand(x):
        dlogp = (m.logpdf(x, phi + h) - m.logpdf(x, phi - h)) / (2 * h)
        return m.pdf(x, phi) * dlogp ** 2

    oracle, _ = integrate.quad(integrand, -m.alpha_mag - 6, m.alpha_mag + 6, limit=200)
    assert classical_fisher(m, phi) == pytest.approx(oracle, rel=1e-6)


@pytest.mark.parametrize("n", NS)
@pytest.mark.parametrize("delta", DELTAS)
def test_classical_below_quantum(n, delta):
    h = qfi(ProbeSpec.from_mean_photons("coherent", n), NoiseLevel(delta)).value
    f = fisher_information(model(n, delta), np.linspace(0, np.pi, 21))
    assert np.all(f >= 0)
    assert np.all(f <= h + 1e-6)


def test_classical_fisher_domain():
    with pytest.raises(ValueError):
        classical_fisher(model(1, 0.1), 0.0)
