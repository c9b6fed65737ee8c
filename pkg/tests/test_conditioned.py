"""Conditioned tensorisation states: marginals, entropy, production."""

import numpy as np
import pytest
from scipy.special import gammaln

from kaclab.conditioned import AngleGrid, ConditionedFamily
from kaclab.densities import gaussian, mixture, relative_entropy

N_GAUSS = 16


@pytest.fixture(scope="module")
def gauss_family():
    return ConditionedFamily(gaussian(1.0), N_GAUSS)


@pytest.fixture(scope="module")
def mix_family():
    return ConditionedFamily(mixture(0.25), 32)


def exact_sphere_marginal(n, v):
    """First marginal of the uniform measure on S^{n-1}(sqrt n)."""
    v = np.asarray(v, dtype=float)
    c = np.exp(gammaln(n / 2.0) - gammaln((n - 1) / 2.0)) / np.sqrt(np.pi * n)
    out = np.zeros_like(v)
    inside = v * v < n
    out[inside] = c * (1.0 - v[inside] ** 2 / n) ** ((n - 3) / 2.0)
    return out


def test_gaussian_marginal_is_sphere_marginal(gauss_family):
    v = np.linspace(-3.5, 3.5, 41)
    got = gauss_family.marginal1(v)
    assert np.max(np.abs(got - exact_sphere_marginal(N_GAUSS, v))) < 1e-5


def test_gaussian_marginal2_uniformity(gauss_family):
    # for the uniform state, F_{N,2} depends only on v1^2 + v2^2
    a = float(gauss_family.marginal2(1.0, 0.5))
    b = float(gauss_family.marginal2(np.sqrt(1.25), 0.0))
    assert a == pytest.approx(b, rel=1e-6)


def test_gaussian_entropy_vanishes(gauss_family):
    assert gauss_family.entropy() == pytest.approx(0.0, abs=1e-4)


def test_gaussian_production_vanishes(gauss_family):
    assert gauss_family.production(0.5, check=False) == pytest.approx(
        0.0, abs=1e-10)


def test_marginal_mass(mix_family):
    v = np.linspace(-mix_family.f.v_max, mix_family.f.v_max, 8193)
    dens = mix_family.marginal1(v)
    mass = np.trapezoid(dens, v)
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_entropy_positive_and_extensive(mix_family):
    h = mix_family.entropy()
    assert h > 0
    # per-particle entropy below the limit value (monotone approach)
    assert h / 32 < relative_entropy(mixture(0.25))


def test_production_positive_and_monotone_in_gamma(mix_family):
    d0 = mix_family.production(0.0, check=False)
    d1 = mix_family.production(1.0, check=False)
    assert 0 < d0 < d1


def test_production_quadrature_self_check(mix_family):
    # the doubling check agrees with the base resolution
    base = mix_family.production(0.5, n_s=96, check=False)
    checked = mix_family.production(0.5, n_s=96, check=True)
    assert checked == pytest.approx(base, rel=1e-3)


def test_log_power_integral_positive(mix_family):
    val = mix_family.log_power_integral(1.0, n_s=96, check=False)
    assert val > 0


def test_chaos_distance_shrinks():
    f = mixture(0.25)
    d16 = ConditionedFamily(f, 16).chaos_distance()
    d64 = ConditionedFamily(f, 64).chaos_distance()
    assert d64 < d16


def test_sampler_energy_constraint(mix_family):
    rng = np.random.default_rng(5)
    s = mix_family.sample(500, rng)
    assert s.shape == (500, 32)
    assert np.allclose(np.sum(s * s, axis=1), 32.0, atol=1e-9)


def test_sampler_marginal_matches_quadrature(mix_family):
    rng = np.random.default_rng(6)
    s = mix_family.sample(15_000, rng)
    # compare coordinate histogram to the computed first marginal
    hist, edges = np.histogram(s[:, 0], bins=40, range=(-6, 6), density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    dens = mix_family.marginal1(centers)
    assert np.max(np.abs(hist - dens)) < 0.03


def test_sampler_coordinates_exchangeable(mix_family):
    rng = np.random.default_rng(7)
    s = mix_family.sample(15_000, rng)
    # second moments agree across positions (first, middle, last)
    m = np.mean(s * s, axis=0)
    assert abs(m[0] - m[15]) < 0.08
    assert abs(m[0] - m[31]) < 0.08


def test_monte_carlo_agrees_small_sample():
    fam = ConditionedFamily(mixture(0.3), 8)
    rng = np.random.default_rng(8)
    h_mc = fam.entropy_monte_carlo(40_000, rng)
    assert h_mc == pytest.approx(fam.entropy(), rel=0.05)


def test_angle_grid():
    g = AngleGrid(8)
    assert g.nodes().size == 8
    assert g.weight * 8 == pytest.approx(2 * np.pi)


def test_rejects_tiny_n():
    with pytest.raises(ValueError):
        ConditionedFamily(gaussian(1.0), 2)
