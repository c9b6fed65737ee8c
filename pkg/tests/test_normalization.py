"""Convolution ladders, normalization-function queries, CLT envelopes."""

import numpy as np
import pytest

from kaclab.densities import gaussian, mixture
from kaclab.errors import ConfigurationError
from kaclab.normalization import (NormalizationLadder, clt_envelope,
                                  clt_envelope_ndependent, clt_leading_log,
                                  lambda_profile, schedule_delta,
                                  sigma_squared)


@pytest.fixture(scope="module")
def gauss_ladder():
    return NormalizationLadder(gaussian(1.0), 32, n_grid=2**15)


@pytest.fixture(scope="module")
def mix_ladder():
    return NormalizationLadder(mixture(0.25), 64, n_grid=2**15)


def test_sigma_squared_closed_forms():
    assert sigma_squared(gaussian(1.0)) == pytest.approx(2.0, rel=1e-6)
    # mixture: int v^4 f - 1 = 3/(4 d (1-d)) - 1
    assert sigma_squared(mixture(0.25)) == pytest.approx(3.0 / 0.75 - 1.0,
                                                        rel=1e-6)


def test_gaussian_partition_closed_form(gauss_ladder):
    # Z_n(M, r) = (2 pi)^{-n/2} exp(-r^2 / 2)
    for n in (2, 4, 8, 16, 32):
        for u in (0.5 * n, 1.0 * n, 1.5 * n):
            exact = -0.5 * n * np.log(2.0 * np.pi) - 0.5 * u
            assert float(gauss_ladder.log_z(n, u)) == pytest.approx(
                exact, abs=2e-4)


def test_level_density_is_chi_square(gauss_ladder):
    # h^{*n} for the Gaussian is the chi-square density with n dof
    from scipy.stats import chi2
    n = 8
    u = np.array([2.0, 8.0, 15.0])
    got = np.exp(gauss_ladder.log_density(n, u))
    assert np.allclose(got, chi2.pdf(u, n), rtol=5e-4)


def test_levels_conserve_mass_and_mean(mix_ladder):
    for n in (1, 2, 16, 64):
        assert mix_ladder.mass(n) == pytest.approx(1.0, abs=1e-6)
        assert mix_ladder.mean(n) == pytest.approx(float(n), rel=1e-4)


def test_binary_decomposition_matches_sequential():
    f = mixture(0.3)
    a = NormalizationLadder(f, 12)
    b = NormalizationLadder(f, 12)
    b.build_all(12)
    la, lb = a.level(12), b.level(12)
    assert np.allclose(la, lb, rtol=1e-9, atol=1e-12 * la.max())


def test_log_z_ratio_consistency(mix_ladder):
    direct = (float(mix_ladder.log_z(63, 60.0))
              - float(mix_ladder.log_z(64, 64.0)))
    via_ratio = float(mix_ladder.log_z_ratio(63, 60.0, 64, 64.0))
    assert via_ratio == pytest.approx(direct, abs=1e-10)


def test_truncated_grid_rejected():
    with pytest.raises(ConfigurationError):
        NormalizationLadder(gaussian(1.0), 32, u_max=10.0)


def test_out_of_range_query(mix_ladder):
    with pytest.raises(ValueError):
        mix_ladder.log_density(4, mix_ladder.u_max + 1.0)


def test_clt_leading_term_near_center(gauss_ladder):
    # at u = n the Gaussian leading term dominates the exact value
    n = 32
    lead = float(clt_leading_log(2.0, n, float(n)))
    exact = float(gauss_ladder.log_z(n, float(n)))
    assert lead == pytest.approx(exact, abs=0.05)


def test_lambda_profile_decays(mix_ladder):
    sups = [float(np.max(np.abs(lambda_profile(mix_ladder, n)[1])))
            for n in (16, 32, 64)]
    assert sups[0] > sups[1] > sups[2]


def test_clt_envelope_rows(mix_ladder):
    env = clt_envelope(mix_ladder, [16, 64])
    rows = env.rows()
    assert [r[0] for r in rows] == [16, 64]
    assert rows[0][2] > rows[1][2] > 0


def test_schedule_delta():
    assert schedule_delta(0.1, 100) == pytest.approx(100.0 ** (-0.8))


def test_ndependent_envelope_validation():
    with pytest.raises(ValueError):
        clt_envelope_ndependent(0.3, [16], 0)
    with pytest.raises(ValueError):
        clt_envelope_ndependent(0.1, [16], 5)


def test_ndependent_envelope_shrinks():
    rows = clt_envelope_ndependent(0.15, [64, 256], 0, n_grid=2**14)
    assert rows[0][2] > rows[1][2]
