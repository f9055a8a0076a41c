"""Exact finite-support operators and the variance decomposition."""

import math

import numpy as np
import pytest

from clt_spectra import (
    DiscretePMF,
    component_cross_moment,
    convolve_pmf,
    efron_stein,
    exact_operator,
    exact_spectrum,
    exact_theta,
    pmf_power,
    projection_inequality,
)

UNIFORM3 = DiscretePMF((0.0, 1.0, 2.0), (0.25, 0.5, 0.25))
EQUAL3 = DiscretePMF((0.0, 1.0, 2.0), (1 / 3, 1 / 3, 1 / 3))
SKEW3 = DiscretePMF((0.0, 1.0, 3.0), (0.5, 0.3, 0.2))
SIDON4 = DiscretePMF((0.0, 1.0, 2.5, 4.0), (0.28, 0.16, 0.31, 0.25))


def test_pmf_validation():
    with pytest.raises(ValueError):
        DiscretePMF((0.0, 1.0), (0.7, 0.7))
    with pytest.raises(ValueError):
        DiscretePMF((0.0, 0.0), (0.5, 0.5))


def test_pmf_power_binomial():
    p2 = pmf_power(DiscretePMF((0.0, 1.0), (0.5, 0.5)), 2)
    atoms, probs = p2.arrays()
    np.testing.assert_allclose(atoms, [0.0, 1.0, 2.0])
    np.testing.assert_allclose(probs, [0.25, 0.5, 0.25], atol=1e-15)


def test_convolve_pmf_merges_colliding_sums():
    p = DiscretePMF((0.0, 1.0), (0.5, 0.5))
    q = DiscretePMF((0.0, 1.0, 2.0), (0.25, 0.5, 0.25))
    r = convolve_pmf(p, q)
    atoms, probs = r.arrays()
    assert len(atoms) == 4
    assert abs(probs.sum() - 1.0) <= 1e-15


def test_equal_weight_gram_closed_form():
    """Hand-checkable 3x3 operator for uniform weights on {0,1,2}, n=2."""
    op = exact_operator(EQUAL3, 2, 1)
    target = np.array([[11.0, 5.0, 2.0], [5.0, 8.0, 5.0], [2.0, 5.0, 11.0]]) / 18.0
    assert np.abs(op.B @ op.B.T - target).max() <= 1e-14


def test_equal_weight_eigenvalues():
    sp = exact_spectrum(EQUAL3, 2)
    np.testing.assert_allclose(sp.eigenvalues, [1.0, 0.5, 1.0 / 6.0], atol=1e-12)


def test_equal_weight_theta():
    assert abs(exact_theta(EQUAL3, 2).theta - 2.0) <= 1e-12
    assert exact_theta(EQUAL3, 3).theta >= 4.0 - 1e-12


@pytest.mark.parametrize("pmf", [EQUAL3, UNIFORM3, SKEW3], ids=["equal3", "uniform3", "skew3"])
@pytest.mark.parametrize("nm", [(2, 1), (3, 1), (3, 2)])
def test_exact_dks_eigenvalue(pmf, nm):
    n, m = nm
    sp = exact_spectrum(pmf, n, m)
    assert abs(sp.eigenvalues[1] - m / n) <= 1e-12


def test_two_atom_sentinel():
    """Two atoms leave no room beyond constants and linears: theta is inf."""
    th = exact_theta(DiscretePMF((-1.0, 1.0), (0.5, 0.5)), 2)
    assert math.isinf(th.theta)
    assert th.lambda2 == 0.0


def test_sidon_degeneracy():
    """Atoms with collision-free pairwise sums pin an eigenspace at m/n.

    Conditioned on S_2 = u + v with u != v the summand is uniform on {u, v}
    whatever the weights are, so lambda_2 = m/n exactly, the eigenvalue has
    multiplicity 2 and theta collapses to 0.
    """
    sp = exact_spectrum(SIDON4, 2, 1)
    count = int(np.sum(np.abs(sp.eigenvalues - 0.5) <= 1e-12))
    assert count == 2
    th = exact_theta(SIDON4, 2)
    assert abs(th.theta) <= 1e-12
    assert abs(th.lambda2 - 0.5) <= 1e-12


def test_exact_adjointness():
    op = exact_operator(SKEW3, 3, 2)
    _, probs_n = op.total.arrays()
    _, probs_m = op.summand.arrays()
    rng = np.random.default_rng(42)
    for _ in range(5):
        f = rng.standard_normal(op.C.shape[1])
        g = rng.standard_normal(op.C.shape[0])
        lhs = float((op.C @ f * g) @ probs_n)
        rhs = float((f * (op.Cstar @ g)) @ probs_m)
        assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(lhs))


def _poly_h(p, k):
    atoms, _ = pmf_power(p, k).arrays()
    h = atoms**3 - 2.0 * atoms**2 + atoms + 0.5 * np.sin(atoms)
    return h / np.abs(h).max()


@pytest.mark.parametrize("pmf", [EQUAL3, UNIFORM3, SKEW3], ids=["equal3", "uniform3", "skew3"])
@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_variance_identity(pmf, k):
    """Var h(S_k) = sum_r C(k,r) E h_r^2 with machine-precision residual."""
    dec = efron_stein(_poly_h(pmf, k), pmf, k)
    assert abs(dec.identity_residual) <= 1e-12


def test_component_orthogonality():
    """Components of different order, or with different argument sets, are uncorrelated."""
    dec = efron_stein(_poly_h(UNIFORM3, 3), UNIFORM3, 3)
    assert abs(component_cross_moment(dec, UNIFORM3, 1, 2, (0,), (0, 1))) <= 1e-12
    assert abs(component_cross_moment(dec, UNIFORM3, 1, 1, (0,), (1,))) <= 1e-12
    assert abs(component_cross_moment(dec, UNIFORM3, 2, 3, (0, 1), (0, 1, 2))) <= 1e-12


def test_quadratic_statistic_truncates():
    """(S_3 - E S_3)^2 has no order-3 interaction component."""
    atoms, _ = pmf_power(UNIFORM3, 3).arrays()
    mu = sum(a * w for a, w in zip(*UNIFORM3.arrays()))
    dec = efron_stein((atoms - 3 * mu) ** 2, UNIFORM3, 3)
    assert dec.component_sq[3] <= 1e-12


def test_projection_bound_random_h():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(50):
        h = rng.standard_normal(len(pmf_power(UNIFORM3, 3).atoms))
        lhs, rhs = projection_inequality(h, UNIFORM3, 3, 2)
        worst = min(worst, lhs - rhs)
    assert worst >= -1e-12


def test_projection_equality_quadratic():
    """Quadratic h saturates the projection bound at l = 2."""
    atoms, _ = pmf_power(UNIFORM3, 3).arrays()
    mu = sum(a * w for a, w in zip(*UNIFORM3.arrays()))
    h = (atoms - 3 * mu) ** 2
    lhs, rhs = projection_inequality(h, UNIFORM3, 3, 2)
    assert abs(lhs - rhs) <= 1e-12
