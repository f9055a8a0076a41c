"""Conditional-expectation kernels: spectra, adjointness, trace, trivial modes."""

import numpy as np
import pytest

from clt_spectra import (
    DistributionSpec,
    GridConfig,
    apply_C,
    apply_Cstar,
    build_density,
    build_kernel,
    gram_matrix,
    spectrum,
    theta,
    theta_from_spectrum,
    trace_T,
)
from clt_spectra.operators import classify_trivial

CFG = GridConfig(node_count=1024)


def _gaussian_kernel(n=2, m=1, cfg=CFG):
    d = build_density(DistributionSpec.gaussian(1.0), cfg)
    return build_kernel(d, n, m, cfg)


def test_gaussian_spectrum_geometric():
    """Gaussian eigenvalues are n^-k; n=2 gives 1, 1/2, 1/4, ..."""
    sp = spectrum(_gaussian_kernel())
    expect = 2.0 ** -np.arange(5)
    rel = np.abs(sp.eigenvalues[:5] - expect) / expect
    assert rel.max() <= 1e-3


def test_dks_top_eigenvalue():
    """Largest eigenvalue after the constant is m/n (Dembo-Kagan-Shepp)."""
    for n, m in ((2, 1), (3, 1), (3, 2)):
        sp = spectrum(_gaussian_kernel(n, m))
        assert abs(sp.eigenvalues[1] - m / n) <= 1e-3


def test_trivial_modes_flagged():
    sp = spectrum(_gaussian_kernel())
    assert sp.trivial_indices == (0, 1)
    assert sp.const_corr >= 0.9999
    assert sp.lin_corr >= 0.9999


def test_theta_gaussian_values():
    d = build_density(DistributionSpec.gaussian(1.0), CFG)
    assert abs(theta(d, 2, 1, CFG).theta - 1.0) <= 0.02
    assert abs(theta(d, 3, 1, CFG).theta - 2.0) <= 0.06


def test_adjointness():
    """<C f, g>_{p_n} = <f, C* g>_{p_m} for random polynomial test functions."""
    kern = _gaussian_kernel()
    rng = np.random.default_rng(42)
    wn = kern.total.weights() * kern.total.values
    wm = kern.summand.weights() * kern.summand.values
    for _ in range(10):
        cf = rng.standard_normal(3)
        cg = rng.standard_normal(3)
        f = np.polyval(cf, kern.summand.nodes / 2.0)
        g = np.polyval(cg, kern.total.nodes / 2.0)
        lhs = float((apply_C(kern, f).values * g) @ wn)
        rhs = float((apply_Cstar(kern, g).values * f) @ wm)
        assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(lhs))


def test_apply_c_preserves_constants():
    kern = _gaussian_kernel()
    out = apply_C(kern, np.ones_like(kern.summand.nodes))
    bulk = kern.total.values >= 1e-4 * kern.total.values.max()
    assert np.abs(out.values[bulk] - 1.0).max() <= 1e-8


def test_apply_c_contracts_linear():
    """The conditional mean of S_m given S_n = s is (m/n) s."""
    kern = _gaussian_kernel(3, 2)
    out = apply_C(kern, kern.summand.nodes)
    bulk = kern.total.values >= 1e-4 * kern.total.values.max()
    resid = out.values[bulk] - (2.0 / 3.0) * kern.total.nodes[bulk]
    assert np.abs(resid).max() <= 1e-6


def test_gram_matrix_symmetric_psd():
    g = gram_matrix(_gaussian_kernel())
    assert np.abs(g - g.T).max() <= 1e-12
    w = np.linalg.eigvalsh(g)
    assert w.min() >= -1e-10


def test_trace_gaussian():
    tr = trace_T(_gaussian_kernel())
    assert abs(tr.value - 2.0) <= 1e-3
    # T = 1 + chi2 by construction
    assert abs(tr.value - 1.0 - tr.chi2) <= 1e-12


def test_trace_matches_eigenvalue_sum():
    kern = _gaussian_kernel()
    tr = trace_T(kern)
    lam = np.linalg.eigvalsh(gram_matrix(kern))
    assert abs(tr.value - lam.sum()) <= 1e-8


def test_theta_from_spectrum_requires_nontrivial():
    sp = spectrum(_gaussian_kernel())
    th = theta_from_spectrum(sp)
    assert th.lambda2 < 0.5
    assert th.theta == pytest.approx(1.0, rel=0.02)


def test_classify_trivial_plain():
    lam = np.array([1.0, 0.5, 0.25, 0.125])
    e0 = np.array([1.0, 0.0, 0.0, 0.0])
    e1 = np.array([0.0, 1.0, 0.0, 0.0])
    phi = np.eye(4)
    i_const, i_lin, c_corr, l_corr = classify_trivial(lam, phi, e0, e1)
    assert (i_const, i_lin) == (0, 1)
    assert c_corr >= 0.9999 and l_corr >= 0.9999


def test_classify_trivial_degenerate_rotation():
    """A repeated eigenvalue lets the solver rotate the eigenbasis arbitrarily.

    The linear mode must still be recovered from inside the rotated cluster
    and the leftover cluster member must stay non-trivial.
    """
    lam = np.array([1.0, 0.5, 0.5, 0.125])
    e0 = np.array([1.0, 0.0, 0.0, 0.0])
    e1 = np.array([0.0, 1.0, 0.0, 0.0])
    c, s = np.cos(0.3), np.sin(0.3)
    phi = np.eye(4)
    phi[:, 1] = [0.0, c, s, 0.0]
    phi[:, 2] = [0.0, -s, c, 0.0]
    i_const, i_lin, c_corr, l_corr = classify_trivial(lam, phi, e0, e1)
    assert i_const == 0
    assert i_lin in (1, 2)
    assert l_corr >= 0.9999


def test_classify_trivial_rejects_garbage():
    lam = np.array([1.0, 0.5, 0.25])
    e0 = np.array([1.0, 0.0, 0.0])
    e1 = np.array([0.0, 1.0, 0.0])
    phi = np.array([[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.0, 0.8, -0.6]])
    with pytest.raises(ValueError):
        classify_trivial(lam, phi, e0, e1)


def test_kernel_row_sums():
    kern = _gaussian_kernel()
    assert kern.row_sum_err <= 1e-6
    assert kern.masked_mass <= 1e-8
