"""Checkable inequality reports for the spectral and Fisher quantities.

Every bound is packaged as a BoundReport with an lhs, an rhs, a provenance
label on each side, and a normalized orientation: slack = rhs - lhs, pass
iff slack >= -tol. Report assembly across whole families lives in verify;
this module holds the individual formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.integrate import quad as _scipy_quad

from .densities import (
    DistributionSpec,
    GridConfig,
    GridDensity,
    MomentSet,
    build_density,
    convolve,
    convolve_self,
    jst,
)

__all__ = [
    "BoundReport",
    "MomentBoundParts",
    "SubgaussResult",
    "make_report",
    "fisher_upper_bound",
    "fisher_lower_bound",
    "theta_upper_from_sigma",
    "theta_moment_parts",
    "theta_moment_parts_quadrature",
    "theta_upper_from_moments",
    "theta_lower_from_poincare",
    "chain_lower",
    "monotonicity_sequence",
    "monotonicity_reports",
    "subgauss_chi2_bound",
    "gauss_chi2_closed",
    "gauss_chi2_quad",
    "eigen_tail_asymptote",
    "de_bruijn_rate",
    "de_bruijn_rate_quad",
]

_PROVENANCE = ("measured", "closed-form", "moment-formula")

# Relative growth of the pair expectation between the base and the widened
# quadrature window above which the integrand is treated as divergent.
SUBGAUSS_GROWTH_TOL = 1e-3


@dataclass(frozen=True)
class BoundReport:
    """One inequality instance, oriented so that pass means lhs <= rhs + tol."""

    name: str
    lhs: float
    rhs: float
    slack: float
    tol: float
    passed: bool
    lhs_kind: str
    rhs_kind: str
    n: int | None = None
    m: int | None = None
    context: dict = field(default_factory=dict)


def make_report(
    name: str,
    lhs: float,
    rhs: float,
    tol: float = 0.0,
    lhs_kind: str = "measured",
    rhs_kind: str = "closed-form",
    n: int | None = None,
    m: int | None = None,
    context: dict | None = None,
) -> BoundReport:
    if lhs_kind not in _PROVENANCE or rhs_kind not in _PROVENANCE:
        raise ValueError(f"provenance labels must be one of {_PROVENANCE}")
    if math.isinf(rhs) and math.isinf(lhs):
        slack = math.nan
        passed = False
    else:
        slack = rhs - lhs
        passed = slack >= -tol
    return BoundReport(
        name=name,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        tol=tol,
        passed=passed,
        lhs_kind=lhs_kind,
        rhs_kind=rhs_kind,
        n=n,
        m=m,
        context=dict(context or {}),
    )


def fisher_upper_bound(jst_un: float, jst_y: float, theta2: float, n: int, tol: float = 0.0, **ctx) -> BoundReport:
    """J_st of the n-fold sum against the 1/n-rate bound J_st(Y)/(1+theta2(n-1)).

    theta2 = 0 degenerates to the constant bound J_st(Y); n = 1 is the trivial
    self-comparison.
    """
    if theta2 < 0:
        raise ValueError("theta2 must be nonnegative")
    if n < 1:
        raise ValueError("n must be >= 1")
    rhs = jst_y / (1.0 + theta2 * (n - 1))
    return make_report(
        "fisher-upper", jst_un, rhs, tol=tol, lhs_kind="measured", rhs_kind="closed-form", n=n, context=ctx
    )


def fisher_lower_bound(jst_un: float, gamma3: float, sigma_stat: float, n: int, tol: float = 0.0, **ctx) -> BoundReport:
    """Skewness floor gamma3^2/(Sigma + 2(n-1)) <= J_st of the n-fold sum."""
    denom = sigma_stat + 2.0 * (n - 1)
    if denom == 0:
        raise ValueError("Sigma + 2(n-1) must be nonzero")
    lhs = gamma3 * gamma3 / denom
    return make_report(
        "fisher-lower", lhs, jst_un, tol=tol, lhs_kind="moment-formula", rhs_kind="measured", n=n, context=ctx
    )


def theta_upper_from_sigma(theta_n: float, sigma_stat: float, n: int = 2, tol: float = 0.0, **ctx) -> BoundReport:
    """theta against the fourth-moment ceiling 2(n-1)/Sigma (equality for
    gaussian and gamma at n = 2, strict slack for laws whose optimal test
    function is not quadratic)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rhs = math.inf if sigma_stat == 0 else 2.0 * (n - 1) / sigma_stat
    return make_report(
        "theta-sigma-upper", theta_n, rhs, tol=tol, lhs_kind="measured", rhs_kind="moment-formula", n=n, context=ctx
    )


@dataclass(frozen=True)
class MomentBoundParts:
    """Intermediate quantities of the order-k moment bound on theta at n = 2.

    The test function is h(s) = s^k - a s - M_k on the centered two-fold sum,
    with a = M_{k+1}/(2 sigma^2) killing the linear component and M_j the
    j-th central moment of the sum. e_u_sq is the second moment of the pure
    interaction part U = sum_l C(k,l) (Y1^l - m_l)(Y2^{k-l} - m_{k-l});
    e_cstar_h_sq is the one-variable projection's second moment obtained from
    the decomposition identity, e_cstar_h_sq_direct the same number from the
    projection's explicit polynomial coefficients. The bound is
    e_u_sq / (2 e_cstar_h_sq).
    """

    k: int
    a_coeff: float
    e_h_sq: float
    e_u_sq: float
    e_cstar_h_sq: float
    e_cstar_h_sq_direct: float
    bound: float
    source: str


def _parts_from_central_moments(m: list[float], k: int, source: str, e_h_sq_override: float | None = None) -> MomentBoundParts:
    # m[j] = j-th central moment of the summand, j = 0..2k (m[0]=1, m[1]=0)
    var = m[2]
    M = [sum(comb(j, i) * m[i] * m[j - i] for i in range(j + 1)) for j in range(2 * k + 1)]
    a = M[k + 1] / (2.0 * var)
    e_h_sq = M[2 * k] - M[k] ** 2 - M[k + 1] ** 2 / (2.0 * var)
    if e_h_sq_override is not None:
        e_h_sq = e_h_sq_override
    e_u_sq = 0.0
    for l in range(1, k):
        for j in range(1, k):
            e_u_sq += (
                comb(k, l)
                * comb(k, j)
                * (m[l + j] - m[l] * m[j])
                * (m[2 * k - l - j] - m[k - l] * m[k - j])
            )
    e_cstar = (e_h_sq - e_u_sq) / 2.0
    # projection polynomial phi(t) = sum_l C(k,l) m_{k-l} t^l - a t - M_k in
    # the centered variable t
    c = [comb(k, l) * m[k - l] for l in range(k + 1)]
    c[0] -= M[k]
    c[1] -= a
    e_cstar_direct = sum(c[l] * c[j] * m[l + j] for l in range(k + 1) for j in range(k + 1))
    scale = max(abs(e_h_sq), 1.0)
    if e_cstar <= 1e-12 * scale:
        raise ValueError("moment bound unavailable: degenerate projection (E(C*h)^2 <= 0)")
    return MomentBoundParts(
        k=k,
        a_coeff=a,
        e_h_sq=e_h_sq,
        e_u_sq=e_u_sq,
        e_cstar_h_sq=e_cstar,
        e_cstar_h_sq_direct=e_cstar_direct,
        bound=e_u_sq / (2.0 * e_cstar),
        source=source,
    )


def theta_moment_parts(moments: MomentSet, k: int) -> MomentBoundParts:
    """Order-k moment bound on theta at n = 2 from closed moment arithmetic.

    At k = 2 the bound collapses to 2/Sigma exactly. Requires central moments
    through order 2k.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(moments.central_moments) < 2 * k:
        raise ValueError(f"need central moments through order {2 * k}")
    m = [moments.central(j) for j in range(2 * k + 1)]
    return _parts_from_central_moments(m, k, "moment-formula")


def theta_moment_parts_quadrature(d: GridDensity, k: int) -> MomentBoundParts:
    """Same bound with every expectation taken by brute-force quadrature.

    E h(S_2)^2 is integrated directly against the convolved density rather
    than expanded in moments, so this route cross-checks the expansion
    constants independently.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    mu = d.mean()
    cent = d.nodes - mu
    wv = d.weights() * d.values
    m = [float(wv @ cent**j) for j in range(2 * k + 1)]
    var = m[2]
    p2 = convolve(d, d)
    s_cent = p2.nodes - 2.0 * mu
    M_k = sum(comb(k, i) * m[i] * m[k - i] for i in range(k + 1))
    M_k1 = sum(comb(k + 1, i) * m[i] * m[k + 1 - i] for i in range(k + 2))
    a = M_k1 / (2.0 * var)
    hv = s_cent**k - a * s_cent - M_k
    e_h_sq = float((p2.weights() * p2.values) @ hv**2)
    return _parts_from_central_moments(m, k, "measured", e_h_sq_override=e_h_sq)


def theta_upper_from_moments(theta2: float, moments: MomentSet, k: int, tol: float = 0.0, **ctx) -> BoundReport:
    parts = theta_moment_parts(moments, k)
    ctx = dict(ctx)
    ctx.update(
        {
            "k": k,
            "e_h_sq": parts.e_h_sq,
            "e_u_sq": parts.e_u_sq,
            "e_cstar_h_sq": parts.e_cstar_h_sq,
            "e_cstar_h_sq_direct": parts.e_cstar_h_sq_direct,
        }
    )
    return make_report(
        f"theta-moment-upper-k{k}",
        theta2,
        parts.bound,
        tol=tol,
        lhs_kind="measured",
        rhs_kind="moment-formula",
        n=2,
        context=ctx,
    )


def theta_lower_from_poincare(theta2: float, fisher_info: float, poincare_const: float, tol: float = 0.0, **ctx) -> BoundReport:
    """Spectral-gap floor 1/(2 J C_P) <= theta at n = 2.

    C_P is the Poincare constant of the summand law and must be supplied (or
    known in closed form, e.g. sigma^2 for a Gaussian); it is never estimated
    here. The product J * C_P is scale-invariant, as theta is.
    """
    if fisher_info <= 0 or poincare_const <= 0:
        raise ValueError("fisher_info and poincare_const must be positive")
    lhs = 1.0 / (2.0 * fisher_info * poincare_const)
    return make_report(
        "theta-poincare-lower", lhs, theta2, tol=tol, lhs_kind="closed-form", rhs_kind="measured", n=2, context=ctx
    )


def chain_lower(theta2: float, n: int, m: int) -> float:
    """Lower bound (1+(n-1) theta2)/(1+(m-1) theta2) - 1 on the (n, m) gap statistic."""
    if not n > m >= 2:
        raise ValueError(f"need n > m >= 2, got (n, m) = ({n}, {m})")
    if theta2 < 0:
        raise ValueError("theta2 must be nonnegative")
    return (1.0 + (n - 1) * theta2) / (1.0 + (m - 1) * theta2) - 1.0


def monotonicity_sequence(base: GridDensity, theta2: float, n_max: int) -> list[tuple[int, float]]:
    """The products a_n = (1 + (n-1) theta2) J_st(S_n) for n = 1..n_max.

    The sequence is non-increasing when theta2 is (a lower bound on) the true
    gap statistic; theta2 = 0 recovers plain monotonicity of standardized
    Fisher information.
    """
    if not 1 <= n_max <= 8:
        raise ValueError("n_max must lie in [1, 8]")
    out = []
    for n in range(1, n_max + 1):
        d_n = convolve_self(base, n)
        out.append((n, (1.0 + (n - 1) * theta2) * jst(d_n).value))
    return out


def monotonicity_reports(seq: list[tuple[int, float]], step_tol: float = 0.01) -> list[BoundReport]:
    """Per-step non-increase reports for a monotone product sequence.

    The tolerance is step_tol relative to the previous term plus a small
    absolute floor, so sequences that are identically zero up to grid noise
    (a Gaussian summand) do not fail on roundoff.
    """
    reports = []
    for (n0, a0), (n1, a1) in zip(seq, seq[1:]):
        reports.append(
            make_report(
                f"monotone-product-step-{n0}-{n1}",
                a1,
                a0,
                tol=step_tol * abs(a0) + 1e-6,
                lhs_kind="measured",
                rhs_kind="measured",
                n=n1,
                context={"a_prev": a0, "a_next": a1},
            )
        )
    return reports


@dataclass(frozen=True)
class SubgaussResult:
    """Regularized chi-square ceiling n/(n-1) E exp((X-X')^2 / ((n-1) delta^2)).

    divergent means the pair expectation kept growing when the quadrature
    window was widened (or the Monte Carlo estimate failed its split-half
    stability check): the reported value is then window-dependent and only
    the flag is meaningful.
    """

    value: float
    exp_factor: float
    t: float
    divergent: bool
    growth: float
    method: str


def _pair_expectation(d: GridDensity, t: float) -> float:
    wv = d.weights() * d.values
    x = d.nodes
    with np.errstate(over="ignore"):
        e = np.exp(t * (x[:, None] - x[None, :]) ** 2)
        return float(wv @ e @ wv)


def subgauss_chi2_bound(
    spec: DistributionSpec,
    delta: float,
    n: int,
    method: str = "quadrature",
    nodes: int = 2048,
    seed: int = 42,
    samples: int = 200_000,
) -> SubgaussResult:
    """Chi-square bound for the delta-regularized n-fold sum of the law spec.

    t = 1/((n-1) delta^2). Quadrature evaluates the double integral on the
    law's standard window and again on a 1.5x wider window; relative growth
    beyond SUBGAUSS_GROWTH_TOL flags divergence (for a Gaussian summand this
    trips exactly when 1 - 4 t sigma^2 <= 0). Bounded laws (discrete atoms,
    file-backed tables) cannot diverge and are integrated on their own
    support.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if delta <= 0:
        raise ValueError("delta must be positive")
    t = 1.0 / ((n - 1) * delta * delta)
    prefactor = n / (n - 1.0)

    if method == "quadrature":
        if spec.family == "discrete":
            atoms = np.asarray(spec.params["atoms"], dtype=float)
            probs = np.asarray(spec.params["probs"], dtype=float)
            probs = probs / probs.sum()
            e = float(probs @ np.exp(t * (atoms[:, None] - atoms[None, :]) ** 2) @ probs)
            return SubgaussResult(prefactor * e, e, t, False, 0.0, method)
        if spec.family == "file":
            d = build_density(spec, GridConfig(node_count=nodes))
            e = _pair_expectation(d, t)
            return SubgaussResult(prefactor * e, e, t, False, 0.0, method)
        base = build_density(spec, GridConfig(node_count=nodes, half_width_sigmas=12.0))
        wide = build_density(spec, GridConfig(node_count=int(nodes * 1.5), half_width_sigmas=18.0))
        e_base = _pair_expectation(base, t)
        e_wide = _pair_expectation(wide, t)
        if not math.isfinite(e_base) or not math.isfinite(e_wide):
            return SubgaussResult(math.inf, math.inf, t, True, math.inf, method)
        growth = e_wide / e_base - 1.0
        return SubgaussResult(prefactor * e_base, e_base, t, growth > SUBGAUSS_GROWTH_TOL, growth, method)

    if method == "mc":
        rng = np.random.default_rng(seed)
        xs = _sample_spec(spec, rng, samples)
        ys = _sample_spec(spec, rng, samples)
        with np.errstate(over="ignore"):
            vals = np.exp(t * (xs - ys) ** 2)
        half = float(vals[: samples // 2].mean())
        full = float(vals.mean())
        if not math.isfinite(full):
            return SubgaussResult(math.inf, math.inf, t, True, math.inf, method)
        growth = abs(full / half - 1.0) if half > 0 else math.inf
        return SubgaussResult(prefactor * full, full, t, growth > 0.5, growth, method)

    raise ValueError(f"method must be 'quadrature' or 'mc', got {method!r}")


def _sample_spec(spec: DistributionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    p = spec.params
    if spec.family == "gaussian":
        return rng.normal(0.0, float(p["sigma"]), size)
    if spec.family == "gamma":
        x = rng.gamma(float(p["beta"]), 1.0, size)
        return x - float(p["beta"]) if p.get("centered", True) else x
    if spec.family == "uniform":
        return rng.uniform(float(p["a"]), float(p["b"]), size)
    if spec.family == "discrete":
        atoms = np.asarray(p["atoms"], dtype=float)
        probs = np.asarray(p["probs"], dtype=float)
        return rng.choice(atoms, size=size, p=probs / probs.sum())
    if spec.family == "mixture":
        comps = p["components"]
        w = np.array([c[0] for c in comps])
        w = w / w.sum()
        idx = rng.choice(len(comps), size=size, p=w)
        mus = np.array([c[1] for c in comps])[idx]
        sigmas = np.array([c[2] for c in comps])[idx]
        return rng.normal(mus, sigmas)
    if spec.family == "file":
        d = build_density(spec)
        cdf = np.cumsum(d.weights() * d.values)
        cdf = cdf / cdf[-1]
        return np.interp(rng.uniform(0.0, 1.0, size), cdf, d.nodes)
    raise ValueError(f"cannot sample family {spec.family!r}")


def gauss_chi2_closed(x, y, rho: float, delta: float) -> float:
    """Chi-square divergence between two bivariate Gaussian smoothing kernels.

    The reference has independent coordinates with scale delta centered at y;
    the other has correlation rho and the same scale centered at x. Closed
    form: exp((x-y)^T R_rho (x-y) / ((1-rho^2) delta^2)) / (1-rho^2) - 1.
    """
    if not abs(rho) < 1:
        raise ValueError("need |rho| < 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    r = np.array([[1.0, rho], [rho, 1.0]])
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if d.shape != (2,):
        raise ValueError("x and y must be 2-vectors")
    q = float(d @ r @ d)
    return math.exp(q / ((1 - rho * rho) * delta * delta)) / (1 - rho * rho) - 1.0


def gauss_chi2_quad(x, y, rho: float, delta: float, nodes: int = 1200, width: float = 10.0) -> float:
    """The same divergence by 2-D trapezoid quadrature of integral f^2/g - 1."""
    if not abs(rho) < 1:
        raise ValueError("need |rho| < 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r_inv = np.linalg.inv(np.array([[1.0, rho], [rho, 1.0]]))
    det = 1 - rho * rho
    span = width * delta
    c0 = np.linspace(min(x[0], y[0]) - span, max(x[0], y[0]) + span, nodes)
    c1 = np.linspace(min(x[1], y[1]) - span, max(x[1], y[1]) + span, nodes)
    h0 = c0[1] - c0[0]
    h1 = c1[1] - c1[0]
    g0, g1 = np.meshgrid(c0, c1, indexing="ij")
    dx0 = g0 - x[0]
    dx1 = g1 - x[1]
    qf = (r_inv[0, 0] * dx0**2 + 2 * r_inv[0, 1] * dx0 * dx1 + r_inv[1, 1] * dx1**2) / delta**2
    f = np.exp(-qf / 2) / (2 * math.pi * delta**2 * math.sqrt(det))
    dy0 = g0 - y[0]
    dy1 = g1 - y[1]
    g = np.exp(-(dy0**2 + dy1**2) / (2 * delta**2)) / (2 * math.pi * delta**2)
    integrand = np.where(g > 0, f * f / np.maximum(g, 1e-300), 0.0)
    w0 = np.full(nodes, h0)
    w0[0] = w0[-1] = h0 / 2
    w1 = np.full(nodes, h1)
    w1[0] = w1[-1] = h1 / 2
    return float(w0 @ integrand @ w1) - 1.0


def eigen_tail_asymptote(var_x: float, delta: float) -> float:
    """Large-n ceiling 2 Var(X)/delta^2 on n times the second eigenvalue of the
    delta-regularized operator. Finite-n measurements are compared against it
    with slack reported, never asserted."""
    if var_x <= 0 or delta <= 0:
        raise ValueError("var_x and delta must be positive")
    return 2.0 * var_x / (delta * delta)


def de_bruijn_rate(c: float, d: float, n: int) -> float:
    """Closed form of the heat-flow integral behind the 1/n Fisher rate:

        integral_0^inf dt / ((1+t)(1+(n-1)(c+t d)))
            = log(c/d + 1/(d(n-1))) / (1 + (c-d)(n-1)),

    valid for c > d > 0, n >= 2 (partial fractions)."""
    _validate_rate_args(c, d, n)
    a = 1.0 + (n - 1) * c
    b = (n - 1) * d
    return math.log(a / b) / (a - b)


def de_bruijn_rate_quad(c: float, d: float, n: int) -> float:
    """The same integral by adaptive quadrature, for cross-checking."""
    _validate_rate_args(c, d, n)
    val, _ = _scipy_quad(lambda t: 1.0 / ((1.0 + t) * (1.0 + (n - 1) * (c + t * d))), 0.0, np.inf)
    return float(val)


def _validate_rate_args(c: float, d: float, n: int) -> None:
    if not c > d > 0:
        raise ValueError(f"need c > d > 0, got c = {c}, d = {d}")
    if n < 2:
        raise ValueError("n must be >= 2")
