"""Exact finite-support counterpart of the grid operators.

For a pmf with a handful of atoms everything is small dense linear algebra:
sum supports come from exact convolution with atom coalescing, the operator
matrices are ratios of pmf values, and eigenvalues are exact to rounding.
This module is the oracle the grid pipeline is validated against, and it also
hosts the Efron-Stein (ANOVA) decomposition of functions of a sum.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
from numpy.typing import NDArray

from .densities import DistributionSpec
from .operators import SpectrumResult, ThetaResult, classify_trivial, theta_from_spectrum

__all__ = [
    "DiscretePMF",
    "ExactOperator",
    "ESDecomposition",
    "convolve_pmf",
    "pmf_power",
    "exact_operator",
    "exact_spectrum",
    "exact_theta",
    "efron_stein",
    "component_cross_moment",
    "projection_inequality",
]

ATOM_TOL = 1e-12  # coalescing tolerance for sum supports
SUPPORT_CAP = 20000
PRODUCT_SPACE_CAP = 10_000_000


@dataclass(frozen=True)
class DiscretePMF:
    atoms: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.probs) or not self.atoms:
            raise ValueError("atoms and probs must be nonempty and equal length")
        a = np.asarray(self.atoms, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if (np.diff(a) <= ATOM_TOL).any():
            raise ValueError("atoms must be ascending and separated by more than the coalescing tolerance")
        if (p <= 0).any():
            raise ValueError("probabilities must be positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1 within 1e-12")

    @classmethod
    def from_spec(cls, spec: DistributionSpec) -> "DiscretePMF":
        if spec.family != "discrete":
            raise ValueError(f"expected a discrete spec, got {spec.family!r}")
        a = np.asarray(spec.params["atoms"], dtype=float)
        p = np.asarray(spec.params["probs"], dtype=float)
        p = p / p.sum()
        order = np.argsort(a)
        return cls(tuple(a[order]), tuple(p[order]))

    def arrays(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return np.asarray(self.atoms, dtype=float), np.asarray(self.probs, dtype=float)

    def mean(self) -> float:
        a, p = self.arrays()
        return float(p @ a)

    def variance(self) -> float:
        a, p = self.arrays()
        mu = p @ a
        return float(p @ (a - mu) ** 2)


def _coalesce(atoms: NDArray[np.float64], probs: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    order = np.argsort(atoms, kind="stable")
    a, p = atoms[order], probs[order]
    keep_a = [a[0]]
    keep_p = [p[0]]
    for x, q in zip(a[1:], p[1:]):
        if x - keep_a[-1] <= ATOM_TOL:
            keep_p[-1] += q
        else:
            keep_a.append(x)
            keep_p.append(q)
    return np.asarray(keep_a), np.asarray(keep_p)


def convolve_pmf(p: DiscretePMF, q: DiscretePMF) -> DiscretePMF:
    ap, pp = p.arrays()
    aq, pq = q.arrays()
    if len(ap) * len(aq) > SUPPORT_CAP * 64:
        raise ValueError("support overflow during convolution")
    atoms = (ap[:, None] + aq[None, :]).ravel()
    probs = (pp[:, None] * pq[None, :]).ravel()
    a, pr = _coalesce(atoms, probs)
    if len(a) > SUPPORT_CAP:
        raise ValueError(f"support overflow: {len(a)} atoms (cap {SUPPORT_CAP})")
    return DiscretePMF(tuple(a), tuple(pr / pr.sum()))


def pmf_power(p: DiscretePMF, n: int) -> DiscretePMF:
    """Law of the n-fold i.i.d. sum; n = 0 gives the point mass at 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return DiscretePMF((0.0,), (1.0,))
    out = p
    for _ in range(n - 1):
        out = convolve_pmf(out, p)
    return out


def _lookup(support: NDArray[np.float64], values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Indices of ``values`` in a sorted support, -1 where absent (tolerance ATOM_TOL)."""
    idx = np.searchsorted(support, values - ATOM_TOL)
    idx = np.clip(idx, 0, len(support) - 1)
    hit = np.abs(support[idx] - values) <= ATOM_TOL
    return np.where(hit, idx, -1)


@dataclass
class ExactOperator:
    summand: DiscretePMF  # S_m
    total: DiscretePMF  # S_n
    partial: DiscretePMF  # S_{n-m}
    n: int
    m: int
    C: NDArray[np.float64]  # (|S_n|, |S_m|): forward conditional expectation
    Cstar: NDArray[np.float64]  # (|S_m|, |S_n|): adjoint
    B: NDArray[np.float64]  # symmetrizing factor, gram = B B^T


def exact_operator(p: DiscretePMF, n: int, m: int = 1) -> ExactOperator:
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got (n, m) = ({n}, {m})")
    pm = pmf_power(p, m)
    pt = pmf_power(p, n - m)
    pn = convolve_pmf(pm, pt)
    ay, qy = pm.arrays()
    at, qt = pt.arrays()
    an, qn = pn.arrays()
    # table[i, k] = P(S_{n-m} = s_k - y_i)
    diffs = an[None, :] - ay[:, None]
    idx = _lookup(at, diffs.ravel()).reshape(diffs.shape)
    table = np.where(idx >= 0, qt[np.clip(idx, 0, len(at) - 1)], 0.0)
    C = (table * qy[:, None]).T / qn[:, None]  # (ns, ny)
    Cstar = table  # (ny, ns)
    B = np.sqrt(qy)[:, None] * table / np.sqrt(qn)[None, :]
    return ExactOperator(summand=pm, total=pn, partial=pt, n=n, m=m, C=C, Cstar=Cstar, B=B)


def exact_spectrum(p: DiscretePMF, n: int, m: int = 1, top: int = 8) -> SpectrumResult:
    """Eigen-decomposition of the exact C*C on the S_m support."""
    op = exact_operator(p, n, m)
    S = op.B @ op.B.T
    S = 0.5 * (S + S.T)
    lam, phi = np.linalg.eigh(S)
    lam = lam[::-1]
    phi = np.ascontiguousarray(phi[:, ::-1])
    clamp = max(0.0, float(-lam.min()), float(lam.max() - 1.0))
    lam = np.clip(lam, 0.0, 1.0)

    ay, qy = op.summand.arrays()
    mu = float(qy @ ay)
    e_const = np.sqrt(qy)
    e_const /= np.linalg.norm(e_const)
    if len(ay) >= 2:
        e_lin = np.sqrt(qy) * (ay - mu)
        e_lin /= np.linalg.norm(e_lin)
        i_const, i_lin, c_corr, l_corr = classify_trivial(lam, phi, e_const, e_lin)
    else:
        i_const = max(range(len(lam)), key=lambda k: abs(float(phi[:, k] @ e_const)))
        c_corr = abs(float(phi[:, i_const] @ e_const))
        i_lin, l_corr = i_const, 0.0
        if c_corr < 0.99:
            raise ValueError(f"trivial-mode classification failed (const {c_corr:.4f})")

    top = min(top, len(lam))
    funcs = (phi[:, :top] / np.sqrt(qy)[:, None]).T
    return SpectrumResult(
        eigenvalues=lam,
        singular_values=np.sqrt(lam),
        eigenfunctions=funcs,
        y_nodes=ay,
        trivial_indices=(i_const, i_lin),
        const_corr=c_corr,
        lin_corr=l_corr,
        clamp_magnitude=clamp,
        n=n,
        m=m,
    )


def exact_theta(p: DiscretePMF, n: int, m: int = 1) -> ThetaResult:
    """Exact theta; +inf sentinel when the S_m support has no third mode."""
    spec = exact_spectrum(p, n, m)
    return theta_from_spectrum(spec, extra_diagnostics={"support_size": len(spec.y_nodes)})


# ---------------------------------------------------------------------------
# Efron-Stein / ANOVA decomposition of h(S_k)


@dataclass
class ESDecomposition:
    """Orthogonal decomposition h(S_k) - E h = sum over subsets of h_|T|.

    components[r] is the canonical order-r component on the product grid,
    shape (d,)*r with d the summand support size. component_sq[r] is
    E h_r(Y_1..Y_r)^2. The variance identity reads

        E (h(S_k) - E h)^2 = sum_r C(k, r) * component_sq[r].
    """

    k: int
    mean_shift: float
    total_second_moment: float
    components: dict[int, NDArray[np.float64]]
    component_sq: dict[int, float]
    identity_residual: float


def _conditional_tables(h: NDArray[np.float64], p: DiscretePMF, k: int) -> list[NDArray[np.float64]]:
    """g_t over the S_t support, g_t(v) = E h(v + S_{k-t}), for t = 0..k."""
    powers = [pmf_power(p, t) for t in range(k + 1)]
    a_k, _ = powers[k].arrays()
    if len(h) != len(a_k):
        raise ValueError(f"h must be tabulated on the S_{k} support ({len(a_k)} atoms, got {len(h)})")
    tables = []
    for t in range(k + 1):
        at, _ = powers[t].arrays()
        ar, pr = powers[k - t].arrays()
        sums = at[:, None] + ar[None, :]
        idx = _lookup(a_k, sums.ravel()).reshape(sums.shape)
        if (idx < 0).any():
            raise ValueError("sum support mismatch; atom coalescing produced an inconsistent lattice")
        tables.append((h[idx] * pr[None, :]).sum(axis=1))
    return tables


def efron_stein(h: NDArray[np.float64], p: DiscretePMF, k: int) -> ESDecomposition:
    """Decompose h(S_k) into orthogonal interaction orders.

    h is a value table on the S_k support. It is centered internally (the
    subtracted mean is recorded); components of order >= 1 are unaffected by
    centering. Components are built by inclusion-exclusion over conditioning
    subsets: every conditional expectation of h(S_k) given a subset of the
    summands is a function of that subset's partial sum alone, which is what
    makes the table route exact.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    a, prob = p.arrays()
    d = len(a)
    if d**k > PRODUCT_SPACE_CAP:
        raise ValueError(f"product space {d}^{k} exceeds cap {PRODUCT_SPACE_CAP}")
    h = np.asarray(h, dtype=float)
    g = _conditional_tables(h, p, k)
    mean = float(g[0][0])
    g = [gt - mean for gt in g]
    h_cent = h - mean

    powers = [pmf_power(p, t) for t in range(k + 1)]
    components: dict[int, NDArray[np.float64]] = {}
    component_sq: dict[int, float] = {}
    for r in range(1, k + 1):
        comp = np.zeros((d,) * r)
        # atom value along each tensor axis
        axes = [a.reshape((1,) * i + (d,) + (1,) * (r - i - 1)) for i in range(r)]
        for t in range(r + 1):
            sign = (-1) ** (r - t)
            for subset in combinations(range(r), t):
                s = np.zeros((1,) * r)
                for i in subset:
                    s = s + axes[i]
                at, _ = powers[t].arrays()
                idx = _lookup(at, s.ravel()).reshape(s.shape)
                if (idx < 0).any():
                    raise ValueError("partial sum missing from coalesced support")
                comp = comp + sign * np.broadcast_to(g[t][idx], (d,) * r)
        components[r] = comp
        weight = np.ones((1,) * r)
        for i in range(r):
            weight = weight * prob.reshape((1,) * i + (d,) + (1,) * (r - i - 1))
        component_sq[r] = float((weight * comp * comp).sum())
        if r >= 2:
            # exchangeability of the components follows from h being a
            # function of the sum; checked, not assumed
            if not np.allclose(comp, np.swapaxes(comp, 0, 1), atol=1e-10):
                raise AssertionError("order component is not symmetric in its arguments")

    _, pk = powers[k].arrays()
    total = float(pk @ h_cent**2)
    ssum = sum(comb(k, r) * component_sq[r] for r in range(1, k + 1))
    return ESDecomposition(
        k=k,
        mean_shift=mean,
        total_second_moment=total,
        components=components,
        component_sq=component_sq,
        identity_residual=total - ssum,
    )


def component_cross_moment(
    dec: ESDecomposition,
    p: DiscretePMF,
    r: int,
    t: int,
    args_r: tuple[int, ...],
    args_t: tuple[int, ...],
) -> float:
    """E[h_r(Y_{args_r}) * h_t(Y_{args_t})] over the joint product space.

    args name coordinate slots; distinct subsets (or distinct orders) must
    give 0 by ANOVA orthogonality.
    """
    if len(args_r) != r or len(args_t) != t:
        raise ValueError("argument tuples must match component orders")
    slots = sorted(set(args_r) | set(args_t))
    u = len(slots)
    a, prob = p.arrays()
    d = len(a)
    if d**u > PRODUCT_SPACE_CAP:
        raise ValueError("cross-moment product space too large")
    pos = {s: i for i, s in enumerate(slots)}
    grids = np.meshgrid(*([np.arange(d)] * u), indexing="ij")
    comp_r = dec.components[r][tuple(grids[pos[s]] for s in args_r)]
    comp_t = dec.components[t][tuple(grids[pos[s]] for s in args_t)]
    weight = np.ones((1,) * u)
    for i in range(u):
        weight = weight * prob.reshape((1,) * i + (d,) + (1,) * (u - i - 1))
    return float((weight * comp_r * comp_t).sum())


def projection_inequality(h: NDArray[np.float64], p: DiscretePMF, k: int, l: int) -> tuple[float, float]:
    """Second-moment lower bound for h(S_k) from its projection onto S_l.

    Returns (lhs, rhs) with

        lhs = E (h(S_k) - Eh)^2
        rhs = k E h1^2 + [k(k-1) / (l(l-1))] (E hhat(S_l)^2 - l E h1^2)

    where h1(u) = E h(u + S_{k-1}) - Eh and hhat(v) = E h(v + S_{k-l}) - Eh.
    lhs >= rhs always; equality holds whenever h has no interaction orders
    above 2 (in particular for quadratic h) at l = 2.
    """
    if not 2 <= l < k:
        raise ValueError(f"need 2 <= l < k, got (k, l) = ({k}, {l})")
    h = np.asarray(h, dtype=float)
    pk = pmf_power(p, k)
    ak, qk = pk.arrays()
    if len(h) != len(ak):
        raise ValueError("h must be tabulated on the S_k support")
    mean = float(qk @ h)
    hc = h - mean
    lhs = float(qk @ hc**2)

    a1, q1 = p.arrays()
    akm1, qkm1 = pmf_power(p, k - 1).arrays()
    sums = a1[:, None] + akm1[None, :]
    idx = _lookup(ak, sums.ravel()).reshape(sums.shape)
    h1 = (hc[idx] * qkm1[None, :]).sum(axis=1)
    e_h1_sq = float(q1 @ h1**2)

    al, ql = pmf_power(p, l).arrays()
    akl, qkl = pmf_power(p, k - l).arrays()
    sums2 = al[:, None] + akl[None, :]
    idx2 = _lookup(ak, sums2.ravel()).reshape(sums2.shape)
    hhat = (hc[idx2] * qkl[None, :]).sum(axis=1)
    e_hhat_sq = float(ql @ hhat**2)

    rhs = k * e_h1_sq + (k * (k - 1) / (l * (l - 1))) * (e_hhat_sq - l * e_h1_sq)
    return lhs, rhs
