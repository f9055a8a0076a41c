"""Conditional-expectation operators between a partial sum and the full sum.

For S_m = Y_1 + ... + Y_m and S_n the n-fold sum (m < n), the forward operator
is C f(s) = E[f(S_m) | S_n = s] and its adjoint is C* g(y) = E[g(S_n) | S_m = y].
Both are induced by the kernel ratio

    tau(y, s) = p_{S_{n-m}}(s - y) / p_{S_n}(s),

and the spectrum of C*C carries the structure of interest: eigenvalue 1 on
constants, m/n on linear functions (the Dembo-Kagan-Shepp identity), and the
next eigenvalue lambda_2 defines the gap statistic

    theta = m / (n * lambda_2) - 1 >= 0.

Everything is discretized on the shared lattice built by densities.convolve,
so s - y lands exactly on a node of the S_{n-m} grid and tau is a table
lookup. The eigenproblem is solved on the symmetrized Gram matrix
B B^T with B[i, k] = sqrt(w_i p_m(y_i)) tau(y_i, s_k) sqrt(w_k p_n(s_k)),
which is similar to the discretized C*C and keeps eigenvectors orthonormal in
the weighted inner product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .densities import GridConfig, GridDensity, GridFunction, convolve, convolve_self

__all__ = [
    "ConditionalKernel",
    "SpectrumResult",
    "ThetaResult",
    "TraceResult",
    "build_kernel",
    "classify_trivial",
    "gram_matrix",
    "spectrum",
    "theta",
    "theta_from_spectrum",
    "trace_T",
    "apply_C",
    "apply_Cstar",
]

# An eigenvalue this small cannot be distinguished from a rank deficiency;
# theta is reported as +inf past it.
LAMBDA2_SENTINEL = 1e-12

# Minimum weighted correlation for classifying an eigenvector as the constant
# or the linear trivial mode.
TRIVIAL_CORR_MIN = 0.99

# Eigenvalues closer than this are one degenerate cluster for classification;
# genuinely distinct neighboring modes sit orders of magnitude further apart.
CLUSTER_TOL = 1e-8


@dataclass
class ConditionalKernel:
    """Discretized kernel linking the S_m grid (rows) to the S_n grid (columns).

    ``table[i, k]`` holds p_{S_{n-m}}(s_k - y_i); tau is ``table / p_n`` where
    p_n is positive and 0 on masked columns.
    """

    summand: GridDensity  # law of S_m, the y-grid
    total: GridDensity  # law of S_n, the s-grid
    partial: GridDensity  # law of S_{n-m}
    n: int
    m: int
    table: NDArray[np.float64]
    B: NDArray[np.float64]
    live_cols: NDArray[np.bool_]
    row_sum_err: float
    masked_mass: float

    def tau(self) -> NDArray[np.float64]:
        """Materialize the kernel ratio (0 on masked columns)."""
        vs = self.total.values
        out = np.zeros_like(self.table)
        out[:, self.live_cols] = self.table[:, self.live_cols] / vs[self.live_cols]
        return out


@dataclass
class SpectrumResult:
    """Eigen-decomposition of the symmetrized C*C with trivial-mode labels."""

    eigenvalues: NDArray[np.float64]  # descending, clamped to [0, 1]
    singular_values: NDArray[np.float64]
    eigenfunctions: NDArray[np.float64]  # shape (top, Ny), weighted-orthonormal
    y_nodes: NDArray[np.float64]
    trivial_indices: tuple[int, int]  # (constant mode, linear mode)
    const_corr: float
    lin_corr: float
    clamp_magnitude: float
    n: int
    m: int


@dataclass
class ThetaResult:
    """The eigenvalue-gap statistic theta = m/(n lambda_2) - 1."""

    theta: float
    lambda2: float
    n: int
    m: int
    diagnostics: dict


@dataclass
class TraceResult:
    """Operator trace T = integral of p_m p_n tau^2 (= chi^2 divergence + 1)."""

    value: float
    chi2: float
    masked_mass: float
    lower_bound_only: bool


def build_kernel(base: GridDensity, n: int, m: int = 1, cfg: GridConfig | None = None) -> ConditionalKernel:
    """Assemble the kernel for the m-fold vs n-fold sums of ``base``.

    Requires 1 <= m < n. The s-grid is the full sumset lattice of the y-grid
    and the S_{n-m} grid, which guarantees every row of tau integrates to 1
    against p_n (up to the renormalization of the convolved factors).
    """
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got (n, m) = ({n}, {m})")
    cfg = cfg or GridConfig()
    p_m = convolve_self(base, m)
    p_t = convolve_self(base, n - m)
    p_n = convolve(p_m, p_t)

    ny, nt, ns = len(p_m.nodes), len(p_t.nodes), len(p_n.nodes)
    if ns != ny + nt - 1:
        raise ValueError("grid misalignment: s-grid must be the sumset of the y and partial grids")
    # table[i, k] = p_t[k - i], a Toeplitz layout from the shared lattice
    idx = np.arange(ns)[None, :] - np.arange(ny)[:, None]
    ok = (idx >= 0) & (idx < nt)
    table = np.where(ok, p_t.values[np.clip(idx, 0, nt - 1)], 0.0)

    wy = p_m.weights()
    ws = p_n.weights()
    live = p_n.values > cfg.density_floor
    inv_sqrt = np.zeros(ns)
    inv_sqrt[live] = np.sqrt(ws[live] / p_n.values[live])
    B = np.sqrt(wy * p_m.values)[:, None] * table * inv_sqrt[None, :]

    # Row-stochasticity on rows that carry weight: sum_k ws_k p_t(s_k - y_i) = 1
    row_sums = table @ ws
    weighted_rows = p_m.values > 0
    row_sum_err = float(np.abs(row_sums[weighted_rows] - 1.0).max()) if weighted_rows.any() else 0.0
    masked_mass = float((ws * p_n.values)[~live].sum())
    return ConditionalKernel(
        summand=p_m,
        total=p_n,
        partial=p_t,
        n=n,
        m=m,
        table=table,
        B=B,
        live_cols=live,
        row_sum_err=row_sum_err,
        masked_mass=masked_mass,
    )


def gram_matrix(kernel: ConditionalKernel) -> NDArray[np.float64]:
    """Symmetrized discretization of C*C (similar transform, same spectrum)."""
    S = kernel.B @ kernel.B.T
    return 0.5 * (S + S.T)


def classify_trivial(
    lam: NDArray[np.float64],
    phi: NDArray[np.float64],
    e_const: NDArray[np.float64],
    e_lin: NDArray[np.float64],
) -> tuple[int, int, float, float]:
    """Locate the constant and linear modes among the eigenvectors.

    The eigenvalue m/n can be exactly degenerate (pmfs whose off-diagonal
    sums never collide put a whole subspace at m/n), in which case eigh
    returns an arbitrary rotation of the eigenspace and no single vector
    aligns with the linear target. Eigenvalues are therefore grouped into
    near-equal clusters and the correlation is taken against the cluster's
    span; the reported index is the best-aligned member, the rest of the
    cluster stays non-trivial.

    ``lam`` must be descending, ``phi`` its eigenvector columns, the targets
    unit vectors in the symmetrized basis.
    """
    coef_const = phi.T @ e_const
    coef_lin = phi.T @ e_lin
    breaks = np.where(np.diff(lam) < -CLUSTER_TOL)[0]
    bounds = np.concatenate(([0], breaks + 1, [len(lam)]))
    clusters = [list(range(bounds[j], bounds[j + 1])) for j in range(len(bounds) - 1)]

    def pick(coef):
        best = max(clusters, key=lambda cl: float(np.sum(coef[cl] ** 2)))
        corr = float(np.sqrt(np.sum(coef[best] ** 2)))
        rep = max(best, key=lambda i: abs(float(coef[i])))
        return best, rep, corr

    cl_const, i_const, c_corr = pick(coef_const)
    cl_lin, i_lin, l_corr = pick(coef_lin)
    if i_const == i_lin:
        rest = [i for i in cl_lin if i != i_const]
        if not rest:
            raise ValueError("constant and linear modes collapsed onto one eigenvector")
        i_lin = max(rest, key=lambda i: abs(float(coef_lin[i])))
    if c_corr < TRIVIAL_CORR_MIN or l_corr < TRIVIAL_CORR_MIN:
        raise ValueError(
            f"trivial-mode classification failed: const corr {c_corr:.4f} at {i_const}, "
            f"linear corr {l_corr:.4f} at {i_lin}"
        )
    return i_const, i_lin, c_corr, l_corr


def spectrum(kernel: ConditionalKernel, top: int = 8) -> SpectrumResult:
    """Dense eigensolve of the Gram matrix with trivial-mode classification.

    Eigenvalues are clamped to [0, 1] (clamp magnitude reported). The top
    ``top`` eigenvectors are mapped back to eigenfunction values on the y-grid
    through the inverse weight transform; they are orthonormal under
    sum w_i p_m(y_i) f(y_i) g(y_i).
    """
    S = gram_matrix(kernel)
    lam, phi = np.linalg.eigh(S)
    lam = lam[::-1]
    phi = np.ascontiguousarray(phi[:, ::-1])
    clamp = max(0.0, float(-lam.min()), float(lam.max() - 1.0))
    lam = np.clip(lam, 0.0, 1.0)

    p_m = kernel.summand
    wvec = p_m.weights() * p_m.values
    mu = float(wvec @ p_m.nodes)
    e_const = np.sqrt(wvec)
    e_const /= np.linalg.norm(e_const)
    e_lin = np.sqrt(wvec) * (p_m.nodes - mu)
    e_lin /= np.linalg.norm(e_lin)

    i_const, i_lin, c_corr, l_corr = classify_trivial(lam, phi, e_const, e_lin)

    top = min(top, len(lam))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(wvec > 0, 1.0 / np.sqrt(np.where(wvec > 0, wvec, 1.0)), 0.0)
    funcs = (phi[:, :top] * inv[:, None]).T
    return SpectrumResult(
        eigenvalues=lam,
        singular_values=np.sqrt(lam),
        eigenfunctions=funcs,
        y_nodes=p_m.nodes,
        trivial_indices=(i_const, i_lin),
        const_corr=c_corr,
        lin_corr=l_corr,
        clamp_magnitude=clamp,
        n=kernel.n,
        m=kernel.m,
    )


def theta_from_spectrum(spec: SpectrumResult, extra_diagnostics: dict | None = None) -> ThetaResult:
    """Extract theta after removing the constant and linear modes by label, not rank."""
    skip = set(spec.trivial_indices)
    rest = [k for k in range(len(spec.eigenvalues)) if k not in skip]
    lam2 = float(spec.eigenvalues[rest[0]]) if rest else 0.0
    if lam2 <= LAMBDA2_SENTINEL:
        th = math.inf
    else:
        th = spec.m / (spec.n * lam2) - 1.0
    diag = {
        "lambda_head": [float(v) for v in spec.eigenvalues[: min(8, len(spec.eigenvalues))]],
        "const_corr": spec.const_corr,
        "lin_corr": spec.lin_corr,
        "clamp_magnitude": spec.clamp_magnitude,
        "trivial_indices": list(spec.trivial_indices),
    }
    if extra_diagnostics:
        diag.update(extra_diagnostics)
    return ThetaResult(theta=th, lambda2=lam2, n=spec.n, m=spec.m, diagnostics=diag)


def theta(base: GridDensity, n: int, m: int = 1, cfg: GridConfig | None = None, top: int = 8) -> ThetaResult:
    """End-to-end theta for the (n, m) pair built from a summand density."""
    kernel = build_kernel(base, n, m, cfg)
    spec = spectrum(kernel, top=top)
    return theta_from_spectrum(
        spec,
        extra_diagnostics={"row_sum_err": kernel.row_sum_err, "masked_mass": kernel.masked_mass},
    )


def trace_T(kernel: ConditionalKernel) -> TraceResult:
    """Quadrature trace of C*C; equals the Frobenius norm of the B factor.

    If masked columns carried visible p_n mass the quadrature undershoots and
    only a lower bound is claimed.
    """
    value = float((kernel.B * kernel.B).sum())
    lower_only = kernel.masked_mass > 1e-9
    return TraceResult(value=value, chi2=value - 1.0, masked_mass=kernel.masked_mass, lower_bound_only=lower_only)


def apply_C(kernel: ConditionalKernel, f: NDArray[np.float64] | GridFunction) -> GridFunction:
    """Forward map (C f)(s) = E[f(S_m) | S_n = s] on the s-grid.

    Invalid nodes of a GridFunction input are excluded from the quadrature;
    output validity marks the live s-columns.
    """
    if isinstance(f, GridFunction):
        fv = np.where(f.valid, f.values, 0.0)
    else:
        fv = np.asarray(f, dtype=float)
    if fv.shape != kernel.summand.nodes.shape:
        raise ValueError("f must be sampled on the kernel's y-grid")
    p_m = kernel.summand
    num = (p_m.weights() * p_m.values * fv) @ kernel.table
    out = np.zeros(len(kernel.total.nodes))
    live = kernel.live_cols
    out[live] = num[live] / kernel.total.values[live]
    return GridFunction(kernel.total.nodes, out, live.copy())


def apply_Cstar(kernel: ConditionalKernel, g: NDArray[np.float64] | GridFunction) -> GridFunction:
    """Adjoint map (C* g)(y) = E[g(S_n) | S_m = y] on the y-grid."""
    if isinstance(g, GridFunction):
        gv = np.where(g.valid, g.values, 0.0)
    else:
        gv = np.asarray(g, dtype=float)
    if gv.shape != kernel.total.nodes.shape:
        raise ValueError("g must be sampled on the kernel's s-grid")
    out = kernel.table @ (kernel.total.weights() * gv)
    return GridFunction(kernel.summand.nodes, out, np.ones(len(out), dtype=bool))
