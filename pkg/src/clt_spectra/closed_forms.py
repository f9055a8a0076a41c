"""Analytic oracles for the two exactly solvable families.

For a Gaussian summand the operator eigenfunctions are Hermite polynomials
and the eigenvalues are n^-k; for a gamma summand they are generalized
Laguerre polynomials with eigenvalues given by a ratio of binomial
coefficients. Everything here is closed-form or a three-term recurrence; the
grid pipeline is tested against these values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

__all__ = [
    "PolyFamily",
    "hermite_value",
    "laguerre_value",
    "hermite_lambda",
    "laguerre_lambda",
    "closed_theta",
    "gamma_jst",
    "addition_check_hermite",
    "addition_check_laguerre",
]

MAX_ADDITION_DEGREE = 8


def hermite_value(k: int, x) -> NDArray[np.float64]:
    """Probabilists' Hermite polynomial He_k(x) by the three-term recurrence.

    He_0 = 1, He_1 = x, He_{j+1}(x) = x He_j(x) - j He_{j-1}(x). The
    recurrence is numerically stable for the degrees used here; coefficient
    expansion is deliberately avoided.
    """
    if k < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = x.copy()
    for j in range(1, k):
        prev, cur = cur, x * cur - j * prev
    return cur


def laguerre_value(k: int, alpha: float, x) -> NDArray[np.float64]:
    """Generalized Laguerre polynomial L_k^(alpha)(x) by recurrence."""
    if k < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = 1.0 + alpha - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


@dataclass(frozen=True)
class PolyFamily:
    """An orthonormal polynomial system with its weight density.

    kind "hermite" uses weight N(0, alpha) and e_k = He_k(x/sqrt(alpha)) /
    sqrt(k!); kind "laguerre" uses the Gamma(alpha+1) weight on (0, inf) and
    e_k = L_k^(alpha)(x) / sqrt(C(k+alpha, k)). Normalization constants are
    evaluated in log space so large degrees cannot overflow.
    """

    kind: str
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("hermite", "laguerre"):
            raise ValueError(f"kind must be 'hermite' or 'laguerre', got {self.kind!r}")
        if self.kind == "hermite" and self.alpha <= 0:
            raise ValueError("hermite variance parameter must be positive")
        if self.kind == "laguerre" and self.alpha <= -1:
            raise ValueError("laguerre order must exceed -1")

    def _log_norm_sq(self, k: int) -> float:
        if self.kind == "hermite":
            return float(gammaln(k + 1))
        return float(gammaln(k + self.alpha + 1) - gammaln(k + 1) - gammaln(self.alpha + 1))

    def orthonormal_value(self, k: int, x) -> NDArray[np.float64]:
        if self.kind == "hermite":
            raw = hermite_value(k, np.asarray(x, dtype=float) / math.sqrt(self.alpha))
        else:
            raw = laguerre_value(k, self.alpha, x)
        return raw * math.exp(-0.5 * self._log_norm_sq(k))

    def weight_pdf(self, x) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        if self.kind == "hermite":
            return np.exp(-x * x / (2 * self.alpha)) / math.sqrt(2 * math.pi * self.alpha)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(self.alpha * np.log(x[pos]) - x[pos] - gammaln(self.alpha + 1))
        return out

    def orthonormality_residual(self, kmax: int = 10, nodes: int = 2000) -> float:
        """max |<e_j, e_k> - delta_jk| over j, k <= kmax by Gauss-Legendre.

        The quadrature window covers the weight far past its effective
        support for the polynomial degrees involved, so residuals reflect the
        recurrence and normalization, not truncation.
        """
        t, w = np.polynomial.legendre.leggauss(nodes)
        if self.kind == "hermite":
            half = 12.0 * math.sqrt(self.alpha) + 2.0 * kmax
            x = t * half
            w = w * half
        else:
            upper = 60.0 + 15.0 * (self.alpha + 1) + 4.0 * kmax
            x = (t + 1.0) * (upper / 2.0)
            w = w * (upper / 2.0)
        pw = self.weight_pdf(x)
        vals = np.stack([self.orthonormal_value(k, x) for k in range(kmax + 1)])
        gram = (vals * pw * w) @ vals.T
        return float(np.abs(gram - np.eye(kmax + 1)).max())


def hermite_lambda(n: int, k: int) -> float:
    """Eigenvalue n^-k of the conditional-expectation composition, Gaussian case."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 0:
        raise ValueError("k must be >= 0")
    return float(n) ** (-k)


def laguerre_lambda(beta: float, n: int, k: int) -> float:
    """Eigenvalue C(k+beta-1, k) / C(k+beta*n-1, k) for a gamma(beta) summand.

    Evaluated as the product of (beta+j)/(beta*n+j) over j < k, which is the
    same ratio without large intermediate binomials.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 0:
        raise ValueError("k must be >= 0")
    out = 1.0
    for j in range(k):
        out *= (beta + j) / (beta * n + j)
    return out


def closed_theta(family: str, params: dict | None, n: int) -> float:
    """Closed-form gap statistic: n-1 for gaussian, beta(n-1)/(beta+1) for gamma."""
    if n < 2:
        raise ValueError("n must be >= 2")
    params = params or {}
    if family == "gaussian":
        return float(n - 1)
    if family == "gamma":
        beta = float(params["beta"])
        if beta <= 0:
            raise ValueError("beta must be positive")
        return beta * (n - 1) / (beta + 1)
    raise ValueError(f"no closed-form theta for family {family!r}")


def gamma_jst(beta: float) -> float:
    """Standardized Fisher information of a gamma(beta) variable: 2/(beta-2).

    Infinite for beta <= 2, where the inverse second moment of the density
    diverges; the sentinel is returned, not raised.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta <= 2:
        return math.inf
    return 2.0 / (beta - 2.0)


def addition_check_hermite(m: int, n: int, tau2: float, x: float, y: float) -> float:
    """Residual of the Hermite addition rule splitting a sum into 1 + (n-1) parts.

    He_m((x+y)/sqrt(n tau2)) is expanded as a binomial combination of
    He_{m-k}(x/sqrt(tau2)) and He_k(y/sqrt((n-1) tau2)) with weights
    C(m,k) ((n-1)/n)^{k/2} (1/n)^{(m-k)/2}; the absolute difference between
    the two sides is returned.
    """
    if not 0 <= m <= MAX_ADDITION_DEGREE:
        raise ValueError(f"degree must lie in [0, {MAX_ADDITION_DEGREE}]")
    if n < 2:
        raise ValueError("n must be >= 2")
    if tau2 <= 0:
        raise ValueError("tau2 must be positive")
    lhs = float(hermite_value(m, (x + y) / math.sqrt(n * tau2)))
    rhs = 0.0
    for k in range(m + 1):
        rhs += (
            math.comb(m, k)
            * ((n - 1) / n) ** (k / 2)
            * (1 / n) ** ((m - k) / 2)
            * float(hermite_value(m - k, x / math.sqrt(tau2)))
            * float(hermite_value(k, y / math.sqrt((n - 1) * tau2)))
        )
    return abs(lhs - rhs)


def addition_check_laguerre(m: int, alpha: float, beta: float, x: float, y: float) -> float:
    """Residual of L_m^(alpha+beta+1)(x+y) = sum_i L_i^(alpha)(x) L_{m-i}^(beta)(y)."""
    if not 0 <= m <= MAX_ADDITION_DEGREE:
        raise ValueError(f"degree must lie in [0, {MAX_ADDITION_DEGREE}]")
    lhs = float(laguerre_value(m, alpha + beta + 1.0, x + y))
    rhs = 0.0
    for i in range(m + 1):
        rhs += float(laguerre_value(i, alpha, x)) * float(laguerre_value(m - i, beta, y))
    return abs(lhs - rhs)
