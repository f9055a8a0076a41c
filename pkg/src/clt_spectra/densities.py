"""Grid representations of probability densities and their Fisher functionals.

Densities live on uniform grids with trapezoid quadrature. Sums of i.i.d.
copies are formed by FFT convolution on the shared lattice, which keeps every
derived grid (the summand grid, the partial-sum grid, the full-sum grid)
aligned so that kernel ratios later on are exact table lookups.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np
from numpy.typing import NDArray
from scipy.signal import fftconvolve
from scipy.special import gammaln

__all__ = [
    "GridConfig",
    "GridDensity",
    "GridFunction",
    "MomentSet",
    "DistributionSpec",
    "JstResult",
    "ScoreUndefinedError",
    "FisherUnavailableError",
    "parse_spec",
    "build_density",
    "moments",
    "score",
    "fisher",
    "jst",
    "convolve",
    "convolve_self",
    "rescale",
    "gaussian_regularize",
    "write_density_file",
]

# Relative level below which FFT convolution output is untrusted roundoff
# rather than signal; such entries are zeroed before renormalization.
FFT_NOISE_REL = 1e-15

# Score stencil guard: a centred log-density difference larger than this means
# the density varies by more than e^2 across one stencil and the finite
# difference is meaningless there.
SCORE_MAX_LOG_JUMP = 2.0

# Fisher eligibility: positive-window edge value above this fraction of the
# max indicates a support-boundary jump (J is infinite or undefined).
EDGE_JUMP_REL = 1e-2

# Fisher eligibility: mass carried by invalid-score nodes must stay below this.
INVALID_MASS_FRACTION = 1e-3

# Hard cap on convolution output length.
MAX_GRID_NODES = 1 << 17


class ScoreUndefinedError(ValueError):
    """Density has zeros strictly inside its positive window."""


class FisherUnavailableError(ValueError):
    """Density fails the smoothness screen for Fisher-information work."""


@dataclass(frozen=True)
class GridConfig:
    """Grid construction parameters.

    node_count
        Number of grid nodes for a freshly built density.
    half_width_sigmas
        Half-width of the grid in units of sigma * sqrt(n_hint) around the
        mean.
    mass_cutoff
        Maximum tolerated mass outside the grid before a warning is attached.
    density_floor
        Values at or below this are treated as exact zeros.
    """

    node_count: int = 1024
    half_width_sigmas: float = 12.0
    mass_cutoff: float = 1e-12
    density_floor: float = 1e-300

    def __post_init__(self) -> None:
        if self.node_count < 16:
            raise ValueError(f"node_count must be >= 16, got {self.node_count}")
        if not 0.0 < self.mass_cutoff < 1e-3:
            raise ValueError(f"mass_cutoff must lie in (0, 1e-3), got {self.mass_cutoff}")
        if self.half_width_sigmas <= 0:
            raise ValueError("half_width_sigmas must be positive")
        if self.density_floor <= 0:
            raise ValueError("density_floor must be positive")


@dataclass
class GridDensity:
    """A nonnegative, trapezoid-normalized density on a uniform grid.

    Attributes
    ----------
    nodes, values : ndarray
        Grid nodes (ascending, uniformly spaced) and density values.
    step : float
        Node spacing.
    truncated_mass : float
        Estimated mass lying outside the grid before normalization.
    clamped_mass : float
        Mass removed as FFT artifacts (negative lobes plus sub-noise tails).
    warnings : tuple of str
        Non-fatal diagnostics attached during construction.
    """

    nodes: NDArray[np.float64]
    values: NDArray[np.float64]
    step: float
    truncated_mass: float = 0.0
    clamped_mass: float = 0.0
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.shape != self.values.shape:
            raise ValueError("nodes and values must be 1-d arrays of equal length")
        if len(self.nodes) < 3:
            raise ValueError("grid needs at least 3 nodes")
        diffs = np.diff(self.nodes)
        if diffs.min() <= 0:
            raise ValueError("nodes must be strictly ascending")
        if np.abs(diffs - self.step).max() > 1e-9 * abs(self.step):
            raise ValueError("grid spacing is not uniform to 1e-9 relative")
        if self.values.min() < 0:
            raise ValueError("density values must be nonnegative")
        mass = float(self.weights() @ self.values)
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"density mass {mass!r} deviates from 1 beyond 1e-8")

    def weights(self) -> NDArray[np.float64]:
        """Trapezoid quadrature weights for this grid."""
        w = np.full(len(self.nodes), self.step)
        w[0] = w[-1] = self.step / 2
        return w

    def integral(self, integrand: NDArray[np.float64]) -> float:
        return float(self.weights() @ (self.values * integrand))

    def mean(self) -> float:
        return self.integral(self.nodes)

    def variance(self) -> float:
        mu = self.mean()
        return self.integral((self.nodes - mu) ** 2)

    def positive_window(self, floor: float = 0.0) -> tuple[int, int]:
        """Index range [i0, i1] of the first and last node with value > floor."""
        pos = self.values > floor
        if not pos.any():
            raise ValueError("density is identically zero")
        i0 = int(np.argmax(pos))
        i1 = len(pos) - int(np.argmax(pos[::-1])) - 1
        return i0, i1


@dataclass
class GridFunction:
    """A function sampled on a grid, with a validity mask.

    Invalid nodes are excluded from integrals taken against this function.
    """

    nodes: NDArray[np.float64]
    values: NDArray[np.float64]
    valid: NDArray[np.bool_]

    def __post_init__(self) -> None:
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        if not (self.nodes.shape == self.values.shape == self.valid.shape):
            raise ValueError("nodes, values and valid must share a shape")


@dataclass(frozen=True)
class MomentSet:
    """Raw and central moments of a grid density.

    raw_moments[j] is E Y^(j+1); central_moments[j] is E (Y - EY)^(j+1).
    sigma_stat is the fourth-moment statistic kurt - skew^2 - 1 that controls
    the second-eigenvalue bounds (2 for Gaussian, 2 + 2/beta for gamma).
    """

    raw_moments: tuple[float, ...]
    central_moments: tuple[float, ...]
    variance: float
    skewness: float
    sigma_stat: float

    def raw(self, j: int) -> float:
        """E Y^j for 0 <= j <= 2*kmax."""
        if j == 0:
            return 1.0
        return self.raw_moments[j - 1]

    def central(self, j: int) -> float:
        if j == 0:
            return 1.0
        if j == 1:
            return 0.0
        return self.central_moments[j - 1]


@dataclass(frozen=True)
class JstResult:
    """Standardized Fisher information with a resolution-based error estimate."""

    value: float
    fisher_info: float
    variance: float
    uncertainty: float


_KNOWN_FAMILIES = ("gaussian", "gamma", "uniform", "mixture", "discrete", "file")


@dataclass(frozen=True)
class DistributionSpec:
    """Family tag plus parameter record for a summand distribution."""

    family: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in _KNOWN_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {_KNOWN_FAMILIES}")

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "DistributionSpec":
        return cls("gaussian", {"sigma": float(sigma)})

    @classmethod
    def gamma(cls, beta: float, centered: bool = True) -> "DistributionSpec":
        return cls("gamma", {"beta": float(beta), "centered": bool(centered)})

    @classmethod
    def uniform(cls, a: float = -1.0, b: float = 1.0) -> "DistributionSpec":
        return cls("uniform", {"a": float(a), "b": float(b)})

    @classmethod
    def mixture(cls, components: list[tuple[float, float, float]]) -> "DistributionSpec":
        return cls("mixture", {"components": tuple((float(w), float(m), float(s)) for w, m, s in components)})

    @classmethod
    def discrete(cls, atoms: list[float], probs: list[float]) -> "DistributionSpec":
        return cls("discrete", {"atoms": tuple(map(float, atoms)), "probs": tuple(map(float, probs))})

    @classmethod
    def from_file(cls, path: str) -> "DistributionSpec":
        return cls("file", {"path": str(path)})

    def mean_and_sigma(self) -> tuple[float, float]:
        """Closed-form mean and standard deviation used for grid sizing."""
        p = self.params
        if self.family == "gaussian":
            return 0.0, float(p["sigma"])
        if self.family == "gamma":
            beta = float(p["beta"])
            return (0.0 if p.get("centered", True) else beta), math.sqrt(beta)
        if self.family == "uniform":
            a, b = float(p["a"]), float(p["b"])
            return (a + b) / 2.0, (b - a) / math.sqrt(12.0)
        if self.family == "mixture":
            comps = p["components"]
            wsum = sum(w for w, _, _ in comps)
            mu = sum(w * m for w, m, _ in comps) / wsum
            second = sum(w * (s * s + m * m) for w, m, s in comps) / wsum
            return mu, math.sqrt(second - mu * mu)
        if self.family == "discrete":
            atoms = np.asarray(p["atoms"], dtype=float)
            probs = np.asarray(p["probs"], dtype=float)
            probs = probs / probs.sum()
            mu = float(probs @ atoms)
            return mu, float(math.sqrt(probs @ (atoms - mu) ** 2))
        raise ValueError(f"no closed-form scale for family {self.family!r}")


def parse_spec(text: str) -> DistributionSpec:
    """Parse the spec mini-language.

    Examples: ``gaussian:sigma=1``, ``gamma:beta=4,centered=true``,
    ``uniform:a=-1,b=1``, ``mixture:w=0.5,mu=-1,sigma=1;w=0.5,mu=1,sigma=1``,
    ``discrete:-1=0.5,1=0.5``, ``file:/path/to/density.txt``.
    """
    text = text.strip()
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    if family == "file":
        if not rest:
            raise ValueError("file spec needs a path, e.g. file:density.txt")
        return DistributionSpec.from_file(rest)
    if family == "mixture":
        comps = []
        for chunk in filter(None, (c.strip() for c in rest.split(";"))):
            kv = _parse_kv(chunk)
            try:
                comps.append((float(kv["w"]), float(kv["mu"]), float(kv["sigma"])))
            except KeyError as exc:
                raise ValueError(f"mixture component {chunk!r} needs w, mu, sigma") from exc
        if not comps:
            raise ValueError("mixture spec needs at least one component")
        return DistributionSpec.mixture(comps)
    if family == "discrete":
        atoms, probs = [], []
        for chunk in filter(None, (c.strip() for c in rest.split(","))):
            a, _, pr = chunk.partition("=")
            atoms.append(float(a))
            probs.append(float(pr))
        if not atoms:
            raise ValueError("discrete spec needs atom=prob pairs")
        return DistributionSpec.discrete(atoms, probs)
    kv = _parse_kv(rest) if rest else {}
    if family == "gaussian":
        return DistributionSpec.gaussian(float(kv.get("sigma", 1.0)))
    if family == "gamma":
        if "beta" not in kv:
            raise ValueError("gamma spec needs beta, e.g. gamma:beta=4")
        centered = str(kv.get("centered", "true")).lower() in ("true", "1", "yes")
        return DistributionSpec.gamma(float(kv["beta"]), centered)
    if family == "uniform":
        return DistributionSpec.uniform(float(kv.get("a", -1.0)), float(kv.get("b", 1.0)))
    raise ValueError(f"unknown family {family!r} in spec {text!r}")


def _parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        k, sep, v = chunk.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {chunk!r}")
        out[k.strip()] = v.strip()
    return out


def _normalized(
    nodes: NDArray[np.float64],
    raw_values: NDArray[np.float64],
    step: float,
    truncated_mass: float = 0.0,
    clamped_mass: float = 0.0,
    warnings: tuple[str, ...] = (),
) -> GridDensity:
    w = np.full(len(nodes), step)
    w[0] = w[-1] = step / 2
    mass = float(w @ raw_values)
    if mass <= 0:
        raise ValueError("density has no mass on the grid")
    return GridDensity(nodes, raw_values / mass, step, truncated_mass, clamped_mass, warnings)


def build_density(spec: DistributionSpec, cfg: GridConfig | None = None, n_hint: int = 1) -> GridDensity:
    """Evaluate a family density on a fresh uniform grid.

    The grid spans mean +/- half_width_sigmas * sigma * sqrt(n_hint), so a
    caller planning an n-fold sum can reserve room up front. Values are
    trapezoid-normalized; mass outside the grid is estimated from the
    pre-normalization deficit and attached as ``truncated_mass``.
    """
    cfg = cfg or GridConfig()
    if n_hint < 1:
        raise ValueError("n_hint must be >= 1")
    if spec.family == "file":
        return _load_density_file(str(spec.params["path"]), cfg)
    mean, sigma = spec.mean_and_sigma()
    if sigma <= 0:
        raise ValueError("distribution must have positive variance")
    half = cfg.half_width_sigmas * sigma * math.sqrt(n_hint)
    nodes = np.linspace(mean - half, mean + half, cfg.node_count)
    step = float(nodes[1] - nodes[0])
    if spec.family == "discrete":
        return _discrete_spikes(spec, nodes, step, cfg)
    pdf = _family_pdf(spec)
    values = pdf(nodes)
    values[values <= cfg.density_floor] = 0.0
    w = np.full(len(nodes), step)
    w[0] = w[-1] = step / 2
    truncated = max(0.0, 1.0 - float(w @ values))
    warns: tuple[str, ...] = ()
    if truncated > cfg.mass_cutoff:
        warns = (f"mass {truncated:.3e} outside grid exceeds cutoff {cfg.mass_cutoff:.1e}",)
    return _normalized(nodes, values, step, truncated_mass=truncated, warnings=warns)


def _family_pdf(spec: DistributionSpec) -> Callable[[NDArray[np.float64]], NDArray[np.float64]]:
    p = spec.params
    if spec.family == "gaussian":
        sigma = float(p["sigma"])
        if sigma <= 0:
            raise ValueError("gaussian sigma must be positive")
        return lambda x: np.exp(-x * x / (2 * sigma * sigma)) / (sigma * math.sqrt(2 * math.pi))

    if spec.family == "gamma":
        beta = float(p["beta"])
        if beta <= 0:
            raise ValueError("gamma beta must be positive")
        shift = beta if p.get("centered", True) else 0.0

        def gamma_pdf(x: NDArray[np.float64]) -> NDArray[np.float64]:
            y = np.asarray(x, dtype=float) + shift
            out = np.zeros_like(y)
            pos = y > 0
            out[pos] = np.exp((beta - 1) * np.log(y[pos]) - y[pos] - gammaln(beta))
            return out

        return gamma_pdf

    if spec.family == "uniform":
        a, b = float(p["a"]), float(p["b"])
        if not a < b:
            raise ValueError("uniform needs a < b")
        return lambda x: np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)

    if spec.family == "mixture":
        comps = p["components"]
        if any(w <= 0 or s <= 0 for w, _, s in comps):
            raise ValueError("mixture weights and sigmas must be positive")
        total = sum(w for w, _, _ in comps)

        def mixture_pdf(x: NDArray[np.float64]) -> NDArray[np.float64]:
            acc = np.zeros_like(np.asarray(x, dtype=float))
            for w, m, s in comps:
                acc += (w / total) * np.exp(-((x - m) ** 2) / (2 * s * s)) / (s * math.sqrt(2 * math.pi))
            return acc

        return mixture_pdf

    raise ValueError(f"no pdf for family {spec.family!r}")


def _discrete_spikes(
    spec: DistributionSpec, nodes: NDArray[np.float64], step: float, cfg: GridConfig
) -> GridDensity:
    atoms = np.asarray(spec.params["atoms"], dtype=float)
    probs = np.asarray(spec.params["probs"], dtype=float)
    if (probs <= 0).any():
        raise ValueError("discrete probabilities must be positive")
    probs = probs / probs.sum()
    values = np.zeros(len(nodes))
    for a, pr in zip(atoms, probs):
        i = int(round((a - nodes[0]) / step))
        if not 0 <= i < len(nodes):
            raise ValueError(f"atom {a} falls outside the grid")
        values[i] += pr / step
    return _normalized(nodes, values, step)


def _load_density_file(path: str, cfg: GridConfig) -> GridDensity:
    data = np.loadtxt(path, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two whitespace-separated columns (node, value)")
    nodes, values = data[:, 0], data[:, 1]
    if len(nodes) < 3:
        raise ValueError(f"{path}: need at least 3 rows")
    diffs = np.diff(nodes)
    if diffs.min() <= 0:
        raise ValueError(f"{path}: nodes must be strictly ascending")
    step = float(np.mean(diffs))
    if np.abs(diffs - step).max() > 1e-9 * step:
        raise ValueError(f"{path}: non-uniform node spacing")
    if values.min() < 0:
        raise ValueError(f"{path}: negative density values")
    values = values.copy()
    values[values <= cfg.density_floor] = 0.0
    w = np.full(len(nodes), step)
    w[0] = w[-1] = step / 2
    mass = float(w @ values)
    warns: tuple[str, ...] = ()
    if abs(mass - 1.0) > 1e-6:
        warns = (f"renormalized file density with mass {mass!r}",)
    return _normalized(nodes, values, step, warnings=warns)


def write_density_file(path: str, d: GridDensity) -> None:
    """Write the two-column (node, value) text format, 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for x, v in zip(d.nodes, d.values):
            fh.write(f"{x:.17g} {v:.17g}\n")


def moments(d: GridDensity, kmax: int = 4) -> MomentSet:
    """Raw and central moments up to order 2*kmax by trapezoid quadrature.

    kmax is capped at 12: beyond that the integrand x^24 p(x) is tail-dominated
    and the grid truncation makes the numbers meaningless.
    """
    if not 1 <= kmax <= 12:
        raise ValueError(f"kmax must lie in [1, 12], got {kmax}")
    order = 2 * kmax
    wv = d.weights() * d.values
    raw = tuple(float(wv @ d.nodes**j) for j in range(1, order + 1))
    mu = raw[0]
    centered = d.nodes - mu
    central = tuple(float(wv @ centered**j) for j in range(1, order + 1))
    var = central[1]
    if var <= 0:
        raise ValueError("density has nonpositive variance")
    skew = central[2] / var**1.5
    sigma_stat = central[3] / var**2 - skew**2 - 1.0
    return MomentSet(raw, central, var, skew, sigma_stat)


def score(d: GridDensity, floor: float | None = None) -> GridFunction:
    """Score function rho = (log p)' by central differences of log-density.

    The score is marked invalid outside the positive window, at the window's
    boundary nodes, and wherever the stencil spans more than
    SCORE_MAX_LOG_JUMP in log-density (under-resolved region, e.g. hard
    against a support edge).

    Raises
    ------
    ScoreUndefinedError
        If the density has zeros strictly inside its positive window.
    """
    floor = 1e-300 if floor is None else floor
    i0, i1 = d.positive_window(floor)
    inside = d.values[i0 : i1 + 1]
    if (inside <= floor).any():
        bad = np.nonzero(inside <= floor)[0] + i0
        raise ScoreUndefinedError(
            f"density vanishes inside its positive window at nodes "
            f"[{bad.min()}..{bad.max()}] (x in [{d.nodes[bad.min()]:.6g}, {d.nodes[bad.max()]:.6g}])"
        )
    values = np.zeros(len(d.nodes))
    valid = np.zeros(len(d.nodes), dtype=bool)
    if i1 - i0 >= 2:
        lp = np.log(inside)
        diff = lp[2:] - lp[:-2]
        values[i0 + 1 : i1] = diff / (2 * d.step)
        valid[i0 + 1 : i1] = np.abs(diff) <= SCORE_MAX_LOG_JUMP
    return GridFunction(d.nodes, values, valid)


def fisher(d: GridDensity) -> float:
    """Fisher information J = integral of p * rho^2 over the valid window.

    Refuses densities that fail the absolute-continuity screen; see
    FisherUnavailableError cases in the module notes. Gamma shapes below 3
    are rejected by the edge screen, which is conservative for 2 < beta < 3
    (finite J) and correct for beta <= 2 (infinite J).
    """
    rho = score(d)
    i0, i1 = d.positive_window(1e-300)
    vmax = d.values.max()
    for edge in (i0, i1):
        if d.values[edge] > EDGE_JUMP_REL * vmax:
            raise FisherUnavailableError(
                f"density jumps at its support edge (node {edge}, x = {d.nodes[edge]:.6g}, "
                f"p/pmax = {d.values[edge] / vmax:.3e}); Fisher information diverges"
            )
    w = d.weights()
    invalid_mass = float((w * d.values)[~rho.valid].sum())
    if invalid_mass > INVALID_MASS_FRACTION:
        raise FisherUnavailableError(
            f"score undefined on mass fraction {invalid_mass:.3e} (> {INVALID_MASS_FRACTION:.0e})"
        )
    sel = rho.valid
    return float((w[sel] * d.values[sel]) @ rho.values[sel] ** 2)


def jst(d: GridDensity) -> JstResult:
    """Standardized Fisher information Var(Y) * J(Y) - 1.

    Nonnegative by Cramer-Rao, zero exactly for Gaussian, and invariant under
    rescale. The uncertainty field is the difference against the same
    computation on the half-resolution grid, which tracks the discretization
    error of the score near steep regions.
    """
    j = fisher(d)
    var = d.variance()
    value = var * j - 1.0
    try:
        coarse = _normalized(d.nodes[::2], d.values[::2], 2 * d.step)
        jc = fisher(coarse)
        unc = abs(value - (coarse.variance() * jc - 1.0))
    except (ValueError, FisherUnavailableError):
        unc = math.nan
    return JstResult(value=value, fisher_info=j, variance=var, uncertainty=unc)


def convolve(d1: GridDensity, d2: GridDensity) -> GridDensity:
    """Density of the sum of independent variables with densities d1, d2.

    Both grids must share the step. The output grid is the full sumset
    lattice: start at d1.nodes[0] + d2.nodes[0], length N1 + N2 - 1. Negative
    FFT lobes and entries below FFT_NOISE_REL of the peak are zeroed and the
    removed mass recorded before renormalization.
    """
    if abs(d1.step - d2.step) > 1e-9 * d1.step:
        raise ValueError(f"grid steps differ: {d1.step!r} vs {d2.step!r}")
    n_out = len(d1.nodes) + len(d2.nodes) - 1
    if n_out > MAX_GRID_NODES:
        raise ValueError(f"grid overflow: convolution would need {n_out} nodes (cap {MAX_GRID_NODES})")
    raw = fftconvolve(d1.values, d2.values) * d1.step
    negative = float(-raw[raw < 0].sum()) * d1.step
    raw[raw < 0] = 0.0
    noise = raw < raw.max() * FFT_NOISE_REL
    clamped = negative + float(raw[noise].sum()) * d1.step
    raw[noise] = 0.0
    nodes = (d1.nodes[0] + d2.nodes[0]) + d1.step * np.arange(n_out)
    return _normalized(
        nodes,
        raw,
        d1.step,
        truncated_mass=d1.truncated_mass + d2.truncated_mass,
        clamped_mass=d1.clamped_mass + d2.clamped_mass + clamped,
        warnings=tuple(sorted(set(d1.warnings + d2.warnings))),
    )


def convolve_self(d: GridDensity, n: int) -> GridDensity:
    """Density of the n-fold i.i.d. sum S_n on the widened lattice."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = d
    for _ in range(n - 1):
        out = convolve(out, d)
    return out


def rescale(d: GridDensity, c: float) -> GridDensity:
    """Density of c * Y. Negative c flips the grid; c must be nonzero."""
    if c == 0:
        raise ValueError("scale factor must be nonzero")
    nodes = d.nodes * c
    values = d.values / abs(c)
    if c < 0:
        nodes = nodes[::-1].copy()
        values = values[::-1].copy()
    return GridDensity(nodes, values, abs(c) * d.step, d.truncated_mass, d.clamped_mass, d.warnings)


def gaussian_regularize(d: GridDensity, delta: float, half_width_sigmas: float = 12.0) -> GridDensity:
    """Convolve with a centered Gaussian of variance delta^2 on the same lattice."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    m = int(math.ceil(half_width_sigmas * delta / d.step))
    g = np.arange(-m, m + 1) * d.step
    kern = np.exp(-g * g / (2 * delta * delta))
    kern /= kern.sum() * d.step
    warns = d.warnings
    if delta < 4 * d.step:
        warns = warns + (f"regularization width {delta!r} under-resolved by step {d.step!r}",)
    raw = fftconvolve(d.values, kern) * d.step
    raw[raw < 0] = 0.0
    raw[raw < raw.max() * FFT_NOISE_REL] = 0.0
    nodes = (d.nodes[0] - m * d.step) + d.step * np.arange(len(d.values) + 2 * m)
    return _normalized(nodes, raw, d.step, d.truncated_mass, d.clamped_mass, warns)
