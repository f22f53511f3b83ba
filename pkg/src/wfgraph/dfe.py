"""Distributions of fitness effects at stationarity.

Novel mutations hit a monomorphic background, so the chance that the
next mutation carries selection coefficient gamma is proportional to
the monomorphic weight of its source vertex times the mutation rate of
its edge.  Aggregated over loci this gives a discrete distribution of
selection coefficients whose negative side always dominates its
positive mirror (weight ratio e^{2 gamma} under detailed balance), and
whose mean, the selection load, is nonpositive.

The polymorphic variant weighs each edge by its stationary polymorphic
mass instead; it is defective (total below one) and its conditional
version obeys the same skew properties once the population size
clears the proof's threshold N >= max(2, 4 C^2) with C the largest
|gamma| in play.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.integrate import quad
from scipy.special import gammainc

from . import kernels
from .multilocus import LocusEnsemble

ATOM_TOL = 1.0e-12
TRUNCATION = 60.0


# ---------------------------------------------------------------------------
# discrete distributions


@dataclass(frozen=True)
class DfeDistribution:
    """Atoms of a (possibly defective) distribution over selection values.

    kind is one of "novel", "polymorphic-raw", "polymorphic-conditional".
    Atoms are sorted; values closer than 1e-12 are merged so jump sizes
    are well defined.
    """

    gammas: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    kind: str
    total_mass: float

    def __post_init__(self):
        self.gammas.setflags(write=False)
        self.weights.setflags(write=False)

    def cdf(self, gamma: float) -> float:
        """Right-continuous cumulative weight up to and including gamma."""
        return float(self.weights[self.gammas <= gamma + ATOM_TOL].sum())

    def jump(self, gamma: float) -> float:
        """Weight of the atom at gamma (0 if none within tolerance)."""
        hit = np.abs(self.gammas - gamma) <= ATOM_TOL
        return float(self.weights[hit].sum())

    def mean(self) -> float:
        return float(self.gammas @ self.weights)

    def positive_mass(self) -> float:
        return float(self.weights[self.gammas > ATOM_TOL].sum())

    def negative_mass(self) -> float:
        return float(self.weights[self.gammas < -ATOM_TOL].sum())

    def neutral_mass(self) -> float:
        return float(self.weights[np.abs(self.gammas) <= ATOM_TOL].sum())


def _merge(pairs) -> tuple[np.ndarray, np.ndarray]:
    pairs = sorted(pairs)
    gammas, weights = [], []
    for g, w in pairs:
        if gammas and g - gammas[-1] <= ATOM_TOL:
            weights[-1] += w
        else:
            gammas.append(g)
            weights.append(w)
    return np.asarray(gammas, dtype=float), np.asarray(weights, dtype=float)


def h_dfe(e: LocusEnsemble) -> DfeDistribution:
    """DFE of novel mutations: weight (eta^j_u / Omega^j) theta_uv
    per directed edge and locus, normalized by L theta_hat_eff."""
    norm = e.L * e.theta_hat_eff
    pairs = []
    for ci, c in enumerate(e.classes):
        eta = e.class_eta(ci)
        om = e.class_omega(ci)
        for i, j in e.graph.edges():
            w = c.multiplicity * eta[i] * e.theta[i, j] / (om * norm)
            pairs.append((float(c.selection.gamma[i, j]), w))
    gammas, weights = _merge(pairs)
    total = float(weights.sum())
    if abs(total - 1.0) > 1.0e-12:
        raise RuntimeError(f"novel DFE mass {total!r} is not 1")
    return DfeDistribution(gammas, weights, kind="novel", total_mass=total)


def h_pdfe(e: LocusEnsemble) -> tuple[DfeDistribution, DfeDistribution]:
    """DFE of segregating polymorphisms, raw (defective) and conditional.

    Raw weight of an edge is its stationary polymorphic mass
    (2 eta^j_u theta_uv / (L Omega^j)) (1 + ln N + K), averaged over
    loci; the raw total is (1/L) sum_j (Omega^j - 1)/Omega^j.
    """
    log_n = math.log(e.big_n)
    pairs = []
    for ci, c in enumerate(e.classes):
        kmat = e.class_k(ci)
        for i, j in e.graph.edges():
            w = (
                c.multiplicity
                * e.edge_coefficient(ci, i, j)
                * (1.0 + log_n + kmat[i, j])
                / e.L
            )
            pairs.append((float(c.selection.gamma[i, j]), w))
    gammas, weights = _merge(pairs)
    total = float(weights.sum())
    raw = DfeDistribution(gammas, weights, kind="polymorphic-raw", total_mass=total)
    if total >= 1.0:
        raise RuntimeError(f"polymorphic DFE mass {total!r} should be below 1")
    if total < 1.0e-15:
        raise ValueError(
            "all loci are essentially monomorphic; the conditional "
            "polymorphic DFE is undefined"
        )
    cond = DfeDistribution(
        gammas, weights / total, kind="polymorphic-conditional", total_mass=1.0
    )
    return raw, cond


def mean_load(x) -> float:
    """Mean selection coefficient gamma_hat.

    Accepts a DfeDistribution or a LocusEnsemble (novel-mutation form).
    For reversible ensembles the value is checked to be nonpositive, as
    equilibrium guarantees; without reversibility no sign claim holds.
    """
    if isinstance(x, DfeDistribution):
        return x.mean()
    e = x
    norm = e.L * e.theta_hat_eff
    total = 0.0
    for ci, c in enumerate(e.classes):
        eta = e.class_eta(ci)
        om = e.class_omega(ci)
        for i, j in e.graph.edges():
            total += (
                c.multiplicity
                * eta[i]
                * e.theta[i, j]
                * c.selection.gamma[i, j]
                / (om * norm)
            )
    if e.reversible and total > 1.0e-12:
        raise RuntimeError(f"positive selection load {total!r} at equilibrium")
    return total


@dataclass(frozen=True)
class SkewReport:
    """Outcome of the equilibrium-skew checks on a DFE.

    negative_dominates: every negative atom outweighs its positive
    mirror.  worst_gap is the most negative jump(gamma) - jump(-gamma)
    over gamma < 0.  condition_met reports the N >= max(2, 4 C^2)
    threshold and is None for the novel-mutation DFE, which needs no
    such condition.
    """

    negative_dominates: bool
    worst_gap: float
    mean: float
    positive_fraction: float
    positive_below_half: bool
    condition_met: bool | None


def skew_report(d: DfeDistribution, big_n: float | None = None) -> SkewReport:
    worst = np.inf
    for g in d.gammas:
        if g < -ATOM_TOL:
            worst = min(worst, d.jump(g) - d.jump(-g))
    if not np.isfinite(worst):
        worst = 0.0
    pos = d.positive_mass() / d.total_mass
    cond = None
    if big_n is not None:
        cmax = float(np.abs(d.gammas).max()) if d.gammas.size else 0.0
        cond = big_n >= max(2.0, 4.0 * cmax * cmax)
    return SkewReport(
        negative_dominates=bool(worst >= -1.0e-12),
        worst_gap=float(worst),
        mean=d.mean() / d.total_mass,
        positive_fraction=pos,
        positive_below_half=bool(pos < 0.5),
        condition_met=cond,
    )


# ---------------------------------------------------------------------------
# continuous approximation


@dataclass(frozen=True)
class ContinuousDfe:
    """Two-sided continuous DFE with an optional neutral atom.

    The negative side carries a user-chosen density g of the magnitude;
    the positive side is proportional to g(x) e^{-2x}, the equilibrium
    mirror factor.  Both sides are truncated at |x| = 60 and jointly
    normalized to 1 - neutral_weight.
    """

    family: str
    params: tuple
    neutral_weight: float
    neg_mass: float
    pos_mass: float
    mean: float
    tail_bound: float
    _pdf: object = field(repr=False)

    def density(self, x):
        """Density at x != 0 (the neutral atom is not a density)."""
        x_arr = np.asarray(x, dtype=float)
        mag = np.abs(x_arr)
        with np.errstate(over="ignore", invalid="ignore"):
            base = self._pdf(mag)
            out = np.where(
                x_arr < 0.0,
                base,
                base * np.exp(-2.0 * x_arr),
            )
        scale = (1.0 - self.neutral_weight) / (self.neg_mass + self.pos_mass)
        out = np.where(mag > TRUNCATION, 0.0, out * scale)
        out = np.where(x_arr == 0.0, np.nan, out)
        return out if out.ndim else float(out)


def continuous_dfe(family: str, params=None, neutral_weight: float = 0.0) -> ContinuousDfe:
    """Build the continuous DFE for a negative-side family.

    family "exponential" takes a rate (default 1), "gamma" takes
    (shape, scale) with scale defaulting to 1, and "custom" takes a
    callable density of the magnitude.  The gamma family with scale 1
    covers the reference cases: shape 1 is the exponential with mean
    load -2/3, shape 2 gives -26/15, shape 0.15 gives about -0.0582.
    """
    if not 0.0 <= neutral_weight < 1.0:
        raise ValueError("neutral weight must lie in [0, 1)")
    if family == "exponential":
        rate = 1.0 if params is None else float(params)
        if rate <= 0.0:
            raise ValueError("exponential rate must be positive")
        return _gamma_family("exponential", 1.0, 1.0 / rate, neutral_weight)
    if family == "gamma":
        if params is None:
            raise ValueError("gamma family needs (shape, scale)")
        if np.isscalar(params):
            shape, scale = float(params), 1.0
        else:
            shape, scale = (float(params[0]), float(params[1]))
        if shape <= 0.0 or scale <= 0.0:
            raise ValueError("gamma shape and scale must be positive")
        return _gamma_family("gamma", shape, scale, neutral_weight)
    if family == "custom":
        if not callable(params):
            raise ValueError("custom family needs a callable density")
        return _custom_family(params, neutral_weight)
    raise ValueError(f"unknown DFE family {family!r}")


def _gamma_family(name, a, b, nu) -> ContinuousDfe:
    # truncated integrals in closed form through the regularized
    # incomplete gamma function; the e^{-2x} tilt maps gamma(a, b) to
    # gamma(a, b/(1+2b)) up to the factor (1+2b)^{-a}
    t = TRUNCATION
    tilt = (1.0 + 2.0 * b) ** (-a)
    neg_mass = float(gammainc(a, t / b))
    pos_mass = float(tilt * gammainc(a, t * (1.0 / b + 2.0)))
    m_neg = a * b * float(gammainc(a + 1.0, t / b))
    m_pos = a * b * (1.0 + 2.0 * b) ** (-a - 1.0) * float(
        gammainc(a + 1.0, t * (1.0 / b + 2.0))
    )
    z = neg_mass + pos_mass
    mean = (1.0 - nu) * (m_pos - m_neg) / z
    tail = (1.0 - gammainc(a, t / b)) + tilt * (1.0 - gammainc(a, t * (1.0 / b + 2.0)))
    pdf = stats.gamma(a, scale=b).pdf
    return ContinuousDfe(
        family=name,
        params=(a, b),
        neutral_weight=nu,
        neg_mass=neg_mass,
        pos_mass=pos_mass,
        mean=mean,
        tail_bound=float(tail / z),
        _pdf=pdf,
    )


_LOG_SEGMENTS = (-700.0, -200.0, -50.0, -20.0, -8.0, -3.0, -1.0, 0.0)


def _half_integral(fn) -> float:
    """Integral of fn over (0, 60] via log substitution, robust to an
    integrable power singularity at 0."""
    edges = _LOG_SEGMENTS + (math.log(TRUNCATION),)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(
            lambda tt: fn(math.exp(tt)) * math.exp(tt), lo, hi,
            epsabs=1.0e-13, epsrel=1.0e-11, limit=200,
        )
        total += val
    return total


def _custom_family(g, nu) -> ContinuousDfe:
    neg_mass = _half_integral(g)
    if not neg_mass > 0.0:
        raise ValueError("custom density has no mass on (0, 60]")
    pos_mass = _half_integral(lambda s: g(s) * math.exp(-2.0 * s))
    m_neg = _half_integral(lambda s: s * g(s))
    m_pos = _half_integral(lambda s: s * g(s) * math.exp(-2.0 * s))
    z = neg_mass + pos_mass
    mean = (1.0 - nu) * (m_pos - m_neg) / z
    return ContinuousDfe(
        family="custom",
        params=(g,),
        neutral_weight=nu,
        neg_mass=neg_mass,
        pos_mass=pos_mass,
        mean=mean,
        tail_bound=math.nan,
        _pdf=np.vectorize(g, otypes=[float]),
    )


# ---------------------------------------------------------------------------
# Poisson-random-field spectrum


def _afs_grid(grid: int) -> np.ndarray:
    if grid < 1:
        raise ValueError("grid must be positive")
    return np.arange(1, grid + 1) / (grid + 1.0)


def prf_afs(theta_eff: float, d, grid: int = 200):
    """Unfolded spectrum of the collapsed ancestral/derived model.

    Mixes the single-edge interior density 2 theta_eff q_gamma(1-y) /
    (y (1-y)) over the DFE.  Returns (frequencies, densities).
    """
    if not theta_eff > 0.0:
        raise ValueError("effective mutation rate must be positive")
    y = _afs_grid(grid)
    dens = np.zeros_like(y)
    if isinstance(d, DfeDistribution):
        for g, w in zip(d.gammas, d.weights / d.total_mass):
            dens += w * kernels.fixation_prob(g, 1.0 - y)
    elif isinstance(d, ContinuousDfe):
        nodes, wts = _mixture_nodes()
        scale = (1.0 - d.neutral_weight) / (d.neg_mass + d.pos_mass)
        for s, w in zip(nodes, wts):
            base = float(d._pdf(s)) * w * scale
            if base != 0.0:
                dens += base * kernels.fixation_prob(-s, 1.0 - y)
                dens += base * math.exp(-2.0 * s) * kernels.fixation_prob(s, 1.0 - y)
        dens += d.neutral_weight * kernels.fixation_prob(0.0, 1.0 - y)
    else:
        raise TypeError("need a DfeDistribution or ContinuousDfe")
    return y, 2.0 * theta_eff * dens / (y * (1.0 - y))


_MIX_CACHE = {}


def _mixture_nodes(n_nodes: int = 40):
    """Composite Gauss-Legendre nodes on (0, 60] in log space, shared by
    both sides of the continuous mixture."""
    key = n_nodes
    if key not in _MIX_CACHE:
        edges = (-120.0, -50.0, -20.0, -8.0, -3.0, -1.0, 0.0, math.log(TRUNCATION))
        t_nodes, t_wts = np.polynomial.legendre.leggauss(n_nodes)
        nodes, wts = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
            t = mid + half * t_nodes
            nodes.append(np.exp(t))
            wts.append(half * t_wts * np.exp(t))
        _MIX_CACHE[key] = (np.concatenate(nodes), np.concatenate(wts))
    return _MIX_CACHE[key]
