"""Stationary laws of the graph jump-diffusion.

States are either monomorphic (a vertex u) or polymorphic (a directed
edge (u, v) carrying the frequency y of the invading type v).  From a
vertex u, mutations towards v fire at rate lam[u, v] / x and start an
excursion at frequency x; the excursion diffuses with selection
gamma[u, v] until absorption.

The exact stationary law at entry frequency x puts mass eta_u / Omega on
vertex u and density eta_u lam[u, v] G(x, y) / Omega on edge (u, v),
where eta solves detailed balance of the embedded jump chain and G is
the excursion Green's function.  The large-population form (entry
frequency 1/N) replaces G by its leading behaviour: an interior density
q_gamma(1 - y) / (y (1 - y)) plus a flat boundary layer of height
(N - omega_gamma) on (0, 1/N), with per-edge mass
2 eta_u lam[u, v] (1 + log N + K(gamma)) / Omega_N.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .graph import AlleleGraph, SelectionSpec, require_valid
from .quadrature import integrate_01

REVERSIBILITY_TOL = 1.0e-10
MIN_POPULATION = 100.0


class NonReversibleWarning(UserWarning):
    pass


def _check_selection(g: AlleleGraph, s: SelectionSpec):
    if s.n != g.n:
        raise ValueError(
            f"selection matrix is {s.n}x{s.n} but graph has {g.n} vertices"
        )


def _vidx(g: AlleleGraph, u):
    return g.index(u) if isinstance(u, str) else int(u)


# ---------------------------------------------------------------------------
# boundary measure


@dataclass(frozen=True)
class BoundaryMeasure:
    """Invariant weights of the embedded vertex chain.

    mode "exact" uses jump rates lam[u, v] q_gamma(x); mode "scaled" uses
    the large-population weights lam[u, v] w(gamma).  ``reversible``
    records whether the weights satisfy pairwise balance; when they do
    not (possible for raw non-potential selection or rate matrices whose
    cycle products do not cancel), the honest invariant vector of the
    jump generator is returned instead and a warning is attached.
    """

    weights: np.ndarray = field(repr=False)
    mode: str
    x: float | None
    reversible: bool
    warning: str | None = None

    def __post_init__(self):
        self.weights.setflags(write=False)


def _log_edge_weights(g: AlleleGraph, s: SelectionSpec, mode: str, x):
    n = g.n
    logw = np.full((n, n), -np.inf)
    for i, j in g.edges():
        if mode == "exact":
            logw[i, j] = math.log(g.lam[i, j]) + kernels.log_fixation_prob(
                s.gamma[i, j], x
            )
        else:
            logw[i, j] = math.log(g.lam[i, j]) + kernels.log_fixation_weight(
                s.gamma[i, j]
            )
    return logw


def boundary_measure(
    g: AlleleGraph, s: SelectionSpec, mode: str = "scaled", x: float | None = None
) -> BoundaryMeasure:
    """Invariant distribution of the embedded vertex chain.

    A spanning-tree detailed-balance candidate is built in log space and
    verified on every edge to relative tolerance 1e-10 (this is exactly
    the Kolmogorov cycle condition).  On failure the invariant vector is
    solved from the jump generator and the result is flagged
    non-reversible.
    """
    require_valid(g)
    _check_selection(g, s)
    if mode not in ("exact", "scaled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact":
        if x is None or not 0.0 < x < 1.0:
            raise ValueError("exact mode needs an entry frequency x in (0, 1)")
        x = float(x)
    else:
        if x is not None:
            raise ValueError("scaled mode takes no entry frequency")

    n = g.n
    logw = _log_edge_weights(g, s, mode, x)

    # spanning-tree candidate: log eta_j - log eta_i = logw[i,j] - logw[j,i]
    log_eta = np.full(n, np.nan)
    log_eta[0] = 0.0
    stack = [0]
    support = g.lam > 0
    while stack:
        i = stack.pop()
        for j in np.nonzero(support[i])[0]:
            if np.isnan(log_eta[j]):
                log_eta[j] = log_eta[i] + logw[i, j] - logw[j, i]
                stack.append(int(j))

    imbalance = 0.0
    for i, j in g.edges():
        if i < j:
            imbalance = max(
                imbalance,
                abs(log_eta[i] + logw[i, j] - log_eta[j] - logw[j, i]),
            )
    if imbalance <= REVERSIBILITY_TOL:
        eta = np.exp(log_eta - logsumexp(log_eta))
        eta /= eta.sum()
        return BoundaryMeasure(weights=eta, mode=mode, x=x, reversible=True)

    # honest fallback: invariant vector of the jump generator
    w = np.zeros((n, n))
    finite = np.isfinite(logw)
    scale = logw[finite].max()
    w[finite] = np.exp(logw[finite] - scale)
    q_gen = w.copy()
    np.fill_diagonal(q_gen, -w.sum(axis=1))
    a = np.vstack([q_gen.T[:-1], np.ones(n)])
    b = np.zeros(n)
    b[-1] = 1.0
    eta = np.linalg.solve(a, b)
    eta = np.clip(eta, 0.0, None)
    eta /= eta.sum()
    msg = (
        f"embedded jump weights violate pairwise balance (max log imbalance "
        f"{imbalance:.3e}); returning the invariant vector of the jump "
        f"generator; reversible equilibrium formulas do not apply"
    )
    warnings.warn(msg, NonReversibleWarning, stacklevel=2)
    return BoundaryMeasure(weights=eta, mode=mode, x=x, reversible=False, warning=msg)


@dataclass(frozen=True)
class JumpMeasure:
    """Mutation-source measure: one atom eta_u lam[u, v] per edge at entry x."""

    x: float
    atoms: tuple[tuple[int, int, float], ...]

    def total(self) -> float:
        return sum(w for _, _, w in self.atoms)


def jump_measure(g: AlleleGraph, s: SelectionSpec, x: float) -> JumpMeasure:
    bm = boundary_measure(g, s, mode="exact", x=x)
    atoms = tuple(
        (i, j, float(bm.weights[i] * g.lam[i, j])) for i, j in g.edges()
    )
    return JumpMeasure(x=float(x), atoms=atoms)


# ---------------------------------------------------------------------------
# stationary measures


@dataclass(frozen=True)
class EdgeDensity:
    """Evaluable stationary density on one directed edge.

    Exact mode stores coeff * G(x, y); the large-population mode stores
    the interior segment coeff * q_gamma(1-y) / (y (1-y)) on (1/N, 1)
    and the flat layer coeff * (N - omega) on (0, 1/N).  ``mass`` is the
    precomputed total measure of the edge.
    """

    gamma: float
    coeff: float
    mass: float
    mode: str
    x: float | None = None
    big_n: float | None = None
    layer_value: float | None = None

    def density(self, y):
        y_arr = np.asarray(y, dtype=float)
        if np.any((y_arr <= 0.0) | (y_arr >= 1.0)):
            raise ValueError("frequency must lie strictly inside (0, 1)")
        if self.mode == "exact":
            out = self.coeff * kernels.green_function(self.gamma, self.x, y_arr)
        else:
            interior = (
                self.coeff
                * kernels.fixation_prob(self.gamma, 1.0 - y_arr)
                / (y_arr * (1.0 - y_arr))
            )
            out = np.where(y_arr < 1.0 / self.big_n, self.layer_value, interior)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class StationaryMeasure:
    graph: AlleleGraph
    selection: SelectionSpec
    mode: str
    omega: float
    boundary_mass: np.ndarray = field(repr=False)
    edge_densities: dict = field(repr=False)
    x: float | None = None
    big_n: float | None = None
    reversible: bool = True
    warning: str | None = None

    def boundary(self, u) -> float:
        return float(self.boundary_mass[_vidx(self.graph, u)])

    def edge(self, u, v) -> EdgeDensity:
        key = (_vidx(self.graph, u), _vidx(self.graph, v))
        if key not in self.edge_densities:
            raise KeyError(f"no edge {u!r} -> {v!r}")
        return self.edge_densities[key]

    def density(self, u, v, y):
        return self.edge(u, v).density(y)

    def total_mass(self) -> float:
        """Boundary mass plus all stored edge masses (should be 1)."""
        return float(
            self.boundary_mass.sum()
            + sum(e.mass for e in self.edge_densities.values())
        )

    def aggregate_density(self, y):
        """Sum of all edge densities at frequency y (type-aggregated)."""
        y_arr = np.asarray(y, dtype=float)
        out = np.zeros_like(y_arr, dtype=float)
        for e in self.edge_densities.values():
            out = out + e.density(y_arr)
        return out if out.ndim else float(out)


def exact_stationary(g: AlleleGraph, s: SelectionSpec, x: float) -> StationaryMeasure:
    """Stationary law at entry frequency x, normalized through the edge
    occupation integrals (so stored masses sum to 1 by construction)."""
    if not 0.0 < x < 1.0:
        raise ValueError("entry frequency x must lie strictly inside (0, 1)")
    bm = boundary_measure(g, s, mode="exact", x=x)
    eta = bm.weights
    occ = {}
    for i, j in g.edges():
        occ[(i, j)] = kernels.occupation_integral(s.gamma[i, j], x)
    omega = 1.0 + sum(eta[i] * g.lam[i, j] * occ[(i, j)] for i, j in occ)
    edges = {}
    for (i, j), oij in occ.items():
        coeff = eta[i] * g.lam[i, j] / omega
        edges[(i, j)] = EdgeDensity(
            gamma=float(s.gamma[i, j]),
            coeff=float(coeff),
            mass=float(coeff * oij),
            mode="exact",
            x=float(x),
        )
    return StationaryMeasure(
        graph=g,
        selection=s,
        mode="exact",
        omega=float(omega),
        boundary_mass=eta / omega,
        edge_densities=edges,
        x=float(x),
        reversible=bm.reversible,
        warning=bm.warning,
    )


def approx_stationary(g: AlleleGraph, s: SelectionSpec, big_n: float) -> StationaryMeasure:
    """Large-population stationary law for entry frequency 1/N.

    Edge masses are the closed forms 2 eta_u lam[u, v] (1 + log N + K) /
    Omega_N, so the stored masses sum to 1 up to the accuracy of K.
    Requires N >= 100; the expansion is meaningless below that.
    """
    big_n = float(big_n)
    if not big_n >= MIN_POPULATION:
        raise ValueError(f"population size must be >= {MIN_POPULATION:.0f}")
    bm = boundary_measure(g, s, mode="scaled")
    eta = bm.weights
    log_n = math.log(big_n)
    factors = {}
    for i, j in g.edges():
        factors[(i, j)] = 1.0 + log_n + kernels.occupation_correction(s.gamma[i, j])
    omega_n = 1.0 + 2.0 * sum(
        eta[i] * g.lam[i, j] * factors[(i, j)] for i, j in factors
    )
    edges = {}
    for (i, j), fac in factors.items():
        gamma = float(s.gamma[i, j])
        coeff = 2.0 * eta[i] * g.lam[i, j] / omega_n
        edges[(i, j)] = EdgeDensity(
            gamma=gamma,
            coeff=float(coeff),
            mass=float(coeff * fac),
            mode="largeN",
            big_n=big_n,
            layer_value=float(coeff * (big_n - kernels.fixation_weight(gamma))),
        )
    return StationaryMeasure(
        graph=g,
        selection=s,
        mode="largeN",
        omega=float(omega_n),
        boundary_mass=eta / omega_n,
        edge_densities=edges,
        big_n=big_n,
        reversible=bm.reversible,
        warning=bm.warning,
    )


def pair_density(m: StationaryMeasure, u, v, y):
    """Density of 'frequency of v is y' restricted to the pair {u, v}.

    Large-population closed form: coeff e^{2 gamma y} / (y (1-y)) on the
    interior (1/N, 1-1/N), flat layers coeff N on (0, 1/N) and
    coeff N e^{2 gamma} on (1-1/N, 1), with coeff = 2 eta_u lam[u,v] / Omega_N
    and gamma the (u, v) selection coefficient.
    """
    if m.mode != "largeN":
        raise ValueError("pair density has a closed form only for the large-N measure")
    e = m.edge(u, v)
    gamma, coeff, big_n = e.gamma, e.coeff, e.big_n
    y_arr = np.asarray(y, dtype=float)
    if np.any((y_arr <= 0.0) | (y_arr >= 1.0)):
        raise ValueError("frequency must lie strictly inside (0, 1)")
    if coeff == 0.0:
        out = np.zeros_like(y_arr)
        return out if out.ndim else 0.0
    # the factor e^{2 gamma y} can overflow on its own while the product
    # with the (possibly tiny) coefficient is representable, so combine
    # the exponents in log space
    log_c = math.log(coeff)
    log_high = log_c + math.log(big_n) + 2.0 * gamma
    high_layer = math.exp(log_high) if log_high < 709.0 else math.inf
    with np.errstate(over="ignore"):
        interior = np.exp(log_c + 2.0 * gamma * y_arr) / (y_arr * (1.0 - y_arr))
    out = np.where(
        y_arr < 1.0 / big_n,
        coeff * big_n,
        np.where(y_arr > 1.0 - 1.0 / big_n, high_layer, interior),
    )
    return out if out.ndim else float(out)


def folded_density(m: StationaryMeasure, u, v, y):
    """Folded pair density on (0, 1/2]: pair_density(y) + pair_density(1-y).

    Symmetric in (u, v) when the boundary measure is reversible.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any((y_arr <= 0.0) | (y_arr > 0.5)):
        raise ValueError("folded frequency must lie in (0, 1/2]")
    out = pair_density(m, u, v, y_arr) + pair_density(m, u, v, 1.0 - y_arr)
    return out if np.ndim(out) else float(out)


def afs(m: StationaryMeasure, kind: str = "unfolded", grid: int = 999):
    """Type-aggregated allele-frequency spectrum on a uniform grid.

    Unfolded: grid points i/(grid+1) over (0, 1), summing all directed
    edge densities.  Folded: grid points i/(2 grid) over (0, 1/2],
    adding the reflection of the unfolded spectrum.
    Returns (frequencies, densities).
    """
    if grid < 1:
        raise ValueError("grid must be positive")
    if kind == "unfolded":
        y = np.arange(1, grid + 1) / (grid + 1.0)
        return y, m.aggregate_density(y)
    if kind == "folded":
        y = np.arange(1, grid + 1) / (2.0 * grid)
        return y, m.aggregate_density(y) + m.aggregate_density(1.0 - y)
    raise ValueError(f"unknown spectrum kind {kind!r}")


# ---------------------------------------------------------------------------
# test functions and the generator


@dataclass(frozen=True)
class EdgePolyFunction:
    """Boundary-matched C^2 test function, cubic on each edge.

    f_uv(y) = c_u (1-y) + c_v y + y (1-y) (a_uv + b_uv y), which
    interpolates the vertex values at the endpoints by construction.
    """

    vertex_values: tuple[float, ...]
    bump: dict = field(default_factory=dict)

    def vertex_value(self, i) -> float:
        return self.vertex_values[i]

    def _coeffs(self, i, j):
        return self.bump.get((i, j), (0.0, 0.0))

    def edge_value(self, i, j, y):
        ci, cj = self.vertex_values[i], self.vertex_values[j]
        a, b = self._coeffs(i, j)
        return ci * (1.0 - y) + cj * y + y * (1.0 - y) * (a + b * y)

    def edge_d1(self, i, j, y):
        ci, cj = self.vertex_values[i], self.vertex_values[j]
        a, b = self._coeffs(i, j)
        return (cj - ci) + (1.0 - 2.0 * y) * (a + b * y) + y * (1.0 - y) * b

    def edge_d2(self, i, j, y):
        a, b = self._coeffs(i, j)
        return -2.0 * (a + b * y) + 2.0 * (1.0 - 2.0 * y) * b


def random_matched_basis(g: AlleleGraph, count: int, seed: int):
    """Random boundary-matched cubic test functions (standard-normal coefficients)."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x7E57F0]))
    basis = []
    for _ in range(count):
        c = tuple(rng.standard_normal(g.n).tolist())
        bump = {
            (i, j): (float(rng.standard_normal()), float(rng.standard_normal()))
            for i, j in g.edges()
        }
        basis.append(EdgePolyFunction(vertex_values=c, bump=bump))
    return basis


_MATCH_EPS = 1.0e-6
_MATCH_TOL = 1.0e-8


def check_matched(g: AlleleGraph, f) -> None:
    """Verify edge limits meet the vertex values (linear extrapolation to 0/1).

    The extrapolated limit 2 f(eps) - f(2 eps) removes the slope term, so
    the comparison tolerance 1e-8 is meaningful for O(1) derivatives.
    """
    for i, j in g.edges():
        lim0 = 2.0 * f.edge_value(i, j, _MATCH_EPS) - f.edge_value(i, j, 2.0 * _MATCH_EPS)
        if abs(lim0 - f.vertex_value(i)) > _MATCH_TOL:
            raise ValueError(
                f"test function does not match the vertex value at the 0-end of "
                f"edge {g.vertices[i]!r}->{g.vertices[j]!r}"
            )
        lim1 = 2.0 * f.edge_value(i, j, 1.0 - _MATCH_EPS) - f.edge_value(
            i, j, 1.0 - 2.0 * _MATCH_EPS
        )
        if abs(lim1 - f.vertex_value(j)) > _MATCH_TOL:
            raise ValueError(
                f"test function does not match the vertex value at the 1-end of "
                f"edge {g.vertices[i]!r}->{g.vertices[j]!r}"
            )


def _generator_edge(s: SelectionSpec, f, i, j, y):
    drift_diff = s.gamma[i, j] * f.edge_d1(i, j, y) + 0.5 * f.edge_d2(i, j, y)
    return y * (1.0 - y) * drift_diff


def apply_generator(g: AlleleGraph, s: SelectionSpec, f, z, x: float):
    """Generator of the jump-diffusion applied to a test function at state z.

    z is ("vertex", u) or ("edge", u, v, y); x is the excursion entry
    frequency.  At a vertex the value is sum_v lam[u, v] (f_uv(x) - f_u);
    in the interior it is y (1-y) (gamma f' + f''/2).
    """
    _check_selection(g, s)
    check_matched(g, f)
    if z[0] == "vertex":
        i = _vidx(g, z[1])
        return float(
            sum(
                g.lam[i, j] * (f.edge_value(i, j, x) - f.vertex_value(i))
                for j in range(g.n)
                if g.lam[i, j] > 0
            )
        )
    if z[0] == "edge":
        i, j = _vidx(g, z[1]), _vidx(g, z[2])
        y = float(z[3])
        if not 0.0 < y < 1.0:
            raise ValueError("edge state frequency must lie strictly inside (0, 1)")
        if g.lam[i, j] <= 0:
            raise KeyError(f"no edge {z[1]!r} -> {z[2]!r}")
        return float(_generator_edge(s, f, i, j, y))
    raise ValueError(f"unknown state tag {z[0]!r}")


def stationarity_residual(m: StationaryMeasure, f) -> float:
    """Integral of the generator of f against an exact stationary measure.

    Vanishes (up to quadrature accuracy) for every boundary-matched C^2
    test function; this is the defining property of the measure.
    """
    if m.mode != "exact":
        raise ValueError("the stationarity identity is exact only for exact mode")
    return sum(_pair_residual_map(m, f).values())


def pair_residuals(m: StationaryMeasure, f) -> dict:
    """Per-pair contributions to the stationarity integral (labels as keys).

    Reversibility makes each unordered pair's contribution vanish on its
    own, not just the total.
    """
    g = m.graph
    raw = _pair_residual_map(m, f)
    return {
        (g.vertices[i], g.vertices[j]): val for (i, j), val in raw.items()
    }


def _pair_residual_map(m: StationaryMeasure, f) -> dict:
    g, s, x = m.graph, m.selection, m.x
    check_matched(g, f)
    out = {}
    for i, j in g.edges():
        if (j, i) in out:
            key = (j, i)
        else:
            key = (i, j)
            out[key] = 0.0
        # vertex term of i attributed to this directed edge
        out[key] += m.boundary_mass[i] * g.lam[i, j] * (
            f.edge_value(i, j, x) - f.vertex_value(i)
        )
        e = m.edge_densities[(i, j)]
        integrand = lambda y: _generator_edge(s, f, i, j, y) * e.density(y)
        out[key] += integrate_01(
            integrand, points=(x,), epsabs=1.0e-14, epsrel=1.0e-11
        )
    return out
