"""Many-locus ensembles and sequence-level variation statistics.

A sequence of L unlinked loci shares one scaled mutation matrix
theta[u, v] = lam[u, v] * L while selection may differ per locus.  Loci
with the same selection matrix are grouped into classes, so ensembles
with L = 10^6 cost O(#classes).

Per-sequence summaries (segregating sites, diversity, monomorphic
counts) reduce to per-class boundary measures eta^c and normalizers
Omega^c; the headline quantities are

    theta_hat     = (1/L) sum_j sum_u eta^j_u theta_u
    theta_hat_eff = (1/L) sum_j sum_u eta^j_u theta_u / Omega^j

and every frequency functional is bounded above by expressions
involving only theta_hat_eff, regardless of how selection varies.

Two integration conventions coexist on purpose.  ``expectation`` uses
the full-interval integral of f against the interior density, which
reproduces the neutral closed forms exactly.  ``upper_bound`` evaluates
its value with the layer collapsed to f(0+) and the interior cut at
1/N, the arrangement whose bound slack is pointwise nonnegative; the
two differ by O(1/N).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels, stationary
from .graph import AlleleGraph, SelectionSpec, gamma_from_fitness, unordered_pairs
from .quadrature import gauss_legendre_log_grid, integrate_01

MAX_SAMPLE = 10_000
MIN_POPULATION = stationary.MIN_POPULATION

_OMO_SWITCH = 1.0e-2


def omega_minus_one_over_gamma(gamma: float) -> float:
    """(w(gamma) - 1) / gamma, the full-interval fixation-probability
    integral times two.  Stable through gamma = 0 (limit 1)."""
    g = float(gamma)
    if abs(g) < _OMO_SWITCH:
        return 1.0 + g / 3.0 - g**3 / 45.0 + 2.0 * g**5 / 945.0
    return (kernels.fixation_weight(g) - 1.0) / g


def harmonic_number(m: int) -> float:
    """sum_{k=1}^{m-1} 1/k, the polymorphism integral of g_m."""
    return math.fsum(1.0 / k for k in range(1, m))


def r_positivity_gap(gamma: float, y: float) -> float:
    """sinh(2g)/g - sinh(2g(1-y))/(g(1-y)), nonnegative on (0,1).

    This is the pointwise quantity whose positivity makes the
    frequency-functional bound hold with nonnegative slack.
    """
    def sinhc(t):
        return 1.0 if t == 0.0 else math.sinh(t) / t
    return 2.0 * sinhc(2.0 * gamma) - 2.0 * sinhc(2.0 * gamma * (1.0 - y))


@dataclass(frozen=True)
class SelectionClass:
    selection: SelectionSpec
    multiplicity: int

    def __post_init__(self):
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise ValueError("class multiplicity must be a positive integer")

    @property
    def neutral(self) -> bool:
        return bool(np.all(self.selection.gamma == 0.0))


class LocusEnsemble:
    """Shared mutation matrix plus per-class selection for L loci.

    theta is the per-sequence scaled matrix; per-locus rates are
    theta / L.  N is the population-size proxy of the large-population
    stationary law.  The constructor precomputes, per selection class,
    the boundary measure eta^c, the normalizer Omega^c and the
    occupation corrections K, and refuses parameter combinations where
    some 1 + ln N + K factor is nonpositive (population too small for
    that selection strength; no valid equilibrium expansion exists).
    """

    def __init__(self, labels, theta, big_n, classes):
        theta = np.asarray(theta, dtype=float)
        self.graph = AlleleGraph(labels, theta)
        self.theta = self.graph.lam
        self.big_n = float(big_n)
        if not self.big_n >= MIN_POPULATION:
            raise ValueError(f"population size must be >= {MIN_POPULATION:.0f}")
        self.classes = tuple(classes)
        if not self.classes:
            raise ValueError("need at least one selection class")
        stationary.require_valid(self.graph)
        if np.any(self.theta_u <= 0.0):
            raise ValueError("every type needs a positive total mutation rate")

        log_n = math.log(self.big_n)
        self._eta = []
        self._omega = []
        self._k = []
        self._theta_hat_c = []
        self.reversible = True
        self.warning = None
        k_cache: dict[float, float] = {}
        for c in self.classes:
            if c.selection.n != self.graph.n:
                raise ValueError("selection class size does not match the graph")
            bm = stationary.boundary_measure(self.graph, c.selection, mode="scaled")
            if not bm.reversible:
                self.reversible = False
                self.warning = bm.warning
            kmat = np.zeros_like(self.theta)
            for i, j in self.graph.edges():
                kmat[i, j] = _k_signed(c.selection.gamma[i, j], k_cache)
                if 1.0 + log_n + kmat[i, j] <= 0.0:
                    raise ValueError(
                        f"1 + ln N + K is nonpositive on edge "
                        f"{self.graph.vertices[i]!r}->{self.graph.vertices[j]!r} "
                        f"(gamma={c.selection.gamma[i, j]:.3g}, N={self.big_n:.3g}); "
                        f"increase N"
                    )
            omega_c = 1.0 + (2.0 / self.L) * sum(
                bm.weights[i] * self.theta[i, j] * (1.0 + log_n + kmat[i, j])
                for i, j in self.graph.edges()
            )
            self._eta.append(bm.weights)
            self._omega.append(float(omega_c))
            self._k.append(kmat)
            self._theta_hat_c.append(float(bm.weights @ self.theta_u))
        self._grid = None

    # -- basic aggregates ---------------------------------------------

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def L(self) -> int:
        return sum(c.multiplicity for c in self.classes)

    @property
    def theta_u(self) -> np.ndarray:
        return self.theta.sum(axis=1)

    @property
    def theta_min(self) -> float:
        return float(self.theta_u.min())

    @property
    def theta_max(self) -> float:
        return float(self.theta_u.max())

    def class_eta(self, c: int) -> np.ndarray:
        return self._eta[c]

    def class_omega(self, c: int) -> float:
        return self._omega[c]

    def class_k(self, c: int) -> np.ndarray:
        return self._k[c]

    def class_theta_hat(self, c: int) -> float:
        return self._theta_hat_c[c]

    @property
    def theta_hat(self) -> float:
        L = self.L
        return sum(
            c.multiplicity * th for c, th in zip(self.classes, self._theta_hat_c)
        ) / L

    @property
    def theta_hat_eff(self) -> float:
        L = self.L
        return sum(
            c.multiplicity * th / om
            for c, th, om in zip(self.classes, self._theta_hat_c, self._omega)
        ) / L

    @property
    def mu_hat(self) -> np.ndarray:
        """Monomorphy-weighted boundary vector (1/L) sum_j eta^j / Omega^j."""
        L = self.L
        out = np.zeros(self.n)
        for c, eta, om in zip(self.classes, self._eta, self._omega):
            out += c.multiplicity * eta / om
        return out / L

    @property
    def neutral(self) -> bool:
        return all(c.neutral for c in self.classes)

    def edge_coefficient(self, c: int, i: int, j: int) -> float:
        """2 eta^c_u theta_uv / (L Omega^c), the interior-density prefactor."""
        return 2.0 * self._eta[c][i] * self.theta[i, j] / (self.L * self._omega[c])


def _k_signed(gamma, cache):
    if gamma == 0.0:
        return 0.0
    a = abs(float(gamma))
    k = cache.get(a)
    if k is None:
        k = kernels.occupation_correction(a)
        cache[a] = k
    return k if gamma > 0 else -k


def neutral_ensemble(labels, theta, big_n, num_loci) -> LocusEnsemble:
    n = len(tuple(labels))
    cls = SelectionClass(SelectionSpec(np.zeros((n, n))), int(num_loci))
    return LocusEnsemble(labels, theta, big_n, (cls,))


# ---------------------------------------------------------------------------
# frequency functionals


@dataclass(frozen=True)
class FrequencyFunctional:
    """A per-locus statistic: boundary value at monomorphic states and a
    function of the edge frequency.  ``integrable`` declares that
    int_0^1 f(y)/y dy is finite, which gates the quadrature path and the
    stronger bound."""

    name: str
    fn: object
    zero_limit: float
    integrable: bool
    boundary_value: float = 0.0
    edge_fns: dict | None = None

    def __call__(self, y):
        return self.fn(y)


def boundary_indicator() -> FrequencyFunctional:
    return FrequencyFunctional(
        name="boundary",
        fn=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        zero_limit=0.0,
        integrable=True,
        boundary_value=1.0,
    )


def interior_indicator() -> FrequencyFunctional:
    return FrequencyFunctional(
        name="interior",
        fn=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        zero_limit=1.0,
        integrable=False,
    )


def sample_polymorphism(m: int) -> FrequencyFunctional:
    """g_m(y) = 1 - y^m - (1-y)^m: chance a size-m sample is polymorphic."""
    m = int(m)
    if not 2 <= m <= MAX_SAMPLE:
        raise ValueError(f"sample size must be in [2, {MAX_SAMPLE}]")

    def g(y, _m=m):
        y = np.asarray(y, dtype=float)
        return 1.0 - y**_m - (1.0 - y) ** _m

    return FrequencyFunctional(
        name=f"sample_polymorphism_{m}", fn=g, zero_limit=0.0, integrable=True
    )


def pairwise_difference() -> FrequencyFunctional:
    """h(y) = 2 y (1-y); the same for every sample size m >= 2."""

    def h(y):
        y = np.asarray(y, dtype=float)
        return 2.0 * y * (1.0 - y)

    return FrequencyFunctional(
        name="pairwise_difference", fn=h, zero_limit=0.0, integrable=True
    )


# ---------------------------------------------------------------------------
# expectations


def expectation(e: LocusEnsemble, f: FrequencyFunctional, method: str = "auto"):
    """Steady-state expectation of sum-over-loci of f.

    Analytic routes exist for the boundary/interior indicators, the
    pairwise difference, and (on neutral classes) g_m.  The quadrature
    route integrates f against the interior densities over the whole of
    (0, 1) and needs int f(y)/y dy < infinity.
    """
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        if f.name == "boundary":
            return _monomorphic_count(e)
        if f.name == "interior":
            return _polymorphic_count(e)
        if f.name == "pairwise_difference":
            return _pairwise_total(e)
        if f.name.startswith("sample_polymorphism_") and e.neutral:
            m = int(f.name.rsplit("_", 1)[1])
            return _neutral_gm(e, m)
    return _expectation_quadrature(e, f)


def _monomorphic_count(e: LocusEnsemble) -> float:
    return sum(c.multiplicity / om for c, om in zip(e.classes, e._omega))


def _polymorphic_count(e: LocusEnsemble) -> float:
    # written as multiplicity minus the monomorphic share so that the
    # two counts add up to L without rounding
    return sum(c.multiplicity - c.multiplicity / om for c, om in zip(e.classes, e._omega))


def _pairwise_total(e: LocusEnsemble) -> float:
    total = 0.0
    for ci, c in enumerate(e.classes):
        acc = 0.0
        for i, j in e.graph.edges():
            acc += e.edge_coefficient(ci, i, j) * omega_minus_one_over_gamma(
                c.selection.gamma[i, j]
            )
        total += c.multiplicity * acc
    return total


def _neutral_gm(e: LocusEnsemble, m: int) -> float:
    return 2.0 * e.theta_hat_eff * harmonic_number(m)


def _expectation_quadrature(e: LocusEnsemble, f: FrequencyFunctional) -> float:
    if not f.integrable and f.zero_limit != 0.0:
        raise ValueError(
            f"functional {f.name!r} has a divergent interior integral; "
            f"no quadrature route exists (use the analytic route)"
        )
    total = f.boundary_value * _monomorphic_count(e)
    total += f.zero_limit * 2.0 * e.theta_hat_eff
    for ci, c in enumerate(e.classes):
        acc = 0.0
        for i, j in e.graph.edges():
            gamma = c.selection.gamma[i, j]
            if f.edge_fns is not None:
                key = (e.graph.vertices[i], e.graph.vertices[j])
                fij = f.edge_fns[key]
            else:
                fij = f.fn
            val = integrate_01(
                lambda y: float(fij(y))
                * kernels.fixation_prob(gamma, 1.0 - y)
                / (y * (1.0 - y)),
                epsabs=1.0e-14,
                epsrel=1.0e-11,
            )
            acc += e.edge_coefficient(ci, i, j) * val
        total += c.multiplicity * acc
    return total


# ---------------------------------------------------------------------------
# neutral closed forms


@dataclass(frozen=True)
class NeutralStatistics:
    theta_hat_eff: float
    monomorphic: float
    polymorphic: float
    segregating: float
    diversity: float
    sample_size: int
    first_order: dict


def neutral_statistics(e: LocusEnsemble, m: int = 2) -> NeutralStatistics:
    """The closed-form neutral summary set.

    Exact forms keep the full normalizer Omega_N; the ``first_order``
    dict carries the familiar expansions that drop the 1/Omega_N
    correction (valid when ln N is small compared to L).
    """
    if not e.neutral:
        raise ValueError("ensemble is not neutral; use expectation() instead")
    m = int(m)
    if not 2 <= m <= MAX_SAMPLE:
        raise ValueError(f"sample size must be in [2, {MAX_SAMPLE}]")
    theta0 = e.theta_hat
    L = e.L
    log_n = math.log(e.big_n)
    omega = 1.0 + 2.0 * (1.0 + log_n) * theta0 / L
    eff = theta0 / omega
    hsum = harmonic_number(m)
    return NeutralStatistics(
        theta_hat_eff=eff,
        monomorphic=L / omega,
        polymorphic=2.0 * (1.0 + log_n) * eff,
        segregating=2.0 * eff * hsum,
        diversity=2.0 * eff / L,
        sample_size=m,
        first_order={
            "theta_hat": theta0,
            "monomorphic": L - 2.0 * (1.0 + log_n) * theta0,
            "polymorphic": 2.0 * (1.0 + log_n) * theta0,
            "segregating": 2.0 * theta0 * hsum,
            "diversity": 2.0 * theta0 / L,
        },
    )


# ---------------------------------------------------------------------------
# upper bounds


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    bound_f0_integral: float
    bound_integrable: float | None
    slack: float


_BOUND_RTOL = 1.0e-9


def _bound_grid(e: LocusEnsemble):
    """Shared composite Gauss-Legendre grid on (1/N, 1) in log space.

    Value and bound integrals are evaluated on the same nodes, so the
    bound slack inherits the pointwise sign of the integrand instead of
    picking up independent quadrature errors.
    """
    if e._grid is None:
        y, w = gauss_legendre_log_grid(1.0 / e.big_n)
        inv_y = w / y
        per_edge = {}
        for ci, c in enumerate(e.classes):
            for i, j in e.graph.edges():
                gamma = c.selection.gamma[i, j]
                q = kernels.fixation_prob(gamma, 1.0 - y)
                per_edge[(ci, i, j)] = w * q / (y * (1.0 - y))
        e._grid = (y, inv_y, per_edge)
    return e._grid


def upper_bound(e: LocusEnsemble, f: FrequencyFunctional) -> BoundReport:
    """Value and bounds for a nonnegative frequency-only functional.

    The value uses the finite-N representation with the boundary layer
    collapsed to f(0+) and the interior integral cut at 1/N; with that
    convention the first bound exceeds the value by a nonnegative
    remainder for every reversible ensemble.
    """
    if f.edge_fns is not None:
        raise ValueError("bounds require a type-independent functional")
    if f.boundary_value != 0.0:
        raise ValueError("bounds require zero value at monomorphic states")
    y, inv_y, per_edge = _bound_grid(e)
    fvals = np.asarray(f.fn(y), dtype=float)
    if np.any(fvals < -1.0e-12):
        raise ValueError("bounds require a nonnegative functional")

    value = 0.0
    for ci, c in enumerate(e.classes):
        acc = 0.0
        for i, j in e.graph.edges():
            acc += e.edge_coefficient(ci, i, j) * (
                f.zero_limit + float(per_edge[(ci, i, j)] @ fvals)
            )
        value += c.multiplicity * acc

    tail = float(inv_y @ fvals)
    bound1 = 2.0 * e.theta_hat_eff * (f.zero_limit + tail)
    bound2 = None
    if f.integrable:
        full = integrate_01(lambda yy: float(f.fn(yy)) / yy, epsabs=1.0e-13)
        bound2 = 2.0 * e.theta_hat_eff * full

    scale = max(1.0, abs(bound1))
    if value < -_BOUND_RTOL * scale or value > bound1 + _BOUND_RTOL * scale:
        raise RuntimeError(
            f"bound violated for {f.name!r}: value={value!r}, bound={bound1!r}"
        )
    if bound2 is not None and value > bound2 + _BOUND_RTOL * max(1.0, abs(bound2)):
        raise RuntimeError(
            f"integrable bound violated for {f.name!r}: value={value!r}, "
            f"bound={bound2!r}"
        )
    return BoundReport(
        name=f.name,
        value=value,
        bound_f0_integral=bound1,
        bound_integrable=bound2,
        slack=bound1 - value,
    )


def sandwich(e: LocusEnsemble):
    """(lower, theta_hat_eff, theta_hat, theta_max) with
    lower = theta_min / (1 + 2 (1+ln N) theta_min / L)."""
    lo = e.theta_min / (1.0 + 2.0 * (1.0 + math.log(e.big_n)) * e.theta_min / e.L)
    return lo, e.theta_hat_eff, e.theta_hat, e.theta_max


# ---------------------------------------------------------------------------
# sequence statistics


def segregating_sites(e: LocusEnsemble) -> float:
    """Expected number of polymorphic loci, via the per-pair weights
    eta_u theta_uv (1+ln N+K) + eta_v theta_vu (1+ln N-K).

    This arrangement never forms e^{2 gamma} explicitly, so it stays
    finite for strong selection where the textbook pair form overflows.
    """
    log_n = math.log(e.big_n)
    total = 0.0
    for ci, c in enumerate(e.classes):
        eta = e._eta[ci]
        kmat = e._k[ci]
        pair_sum = 0.0
        for i, j in unordered_pairs(e.graph):
            k = kmat[i, j]
            pair_sum += eta[i] * e.theta[i, j] * (1.0 + log_n + k)
            pair_sum += eta[j] * e.theta[j, i] * (1.0 + log_n - k)
        omega_minus_1 = 2.0 * pair_sum / e.L
        total += c.multiplicity * omega_minus_1 / e._omega[ci]
    return total


def diversity_pi(e: LocusEnsemble) -> float:
    """Expected pairwise difference per site.

    Reversible ensembles use the per-pair closed form with the
    1/w(-gamma) weight; otherwise the directed edge sum is used and a
    warning is issued, since the pair form presumes detailed balance.
    The bound pi <= 2 theta_hat_eff / L is enforced.
    """
    if e.reversible:
        pi = 0.0
        for ci, c in enumerate(e.classes):
            eta = e._eta[ci]
            acc = 0.0
            for i, j in unordered_pairs(e.graph):
                acc += _pi_pair_term(
                    eta[i], eta[j], e.theta[i, j], e.theta[j, i],
                    c.selection.gamma[i, j],
                )
            pi += 4.0 * c.multiplicity * acc / (e._omega[ci] * e.L**2)
    else:
        warnings.warn(
            "ensemble is not reversible; computing diversity from the "
            "directed edge sum instead of the pair closed form",
            stationary.NonReversibleWarning,
            stacklevel=2,
        )
        pi = _pairwise_total(e) / e.L
    cap = 2.0 * e.theta_hat_eff / e.L
    if pi > cap * (1.0 + 1.0e-9):
        raise RuntimeError(f"diversity {pi!r} exceeds its bound {cap!r}")
    return pi


def _pi_pair_term(eta_u, eta_v, th_uv, th_vu, gamma):
    # eta_u theta_uv expm1(2 gamma) / (2 gamma); for exponents beyond
    # float range, detailed balance turns it into a plain difference
    g2 = 2.0 * gamma
    if g2 == 0.0:
        return eta_u * th_uv
    if abs(g2) < 700.0:
        return eta_u * th_uv * math.expm1(g2) / g2
    return (eta_v * th_vu - eta_u * th_uv) / g2


def two_type_diversity(theta_u, theta_v, gamma, big_n, num_loci) -> float:
    """Closed-form pi for two types sharing one gamma across loci."""
    L = float(num_loci)
    lbl = ("u", "v")
    th = np.array([[0.0, theta_u], [theta_v, 0.0]])
    gm = np.array([[0.0, gamma], [-gamma, 0.0]])
    e = LocusEnsemble(
        lbl, th, big_n, (SelectionClass(SelectionSpec(gm), int(num_loci)),)
    )
    omega = e.class_omega(0)
    if gamma == 0.0:
        ratio = 1.0
    else:
        ratio = math.expm1(2.0 * gamma) / (2.0 * gamma)
    return (
        (1.0 / (L * omega))
        * (4.0 * theta_u * theta_v / (theta_v + theta_u * math.exp(2.0 * gamma)))
        * ratio
    )


def bias_ratio(e: LocusEnsemble, gamma: float) -> tuple[float, str]:
    """theta_hat over its neutral value for a two-type model, and the
    regime label: mutation and fixation biases 'opposing' (ratio > 1),
    'aligned' (ratio < 1), or 'balanced' (ratio = 1)."""
    if e.n != 2:
        raise ValueError("bias ratio is defined for two-type ensembles only")
    th_u, th_v = float(e.theta_u[0]), float(e.theta_u[1])
    sign = (th_v - th_u) * (-math.expm1(-2.0 * gamma))
    if sign == 0.0:
        return 1.0, "balanced"
    em = math.exp(-2.0 * gamma)
    ratio = (th_u + th_v) * (1.0 + em) / (2.0 * (th_u + th_v * em))
    return ratio, ("opposing" if sign > 0.0 else "aligned")


def eta_gamma_inversion(target_eta, theta, labels=None) -> SelectionSpec:
    """Selection matrix making target_eta the boundary measure of theta.

    gamma[u, v] = 0.5 ln(eta_v theta_vu / (eta_u theta_uv)) on every
    edge.  The result is antisymmetric by construction but generally not
    derived from a fitness landscape unless theta is cycle-balanced.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    if labels is None:
        labels = tuple(f"t{i}" for i in range(n))
    g = AlleleGraph(labels, theta)
    stationary.require_valid(g)
    eta = np.asarray(target_eta, dtype=float)
    if eta.shape != (n,):
        raise ValueError("target measure has the wrong length")
    if np.any(eta <= 0.0):
        raise ValueError("target measure must be strictly positive")
    if abs(eta.sum() - 1.0) > 1.0e-12:
        raise ValueError("target measure must sum to 1")
    gamma = np.zeros((n, n))
    for i, j in g.edges():
        if i < j:
            val = 0.5 * math.log(
                eta[j] * theta[j, i] / (eta[i] * theta[i, j])
            )
            gamma[i, j] = val
            gamma[j, i] = -val
    return SelectionSpec(gamma, graph=g)


# ---------------------------------------------------------------------------
# randomized ensembles for audits


def random_reversible_ensemble(
    seed: int,
    max_types: int = 5,
    max_classes: int = 6,
    gamma_scale: float = 5.0,
    big_n: float | None = None,
) -> LocusEnsemble:
    """A random ensemble whose classes are all reversible.

    Mutation uses theta[u, v] = s[u, v] r[v] with s symmetric, which
    satisfies the cycle condition for any s, r; selection is drawn from
    random fitness landscapes (|gamma| <= 2 * gamma_scale).
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xA0D17]))
    n = int(rng.integers(2, max_types + 1))
    s = rng.uniform(0.2, 1.0, (n, n))
    s = 0.5 * (s + s.T)
    r = rng.uniform(0.5, 2.0, n)
    scale = 10.0 ** rng.uniform(-3.5, -0.5)
    theta = scale * s * r[None, :]
    np.fill_diagonal(theta, 0.0)
    labels = tuple(f"t{i}" for i in range(n))
    g = AlleleGraph(labels, theta)
    n_classes = int(rng.integers(1, max_classes + 1))
    mult = rng.multinomial(
        int(rng.integers(n_classes, 10_000)), np.ones(n_classes) / n_classes
    ) + 1
    classes = []
    for c in range(n_classes):
        if c == 0 and rng.random() < 0.3:
            spec = SelectionSpec(np.zeros((n, n)))
        else:
            fitness = rng.uniform(-gamma_scale, gamma_scale, n)
            spec = gamma_from_fitness(fitness, g)
        classes.append(SelectionClass(spec, int(mult[c])))
    if big_n is None:
        big_n = float(10.0 ** rng.uniform(3.0, 6.0))
    return LocusEnsemble(labels, theta, big_n, tuple(classes))
