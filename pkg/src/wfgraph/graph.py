"""Allelic-type graphs and directional selection.

A model is a finite set of labelled types together with a nonnegative
mutation-rate matrix lam[u, v] (diagonal zero) and an antisymmetric
selection matrix gamma[u, v].  Three structural assumptions are required
for the equilibrium theory:

  (i)   every type has positive total mutation rate,
  (ii)  rates are pairwise reciprocal: lam[u, v] > 0 iff lam[v, u] > 0,
  (iii) the graph of positive rates is strongly connected.

Selection is *directional* when it derives from scalar fitnesses,
gamma[u, v] = fitness[v] - fitness[u]; then all cycle sums of gamma
vanish.  Raw antisymmetric matrices without that potential structure are
accepted but flagged, because the reversible equilibrium formulas do not
apply to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Selection coefficients beyond this magnitude make e^{2 gamma} useless in
# double precision even after log-space rescaling; refuse them early.
MAX_GAMMA = 1.0e4

ANTISYMMETRY_TOL = 1.0e-12
CYCLE_TOL = 1.0e-10


class AssumptionError(ValueError):
    """A structural assumption (i)-(iii) is violated."""


def _as_rate_matrix(lam, n_expected=None):
    arr = np.asarray(lam, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"rate matrix must be square, got shape {arr.shape}")
    if n_expected is not None and arr.shape[0] != n_expected:
        raise ValueError(
            f"rate matrix is {arr.shape[0]}x{arr.shape[0]} but {n_expected} vertices were given"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("rate matrix contains non-finite entries")
    if np.any(arr < 0):
        raise ValueError("rate matrix contains negative entries")
    arr = arr.copy()
    np.fill_diagonal(arr, 0.0)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AlleleGraph:
    """Labelled types plus a mutation-rate matrix.

    Vertex labels are strings; indices follow insertion order of
    ``vertices``.  The constructor enforces only structural sanity
    (square, nonnegative, finite).  Assumptions (i)-(iii) are checked by
    :func:`validate_graph`, which reports rather than raises so a CLI can
    name the violated assumption.
    """

    vertices: tuple[str, ...]
    lam: np.ndarray = field(repr=False)

    def __init__(self, vertices, lam):
        vertices = tuple(str(v) for v in vertices)
        if len(vertices) < 2:
            raise ValueError("need at least two types")
        if len(set(vertices)) != len(vertices):
            raise ValueError("vertex labels must be unique")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "lam", _as_rate_matrix(lam, len(vertices)))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, label: str) -> int:
        try:
            return self.vertices.index(label)
        except ValueError:
            raise KeyError(f"unknown vertex {label!r}") from None

    def total_rates(self) -> np.ndarray:
        """Per-type total mutation rate (row sums of lam)."""
        return self.lam.sum(axis=1)

    def edges(self):
        """Directed edges (i, j) with lam[i, j] > 0, row-major order."""
        n = self.n
        return [(i, j) for i in range(n) for j in range(n) if self.lam[i, j] > 0]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]

    def __bool__(self):
        return self.ok


def validate_graph(g: AlleleGraph) -> ValidationReport:
    """Check assumptions (i)-(iii); list violations instead of raising."""
    violations = []
    rates = g.total_rates()
    for i, r in enumerate(rates):
        if not r > 0:
            violations.append(
                f"assumption i: vertex {g.vertices[i]!r} has zero total mutation rate"
            )
    pos = g.lam > 0
    bad = np.argwhere(pos & ~pos.T)
    for i, j in bad:
        violations.append(
            "assumption ii: rate "
            f"{g.vertices[i]!r}->{g.vertices[j]!r} is positive but the reverse rate is zero"
        )
    if not _strongly_connected(pos):
        violations.append("assumption iii: positive-rate graph is not strongly connected")
    return ValidationReport(ok=not violations, violations=tuple(violations))


def require_valid(g: AlleleGraph) -> None:
    rep = validate_graph(g)
    if not rep.ok:
        raise AssumptionError("; ".join(rep.violations))


def _strongly_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]

    def reach(mat):
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for j in np.nonzero(mat[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        return seen

    return bool(reach(adj).all() and reach(adj.T).all())


@dataclass(frozen=True)
class SelectionSpec:
    """Antisymmetric selection matrix, optionally derived from fitnesses.

    ``potential`` records whether the matrix has vanishing cycle sums on
    the graph's connected pairs (always true for fitness-derived
    matrices).  ``max_cycle_defect`` is the largest absolute cycle-sum
    discrepancy found; nonzero values mean the reversible equilibrium
    machinery does not apply and downstream code falls back to an honest
    invariant-vector solve.
    """

    gamma: np.ndarray = field(repr=False)
    fitness: tuple[float, ...] | None = None
    potential: bool = True
    max_cycle_defect: float = 0.0

    def __init__(self, gamma, fitness=None, graph: AlleleGraph | None = None):
        arr = np.asarray(gamma, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"selection matrix must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("selection matrix contains non-finite entries")
        asym = np.abs(arr + arr.T).max()
        if asym > ANTISYMMETRY_TOL:
            raise ValueError(
                f"selection matrix is not antisymmetric (max |g+g.T| = {asym:.3e}, "
                f"tolerance {ANTISYMMETRY_TOL:.0e}); refusing to symmetrize"
            )
        if np.abs(arr).max() > MAX_GAMMA:
            raise ValueError(f"|gamma| exceeds sanity bound {MAX_GAMMA:.0e}")
        arr = arr.copy()
        np.fill_diagonal(arr, 0.0)
        arr.setflags(write=False)
        potential, defect = (True, 0.0) if graph is None else _cycle_defect(arr, graph)
        object.__setattr__(self, "gamma", arr)
        object.__setattr__(
            self, "fitness", None if fitness is None else tuple(float(f) for f in fitness)
        )
        object.__setattr__(self, "potential", potential)
        object.__setattr__(self, "max_cycle_defect", defect)

    @property
    def n(self) -> int:
        return self.gamma.shape[0]


def gamma_from_fitness(fitness, g: AlleleGraph) -> SelectionSpec:
    """Selection from a fitness landscape: gamma[u, v] = fitness[v] - fitness[u].

    The result is antisymmetric with zero cycle sums by construction.
    Adding a constant to all fitnesses leaves gamma unchanged.
    """
    f = np.asarray(fitness, dtype=float)
    if f.shape != (g.n,):
        raise ValueError(f"need one fitness per vertex, got shape {f.shape} for n={g.n}")
    if not np.all(np.isfinite(f)):
        raise ValueError("fitness contains non-finite values")
    mat = f[None, :] - f[:, None]
    spec = SelectionSpec(mat, fitness=f, graph=g)
    return spec


def _cycle_defect(gamma: np.ndarray, g: AlleleGraph):
    """Max |cycle sum| of gamma over fundamental cycles of the positive-rate graph.

    Builds a BFS spanning tree of the undirected support, assigns each
    vertex the tree potential, and measures how far each non-tree edge is
    from closing exactly.  Zero defect on every non-tree edge is
    equivalent to zero sum around every cycle.
    """
    n = g.n
    support = (g.lam > 0) | (g.lam.T > 0)
    phi = np.full(n, np.nan)
    phi[0] = 0.0
    queue = [0]
    while queue:
        i = queue.pop()
        for j in np.nonzero(support[i])[0]:
            if np.isnan(phi[j]):
                phi[j] = phi[i] + gamma[i, j]
                queue.append(int(j))
    if np.isnan(phi).any():
        # disconnected support: defect is only meaningful per component;
        # validate_graph flags the connectivity problem separately
        phi = np.nan_to_num(phi)
    defect = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if support[i, j]:
                defect = max(defect, abs(gamma[i, j] - (phi[j] - phi[i])))
    return bool(defect <= CYCLE_TOL), float(defect)


def unordered_pairs(g: AlleleGraph) -> list[tuple[int, int]]:
    """Connected unordered pairs {u, v}, enumerated as (i, j) with i < j.

    Deterministic lexicographic order by vertex index, so every directed
    edge of a validated graph appears in exactly one pair.
    """
    n = g.n
    return [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if g.lam[i, j] > 0 or g.lam[j, i] > 0
    ]
