"""Monte Carlo simulation of the graph-valued jump diffusion.

The process alternates exponential holding at a vertex u (rate
lambda_u / x, the boundary-mutation speed) with diffusion excursions on
a directed edge: the mutant enters at frequency x and follows
d xi = gamma xi (1 - xi) dt + sqrt(xi (1 - xi)) dB until it hits 0
(extinction, back to u) or 1 (fixation at the target vertex).

simulate_paths records time-weighted occupancy and thinned snapshot
counts after a burn-in.  fixation_monte_carlo estimates absorption
probabilities of a single excursion.  embedded_chain_sim replaces
excursions by instantaneous accept/reject moves with the exact
fixation probability, so it carries no discretization error.

Replicates get independent RNG substreams keyed by replicate index and
write to private accumulator slices; the merge is a fixed-order sum,
so results are byte-identical for any thread count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from . import kernels, rng
from .graph import AlleleGraph, SelectionSpec, require_valid, unordered_pairs

UNIFORM_BINS = 200
MAX_TIME_STEP = 1.0e-3
DEFAULT_TIME_STEP = 1.0e-5
BURN_IN_FRACTION = 0.1
THREAD_ENV_VAR = "WFGRAPH_THREADS"


def _configure_threads() -> None:
    raw = os.environ.get(THREAD_ENV_VAR)
    if not raw:
        return
    try:
        want = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREAD_ENV_VAR} must be an integer, got {raw!r}") from exc
    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(max(1, min(want, limit)))


# ---------------------------------------------------------------------------
# configuration and results


@dataclass(frozen=True)
class SimConfig:
    graph: AlleleGraph
    selection: SelectionSpec
    x: float
    dt: float = DEFAULT_TIME_STEP
    horizon: float = 1000.0
    replicates: int = 1
    seed: int = 0
    thin: float = 1.0

    def __post_init__(self):
        require_valid(self.graph)
        if self.selection.gamma.shape != (self.graph.n, self.graph.n):
            raise ValueError("selection matrix shape does not match the graph")
        if not 0.0 < self.x < 1.0:
            raise ValueError("entry frequency x must lie in (0, 1)")
        if not 0.0 < self.dt <= MAX_TIME_STEP:
            raise ValueError(f"dt must lie in (0, {MAX_TIME_STEP}]")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        if not self.thin > 0.0:
            raise ValueError("thinning interval must be positive")


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Time-weighted occupancy plus thinned snapshot counts.

    Edge histograms live on unordered vertex pairs (i < j) with the
    coordinate equal to the frequency of the higher-indexed allele;
    bin 0 is the entry layer (0, x), bins 1..200 are uniform on
    [x, 1 - x], bin 201 is the layer (1 - x, 1).
    """

    labels: tuple
    pairs: tuple
    x: float
    bin_edges: np.ndarray = field(repr=False)
    vertex_time: np.ndarray = field(repr=False)
    edge_time: np.ndarray = field(repr=False)
    vertex_counts: np.ndarray = field(repr=False)
    edge_counts: np.ndarray = field(repr=False)
    total_time: float
    replicates: int

    def vertex_fraction(self) -> np.ndarray:
        return self.vertex_time / self.total_time

    def edge_mass(self) -> np.ndarray:
        return self.edge_time / self.total_time

    def interior_fraction(self) -> float:
        return float(self.edge_time.sum() / self.total_time)

    def edge_density(self, pair_index: int) -> np.ndarray:
        """Empirical density over the pair histogram (mass / width)."""
        widths = np.diff(self.bin_edges)
        return self.edge_time[pair_index] / (self.total_time * widths)

    def mass_check(self) -> float:
        return float(self.vertex_time.sum() + self.edge_time.sum()) / self.total_time


@dataclass(frozen=True)
class FixationEstimate:
    probability: float
    standard_error: float
    bias_bound: float
    replicates: int
    dt: float


@dataclass(frozen=True)
class RefinementCheck:
    """Paired dt versus dt/2 comparison on coupled Brownian paths."""

    fine: float
    coarse: float
    difference: float
    difference_se: float
    estimate_se: float
    disagreements: int
    replicates: int
    dt: float


@dataclass(frozen=True)
class EmbeddedChainResult:
    labels: tuple
    occupancy: np.ndarray = field(repr=False)
    standard_error: np.ndarray = field(repr=False)
    steps: int
    accepted: int


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True, parallel=True)
def _paths_kernel(lam_mean_hold, cum_pick, gamma, pair_id, flip,
                  x, dt, horizon, burn, thin, seed,
                  vertex_time, edge_time, vertex_counts, edge_counts):
    n_rep = vertex_time.shape[0]
    width = (1.0 - 2.0 * x) / UNIFORM_BINS
    sqdt = math.sqrt(dt)
    n_bins = UNIFORM_BINS + 2
    for r in prange(n_rep):
        state = np.empty(4, np.uint64)
        rng.init_state(seed, np.uint64(r), state)
        t = 0.0
        next_snap = burn + thin
        u = 0
        have_spare = False
        spare = 0.0
        while t < horizon:
            # vertex holding
            hold = rng.next_exponential(state, lam_mean_hold[u])
            t_end = t + hold
            lo = t if t > burn else burn
            hi = t_end if t_end < horizon else horizon
            if hi > lo:
                vertex_time[r, u] += hi - lo
            while next_snap < t_end:
                if next_snap >= horizon:
                    break
                vertex_counts[r, u] += 1
                next_snap += thin
            t = t_end
            if t >= horizon:
                break
            # pick the target of the next mutation
            pick = rng.next_double(state)
            v = 0
            for w in range(cum_pick.shape[1]):
                if pick < cum_pick[u, w]:
                    v = w
                    break
            p = pair_id[u, v]
            fl = flip[u, v]
            g = gamma[u, v]
            xi = x
            # diffusion excursion
            while t < horizon:
                step_end = t + dt
                if step_end > horizon:
                    step_end = horizon
                lo = t if t > burn else burn
                if step_end > lo or next_snap < step_end:
                    y = xi if fl == 0 else 1.0 - xi
                    if y < x:
                        b = 0
                    elif y > 1.0 - x:
                        b = n_bins - 1
                    else:
                        b = 1 + int((y - x) / width)
                        if b > UNIFORM_BINS:
                            b = UNIFORM_BINS
                    if step_end > lo:
                        edge_time[r, p, b] += step_end - lo
                    while next_snap < step_end:
                        edge_counts[r, p, b] += 1
                        next_snap += thin
                if have_spare:
                    z = spare
                    have_spare = False
                else:
                    z, spare = rng.next_normal_pair(state)
                    have_spare = True
                xi = xi + g * xi * (1.0 - xi) * dt + math.sqrt(xi * (1.0 - xi)) * sqdt * z
                t = t + dt
                if xi <= 0.0:
                    break
                if xi >= 1.0:
                    u = v
                    break


@njit(cache=True, parallel=True)
def _fixation_kernel(gamma, x, dt, seed, out):
    sqdt = math.sqrt(dt)
    for r in prange(out.shape[0]):
        state = np.empty(4, np.uint64)
        rng.init_state(seed, np.uint64(r), state)
        xi = x
        have_spare = False
        spare = 0.0
        while True:
            if have_spare:
                z = spare
                have_spare = False
            else:
                z, spare = rng.next_normal_pair(state)
                have_spare = True
            xi = xi + gamma * xi * (1.0 - xi) * dt + math.sqrt(xi * (1.0 - xi)) * sqdt * z
            if xi <= 0.0:
                out[r] = 0
                break
            if xi >= 1.0:
                out[r] = 1
                break


@njit(cache=True, parallel=True)
def _refinement_kernel(gamma, x, dt, seed, out_fine, out_coarse):
    """Coupled excursions at step dt and dt/2 sharing Brownian increments.

    Per coarse step the fine path takes two half steps with normals
    z1, z2 while the coarse path uses (z1 + z2) / sqrt(2), so the two
    discretizations follow the same underlying noise and the paired
    difference isolates the discretization effect.
    """
    half = 0.5 * dt
    sq_half = math.sqrt(half)
    sq_dt = math.sqrt(dt)
    inv_sq2 = 1.0 / math.sqrt(2.0)
    for r in prange(out_fine.shape[0]):
        state = np.empty(4, np.uint64)
        rng.init_state(seed, np.uint64(r), state)
        xi_f = x
        xi_c = x
        done_f = False
        done_c = False
        while not (done_f and done_c):
            z1, z2 = rng.next_normal_pair(state)
            if not done_f:
                xi_f = (xi_f + gamma * xi_f * (1.0 - xi_f) * half
                        + math.sqrt(xi_f * (1.0 - xi_f)) * sq_half * z1)
                if xi_f <= 0.0:
                    done_f = True
                    out_fine[r] = 0
                elif xi_f >= 1.0:
                    done_f = True
                    out_fine[r] = 1
            if not done_f:
                xi_f = (xi_f + gamma * xi_f * (1.0 - xi_f) * half
                        + math.sqrt(xi_f * (1.0 - xi_f)) * sq_half * z2)
                if xi_f <= 0.0:
                    done_f = True
                    out_fine[r] = 0
                elif xi_f >= 1.0:
                    done_f = True
                    out_fine[r] = 1
            if not done_c:
                zc = (z1 + z2) * inv_sq2
                xi_c = (xi_c + gamma * xi_c * (1.0 - xi_c) * dt
                        + math.sqrt(xi_c * (1.0 - xi_c)) * sq_dt * zc)
                if xi_c <= 0.0:
                    done_c = True
                    out_coarse[r] = 0
                elif xi_c >= 1.0:
                    done_c = True
                    out_coarse[r] = 1


@njit(cache=True)
def _embedded_kernel(mean_hold, cum_pick, q_fix, x, steps, n_batches, seed,
                     batch_time, accepted):
    state = np.empty(4, np.uint64)
    rng.init_state(seed, np.uint64(0), state)
    u = 0
    for k in range(steps):
        b = k * n_batches // steps
        hold = rng.next_exponential(state, mean_hold[u])
        batch_time[b, u] += hold
        pick = rng.next_double(state)
        v = 0
        for w in range(cum_pick.shape[1]):
            if pick < cum_pick[u, w]:
                v = w
                break
        if rng.next_double(state) < q_fix[u, v]:
            u = v
            accepted[0] += 1


# ---------------------------------------------------------------------------
# python wrappers


def _pick_tables(g: AlleleGraph):
    """Cumulative edge-choice probabilities and mean holding times."""
    n = g.n
    rates = g.total_rates()
    cum = np.zeros((n, n))
    for i in range(n):
        cum[i] = np.cumsum(g.lam[i]) / rates[i]
        cum[i, -1] = 1.0
    return cum


def _pair_tables(g: AlleleGraph):
    pairs = tuple(unordered_pairs(g))
    pair_id = np.full((g.n, g.n), -1, dtype=np.int64)
    flip = np.zeros((g.n, g.n), dtype=np.uint8)
    for k, (i, j) in enumerate(pairs):
        pair_id[i, j] = k
        pair_id[j, i] = k
        flip[j, i] = 1
    return pairs, pair_id, flip


def simulate_paths(c: SimConfig) -> EmpiricalMeasure:
    _configure_threads()
    g, n = c.graph, c.graph.n
    cum = _pick_tables(g)
    pairs, pair_id, flip = _pair_tables(g)
    mean_hold = c.x / g.total_rates()
    burn = BURN_IN_FRACTION * c.horizon
    n_bins = UNIFORM_BINS + 2
    vertex_time = np.zeros((c.replicates, n))
    edge_time = np.zeros((c.replicates, len(pairs), n_bins))
    vertex_counts = np.zeros((c.replicates, n), dtype=np.int64)
    edge_counts = np.zeros((c.replicates, len(pairs), n_bins), dtype=np.int64)
    _paths_kernel(mean_hold, cum, c.selection.gamma, pair_id, flip,
                  c.x, c.dt, c.horizon, burn, c.thin, np.uint64(c.seed),
                  vertex_time, edge_time, vertex_counts, edge_counts)
    vt = vertex_time.sum(axis=0)
    et = edge_time.sum(axis=0)
    total = float(vt.sum() + et.sum())
    edges = np.concatenate((
        [0.0], np.linspace(c.x, 1.0 - c.x, UNIFORM_BINS + 1), [1.0]))
    return EmpiricalMeasure(
        labels=g.vertices,
        pairs=pairs,
        x=c.x,
        bin_edges=edges,
        vertex_time=vt,
        edge_time=et,
        vertex_counts=vertex_counts.sum(axis=0),
        edge_counts=edge_counts.sum(axis=0),
        total_time=total,
        replicates=c.replicates,
    )


def fixation_monte_carlo(gamma: float, x: float, replicates: int, seed: int,
                         dt: float = DEFAULT_TIME_STEP) -> FixationEstimate:
    """Fraction of diffusion excursions from x absorbed at 1.

    The Euler-Maruyama bias is first order in dt away from the
    boundaries; bias_bound reports the heuristic (1 + |gamma|) dt and
    the dt-halving test backs it empirically.
    """
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates for a stable estimate")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if not 0.0 < dt <= MAX_TIME_STEP:
        raise ValueError(f"dt must lie in (0, {MAX_TIME_STEP}]")
    if x == 0.0 or x == 1.0:
        return FixationEstimate(x, 0.0, 0.0, replicates, dt)
    _configure_threads()
    out = np.zeros(replicates, dtype=np.uint8)
    _fixation_kernel(float(gamma), float(x), float(dt), np.uint64(seed), out)
    p = float(out.sum()) / replicates
    se = math.sqrt(max(p * (1.0 - p), 1.0 / replicates) / replicates)
    return FixationEstimate(p, se, (1.0 + abs(gamma)) * dt, replicates, dt)


def fixation_refinement(gamma: float, x: float, replicates: int, seed: int,
                        dt: float = DEFAULT_TIME_STEP) -> RefinementCheck:
    """Paired fixation estimates at dt and dt/2 on coupled noise.

    ``difference`` is the mean of the per-path indicator difference
    (fine minus coarse); its standard error reflects the coupling, so
    the comparison against the plain Monte Carlo standard error of the
    estimate itself is sharp rather than noise-dominated.
    """
    if replicates < 1000:
        raise ValueError("need at least 1000 replicates for a stable estimate")
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie strictly in (0, 1)")
    if not 0.0 < dt <= MAX_TIME_STEP:
        raise ValueError(f"dt must lie in (0, {MAX_TIME_STEP}]")
    _configure_threads()
    out_fine = np.zeros(replicates, dtype=np.uint8)
    out_coarse = np.zeros(replicates, dtype=np.uint8)
    _refinement_kernel(float(gamma), float(x), float(dt), np.uint64(seed),
                       out_fine, out_coarse)
    fine = float(out_fine.sum()) / replicates
    coarse = float(out_coarse.sum()) / replicates
    delta = out_fine.astype(np.int64) - out_coarse.astype(np.int64)
    disagreements = int(np.count_nonzero(delta))
    diff = fine - coarse
    var = disagreements / replicates - diff * diff
    diff_se = math.sqrt(max(var, 0.0) / replicates)
    estimate_se = math.sqrt(max(coarse * (1.0 - coarse), 1.0 / replicates)
                            / replicates)
    return RefinementCheck(
        fine=fine,
        coarse=coarse,
        difference=diff,
        difference_se=diff_se,
        estimate_se=estimate_se,
        disagreements=disagreements,
        replicates=replicates,
        dt=dt,
    )


def embedded_chain_sim(g: AlleleGraph, s: SelectionSpec, x: float, steps: int,
                       seed: int, n_batches: int = 100) -> EmbeddedChainResult:
    """Vertex chain with exact fixation-probability acceptance.

    Long-run time-weighted occupancy estimates the boundary measure;
    standard errors come from batch means over contiguous step blocks.
    """
    require_valid(g)
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1)")
    if steps < 10_000:
        raise ValueError("need at least 10^4 steps")
    if not 2 <= n_batches <= steps:
        raise ValueError("batch count must lie in [2, steps]")
    q_fix = np.zeros((g.n, g.n))
    for i, j in g.edges():
        q_fix[i, j] = kernels.fixation_prob(s.gamma[i, j], x)
    cum = _pick_tables(g)
    mean_hold = x / g.total_rates()
    batch_time = np.zeros((n_batches, g.n))
    accepted = np.zeros(1, dtype=np.int64)
    _embedded_kernel(mean_hold, cum, q_fix, x, steps, n_batches,
                     np.uint64(seed), batch_time, accepted)
    total = batch_time.sum()
    occupancy = batch_time.sum(axis=0) / total
    fractions = batch_time / batch_time.sum(axis=1, keepdims=True)
    se = fractions.std(axis=0, ddof=1) / math.sqrt(n_batches)
    return EmbeddedChainResult(
        labels=g.vertices,
        occupancy=occupancy,
        standard_error=se,
        steps=steps,
        accepted=int(accepted[0]),
    )
