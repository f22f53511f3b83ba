"""Cross-validate the Monte Carlo simulator against the analytic modules.

Three comparisons, printed as a compact report:

  1. fixation_monte_carlo versus the closed-form fixation probability,
     with the paired dt-halving refinement check;
  2. embedded_chain_sim occupancy versus the boundary measure;
  3. simulate_paths occupancy versus the exact stationary measure of
     the matching rate-lambda/x process (vertex masses and interior
     fraction).

Effort scales with --replicates / --steps / --horizon, so a quick
smoke run and a tight overnight run use the same entry point.
"""

import argparse
import math

import numpy as np

from wfgraph import (
    AlleleGraph,
    SimConfig,
    boundary_measure,
    embedded_chain_sim,
    exact_stationary,
    fixation_monte_carlo,
    fixation_refinement,
    gamma_from_fitness,
    kernels,
    simulate_paths,
)


def check_fixation(replicates: int, dt: float, seed: int) -> bool:
    ok = True
    print("fixation probability at x = 0.5")
    for gamma in (-2.0, 0.0, 1.0):
        est = fixation_monte_carlo(gamma, 0.5, replicates, seed)
        exact = kernels.fixation_prob(gamma, 0.5)
        dev = abs(est.probability - exact)
        line_ok = dev <= 3.0 * est.standard_error + est.bias_bound
        ok &= line_ok
        print(f"  gamma={gamma:+.1f}  mc={est.probability:.5f}  "
              f"exact={exact:.5f}  dev={dev:.2e}  "
              f"3se={3 * est.standard_error:.2e}  "
              f"{'ok' if line_ok else 'FAIL'}")
    ref = fixation_refinement(-2.0, 0.5, replicates, seed + 1, dt=dt)
    line_ok = abs(ref.difference) < ref.estimate_se
    ok &= line_ok
    print(f"  dt-halving gamma=-2: diff={ref.difference:+.2e} "
          f"(pair se {ref.difference_se:.2e}) vs estimate se "
          f"{ref.estimate_se:.2e}  {'ok' if line_ok else 'FAIL'}")
    return ok


def _demo_model():
    labels = ("A", "B", "C", "D")
    srel = np.array([
        [0.0, 1.0, 0.6, 0.8],
        [1.0, 0.0, 1.2, 0.5],
        [0.6, 1.2, 0.0, 0.9],
        [0.8, 0.5, 0.9, 0.0],
    ])
    lam = 0.1 * srel * np.array([0.8, 1.1, 0.9, 1.3])
    g = AlleleGraph(labels, lam)
    s = gamma_from_fitness((0.0, 0.3, 0.6, 0.2), g)
    return g, s


def check_embedded(steps: int, x: float, seed: int) -> bool:
    g, s = _demo_model()
    res = embedded_chain_sim(g, s, x, steps, seed)
    target = boundary_measure(g, s, mode="exact", x=x).weights
    ok = True
    print(f"embedded chain occupancy, {steps} steps, x = {x:g}")
    for label, occ, se, want in zip(g.vertices, res.occupancy,
                                    res.standard_error, target):
        line_ok = abs(occ - want) <= 3.0 * se
        ok &= line_ok
        print(f"  {label}: mc={occ:.4f}  exact={want:.4f}  "
              f"3se={3 * se:.1e}  {'ok' if line_ok else 'FAIL'}")
    return ok


def check_paths(horizon: float, replicates: int, x: float, dt: float,
                seed: int) -> bool:
    g, s = _demo_model()
    c = SimConfig(g, s, x=x, dt=dt, horizon=horizon,
                  replicates=replicates, seed=seed, thin=5.0)
    m = simulate_paths(c)
    scaled = AlleleGraph(g.vertices, g.lam / x)
    exact = exact_stationary(scaled, s, x)
    ok = True
    print(f"path simulator occupancy, T = {horizon:g}, R = {replicates}")
    frac = m.vertex_fraction()
    for i, label in enumerate(g.vertices):
        want = exact.boundary(label)
        dev = abs(frac[i] - want)
        line_ok = dev <= max(0.1 * want, 0.02)
        ok &= line_ok
        print(f"  {label}: mc={frac[i]:.4f}  exact={want:.4f}  "
              f"{'ok' if line_ok else 'FAIL'}")
    interior_exact = 1.0 - exact.boundary_mass.sum()
    dev = abs(m.interior_fraction() - interior_exact)
    line_ok = dev <= max(0.1 * interior_exact, 0.02)
    ok &= line_ok
    print(f"  interior: mc={m.interior_fraction():.4f}  "
          f"exact={interior_exact:.4f}  {'ok' if line_ok else 'FAIL'}")
    print(f"  mass check: {m.mass_check():.12f}")
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=20_000)
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--horizon", type=float, default=2000.0)
    parser.add_argument("--dt", type=float, default=1.0e-4)
    parser.add_argument("--x", type=float, default=0.002)
    parser.add_argument("--seed", type=int, default=20260823)
    args = parser.parse_args()
    ok = check_fixation(args.replicates, args.dt, args.seed)
    ok &= check_embedded(args.steps, args.x, args.seed + 7)
    ok &= check_paths(args.horizon, max(args.replicates // 5000, 2),
                      args.x, args.dt, args.seed + 13)
    print("all checks passed" if ok else "SOME CHECKS FAILED")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
