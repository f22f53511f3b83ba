"""Command-line interface.

Reads a JSON model config (see :mod:`wfgraph.config` for the schema),
dispatches one subcommand, and emits deterministic CSV or JSON.  Every
float is printed with 17 significant digits, so identical inputs give
byte-identical outputs.  Failures produce a machine-readable error
object on stdout and a nonzero exit code; graph assumption violations
are tagged with the assumption name.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dfe as dfe_mod
from . import kernels, multilocus, stationary
from .config import ConfigError, load_config
from .graph import AlleleGraph, AssumptionError, gamma_from_fitness, validate_graph
from .multilocus import (
    LocusEnsemble,
    SelectionClass,
    boundary_indicator,
    interior_indicator,
    neutral_statistics,
    pairwise_difference,
    random_reversible_ensemble,
    sample_polymorphism,
)
from .simulate import simulate_paths

BOUND_FUNCTIONAL_NAMES = ("interior", "g2", "g5", "g10", "pairwise")
SWEEP_SLACK_TOL = 1.0e-9


def _fmt(value) -> str:
    """17-significant-digit decimal form; round-trips any double."""
    return f"{float(value):.17g}"


def _emit_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True))
    sys.stdout.write("\n")


def _write_long_csv(path, rows) -> None:
    """Long-format table: one row per (quantity, index, value)."""
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("quantity", "index", "value"))
        for quantity, index, value in rows:
            if isinstance(value, str):
                text = value
            else:
                text = _fmt(value)
            writer.writerow((str(quantity), str(index), text))


def _assumption_tag(message: str) -> str | None:
    lowered = message.lower()
    for tag in ("assumption iii", "assumption ii", "assumption i"):
        if tag in lowered:
            return tag.split()[-1]
    if "antisymmetr" in lowered:
        return "antisymmetry"
    return None


def _error_payload(exc: BaseException) -> dict:
    return {
        "error": {
            "type": type(exc).__name__,
            "message": str(exc),
            "assumption": _assumption_tag(str(exc)),
            "where": getattr(exc, "where", ""),
        }
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    g = cfg.graph()
    report = validate_graph(g)
    violations = list(report.violations)
    if report.ok:
        # Selection antisymmetry is checked at parse time, so reaching
        # this point with a valid graph means the whole model stands.
        cfg.ensemble()
    payload = {
        "ok": not violations,
        "vertices": list(g.vertices),
        "edges": len(g.edges()),
        "violations": violations,
    }
    _emit_json(payload)
    return 0 if not violations else 1


def _stationary_rows(m: stationary.StationaryMeasure):
    g = m.graph
    yield "mode", "", m.mode
    yield "omega", "", m.omega
    if m.mode == "exact":
        yield "x", "", m.x
    else:
        yield "big_n", "", m.big_n
    for i, label in enumerate(g.vertices):
        yield "boundary_mass", label, m.boundary_mass[i]
    for (i, j), edge in sorted(m.edge_densities.items()):
        key = f"{g.vertices[i]}->{g.vertices[j]}"
        yield "edge_gamma", key, edge.gamma
        yield "edge_coeff", key, edge.coeff
        yield "edge_mass", key, edge.mass
        if edge.layer_value is not None:
            yield "edge_layer", key, edge.layer_value
    yield "total_mass", "", m.total_mass()


def _cmd_stationary(args) -> int:
    cfg = load_config(args.config)
    g = cfg.graph()
    s = cfg.selection()
    if args.exact_x is not None:
        m = stationary.exact_stationary(g, s, args.exact_x)
    else:
        m = stationary.approx_stationary(g, s, cfg.big_n)
    _write_long_csv(args.out, _stationary_rows(m))
    return 0


def _cmd_afs(args) -> int:
    cfg = load_config(args.config)
    g = cfg.graph()
    kind = "folded" if args.folded else "unfolded"
    frequencies = None
    density = None
    total = sum(mult for _, mult in cfg.class_specs)
    for spec, mult in cfg.class_specs:
        m = stationary.approx_stationary(g, spec, cfg.big_n)
        y, d = stationary.afs(m, kind=kind, grid=args.grid)
        if density is None:
            frequencies = y
            density = (mult / total) * d
        else:
            density = density + (mult / total) * d
    rows = [("kind", "", kind), ("grid", "", float(args.grid))]
    rows += [("y", i, y) for i, y in enumerate(frequencies)]
    rows += [("density", i, d) for i, d in enumerate(density)]
    _write_long_csv(args.out, rows)
    return 0


def _cmd_stats(args) -> int:
    cfg = load_config(args.config)
    e = cfg.ensemble()
    m = args.sample_size
    lower, eff, hat, hi = multilocus.sandwich(e)
    mono = multilocus.expectation(e, boundary_indicator())
    poly = multilocus.expectation(e, interior_indicator())
    g_m = sample_polymorphism(m)
    h = pairwise_difference()
    sample = multilocus.upper_bound(e, g_m)
    pair = multilocus.upper_bound(e, h)
    pi = multilocus.diversity_pi(e)
    payload = {
        "num_loci": e.L,
        "big_n": e.big_n,
        "theta_hat": hat,
        "theta_hat_eff": eff,
        "theta_min": e.theta_min,
        "theta_max": e.theta_max,
        "sandwich_lower": lower,
        "mu_hat": {label: float(v) for label, v in zip(e.graph.vertices, e.mu_hat)},
        "monomorphic": mono,
        "polymorphic": poly,
        "segregating_loci": multilocus.segregating_sites(e),
        "sample_size": m,
        "sample_polymorphic": {
            "value": multilocus.expectation(e, g_m),
            "bound": sample.bound_f0_integral,
            "bound_integrable": sample.bound_integrable,
            "bound_slack": sample.slack,
        },
        "pairwise_functional": {
            "value": multilocus.expectation(e, h),
            "bound": pair.bound_f0_integral,
            "bound_integrable": pair.bound_integrable,
            "bound_slack": pair.slack,
        },
        "diversity_pi": {"value": pi, "bound": 2.0 * eff / e.L},
        "neutral": e.neutral,
    }
    if e.neutral:
        ns = neutral_statistics(e, m)
        payload["neutral_closed_forms"] = {
            "theta_hat_eff": ns.theta_hat_eff,
            "monomorphic": ns.monomorphic,
            "polymorphic": ns.polymorphic,
            "segregating": ns.segregating,
            "diversity": ns.diversity,
            "first_order": {k: float(v) for k, v in ns.first_order.items()},
        }
    _emit_json(payload)
    return 0


def _bound_functionals():
    return (
        interior_indicator(),
        sample_polymorphism(2),
        sample_polymorphism(5),
        sample_polymorphism(10),
        pairwise_difference(),
    )


def _cmd_bounds(args) -> int:
    functionals = _bound_functionals()
    worst = math.inf
    violations = 0
    sandwich_ok = True
    for k in range(args.sweep):
        e = random_reversible_ensemble(args.seed + k)
        lower, eff, hat, hi = multilocus.sandwich(e)
        ordered = (
            lower <= eff * (1 + 1e-12)
            and eff <= hat * (1 + 1e-12)
            and hat <= hi * (1 + 1e-12)
        )
        if not ordered:
            sandwich_ok = False
        for f in functionals:
            rep = multilocus.upper_bound(e, f)
            worst = min(worst, rep.slack)
            if rep.slack < -SWEEP_SLACK_TOL:
                violations += 1
    payload = {
        "ensembles": args.sweep,
        "seed": args.seed,
        "functionals": list(BOUND_FUNCTIONAL_NAMES),
        "worst_slack": worst,
        "slack_tolerance": SWEEP_SLACK_TOL,
        "violations": violations,
        "sandwich_ok": sandwich_ok,
    }
    _emit_json(payload)
    return 0 if violations == 0 and sandwich_ok else 1


def _continuous_dfe_rows(block: dict):
    family = block["family"]
    params = block.get("params")
    if isinstance(params, list):
        params = tuple(params)
    neutral_weight = float(block.get("neutral_weight", 0.0))
    d = dfe_mod.continuous_dfe(family, params=params, neutral_weight=neutral_weight)
    yield "family", "", family
    yield "neutral_weight", "", d.neutral_weight
    yield "negative_mass", "", d.neg_mass
    yield "positive_mass", "", d.pos_mass
    yield "mean", "", d.mean
    grid = np.linspace(0.01, 6.0, 300)
    xs = np.concatenate([-grid[::-1], grid])
    dens = d.density(xs)
    for i, (x, f) in enumerate(zip(xs, dens)):
        yield "x", i, x
        yield "density", i, f


def _discrete_dfe_rows(e: LocusEnsemble, polymorphic: bool):
    if polymorphic:
        raw, cond = dfe_mod.h_pdfe(e)
        yield "kind", "", cond.kind
        yield "raw_total", "", raw.total_mass
        d = cond
    else:
        d = dfe_mod.h_dfe(e)
        yield "kind", "", d.kind
        yield "mean_load", "", dfe_mod.mean_load(e)
    yield "mean", "", d.mean()
    yield "total_mass", "", d.total_mass
    for i, (gamma, w) in enumerate(zip(d.gammas, d.weights)):
        yield "gamma", i, gamma
        yield "weight", i, w


def _cmd_dfe(args) -> int:
    cfg = load_config(args.config)
    if cfg.dfe_block is not None:
        if args.polymorphic:
            raise ValueError(
                "--polymorphic applies to the discrete per-locus distribution; "
                "remove the dfe block to use it"
            )
        _write_long_csv(args.out, _continuous_dfe_rows(cfg.dfe_block))
        return 0
    _write_long_csv(args.out, _discrete_dfe_rows(cfg.ensemble(), args.polymorphic))
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    c = cfg.sim_config()
    m = simulate_paths(c)
    rows = [
        ("x", "", m.x),
        ("replicates", "", float(m.replicates)),
        ("total_time", "", m.total_time),
        ("mass_check", "", m.mass_check()),
    ]
    vf = m.vertex_fraction()
    for i, label in enumerate(m.labels):
        rows.append(("vertex_time", label, m.vertex_time[i]))
        rows.append(("vertex_fraction", label, vf[i]))
        rows.append(("vertex_count", label, float(m.vertex_counts[i])))
    for b, edge in enumerate(m.bin_edges):
        rows.append(("bin_edge", b, edge))
    for p, (i, j) in enumerate(m.pairs):
        key = f"{m.labels[i]}|{m.labels[j]}"
        for b in range(m.edge_time.shape[1]):
            rows.append(("edge_time", f"{key}:{b}", m.edge_time[p, b]))
            rows.append(("edge_count", f"{key}:{b}", float(m.edge_counts[p, b])))
    _write_long_csv(args.out, rows)
    return 0


# ---------------------------------------------------------------------------
# figure data


def _figure_two_type_rows():
    """Relative interior densities for one selected two-type pair.

    The three curves share the common normalizer, so only the shapes and
    their ratio e^{2 gamma} matter; the grid is k/1000 for k = 1..999.
    """
    gamma = 1.0
    y = np.arange(1, 1000) / 1000.0
    up = kernels.fixation_prob(gamma, 1.0 - y) / (y * (1.0 - y))
    down = math.exp(2.0 * gamma) * kernels.fixation_prob(-gamma, y) / (y * (1.0 - y))
    both = up + down
    mirror = both[::-1]
    rows = [("gamma", "", gamma)]
    rows += [("y", i, v) for i, v in enumerate(y)]
    rows += [("density_up", i, v) for i, v in enumerate(up)]
    rows += [("density_down", i, v) for i, v in enumerate(down)]
    rows += [("density_sum", i, v) for i, v in enumerate(both)]
    rows += [("density_sum_mirror", i, v) for i, v in enumerate(mirror)]
    return rows


def _figure_four_type_rows():
    """Unfolded and folded frequency spectra on the complete 4-type graph."""
    labels = ("u", "v", "w", "z")
    lam = np.full((4, 4), 1.0e-4)
    np.fill_diagonal(lam, 0.0)
    g = AlleleGraph(labels, lam)
    s = gamma_from_fitness((0.0, 1.0, 1.0, 0.0), g)
    m = stationary.approx_stationary(g, s, 1.0e4)
    y_u, d_u = stationary.afs(m, kind="unfolded", grid=999)
    y_f, d_f = stationary.afs(m, kind="folded", grid=999)
    rows = [("big_n", "", 1.0e4), ("lambda", "", 1.0e-4)]
    rows += [("y_unfolded", i, v) for i, v in enumerate(y_u)]
    rows += [("afs_unfolded", i, v) for i, v in enumerate(d_u)]
    rows += [("y_folded", i, v) for i, v in enumerate(y_f)]
    rows += [("afs_folded", i, v) for i, v in enumerate(d_f)]
    return rows


_DFE_FAMILIES = (
    ("exponential_1", "exponential", 1.0),
    ("gamma_2_1", "gamma", (2.0, 1.0)),
    ("gamma_0.15_1", "gamma", (0.15, 1.0)),
)


def _figure_dfe_rows():
    grid = np.linspace(0.01, 6.0, 300)
    xs = np.concatenate([-grid[::-1], grid])
    rows = []
    for name, family, params in _DFE_FAMILIES:
        d = dfe_mod.continuous_dfe(family, params=params)
        rows.append(("mean", name, d.mean))
        dens = d.density(xs)
        rows += [("x", f"{name}:{i}", x) for i, x in enumerate(xs)]
        rows += [("density", f"{name}:{i}", v) for i, v in enumerate(dens)]
    return rows


_TWO_TYPE_COMBOS = (
    ("equal_rates", 1.5e-3, 1.5e-3),
    ("into_favored", 3.0e-3, 1.0e-3),
    ("out_of_favored", 1.0e-3, 3.0e-3),
)


def _figure_diversity_rows():
    """Diversity and segregating loci against selection strength.

    Two types with the second favored; per combination the solid curve
    is the exact expectation and the dashed curve its neutral-style
    bound, at N = 500 and L = 1500.
    """
    big_n = 500.0
    num_loci = 1500
    gammas = np.arange(0, 121) * 0.05
    labels = ("u", "v")
    log_n = math.log(big_n)
    rows = [("big_n", "", big_n), ("num_loci", "", float(num_loci))]
    rows += [("gamma", i, v) for i, v in enumerate(gammas)]
    for name, theta_u, theta_v in _TWO_TYPE_COMBOS:
        theta = np.array([[0.0, theta_u], [theta_v, 0.0]])
        for i, gamma in enumerate(gammas):
            g = AlleleGraph(labels, theta / num_loci)
            spec = gamma_from_fitness((0.0, float(gamma)), g)
            e = LocusEnsemble(
                labels, theta, big_n, (SelectionClass(spec, num_loci),)
            )
            eff = e.theta_hat_eff
            rows.append((f"pi_{name}", i, multilocus.diversity_pi(e)))
            rows.append((f"pi_bound_{name}", i, 2.0 * eff / num_loci))
            rows.append((f"seg_{name}", i, multilocus.segregating_sites(e)))
            rows.append((f"seg_bound_{name}", i, 2.0 * eff * (1.0 + log_n)))
    return rows


_FIGURE_BUILDERS = {
    2: ("figure2.csv", _figure_two_type_rows),
    4: ("figure4.csv", _figure_four_type_rows),
    5: ("figure5.csv", _figure_dfe_rows),
    6: ("figure6.csv", _figure_diversity_rows),
}


def _cmd_figures(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    name, builder = _FIGURE_BUILDERS[args.which]
    path = out_dir / name
    _write_long_csv(path, builder())
    _emit_json({"written": [str(path)]})
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfgraph",
        description="Analytic tables and simulations for the graph-structured "
        "allele model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config against the model assumptions")
    p.add_argument("config")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("stationary", help="stationary measure parameters as CSV")
    p.add_argument("config")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact-x", type=float, default=None, metavar="X",
                      help="exact measure with mutations entering at frequency X")
    mode.add_argument("--large-n", action="store_true",
                      help="large-population measure at the config N (default)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_stationary)

    p = sub.add_parser("afs", help="allele frequency spectrum as CSV")
    p.add_argument("config")
    fold = p.add_mutually_exclusive_group()
    fold.add_argument("--folded", action="store_true")
    fold.add_argument("--unfolded", action="store_true")
    p.add_argument("--grid", type=int, default=999)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_afs)

    p = sub.add_parser("stats", help="summary statistics with bounds as JSON")
    p.add_argument("config")
    p.add_argument("--sample-size", type=int, default=2, dest="sample_size")
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("bounds", help="random-ensemble audit of the upper bounds")
    p.add_argument("--sweep", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_bounds)

    p = sub.add_parser("dfe", help="fitness-effect distribution as CSV")
    p.add_argument("config")
    p.add_argument("--polymorphic", action="store_true",
                   help="condition on loci that are polymorphic")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_dfe)

    p = sub.add_parser("simulate", help="run the path simulator, emit occupancy CSV")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("figures", help="regenerate one figure data set")
    p.add_argument("--which", type=int, required=True,
                   choices=sorted(_FIGURE_BUILDERS))
    p.add_argument("--out", default=".")
    p.set_defaults(handler=_cmd_figures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, AssumptionError, ValueError, KeyError, OSError) as exc:
        _emit_json(_error_payload(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
