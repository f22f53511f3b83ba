"""JSON model configuration: schema, loading, validation.

A config document describes one model: vertex labels, mutation rates in
exactly one of two conventions (per-locus "lambda" or sequence-scaled
"theta", which relate through theta = lambda * L), population size N,
locus count L, optional per-locus selection classes, and optional dfe
and sim blocks.  See configs/ for worked examples.

Top-level layout::

    {
      "schema_version": 1,
      "model": {
        "vertices": ["a", "b"],
        "edges": [{"from": "a", "to": "b", "lambda": 1e-4}, ...],
        "N": 1e4,
        "L": 100
      },
      "selection": {"classes": [
        {"fitness": [0.0, 1.0], "multiplicity": 60},
        {"gamma": [[0, -1], [1, 0]], "multiplicity": 40}
      ]},
      "dfe": {"family": "gamma", "params": [0.15, 1.0], "neutral_weight": 0.0},
      "sim": {"x": 0.002, "dt": 1e-4, "horizon": 1e4,
              "replicates": 8, "seed": 7, "thin": 5.0}
    }

Every edge must use the same rate key.  Selection classes use exactly
one of "fitness" (vector) or "gamma" (matrix) each, and multiplicities
must sum to L.  When "selection" is omitted a single neutral class of
multiplicity L is assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graph import AlleleGraph, SelectionSpec, gamma_from_fitness, require_valid
from .multilocus import LocusEnsemble, SelectionClass
from .simulate import SimConfig

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; `where` points into the JSON document."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(message if not where else f"{where}: {message}")
        self.where = where
        self.bare_message = message


def _require(cond: bool, message: str, where: str) -> None:
    if not cond:
        raise ConfigError(message, where)


@dataclass(frozen=True)
class ModelConfig:
    labels: tuple
    rate_convention: str  # "lambda" or "theta"
    rates: np.ndarray
    big_n: float
    num_loci: int
    class_specs: tuple  # of (SelectionSpec, multiplicity)
    dfe_block: dict | None
    sim_block: dict | None

    def graph(self) -> AlleleGraph:
        """Per-locus-rate graph (theta rates are scaled down by L)."""
        lam = self.rates if self.rate_convention == "lambda" else self.rates / self.num_loci
        return AlleleGraph(self.labels, lam)

    def theta_matrix(self) -> np.ndarray:
        return self.rates * self.num_loci if self.rate_convention == "lambda" else self.rates

    def selection(self, class_index: int = 0) -> SelectionSpec:
        return self.class_specs[class_index][0]

    def ensemble(self) -> LocusEnsemble:
        classes = tuple(SelectionClass(s, m) for s, m in self.class_specs)
        return LocusEnsemble(self.labels, self.theta_matrix(), self.big_n, classes)

    def sim_config(self) -> SimConfig:
        _require(self.sim_block is not None, "config has no sim block", "sim")
        b = dict(self.sim_block)
        x = b.pop("x", 1.0 / self.big_n)
        kwargs = {}
        for key in ("dt", "horizon", "replicates", "seed", "thin"):
            if key in b:
                kwargs[key] = b.pop(key)
        _require(not b, f"unknown sim keys {sorted(b)}", "sim")
        return SimConfig(self.graph(), self.selection(), x=float(x), **kwargs)


def _parse_edges(block: dict, labels: tuple) -> tuple[str, np.ndarray]:
    edges = block.get("edges")
    _require(isinstance(edges, list) and edges, "model.edges must be a nonempty list", "model.edges")
    n = len(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    conventions = set()
    rates = np.zeros((n, n))
    for k, e in enumerate(edges):
        where = f"model.edges[{k}]"
        _require(isinstance(e, dict), "edge must be an object", where)
        keys = set(e)
        _require({"from", "to"} <= keys, 'edge needs "from" and "to"', where)
        rate_keys = keys & {"lambda", "theta"}
        _require(len(rate_keys) == 1, 'edge needs exactly one of "lambda"/"theta"', where)
        conv = rate_keys.pop()
        conventions.add(conv)
        _require(len(conventions) == 1,
                 "all edges must use the same rate convention", where)
        for end in ("from", "to"):
            _require(e[end] in index, f"unknown vertex {e[end]!r}", where)
        i, j = index[e["from"]], index[e["to"]]
        _require(i != j, "self-loop edges are not allowed", where)
        val = e[conv]
        _require(isinstance(val, (int, float)) and val > 0 and np.isfinite(val),
                 f"{conv} must be a positive finite number", where)
        _require(rates[i, j] == 0.0, "duplicate edge", where)
        rates[i, j] = float(val)
    return conventions.pop(), rates


def _parse_selection(doc: dict, n: int, num_loci: int, graph: AlleleGraph) -> tuple:
    block = doc.get("selection")
    if block is None:
        return ((SelectionSpec(np.zeros((n, n))), num_loci),)
    _require(isinstance(block, dict) and "classes" in block,
             'selection needs a "classes" list', "selection")
    classes = block["classes"]
    _require(isinstance(classes, list) and classes,
             "selection.classes must be a nonempty list", "selection.classes")
    out = []
    total = 0
    for k, c in enumerate(classes):
        where = f"selection.classes[{k}]"
        _require(isinstance(c, dict), "class must be an object", where)
        mult = c.get("multiplicity", 1)
        _require(isinstance(mult, int) and mult >= 1,
                 "multiplicity must be a positive integer", where)
        has_fit = "fitness" in c
        has_gam = "gamma" in c
        _require(has_fit != has_gam, 'class needs exactly one of "fitness"/"gamma"', where)
        try:
            if has_fit:
                spec = gamma_from_fitness(np.asarray(c["fitness"], dtype=float), graph)
            else:
                spec = SelectionSpec(np.asarray(c["gamma"], dtype=float), graph=graph)
        except ValueError as exc:
            raise ConfigError(str(exc), where) from exc
        _require(spec.n == n, f"selection size {spec.n} does not match {n} vertices", where)
        out.append((spec, mult))
        total += mult
    _require(total == num_loci,
             f"class multiplicities sum to {total}, expected L = {num_loci}",
             "selection.classes")
    return tuple(out)


def parse_config(doc: dict) -> ModelConfig:
    _require(isinstance(doc, dict), "top level must be an object", "")
    version = doc.get("schema_version")
    _require(version == SCHEMA_VERSION,
             f"schema_version must be {SCHEMA_VERSION}, got {version!r}", "schema_version")
    unknown = set(doc) - {"schema_version", "model", "selection", "dfe", "sim"}
    _require(not unknown, f"unknown top-level keys {sorted(unknown)}", "")
    model = doc.get("model")
    _require(isinstance(model, dict), 'missing "model" object', "model")
    labels = model.get("vertices")
    _require(isinstance(labels, list) and len(labels) >= 2 and all(isinstance(v, str) for v in labels),
             "model.vertices must be a list of at least two strings", "model.vertices")
    labels = tuple(labels)
    _require(len(set(labels)) == len(labels), "vertex labels must be unique", "model.vertices")
    big_n = model.get("N")
    _require(isinstance(big_n, (int, float)) and big_n > 0,
             "model.N must be a positive number", "model.N")
    num_loci = model.get("L", 1)
    _require(isinstance(num_loci, int) and num_loci >= 1,
             "model.L must be a positive integer", "model.L")
    convention, rates = _parse_edges(model, labels)
    unknown = set(model) - {"vertices", "edges", "N", "L"}
    _require(not unknown, f"unknown model keys {sorted(unknown)}", "model")
    lam = rates if convention == "lambda" else rates / num_loci
    graph = AlleleGraph(labels, lam)
    class_specs = _parse_selection(doc, len(labels), num_loci, graph)

    dfe_block = doc.get("dfe")
    if dfe_block is not None:
        _require(isinstance(dfe_block, dict), "dfe must be an object", "dfe")
        _require("family" in dfe_block, 'dfe needs a "family"', "dfe")
    sim_block = doc.get("sim")
    if sim_block is not None:
        _require(isinstance(sim_block, dict), "sim must be an object", "sim")

    return ModelConfig(
        labels=labels,
        rate_convention=convention,
        rates=rates,
        big_n=float(big_n),
        num_loci=num_loci,
        class_specs=class_specs,
        dfe_block=dfe_block,
        sim_block=sim_block,
    )


def load_config(path) -> ModelConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}") from exc
    return parse_config(doc)


def validate_model(cfg: ModelConfig) -> None:
    """Raise AssumptionError / ValueError if the model is unusable."""
    require_valid(cfg.graph())
