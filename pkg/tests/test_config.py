"""JSON configuration parsing, schema errors, and worked examples."""

import copy
import json
import math
from pathlib import Path

import numpy as np
import pytest

from wfgraph.config import ConfigError, load_config, parse_config
from wfgraph.multilocus import expectation, interior_indicator

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

BASE = {
    "schema_version": 1,
    "model": {
        "vertices": ["a", "b"],
        "edges": [
            {"from": "a", "to": "b", "lambda": 2.0e-4},
            {"from": "b", "to": "a", "lambda": 1.0e-4},
        ],
        "N": 1.0e4,
        "L": 10,
    },
}


def doc(**overrides):
    d = copy.deepcopy(BASE)
    d.update(overrides)
    return d


def test_minimal_document_parses():
    cfg = parse_config(doc())
    assert cfg.labels == ("a", "b")
    assert cfg.rate_convention == "lambda"
    assert cfg.big_n == 1.0e4
    assert cfg.num_loci == 10
    # no selection block: one neutral class covering all loci
    assert len(cfg.class_specs) == 1
    spec, mult = cfg.class_specs[0]
    assert mult == 10
    assert np.all(spec.gamma == 0.0)
    g = cfg.graph()
    assert g.lam[0, 1] == 2.0e-4
    assert cfg.theta_matrix()[0, 1] == pytest.approx(2.0e-3)


def test_theta_convention_matches_lambda_convention():
    lam_doc = doc()
    theta_doc = copy.deepcopy(lam_doc)
    for e in theta_doc["model"]["edges"]:
        e["theta"] = e.pop("lambda") * theta_doc["model"]["L"]
    a = parse_config(lam_doc)
    b = parse_config(theta_doc)
    assert b.rate_convention == "theta"
    np.testing.assert_allclose(a.theta_matrix(), b.theta_matrix(), rtol=1.0e-15)
    np.testing.assert_allclose(a.graph().lam, b.graph().lam, rtol=1.0e-15)
    ea, eb = a.ensemble(), b.ensemble()
    assert ea.theta_hat == pytest.approx(eb.theta_hat, rel=1.0e-15)


def test_selection_classes_fitness_and_gamma():
    d = doc(
        selection={
            "classes": [
                {"fitness": [0.0, 0.7], "multiplicity": 6},
                {"gamma": [[0.0, -1.0], [1.0, 0.0]], "multiplicity": 4},
            ]
        }
    )
    cfg = parse_config(d)
    assert len(cfg.class_specs) == 2
    assert cfg.selection(0).gamma[0, 1] == pytest.approx(0.7)
    assert cfg.selection(1).gamma[0, 1] == -1.0
    e = cfg.ensemble()
    assert e.L == 10
    assert not e.neutral
    assert expectation(e, interior_indicator()) > 0.0


def test_sim_block_defaults_entry_frequency_to_1_over_n():
    d = doc(sim={"dt": 1.0e-4, "horizon": 5.0, "replicates": 1, "seed": 1})
    cfg = parse_config(d)
    sc = cfg.sim_config()
    assert sc.x == pytest.approx(1.0 / cfg.big_n)
    assert sc.dt == 1.0e-4
    d2 = doc(sim={"x": 0.01})
    assert parse_config(d2).sim_config().x == 0.01


def where_of(excinfo):
    return excinfo.value.where


def test_schema_version_and_top_level_errors():
    with pytest.raises(ConfigError) as ei:
        parse_config(doc(schema_version=2))
    assert where_of(ei) == "schema_version"
    with pytest.raises(ConfigError) as ei:
        parse_config(doc(extras={}))
    assert where_of(ei) == ""
    bad = doc()
    del bad["model"]
    with pytest.raises(ConfigError) as ei:
        parse_config(bad)
    assert where_of(ei) == "model"


def test_model_block_errors():
    bad = doc()
    bad["model"]["vertices"] = ["only"]
    with pytest.raises(ConfigError) as ei:
        parse_config(bad)
    assert where_of(ei) == "model.vertices"

    bad = doc()
    bad["model"]["vertices"] = ["a", "a"]
    with pytest.raises(ConfigError, match="unique"):
        parse_config(bad)

    bad = doc()
    bad["model"]["N"] = -5
    with pytest.raises(ConfigError) as ei:
        parse_config(bad)
    assert where_of(ei) == "model.N"

    bad = doc()
    bad["model"]["L"] = 2.5
    with pytest.raises(ConfigError) as ei:
        parse_config(bad)
    assert where_of(ei) == "model.L"

    bad = doc()
    bad["model"]["unexpected"] = 1
    with pytest.raises(ConfigError, match="unknown model keys"):
        parse_config(bad)


def test_edge_errors():
    bad = doc()
    bad["model"]["edges"] = []
    with pytest.raises(ConfigError) as ei:
        parse_config(bad)
    assert where_of(ei) == "model.edges"

    bad = doc()
    bad["model"]["edges"][0] = {"from": "a", "to": "b"}
    with pytest.raises(ConfigError, match='"lambda"/"theta"') as ei:
        parse_config(bad)
    assert where_of(ei) == "model.edges[0]"

    bad = doc()
    bad["model"]["edges"][1]["theta"] = bad["model"]["edges"][1].pop("lambda")
    with pytest.raises(ConfigError, match="same rate convention"):
        parse_config(bad)

    bad = doc()
    bad["model"]["edges"][0]["to"] = "zz"
    with pytest.raises(ConfigError, match="unknown vertex"):
        parse_config(bad)

    bad = doc()
    bad["model"]["edges"][0]["to"] = "a"
    with pytest.raises(ConfigError, match="self-loop"):
        parse_config(bad)

    bad = doc()
    bad["model"]["edges"][0]["lambda"] = -1.0
    with pytest.raises(ConfigError, match="positive finite"):
        parse_config(bad)

    bad = doc()
    bad["model"]["edges"].append({"from": "a", "to": "b", "lambda": 1.0e-4})
    with pytest.raises(ConfigError, match="duplicate edge"):
        parse_config(bad)


def test_selection_errors():
    with pytest.raises(ConfigError) as ei:
        parse_config(doc(selection={}))
    assert where_of(ei) == "selection"

    d = doc(selection={"classes": [{"fitness": [0, 1], "multiplicity": 3}]})
    with pytest.raises(ConfigError, match="sum to 3, expected L = 10") as ei:
        parse_config(d)
    assert where_of(ei) == "selection.classes"

    d = doc(
        selection={
            "classes": [
                {"fitness": [0, 1], "gamma": [[0, 1], [-1, 0]], "multiplicity": 10}
            ]
        }
    )
    with pytest.raises(ConfigError, match='exactly one of "fitness"/"gamma"'):
        parse_config(d)

    d = doc(selection={"classes": [{"gamma": [[0, 1], [1, 0]], "multiplicity": 10}]})
    with pytest.raises(ConfigError, match="antisymmetr") as ei:
        parse_config(d)
    assert where_of(ei) == "selection.classes[0]"

    d = doc(selection={"classes": [{"fitness": [0, 1], "multiplicity": 0}]})
    with pytest.raises(ConfigError, match="positive integer"):
        parse_config(d)


def test_dfe_and_sim_block_shape_errors():
    with pytest.raises(ConfigError, match='"family"') as ei:
        parse_config(doc(dfe={"params": 1.0}))
    assert where_of(ei) == "dfe"
    with pytest.raises(ConfigError, match="must be an object"):
        parse_config(doc(sim=[1, 2]))
    d = doc(sim={"x": 0.01, "bogus": 3})
    with pytest.raises(ConfigError, match="unknown sim keys"):
        parse_config(d).sim_config()
    with pytest.raises(ConfigError, match="no sim block"):
        parse_config(doc()).sim_config()


def test_load_config_file_errors(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(p)
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.json")


def test_shipped_examples_load_and_build():
    paths = sorted(CONFIG_DIR.glob("*.json"))
    assert len(paths) >= 4
    for p in paths:
        cfg = load_config(p)
        e = cfg.ensemble()
        assert e.L >= 1
        # every example must describe a valid, normalizable model
        assert e.theta_hat > 0.0
        if cfg.sim_block is not None:
            sc = cfg.sim_config()
            assert 0.0 < sc.x < 1.0


def test_stop_codon_example_is_homogeneous():
    cfg = load_config(CONFIG_DIR / "stop_codon.json")
    e = cfg.ensemble()
    theta_u = e.theta_u
    assert np.allclose(theta_u, theta_u[0], rtol=1.0e-12)
    assert e.theta_hat == pytest.approx(theta_u[0], abs=1.0e-15)
