import json
from pathlib import Path

import numpy as np
import pytest

from fkppg.bench import all_models, build_dmm, build_rw1, fuzz_models
from fkppg.engine import run_vpf
from fkppg.oracle import enumerate_paths, expectation_t, terminated_weight, weight

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.mark.parametrize("name", sorted(all_models()))
def test_models_validate_and_query_parses(name):
    bm = all_models()[name]
    g = bm.ppg()
    bm.lifted_query(g)
    assert bm.t >= 1


@pytest.mark.parametrize("name", sorted(all_models()))
def test_shipped_files_match_builders(name):
    bm = all_models()[name]
    assert (MODELS / f"{name}.ppg").read_text(encoding="utf-8") == bm.source
    assert json.loads((MODELS / f"{name}.json").read_text(encoding="utf-8")) == bm.sidecar()


def test_reference_flags():
    models = all_models()
    assert models["rw1"].verified and models["dmm"].verified
    assert not any(models[n].verified for n in ("at", "ht", "brp", "niid", "zc", "rw2"))


def test_rw1_defaults():
    bm = build_rw1()
    assert (bm.query, bm.bound, bm.t) == ("c", 1.0, 4)
    assert bm.expected["semantics"] == pytest.approx(1 / 3)


def test_dmm_properties():
    bm = build_dmm()
    g = bm.ppg()
    assert g.variables[0] == "d" and (bm.query, bm.bound, bm.t) == ("d", 0.1, 1000)
    e = run_vpf(g, 200, 20_000, 1)
    done = e.Z == g.nil
    assert done.any() and (e.V[done, 0] < 0.1).all()
    assert set(np.unique(e.W).tolist()) <= {0.0, 1.0}


def test_fuzz_models_are_usable_and_deterministic():
    first = list(fuzz_models(6))
    again = list(fuzz_models(6))
    assert [(s, m.source, m.t) for s, m in first] == [(s, m.source, m.t) for s, m in again]
    for _, bm in first:
        g = bm.ppg(samples=1_000)
        assert len(g.checkpoints) <= 4 and g.m <= 3 and g.discrete and 3 <= bm.t <= 6
        table = enumerate_paths(g, bm.t)
        assert expectation_t(table, weight) >= 0.05
        assert expectation_t(table, terminated_weight(g.nil)) > 0
