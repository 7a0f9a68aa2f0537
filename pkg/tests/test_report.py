import csv
import io
import json
from pathlib import Path

import jsonschema
import pytest

from morsekit.errors import BudgetError, BuildError, ConfigError, SmallCancellationError
from morsekit.report import (
    CSV_HEADER,
    REPORT_SCHEMA,
    Budgets,
    SuiteConfig,
    emit,
    render,
    run_suite,
)

SPECS = Path(__file__).resolve().parent.parent / "specs"


def _suite(name):
    return json.loads((SPECS / "suites" / name).read_text())


def _space(name):
    return json.loads((SPECS / name).read_text())


def test_empty_suite():
    rep = run_suite({"space": _space("cycle4.json"), "analyses": []})
    doc = json.loads(render(rep))
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["results"] == [] and doc["space"]["vertex_count"] == 4


def test_single_delta_csv():
    rep = run_suite({"space": _space("free2_r4.json"), "analyses": [{"kind": "delta", "mode": "exact"}],
                     "budgets": {"exact_quadruple_cap": 10**6}})
    rows = list(csv.reader(io.StringIO(render(rep, "csv"))))
    assert rows[0] == CSV_HEADER and len(rows) == 2
    assert rows[1][1] == "delta" and json.loads(rows[1][3]) == 0


def test_z2_suite_report():
    rep = run_suite(_suite("z2_r3.json"))
    doc = json.loads(render(rep))
    jsonschema.validate(doc, REPORT_SCHEMA)
    by_kind = {}
    for r in doc["results"]:
        by_kind.setdefault(r["kind"], []).append(r)
    assert by_kind["delta"][0]["value"] >= 1
    assert max(r["value"] for r in by_kind["bigons"]) > 0
    sup = [r for r in by_kind["morse"] if r["params"].get("aggregate") == "sup"]
    assert {r["params"]["L"] for r in sup} == {1, 3}
    assert all(r["seconds"] is None for r in doc["results"])
    rows = list(csv.reader(io.StringIO(render(rep, "csv"))))
    assert len(rows) - 1 == len(doc["results"])


def test_free_suite_values():
    doc = json.loads(render(run_suite(_suite("f2_r4.json"))))
    for r in doc["results"]:
        if r["kind"] in ("delta", "bigons"):
            assert r["value"] == 0
        if r["kind"] == "diverge":
            assert r["value"] is None and r["counts"]["infinite"]


def test_report_is_byte_identical_and_round_trips(tmp_path):
    cfg = _suite("z2_r3.json")
    a = render(run_suite(cfg))
    b = render(run_suite(cfg))
    assert a == b
    doc = json.loads(a)
    again = SuiteConfig.from_dict(doc["config"])
    assert render(run_suite(again)) == a
    out = tmp_path / "r.json"
    emit(run_suite(cfg), "json", out)
    assert out.read_text() == a
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]


def test_timing_is_recorded_when_asked():
    cfg = {"space": _space("cycle4.json"), "analyses": [{"kind": "delta"}], "record_timing": True}
    (r,) = run_suite(cfg).results
    assert isinstance(r["seconds"], float) and r["seconds"] >= 0


@pytest.mark.parametrize(
    "cfg, exc",
    [
        ({"space": {"kind": "cycle", "n": 4}, "analyses": [{"kind": "foo"}]}, ConfigError),
        ({"space": {"kind": "cycle", "n": 4}, "analyses": [{"kind": "delta", "bogus": 1}]}, ConfigError),
        ({"space": {"kind": "cycle", "n": 4}, "analyses": [], "extra": 1}, ConfigError),
        ({"space": {"kind": "sphere"}, "analyses": []}, ConfigError),
        ({"space": {"kind": "cycle", "n": 4}, "analyses": [{"kind": "delta", "mode": "sampled"}]}, BudgetError),
        ({"space": {"kind": "cycle", "n": 4}, "analyses": [], "budgets": {"node_expansions": 0}}, BudgetError),
        ({"space": {"kind": "cycle", "n": 4}, "analyses": [], "budgets": {"colour": 1}}, ConfigError),
    ],
)
def test_bad_configs(cfg, exc):
    with pytest.raises(exc):
        SuiteConfig.from_dict(cfg)


def test_build_failures_surface():
    with pytest.raises(SmallCancellationError):
        run_suite({"space": {"kind": "cayley_ball", "group": {"family": "presentation", "text": "<a|a^7>"},
                             "radius": 2}, "analyses": []})
    with pytest.raises(BuildError):
        run_suite({"space": _space("tree_b3_d4.json"), "analyses": [], "budgets": {"vertex_budget": 10}})


def test_geodesic_references():
    cfg = {"space": _space("z2_grid_r3.json"),
           "analyses": [{"kind": "contract", "geodesics": [[[-3, 0], [3, 0]], {"path": ["1", "a"]}]}]}
    res = run_suite(cfg).results
    assert len(res) == 2
    # a single edge: (0,3) and (1,3) are adjacent but project to different ends
    assert res[0]["value"] >= 3 and res[1]["value"] == 2


def test_budgets_defaults():
    b = Budgets.from_dict({})
    assert b.seed is None and b.node_expansions > 0
    assert Budgets.from_dict(b.to_dict()) == b
