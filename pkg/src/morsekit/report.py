"""Declarative experiment runner and machine-readable reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import platform
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import jsonschema
import numpy as np

from . import __version__
from .contracting import contraction_constant, divergence
from .errors import BudgetError, ConfigError, SpecError
from .hyperbolicity import EXACT_CAP, PairSample, fatness_profile, four_point_delta
from .metric import GeodesicPath, axis_geodesic, geodesic_between
from .morse import (
    DEFAULT_BUDGET,
    QGParams,
    default_geodesic_sample,
    detour_constant,
    morse_constant,
)
from .presentation import parse_word
from .spaces import DEFAULT_VERTEX_BUDGET, MetricGraph, SpaceSpec, build_space, grid_vertex, locate

log = logging.getLogger(__name__)

ANALYSIS_PARAMS: dict[str, set[str]] = {
    "delta": {"mode", "sample"},
    "bigons": {"pairs"},
    "morse": {"L", "A", "params", "geodesics"},
    "detour": {"C", "geodesics"},
    "contract": {"b", "convention", "geodesics"},
    "diverge": {"r", "gauge", "center", "geodesics"},
}

CSV_HEADER = ["analysis", "kind", "params", "value", "complete", "witness", "counts", "seconds"]

REPORT_SCHEMA = {
    "type": "object",
    "required": ["version", "config", "results", "seed"],
    "properties": {
        "version": {"type": "string"},
        "config": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "space": {"type": "object"},
        "environment": {"type": "object"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "params", "value", "witness", "complete", "counts", "seconds"],
                "properties": {
                    "kind": {"enum": sorted(ANALYSIS_PARAMS)},
                    "params": {"type": "object"},
                    "value": {"type": ["number", "null"]},
                    "witness": {"type": ["object", "null"]},
                    "complete": {"type": "boolean"},
                    "counts": {"type": "object"},
                    "seconds": {"type": ["number", "null"]},
                },
            },
        },
    },
}


def _rational(x: Any, name: str) -> Fraction:
    if isinstance(x, bool):
        raise ConfigError(f"{name} must be a number")
    try:
        return Fraction(str(x)) if isinstance(x, float) else Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{name} must be a rational number, got {x!r}") from None


def _num(x: Fraction) -> int | str:
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _as_list(x) -> list:
    return list(x) if isinstance(x, (list, tuple)) else [x]


@dataclass
class Budgets:
    node_expansions: int = DEFAULT_BUDGET
    exact_quadruple_cap: int = EXACT_CAP
    pair_sample: int | None = None
    seed: int | None = None
    vertex_budget: int = DEFAULT_VERTEX_BUDGET
    geodesic_sample: int = 16

    @classmethod
    def from_dict(cls, d: Mapping) -> "Budgets":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown budget keys {sorted(extra)}")
        b = cls(**d)
        for name in ("node_expansions", "exact_quadruple_cap", "vertex_budget", "geodesic_sample"):
            v = getattr(b, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise BudgetError(f"budget {name} must be a positive integer, got {v!r}")
        if b.pair_sample is not None and (
            isinstance(b.pair_sample, bool) or not isinstance(b.pair_sample, int) or b.pair_sample < 1
        ):
            raise BudgetError(f"pair_sample must be a positive integer, got {b.pair_sample!r}")
        if b.seed is not None and (isinstance(b.seed, bool) or not isinstance(b.seed, int) or b.seed < 0):
            raise BudgetError(f"seed must be a nonnegative integer, got {b.seed!r}")
        return b

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class AnalysisSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}


@dataclass
class SuiteConfig:
    space: SpaceSpec
    analyses: list[AnalysisSpec] = field(default_factory=list)
    budgets: Budgets = field(default_factory=Budgets)
    output: dict = field(default_factory=lambda: {"format": "json", "path": None})
    record_timing: bool = False

    @classmethod
    def from_dict(cls, d: Mapping) -> "SuiteConfig":
        if not isinstance(d, Mapping):
            raise ConfigError("suite config must be a JSON object")
        extra = set(d) - {"space", "analyses", "budgets", "output", "record_timing"}
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if "space" not in d:
            raise ConfigError("suite config needs a 'space'")
        try:
            space = SpaceSpec.from_dict(d["space"])
        except SpecError as e:
            raise ConfigError(f"invalid space: {e}") from e
        analyses = []
        for a in d.get("analyses", []):
            if not isinstance(a, Mapping) or "kind" not in a:
                raise ConfigError(f"analysis entries need a 'kind': {a!r}")
            kind = a["kind"]
            if kind not in ANALYSIS_PARAMS:
                raise ConfigError(f"unknown analysis kind {kind!r}")
            params = {k: v for k, v in a.items() if k != "kind"}
            extra = set(params) - ANALYSIS_PARAMS[kind]
            if extra:
                raise ConfigError(f"unknown parameters {sorted(extra)} for {kind}")
            analyses.append(AnalysisSpec(kind, params))
        budgets = Budgets.from_dict(d.get("budgets", {}))
        output = {"format": "json", "path": None, **d.get("output", {})}
        if output["format"] not in ("json", "csv"):
            raise ConfigError(f"unknown output format {output['format']!r}")
        cfg = cls(space, analyses, budgets, output, bool(d.get("record_timing", False)))
        cfg._check_seeds()
        return cfg

    def _check_seeds(self):
        for a in self.analyses:
            sampled = (a.kind == "delta" and a.params.get("mode") == "sampled") or (
                a.kind == "bigons" and a.params.get("pairs") == "sample"
            )
            if sampled and self.budgets.seed is None:
                raise BudgetError(f"{a.kind} uses sampling but budgets.seed is missing")
            if a.kind == "bigons" and a.params.get("pairs") == "sample" and not self.budgets.pair_sample:
                raise BudgetError("bigons pair sampling needs budgets.pair_sample")

    def to_dict(self) -> dict:
        return {
            "space": self.space.to_dict(),
            "analyses": [a.to_dict() for a in self.analyses],
            "budgets": self.budgets.to_dict(),
            "output": dict(self.output),
            "record_timing": self.record_timing,
        }


@dataclass
class Report:
    version: str
    config: dict
    results: list[dict]
    seed: int | None
    space: dict
    environment: dict

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "seed": self.seed,
            "space": self.space,
            "environment": self.environment,
            "results": self.results,
        }


def environment_stamp() -> dict:
    return {
        "python": platform.python_version(),
        "implementation": platform.python_implementation(),
        "numpy": np.__version__,
        "platform": sys.platform,
    }


# -- analysis dispatch -------------------------------------------------------------


class _Runner:
    def __init__(self, G: MetricGraph, cfg: SuiteConfig):
        self.G = G
        self.cfg = cfg
        self.results: list[dict] = []

    def verts(self, vs: Sequence[int]) -> dict:
        out: dict[str, Any] = {"ids": [int(v) for v in vs]}
        if self.G.labels is not None:
            out["labels"] = [self.G.label(int(v)) for v in vs]
        return out

    def record(self, idx, kind, params, value, witness, complete, counts, seconds):
        self.results.append({
            "kind": kind,
            "params": {"analysis": idx, **params},
            "value": value,
            "witness": witness,
            "complete": bool(complete),
            "counts": counts,
            "seconds": seconds if self.cfg.record_timing else None,
        })

    def vertex(self, ref) -> int:
        G = self.G
        if isinstance(ref, bool):
            raise ConfigError(f"bad vertex reference {ref!r}")
        if isinstance(ref, int):
            if not 0 <= ref < G.vertex_count:
                raise ConfigError(f"vertex {ref} out of range")
            return ref
        if G.labels is None or G.presentation is None:
            raise ConfigError("word or coordinate references need a Cayley space")
        try:
            v = grid_vertex(G, ref) if isinstance(ref, list) else locate(G, parse_word(ref, G.presentation))
        except (ValueError, TypeError) as e:
            raise ConfigError(f"bad vertex reference {ref!r}: {e}") from e
        if v is None:
            raise ConfigError(f"{ref!r} is not in the ball")
        return v

    def geodesics(self, spec, default: str) -> list[GeodesicPath]:
        spec = default if spec is None else spec
        if spec == "axis":
            return [axis_geodesic(self.G)]
        if spec == "sample":
            b = self.cfg.budgets
            return default_geodesic_sample(self.G, b.geodesic_sample, b.seed or 0)
        if not isinstance(spec, list) or not spec:
            raise ConfigError(f"geodesics must be 'axis', 'sample' or a list, got {spec!r}")
        out = []
        for item in spec:
            if isinstance(item, Mapping) and "path" in item:
                try:
                    out.append(GeodesicPath.certify(self.G, [self.vertex(v) for v in item["path"]]))
                except ValueError as e:
                    raise ConfigError(str(e)) from e
            elif isinstance(item, list) and len(item) == 2:
                out.append(geodesic_between(self.G, self.vertex(item[0]), self.vertex(item[1])))
            else:
                raise ConfigError(f"bad geodesic entry {item!r}")
        return out

    # each handler appends its records
    def delta(self, idx, p):
        mode = p.get("mode", "exact")
        if mode not in ("exact", "sampled"):
            raise ConfigError(f"unknown delta mode {mode!r}")
        b = self.cfg.budgets
        t = time.perf_counter()
        if mode == "exact":
            est = four_point_delta(self.G, "exact", cap=b.exact_quadruple_cap)
            params = {"mode": "exact", "cap": b.exact_quadruple_cap}
        else:
            size = p.get("sample", 100_000)
            if isinstance(size, bool) or not isinstance(size, int) or size < 1:
                raise BudgetError(f"delta sample must be a positive integer, got {size!r}")
            est = four_point_delta(self.G, "sampled", size, b.seed)
            params = {"mode": "sampled", "sample": size, "seed": b.seed}
        self.record(
            idx, "delta", params, est.value,
            self.verts(est.witness) if est.witness else None,
            mode == "exact", {"quadruples": est.quadruples_examined}, time.perf_counter() - t,
        )

    def bigons(self, idx, p):
        b = self.cfg.budgets
        pairs = p.get("pairs", "core" if self.G.is_cayley else "all")
        if pairs == "sample":
            source = PairSample(b.pair_sample, b.seed)
        elif pairs in ("core", "all"):
            source = pairs
        else:
            raise ConfigError(f"unknown pair source {pairs!r}")
        t = time.perf_counter()
        try:
            rep = fatness_profile(self.G, source)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        secs = time.perf_counter() - t
        per_class: dict[int, int] = {}
        for r in rep.records:
            per_class[r.distance] = per_class.get(r.distance, 0) + 1
        params = {"pairs": rep.pair_source}
        if pairs == "sample":
            params["seed"] = b.seed
        for d, r in rep.summary.items():
            self.record(
                idx, "bigons", {**params, "distance": d}, r.fatness,
                {"endpoints": self.verts((r.u, r.v)), "pair": self.verts(r.witness_pair), "t": r.witness_t},
                True, {"pairs": per_class[d]}, secs,
            )

    def morse(self, idx, p):
        if "params" in p:
            plist = [QGParams(_rational(L, "L"), _rational(A, "A")) for L, A in p["params"]]
        else:
            plist = [QGParams(_rational(p.get("L", 1), "L"), _rational(p.get("A", 0), "A"))]
        budget = self.cfg.budgets.node_expansions
        gs = self.geodesics(p.get("geodesics"), "sample")
        for params in plist:
            values, complete, expansions = [], True, 0
            for gi, g in enumerate(gs):
                t = time.perf_counter()
                est = morse_constant(self.G, g, params, budget)
                self.record(
                    idx, "morse",
                    {"L": _num(params.L), "A": _num(params.A), "budget": budget, "geodesic": gi},
                    est.value,
                    {"path": self.verts(est.witness), "geodesic": self.verts(g.vertices),
                     "reverse_deviation": est.reverse_deviation},
                    est.complete,
                    {"paths_examined": est.paths_examined, "paths_pruned": est.paths_pruned,
                     "expansions": est.expansions},
                    time.perf_counter() - t,
                )
                values.append(est.value)
                complete &= est.complete
                expansions += est.expansions
            top = int(np.argmax(values))
            self.record(
                idx, "morse",
                {"L": _num(params.L), "A": _num(params.A), "budget": budget, "aggregate": "sup"},
                values[top], {"geodesic": top}, complete,
                {"geodesics": len(gs), "expansions": expansions}, None,
            )

    def detour(self, idx, p):
        Cs = [_rational(c, "C") for c in _as_list(p.get("C", 3))]
        gs = self.geodesics(p.get("geodesics"), "sample")
        for C in Cs:
            if C < 1:
                raise ConfigError("C must be >= 1")
            values = []
            for gi, g in enumerate(gs):
                t = time.perf_counter()
                est = detour_constant(self.G, g, C)
                self.record(
                    idx, "detour", {"C": _num(C), "geodesic": gi}, est.value,
                    {"triple": self.verts(est.witness) if est.witness else None,
                     "geodesic": self.verts(g.vertices)},
                    est.complete, {"triples": est.triples_examined}, time.perf_counter() - t,
                )
                values.append(est.value)
            top = int(np.argmax(values))
            self.record(
                idx, "detour", {"C": _num(C), "aggregate": "sup"}, values[top],
                {"geodesic": top}, True, {"geodesics": len(gs)}, None,
            )

    def contract(self, idx, p):
        b = _rational(p.get("b", 1), "b")
        convention = p.get("convention", "canonical")
        if not 0 < b <= 1 or convention not in ("canonical", "set_diameter"):
            raise ConfigError("contract needs 0 < b <= 1 and a known convention")
        for gi, g in enumerate(self.geodesics(p.get("geodesics"), "axis")):
            t = time.perf_counter()
            est = contraction_constant(self.G, g, b, convention)
            self.record(
                idx, "contract", {"b": _num(b), "convention": convention, "geodesic": gi},
                est.c_hat,
                {"pair": self.verts(est.witness) if est.witness else None,
                 "geodesic": self.verts(g.vertices)},
                True,
                {"premise_pairs": est.premise_pairs, "canonical_c_hat": est.canonical_c_hat,
                 "set_diameter_c_hat": est.set_diameter_c_hat},
                time.perf_counter() - t,
            )

    def diverge(self, idx, p):
        if "r" not in p:
            raise ConfigError("diverge needs 'r'")
        rs = _as_list(p["r"])
        gauge = _rational(p.get("gauge", "1/2"), "gauge")
        for gi, g in enumerate(self.geodesics(p.get("geodesics"), "axis")):
            center = p.get("center", g.length // 2)
            for r in rs:
                if isinstance(r, bool) or not isinstance(r, int):
                    raise ConfigError(f"r must be an integer, got {r!r}")
                t = time.perf_counter()
                try:
                    est = divergence(self.G, g, r, center, gauge)
                except ValueError as e:
                    raise ConfigError(str(e)) from e
                self.record(
                    idx, "diverge",
                    {"r": r, "gauge": _num(gauge), "center": center, "geodesic": gi},
                    est.value,
                    {"path": self.verts(est.witness)} if est.witness else None,
                    True, {"removed_radius": est.removed_radius, "infinite": est.infinite}, time.perf_counter() - t,
                )


def run_suite(config: SuiteConfig | Mapping) -> Report:
    """Build the space once and run every analysis in declared order."""
    cfg = config if isinstance(config, SuiteConfig) else SuiteConfig.from_dict(config)
    log.info("building %s", cfg.space.kind)
    G = build_space(cfg.space, cfg.budgets.vertex_budget)
    log.info("space has %d vertices, radius %d", G.vertex_count, G.radius)
    runner = _Runner(G, cfg)
    for idx, a in enumerate(cfg.analyses):
        log.info("analysis %d: %s", idx, a.kind)
        getattr(runner, a.kind)(idx, a.params)
    return Report(
        version=__version__,
        config=cfg.to_dict(),
        results=runner.results,
        seed=cfg.budgets.seed,
        space={"vertex_count": G.vertex_count, "edge_count": len(G.edges),
               "radius": G.radius, "base": G.base},
        environment=environment_stamp(),
    )


# -- output ------------------------------------------------------------------------


def _cell(x) -> str:
    return json.dumps(x, sort_keys=True, separators=(",", ":"))


def render(report: Report, fmt: str = "json") -> str:
    doc = report.to_dict()
    try:
        jsonschema.validate(doc, REPORT_SCHEMA)
    except jsonschema.ValidationError as e:
        raise AssertionError(f"report violates its schema: {e.message}") from e
    if fmt == "json":
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.results:
            w.writerow([
                r["params"]["analysis"], r["kind"], _cell(r["params"]), _cell(r["value"]),
                _cell(r["complete"]), _cell(r["witness"]), _cell(r["counts"]), _cell(r["seconds"]),
            ])
        return buf.getvalue()
    raise ConfigError(f"unknown output format {fmt!r}")


def write_text(text: str, path: str | os.PathLike | None) -> None:
    """Write ``text`` to stdout, or atomically (temp file + rename) to ``path``."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".morsekit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: Report, fmt: str = "json", path: str | os.PathLike | None = None) -> str:
    """Render and write the report; returns the text."""
    text = render(report, fmt)
    write_text(text, path)
    return text
