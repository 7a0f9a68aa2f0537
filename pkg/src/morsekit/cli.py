"""Command line interface.

Exit codes: 0 success, 2 configuration error, 3 build failure, 4 budget
error, 5 I/O error.  Logs go to stderr; stdout carries only the report
when ``--out`` is absent.
"""

from __future__ import annotations

import functools
import json
import logging
import sys

import click

from . import __version__
from .errors import (
    BudgetError,
    BuildError,
    ConfigError,
    PresentationSyntaxError,
    SmallCancellationError,
    SpecError,
)
from .report import SuiteConfig, environment_stamp, render, run_suite, write_text
from .spaces import DEFAULT_VERTEX_BUDGET, SpaceSpec, build_space

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUILD = 3
EXIT_BUDGET = 4
EXIT_IO = 5

log = logging.getLogger("morsekit")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (BuildError, SmallCancellationError)):
        return EXIT_BUILD
    if isinstance(exc, BudgetError):
        return EXIT_BUDGET
    if isinstance(exc, (ConfigError, SpecError, PresentationSyntaxError, json.JSONDecodeError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (BuildError, SmallCancellationError, BudgetError, ConfigError, SpecError,
                PresentationSyntaxError, json.JSONDecodeError, OSError) as e:
            code = exit_code_for(e)
            click.echo(f"error: {e}", err=True)
            sys.exit(code)
    return wrapper


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _common(fn):
    fn = click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False),
                      help="Space spec JSON (suite config for `suite`).")(fn)
    fn = click.option("--out", "out", default=None, type=click.Path(dir_okay=False),
                      help="Write the report here instead of stdout.")(fn)
    fn = click.option("--format", "fmt", default=None, type=click.Choice(["json", "csv"]))(fn)
    fn = click.option("--seed", type=int, default=None, help="Seed for sampled modes.")(fn)
    fn = click.option("--budget", type=int, default=None, help="Node-expansion budget.")(fn)
    fn = click.option("--vertex-budget", type=int, default=None)(fn)
    fn = click.option("--timing/--no-timing", default=False, help="Record wall time per record.")(fn)
    return fn


def _geodesics_option(fn):
    return click.option(
        "--geodesics", default=None,
        help="'axis', 'sample', or a JSON list of endpoint pairs / {\"path\": [...]} objects.",
    )(fn)


def _parse_geodesics(text):
    if text is None or text in ("axis", "sample"):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"--geodesics is neither a keyword nor JSON: {e}") from e


def _run_single(spec_path, out, fmt, seed, budget, vertex_budget, timing, analysis, budgets=None):
    space = _load_json(spec_path)
    b = dict(budgets or {})
    if seed is not None:
        b["seed"] = seed
    if budget is not None:
        b["node_expansions"] = budget
    if vertex_budget is not None:
        b["vertex_budget"] = vertex_budget
    cfg = SuiteConfig.from_dict({
        "space": space, "analyses": [analysis], "budgets": b, "record_timing": timing,
    })
    _finish(cfg, out, fmt)


def _finish(cfg: SuiteConfig, out, fmt):
    fmt = fmt or cfg.output.get("format", "json")
    out = out if out is not None else cfg.output.get("path")
    write_text(render(run_suite(cfg), fmt), out)
    if out:
        log.info("wrote %s", out)


@click.group()
@click.version_option(__version__, prog_name="morsekit")
@click.option("-v", "--verbose", is_flag=True, help="Progress messages on stderr.")
def main(verbose):
    """Finite experiments on Morse geodesics, hyperbolicity and contraction."""
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@_common
@_guard
def build(spec_path, out, fmt, seed, budget, vertex_budget, timing):
    """Build a space and print its vertices, labels and edges."""
    spec = SpaceSpec.from_dict(_load_json(spec_path))
    G = build_space(spec, vertex_budget or DEFAULT_VERTEX_BUDGET)
    if fmt == "csv":
        text = "u,v\n" + "".join(f"{u},{v}\n" for u, v in G.edges)
    else:
        doc = {
            "version": __version__,
            "space": spec.to_dict(),
            "vertex_count": G.vertex_count,
            "edge_count": len(G.edges),
            "base": G.base,
            "radius": G.radius,
            "labels": None if G.labels is None else [G.label(v) for v in range(G.vertex_count)],
            "edges": [list(e) for e in G.edges],
            "environment": environment_stamp(),
        }
        text = json.dumps(doc, indent=2) + "\n"
    write_text(text, out)


@main.command()
@_common
@click.option("--exact/--sampled", default=None, help="Exact scan (default) or sampling.")
@click.option("--sample", type=int, default=None, help="Quadruples to sample.")
@click.option("--cap", type=int, default=None, help="Exact-mode vertex cap.")
@_guard
def delta(spec_path, out, fmt, seed, budget, vertex_budget, timing, exact, sample, cap):
    """Four-point hyperbolicity constant."""
    sampled = exact is False or (exact is None and sample is not None)
    a = {"kind": "delta", "mode": "sampled" if sampled else "exact"}
    if sampled and sample is not None:
        a["sample"] = sample
    b = {"exact_quadruple_cap": cap} if cap is not None else {}
    _run_single(spec_path, out, fmt, seed, budget, vertex_budget, timing, a, b)


@main.command()
@_common
@click.option("--pairs", type=click.Choice(["core", "all", "sample"]), default=None)
@click.option("--sample", type=int, default=None, help="Pair sample size (implies --pairs sample).")
@_guard
def bigons(spec_path, out, fmt, seed, budget, vertex_budget, timing, pairs, sample):
    """Bigon fatness profile by distance class."""
    if sample is not None and pairs is None:
        pairs = "sample"
    a = {"kind": "bigons"}
    if pairs:
        a["pairs"] = pairs
    b = {"pair_sample": sample} if sample is not None else {}
    _run_single(spec_path, out, fmt, seed, budget, vertex_budget, timing, a, b)


@main.command()
@_common
@click.option("--L", "L", multiple=True, default=("1",), help="Multiplicative constant(s).")
@click.option("--A", "A", multiple=True, default=("0",), help="Additive constant(s), paired with --L.")
@click.option("--sample", type=int, default=None, help="Geodesic sample cap.")
@_geodesics_option
@_guard
def morse(spec_path, out, fmt, seed, budget, vertex_budget, timing, L, A, sample, geodesics):
    """Estimated Morse constants for (L, A)-quasi-geodesics."""
    if len(A) == 1 and len(L) > 1:
        A = A * len(L)
    if len(L) == 1 and len(A) > 1:
        L = L * len(A)
    if len(L) != len(A):
        raise ConfigError("give one --A per --L (or a single shared value)")
    a = {"kind": "morse", "params": [[l, x] for l, x in zip(L, A)]}
    g = _parse_geodesics(geodesics)
    if g is not None:
        a["geodesics"] = g
    b = {"geodesic_sample": sample} if sample is not None else {}
    _run_single(spec_path, out, fmt, seed, budget, vertex_budget, timing, a, b)


@main.command()
@_common
@click.option("--C", "C", multiple=True, default=("3",), help="Length factor(s).")
@click.option("--sample", type=int, default=None, help="Geodesic sample cap.")
@_geodesics_option
@_guard
def detour(spec_path, out, fmt, seed, budget, vertex_budget, timing, C, sample, geodesics):
    """Detour constants for paths of length at most C d(a,b)."""
    a = {"kind": "detour", "C": list(C)}
    g = _parse_geodesics(geodesics)
    if g is not None:
        a["geodesics"] = g
    b = {"geodesic_sample": sample} if sample is not None else {}
    _run_single(spec_path, out, fmt, seed, budget, vertex_budget, timing, a, b)


@main.command()
@_common
@click.option("--b", "b", default="1", help="Contraction parameter in (0, 1].")
@click.option("--convention", type=click.Choice(["canonical", "set_diameter"]), default="canonical")
@_geodesics_option
@_guard
def contract(spec_path, out, fmt, seed, budget, vertex_budget, timing, b, convention, geodesics):
    """Contraction constant of projections to a geodesic."""
    a = {"kind": "contract", "b": b, "convention": convention}
    g = _parse_geodesics(geodesics)
    if g is not None:
        a["geodesics"] = g
    _run_single(spec_path, out, fmt, seed, budget, vertex_budget, timing, a)


@main.command()
@_common
@click.option("--r", "r", multiple=True, type=int, required=True, help="Radius (repeatable).")
@click.option("--gauge", default="1/2", help="Removed-ball gauge.")
@_geodesics_option
@_guard
def diverge(spec_path, out, fmt, seed, budget, vertex_budget, timing, r, gauge, geodesics):
    """Divergence of a geodesic around its midpoint."""
    a = {"kind": "diverge", "r": list(r), "gauge": gauge}
    g = _parse_geodesics(geodesics)
    if g is not None:
        a["geodesics"] = g
    _run_single(spec_path, out, fmt, seed, budget, vertex_budget, timing, a)


@main.command()
@_common
@_guard
def suite(spec_path, out, fmt, seed, budget, vertex_budget, timing):
    """Run every analysis of a suite config file."""
    raw = _load_json(spec_path)
    if not isinstance(raw, dict):
        raise ConfigError("suite config must be a JSON object")
    b = dict(raw.get("budgets", {}))
    if seed is not None:
        b["seed"] = seed
    if budget is not None:
        b["node_expansions"] = budget
    if vertex_budget is not None:
        b["vertex_budget"] = vertex_budget
    raw = {**raw, "budgets": b}
    if timing:
        raw["record_timing"] = True
    _finish(SuiteConfig.from_dict(raw), out, fmt)


if __name__ == "__main__":
    main()
