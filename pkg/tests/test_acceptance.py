"""Acceptance criteria, one test each, printing a PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v`` (or ``python tests/test_acceptance.py``).
"""

import contextlib
import itertools
import json
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from conftest import (
    brute_detour,
    brute_fatness,
    brute_quasi_geodesics,
    cycle,
    free2,
    genus2,
    grid,
    grid_axis,
    nx_distances,
    to_nx,
    tree,
)
from morsekit.contracting import contraction_constant, divergence
from morsekit.hyperbolicity import bigon_fatness, fatness_profile, four_point_delta
from morsekit.metric import geodesic_between
from morsekit.morse import QGParams, detour_constant, enumerate_quasi_geodesics, uniformity_sweep
from morsekit.presentation import check_small_cancellation, parse_presentation
from morsekit.report import SuiteConfig, render, run_suite
from morsekit.spaces import grid_vertex, random_connected_graph, random_tree

SPECS = Path(__file__).resolve().parent.parent / "specs"


@contextlib.contextmanager
def criterion(capsys, number, title, limit):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {status} {title} ({elapsed:.1f}s, limit {limit}s)")


def _diameter_geodesic(G):
    u, v = divmod(int(G.distance_matrix.argmax()), G.vertex_count)
    return geodesic_between(G, u, v)


def _brute_contraction(G, g, b=1):
    D = nx_distances(G)
    verts = list(g.vertices)
    proj = {}
    for x in range(G.vertex_count):
        d = min(D[x][p] for p in verts)
        proj[x] = (d, min(i for i, p in enumerate(verts) if D[x][p] == d))
    best = 0
    for x, y in itertools.product(range(G.vertex_count), repeat=2):
        if D[x][y] < b * proj[x][0]:
            best = max(best, abs(proj[x][1] - proj[y][1]))
    return best + 1


def _punctured_bfs(G, a, b, center, radius):
    D = nx_distances(G)
    H = to_nx(G)
    keep = [x for x in H if D[center][x] > radius]
    try:
        return nx.shortest_path_length(H.subgraph(keep), a, b)
    except (nx.NetworkXNoPath, nx.NodeNotFound):
        return None


def test_criterion_1_free_group_is_hyperbolic(capsys):
    with criterion(capsys, 1, "F2 balls: delta 0, thin bigons, uniform Morse sup", 60):
        assert four_point_delta(free2(3)).value == 0
        for r in (4, 5):
            est = four_point_delta(free2(r), "sampled", 10**5, 2024)
            assert est.value == 0 and est.seed == 2024 and est.quadruples_examined == 10**5
        sups = []
        for r in (3, 4, 5):
            G = free2(r)
            assert set(fatness_profile(G, "all").class_maxima().values()) == {0}
            sw = uniformity_sweep(G, params_list=[QGParams(2, 0)], budget=10**7)
            assert sw.complete[QGParams(2, 0)]
            sups.append(sw.sup_morse[QGParams(2, 0)])
        assert len(set(sups)) == 1, sups


def test_criterion_2_lattice_is_not_hyperbolic(capsys):
    with criterion(capsys, 2, "Z2 balls: delta, corner fatness and Morse sup grow", 300):
        deltas, sups = [], []
        for r in (2, 3, 4):
            G = grid(r)
            deltas.append(four_point_delta(G).value)
            b = bigon_fatness(G, grid_vertex(G, (0, 0)), grid_vertex(G, (r, r)))
            assert b.fatness == 2 * r == brute_fatness(G, b.u, b.v)
            sw = uniformity_sweep(G, params_list=[QGParams(3, 0)], budget=10**7)
            if r in (2, 3):
                assert sw.complete[QGParams(3, 0)]
            sups.append(sw.sup_morse[QGParams(3, 0)])
        assert deltas[0] < deltas[1] < deltas[2], deltas
        assert sups[0] < sups[1] < sups[2], sups


def test_criterion_3_detour_constants(capsys):
    with criterion(capsys, 3, "detour: 0 on trees, 1 on the 4-cycle, growing on Z2", 120):
        trees = [tree(2, 4), tree(3, 3)] + [random_tree(n, s) for n, s in [(30, 0), (60, 1), (90, 2)]]
        for T in trees:
            g = _diameter_geodesic(T)
            for C in (2, 3, 5):
                assert detour_constant(T, g, C).value == 0
        C4 = cycle(4)
        g = geodesic_between(C4, 0, 2)
        assert detour_constant(C4, g, 3).value == 1 == brute_detour(C4, g, 3)
        vals = [detour_constant(grid(r), grid_axis(grid(r), r), 3).value for r in (2, 3, 4)]
        assert vals[0] < vals[1] < vals[2], vals


def test_criterion_4_contraction(capsys):
    with criterion(capsys, 4, "contraction: c_hat 1 on trees, at least r on the Z2 axis", 60):
        rng = np.random.default_rng(0)
        for n in range(2, 101):
            for seed in range(3):
                T = random_tree(n, seed)
                geos = [_diameter_geodesic(T)]
                for _ in range(2):
                    u, v = (int(x) for x in rng.integers(0, n, 2))
                    geos.append(geodesic_between(T, u, v))
                for g in geos:
                    assert contraction_constant(T, g, 1).c_hat == 1 == _brute_contraction(T, g)
        for r in (3, 4):
            G = grid(r)
            g = grid_axis(G, r)
            c = contraction_constant(G, g, 1).c_hat
            assert c >= r and c == _brute_contraction(G, g)


def test_criterion_5_divergence(capsys):
    with criterion(capsys, 5, "divergence: infinite on trees, 6 on the Z2 axis at r=2", 10):
        for T in (tree(2, 5), tree(3, 3), random_tree(80, 5)):
            g = _diameter_geodesic(T)
            for r in range(2, g.length // 2 + 1):
                assert divergence(T, g, r).infinite
        G = grid(2)
        g = grid_axis(G, 2)
        est = divergence(G, g, 2)
        assert not est.infinite and est.value == 6
        assert est.value == _punctured_bfs(G, g[0], g[4], g[2], est.removed_radius)


def test_criterion_6_small_cancellation(capsys):
    with criterion(capsys, 6, "small cancellation: genus-2 passes, torus fails, thinner than Z2", 180):
        g2 = check_small_cancellation(parse_presentation("<a,b,c,d|abABcdCD>"))
        assert g2.passes and g2.max_piece_ratio == Fraction(1, 8)
        t = check_small_cancellation(parse_presentation("<a,b|abAB>"))
        assert not t.passes and t.max_piece_ratio == Fraction(1, 4)
        G = genus2(3)
        assert G.vertex_count == 457
        ours = fatness_profile(G).class_maxima()
        z2 = fatness_profile(grid(3)).class_maxima()
        common = [d for d in ours if d in z2 and d >= 2]
        assert common
        for d in common:
            assert ours[d] < z2[d], (d, ours[d], z2[d])


def test_criterion_7_oracle_equivalences(capsys):
    with criterion(capsys, 7, "pruned = unpruned, slices = geodesic pairs, sampled <= exact", 300):
        params = [(1, 0), (1, 1), (2, 0), (Fraction(3, 2), 1), (2, 1), (3, 0), (Fraction(5, 2), Fraction(1, 2))]
        for k in range(25):
            n = 6 + k
            G = random_connected_graph(n, k % 9, 100 + k)
            L, A = (Fraction(x) for x in params[k % len(params)])
            D = G.distance_matrix
            for u, v in itertools.permutations(range(n), 2):
                if L * (D[u, v] + A) > 10:
                    continue
                e = enumerate_quasi_geodesics(G, u, v, QGParams(L, A))
                assert set(e) == brute_quasi_geodesics(G, u, v, L, A) and e.complete
        for k in range(10):
            G = random_connected_graph(20 + 3 * k, 2 * k, 200 + k)
            pairs = list(itertools.combinations(range(G.vertex_count), 2))[::7]
            for u, v in pairs:
                assert bigon_fatness(G, u, v).fatness == brute_fatness(G, u, v)
        for k in range(10):
            G = random_connected_graph(10 + 2 * k, k, 300 + k)
            exact = four_point_delta(G).value
            for seed in range(3):
                assert four_point_delta(G, "sampled", 2000, seed).value <= exact


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "morsekit.cli", *map(str, args)],
                          capture_output=True, text=True)


def test_criterion_8_determinism_and_io(capsys, tmp_path):
    with criterion(capsys, 8, "byte-identical reports, JSON round-trip, exit codes", 120):
        cfg = json.loads((SPECS / "suites" / "z2_r3.json").read_text())
        a, b = render(run_suite(cfg)), render(run_suite(cfg))
        assert a == b
        doc = json.loads(a)
        assert json.dumps(doc, indent=2, allow_nan=False) + "\n" == a
        assert render(run_suite(SuiteConfig.from_dict(doc["config"]))) == a
        sampled = {"space": {"kind": "cycle", "n": 8},
                   "analyses": [{"kind": "delta", "mode": "sampled", "sample": 100}], "budgets": {"seed": 5}}
        assert render(run_suite(sampled)) == render(run_suite(sampled))

        bad_json = tmp_path / "bad.json"
        bad_json.write_text("{")
        sc_fail = tmp_path / "sc.json"
        sc_fail.write_text(json.dumps({"kind": "cayley_ball", "radius": 2,
                                       "group": {"family": "presentation", "text": "<a|a^7>"}}))
        cases = [
            (0, ["suite", "--spec", SPECS / "suites" / "f2_r4.json", "--out", tmp_path / "ok.json"]),
            (2, ["delta", "--spec", bad_json]),
            (3, ["delta", "--spec", sc_fail]),
            (4, ["delta", "--sampled", "--sample", "10", "--spec", SPECS / "cycle4.json"]),
            (5, ["delta", "--spec", tmp_path / "missing.json"]),
        ]
        for code, args in cases:
            r = _cli(*args)
            assert r.returncode == code, (args, r.returncode, r.stderr)
        assert json.loads((tmp_path / "ok.json").read_text())["results"]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
