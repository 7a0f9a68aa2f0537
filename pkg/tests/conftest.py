"""Shared builders and brute-force oracles.

The oracles here use networkx or plain enumeration so that they share no
code with the library routines they check.
"""

import itertools
from fractions import Fraction

import networkx as nx
import pytest

from morsekit.metric import GeodesicPath
from morsekit.spaces import build_space, grid_vertex


def free2(r):
    return build_space({"kind": "cayley_ball", "group": {"family": "free", "rank": 2}, "radius": r})


def z2_ball(r):
    return build_space({"kind": "cayley_ball", "group": {"family": "free_abelian", "rank": 2}, "radius": r})


def grid(r):
    return build_space({"kind": "grid_ball", "rank": 2, "radius": r})


def tree(branching, depth):
    return build_space({"kind": "tree", "branching": branching, "depth": depth})


def cycle(n):
    return build_space({"kind": "cycle", "n": n})


GENUS2 = "<a,b,c,d|abABcdCD>"


def genus2(r):
    return build_space({"kind": "cayley_ball", "group": {"family": "presentation", "text": GENUS2}, "radius": r})


def grid_axis(G, r):
    return GeodesicPath.certify(G, [grid_vertex(G, (x, 0)) for x in range(-r, r + 1)])


def to_nx(G):
    H = nx.Graph()
    H.add_nodes_from(range(G.vertex_count))
    H.add_edges_from(G.edges)
    return H


def nx_distances(G):
    return dict(nx.all_pairs_shortest_path_length(to_nx(G)))


def brute_delta(G):
    D = nx_distances(G)
    best = Fraction(0)
    for x, y, z, w in itertools.combinations(range(G.vertex_count), 4):
        s = sorted([D[x][y] + D[z][w], D[x][z] + D[y][w], D[x][w] + D[y][z]])
        best = max(best, Fraction(s[2] - s[1], 2))
    return best


def brute_fatness(G, u, v):
    """Max over pairs of geodesics u -> v of their largest same-time distance."""
    D = nx_distances(G)
    geos = list(nx.all_shortest_paths(to_nx(G), u, v))
    best = 0
    for g1, g2 in itertools.product(geos, repeat=2):
        best = max(best, max(D[a][b] for a, b in zip(g1, g2)))
    return best


def lower_bound_ok(path, D, L, A):
    n = len(path)
    return all(
        Fraction(j - i) / L - A <= D[path[i]][path[j]]
        for i in range(n) for j in range(i + 1, n)
    )


def brute_quasi_geodesics(G, u, v, L, A):
    """Every simple u -> v path satisfying the (L, A) bounds, no pruning."""
    L, A = Fraction(L), Fraction(A)
    D = nx_distances(G)
    cutoff = int(L * (D[u][v] + A))
    out = set()
    for p in nx.all_simple_paths(to_nx(G), u, v, cutoff=max(cutoff, 1)):
        if lower_bound_ok(p, D, L, A) and all(
            D[p[i]][p[j]] <= L * (j - i) + A for i in range(len(p)) for j in range(i + 1, len(p))
        ):
            out.add(tuple(p))
    return out


def brute_detour(G, g, C):
    """Detour constant by direct definition: largest R with an avoiding walk."""
    H = to_nx(G)
    D = nx_distances(G)
    verts = list(g.vertices)
    C = Fraction(C)
    best = 0
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            a, b = verts[i], verts[j]
            limit = int(C * D[a][b])
            for m in verts[i:j + 1]:
                R = 0
                for cand in range(1, min(D[m][a], D[m][b]) + 1):
                    keep = [x for x in H if D[m][x] > cand - 1 or x in (a, b)]
                    try:
                        ok = nx.shortest_path_length(H.subgraph(keep), a, b) <= limit
                    except nx.NetworkXNoPath:
                        ok = False
                    if ok:
                        R = cand
                best = max(best, R)
    return best


@pytest.fixture(scope="session")
def genus2_r3():
    return genus2(3)
