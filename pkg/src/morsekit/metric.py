"""Distances, canonical geodesics, interval slices and truncation-safe pairs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spaces import MetricGraph, _bfs_array, locate


@dataclass(frozen=True)
class DistanceTable:
    source: int
    dist: np.ndarray

    def __getitem__(self, v: int) -> int:
        return int(self.dist[v])


@dataclass(frozen=True)
class GeodesicPath:
    vertices: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    @classmethod
    def certify(cls, G: MetricGraph, vertices: Sequence[int]) -> "GeodesicPath":
        """Wrap ``vertices`` after checking it is a distance-realizing edge path."""
        vertices = tuple(int(v) for v in vertices)
        if not vertices:
            raise ValueError("a geodesic needs at least one vertex")
        for a, b in zip(vertices, vertices[1:]):
            if b not in G.adjacency[a]:
                raise ValueError(f"{a} and {b} are not adjacent")
        if G.distance_matrix[vertices[0], vertices[-1]] != len(vertices) - 1:
            raise ValueError("path is not a geodesic")
        return cls(vertices)

    def sub(self, i: int, j: int) -> "GeodesicPath":
        return GeodesicPath(self.vertices[i:j + 1])


def distances_from(G: MetricGraph, s: int) -> DistanceTable:
    if not 0 <= s < G.vertex_count:
        raise ValueError(f"{s} is not a vertex")
    if "distance_matrix" in G.__dict__:
        return DistanceTable(s, G.distance_matrix[s])
    return DistanceTable(s, _bfs_array(G.adjacency, s))


def geodesic_between(G: MetricGraph, u: int, v: int) -> GeodesicPath:
    """Canonical geodesic: step to the smallest-id neighbor one closer to ``v``."""
    dv = G.distance_matrix[v]
    path = [u]
    cur = u
    while cur != v:
        target = dv[cur] - 1
        cur = next(w for w in G.adjacency[cur] if dv[w] == target)
        path.append(cur)
    return GeodesicPath(tuple(path))


def interval_slice(G: MetricGraph, u: int, v: int, t: int) -> frozenset[int]:
    """Vertices at position ``t`` on some geodesic from ``u`` to ``v``."""
    D = G.distance_matrix
    d = int(D[u, v])
    if not 0 <= t <= d:
        raise ValueError(f"t={t} outside [0, {d}]")
    mask = (D[u] == t) & (D[v] == d - t)
    return frozenset(int(w) for w in np.flatnonzero(mask))


def core_pairs(G: MetricGraph) -> list[tuple[int, int]]:
    """Pairs ``u <= v`` whose geodesics cannot feel the truncation of the ball.

    Requires ``d(base,u) + d(u,v) <= radius`` and the same for ``v``; every
    group geodesic from u to v then stays in the ball.
    """
    if not G.is_cayley:
        raise ValueError("core pairs need a Cayley-ball or grid provenance")
    D = G.distance_matrix
    r = G.radius
    db = D[G.base]
    ok = (db[:, None] + D <= r) & (db[None, :] + D <= r)
    us, vs = np.nonzero(np.triu(ok))
    return [(int(a), int(b)) for a, b in zip(us, vs)]


def distance_to_set(G: MetricGraph, targets: Sequence[int]) -> np.ndarray:
    """``d(x, targets)`` for every vertex x."""
    return G.distance_matrix[:, list(targets)].min(axis=1)


def axis_geodesic(G: MetricGraph) -> GeodesicPath:
    """A long symmetric geodesic through the base.

    On labelled balls this is ``a^-k ... a^k`` for the largest k that fits
    (the coordinate axis of a grid); elsewhere a double-sweep diameter path.
    """
    if G.labels is not None and G.presentation is not None:
        for k in range(G.radius, 0, -1):
            verts = [locate(G, (1,) * i if i >= 0 else (-1,) * -i) for i in range(-k, k + 1)]
            if None in verts:
                continue
            try:
                return GeodesicPath.certify(G, verts)
            except ValueError:
                continue
        return GeodesicPath((G.base,))
    D = G.distance_matrix
    x = int(D[G.base].argmax())
    y = int(D[x].argmax())
    return geodesic_between(G, x, y)
