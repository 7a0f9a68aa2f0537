"""Nearest-point projections to geodesics, contraction and divergence."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .metric import GeodesicPath
from .spaces import MetricGraph


@dataclass(frozen=True)
class Projection:
    set: tuple[int, ...]
    canonical: int
    indices: tuple[int, ...]
    distance: int


def project_to_geodesic(G: MetricGraph, g: GeodesicPath, x: int) -> Projection:
    """Vertices of ``g`` nearest to ``x``; the canonical one has the smallest index."""
    dx = G.distance_matrix[x, list(g.vertices)]
    d = int(dx.min())
    idx = tuple(int(i) for i in np.flatnonzero(dx == d))
    return Projection(tuple(g.vertices[i] for i in idx), g.vertices[idx[0]], idx, d)


def _projection_table(G: MetricGraph, g: GeodesicPath):
    Dg = G.distance_matrix[:, list(g.vertices)]
    dproj = Dg.min(axis=1)
    on = Dg == dproj[:, None]
    lo = on.argmax(axis=1)
    hi = Dg.shape[1] - 1 - on[:, ::-1].argmax(axis=1)
    return dproj.astype(np.int64), lo, hi, on


def non_interval_projections(G: MetricGraph, g: GeodesicPath) -> list[int]:
    """Vertices whose projection set is not a run of consecutive indices of ``g``."""
    _, lo, hi, on = _projection_table(G, g)
    counts = on.sum(axis=1)
    return [int(x) for x in np.flatnonzero(counts != hi - lo + 1)]


@dataclass(frozen=True)
class ContractionEstimate:
    b: Fraction
    c_hat: int
    witness: tuple[int, int] | None
    projection_convention: str
    canonical_c_hat: int
    set_diameter_c_hat: int
    premise_pairs: int


def contraction_constant(
    G: MetricGraph, g: GeodesicPath, b: Fraction | int | str = 1, convention: str = "canonical"
) -> ContractionEstimate:
    """Least ``c`` with ``d(x,y) < b d(x, pi(x))  =>  d(pi(x), pi(y)) < c`` on all of ``G``.

    Projection distances are measured along ``g``, where they equal index
    differences.  Both conventions are computed; ``c_hat`` follows
    ``convention``.
    """
    b = Fraction(b)
    if not 0 < b <= 1:
        raise ValueError("b must lie in (0, 1]")
    if convention not in ("canonical", "set_diameter"):
        raise ValueError(f"unknown projection convention {convention!r}")
    D = G.distance_matrix.astype(np.int64)
    dproj, lo, hi, _ = _projection_table(G, g)
    premise = D * b.denominator < (b.numerator * dproj)[:, None]
    count = int(premise.sum())
    canon = np.abs(lo[:, None] - lo[None, :])
    diam = np.maximum(hi[:, None], hi[None, :]) - np.minimum(lo[:, None], lo[None, :])
    out = {}
    for name, vals in (("canonical", canon), ("set_diameter", diam)):
        if count:
            masked = np.where(premise, vals, -1)
            k = int(masked.argmax())
            x, y = divmod(k, G.vertex_count)
            out[name] = (int(masked.flat[k]) + 1, (x, y))
        else:
            out[name] = (1, None)
    c_hat, witness = out[convention]
    return ContractionEstimate(
        b, c_hat, witness, convention, out["canonical"][0], out["set_diameter"][0], count
    )


def is_strongly_contracting(G: MetricGraph, g: GeodesicPath, c_threshold: int) -> bool:
    if c_threshold < 1:
        raise ValueError("threshold must be >= 1")
    return contraction_constant(G, g, 1).c_hat <= c_threshold


@dataclass(frozen=True)
class DivergenceEstimate:
    r: int
    value: int | None
    witness: tuple[int, ...] | None
    removed_radius: int

    @property
    def infinite(self) -> bool:
        return self.value is None


def _shortest_avoiding(G: MetricGraph, a: int, b: int, blocked: np.ndarray):
    parent = {a: a}
    frontier = [a]
    while frontier and b not in parent:
        nxt = []
        for x in frontier:
            for y in G.adjacency[x]:
                if y not in parent and not blocked[y]:
                    parent[y] = x
                    nxt.append(y)
        frontier = nxt
    if b not in parent:
        return None
    path = [b]
    while path[-1] != a:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def divergence(
    G: MetricGraph,
    g: GeodesicPath,
    r: int,
    center: int | None = None,
    gauge: Fraction | str | float = Fraction(1, 2),
) -> DivergenceEstimate:
    """Shortest walk from g(-r) to g(+r) missing the ball B(g(0), floor(gauge r) - 1).

    ``center`` is the index of g(0) in ``g`` (default: the middle vertex).
    """
    if center is None:
        center = g.length // 2
    if center - r < 0 or center + r > g.length:
        raise ValueError(f"r={r} exceeds the extent of the geodesic around index {center}")
    radius = math.floor(Fraction(gauge) * r) - 1
    if radius < 0:
        raise ValueError("the removed ball is empty; need floor(gauge * r) >= 1")
    m = g.vertices[center]
    blocked = G.distance_matrix[m] <= radius
    path = _shortest_avoiding(G, g.vertices[center - r], g.vertices[center + r], blocked)
    if path is None:
        return DivergenceEstimate(r, None, None, radius)
    return DivergenceEstimate(r, len(path) - 1, path, radius)
