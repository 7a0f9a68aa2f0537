"""Finite metric graphs: Cayley balls, grid boxes, trees, cycles, edge lists."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import BudgetError, BuildError, SmallCancellationError, SpecError
from .presentation import (
    GroupPresentation,
    Word,
    check_small_cancellation,
    dehn_solver,
    exponent_vector,
    free_abelian_presentation,
    free_presentation,
    free_reduce,
    parse_presentation,
)

log = logging.getLogger(__name__)

KINDS = ("cayley_ball", "grid_ball", "tree", "cycle", "explicit_graph")
DEFAULT_VERTEX_BUDGET = 200_000
MATRIX_CAP = 5_000


@dataclass(frozen=True, eq=False)
class SpaceSpec:
    """Declarative description of a space; ``params`` mirror the JSON schema."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SpaceSpec":
        if not isinstance(d, Mapping) or "kind" not in d:
            raise SpecError("space spec must be an object with a 'kind' key")
        params = {k: v for k, v in d.items() if k != "kind"}
        spec = cls(str(d["kind"]), params)
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    def __eq__(self, other):
        return isinstance(other, SpaceSpec) and self.to_dict() == other.to_dict()

    def validate(self):
        p = self.params
        if self.kind not in KINDS:
            raise SpecError(f"unknown space kind {self.kind!r}")
        if self.kind == "cayley_ball":
            _positive_int(p, "radius")
            group_presentation(p.get("group"))
        elif self.kind == "grid_ball":
            _positive_int(p, "rank")
            _positive_int(p, "radius")
        elif self.kind == "tree":
            _positive_int(p, "branching")
            _positive_int(p, "depth")
        elif self.kind == "cycle":
            n = _positive_int(p, "n")
            if n < 3:
                raise SpecError("a simple cycle needs n >= 3")
        else:
            edges = p.get("edges")
            if not isinstance(edges, list) or not edges:
                raise SpecError("explicit_graph needs a nonempty 'edges' list")
            _check_edges(edges, p.get("base", 0))


def _positive_int(p: Mapping, key: str) -> int:
    v = p.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise SpecError(f"{key!r} must be a positive integer, got {v!r}")
    return v


def group_presentation(group: Any) -> GroupPresentation:
    """Presentation from the ``group`` object of a cayley_ball spec."""
    if not isinstance(group, Mapping):
        raise SpecError("cayley_ball needs a 'group' object")
    family = group.get("family")
    if family == "free":
        return free_presentation(_positive_int(group, "rank"))
    if family == "free_abelian":
        return free_abelian_presentation(_positive_int(group, "rank"))
    if family == "presentation":
        text = group.get("text")
        if not isinstance(text, str):
            raise SpecError("presentation family needs a 'text' string")
        return parse_presentation(text)
    raise SpecError(f"unknown group family {family!r}")


def _check_edges(edges, base) -> int:
    seen = set()
    verts = set()
    for e in edges:
        if (
            not isinstance(e, (list, tuple))
            or len(e) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in e)
        ):
            raise SpecError(f"bad edge {e!r}")
        u, v = e
        if u == v:
            raise SpecError(f"loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise SpecError(f"repeated edge {key}")
        seen.add(key)
        verts.update(key)
    n = max(verts) + 1
    if len(verts) != n:
        raise SpecError("vertex ids must be 0..n-1 with no isolated vertices")
    if not isinstance(base, int) or not 0 <= base < n:
        raise SpecError(f"base {base!r} is not a vertex")
    adj = _adjacency(n, seen)
    if len(_bfs(adj, base)) != n:
        raise SpecError("explicit graph is not connected")
    return n


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """A finite connected simple graph with a base vertex.

    Immutable; the distance matrix is computed once on first use and shared.
    """

    vertex_count: int
    adjacency: tuple[tuple[int, ...], ...]
    base: int
    radius: int
    provenance: SpaceSpec | None = None
    labels: tuple[Word, ...] | None = None
    presentation: GroupPresentation | None = None

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        n = self.vertex_count
        if n > MATRIX_CAP:
            raise BudgetError(
                f"all-pairs distances are not materialized above {MATRIX_CAP} vertices"
            )
        D = np.empty((n, n), dtype=np.int32)
        for s in range(n):
            D[s] = _bfs_array(self.adjacency, s)
        D.setflags(write=False)
        return D

    @cached_property
    def distance_rows(self) -> list[list[int]]:
        """The distance matrix as nested lists, for scalar inner loops."""
        return self.distance_matrix.tolist()

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v
        )

    @cached_property
    def label_index(self) -> dict[Word, int]:
        if self.labels is None:
            return {}
        return {w: i for i, w in enumerate(self.labels)}

    @property
    def is_cayley(self) -> bool:
        return self.provenance is not None and self.provenance.kind in ("cayley_ball", "grid_ball")

    def label(self, v: int) -> str | None:
        if self.labels is None or self.presentation is None:
            return None
        return self.presentation.format_word(self.labels[v])

    def check(self):
        """Structural sanity: symmetric, simple, connected, within radius."""
        for u, nb in enumerate(self.adjacency):
            if list(nb) != sorted(set(nb)) or u in nb:
                raise AssertionError(f"adjacency of {u} not sorted/simple")
            for v in nb:
                if u not in self.adjacency[v]:
                    raise AssertionError(f"asymmetric edge {u}-{v}")
        dist = _bfs(self.adjacency, self.base)
        if len(dist) != self.vertex_count:
            raise AssertionError("graph is not connected")
        if max(dist.values()) != self.radius:
            raise AssertionError("radius does not match base eccentricity")


def _adjacency(n: int, edges) -> tuple[tuple[int, ...], ...]:
    nb: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        nb[u].add(v)
        nb[v].add(u)
    return tuple(tuple(sorted(s)) for s in nb)


def _bfs(adj, s: int) -> dict[int, int]:
    dist = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def _bfs_array(adj, s: int) -> np.ndarray:
    dist = np.full(len(adj), -1, dtype=np.int32)
    dist[s] = 0
    frontier = [s]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def graph_from_edges(edges: Sequence[Sequence[int]], base: int = 0) -> MetricGraph:
    edges = [list(e) for e in edges]
    return build_space(SpaceSpec("explicit_graph", {"edges": edges, "base": base}))


def build_space(spec: SpaceSpec | Mapping, vertex_budget: int = DEFAULT_VERTEX_BUDGET) -> MetricGraph:
    """Construct the finite metric graph described by ``spec``."""
    if not isinstance(spec, SpaceSpec):
        spec = SpaceSpec.from_dict(spec)
    else:
        spec.validate()
    p = spec.params
    if spec.kind == "cayley_ball":
        pres = group_presentation(p["group"])
        return _cayley_ball(spec, pres, p["radius"], vertex_budget)
    if spec.kind == "grid_ball":
        pres = free_abelian_presentation(p["rank"])
        return _cayley_ball(spec, pres, None, vertex_budget, box=p["radius"])
    if spec.kind == "tree":
        return _tree(spec, p["branching"], p["depth"], vertex_budget)
    if spec.kind == "cycle":
        n = p["n"]
        _budget(n, vertex_budget)
        adj = _adjacency(n, [(i, (i + 1) % n) for i in range(n)])
        return MetricGraph(n, adj, 0, n // 2, spec)
    n = _check_edges(p["edges"], p.get("base", 0))
    _budget(n, vertex_budget)
    adj = _adjacency(n, [tuple(e) for e in p["edges"]])
    base = p.get("base", 0)
    return MetricGraph(n, adj, base, max(_bfs(adj, base).values()), spec)


def _budget(n: int, cap: int):
    if n > cap:
        raise BuildError(f"vertex budget exceeded ({n} > {cap})")


def _tree(spec, branching: int, depth: int, cap: int) -> MetricGraph:
    edges = []
    frontier = [0]
    n = 1
    for _ in range(depth):
        nxt = []
        for u in frontier:
            for _ in range(branching):
                edges.append((u, n))
                nxt.append(n)
                n += 1
                _budget(n, cap)
        frontier = nxt
    return MetricGraph(n, _adjacency(n, edges), 0, depth, spec)


class _Locator:
    """Vertex lookup for group elements: exact keys or pairwise Dehn tests."""

    def __init__(self, pres: GroupPresentation):
        self.pres = pres
        family = pres.family_tag
        if family == "free":
            self.key: Callable[[Word], Any] | None = lambda w: w
        elif family == "free_abelian":
            self.key = lambda w: exponent_vector(w, pres.rank)
        elif family == "small_cancellation":
            result = check_small_cancellation(pres)
            if not result.passes:
                raise SmallCancellationError(
                    f"{pres} fails C'(1/6) (max piece ratio {result.max_piece_ratio}); "
                    "no word problem solver available"
                )
            self.key = None
            self.solver = dehn_solver(pres)
        else:
            raise BuildError(f"no word problem solver for family {family!r}")
        self.exact: dict[Any, int] = {}
        # abelian key -> list of (vertex, label), for pairwise identity tests
        self.buckets: dict[tuple, list[tuple[int, Word]]] = {}
        self.sphere: list[int] = []

    def add(self, v: int, w: Word, depth: int):
        self.sphere.append(depth)
        if self.key is not None:
            self.exact[self.key(w)] = v
        else:
            self.buckets.setdefault(self.solver.abelian_key(w), []).append((v, w))

    def find(self, w: Word, depths: range) -> int | None:
        if self.key is not None:
            return self.exact.get(self.key(w))
        for v, label in self.buckets.get(self.solver.abelian_key(w), ()):
            if self.sphere[v] in depths and self.solver.equal(w, label):
                return v
        return None


def _cayley_ball(spec, pres: GroupPresentation, radius, cap, box=None) -> MetricGraph:
    """Breadth-first growth from the identity.

    Vertices are discovered sphere by sphere, extending earlier vertices first
    and trying letters in the order a, A, b, B, ...; each label is therefore
    the shortlex-least word for its element.
    """
    loc = _Locator(pres)
    letters = pres.letters()
    labels: list[Word] = [()]
    depth: list[int] = [0]
    loc.add(0, (), 0)
    edges: set[tuple[int, int]] = set()

    def inside(w: Word) -> bool:
        if box is not None:
            return all(abs(x) <= box for x in exponent_vector(w, pres.rank))
        return len(w) <= radius

    u = 0
    while u < len(labels):
        du = depth[u]
        for s in letters:
            w = free_reduce(labels[u] + (s,))
            v = loc.find(w, range(max(du - 1, 0), du + 2))
            if v is None:
                if (box is None and du + 1 > radius) or not inside(w):
                    continue
                v = len(labels)
                _budget(v + 1, cap)
                labels.append(w)
                depth.append(du + 1)
                loc.add(v, w, du + 1)
            if v != u:
                edges.add((min(u, v), max(u, v)))
        u += 1
        if u % 5000 == 0:
            log.debug("cayley ball: %d vertices expanded, %d found", u, len(labels))

    n = len(labels)
    adj = _adjacency(n, edges)
    return MetricGraph(n, adj, 0, max(depth), spec, tuple(labels), pres)


def locate(G: MetricGraph, word: Sequence[int]) -> int | None:
    """Vertex of a Cayley ball representing ``word``, or None if outside."""
    if G.labels is None or G.presentation is None:
        raise ValueError("graph has no word labels")
    w = free_reduce(word)
    hit = G.label_index.get(w)
    if hit is not None:
        return hit
    pres = G.presentation
    if pres.family_tag == "free":
        return None
    if pres.family_tag == "free_abelian":
        e = exponent_vector(w, pres.rank)
        for i, label in enumerate(G.labels):
            if exponent_vector(label, pres.rank) == e:
                return i
        return None
    solver = dehn_solver(pres)
    key = solver.abelian_key(w)
    for i, label in enumerate(G.labels):
        if solver.abelian_key(label) == key and solver.equal(w, label):
            return i
    return None


def grid_vertex(G: MetricGraph, coords: Sequence[int]) -> int | None:
    """Vertex of a free abelian ball / grid box at integer coordinates."""
    word: list[int] = []
    for i, x in enumerate(coords):
        word.extend([(i + 1) if x > 0 else -(i + 1)] * abs(x))
    return locate(G, word)


def coordinates(G: MetricGraph, v: int) -> tuple[int, ...]:
    if G.labels is None or G.presentation is None:
        raise ValueError("graph has no word labels")
    return exponent_vector(G.labels[v], G.presentation.rank)


def random_tree_edges(n: int, rng: np.random.Generator) -> list[list[int]]:
    """Uniform random recursive tree: vertex i attaches to a random earlier one."""
    return [[int(rng.integers(0, i)), i] for i in range(1, n)]


def random_connected_graph(n: int, extra_edges: int, seed: int) -> MetricGraph:
    """Random spanning tree plus ``extra_edges`` random chords (seeded)."""
    rng = np.random.default_rng(seed)
    edges = {tuple(e) for e in random_tree_edges(n, rng)}
    tries = 0
    target = len(edges) + extra_edges
    max_edges = n * (n - 1) // 2
    while len(edges) < min(target, max_edges) and tries < 100 * (extra_edges + 1):
        u, v = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        edges.add((u, v))
        tries += 1
    return graph_from_edges(sorted(edges))


def random_tree(n: int, seed: int) -> MetricGraph:
    rng = np.random.default_rng(seed)
    if n == 1:
        raise SpecError("explicit trees need at least one edge")
    return graph_from_edges(random_tree_edges(n, rng))


def relabel(G: MetricGraph, perm: Sequence[int]) -> MetricGraph:
    """Isomorphic copy with vertex ``v`` renamed ``perm[v]``."""
    edges = [[perm[u], perm[v]] for u, v in G.edges]
    return graph_from_edges(edges, base=perm[G.base])
