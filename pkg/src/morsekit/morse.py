"""Discrete quasi-geodesics, Morse constants and detour constants.

A path ``p_0 ... p_n`` (unit speed, consecutive vertices adjacent) is an
(L, A)-quasi-geodesic when for all ``i <= j``::

    (j - i) / L - A  <=  d(p_i, p_j)  <=  L (j - i) + A

The lower bound is equivalent to ``j - i <= floor(L (d(p_i, p_j) + A))``,
which is how the search tests it with integers only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetError
from .metric import GeodesicPath, core_pairs, distance_to_set, geodesic_between
from .spaces import MetricGraph

DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True)
class QGParams:
    L: Fraction
    A: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "L", Fraction(self.L))
        object.__setattr__(self, "A", Fraction(self.A))
        if self.L < 1 or self.A < 0:
            raise ValueError(f"need L >= 1 and A >= 0, got L={self.L}, A={self.A}")

    def max_gap(self, dist: int) -> int:
        """Largest index gap ``j - i`` allowed between points at distance ``dist``."""
        return math.floor(self.L * (dist + self.A))

    def __str__(self):
        return f"({self.L},{self.A})"


@dataclass(frozen=True)
class QGCheck:
    ok: bool
    worst_pair: tuple[int, int] | None
    violation: Fraction = Fraction(0)


def is_quasi_geodesic(path: Sequence[int], params: QGParams, G: MetricGraph) -> QGCheck:
    for a, b in zip(path, path[1:]):
        if b not in G.adjacency[a]:
            raise ValueError(f"consecutive vertices {a}, {b} are not adjacent")
    D = G.distance_rows
    L, A = params.L, params.A
    worst, worst_pair = Fraction(0), None
    for i in range(len(path)):
        row = D[path[i]]
        for j in range(i + 1, len(path)):
            d = row[path[j]]
            gap = j - i
            excess = max(Fraction(gap) / L - A - d, d - L * gap - A)
            if excess > worst:
                worst, worst_pair = excess, (i, j)
    return QGCheck(worst_pair is None, worst_pair, worst)


class _Search:
    """Depth-first growth of simple (L, A)-quasi-geodesic prefixes from u to v.

    Prunes: a new vertex must satisfy the lower bound against every earlier
    vertex (a violated pair cannot be repaired by extending), and the prefix
    length plus the remaining distance to ``v`` may not exceed the length
    allowed between ``u`` and ``v``.
    """

    def __init__(self, G: MetricGraph, params: QGParams, counter: "_Counter"):
        self.G = G
        self.D = G.distance_rows
        self.params = params
        diam = int(G.distance_matrix.max()) if G.vertex_count > 1 else 0
        self.gap = [params.max_gap(k) for k in range(diam + 1)]
        self.counter = counter
        self.pruned = 0
        self.emitted = 0

    def run(self, u: int, v: int, order=None, bound=None) -> Iterator[list[int]]:
        D, gap = self.D, self.gap
        Dv = D[v]
        cap = gap[D[u][v]]
        counter = self.counter
        path = [u]
        on_path = {u}
        # per-depth candidate lists and cursors, plus prefix deviation for bounds
        cands = [self._children(u, order)]
        cursor = [0]
        while cands:
            depth = len(cands) - 1
            if cursor[depth] >= len(cands[depth]):
                cands.pop()
                cursor.pop()
                on_path.discard(path.pop())
                if bound:
                    bound.pop()
                continue
            w = cands[depth][cursor[depth]]
            cursor[depth] += 1
            if w in on_path:
                continue
            n = len(path)
            if n + Dv[w] > cap:
                self.pruned += 1
                continue
            Dw = D[w]
            for i in range(n):
                if n - i > gap[Dw[path[i]]]:
                    break
            else:
                if bound is not None and bound.reject(w, n):
                    self.pruned += 1
                    continue
                if not counter.take():
                    return
                if w == v:
                    self.emitted += 1
                    path.append(w)
                    yield path
                    path.pop()
                    continue
                path.append(w)
                on_path.add(w)
                if bound is not None:
                    bound.push(w)
                cands.append(self._children(w, order))
                cursor.append(0)
                continue
            self.pruned += 1

    def _children(self, w: int, order):
        nb = self.G.adjacency[w]
        return sorted(nb, key=order) if order else nb


class _Counter:
    def __init__(self, budget: int):
        if budget < 1:
            raise BudgetError(f"budget must be >= 1, got {budget}")
        self.budget = budget
        self.used = 0
        self.exhausted = False

    def take(self) -> bool:
        if self.used >= self.budget:
            self.exhausted = True
            return False
        self.used += 1
        return True


class QGEnumeration:
    """Iterable stream of (L, A)-quasi-geodesics from ``u`` to ``v``.

    After iteration, ``complete`` is False iff the node-expansion budget ran
    out; ``expansions`` and ``pruned`` report the work done.
    """

    def __init__(self, G: MetricGraph, u: int, v: int, params: QGParams, budget: int):
        if u == v:
            raise ValueError("endpoints must differ")
        self._counter = _Counter(budget)
        self._search = _Search(G, params, self._counter)
        self.u, self.v = u, v
        self._done = False

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        if self._done:
            raise RuntimeError("enumeration already consumed")
        self._done = True
        self._counter.take()  # the root
        for p in self._search.run(self.u, self.v):
            yield tuple(p)

    @property
    def complete(self) -> bool:
        return self._done and not self._counter.exhausted

    @property
    def expansions(self) -> int:
        return self._counter.used

    @property
    def pruned(self) -> int:
        return self._search.pruned


def enumerate_quasi_geodesics(
    G: MetricGraph, u: int, v: int, params: QGParams, budget: int = DEFAULT_BUDGET
) -> QGEnumeration:
    return QGEnumeration(G, u, v, params, budget)


@dataclass(frozen=True)
class MorseEstimate:
    params: QGParams
    geodesic: GeodesicPath
    value: int
    witness: tuple[int, ...]
    complete: bool
    paths_examined: int
    paths_pruned: int
    expansions: int
    budget: int
    reverse_deviation: int = 0


def deviation(G: MetricGraph, g: Sequence[int], path: Sequence[int]) -> int:
    """Largest distance from a vertex of ``path`` to the vertex set of ``g``."""
    return int(distance_to_set(G, g)[list(path)].max())


class _DeviationBound:
    """Branch-and-bound state for the Morse search.

    A prefix is abandoned when neither it nor any vertex still reachable
    within the remaining length can be farther from ``g`` than the best
    deviation already certified.
    """

    def __init__(self, G, devg: np.ndarray, target: int, cap: int, best: list[int]):
        self.D = G.distance_matrix
        self.devg = devg
        self.devl = devg.tolist()
        self.target = target
        self.cap = cap
        self.best = best
        self.stack = [0]
        self._cache: dict[tuple[int, int], int] = {}
        self.pruned = 0

    def reachable_max(self, w: int, rem: int) -> int:
        key = (w, rem)
        hit = self._cache.get(key)
        if hit is None:
            mask = self.D[w] + self.D[self.target] <= rem
            hit = int(self.devg[mask].max()) if mask.any() else -1
            self._cache[key] = hit
        return hit

    def reject(self, w: int, n: int) -> bool:
        dev = max(self.stack[-1], self.devl[w])
        return max(dev, self.reachable_max(w, self.cap - n)) <= self.best[0]

    def push(self, w: int):
        self.stack.append(max(self.stack[-1], self.devl[w]))

    def pop(self):
        self.stack.pop()

    def __bool__(self):
        return True


def morse_constant(
    G: MetricGraph, g: GeodesicPath, params: QGParams, budget: int = DEFAULT_BUDGET
) -> MorseEstimate:
    """Largest distance from ``g`` reached by an (L, A)-quasi-geodesic joining two of its points.

    Searches every endpoint pair of ``g`` with a shared node-expansion
    budget.  Each pair is explored by the pruned depth-first search, with an
    extra bound that skips prefixes which cannot beat the current maximum; the
    maximum is therefore the same as over the full enumeration.  If the budget
    runs out the value is a certified lower bound and ``complete`` is False.
    """
    counter = _Counter(budget)
    verts = g.vertices
    devg = distance_to_set(G, verts)
    devl = devg.tolist()
    best = [0]
    witness: tuple[int, ...] = tuple(verts)
    search = _Search(G, params, counter)
    order = lambda w: (-devl[w], w)
    pairs = sorted(
        ((i, j) for i in range(len(verts)) for j in range(i + 1, len(verts))),
        key=lambda ij: (ij[0] - ij[1], ij[0]),
    )
    skipped = 0
    for i, j in pairs:
        x, y = verts[i], verts[j]
        cap = search.gap[j - i]
        bound = _DeviationBound(G, devg, y, cap, best)
        if bound.reachable_max(x, cap) <= best[0]:
            skipped += 1
            continue
        if not counter.take():
            break
        for path in search.run(x, y, order=order, bound=bound):
            dev = max(devl[p] for p in path)
            if dev > best[0]:
                best[0] = dev
                witness = tuple(path)
        if counter.exhausted:
            break
    rev = 0
    if len(witness) > 1:
        a, b = verts.index(witness[0]), verts.index(witness[-1])
        seg = verts[min(a, b):max(a, b) + 1]
        rev = int(distance_to_set(G, witness)[list(seg)].max())
    return MorseEstimate(
        params=params,
        geodesic=g,
        value=best[0],
        witness=witness,
        complete=not counter.exhausted,
        paths_examined=search.emitted,
        paths_pruned=search.pruned + skipped,
        expansions=counter.used,
        budget=budget,
        reverse_deviation=rev,
    )


# -- detour constants ------------------------------------------------------------


@dataclass(frozen=True)
class DetourEstimate:
    C: Fraction
    value: int
    witness: tuple[int, int, int] | None
    complete: bool = True
    triples_examined: int = 0
    probes: int = 0


def _avoiding_distance(G: MetricGraph, a: int, b: int, blocked: np.ndarray, limit: int) -> int | None:
    """Shortest a->b walk length avoiding ``blocked`` vertices, if <= limit."""
    if a == b:
        return 0
    adj = G.adjacency
    seen = blocked.copy()
    seen[a] = True
    frontier = [a]
    d = 0
    while frontier and d < limit:
        d += 1
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y == b:
                    return d
                if not seen[y]:
                    seen[y] = True
                    nxt.append(y)
        frontier = nxt
    return None


def avoidance_radius(G: MetricGraph, a: int, b: int, m: int, limit: int) -> int:
    """Largest R such that some a->b walk of length <= limit avoids B(m, R-1)."""
    Dm = G.distance_matrix[m]
    lo, hi = 0, int(min(Dm[a], Dm[b]))
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _avoiding_distance(G, a, b, Dm <= mid - 1, limit) is not None:
            lo = mid
        else:
            hi = mid - 1
    return lo


def detour_constant(G: MetricGraph, g: GeodesicPath, C: Fraction | int | str) -> DetourEstimate:
    """Largest R(a, b, m) over a, b on ``g`` and m on the sub-geodesic between them."""
    C = Fraction(C)
    if C < 1:
        raise ValueError("C must be >= 1")
    verts = g.vertices
    best, witness, triples = 0, None, 0
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            limit = math.floor(C * (j - i))
            for k in range(i, j + 1):
                triples += 1
                if min(k - i, j - k) <= best:
                    continue
                R = avoidance_radius(G, verts[i], verts[j], verts[k], limit)
                if R > best:
                    best, witness = R, (verts[i], verts[j], verts[k])
    if witness is None and len(verts) > 1:
        witness = (verts[0], verts[-1], verts[0])
    return DetourEstimate(C, best, witness, True, triples)


# -- uniformity sweeps -------------------------------------------------------------


def default_geodesic_sample(G: MetricGraph, cap: int = 16, seed: int = 0) -> list[GeodesicPath]:
    """Canonical geodesics between the farthest-apart core pairs (all pairs off Cayley balls)."""
    D = G.distance_matrix
    if G.is_cayley:
        pairs = [(u, v) for u, v in core_pairs(G) if u != v]
    else:
        n = G.vertex_count
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not pairs:
        return [GeodesicPath((G.base,))]
    top = max(int(D[u, v]) for u, v in pairs)
    pairs = [(u, v) for u, v in pairs if D[u, v] == top]
    if len(pairs) > cap:
        rng = np.random.default_rng(seed)
        pairs = [pairs[k] for k in sorted(rng.choice(len(pairs), size=cap, replace=False))]
    return [geodesic_between(G, u, v) for u, v in pairs]


@dataclass
class SweepRow:
    geodesic: GeodesicPath
    morse: dict[QGParams, MorseEstimate] = field(default_factory=dict)
    detour: dict[Fraction, DetourEstimate] = field(default_factory=dict)


@dataclass
class SweepTable:
    rows: list[SweepRow]
    sup_morse: dict[QGParams, int]
    sup_detour: dict[Fraction, int]
    complete: dict[QGParams, bool]


def uniformity_sweep(
    G: MetricGraph,
    geodesic_sample: Sequence[GeodesicPath] | None = None,
    params_list: Sequence[QGParams] = (),
    C_list: Sequence = (),
    budget: int = DEFAULT_BUDGET,
    sample_cap: int = 16,
    seed: int = 0,
) -> SweepTable:
    """Morse and detour constants over a sample of geodesics, with their sups."""
    sample = list(geodesic_sample) if geodesic_sample else default_geodesic_sample(G, sample_cap, seed)
    C_list = [Fraction(c) for c in C_list]
    rows = []
    for g in sample:
        row = SweepRow(g)
        for params in params_list:
            row.morse[params] = morse_constant(G, g, params, budget)
        for C in C_list:
            row.detour[C] = detour_constant(G, g, C)
        rows.append(row)
    return SweepTable(
        rows,
        {p: max(r.morse[p].value for r in rows) for p in params_list},
        {C: max(r.detour[C].value for r in rows) for C in C_list},
        {p: all(r.morse[p].complete for r in rows) for p in params_list},
    )
