"""Four-point hyperbolicity and bigon fatness.

Bigon fatness is computed from interval slices rather than by enumerating
pairs of geodesics.  The two agree: a vertex ``w`` in the slice at ``t``
extends to a full geodesic (a geodesic ``u -> w`` followed by a geodesic
``w -> v``), so the largest slice diameter is attained by a pair of geodesics
at that same parameter, and conversely every geodesic pair at time ``t`` lies
in that slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import BudgetError
from .metric import core_pairs
from .spaces import MetricGraph

EXACT_CAP = 300


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    witness: tuple[int, int, int, int] | None
    mode: str
    quadruples_examined: int
    seed: int | None = None


def four_point_defect(D: np.ndarray, x: int, y: int, z: int, w: int) -> float:
    """Half the gap between the two largest pairing sums of a quadruple."""
    s = sorted((D[x, y] + D[z, w], D[x, z] + D[y, w], D[x, w] + D[y, z]))
    return (int(s[2]) - int(s[1])) / 2


def _twice_defect(s1, s2, s3):
    hi = np.maximum(np.maximum(s1, s2), s3)
    lo = np.minimum(np.minimum(s1, s2), s3)
    return hi - (s1 + s2 + s3 - hi - lo)


def four_point_delta(
    G: MetricGraph,
    mode: str = "exact",
    sample_size: int | None = None,
    seed: int | None = None,
    cap: int = EXACT_CAP,
) -> DeltaEstimate:
    """Largest four-point defect over all (exact) or seeded random quadruples."""
    D = G.distance_matrix.astype(np.int64)
    n = G.vertex_count
    if mode == "exact":
        if n > cap:
            raise BudgetError(f"exact delta limited to {cap} vertices, graph has {n}")
        best, witness, examined = 0, None, 0
        for x in range(n - 3):
            for y in range(x + 1, n - 2):
                rest = slice(y + 1, n)
                s1 = D[x, y] + D[rest, rest]
                s2 = D[x, rest][:, None] + D[y, rest][None, :]
                s3 = D[x, rest][None, :] + D[y, rest][:, None]
                defect = np.triu(_twice_defect(s1, s2, s3), k=1)
                m = n - y - 1
                examined += m * (m - 1) // 2
                k = int(defect.argmax())
                if defect.flat[k] > best:
                    best = int(defect.flat[k])
                    z, w = divmod(k, m)
                    witness = (x, y, y + 1 + z, y + 1 + w)
        if witness is None and n >= 4:
            witness = (0, 1, 2, 3)
        return DeltaEstimate(best / 2, witness, "exact", examined)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if sample_size is None or sample_size < 1:
        raise BudgetError("sampled delta needs sample_size >= 1")
    if seed is None:
        raise BudgetError("sampled delta needs a seed")
    rng = np.random.default_rng(seed)
    best, witness = -1, None
    done = 0
    while done < sample_size:
        k = min(65536, sample_size - done)
        q = rng.integers(0, n, size=(k, 4))
        x, y, z, w = q.T
        defect = _twice_defect(D[x, y] + D[z, w], D[x, z] + D[y, w], D[x, w] + D[y, z])
        i = int(defect.argmax())
        if defect[i] > best:
            best = int(defect[i])
            witness = tuple(int(a) for a in q[i])
        done += k
    return DeltaEstimate(best / 2, witness, "sampled", done, seed)


@dataclass(frozen=True)
class BigonFatness:
    u: int
    v: int
    distance: int
    fatness: int
    witness_t: int
    witness_pair: tuple[int, int]


def bigon_fatness(G: MetricGraph, u: int, v: int) -> BigonFatness:
    """Largest distance between two geodesics ``u -> v`` at equal parameter."""
    if u == v:
        raise ValueError("bigon fatness needs distinct endpoints")
    D = G.distance_matrix
    d = int(D[u, v])
    du = D[u]
    on = np.flatnonzero(du + D[v] == d)
    t_of = du[on]
    best, best_t, pair = 0, 0, (u, u)
    for t in range(1, d):
        sl = on[t_of == t]
        if len(sl) < 2:
            continue
        block = D[np.ix_(sl, sl)]
        k = int(block.argmax())
        if block.flat[k] > best:
            i, j = divmod(k, len(sl))
            best, best_t = int(block.flat[k]), t
            pair = (int(min(sl[i], sl[j])), int(max(sl[i], sl[j])))
    return BigonFatness(u, v, d, best, best_t, pair)


@dataclass(frozen=True)
class PairSample:
    size: int
    seed: int


PairSource = Union[str, PairSample, Iterable]


@dataclass
class FatnessReport:
    records: list[BigonFatness]
    summary: dict[int, BigonFatness] = field(default_factory=dict)
    pair_source: str = "core"

    def class_maxima(self) -> dict[int, int]:
        return {d: r.fatness for d, r in sorted(self.summary.items())}

    def cumulative(self) -> dict[int, int]:
        """Running maximum over distance classes up to ``d``; nondecreasing."""
        out, run = {}, 0
        for d, r in sorted(self.summary.items()):
            run = max(run, r.fatness)
            out[d] = run
        return out


def select_pairs(G: MetricGraph, source: PairSource) -> tuple[list[tuple[int, int]], str]:
    if source == "core":
        return [(u, v) for u, v in core_pairs(G) if u != v], "core"
    if source == "all":
        n = G.vertex_count
        return [(u, v) for u in range(n) for v in range(u + 1, n)], "all"
    if isinstance(source, PairSample):
        n = G.vertex_count
        if source.size < 1:
            raise BudgetError("pair sample size must be >= 1")
        rng = np.random.default_rng(source.seed)
        total = n * (n - 1) // 2
        picks = rng.choice(total, size=min(source.size, total), replace=False)
        rows = np.triu_indices(n, k=1)
        pairs = sorted((int(rows[0][k]), int(rows[1][k])) for k in picks)
        return pairs, f"sample(size={source.size}, seed={source.seed})"
    pairs = [(int(u), int(v)) for u, v in source]
    return [p for p in pairs if p[0] != p[1]], "explicit"


def fatness_profile(G: MetricGraph, pair_source: PairSource = "core") -> FatnessReport:
    pairs, label = select_pairs(G, pair_source)
    records = [bigon_fatness(G, u, v) for u, v in pairs]
    summary: dict[int, BigonFatness] = {}
    for r in records:
        cur = summary.get(r.distance)
        if cur is None or r.fatness > cur.fatness:
            summary[r.distance] = r
    return FatnessReport(records, dict(sorted(summary.items())), label)
