"""Vietoris-Rips persistent homology in dimensions 0 and 1.

H0 comes from Kruskal's algorithm on the complete distance graph: every
finite H0 bar is ``(0, w)`` for an MST edge weight ``w``. H1 comes from a
GF(2) column reduction over edges and triangles.

Simplices are ordered by ``(filtration value, dimension, vertices)``. Within
one dimension that is "value, then lexicographic vertex tuple", which is what
both the edge sort and the triangle keys below produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numba
import numpy as np
from numba import types
from numba.typed import Dict

from .core import (
    DistanceMatrix,
    MetricKind,
    MetricReport,
    PersistenceDiagram,
    check_embedding,
    diameter,
    pairwise_distances,
)
from .errors import BadParams, DegenerateCloud, ZeroDiameter

DEFAULT_SUBSAMPLE = 512
# triangle keys are value_rank * n**3 + code and must fit in int64
MAX_H1_POINTS = 4096


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    filtration_value: float

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1

    def sort_key(self):
        return (self.filtration_value, self.dimension, self.vertices)


def rips_simplex(dm: DistanceMatrix, vertices: Iterable[int]) -> Simplex:
    verts = tuple(sorted(vertices))
    d = dm.values
    value = max((float(d[a, b]) for i, a in enumerate(verts) for b in verts[i + 1:]), default=0.0)
    return Simplex(verts, value)


@dataclass(frozen=True)
class TotalPersistenceResult:
    value: float
    dimension: int
    finite_pair_count: int
    essential_count: int
    diameter: float


class UnionFind:
    """Disjoint sets with union by rank and path compression."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> bool:
        """Merge the sets of ``i`` and ``j``; False if they were already one set."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1
        return True


def edge_filtration(dm: DistanceMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edges ``(a, b, value)`` with ``a < b`` sorted by value, ties lexicographic."""
    a, b = np.triu_indices(dm.n, 1)
    values = dm.values[a, b]
    # triu_indices is already lexicographic, so a stable sort keeps ties in order
    order = np.argsort(values, kind="stable")
    return a[order], b[order], values[order]


def rips_h0_diagram(dm: DistanceMatrix) -> PersistenceDiagram:
    """H0 diagram: one ``(0, w)`` bar per MST edge plus one essential bar."""
    n = dm.n
    if n < 2:
        raise DegenerateCloud("H0 diagram needs at least 2 points")
    diam = float(dm.values.max())
    ea, eb, ev = edge_filtration(dm)
    uf = UnionFind(n)
    deaths = []
    for a, b, w in zip(ea.tolist(), eb.tolist(), ev.tolist()):
        if uf.union(a, b):
            deaths.append(w)
            if len(deaths) == n - 1:
                break
    intervals = np.column_stack([np.zeros(len(deaths)), np.array(deaths, dtype=np.float64)])
    return PersistenceDiagram(0, intervals, diam, essential_count=1)


@numba.njit(cache=True, nogil=True)
def _xor_sorted(x, nx, y, out):
    """Symmetric difference of two sorted runs; returns length written to ``out``."""
    i = 0
    j = 0
    k = 0
    ny = y.shape[0]
    while i < nx and j < ny:
        if x[i] < y[j]:
            out[k] = x[i]
            i += 1
            k += 1
        elif x[i] > y[j]:
            out[k] = y[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < nx:
        out[k] = x[i]
        i += 1
        k += 1
    while j < ny:
        out[k] = y[j]
        j += 1
        k += 1
    return k


@numba.njit(cache=True, nogil=True)
def _coboundary(e, rank, vrank, edge_a, edge_b, n, out):
    """Sorted triangle keys of the cofacets of edge ``e``.

    A triangle's key is ``value_rank * n**3 + lexicographic code``; ordering by
    key is ordering by (filtration value, vertex tuple).
    """
    a = edge_a[e]
    b = edge_b[e]
    n3 = n * n * n
    k = 0
    for c in range(n):
        if c == a or c == b:
            continue
        vr = max(vrank[e], vrank[rank[a, c]], vrank[rank[b, c]])
        if c < a:
            code = (c * n + a) * n + b
        elif c < b:
            code = (a * n + c) * n + b
        else:
            code = (a * n + b) * n + c
        out[k] = vr * n3 + code
        k += 1
    out[:k].sort()
    return k


@numba.njit(cache=True, nogil=True)
def _reduce_h1(rank, vrank, edge_a, edge_b, edge_val, cleared, n):
    """Reduce the edge coboundary matrix with clearing.

    Columns are edges in reverse filtration order; the pivot of a column is
    its earliest triangle. Edges in ``cleared`` (the MST edges, which kill H0
    classes) are skipped. Each surviving column's reduction is remembered as
    a list of edges whose coboundaries it sums, so only those short lists are
    stored. Returns (birth, death) arrays and the number of columns that
    reduced to zero.
    """
    m = edge_val.shape[0]
    n3 = n * n * n
    births = np.empty(m, np.float64)
    deaths = np.empty(m, np.float64)
    npairs = 0
    zero_columns = 0

    owner = Dict.empty(key_type=types.int64, value_type=types.int64)
    vstart = np.zeros(m, np.int64)
    vlen = np.zeros(m, np.int64)
    vbuf = np.empty(max(16, 2 * m), np.int64)
    used = 0

    work = np.empty(8 * n + 16, np.int64)
    tmp = np.empty(8 * n + 16, np.int64)
    cob = np.empty(n, np.int64)
    vcol = np.empty(16, np.int64)
    vtmp = np.empty(16, np.int64)

    for e in range(m - 1, -1, -1):
        if cleared[e]:
            continue
        wlen = _coboundary(e, rank, vrank, edge_a, edge_b, n, work)
        vcol[0] = e
        nv = 1
        while wlen > 0:
            pivot = work[0]
            if pivot not in owner:
                break
            j = owner[pivot]
            for t in range(vstart[j], vstart[j] + vlen[j]):
                clen = _coboundary(vbuf[t], rank, vrank, edge_a, edge_b, n, cob)
                if wlen + clen > tmp.shape[0]:
                    tmp = np.empty(2 * (wlen + clen), np.int64)
                wlen = _xor_sorted(work, wlen, cob[:clen], tmp)
                work, tmp = tmp, work
            # vcol ^= V_j, both kept sorted
            need = nv + vlen[j]
            if need > vtmp.shape[0]:
                vtmp = np.empty(2 * need, np.int64)
            nv = _xor_sorted(vcol, nv, vbuf[vstart[j]:vstart[j] + vlen[j]], vtmp)
            vcol, vtmp = vtmp, vcol
        if wlen == 0:
            zero_columns += 1
            continue
        pivot = work[0]
        owner[pivot] = np.int64(e)
        if used + nv > vbuf.shape[0]:
            grown = np.empty(max(2 * vbuf.shape[0], used + nv), np.int64)
            grown[:used] = vbuf[:used]
            vbuf = grown
        vbuf[used:used + nv] = vcol[:nv]
        vstart[e] = used
        vlen[e] = nv
        used += nv
        births[npairs] = edge_val[e]
        deaths[npairs] = edge_val[pivot // n3]
        npairs += 1
    return births[:npairs], deaths[:npairs], zero_columns


def mst_edges(dm: DistanceMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Edge filtration plus the filtration indices of the edges Kruskal accepts."""
    ea, eb, ev = edge_filtration(dm)
    n = dm.n
    uf = UnionFind(n)
    accepted = []
    for idx, (a, b) in enumerate(zip(ea.tolist(), eb.tolist())):
        if uf.union(a, b):
            accepted.append(idx)
            if len(accepted) == n - 1:
                break
    return ea, eb, ev, np.array(accepted, dtype=np.int64)


def rips_h1_diagram(dm: DistanceMatrix) -> PersistenceDiagram:
    """H1 diagram of the full Vietoris-Rips filtration up to the diameter.

    All triangles are present by the end, so every loop dies and there are no
    essential H1 bars. Zero-length pairs are kept.

    The reduction runs on the coboundary matrix (edges as columns, processed
    in reverse order), which yields the same finite pairs as reducing the
    edge-triangle boundary matrix. Clearing: the ``n - 1`` MST edges are
    exactly the edges killing H0 classes, so their columns are known to
    reduce to zero and are never touched.
    """
    n = dm.n
    if n < 3:
        raise DegenerateCloud("H1 diagram needs at least 3 points")
    if n > MAX_H1_POINTS:
        raise BadParams(f"H1 is limited to {MAX_H1_POINTS} points; subsample first (got {n})")
    diam = float(dm.values.max())
    ea, eb, ev, tree = mst_edges(dm)
    m = len(ev)
    rank = np.full((n, n), -1, dtype=np.int64)
    idx = np.arange(m, dtype=np.int64)
    rank[ea, eb] = idx
    rank[eb, ea] = idx
    # index of the first edge sharing each edge's value
    starts = np.flatnonzero(np.r_[True, ev[1:] != ev[:-1]])
    vrank = starts[np.cumsum(np.r_[True, ev[1:] != ev[:-1]]) - 1].astype(np.int64)
    cleared = np.zeros(m, dtype=np.bool_)
    cleared[tree] = True
    births, deaths, zero_columns = _reduce_h1(
        rank, vrank, ea.astype(np.int64), eb.astype(np.int64), ev, cleared, n
    )
    if zero_columns:
        raise AssertionError(f"{zero_columns} positive edges never died; filtration is incomplete")
    return PersistenceDiagram(1, np.column_stack([births, deaths]), diam, essential_count=0)


def total_persistence(diagram: PersistenceDiagram) -> TotalPersistenceResult:
    """Sum of finite bar lengths divided by the cloud diameter.

    Essential bars are left out of the sum. ``math.fsum`` makes the sum
    independent of pair order.
    """
    if not diagram.diameter > 0:
        raise ZeroDiameter("cannot normalize by a zero diameter")
    value = math.fsum(diagram.lengths.tolist()) / diagram.diameter
    return TotalPersistenceResult(
        value=value,
        dimension=diagram.dimension,
        finite_pair_count=len(diagram),
        essential_count=diagram.essential_count,
        diameter=diagram.diameter,
    )


def subsample_indices(n: int, size: int, seed: int) -> np.ndarray:
    """Uniform ``size``-subset of ``range(n)`` by a partial Fisher-Yates shuffle."""
    if not 0 < size <= n:
        raise BadParams(f"subsample size must be in [1, {n}], got {size}")
    rng = np.random.default_rng(seed)
    idx = np.arange(n)
    for i in range(size):
        j = int(rng.integers(i, n))
        idx[i], idx[j] = idx[j], idx[i]
    return np.sort(idx[:size])


def diagrams(dm: DistanceMatrix, dims=(0, 1)) -> dict[int, PersistenceDiagram]:
    diameter(dm)
    out = {}
    if 0 in dims:
        out[0] = rips_h0_diagram(dm)
    if 1 in dims:
        out[1] = rips_h1_diagram(dm)
    return out


def persistence_metric(
    emb,
    dims=(0, 1),
    subsample: int | None = DEFAULT_SUBSAMPLE,
    seed: int = 0,
    kind=MetricKind.EUCLIDEAN,
    use_oracle: bool = False,
) -> MetricReport:
    """Normalized total persistence of H0 and/or H1 for an embedding matrix.

    If ``subsample`` is set and smaller than the number of rows, a seeded
    uniform subset of rows is used. ``use_oracle`` swaps in the brute-force
    reduction (tiny inputs only).
    """
    x = check_embedding(emb)
    dims = tuple(sorted(set(dims)))
    if not dims or not set(dims) <= {0, 1}:
        raise BadParams(f"homology dimensions must be a nonempty subset of {{0, 1}}, got {dims}")
    if subsample is not None and subsample < 1:
        raise BadParams(f"subsample must be positive, got {subsample}")
    n = x.shape[0]
    if subsample is not None and n > subsample:
        x = x[subsample_indices(n, subsample, seed)]
    dm = pairwise_distances(x, kind)
    if use_oracle:
        from .oracle import naive_persistence

        diagrams_by_dim = naive_persistence(dm)
    else:
        diagrams_by_dim = diagrams(dm, dims)
    values = {f"persistence{k}": total_persistence(diagrams_by_dim[k]).value for k in dims}
    return MetricReport(
        values=values,
        subsample_size=subsample,
        seed=seed,
        metric_kind=MetricKind(kind),
        n_points=n,
        n_used=x.shape[0],
        dim=x.shape[1],
    )
