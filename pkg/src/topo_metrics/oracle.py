"""Brute-force reference implementations for testing the optimized paths.

Nothing here is tuned for speed. ``naive_persistence`` builds the complete
boundary matrix of the Vietoris-Rips complex (vertices, edges, triangles) and
runs the textbook left-to-right column reduction over GF(2); ``kruskal_mst``
is a deliberately plain Kruskal using component relabelling instead of a
union-find forest.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import DistanceMatrix, PersistenceDiagram, diameter
from .errors import BadParams, DegenerateCloud, TooLarge

MAX_ORACLE_POINTS = 14


@dataclass
class FullBoundaryMatrix:
    """Boundary matrix over GF(2) with one column per simplex in filtration order.

    ``columns[j]`` holds the sorted order-indices of the facets of simplex ``j``.
    """

    simplices: list[tuple[int, ...]]
    values: list[float]
    columns: list[list[int]]

    @classmethod
    def from_distances(cls, dm: DistanceMatrix, max_dim: int = 2) -> "FullBoundaryMatrix":
        d = dm.values
        n = dm.n
        simplices = []
        for k in range(1, max_dim + 2):
            for verts in combinations(range(n), k):
                value = max((d[a, b] for a, b in combinations(verts, 2)), default=0.0)
                simplices.append((float(value), k - 1, verts))
        simplices.sort()
        index = {s[2]: i for i, s in enumerate(simplices)}
        columns = []
        for _, dim, verts in simplices:
            if dim == 0:
                columns.append([])
            else:
                facets = [index[verts[:i] + verts[i + 1:]] for i in range(len(verts))]
                columns.append(sorted(facets))
        return cls([s[2] for s in simplices], [s[0] for s in simplices], columns)


def _reduce(columns: list[list[int]]) -> list[int | None]:
    """Standard reduction; returns the lowest index of every reduced column."""
    cols = [set(c) for c in columns]
    lows: list[int | None] = [None] * len(cols)
    owner: dict[int, int] = {}
    for j, col in enumerate(cols):
        while col:
            low = max(col)
            if low not in owner:
                owner[low] = j
                lows[j] = low
                break
            col ^= cols[owner[low]]
    return lows


def naive_persistence(dm: DistanceMatrix, max_dim: int = 2) -> dict[int, PersistenceDiagram]:
    """H0 and H1 diagrams by brute-force reduction of the full boundary matrix.

    ``max_dim`` is the largest simplex dimension included. With ``max_dim=2``
    every loop is eventually filled, so H1 has no essential classes.
    """
    if dm.n > MAX_ORACLE_POINTS:
        raise TooLarge(f"oracle limited to {MAX_ORACLE_POINTS} points, got {dm.n}")
    if dm.n < 2:
        raise DegenerateCloud("need at least 2 points")
    if not 1 <= max_dim <= 2:
        raise BadParams("max_dim must be 1 or 2")
    diam = diameter(dm)
    bm = FullBoundaryMatrix.from_distances(dm, max_dim)
    lows = _reduce(bm.columns)
    dims = [len(s) - 1 for s in bm.simplices]

    pairs: dict[int, list[tuple[float, float]]] = {0: [], 1: []}
    paired = set()
    for j, low in enumerate(lows):
        if low is not None:
            paired.update((low, j))
            if dims[low] <= 1:
                pairs[dims[low]].append((bm.values[low], bm.values[j]))
    essential = {0: 0, 1: 0}
    for j, low in enumerate(lows):
        # positive simplex never hit by a later pivot
        if low is None and j not in paired and dims[j] in essential:
            essential[dims[j]] += 1
    return {
        k: PersistenceDiagram(k, np.array(pairs[k], dtype=float).reshape(-1, 2), diam, essential[k])
        for k in (0, 1)
    }


def kruskal_mst(dm: DistanceMatrix) -> tuple[float, list[float]]:
    """Total weight and accepted edge weights of a minimum spanning tree."""
    n = dm.n
    if n < 2:
        raise DegenerateCloud("need at least 2 points")
    d = dm.values
    edges = sorted((d[i, j], i, j) for i in range(n) for j in range(i + 1, n))
    label = list(range(n))
    accepted = []
    for w, i, j in edges:
        a, b = label[i], label[j]
        if a != b:
            label = [a if lab == b else lab for lab in label]
            accepted.append(float(w))
            if len(accepted) == n - 1:
                break
    return float(sum(accepted)), accepted
