"""Marching squares for the zero level set of a sampled field."""
from __future__ import annotations

import numpy as np

# Edges of a cell: 0 bottom (i, j)-(i, j+1), 1 right (i, j+1)-(i+1, j+1),
# 2 top (i+1, j)-(i+1, j+1), 3 left (i, j)-(i+1, j); i indexes y, j indexes x.
_SEGMENTS = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((3, 0),),
    2: ((0, 1),), 13: ((0, 1),),
    3: ((3, 1),), 12: ((3, 1),),
    4: ((1, 2),), 11: ((1, 2),),
    6: ((0, 2),), 9: ((0, 2),),
    7: ((3, 2),), 8: ((3, 2),),
}


def _edge_key(i: int, j: int, e: int) -> tuple:
    # shared edges get the same key from both neighbouring cells
    if e == 0:
        return ("h", i, j)
    if e == 2:
        return ("h", i + 1, j)
    if e == 3:
        return ("v", i, j)
    return ("v", i, j + 1)


def marching_squares(xs: np.ndarray, ys: np.ndarray, V: np.ndarray) -> list[np.ndarray]:
    """Polylines (arrays of (x, y) rows) where V changes sign.

    ``V[i, j]`` is the value at (xs[j], ys[i]).  Corners with V > 0 are
    "inside"; exact zeros count as outside, which keeps a zero row from
    producing spurious segments.  Saddle cells are resolved by the mean of the
    four corners.  Crossings are placed by linear interpolation.
    """
    V = np.asarray(V, dtype=float)
    ny, nx = V.shape
    if ny < 2 or nx < 2:
        return []
    inside = V > 0

    def point(i, j, e):
        if e == 0:
            (i0, j0), (i1, j1) = (i, j), (i, j + 1)
        elif e == 1:
            (i0, j0), (i1, j1) = (i, j + 1), (i + 1, j + 1)
        elif e == 2:
            (i0, j0), (i1, j1) = (i + 1, j), (i + 1, j + 1)
        else:
            (i0, j0), (i1, j1) = (i, j), (i + 1, j)
        v0, v1 = V[i0, j0], V[i1, j1]
        t = 0.5 if v0 == v1 else v0 / (v0 - v1)
        t = min(max(t, 0.0), 1.0)
        return (xs[j0] + t * (xs[j1] - xs[j0]), ys[i0] + t * (ys[i1] - ys[i0]))

    adjacency: dict = {}
    coords: dict = {}
    for i in range(ny - 1):
        for j in range(nx - 1):
            code = (int(inside[i, j]) | int(inside[i, j + 1]) << 1
                    | int(inside[i + 1, j + 1]) << 2 | int(inside[i + 1, j]) << 3)
            if code in (5, 10):
                centre = V[i, j] + V[i, j + 1] + V[i + 1, j] + V[i + 1, j + 1]
                if (centre > 0) == (code == 5):
                    segs = ((3, 2), (0, 1))
                else:
                    segs = ((3, 0), (1, 2))
            else:
                segs = _SEGMENTS[code]
            for e0, e1 in segs:
                k0, k1 = _edge_key(i, j, e0), _edge_key(i, j, e1)
                coords.setdefault(k0, point(i, j, e0))
                coords.setdefault(k1, point(i, j, e1))
                adjacency.setdefault(k0, []).append(k1)
                adjacency.setdefault(k1, []).append(k0)

    lines = []
    seen_edges: set = set()

    def walk(start):
        path = [start]
        prev, cur = None, start
        while True:
            nxt = None
            for cand in adjacency[cur]:
                edge = frozenset((cur, cand))
                if edge not in seen_edges:
                    nxt = cand
                    seen_edges.add(edge)
                    break
            if nxt is None:
                return path
            path.append(nxt)
            prev, cur = cur, nxt
            if cur == start:
                return path

    # open chains start at degree-1 nodes; what remains are closed loops
    for key in sorted(adjacency, key=repr):
        if len(adjacency[key]) == 1 and any(frozenset((key, c)) not in seen_edges for c in adjacency[key]):
            lines.append(walk(key))
    for key in sorted(adjacency, key=repr):
        if any(frozenset((key, c)) not in seen_edges for c in adjacency[key]):
            lines.append(walk(key))
    return [np.array([coords[k] for k in path]) for path in lines if len(path) >= 2]
