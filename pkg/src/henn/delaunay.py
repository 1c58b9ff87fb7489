"""Incremental Bowyer-Watson Delaunay triangulation in the plane.

Works on distinct points in general position; the caller is responsible
for routing degenerate inputs (collinear sets, duplicates) to a fallback.
Coordinates are handled in float64.
"""

from __future__ import annotations

import numpy as np


def circumcircle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, float]:
    """Circumcenter and squared circumradius of triangle abc.

    Collinear triples get an infinite radius so they test as always-bad.
    """
    ax, ay = a
    bx, by = b
    cx, cy = c
    det = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(det) < 1e-12:
        return np.array([0.0, 0.0]), np.inf
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / det
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / det
    center = np.array([ux, uy])
    r2 = float((ax - ux) ** 2 + (ay - uy) ** 2)
    return center, r2


def delaunay_triangulation(points: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangle index triples of the Delaunay triangulation of 2-d points.

    Insertion order is index order; every point must be distinct.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("expected an (n, 2) array of planar points")
    if n < 3:
        raise ValueError("triangulation needs at least 3 points")

    lo = points.min(axis=0)
    hi = points.max(axis=0)
    center = (lo + hi) / 2.0
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1.0))
    # super-triangle comfortably containing every circumcircle of the input
    sup = np.array(
        [
            [center[0] - 32.0 * span, center[1] - 16.0 * span],
            [center[0] + 32.0 * span, center[1] - 16.0 * span],
            [center[0], center[1] + 32.0 * span],
        ]
    )
    verts = np.vstack([points, sup])
    s0, s1, s2 = n, n + 1, n + 2

    tris: list[tuple[int, int, int]] = [(s0, s1, s2)]
    cc, r2 = circumcircle(verts[s0], verts[s1], verts[s2])
    centers = [cc]
    radii2 = [r2]

    for ip in range(n):
        p = verts[ip]
        carr = np.asarray(centers)
        rarr = np.asarray(radii2)
        d2 = (carr[:, 0] - p[0]) ** 2 + (carr[:, 1] - p[1]) ** 2
        bad = np.nonzero(d2 <= rarr)[0]

        edge_count: dict[tuple[int, int], int] = {}
        for t in bad:
            i, j, k = tris[t]
            for e in ((i, j), (j, k), (k, i)):
                key = (min(e), max(e))
                edge_count[key] = edge_count.get(key, 0) + 1
        boundary = [e for e, cnt in edge_count.items() if cnt == 1]

        for t in sorted(bad, reverse=True):
            tris[t] = tris[-1]
            centers[t] = centers[-1]
            radii2[t] = radii2[-1]
            tris.pop()
            centers.pop()
            radii2.pop()

        for a, b in boundary:
            tris.append((a, b, ip))
            cc, r2 = circumcircle(verts[a], verts[b], verts[ip])
            centers.append(cc)
            radii2.append(r2)

    return [
        (i, j, k) for (i, j, k) in tris if i < n and j < n and k < n
    ]


def triangulation_edges(triangles: list[tuple[int, int, int]]) -> set[tuple[int, int]]:
    """Undirected edge set (min, max) of a triangle list."""
    edges: set[tuple[int, int]] = set()
    for i, j, k in triangles:
        edges.add((min(i, j), max(i, j)))
        edges.add((min(j, k), max(j, k)))
        edges.add((min(k, i), max(k, i)))
    return edges
