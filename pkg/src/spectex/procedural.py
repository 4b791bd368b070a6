"""Procedurally generated meshes used by demos and tests."""

from __future__ import annotations

import numpy as np

from .mesh import Mesh


def equilateral_triangle(side: float = 1.0) -> Mesh:
    v = np.array([[0.0, 0.0, 0.0],
                  [side, 0.0, 0.0],
                  [side / 2.0, side * np.sqrt(3.0) / 2.0, 0.0]])
    return Mesh(v, np.array([[0, 1, 2]]))


def unit_square(z: float = 0.0) -> Mesh:
    """Unit square in the xy-plane split into two triangles."""
    v = np.array([[0, 0, z], [1, 0, z], [1, 1, z], [0, 1, z]], dtype=float)
    f = np.array([[0, 1, 2], [0, 2, 3]])
    return Mesh(v, f)


def unit_cube() -> Mesh:
    """Axis-aligned unit cube, 8 vertices, 12 triangles, total area 6."""
    v = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5),  # x = 0, x = 1
        (0, 4, 5, 1), (2, 3, 7, 6),  # y = 0, y = 1
        (0, 2, 6, 4), (1, 5, 7, 3),  # z = 0, z = 1
    ]
    f = []
    for a, b, c, d in quads:
        f.append((a, b, c))
        f.append((a, c, d))
    return Mesh(v, np.array(f))


def grid_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> Mesh:
    """Regular triangulated grid in the xy-plane with nx*ny vertices."""
    xs = np.linspace(0.0, width, nx)
    ys = np.linspace(0.0, height, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    v = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(nx * ny)])
    f = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            b = (i + 1) * ny + j
            f.append((a, b, b + 1))
            f.append((a, b + 1, a + 1))
    return Mesh(v, np.array(f))


def icosphere(subdivisions: int = 2, radius: float = 1.0) -> Mesh:
    """Icosahedron subdivided ``subdivisions`` times, projected to a sphere.

    Vertex counts: 12, 42, 162, 642, 2562, ... for subdivisions 0, 1, 2, 3, 4.
    """
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    verts = [row for row in v]
    for _ in range(subdivisions):
        midpoint: dict[tuple[int, int], int] = {}

        def midpt(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                verts.append((verts[a] + verts[b]) / 2.0)
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        nf = []
        for a, b, c in f:
            ab, bc, ca = midpt(a, b), midpt(b, c), midpt(c, a)
            nf.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        f = np.array(nf)
    v = np.array(verts)
    v *= radius / np.linalg.norm(v, axis=1, keepdims=True)
    return Mesh(v, f)


def birdhouse(gap: float = 0.05) -> Mesh:
    """A cube with a detached roof quad floating above it: two components.

    Surrogate for meshes whose parts are topologically disconnected; the roof
    shares no vertex with the box.
    """
    box = unit_cube()
    roof_v = np.array([
        [-0.1, -0.1, 1.0 + gap], [1.1, -0.1, 1.0 + gap],
        [1.1, 1.1, 1.0 + gap], [-0.1, 1.1, 1.0 + gap],
    ])
    roof_f = np.array([[0, 1, 2], [0, 2, 3]]) + box.num_vertices
    return Mesh(np.vstack([box.vertices, roof_v]), np.vstack([box.faces, roof_f]))


def two_triangles_apart(distance: float = 10.0) -> Mesh:
    """Two disjoint unit-ish triangles separated along x."""
    a = equilateral_triangle()
    v = np.vstack([a.vertices, a.vertices + np.array([distance, 0.0, 0.0])])
    f = np.vstack([a.faces, a.faces + a.num_vertices])
    return Mesh(v, f)
