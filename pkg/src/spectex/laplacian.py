"""Weak Laplacians: mollified cotangent (mesh), Gaussian k-NN (points), and
their convex mixture.

All builders return a positive semi-definite stiffness matrix L (scipy CSR,
constants in the kernel: zero row sums) and a diagonal mass as a plain (n,)
array. The mixture blends stiffness matrices only; the mesh mass matrix is
the authoritative area measure.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .errors import InputError
from .mesh import Mesh

MOLLIFY_EPS = 1e-6
OPERATOR_MAGIC = b"UV3L"
_TRIPLE_DTYPE = np.dtype([("row", "<u4"), ("col", "<u4"), ("val", "<f8")])


def mesh_laplacian(mesh: Mesh) -> tuple[sp.csr_matrix, np.ndarray]:
    """Weak cotangent Laplacian with intrinsic mollification + lumped mass.

    Each face's three edge lengths l are replaced by l + delta, where delta is
    the smallest value making every triangle inequality hold with slack
    MOLLIFY_EPS * mean(l); cotangents are then computed from the mollified
    lengths, which keeps needle and zero-area-adjacent triangles finite.
    Mass is one third of the (true, unmollified) incident face area.
    """
    if mesh.num_faces == 0:
        raise InputError("mesh has no faces")
    V, F = mesh.vertices, mesh.faces
    n = mesh.num_vertices

    # edge lengths; column i is the edge opposite corner i
    l0 = np.linalg.norm(V[F[:, 1]] - V[F[:, 2]], axis=1)
    l1 = np.linalg.norm(V[F[:, 2]] - V[F[:, 0]], axis=1)
    l2 = np.linalg.norm(V[F[:, 0]] - V[F[:, 1]], axis=1)
    L = np.column_stack([l0, l1, l2])

    slack = MOLLIFY_EPS * L.mean(axis=1)
    delta = np.zeros(len(F))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        delta = np.maximum(delta, L[:, i] - L[:, j] - L[:, k] + slack)
    L = L + np.maximum(delta, 0.0)[:, None]

    # Heron area and cotangents from mollified lengths
    s = 0.5 * L.sum(axis=1)
    area_moll = np.sqrt(np.maximum(
        s * (s - L[:, 0]) * (s - L[:, 1]) * (s - L[:, 2]), 1e-300))
    cots = np.empty_like(L)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        cots[:, i] = (L[:, j] ** 2 + L[:, k] ** 2 - L[:, i] ** 2) / (4.0 * area_moll)

    rows, cols, vals = [], [], []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        w = 0.5 * cots[:, i]
        rows.extend([F[:, j], F[:, k], F[:, j], F[:, k]])
        cols.extend([F[:, k], F[:, j], F[:, j], F[:, k]])
        vals.extend([-w, -w, w, w])
    stiff = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()

    areas = mesh.face_areas()
    mass = np.zeros(n)
    np.add.at(mass, F.ravel(), np.repeat(areas / 3.0, 3))
    return stiff, mass


def pointcloud_laplacian(points: np.ndarray, k: int = 30,
                         total_area: float = 1.0) -> tuple[sp.csr_matrix, np.ndarray]:
    """Gaussian-weighted symmetric k-NN graph Laplacian on a point set.

    Edge weights are exp(-d^2 / sigma^2) with sigma the mean distance to the
    k-th neighbor; every pair of points communicates through the graph even
    across disconnected mesh components. Mass is uniform: total_area / n.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n < k + 1:
        raise InputError(f"point-cloud Laplacian needs at least k+1={k + 1} points, got {n}")
    tree = cKDTree(points)
    dists, idx = tree.query(points, k=k + 1)
    dists, idx = dists[:, 1:], idx[:, 1:]  # drop self
    dists = np.maximum(dists, 1e-12)
    sigma = dists[:, -1].mean()
    w = np.exp(-(dists ** 2) / sigma ** 2)

    rows = np.repeat(np.arange(n), k)
    W = sp.coo_matrix((w.ravel(), (rows, idx.ravel())), shape=(n, n)).tocsr()
    W = W.maximum(W.T)  # symmetrize the directed k-NN graph
    deg = np.asarray(W.sum(axis=1)).ravel()
    L = (sp.diags(deg) - W).tocsr()
    mass = np.full(n, total_area / n)
    return L, mass


def mixed_laplacian(L_m: sp.spmatrix, L_p: sp.spmatrix, rho: float) -> sp.csr_matrix:
    """Convex combination (1 - rho) * L_m + rho * L_p of two stiffness matrices."""
    if L_m.shape != L_p.shape:
        raise ValueError(f"dimension mismatch: {L_m.shape} vs {L_p.shape}")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    return ((1.0 - rho) * L_m + rho * L_p).tocsr()


def check_symmetric(L: sp.spmatrix, tol: float = 1e-12) -> bool:
    diff = (L - L.T).tocoo()
    return len(diff.data) == 0 or np.abs(diff.data).max() <= tol


def save_operator(path: str | Path, L: sp.spmatrix) -> None:
    """Write a symmetric sparse operator: magic "UV3L", u32 dimension,
    u64 triple count, then (u32 row, u32 col, f64 value) records, LE."""
    coo = sp.coo_matrix(L)
    order = np.lexsort((coo.col, coo.row))
    rec = np.empty(len(coo.data), dtype=_TRIPLE_DTYPE)
    rec["row"] = coo.row[order]
    rec["col"] = coo.col[order]
    rec["val"] = coo.data[order]
    with open(path, "wb") as fh:
        fh.write(OPERATOR_MAGIC)
        fh.write(struct.pack("<IQ", L.shape[0], len(rec)))
        fh.write(rec.tobytes())


def load_operator(path: str | Path) -> sp.csr_matrix:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != OPERATOR_MAGIC:
            raise InputError(f"{path}: bad magic {magic!r}, expected {OPERATOR_MAGIC!r}")
        n, count = struct.unpack("<IQ", fh.read(12))
        rec = np.frombuffer(fh.read(count * _TRIPLE_DTYPE.itemsize), dtype=_TRIPLE_DTYPE)
        if len(rec) != count:
            raise InputError(f"{path}: truncated operator file")
    return sp.coo_matrix(
        (rec["val"], (rec["row"].astype(np.int64), rec["col"].astype(np.int64))),
        shape=(n, n)).tocsr()
