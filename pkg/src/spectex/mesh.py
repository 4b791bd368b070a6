"""Triangle mesh container, Wavefront OBJ/MTL ingestion, and basic statistics.

Meshes are immutable after load: triangulated faces, degenerate faces removed,
optional per-corner UV coordinates and an RGB texture (or a flat base color).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)


@dataclass
class Mesh:
    """A triangle mesh with optional appearance data.

    Attributes
    ----------
    vertices : (V, 3) float64
        Vertex positions in model units.
    faces : (F, 3) int64
        Vertex-index triples, 0-based.
    uv_coords : (F, 3, 2) float64 or None
        Per-corner UV coordinates; stored per face corner so seams never
        require vertex duplication.
    texture_image : (H, W, 3) float64 or None
        RGB raster in [0, 1], row 0 = top of the image.
    base_color : (3,) float64 or None
        Flat RGB fallback in [0, 1] when no texture is present.
    dropped_faces : int
        Number of degenerate faces removed at load time.
    """

    vertices: np.ndarray
    faces: np.ndarray
    uv_coords: np.ndarray | None = None
    texture_image: np.ndarray | None = None
    base_color: np.ndarray | None = None
    dropped_faces: int = 0

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be (V, 3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise ValueError("faces must be (F, 3)")
        if self.faces.size and self.faces.max() >= len(self.vertices):
            raise ValueError("face index exceeds vertex count")
        if self.faces.size and self.faces.min() < 0:
            raise ValueError("negative face index")
        if self.uv_coords is not None:
            self.uv_coords = np.ascontiguousarray(self.uv_coords, dtype=np.float64)
            if self.uv_coords.shape != (len(self.faces), 3, 2):
                raise ValueError("uv_coords must be (F, 3, 2), one 2D coordinate per face corner")
        if self.base_color is not None:
            self.base_color = np.asarray(self.base_color, dtype=np.float64)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def face_areas(self) -> np.ndarray:
        """Per-face areas, shape (F,)."""
        v0, v1, v2 = (self.vertices[self.faces[:, i]] for i in range(3))
        return 0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)

    def face_normals(self) -> np.ndarray:
        """Unit face normals, shape (F, 3). Degenerate faces were dropped at load."""
        v0, v1, v2 = (self.vertices[self.faces[:, i]] for i in range(3))
        n = np.cross(v1 - v0, v2 - v0)
        norms = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.maximum(norms, 1e-300)

    def bounding_radius(self) -> float:
        """Max distance from the vertex centroid to any vertex."""
        c = self.vertices.mean(axis=0)
        return float(np.linalg.norm(self.vertices - c, axis=1).max())

    def bounding_diagonal(self) -> float:
        ext = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(ext))


@dataclass(frozen=True)
class MeshStats:
    """Aggregate mesh statistics.

    ``mean_incident_faces`` is Q = 3F/V, the average number of faces incident
    to a vertex (each face contributes one incidence per corner).
    """

    total_area: float
    mean_incident_faces: float
    vertex_count: int
    face_count: int
    connected_component_count: int


def mesh_stats(mesh: Mesh) -> MeshStats:
    """Compute total area, Q = 3F/V, counts, and component count."""
    areas = mesh.face_areas()
    labels = connected_components(mesh)
    return MeshStats(
        total_area=float(areas.sum()),
        mean_incident_faces=3.0 * mesh.num_faces / mesh.num_vertices,
        vertex_count=mesh.num_vertices,
        face_count=mesh.num_faces,
        connected_component_count=int(labels.max()) + 1,
    )


def connected_components(mesh: Mesh) -> np.ndarray:
    """Label vertices by connected component via union-find over face edges.

    Returns an (V,) int array of labels in 0..n_components-1. Vertices not
    referenced by any face each form their own component.
    """
    parent = np.arange(mesh.num_vertices)

    def find(i):
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    for a, b, c in mesh.faces:
        ra, rb, rc = find(a), find(b), find(c)
        parent[rb] = ra
        parent[find(rc)] = ra
    roots = np.array([find(i) for i in range(mesh.num_vertices)])
    _, labels = np.unique(roots, return_inverse=True)
    return labels


def _triangulate(corners: list[int]) -> list[tuple[int, int, int]]:
    """Fan-triangulate a polygon given as a corner index list."""
    return [(corners[0], corners[i], corners[i + 1]) for i in range(1, len(corners) - 1)]


def _parse_obj_index(token: str, count: int) -> int:
    """OBJ indices are 1-based; negative values count back from the end."""
    idx = int(token)
    return idx - 1 if idx > 0 else count + idx


def load_mesh(path: str | Path) -> Mesh:
    """Load a Wavefront OBJ file (with optional MTL diffuse texture).

    Polygonal faces are fan-triangulated. Degenerate faces (repeated vertex
    indices or zero area) are dropped and counted in ``Mesh.dropped_faces``.
    A referenced-but-missing texture file downgrades to no texture with a
    warning; a missing MTL behaves the same.

    Raises
    ------
    InputError
        If the file cannot be read or no valid face survives filtering.
    """
    path = Path(path)
    try:
        text = path.read_text(errors="replace")
    except OSError as exc:
        raise InputError(f"cannot read mesh file {path}: {exc}") from exc

    positions: list[list[float]] = []
    texcoords: list[list[float]] = []
    face_vids: list[tuple[int, int, int]] = []
    face_tids: list[tuple[int, int, int] | None] = []
    mtl_file = None
    material_colors: dict[str, np.ndarray] = {}
    material_textures: dict[str, str] = {}
    active_material = None

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v" and len(parts) >= 4:
            positions.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif tag == "vt" and len(parts) >= 3:
            texcoords.append([float(parts[1]), float(parts[2])])
        elif tag == "f" and len(parts) >= 4:
            vids, tids = [], []
            for token in parts[1:]:
                fields = token.split("/")
                vids.append(_parse_obj_index(fields[0], len(positions)))
                if len(fields) > 1 and fields[1]:
                    tids.append(_parse_obj_index(fields[1], len(texcoords)))
                else:
                    tids.append(None)
            for tri in _triangulate(list(range(len(vids)))):
                face_vids.append(tuple(vids[i] for i in tri))
                corner_t = tuple(tids[i] for i in tri)
                face_tids.append(corner_t if all(t is not None for t in corner_t) else None)
        elif tag == "mtllib" and len(parts) >= 2:
            mtl_file = line.split(None, 1)[1]
        elif tag == "usemtl" and len(parts) >= 2:
            active_material = parts[1]
            # per-face materials are not tracked; first used material wins

    if mtl_file is not None:
        _parse_mtl(path.parent / mtl_file, material_colors, material_textures)

    if not positions:
        raise InputError(f"{path}: no vertices")

    vertices = np.asarray(positions, dtype=np.float64)
    faces = np.asarray(face_vids, dtype=np.int64).reshape(-1, 3)
    if faces.size and (faces.max() >= len(vertices) or faces.min() < 0):
        raise InputError(f"{path}: face index out of range")

    # drop faces with repeated indices or zero area
    dropped = 0
    keep = np.ones(len(faces), dtype=bool)
    for i, (a, b, c) in enumerate(faces):
        if a == b or b == c or a == c:
            keep[i] = False
    if keep.any():
        sub = faces[keep]
        v0, v1, v2 = (vertices[sub[:, i]] for i in range(3))
        areas = 0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)
        keep[np.flatnonzero(keep)[areas <= 0.0]] = False
    dropped = int((~keep).sum())
    faces = faces[keep]
    if len(faces) == 0:
        raise InputError(f"{path}: no faces after degenerate-face filtering")
    if dropped:
        log.warning("%s: dropped %d degenerate face(s)", path.name, dropped)

    uv = None
    kept_tids = [t for t, k in zip(face_tids, keep) if k]
    if texcoords and all(t is not None for t in kept_tids):
        tarr = np.asarray(texcoords, dtype=np.float64)
        uv = tarr[np.asarray(kept_tids, dtype=np.int64)]

    texture = None
    base_color = None
    if active_material is not None:
        tex_path = material_textures.get(active_material)
        if tex_path is not None:
            texture = _load_texture(path.parent / tex_path)
        base_color = material_colors.get(active_material)
    if texture is not None and uv is None:
        log.warning("%s: texture present but no UV coordinates; ignoring texture", path.name)
        texture = None

    return Mesh(vertices, faces, uv_coords=uv, texture_image=texture,
                base_color=base_color, dropped_faces=dropped)


def _parse_mtl(path: Path, colors: dict, textures: dict) -> None:
    try:
        text = path.read_text(errors="replace")
    except OSError:
        log.warning("MTL file %s missing; materials ignored", path)
        return
    current = None
    for raw in text.splitlines():
        parts = raw.strip().split()
        if not parts:
            continue
        if parts[0] == "newmtl" and len(parts) >= 2:
            current = parts[1]
        elif parts[0] == "Kd" and current and len(parts) >= 4:
            colors[current] = np.array([float(parts[1]), float(parts[2]), float(parts[3])])
        elif parts[0] == "map_Kd" and current and len(parts) >= 2:
            textures[current] = parts[-1]


def _load_texture(path: Path) -> np.ndarray | None:
    from PIL import Image

    try:
        with Image.open(path) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except OSError:
        log.warning("texture file %s missing or unreadable; continuing without it", path)
        return None
    return rgb
