"""Tetrahedral reference meshes with tagged boundary faces.

Meshes are immutable after construction.  The on-disk format is a
line-oriented ASCII format::

    tetmesh v1
    # comment
    v x y z
    t i0 i1 i2 i3
    bf i0 i1 i2 TAG

with 0-based indices and TAG one of DIRICHLET / NEUMANN / FREE.
"""

from dataclasses import dataclass, field

import numpy as np

DIRICHLET = "DIRICHLET"
NEUMANN = "NEUMANN"
FREE = "FREE"
TAGS = (DIRICHLET, NEUMANN, FREE)

# Local faces of a tet (i0,i1,i2,i3), outward-oriented for a positive tet.
_TET_FACES = ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))


class MeshError(Exception):
    pass


def tet_volumes(vertices, tets):
    """Signed volumes of tets, shape (ntets,)."""
    v = vertices[tets]
    e = v[:, 1:] - v[:, :1]
    return np.linalg.det(e) / 6.0


@dataclass(frozen=True)
class ReferenceMesh:
    vertices: np.ndarray          # (nv, 3) float
    tets: np.ndarray              # (nt, 4) int, positively oriented
    boundary_faces: np.ndarray    # (nb, 3) int
    boundary_tags: np.ndarray     # (nb,) object/str
    volumes: np.ndarray = field(default=None)        # (nt,)
    face_adjacency: dict = field(default=None)       # sorted face -> [tet ids]

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, float))
        object.__setattr__(self, "tets", np.asarray(self.tets, int))
        object.__setattr__(self, "boundary_faces",
                           np.asarray(self.boundary_faces, int).reshape(-1, 3))
        object.__setattr__(self, "boundary_tags",
                           np.asarray(self.boundary_tags, object).reshape(-1))
        if self.volumes is None:
            object.__setattr__(self, "volumes",
                               tet_volumes(self.vertices, self.tets))
        if self.face_adjacency is None:
            object.__setattr__(self, "face_adjacency",
                               build_face_adjacency(self.tets))
        for arr in (self.vertices, self.tets, self.boundary_faces,
                    self.boundary_tags, self.volumes):
            arr.setflags(write=False)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_tets(self):
        return len(self.tets)

    def total_volume(self):
        return float(np.sum(self.volumes))

    def tet_centroids(self):
        return self.vertices[self.tets].mean(axis=1)

    def boundary_vertex_mask(self):
        mask = np.zeros(self.n_vertices, bool)
        mask[self.boundary_faces.ravel()] = True
        return mask

    def dirichlet_vertex_mask(self):
        mask = np.zeros(self.n_vertices, bool)
        sel = self.boundary_tags == DIRICHLET
        mask[self.boundary_faces[sel].ravel()] = True
        return mask

    def boundary_edge_set(self):
        """Set of sorted vertex-index pairs of edges lying on the boundary."""
        edges = set()
        for f in self.boundary_faces:
            a, b, c = int(f[0]), int(f[1]), int(f[2])
            edges.add((min(a, b), max(a, b)))
            edges.add((min(b, c), max(b, c)))
            edges.add((min(a, c), max(a, c)))
        return edges


def build_face_adjacency(tets):
    """Map each face (sorted vertex triple) to the list of incident tets."""
    adj = {}
    for ti, tet in enumerate(np.asarray(tets, int)):
        for lf in _TET_FACES:
            key = tuple(sorted((int(tet[lf[0]]), int(tet[lf[1]]),
                                int(tet[lf[2]]))))
            adj.setdefault(key, []).append(ti)
    return adj


def combinatorial_boundary_faces(face_adjacency):
    return {f for f, ts in face_adjacency.items() if len(ts) == 1}


def interior_faces(face_adjacency):
    """Interior faces as a list of (sorted face, (tet_a, tet_b))."""
    return [(f, tuple(ts)) for f, ts in face_adjacency.items()
            if len(ts) == 2]


@dataclass
class ValidationReport:
    passed: bool
    failures: list          # (check name, offending entity) pairs
    orientation_fixes: list  # tet ids whose orientation was repaired

    def __bool__(self):
        return self.passed


def validate_mesh(mesh):
    """Check all mesh invariants; never raises, returns a report."""
    failures = []
    nv = mesh.n_vertices
    if mesh.tets.size and (mesh.tets.min() < 0 or mesh.tets.max() >= nv):
        bad = np.where((mesh.tets < 0) | (mesh.tets >= nv))[0]
        failures.append(("index out of range", sorted(set(bad.tolist()))))
    if mesh.boundary_faces.size and (mesh.boundary_faces.min() < 0
                                     or mesh.boundary_faces.max() >= nv):
        failures.append(("boundary face index out of range", None))
    if not failures:
        neg = np.where(mesh.volumes <= 0)[0]
        if neg.size:
            failures.append(("negative volume", neg.tolist()))
        seen = {}
        for ti, tet in enumerate(mesh.tets):
            key = tuple(sorted(tet.tolist()))
            if key in seen:
                failures.append(("duplicate tet", (seen[key], ti)))
            seen[key] = ti
        comb = combinatorial_boundary_faces(mesh.face_adjacency)
        tagged = {tuple(sorted(f.tolist())) for f in mesh.boundary_faces}
        for f in sorted(tagged - comb):
            failures.append(("tag on non-boundary face", f))
        for f in sorted(comb - tagged):
            failures.append(("untagged boundary face", f))
        for tag in set(mesh.boundary_tags.tolist()) - set(TAGS):
            failures.append(("unknown tag", tag))
    return ValidationReport(passed=not failures, failures=failures,
                            orientation_fixes=[])


def orient_tets(vertices, tets):
    """Swap two vertices of every negatively oriented tet.

    Returns (tets, fixed_ids).  Zero-volume tets are left for validation.
    """
    tets = np.array(tets, int)
    vols = tet_volumes(np.asarray(vertices, float), tets)
    fixed = np.where(vols < 0)[0]
    tets[fixed, 0], tets[fixed, 1] = tets[fixed, 1].copy(), tets[fixed, 0].copy()
    return tets, fixed.tolist()


# Kuhn split of the unit cube into 6 tets, conforming across cells.
# Each tet follows one vertex ordering 0 -> e_a -> e_a+e_b -> (1,1,1).
_CUBE_CORNERS = [(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)]
_CORNER_INDEX = {c: n for n, c in enumerate(_CUBE_CORNERS)}


def _kuhn_tets():
    from itertools import permutations
    tets = []
    for perm in permutations(range(3)):
        corner = [0, 0, 0]
        path = [tuple(corner)]
        for axis in perm:
            corner[axis] = 1
            path.append(tuple(corner))
        tets.append([_CORNER_INDEX[c] for c in path])
    return tets


_KUHN_TETS = _kuhn_tets()


def build_box_mesh(nx, ny, nz, extent=(1.0, 1.0, 1.0), tagging=None):
    """Structured tetrahedral mesh of a box [0,ex] x [0,ey] x [0,ez].

    Each grid cell is split into 6 positively oriented tets (Kuhn split).
    `tagging` maps a boundary-face centroid (3-vector) to a tag; default
    tags every boundary face FREE.
    """
    nx, ny, nz = int(nx), int(ny), int(nz)
    if min(nx, ny, nz) < 1:
        raise MeshError("cell counts must be >= 1")
    ex, ey, ez = (float(e) for e in extent)
    if min(ex, ey, ez) <= 0:
        raise MeshError("extents must be positive")

    def vid(i, j, k):
        return (i * (ny + 1) + j) * (nz + 1) + k

    xs = np.linspace(0.0, ex, nx + 1)
    ys = np.linspace(0.0, ey, ny + 1)
    zs = np.linspace(0.0, ez, nz + 1)
    vertices = np.array([[x, y, z] for x in xs for y in ys for z in zs])

    tets = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                corners = [vid(i + di, j + dj, k + dk)
                           for (di, dj, dk) in _CUBE_CORNERS]
                for tet in _KUHN_TETS:
                    tets.append([corners[c] for c in tet])
    tets, _ = orient_tets(vertices, np.array(tets, int))

    adjacency = build_face_adjacency(tets)
    bfaces = sorted(combinatorial_boundary_faces(adjacency))
    bfaces = np.array(bfaces, int)
    centroids = vertices[bfaces].mean(axis=1)
    if tagging is None:
        tags = np.array([FREE] * len(bfaces), object)
    else:
        tags = np.array([tagging(c) for c in centroids], object)
    return ReferenceMesh(vertices=vertices, tets=tets, boundary_faces=bfaces,
                         boundary_tags=tags, face_adjacency=adjacency)


def plane_tagging(rules, default=FREE):
    """Face tagging from axis-aligned plane rules.

    `rules` is a list of dicts {"tag", "axis", "value", "tol"}; a face gets
    the first tag whose plane contains its centroid coordinate.
    """
    def tag(centroid):
        for rule in rules:
            tol = rule.get("tol", 1e-9)
            if abs(centroid[rule["axis"]] - rule["value"]) <= tol:
                return rule["tag"]
        return default
    return tag


def save_mesh(mesh, path):
    from .export import atomic_write_text
    lines = ["tetmesh v1"]
    for v in mesh.vertices:
        lines.append("v %.17g %.17g %.17g" % (v[0], v[1], v[2]))
    for t in mesh.tets:
        lines.append("t %d %d %d %d" % tuple(t))
    for f, tag in zip(mesh.boundary_faces, mesh.boundary_tags):
        lines.append("bf %d %d %d %s" % (f[0], f[1], f[2], tag))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_mesh(path):
    vertices, tets, bfaces, btags = [], [], [], []
    with open(path) as fh:
        first = fh.readline()
        if first.strip() != "tetmesh v1":
            raise MeshError(f"{path}:1: expected header 'tetmesh v1'")
        for ln, raw in enumerate(fh, start=2):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "v" and len(parts) == 4:
                    vertices.append([float(p) for p in parts[1:]])
                elif parts[0] == "t" and len(parts) == 5:
                    tets.append([int(p) for p in parts[1:]])
                elif parts[0] == "bf" and len(parts) == 5:
                    bfaces.append([int(p) for p in parts[1:4]])
                    btags.append(parts[4])
                else:
                    raise ValueError("unrecognized record")
            except ValueError as exc:
                raise MeshError(f"{path}:{ln}: parse error: {exc}") from exc
    vertices = np.array(vertices, float).reshape(-1, 3)
    tets = np.array(tets, int).reshape(-1, 4)
    indices = [tets.ravel(), np.array(bfaces, int).ravel()]
    for idx in indices:
        if idx.size and (idx.min() < 0 or idx.max() >= len(vertices)):
            raise MeshError(f"{path}: validation error: index out of range")
    tets, fixed = orient_tets(vertices, tets)
    mesh = ReferenceMesh(vertices=vertices, tets=tets,
                         boundary_faces=np.array(bfaces, int).reshape(-1, 3),
                         boundary_tags=np.array(btags, object))
    report = validate_mesh(mesh)
    report.orientation_fixes = fixed
    if not report.passed:
        raise MeshError(f"{path}: invalid mesh: {report.failures}")
    return mesh
