"""Oriented interface varifolds extracted from labeled tet meshes.

The interface between the two phases is the set of deformed interior faces
whose incident tets carry different labels, oriented from phase 0 into
phase 1.  Discrete curvature per vertex combines the cotangent
mean-curvature vector with angle-defect Gaussian curvature; the
full-curvature magnitude is recovered through a_norm^2 = 2 * |II|^2 with
|II|^2 estimated as 4|H|^2 - 2K.
"""

from dataclasses import dataclass, field

import numpy as np

from .energy import interface_density
from .mesh import interior_faces
from .quadrature import map_to_simplex, tet_rule, triangle_rule


class InterfaceError(Exception):
    pass


@dataclass(frozen=True)
class PhaseLabeling:
    labels: np.ndarray  # (nt,) values in {0, 1}

    def __post_init__(self):
        labels = np.asarray(self.labels, np.int8)
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def phase1_volume(self, mesh):
        return float(np.sum(mesh.volumes[self.labels == 1]))

    def with_swap(self, tet_to_0, tet_to_1):
        labels = np.array(self.labels)
        labels[tet_to_0] = 0
        labels[tet_to_1] = 1
        return PhaseLabeling(labels)


@dataclass(frozen=True)
class InterfaceVarifold:
    """Oriented triangle mesh with multiplicities (theta+, theta-) = (1, 0)."""

    vertices: np.ndarray              # (nv, 3) deformed positions
    faces: np.ndarray                 # (nf, 3) into vertices, oriented
    areas: np.ndarray                 # (nf,)
    normals: np.ndarray               # (nf, 3), phase-0 side -> phase-1 side
    domain_boundary_edges: frozenset = frozenset()  # edges on the domain boundary
    mesh_vertex_ids: np.ndarray = None  # source mesh vertex per varifold vertex
    face_tet_pairs: np.ndarray = None   # (nf, 2): (phase-0 tet, phase-1 tet)
    # curvature samples (filled by discrete_curvature)
    mean_curvature: np.ndarray = None   # (nv, 3) vector H
    gauss_curvature: np.ndarray = None  # (nv,)
    a_norm: np.ndarray = None           # (nv,)
    mixed_area: np.ndarray = None       # (nv,)
    interior_vertex: np.ndarray = None  # (nv,) bool
    clip_count: int = 0

    @property
    def n_triangles(self):
        return len(self.faces)

    def edge_incidence(self):
        """Map sorted vertex pair -> number of incident interface triangles."""
        inc = {}
        for f in self.faces:
            a, b, c = (int(v) for v in f)
            for e in ((a, b), (b, c), (a, c)):
                key = (min(e), max(e))
                inc[key] = inc.get(key, 0) + 1
        return inc


def _empty_varifold():
    return InterfaceVarifold(vertices=np.zeros((0, 3)),
                             faces=np.zeros((0, 3), int),
                             areas=np.zeros(0), normals=np.zeros((0, 3)))


def varifold_from_triangles(vertices, faces):
    """Varifold from an oriented triangle soup (analytic test surfaces).

    Face winding defines the normal (right-hand rule, pointing into the
    phase-1 side).
    """
    vertices = np.asarray(vertices, float)
    faces = np.asarray(faces, int)
    v = vertices[faces]
    cross = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    if np.any(areas <= 0):
        raise InterfaceError("degenerate interface triangle")
    normals = cross / (2.0 * areas[:, None])
    V = InterfaceVarifold(vertices=vertices, faces=faces, areas=areas,
                          normals=normals)
    return discrete_curvature_inplace(V)


def extract_interface(mesh, state, phases, positions=None):
    """Interface varifold of a labeled, deformed mesh.

    `positions` overrides the deformed coordinates (pass mesh.vertices for
    the referential interface).  Raises on non-manifold interface edges
    interior to the domain.
    """
    if positions is None:
        positions = state.positions
    positions = np.asarray(positions, float)
    labels = phases.labels
    tris = []
    pairs = []
    for face, (ta, tb) in interior_faces(mesh.face_adjacency):
        la, lb = int(labels[ta]), int(labels[tb])
        if la == lb:
            continue
        t0, t1 = (ta, tb) if la == 0 else (tb, ta)
        tris.append(face)
        pairs.append((t0, t1))
    if not tris:
        return _empty_varifold()
    tris = np.array(tris, int)
    pairs = np.array(pairs, int)

    used = np.unique(tris)
    remap = np.full(mesh.n_vertices, -1, int)
    remap[used] = np.arange(len(used))
    faces = remap[tris]
    vertices = positions[used]

    centroids = positions[mesh.tets].mean(axis=1)
    v = vertices[faces]
    cross = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    if np.any(areas <= 0):
        raise InterfaceError("degenerate interface triangle")
    normals = cross / (2.0 * areas[:, None])
    toward1 = centroids[pairs[:, 1]] - centroids[pairs[:, 0]]
    flip = np.sum(normals * toward1, axis=1) < 0
    faces[flip, 1], faces[flip, 2] = faces[flip, 2].copy(), faces[flip, 1].copy()
    normals[flip] *= -1.0

    boundary_edges = mesh.boundary_edge_set()
    dbe = set()
    inc = {}
    for src in tris:
        for a, b in ((0, 1), (1, 2), (0, 2)):
            mkey = (min(int(src[a]), int(src[b])),
                    max(int(src[a]), int(src[b])))
            key = (min(int(remap[mkey[0]]), int(remap[mkey[1]])),
                   max(int(remap[mkey[0]]), int(remap[mkey[1]])))
            inc[key] = inc.get(key, 0) + 1
            if mkey in boundary_edges:
                dbe.add(key)
    bad = [e for e, n in inc.items() if n > 2]
    if bad:
        raise InterfaceError(f"non-manifold interface edges: {bad[:5]}"
                             f" ({len(bad)} total)")

    V = InterfaceVarifold(vertices=vertices, faces=faces, areas=areas,
                          normals=normals, domain_boundary_edges=frozenset(dbe),
                          mesh_vertex_ids=used, face_tet_pairs=pairs)
    return discrete_curvature_inplace(V)


def varifold_mass(V):
    """Total interface area (multiplicity one)."""
    return float(np.sum(V.areas))


def _triangle_angles(v):
    """Corner angles of triangles given vertex stack (nf, 3, 3)."""
    angles = np.empty((len(v), 3))
    for c in range(3):
        e1 = v[:, (c + 1) % 3] - v[:, c]
        e2 = v[:, (c + 2) % 3] - v[:, c]
        cosv = np.sum(e1 * e2, axis=1)
        sinv = np.linalg.norm(np.cross(e1, e2), axis=1)
        angles[:, c] = np.arctan2(sinv, cosv)
    return angles


def _mixed_areas(V, angles):
    """Meyer mixed (Voronoi-safe) vertex areas; they partition the area."""
    nv = len(V.vertices)
    mixed = np.zeros(nv)
    v = V.vertices[V.faces]
    obtuse = angles > 0.5 * np.pi
    any_obtuse = obtuse.any(axis=1)
    cot = 1.0 / np.tan(angles)
    for c in range(3):
        j, k = (c + 1) % 3, (c + 2) % 3
        lj2 = np.sum((v[:, k] - v[:, c]) ** 2, axis=1)  # edge opposite j
        lk2 = np.sum((v[:, j] - v[:, c]) ** 2, axis=1)  # edge opposite k
        voronoi = (lj2 * cot[:, j] + lk2 * cot[:, k]) / 8.0
        share = np.where(any_obtuse,
                         np.where(obtuse[:, c], V.areas / 2.0, V.areas / 4.0),
                         voronoi)
        np.add.at(mixed, V.faces[:, c], share)
    return mixed


def discrete_curvature_inplace(V):
    """Attach per-vertex (H, K, a_norm, mixed area) samples to a varifold.

    Interface-boundary vertices (incident to a single-triangle edge) carry
    a_norm = 0 and are excluded from curvature quadrature; their area
    weight still counts toward the mass.
    """
    nv = len(V.vertices)
    if V.n_triangles == 0:
        return InterfaceVarifold(
            vertices=V.vertices, faces=V.faces, areas=V.areas,
            normals=V.normals, domain_boundary_edges=V.domain_boundary_edges,
            mesh_vertex_ids=V.mesh_vertex_ids, face_tet_pairs=V.face_tet_pairs,
            mean_curvature=np.zeros((nv, 3)), gauss_curvature=np.zeros(nv),
            a_norm=np.zeros(nv), mixed_area=np.zeros(nv),
            interior_vertex=np.zeros(nv, bool), clip_count=0)
    v = V.vertices[V.faces]
    angles = _triangle_angles(v)
    mixed = _mixed_areas(V, angles)
    if np.any(mixed <= 0):
        raise InterfaceError("zero mixed area (degenerate triangle fan)")

    cot = 1.0 / np.tan(angles)
    lap = np.zeros((nv, 3))
    for c in range(3):
        a, b = (c + 1) % 3, (c + 2) % 3   # edge (a, b) opposite corner c
        w = cot[:, c][:, None]
        np.add.at(lap, V.faces[:, a], w * (v[:, a] - v[:, b]))
        np.add.at(lap, V.faces[:, b], w * (v[:, b] - v[:, a]))
    H = lap / (4.0 * mixed[:, None])

    angle_sum = np.zeros(nv)
    for c in range(3):
        np.add.at(angle_sum, V.faces[:, c], angles[:, c])
    K = (2.0 * np.pi - angle_sum) / mixed

    interior = np.ones(nv, bool)
    for (a, b), n in V.edge_incidence().items():
        if n == 1:
            interior[a] = False
            interior[b] = False

    h2 = np.sum(H * H, axis=1)
    ii2 = 4.0 * h2 - 2.0 * K
    clip_count = int(np.count_nonzero(interior & (ii2 < 0)))
    a_norm = np.sqrt(2.0 * np.maximum(ii2, 0.0))
    a_norm[~interior] = 0.0
    H = H.copy()
    H[~interior] = 0.0
    K = K.copy()
    K[~interior] = 0.0
    return InterfaceVarifold(
        vertices=V.vertices, faces=V.faces, areas=V.areas, normals=V.normals,
        domain_boundary_edges=V.domain_boundary_edges,
        mesh_vertex_ids=V.mesh_vertex_ids, face_tet_pairs=V.face_tet_pairs,
        mean_curvature=H, gauss_curvature=K, a_norm=a_norm, mixed_area=mixed,
        interior_vertex=interior, clip_count=clip_count)


def discrete_curvature(V):
    """Per-vertex (H, K, a_norm) of a varifold (computed if missing)."""
    if V.a_norm is None:
        V = discrete_curvature_inplace(V)
    return V.mean_curvature, V.gauss_curvature, V.a_norm


def curvature_integral(V, power=2.0):
    """Integral of a_norm^power against the mass measure."""
    if V.a_norm is None:
        V = discrete_curvature_inplace(V)
    return float(np.sum(V.mixed_area * V.a_norm**power))


def interface_energy(V, model):
    """Integral of Psi(a_norm) against the mass measure.

    Equals c_int * (mass + integral of a_norm^p) for the model density.
    """
    if V.n_triangles == 0:
        return 0.0
    if V.a_norm is None:
        V = discrete_curvature_inplace(V)
    return float(np.sum(V.mixed_area * interface_density(V.a_norm, model)))


def boundary_defect(V, domain_boundary_edges=None):
    """Count of single-incidence interface edges off the domain boundary.

    Zero is required for admissibility (the interface current has no
    boundary inside the deformed domain).
    """
    if domain_boundary_edges is None:
        domain_boundary_edges = V.domain_boundary_edges
    return sum(1 for e, n in V.edge_incidence().items()
               if n == 1 and e not in domain_boundary_edges)


@dataclass(frozen=True)
class TestField:
    """Compactly supported C^1 vector field with analytic divergence."""

    center: np.ndarray
    radius: float
    matrix: np.ndarray   # Y(x) = bump(x) * (matrix (x - center) + offset)
    offset: np.ndarray
    power: int = 4

    def _bump(self, x):
        u = np.sum((x - self.center) ** 2, axis=-1) / self.radius**2
        w = np.maximum(1.0 - u, 0.0)
        return w**self.power, u, w

    def __call__(self, x):
        x = np.asarray(x, float)
        w, _, _ = self._bump(x)
        lin = (x - self.center) @ self.matrix.T + self.offset
        return w[..., None] * lin

    def divergence(self, x):
        x = np.asarray(x, float)
        w, _, core = self._bump(x)
        d = x - self.center
        lin = d @ self.matrix.T + self.offset
        grad_w = (-2.0 * self.power / self.radius**2
                  * core ** (self.power - 1))[..., None] * d
        return np.sum(grad_w * lin, axis=-1) + w * np.trace(self.matrix)

    def sup_norm(self):
        # |Y| <= max over support of bump * |lin|; bound by |offset| + |A| R
        return float(np.linalg.norm(self.offset)
                     + np.linalg.norm(self.matrix, 2) * self.radius)


def random_bump_fields(n, center, radius, seed=0):
    """Random polynomial-bump test fields supported in a ball."""
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(n):
        fields.append(TestField(center=np.asarray(center, float),
                                radius=float(radius),
                                matrix=rng.uniform(-1, 1, (3, 3)),
                                offset=rng.uniform(-1, 1, 3)))
    return fields


def coupling_residual(mesh, state, phases, V, test_fields, quad_order=2,
                      positions=None):
    """Max defect of <D phi, Y> = <V, QY> over the given test fields.

    The distributional side is evaluated as -integral of div Y over the
    phase-1 region (quadrature over deformed tets); the varifold side as
    the surface quadrature of Y . nu over the interface triangles.  Test
    fields must vanish near the deformed domain boundary.
    """
    if positions is None:
        positions = state.positions
    positions = np.asarray(positions, float)
    bpts = positions[mesh.boundary_faces].mean(axis=1)
    for Y in test_fields:
        if bpts.size and np.max(np.abs(Y(bpts))) > 1e-12:
            raise InterfaceError("test field support touches the boundary")
    tq, tw = tet_rule(quad_order)
    sq, sw = triangle_rule(quad_order)
    sel = np.asarray(phases.labels) == 1
    tets = mesh.tets[sel]
    corners = positions[tets]                    # (nt1, 4, 3)
    vols = np.abs(np.linalg.det(
        np.transpose(corners[:, 1:] - corners[:, :1], (0, 2, 1)))) / 6.0
    tet_pts = map_to_simplex(corners, tq)        # (nt1, nq, 3)
    tri_pts = map_to_simplex(V.vertices[V.faces], sq)

    worst = 0.0
    for Y in test_fields:
        div = Y.divergence(tet_pts)              # (nt1, nq)
        lhs = -float(np.sum(vols * (div @ tw)))
        vals = Y(tri_pts)                        # (nf, nq, 3)
        flux = np.sum(vals * V.normals[:, None, :], axis=-1) @ sw
        rhs = float(np.sum(V.areas * flux))
        worst = max(worst, abs(lhs - rhs))
    return worst
