"""Deformation states, per-tet gradients/minors, distortion, injectivity.

The deformation is piecewise affine over the tets: F = Dx (DX)^-1 with
edge matrices of the deformed and reference tet.  Almost-everywhere
injectivity is monitored through the Ciarlet-Necas gap between the
Jacobian integral and a Monte Carlo estimate of the image volume.
"""

from dataclasses import dataclass, replace

import numpy as np

SQRT27 = 3.0 * np.sqrt(3.0)  # distortion lower bound, attained at rotations


class KinematicsError(Exception):
    pass


@dataclass(frozen=True)
class DeformationState:
    positions: np.ndarray      # (nv, 3) deformed coordinates
    dirichlet_mask: np.ndarray  # (nv,) bool

    def __post_init__(self):
        object.__setattr__(self, "positions",
                           np.asarray(self.positions, float))
        object.__setattr__(self, "dirichlet_mask",
                           np.asarray(self.dirichlet_mask, bool))

    def with_positions(self, positions):
        return replace(self, positions=np.asarray(positions, float))


def identity_state(mesh):
    """Identity deformation; Dirichlet vertices pinned to the reference."""
    return DeformationState(positions=mesh.vertices.copy(),
                            dirichlet_mask=mesh.dirichlet_vertex_mask())


def reference_edge_inverses(mesh):
    """Per-tet inverse of the reference edge matrix, shape (nt, 3, 3).

    Columns of the edge matrix are X_i - X_0.
    """
    v = mesh.vertices[mesh.tets]
    DX = np.transpose(v[:, 1:] - v[:, :1], (0, 2, 1))
    det = np.linalg.det(DX)
    if np.any(np.abs(det) < 1e-300):
        raise KinematicsError("degenerate reference tet")
    return np.linalg.inv(DX)


def deformation_gradients(mesh, positions, ref_inv=None):
    """All per-tet deformation gradients, shape (nt, 3, 3)."""
    if ref_inv is None:
        ref_inv = reference_edge_inverses(mesh)
    x = np.asarray(positions, float)[mesh.tets]
    Dx = np.transpose(x[:, 1:] - x[:, :1], (0, 2, 1))
    return Dx @ ref_inv


def deformation_gradient(mesh, state, tet):
    """Deformation gradient of a single tet."""
    v = mesh.vertices[mesh.tets[tet]]
    x = state.positions[mesh.tets[tet]]
    DX = (v[1:] - v[:1]).T
    if abs(np.linalg.det(DX)) < 1e-300:
        raise KinematicsError(f"degenerate reference tet {tet}")
    return (x[1:] - x[:1]).T @ np.linalg.inv(DX)


def minors(F):
    """(F, Cof F, det F); batched over leading axes.

    det by direct expansion, Cof by the nine signed 2x2 minors, so
    Cof F . F^T = det(F) I holds identically.
    """
    F = np.asarray(F, float)
    det = (F[..., 0, 0] * (F[..., 1, 1] * F[..., 2, 2] - F[..., 1, 2] * F[..., 2, 1])
           - F[..., 0, 1] * (F[..., 1, 0] * F[..., 2, 2] - F[..., 1, 2] * F[..., 2, 0])
           + F[..., 0, 2] * (F[..., 1, 0] * F[..., 2, 1] - F[..., 1, 1] * F[..., 2, 0]))
    cof = np.empty_like(F)
    idx = [0, 1, 2]
    for i in range(3):
        for j in range(3):
            ri = [a for a in idx if a != i]
            ci = [a for a in idx if a != j]
            m = (F[..., ri[0], ci[0]] * F[..., ri[1], ci[1]]
                 - F[..., ri[0], ci[1]] * F[..., ri[1], ci[0]])
            cof[..., i, j] = ((-1.0) ** (i + j)) * m
    return F, cof, det


def distortion(F):
    """|F|^3 / det F (Frobenius norm); >= 3*sqrt(3), batched."""
    F, _, det = minors(F)
    if np.any(det <= 0):
        raise KinematicsError("distortion requires det F > 0")
    norm = np.sqrt(np.sum(F * F, axis=(-2, -1)))
    return norm**3 / det


class _TetGrid:
    """Uniform spatial hash over deformed tets for point-in-tet queries."""

    def __init__(self, positions, tets, resolution=None):
        self.corners = np.asarray(positions, float)[tets]  # (nt, 4, 3)
        self.lo = self.corners.min(axis=(0, 1))
        self.hi = self.corners.max(axis=(0, 1))
        n = len(tets)
        if resolution is None:
            resolution = max(1, int(round(n ** (1.0 / 3.0))))
        self.res = resolution
        span = np.maximum(self.hi - self.lo, 1e-300)
        self.inv_h = self.res / span
        # inverse affine maps x -> barycentric-ish local coords
        e = np.transpose(self.corners[:, 1:] - self.corners[:, :1], (0, 2, 1))
        self.inv_e = np.linalg.inv(e)
        self.base = self.corners[:, 0]
        self.cells = {}
        tlo = np.clip(((self.corners.min(axis=1) - self.lo) * self.inv_h)
                      .astype(int), 0, self.res - 1)
        thi = np.clip(((self.corners.max(axis=1) - self.lo) * self.inv_h)
                      .astype(int), 0, self.res - 1)
        for ti in range(n):
            for i in range(tlo[ti, 0], thi[ti, 0] + 1):
                for j in range(tlo[ti, 1], thi[ti, 1] + 1):
                    for k in range(tlo[ti, 2], thi[ti, 2] + 1):
                        self.cells.setdefault((i, j, k), []).append(ti)

    def box_volume(self):
        return float(np.prod(self.hi - self.lo))

    def contains(self, points, tol=1e-12):
        """Boolean mask: is each point inside at least one tet."""
        points = np.asarray(points, float)
        cell_ids = np.clip(((points - self.lo) * self.inv_h).astype(int),
                           0, self.res - 1)
        flat = (cell_ids[:, 0] * self.res + cell_ids[:, 1]) * self.res \
            + cell_ids[:, 2]
        hit = np.zeros(len(points), bool)
        order = np.argsort(flat, kind="stable")
        bounds = np.searchsorted(flat[order], np.unique(flat))
        groups = np.split(order, bounds[1:])
        for grp in groups:
            if not len(grp):
                continue
            cid = tuple(cell_ids[grp[0]])
            tets = self.cells.get(cid)
            if not tets:
                continue
            tets = np.asarray(tets, int)
            d = points[grp][:, None, :] - self.base[tets][None, :, :]
            lam = np.einsum("tij,ptj->pti", self.inv_e[tets], d)
            inside = ((lam >= -tol).all(axis=-1)
                      & (lam.sum(axis=-1) <= 1.0 + tol))
            hit[grp] = inside.any(axis=1)
        return hit


def jacobian_integral(mesh, positions, ref_inv=None):
    """Integral of det grad y over the reference domain (exact)."""
    F = deformation_gradients(mesh, positions, ref_inv)
    _, _, det = minors(F)
    if np.any(det <= 0):
        raise KinematicsError("det F <= 0 in some tet")
    return float(np.sum(mesh.volumes * det))


@dataclass(frozen=True)
class CiarletNecasResult:
    jacobian_integral: float
    image_volume_estimate: float
    residual: float
    mc_std: float
    samples: int


def ciarlet_necas_residual(mesh, state, samples=100_000, seed=0):
    """Monte Carlo gap between the Jacobian integral and the image volume.

    Residual near zero indicates a.e. injectivity; a residual well above
    the Monte Carlo noise indicates sheet overlap.
    """
    if samples <= 0:
        raise ValueError("need at least one sample")
    jac = jacobian_integral(mesh, state.positions)
    grid = _TetGrid(state.positions, mesh.tets)
    rng = np.random.default_rng(seed)
    box = grid.box_volume()
    points = rng.uniform(grid.lo, grid.hi, size=(int(samples), 3))
    hits = int(np.count_nonzero(grid.contains(points)))
    p = hits / samples
    image = box * p
    std = box * float(np.sqrt(max(p * (1.0 - p), 0.0) / samples))
    return CiarletNecasResult(jacobian_integral=jac,
                              image_volume_estimate=image,
                              residual=jac - image,
                              mc_std=std, samples=int(samples))
