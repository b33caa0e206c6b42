"""Stored-energy densities, loads, and energy assembly.

The per-phase density is the polyconvex model

    W_i(F) = scale_i * (|F|^r + (|F|^3/det F)^(r-1) + (det F)^(-s)),

extended by +inf when det F <= 0.  The interface density is
Psi(a) = c_int * (1 + a^p).  Infeasible values are represented by the
explicit float('inf') sentinel, never by a large finite number.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .kinematics import deformation_gradients, minors, reference_edge_inverses

INFEASIBLE = math.inf


@dataclass(frozen=True)
class EnergyModel:
    r: float = 4.0            # growth exponent, > 3
    s: float = 2.0            # compressibility exponent, > 0
    scale0: float = 1.0       # phase-0 (Ersatz) multiplier
    scale1: float = 1.0       # phase-1 multiplier
    c_int: float = 1.0        # interface scale
    p: float = 2.0            # curvature exponent, > 1
    f: np.ndarray = field(default_factory=lambda: np.zeros(3))  # body force
    g: np.ndarray = field(default_factory=lambda: np.zeros(3))  # traction
    eta: float = 0.5          # target phase-1 mass fraction

    def __post_init__(self):
        object.__setattr__(self, "f", np.asarray(self.f, float))
        object.__setattr__(self, "g", np.asarray(self.g, float))
        if not self.r > 3:
            raise ValueError("r must exceed 3")
        if not (self.s > 0 and self.p > 1 and self.c_int > 0):
            raise ValueError("need s > 0, p > 1, c_int > 0")
        if not (self.scale0 > 0 and self.scale1 > 0):
            raise ValueError("phase scales must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")

    def scale(self, phase):
        return self.scale1 if phase else self.scale0

    def with_(self, **kw):
        return replace(self, **kw)


def stress_free_s(r):
    """Compressibility exponent making the identity stress-free.

    dW/dF at I is (r 3^((r-2)/2) - s) I for this density; the returned s
    cancels it.
    """
    return r * 3.0 ** ((r - 2.0) / 2.0)


def bulk_density(F, phase, model):
    """W_phase(F); +inf when det F <= 0."""
    F, _, det = minors(F)
    if det <= 0:
        return INFEASIBLE
    norm = float(np.sqrt(np.sum(F * F)))
    return model.scale(phase) * (norm**model.r
                                 + (norm**3 / det) ** (model.r - 1.0)
                                 + det ** (-model.s))


def bulk_stress(F, phase, model):
    """First derivative dW/dF of the model density; requires det F > 0."""
    F, cof, det = minors(F)
    if det <= 0:
        raise ValueError("bulk_stress requires det F > 0")
    r, s = model.r, model.s
    norm = float(np.sqrt(np.sum(F * F)))
    dist = norm**3 / det
    P = r * norm ** (r - 2.0) * F
    P += (r - 1.0) * dist ** (r - 2.0) * (3.0 * norm / det * F
                                          - norm**3 / det**2 * cof)
    P += -s * det ** (-s - 1.0) * cof
    return model.scale(phase) * P


def _density_terms(F_all):
    """Vectorized (|F|, Cof F, det F) over a stack of gradients."""
    F, cof, det = minors(F_all)
    norm = np.sqrt(np.sum(F * F, axis=(-2, -1)))
    return norm, cof, det


def bulk_energy(mesh, state, phases, model, F_all=None):
    """Sum over tets of vol_ref * W_label(F); +inf on any inverted tet.

    Labels are constant per tet, so midpoint quadrature is exact in phase
    and exact for the piecewise-affine deformation.
    """
    if F_all is None:
        F_all = deformation_gradients(mesh, state.positions)
    norm, _, det = _density_terms(F_all)
    if np.any(det <= 0):
        return INFEASIBLE
    w = norm**model.r + (norm**3 / det) ** (model.r - 1.0) + det ** (-model.s)
    labels = np.asarray(phases.labels, float)
    scale = model.scale0 * (1.0 - labels) + model.scale1 * labels
    return float(np.sum(mesh.volumes * scale * w))


def bulk_energy_gradient(mesh, state, phases, model, ref_inv=None,
                         F_all=None):
    """Nodal gradient of bulk_energy, shape (nv, 3); Dirichlet rows zeroed."""
    if ref_inv is None:
        ref_inv = reference_edge_inverses(mesh)
    if F_all is None:
        F_all = deformation_gradients(mesh, state.positions, ref_inv)
    F, cof, det = minors(F_all)
    if np.any(det <= 0):
        raise ValueError("gradient requires det F > 0 on all tets")
    r, s = model.r, model.s
    norm = np.sqrt(np.sum(F * F, axis=(-2, -1)))[:, None, None]
    det = det[:, None, None]
    P = r * norm ** (r - 2.0) * F
    P += (r - 1.0) * (norm**3 / det) ** (r - 2.0) * (
        3.0 * norm / det * F - norm**3 / det**2 * cof)
    P += -s * det ** (-s - 1.0) * cof
    labels = np.asarray(phases.labels, float)
    scale = model.scale0 * (1.0 - labels) + model.scale1 * labels
    P *= (mesh.volumes * scale)[:, None, None]
    # F = Dx G with G = ref_inv: d(vol W)/dx_i = P G_i. (G_i = i-th row)
    grad_corner = P @ np.transpose(ref_inv, (0, 2, 1))   # (nt, 3, 3): cols?
    # grad_corner[:, :, i] is the force on local vertex i+1
    g = np.zeros_like(state.positions)
    np.add.at(g, mesh.tets[:, 1], grad_corner[:, :, 0])
    np.add.at(g, mesh.tets[:, 2], grad_corner[:, :, 1])
    np.add.at(g, mesh.tets[:, 3], grad_corner[:, :, 2])
    np.add.at(g, mesh.tets[:, 0], -grad_corner.sum(axis=2))
    g[state.dirichlet_mask] = 0.0
    return g


def interface_density(a_norm, model):
    """Psi(a) = c_int (1 + a^p) for curvature magnitude a >= 0."""
    a = np.asarray(a_norm, float)
    if np.any(a < 0):
        raise ValueError("curvature magnitude must be nonnegative")
    return model.c_int * (1.0 + a**model.p)


def _body_force_per_tet(mesh, model):
    f = np.asarray(model.f, float)
    if f.ndim == 1:
        return np.broadcast_to(f, (mesh.n_tets, 3))
    return f


def _traction_per_face(mesh, model, neumann_idx):
    g = np.asarray(model.g, float)
    if g.ndim == 1:
        return np.broadcast_to(g, (len(neumann_idx), 3))
    return g[neumann_idx]


def _reference_face_areas(mesh, faces):
    v = mesh.vertices[faces]
    n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    return 0.5 * np.linalg.norm(n, axis=1)


def load_potential(mesh, state, phases, model):
    """Work of the referential loads; equilibrium minimizes bulk - loads.

    sum_{label=1} vol_ref f . ybar  +  sum_{Neumann faces} area_ref g . ybar
    with deformed centroid values ybar (exact for affine y per element).
    """
    labels = np.asarray(phases.labels, float)
    f = _body_force_per_tet(mesh, model)
    ybar = state.positions[mesh.tets].mean(axis=1)
    body = float(np.sum(mesh.volumes * labels * np.sum(f * ybar, axis=1)))
    sel = np.where(mesh.boundary_tags == "NEUMANN")[0]
    surface = 0.0
    if sel.size:
        faces = mesh.boundary_faces[sel]
        areas = _reference_face_areas(mesh, faces)
        g = _traction_per_face(mesh, model, sel)
        fbar = state.positions[faces].mean(axis=1)
        surface = float(np.sum(areas * np.sum(g * fbar, axis=1)))
    return body + surface


def load_potential_gradient(mesh, state, phases, model):
    """Nodal gradient of load_potential; Dirichlet rows zeroed."""
    labels = np.asarray(phases.labels, float)
    f = _body_force_per_tet(mesh, model)
    g = np.zeros_like(state.positions)
    contrib = (mesh.volumes * labels)[:, None] * f / 4.0
    for c in range(4):
        np.add.at(g, mesh.tets[:, c], contrib)
    sel = np.where(mesh.boundary_tags == "NEUMANN")[0]
    if sel.size:
        faces = mesh.boundary_faces[sel]
        areas = _reference_face_areas(mesh, faces)
        trac = _traction_per_face(mesh, model, sel)
        fc = areas[:, None] * trac / 3.0
        for c in range(3):
            np.add.at(g, faces[:, c], fc)
    g[state.dirichlet_mask] = 0.0
    return g


def total_energy(mesh, state, phases, model, varifold=None):
    """E = bulk + interface energy of the extracted interface varifold."""
    from .varifold import extract_interface, interface_energy
    bulk = bulk_energy(mesh, state, phases, model)
    if bulk == INFEASIBLE:
        return INFEASIBLE
    if varifold is None:
        varifold = extract_interface(mesh, state, phases)
    return bulk + interface_energy(varifold, model)
