import numpy as np
import pytest

import sharptop as st
from sharptop.mesh import DIRICHLET, FREE, NEUMANN


def clamp_bottom_pull_top(c):
    if abs(c[2]) < 1e-9:
        return DIRICHLET
    if abs(c[2] - 1.0) < 1e-9:
        return NEUMANN
    return FREE


@pytest.fixture
def small_mesh():
    return st.build_box_mesh(2, 2, 2)


@pytest.fixture
def clamped_mesh():
    return st.build_box_mesh(2, 2, 2, tagging=clamp_bottom_pull_top)


@pytest.fixture
def uniform_phase1():
    def make(mesh):
        return st.PhaseLabeling(np.ones(mesh.n_tets, np.int8))
    return make


def random_feasible_state(mesh, scale=0.02, seed=0):
    """Random interior perturbation of the identity, Dirichlet-conforming."""
    rng = np.random.default_rng(seed)
    state = st.identity_state(mesh)
    pos = state.positions + scale * rng.standard_normal(state.positions.shape)
    pos[state.dirichlet_mask] = mesh.vertices[state.dirichlet_mask]
    return state.with_positions(pos)
