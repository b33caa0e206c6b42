"""Outer optimization over phase labelings by simulated annealing.

The design variable is genuinely binary per tet, so moves are
mass-preserving label swaps (biased toward the current interface) with
Metropolis acceptance on compliance + interface energy.  Each proposal is
re-equilibrated by the inner solver, warm started from the previous
equilibrium.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .energy import load_potential
from .mesh import interior_faces
from .solve import SolveOptions, minimize_equilibrium
from .varifold import (InterfaceError, PhaseLabeling, boundary_defect,
                       extract_interface, interface_energy, varifold_mass)

EULERIAN = "EULERIAN"
REFERENTIAL = "REFERENTIAL"


@dataclass(frozen=True)
class TopOptConfig:
    mode: str = EULERIAN
    eta: float = 0.5
    t_initial: float = 1.0
    t_decay: float = 0.85           # geometric temperature decay
    steps_per_temperature: int = 20
    t_final: float = 1e-3
    interface_move_bias: float = 0.9  # probability of interface-local swaps
    solve_options: SolveOptions = field(default_factory=SolveOptions)
    cold_solve_every: int = 50      # accepted moves between cold restarts
    seed: int = 0
    snapshot_every: int = 0         # accepted moves between snapshots (0 = off)

    def __post_init__(self):
        if self.mode not in (EULERIAN, REFERENTIAL):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if not (self.t_initial > 0 and self.t_final > 0):
            raise ValueError("temperatures must be positive")
        if not 0 < self.t_decay < 1:
            raise ValueError("decay must lie in (0, 1)")


class TopOptError(Exception):
    pass


def compliance(mesh, state, phases, model):
    """C(y, phi): work of loads on the equilibrium deformation."""
    return load_potential(mesh, state, phases, model)


def objective(mesh, state, phases, model, mode=EULERIAN):
    """Compliance plus interface energy (Eulerian or referential placement).

    In referential mode the interface is extracted at the reference
    positions; in Eulerian mode at the deformed positions.
    """
    positions = mesh.vertices if mode == REFERENTIAL else state.positions
    V = extract_interface(mesh, state, phases, positions=positions)
    return compliance(mesh, state, phases, model) + interface_energy(V, model)


def _interface_adjacent_tets(mesh, phases):
    """Tets incident to at least one interface face, per phase."""
    labels = phases.labels
    near1, near0 = set(), set()
    for _, (ta, tb) in interior_faces(mesh.face_adjacency):
        la, lb = int(labels[ta]), int(labels[tb])
        if la != lb:
            if la == 1:
                near1.add(ta)
                near0.add(tb)
            else:
                near1.add(tb)
                near0.add(ta)
    return sorted(near1), sorted(near0)


def mass_preserving_move(mesh, phases, rng, interface_bias=0.9,
                         volume_match_rtol=0.01, max_tries=50):
    """Propose a label swap keeping the phase-1 volume fixed.

    Swaps one phase-1 tet to 0 and one phase-0 tet to 1, biased toward
    interface-adjacent tets; candidates must be volume-matched within
    `volume_match_rtol` (exact for uniform meshes).  Proposals creating
    non-manifold interface junctions are rejected and retried.
    """
    labels = phases.labels
    ones = np.where(labels == 1)[0]
    zeros = np.where(labels == 0)[0]
    if len(ones) == 0 or len(zeros) == 0:
        raise TopOptError("no admissible move: a phase is empty")
    near1, near0 = _interface_adjacent_tets(mesh, phases)
    for _ in range(max_tries):
        local = rng.random() < interface_bias and near1 and near0
        src = rng.choice(near1 if local else ones)
        dst = rng.choice(near0 if local else zeros)
        va, vb = mesh.volumes[src], mesh.volumes[dst]
        if abs(va - vb) > volume_match_rtol * max(va, vb):
            continue
        candidate = phases.with_swap(tet_to_0=src, tet_to_1=dst)
        try:
            extract_interface(mesh, None, candidate,
                              positions=mesh.vertices)
        except InterfaceError:
            continue
        return candidate
    raise TopOptError("no admissible move found (frozen configuration)")


@dataclass
class TraceRow:
    step: int
    temperature: float
    objective: float
    compliance: float
    interface_energy: float
    mass: float
    accepted: bool


@dataclass
class TopOptResult:
    best_state: object
    best_phases: PhaseLabeling
    best_objective: float
    trace: list
    initial_objective: float
    initial_mass: float
    final_mass: float
    accepted_moves: int
    rejected_moves: int


def _evaluate(mesh, phases, model, config, warm_state):
    from .kinematics import identity_state
    state, report = minimize_equilibrium(mesh, warm_state, phases, model,
                                         config.solve_options)
    if not report.converged:
        # one retry from a cold start before counting the move as failed
        state, report = minimize_equilibrium(mesh, identity_state(mesh),
                                             phases, model,
                                             config.solve_options)
        if not report.converged:
            raise TopOptError("inner equilibrium solve did not converge")
    positions = mesh.vertices if config.mode == REFERENTIAL else state.positions
    V = extract_interface(mesh, state, phases, positions=positions)
    defect = boundary_defect(V)
    if defect:
        raise InterfaceError(f"interface has {defect} dangling edges")
    comp = compliance(mesh, state, phases, model)
    eint = interface_energy(V, model)
    return state, comp, eint, varifold_mass(V), report


def optimize_topology(mesh, init_phases, model, config, state0=None,
                      snapshot_callback=None):
    """Simulated annealing over labelings with inner equilibrium solves."""
    from .kinematics import identity_state
    rng = np.random.default_rng(config.seed)
    target = config.eta * mesh.total_volume()
    mass = init_phases.phase1_volume(mesh)
    if abs(mass - target) > mesh.volumes.max() + 1e-9 * mesh.total_volume():
        raise TopOptError("initial labeling violates the mass constraint")

    state = state0 or identity_state(mesh)
    phases = init_phases
    state, comp, eint, mu, _ = _evaluate(mesh, phases, model, config, state)
    obj = comp + eint
    best = (state, phases, obj)
    initial_obj, initial_mu = obj, mu

    trace = []
    accepted_total = 0
    rejected_total = 0
    step = 0
    temperature = config.t_initial
    while temperature > config.t_final:
        failures = 0
        for _ in range(config.steps_per_temperature):
            step += 1
            try:
                candidate = mass_preserving_move(
                    mesh, phases, rng,
                    interface_bias=config.interface_move_bias)
                warm = state
                if (config.cold_solve_every
                        and accepted_total
                        and accepted_total % config.cold_solve_every == 0):
                    warm = identity_state(mesh)
                cand_state, c_comp, c_eint, c_mu, report = _evaluate(
                    mesh, candidate, model, config, warm)
            except (InterfaceError, TopOptError, ValueError):
                failures += 1
                rejected_total += 1
                trace.append(TraceRow(step, temperature, obj, comp, eint,
                                      mu, False))
                continue
            cand_obj = c_comp + c_eint
            delta = cand_obj - obj
            accept = delta < 0 or rng.random() < np.exp(-delta / temperature)
            if accept:
                state, phases = cand_state, candidate
                obj, comp, eint, mu = cand_obj, c_comp, c_eint, c_mu
                accepted_total += 1
                if obj < best[2]:
                    best = (state, phases, obj)
                if (config.snapshot_every and snapshot_callback
                        and accepted_total % config.snapshot_every == 0):
                    snapshot_callback(step, state, phases)
            else:
                rejected_total += 1
            trace.append(TraceRow(step, temperature,
                                  cand_obj if accept else obj,
                                  comp, eint, mu, accept))
        if failures > config.steps_per_temperature // 2:
            raise TopOptError(
                f"more than half the moves failed inner solves at T={temperature}")
        temperature *= config.t_decay

    return TopOptResult(best_state=best[0], best_phases=best[1],
                        best_objective=best[2], trace=trace,
                        initial_objective=initial_obj, initial_mass=initial_mu,
                        final_mass=mu, accepted_moves=accepted_total,
                        rejected_moves=rejected_total)
