"""Inner equilibrium solver: minimize bulk energy minus load work.

Limited-memory quasi-Newton descent with Armijo backtracking.  Steps are
accepted only if the objective strictly decreases, every tet keeps
det F above a relative margin, and (periodically) the Ciarlet-Necas
residual stays within tolerance.  The interface energy is deliberately
not part of this objective; it enters the outer topology objective.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .energy import (INFEASIBLE, bulk_energy, bulk_energy_gradient,
                     load_potential, load_potential_gradient)
from .kinematics import (ciarlet_necas_residual, deformation_gradients,
                         minors, reference_edge_inverses)


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    contraction: float = 0.5          # line-search backtracking factor
    sufficient_decrease: float = 1e-4  # Armijo constant
    det_margin: float = 1e-6           # relative det F floor
    cn_check_every: int = 25           # Ciarlet-Necas cadence (0 = off)
    cn_samples: int = 10_000
    cn_tolerance_factor: float = 1e-3  # plus 3 MC std deviations
    history: int = 10                  # L-BFGS memory
    max_line_search: int = 40
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.contraction < 1:
            raise ValueError("contraction must lie in (0, 1)")
        if not 0 < self.sufficient_decrease < 1:
            raise ValueError("sufficient_decrease must lie in (0, 1)")
        if min(self.max_iterations, self.history, self.max_line_search) <= 0:
            raise ValueError("counts must be positive")
        if self.det_margin <= 0 or self.gradient_tolerance <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    objective: float
    grad_norm: float
    min_det: float
    guard_activations: int
    guard_iterations: list          # iterations where a guard shrank a step
    cn_residual: float
    message: str
    history: list = field(default_factory=list)  # (iter, obj, |g|, min_det, guards)


def equilibrium_objective(mesh, state, phases, model):
    """bulk_energy - load_potential; +inf when infeasible."""
    bulk = bulk_energy(mesh, state, phases, model)
    if bulk == INFEASIBLE:
        return INFEASIBLE
    return bulk - load_potential(mesh, state, phases, model)


def equilibrium_gradient(mesh, state, phases, model, ref_inv=None):
    """Nodal gradient of the equilibrium objective; Dirichlet rows zero."""
    return (bulk_energy_gradient(mesh, state, phases, model, ref_inv)
            - load_potential_gradient(mesh, state, phases, model))


def _min_det(mesh, positions, ref_inv):
    F = deformation_gradients(mesh, positions, ref_inv)
    _, _, det = minors(F)
    return float(det.min())


def minimize_equilibrium(mesh, state0, phases, model, options=None):
    """Descent to an equilibrium deformation at fixed phase labeling.

    Returns (state, SolveReport).  The returned state always satisfies
    min det F > 0 and preserves Dirichlet positions bit-exactly.
    """
    options = options or SolveOptions()
    ref_inv = reference_edge_inverses(mesh)
    free = ~state0.dirichlet_mask

    state = state0
    det_ref = _min_det(mesh, mesh.vertices, ref_inv)
    det_floor = options.det_margin * det_ref
    obj = equilibrium_objective(mesh, state, phases, model)
    if obj == INFEASIBLE or _min_det(mesh, state.positions, ref_inv) <= det_floor:
        raise ValueError("initial state is infeasible")

    grad = equilibrium_gradient(mesh, state, phases, model, ref_inv)
    gnorm = float(np.linalg.norm(grad))
    pairs = deque(maxlen=options.history)   # (s, y, rho) for L-BFGS
    guard_total = 0
    guard_iters = []
    cn_res = 0.0
    log = []
    message = "converged"
    converged = gnorm <= options.gradient_tolerance
    it = 0

    def cn_ok(positions):
        nonlocal cn_res
        res = ciarlet_necas_residual(
            mesh, state.with_positions(positions),
            samples=options.cn_samples, seed=options.seed)
        cn_res = res.residual
        tol = 3.0 * res.mc_std + options.cn_tolerance_factor * res.jacobian_integral
        return res.residual <= tol

    while not converged and it < options.max_iterations:
        it += 1
        direction = _lbfgs_direction(grad, pairs)
        if float(np.sum(direction * grad)) >= 0.0:
            direction = -grad  # fallback to steepest descent
        step = 1.0
        accepted = False
        guards_this_iter = 0
        gd = float(np.sum(direction * grad))
        for _ in range(options.max_line_search):
            trial = state.positions + step * direction
            trial[~free] = state0.positions[~free]
            if _min_det(mesh, trial, ref_inv) <= det_floor:
                guards_this_iter += 1
                step *= options.contraction
                continue
            trial_state = state.with_positions(trial)
            trial_obj = equilibrium_objective(mesh, trial_state, phases, model)
            if not (trial_obj < obj + options.sufficient_decrease * step * gd):
                step *= options.contraction
                continue
            if (options.cn_check_every
                    and it % options.cn_check_every == 0
                    and not cn_ok(trial)):
                guards_this_iter += 1
                step *= options.contraction
                continue
            accepted = True
            break
        if guards_this_iter:
            guard_total += guards_this_iter
            guard_iters.append(it)
        if not accepted:
            message = "line search exhausted; returning best feasible state"
            break
        new_grad = equilibrium_gradient(mesh, trial_state, phases, model,
                                        ref_inv)
        s = (trial_state.positions - state.positions).ravel()
        y = (new_grad - grad).ravel()
        sy = float(np.dot(s, y))
        if sy > 1e-12 * float(np.dot(y, y)):
            pairs.append((s, y, 1.0 / sy))
        state, obj, grad = trial_state, trial_obj, new_grad
        gnorm = float(np.linalg.norm(grad))
        log.append((it, obj, gnorm, _min_det(mesh, state.positions, ref_inv),
                    guards_this_iter))
        converged = gnorm <= options.gradient_tolerance

    min_det = _min_det(mesh, state.positions, ref_inv)
    report = SolveReport(
        converged=converged, iterations=it, objective=obj, grad_norm=gnorm,
        min_det=min_det, guard_activations=guard_total,
        guard_iterations=guard_iters, cn_residual=cn_res,
        message=message if not converged else "converged", history=log)
    return state, report


def _lbfgs_direction(grad, pairs):
    """Two-loop recursion; returns a descent direction candidate."""
    q = -grad.ravel().copy()
    if not pairs:
        return q.reshape(grad.shape)
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    s, y, rho = pairs[-1]
    q *= float(np.dot(s, y)) / float(np.dot(y, y))
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return q.reshape(grad.shape)
