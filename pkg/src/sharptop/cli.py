"""Batch entry point: validate / equilibrium / topopt / curvature-test.

Scenarios are single JSON documents; see README for the schema.  All
randomness flows from one scenario seed through named sub-seeds.
"""

import argparse
import dataclasses
import json
import os
import sys
import zlib

import numpy as np

from . import export, mesh as meshmod, surfaces
from .energy import EnergyModel
from .kinematics import identity_state
from .solve import SolveOptions, minimize_equilibrium
from .topopt import TopOptConfig, TopOptResult, optimize_topology
from .varifold import (PhaseLabeling, curvature_integral, extract_interface,
                       varifold_mass)


class ScenarioError(Exception):
    pass


def sub_seed(seed, name):
    """Stable named sub-stream of the scenario seed."""
    return int(np.random.SeedSequence([seed, zlib.crc32(name.encode())])
               .generate_state(1)[0])


def load_scenario(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}")


def build_mesh(spec):
    kind = spec.get("type", "box")
    if kind == "file":
        return meshmod.load_mesh(spec["path"])
    if kind == "box":
        tagging = None
        if spec.get("tags"):
            tagging = meshmod.plane_tagging(spec["tags"])
        return meshmod.build_box_mesh(spec.get("nx", 4), spec.get("ny", 4),
                                      spec.get("nz", 4),
                                      spec.get("extent", (1.0, 1.0, 1.0)),
                                      tagging=tagging)
    raise ScenarioError(f"unknown mesh type {kind!r}")


def build_labels(spec, mesh, eta):
    kind = spec.get("type", "slab")
    if kind == "uniform":
        return PhaseLabeling(np.full(mesh.n_tets, spec.get("value", 1),
                                     np.int8))
    if kind == "slab":
        return surfaces.slab_labels(mesh, eta, axis=spec.get("axis", 0))
    if kind == "halfspace":
        return surfaces.halfspace_labels(mesh, axis=spec.get("axis", 0),
                                         threshold=spec.get("threshold", 0.5))
    if kind == "ball":
        return surfaces.ball_labels(mesh, spec.get("center", (0.5, 0.5, 0.5)),
                                    spec.get("radius", 0.3))
    raise ScenarioError(f"unknown label type {kind!r}")


def build_model(spec):
    return EnergyModel(**{k: v for k, v in spec.items()})


def _filter_kwargs(cls, spec):
    names = {f.name for f in dataclasses.fields(cls)}
    return {k: v for k, v in spec.items() if k in names}


def cmd_validate(scenario, out, seed):
    mesh = build_mesh(scenario.get("mesh", {}))
    report = meshmod.validate_mesh(mesh)
    export.write_json(os.path.join(out, "validate.json"), {
        "passed": report.passed,
        "failures": [[name, str(ent)] for name, ent in report.failures],
        "n_vertices": mesh.n_vertices,
        "n_tets": mesh.n_tets,
        "total_volume": mesh.total_volume(),
    })
    return 0 if report.passed else 1


def cmd_equilibrium(scenario, out, seed):
    mesh = build_mesh(scenario.get("mesh", {}))
    model = build_model(scenario.get("model", {}))
    phases = build_labels(scenario.get("labels", {"type": "uniform"}),
                          mesh, model.eta)
    options = SolveOptions(**_filter_kwargs(SolveOptions,
                                            scenario.get("solve", {})),
                           seed=sub_seed(seed, "monte-carlo"))
    state, report = minimize_equilibrium(mesh, identity_state(mesh), phases,
                                         model, options)
    export.write_csv(os.path.join(out, "equilibrium_log.csv"),
                     ["iter", "objective", "grad_norm", "min_detF",
                      "guard_flags"],
                     [(i, f"{o:.17g}", f"{g:.17g}", f"{d:.17g}", gf)
                      for i, o, g, d, gf in report.history])
    export.write_vtk_unstructured(
        os.path.join(out, "equilibrium.vtk"), state.positions, mesh.tets,
        cell_data={"phase": phases.labels})
    export.write_json(os.path.join(out, "equilibrium.json"), {
        "converged": report.converged,
        "iterations": report.iterations,
        "objective": report.objective,
        "grad_norm": report.grad_norm,
        "min_det": report.min_det,
        "guard_activations": report.guard_activations,
        "seed": seed,
    })
    return 0 if report.converged else 1


def _write_topopt_outputs(out, mesh, model, result: TopOptResult, seed):
    export.write_csv(os.path.join(out, "trace.csv"),
                     ["step", "temperature", "objective", "compliance",
                      "interface_energy", "mass", "accepted"],
                     [(r.step, f"{r.temperature:.17g}",
                       f"{r.objective:.17g}", f"{r.compliance:.17g}",
                       f"{r.interface_energy:.17g}", f"{r.mass:.17g}",
                       int(r.accepted)) for r in result.trace])
    export.write_vtk_unstructured(
        os.path.join(out, "best.vtk"), result.best_state.positions,
        mesh.tets, cell_data={"phase": result.best_phases.labels})
    V = extract_interface(mesh, result.best_state, result.best_phases)
    if V.n_triangles:
        export.write_obj(os.path.join(out, "best_interface.obj"),
                         V.vertices, V.faces, V.normals)
        export.write_vtk_surface(
            os.path.join(out, "best_interface.vtk"), V.vertices, V.faces,
            point_data={"H": np.linalg.norm(V.mean_curvature, axis=1),
                        "K": V.gauss_curvature, "A_norm": V.a_norm})
    export.write_json(os.path.join(out, "summary.json"), {
        "best_objective": result.best_objective,
        "initial_objective": result.initial_objective,
        "initial_interface_mass": result.initial_mass,
        "final_interface_mass": result.final_mass,
        "accepted_moves": result.accepted_moves,
        "rejected_moves": result.rejected_moves,
        "mass_constraint_residual":
            result.best_phases.phase1_volume(mesh)
            - model.eta * mesh.total_volume(),
        "seed": seed,
    })


def cmd_topopt(scenario, out, seed):
    mesh = build_mesh(scenario.get("mesh", {}))
    model = build_model(scenario.get("model", {}))
    topopt_spec = dict(scenario.get("topopt", {}))
    solve_spec = _filter_kwargs(SolveOptions, scenario.get("solve", {}))
    solve_spec["seed"] = sub_seed(seed, "monte-carlo")
    config = TopOptConfig(**_filter_kwargs(TopOptConfig, topopt_spec),
                          solve_options=SolveOptions(**solve_spec),
                          seed=sub_seed(seed, "moves"))
    phases = build_labels(scenario.get("labels", {"type": "slab"}),
                          mesh, config.eta)

    def snapshot(step, state, phs):
        export.write_vtk_unstructured(
            os.path.join(out, f"snapshot_{step:06d}.vtk"),
            state.positions, mesh.tets, cell_data={"phase": phs.labels})
        V = extract_interface(mesh, state, phs)
        if V.n_triangles:
            export.write_obj(os.path.join(out, f"snapshot_{step:06d}.obj"),
                             V.vertices, V.faces, V.normals)

    result = optimize_topology(mesh, phases, model, config,
                               snapshot_callback=snapshot)
    _write_topopt_outputs(out, mesh, model, result, seed)
    return 0


def cmd_curvature_test(scenario, out, seed):
    rows = []
    for level in (1, 2, 3, 4):
        radius = 0.3
        V = surfaces.sphere_varifold(level, radius=radius)
        mass = varifold_mass(V)
        bending = curvature_integral(V, 2.0)
        rows.append(("sphere", level, len(V.vertices),
                     f"{mass:.17g}", f"{4 * np.pi * radius**2:.17g}",
                     f"{bending:.17g}", f"{16 * np.pi:.17g}"))
    Vf = surfaces.flat_varifold(8, 8)
    rows.append(("plane", 0, len(Vf.vertices), f"{varifold_mass(Vf):.17g}",
                 "1", f"{curvature_integral(Vf, 2.0):.17g}", "0"))
    for n in (16, 32):
        radius = 0.5
        Vc = surfaces.cylinder_varifold(radius, angle=np.pi, height=1.0,
                                        n_theta=n, n_z=n // 2)
        area = np.pi * radius * 1.0
        rows.append(("cylinder", n, len(Vc.vertices),
                     f"{varifold_mass(Vc):.17g}", f"{area:.17g}",
                     f"{curvature_integral(Vc, 2.0):.17g}",
                     f"{2.0 / radius**2 * area:.17g}"))
    export.write_csv(os.path.join(out, "curvature_table.csv"),
                     ["surface", "level", "n_vertices", "mass",
                      "mass_analytic", "curvature_integral",
                      "curvature_analytic"], rows)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "equilibrium": cmd_equilibrium,
    "topopt": cmd_topopt,
    "curvature-test": cmd_curvature_test,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sharptop",
        description="Sharp-interface two-phase elasticity with "
                    "curvature-penalized interfaces")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--scenario", help="scenario JSON path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        scenario = load_scenario(args.scenario) if args.scenario else {}
        out = args.out or scenario.get("output", "out")
        seed = args.seed if args.seed is not None else scenario.get("seed", 0)
        threads = args.threads
        if threads is None:
            threads = int(os.environ.get("SHARPTOP_THREADS", "0")) or None
        if threads:
            os.environ.setdefault("OMP_NUM_THREADS", str(threads))
        os.makedirs(out, exist_ok=True)
        return COMMANDS[args.command](scenario, out, seed)
    except (ScenarioError, meshmod.MeshError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except Exception as exc:  # solver / interface failures
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
