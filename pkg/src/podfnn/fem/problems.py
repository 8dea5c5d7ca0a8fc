"""Built-in benchmark problems: geometry, boundary conditions, tracked nodes.

The material and its kinematics are attached by the caller, so each problem
can run with the reference model, a trained surrogate, or both.
"""

from __future__ import annotations

import numpy as np

from .mesh import box_hex, cook_mesh, find_node, rect_mesh
from .solver import BoundarySpec, Problem


def load_schedule(n_load, n_unload=0, unload_to=0.0):
    """Factors ramping 0 -> 1 in n_load steps, then back to unload_to."""
    up = np.linspace(0.0, 1.0, n_load + 1)[1:]
    if n_unload == 0:
        return up
    down = np.linspace(1.0, unload_to, n_unload + 1)[1:]
    return np.concatenate([up, down])


def _cook2d(q0=0.03, nx=8, ny=5, family="Q9", n_load=20, n_unload=20, unload_to=0.0):
    """Tapered cantilever, clamped left end, vertical line load on the right."""
    mesh = cook_mesh(nx, ny, family=family)
    fixed = [(n, c) for n in mesh.sides["left"]["nodes"] for c in (0, 1)]
    tractions = [
        (edge, np.array([0.0, 1.0]), q0) for edge in mesh.sides["right"]["edges"]
    ]
    bcs = BoundarySpec(
        fixed=fixed,
        tractions=tractions,
        schedule=load_schedule(n_load, n_unload, unload_to),
    )
    tracked = [find_node(mesh, (48.0, 60.0))]
    return Problem(mesh, bcs, None, tracked_nodes=tracked, name="cook2d")


def _punch2d(u0=0.07, width=2.0, height=1.0, nx=10, ny=10, family="Q4",
             n_load=20, n_unload=20, unload_to=0.0):
    """Block compressed by a prescribed vertical displacement of its whole top.

    The bottom is fixed vertically only; one bottom node is pinned
    horizontally against rigid-body motion. Unloading reverses the punch
    back towards zero.
    """
    mesh = rect_mesh(width, height, nx, ny, family=family)
    bottom = mesh.sides["bottom"]["nodes"]
    top = mesh.sides["top"]["nodes"]
    fixed = [(n, 1) for n in bottom]
    fixed.append((bottom[len(bottom) // 2], 0))
    prescribed = [(n, 1, -u0) for n in top]
    bcs = BoundarySpec(
        fixed=fixed,
        prescribed=prescribed,
        schedule=load_schedule(n_load, n_unload, unload_to),
    )
    tracked = [find_node(mesh, (0.0, height))]
    reaction_dofs = [n * 2 + 1 for n in top]
    return Problem(
        mesh, bcs, None, tracked_nodes=tracked, reaction_dofs=reaction_dofs, name="punch2d"
    )


def _plate2d(q0=-20.0, width=1.0, height=2.0, nx=5, ny=10, family="Q4", n_load=20):
    """Plate compressed by a distributed load on its top surface.

    The bottom is held vertically, with one node pinned horizontally.
    Intended for the finite-strain hyperelastic models.
    """
    mesh = rect_mesh(width, height, nx, ny, family=family)
    bottom = mesh.sides["bottom"]["nodes"]
    fixed = [(n, 1) for n in bottom]
    fixed.append((bottom[len(bottom) // 2], 0))
    tractions = [
        (edge, np.array([0.0, 1.0]), q0) for edge in mesh.sides["top"]["edges"]
    ]
    bcs = BoundarySpec(fixed=fixed, tractions=tractions, schedule=load_schedule(n_load))
    tracked = [mesh.sides["top"]["nodes"][len(mesh.sides["top"]["nodes"]) // 2]]
    return Problem(mesh, bcs, None, kinematics="finite", tracked_nodes=tracked, name="plate2d")


def _patch3d(u0=0.3, n_load=20, n_unload=0, unload_to=0.0):
    """Single unit H8 under uniaxial stretch with symmetric face constraints.

    Normal displacement fixed on the three coordinate faces, prescribed
    axial displacement on the far x face; lateral faces free, so the stress
    state is homogeneous uniaxial.
    """
    mesh = box_hex(1.0, 1.0, 1.0, 1, 1, 1)
    fixed = [(n, 0) for n in mesh.sides["xmin"]["nodes"]]
    fixed += [(n, 1) for n in mesh.sides["ymin"]["nodes"]]
    fixed += [(n, 2) for n in mesh.sides["zmin"]["nodes"]]
    prescribed = [(n, 0, u0) for n in mesh.sides["xmax"]["nodes"]]
    bcs = BoundarySpec(
        fixed=fixed,
        prescribed=prescribed,
        schedule=load_schedule(n_load, n_unload, unload_to),
    )
    tracked = [find_node(mesh, (1.0, 1.0, 1.0))]
    reaction_dofs = [n * 3 for n in mesh.sides["xmax"]["nodes"]]
    return Problem(
        mesh, bcs, None, tracked_nodes=tracked, reaction_dofs=reaction_dofs, name="patch3d"
    )


_BUILTINS = {
    "cook2d": _cook2d,
    "punch2d": _punch2d,
    "plate2d": _plate2d,
    "patch3d": _patch3d,
}


def builtin_problem(name: str, **overrides) -> Problem:
    """Configured benchmark problem; material left for the caller to attach."""
    if name not in _BUILTINS:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(_BUILTINS)}")
    return _BUILTINS[name](**overrides)
