"""Miniature displacement-based nonlinear finite element solver."""

from .elements import H8, L2, L3, Q4, Q9  # noqa: F401
from .mesh import Mesh, box_hex, cook_mesh, find_node, rect_mesh  # noqa: F401
from .problems import builtin_problem  # noqa: F401
from .solver import (  # noqa: F401
    BoundarySpec,
    HyperFnnFemMaterial,
    NeoHookeanFemMaterial,
    NewtonError,
    PodFnnFemMaterial,
    Problem,
    SolveOptions,
    SolveReport,
    assemble_residual,
    assemble_tangent,
    newton_solve,
)
