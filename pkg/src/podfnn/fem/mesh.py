"""Structured mesh generation with named boundary sides.

Generators build a regular grid in the unit parameter square (or cube) and
map it through the domain geometry, recording the node lists and element
edges of each side so boundary conditions can be attached by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elements import FAMILIES, ElementFamily


@dataclass
class Mesh:
    nodes: np.ndarray  # (n_nodes, dim)
    elements: np.ndarray  # (n_elements, nodes_per_element)
    family: ElementFamily
    sides: dict = field(default_factory=dict)  # name -> {"nodes": [...], "edges": [tuples]}

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def dim(self) -> int:
        return self.family.dim

    def validate(self) -> None:
        """Reject out-of-range connectivity and non-positive element Jacobians."""
        if self.elements.min() < 0 or self.elements.max() >= self.n_nodes:
            raise ValueError("element connectivity references a missing node")
        for e, conn in enumerate(self.elements):
            coords = self.nodes[conn]
            for xi in self.family.gauss_points:
                _, dN = self.family.shape(xi)
                det = np.linalg.det(dN.T @ coords)
                if det <= 0.0:
                    raise ValueError(
                        f"element {e} has non-positive Jacobian determinant {det:.3e}"
                    )


def find_node(mesh: Mesh, coords, tol=1e-9) -> int:
    """Index of the node at the given coordinates."""
    target = np.asarray(coords, dtype=float)
    dists = np.linalg.norm(mesh.nodes - target, axis=1)
    idx = int(np.argmin(dists))
    if dists[idx] > tol:
        raise ValueError(f"no node at {target} (closest is {dists[idx]:.3e} away)")
    return idx


def _grid_index(a, b, n_a):
    return b * n_a + a


def _structured_2d(nx, ny, map_fn, family_name):
    """Structured quad mesh over [0,1]^2 mapped through map_fn(xi, eta)."""
    family = FAMILIES[family_name]
    order = 1 if family_name == "Q4" else 2
    ncol = order * nx + 1
    nrow = order * ny + 1
    xi = np.linspace(0.0, 1.0, ncol)
    eta = np.linspace(0.0, 1.0, nrow)
    nodes = np.array([map_fn(a, b) for b in eta for a in xi])

    elements = []
    for j in range(ny):
        for i in range(nx):
            a, b = order * i, order * j
            if family_name == "Q4":
                conn = [
                    _grid_index(a, b, ncol),
                    _grid_index(a + 1, b, ncol),
                    _grid_index(a + 1, b + 1, ncol),
                    _grid_index(a, b + 1, ncol),
                ]
            else:
                conn = [
                    _grid_index(a, b, ncol),
                    _grid_index(a + 2, b, ncol),
                    _grid_index(a + 2, b + 2, ncol),
                    _grid_index(a, b + 2, ncol),
                    _grid_index(a + 1, b, ncol),
                    _grid_index(a + 2, b + 1, ncol),
                    _grid_index(a + 1, b + 2, ncol),
                    _grid_index(a, b + 1, ncol),
                    _grid_index(a + 1, b + 1, ncol),
                ]
            elements.append(conn)

    def line_nodes(fixed_a=None, fixed_b=None):
        if fixed_a is not None:
            return [_grid_index(fixed_a, b, ncol) for b in range(nrow)]
        return [_grid_index(a, fixed_b, ncol) for a in range(ncol)]

    def line_edges(node_list):
        if family_name == "Q4":
            return [tuple(node_list[k : k + 2]) for k in range(len(node_list) - 1)]
        # Q9 edge ordering matches L3: ends first, then the mid node
        return [
            (node_list[k], node_list[k + 2], node_list[k + 1])
            for k in range(0, len(node_list) - 2, 2)
        ]

    sides = {}
    for name, kw in (
        ("left", {"fixed_a": 0}),
        ("right", {"fixed_a": ncol - 1}),
        ("bottom", {"fixed_b": 0}),
        ("top", {"fixed_b": nrow - 1}),
    ):
        nl = line_nodes(**kw)
        sides[name] = {"nodes": nl, "edges": line_edges(nl)}

    mesh = Mesh(nodes, np.array(elements, dtype=int), family, sides)
    mesh.validate()
    return mesh


def rect_mesh(width, height, nx, ny, family="Q4") -> Mesh:
    return _structured_2d(nx, ny, lambda a, b: (width * a, height * b), family)


def cook_mesh(nx, ny, family="Q9") -> Mesh:
    """Tapered cantilever with corners (0,0), (48,44), (48,60), (0,44)."""
    corners = np.array([[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]])

    def map_fn(a, b):
        w = np.array([(1 - a) * (1 - b), a * (1 - b), a * b, (1 - a) * b])
        return tuple(w @ corners)

    return _structured_2d(nx, ny, map_fn, family)


def box_hex(lx, ly, lz, nx, ny, nz) -> Mesh:
    """Structured H8 box [0,lx] x [0,ly] x [0,lz]."""
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    zs = np.linspace(0.0, lz, nz + 1)
    nodes = np.array([(x, y, z) for z in zs for y in ys for x in xs])

    def nid(i, j, k):
        return (k * (ny + 1) + j) * (nx + 1) + i

    elements = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                elements.append(
                    [
                        nid(i, j, k), nid(i + 1, j, k), nid(i + 1, j + 1, k), nid(i, j + 1, k),
                        nid(i, j, k + 1), nid(i + 1, j, k + 1), nid(i + 1, j + 1, k + 1),
                        nid(i, j + 1, k + 1),
                    ]
                )

    sides = {
        "xmin": {"nodes": [nid(0, j, k) for k in range(nz + 1) for j in range(ny + 1)]},
        "xmax": {"nodes": [nid(nx, j, k) for k in range(nz + 1) for j in range(ny + 1)]},
        "ymin": {"nodes": [nid(i, 0, k) for k in range(nz + 1) for i in range(nx + 1)]},
        "ymax": {"nodes": [nid(i, ny, k) for k in range(nz + 1) for i in range(nx + 1)]},
        "zmin": {"nodes": [nid(i, j, 0) for j in range(ny + 1) for i in range(nx + 1)]},
        "zmax": {"nodes": [nid(i, j, nz) for j in range(ny + 1) for i in range(nx + 1)]},
    }
    mesh = Mesh(nodes, np.array(elements, dtype=int), FAMILIES["H8"], sides)
    mesh.validate()
    return mesh
