"""Isoparametric element families with their Gauss rules.

Q4/Q9 quadrilaterals and the H8 hexahedron for domain integration, plus the
L2/L3 line families used to integrate edge tractions consistently.
"""

from __future__ import annotations

import numpy as np

_Q4_NAT = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
_H8_NAT = np.array(
    [
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, 1.0],
    ]
)
# corners, mid-sides, centre
_Q9_NAT = np.array(
    [
        [-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0],
        [0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0],
        [0.0, 0.0],
    ]
)


def _lagr_quadratic(x):
    """1D quadratic Lagrange basis on nodes (-1, 0, 1) and its derivative."""
    vals = np.array([0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)])
    ders = np.array([x - 0.5, -2.0 * x, x + 0.5])
    return vals, ders


class ElementFamily:
    """Shape functions, their natural derivatives and the Gauss rule."""

    def __init__(self, name, dim, n_nodes, shape_fn, gauss_order):
        self.name = name
        self.dim = dim
        self.n_nodes = n_nodes
        self._shape_fn = shape_fn
        pts, wts = np.polynomial.legendre.leggauss(gauss_order)
        if dim == 1:
            self.gauss_points = pts[:, None]
            self.gauss_weights = wts
        elif dim == 2:
            self.gauss_points = np.array([[a, b] for a in pts for b in pts])
            self.gauss_weights = np.array([wa * wb for wa in wts for wb in wts])
        else:
            self.gauss_points = np.array([[a, b, c] for a in pts for b in pts for c in pts])
            self.gauss_weights = np.array(
                [wa * wb * wc for wa in wts for wb in wts for wc in wts]
            )

    def shape(self, xi):
        """Values N (n_nodes,) and natural derivatives dN (n_nodes, dim) at xi."""
        return self._shape_fn(np.asarray(xi, dtype=float))

    def __repr__(self):
        return f"ElementFamily({self.name})"


def _q4_shape(xi):
    g = 1.0 + _Q4_NAT * xi  # (4, 2) factors (1 + xi_i xi), (1 + eta_i eta)
    N = 0.25 * g[:, 0] * g[:, 1]
    dN = 0.25 * np.column_stack([_Q4_NAT[:, 0] * g[:, 1], _Q4_NAT[:, 1] * g[:, 0]])
    return N, dN


def _q9_shape(xi):
    lx, dlx = _lagr_quadratic(xi[0])
    ly, dly = _lagr_quadratic(xi[1])
    idx = {-1.0: 0, 0.0: 1, 1.0: 2}
    N = np.empty(9)
    dN = np.empty((9, 2))
    for i, (a, b) in enumerate(_Q9_NAT):
        ia, ib = idx[a], idx[b]
        N[i] = lx[ia] * ly[ib]
        dN[i] = (dlx[ia] * ly[ib], lx[ia] * dly[ib])
    return N, dN


def _h8_shape(xi):
    g = 1.0 + _H8_NAT * xi  # (8, 3)
    N = 0.125 * g[:, 0] * g[:, 1] * g[:, 2]
    dN = 0.125 * np.column_stack(
        [
            _H8_NAT[:, 0] * g[:, 1] * g[:, 2],
            _H8_NAT[:, 1] * g[:, 0] * g[:, 2],
            _H8_NAT[:, 2] * g[:, 0] * g[:, 1],
        ]
    )
    return N, dN


def _l2_shape(xi):
    s = xi[0]
    return np.array([0.5 * (1.0 - s), 0.5 * (1.0 + s)]), np.array([[-0.5], [0.5]])


def _l3_shape(xi):
    vals, ders = _lagr_quadratic(xi[0])
    order = [0, 2, 1]  # ends first, then the mid node
    return vals[order], ders[order][:, None]


Q4 = ElementFamily("Q4", 2, 4, _q4_shape, 2)
Q9 = ElementFamily("Q9", 2, 9, _q9_shape, 3)
H8 = ElementFamily("H8", 3, 8, _h8_shape, 2)
L2 = ElementFamily("L2", 1, 2, _l2_shape, 2)
L3 = ElementFamily("L3", 1, 3, _l3_shape, 3)

FAMILIES = {f.name: f for f in (Q4, Q9, H8)}
EDGE_FAMILY = {"Q4": L2, "Q9": L3}
