"""Symmetric tensor algebra for 2D/3D mechanics.

Spectral decomposition with a deterministic ordering and sign convention,
rotation between principal and general axes, small-strain kinematics and
the Voigt-vector helpers shared by the material models and the FE assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Voigt component ordering: (xx, yy, xy) in 2D, (xx, yy, zz, xy, yz, xz) in 3D.
VOIGT_PAIRS = {
    2: ((0, 0), (1, 1), (0, 1)),
    3: ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)),
}

_ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class SymTensor:
    """Symmetric second-order tensor stored by its unique entries.

    ``components`` follows the Voigt ordering above with plain tensor
    (not engineering) off-diagonal entries.
    """

    dim: int
    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if comps.shape != (len(VOIGT_PAIRS[self.dim]),):
            raise ValueError(
                f"expected {len(VOIGT_PAIRS[self.dim])} components for dim {self.dim}, "
                f"got shape {comps.shape}"
            )
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_matrix(cls, mat) -> "SymTensor":
        mat = np.asarray(mat, dtype=float)
        dim = mat.shape[0]
        if mat.shape != (dim, dim) or dim not in (2, 3):
            raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {mat.shape}")
        sym = 0.5 * (mat + mat.T)
        return cls(dim, np.array([sym[i, j] for i, j in VOIGT_PAIRS[dim]]))

    def as_matrix(self) -> np.ndarray:
        mat = np.zeros((self.dim, self.dim))
        for comp, (i, j) in zip(self.components, VOIGT_PAIRS[self.dim]):
            mat[i, j] = comp
            mat[j, i] = comp
        return mat

    @classmethod
    def zero(cls, dim: int) -> "SymTensor":
        return cls(dim, np.zeros(len(VOIGT_PAIRS[dim])))


@dataclass(frozen=True)
class PrincipalState:
    """Principal values (sorted descending) and the orthogonal eigenvector matrix."""

    values: np.ndarray
    rotation: np.ndarray


def small_strain(H) -> SymTensor:
    """Small strain from a displacement gradient: the symmetric part of H."""
    H = np.asarray(H, dtype=float)
    return SymTensor.from_matrix(0.5 * (H + H.T))


def _fix_eigvec_signs(Q: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (first on ties)."""
    Q = Q.copy()
    for k in range(Q.shape[1]):
        idx = int(np.argmax(np.abs(Q[:, k])))
        if Q[idx, k] < 0.0:
            Q[:, k] = -Q[:, k]
    return Q


def _spectral_2x2(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b, c = mat[0, 0], mat[1, 1], mat[0, 1]
    mean = 0.5 * (a + b)
    half_diff = 0.5 * (a - b)
    radius = np.hypot(half_diff, c)
    values = np.array([mean + radius, mean - radius])
    scale = max(abs(a), abs(b), abs(c), 1.0)
    if radius <= 1e-15 * scale:
        return values, np.eye(2)
    # either column of (A - lam2*I) spans the first eigenvector; take the
    # larger one (the other can vanish when the matrix is diagonal)
    if half_diff >= 0.0:
        v1 = np.array([half_diff + radius, c])
    else:
        v1 = np.array([c, radius - half_diff])
    v1 /= np.max(np.abs(v1))  # pre-scale so the norm cannot overflow
    v1 /= np.linalg.norm(v1)
    Q = np.column_stack([v1, [-v1[1], v1[0]]])
    return values, Q


def spectral_decompose(t: SymTensor) -> PrincipalState:
    """Eigenvalues (descending) and eigenvectors of a symmetric tensor.

    Deterministic for identical input: values sorted descending and in each
    eigenvector the entry of largest magnitude made positive (ties broken by
    lowest index).
    """
    mat = t.as_matrix()
    if t.dim == 2:
        values, Q = _spectral_2x2(mat)
    else:
        w, V = np.linalg.eigh(mat)
        order = np.argsort(w)[::-1]
        values, Q = w[order], V[:, order]
    return PrincipalState(values, _fix_eigvec_signs(Q))


def rotate_to_general(principal_values, Q) -> SymTensor:
    """Assemble Q diag(values) Q^T as a symmetric tensor.

    Rejects Q failing the orthogonality check ||Q^T Q - I||_inf > 1e-8.
    """
    values = np.asarray(principal_values, dtype=float)
    Q = np.asarray(Q, dtype=float)
    dim = len(values)
    err = np.max(np.abs(Q.T @ Q - np.eye(dim)))
    if err > _ORTHO_TOL:
        raise ValueError(f"rotation matrix is not orthogonal (||Q^T Q - I||_inf = {err:.3e})")
    return SymTensor.from_matrix((Q * values) @ Q.T)


def sym_to_voigt(t: SymTensor, engineering: bool = False) -> np.ndarray:
    """Voigt vector of a symmetric tensor; engineering doubles the shears."""
    v = t.components.copy()
    if engineering:
        v[t.dim:] *= 2.0
    return v


def voigt_to_sym(vec, dim: int, engineering: bool = False) -> SymTensor:
    v = np.asarray(vec, dtype=float).copy()
    if engineering:
        v[dim:] *= 0.5
    return SymTensor(dim, v)
