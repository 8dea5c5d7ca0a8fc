"""Proper orthogonal decomposition of stress snapshot matrices.

The basis comes from the SVD of the mean-deviated snapshot matrix; with the
mode count equal to the rank of that matrix the reconstruction is exact.
Coefficients are projections of the mean-deviated snapshots onto the basis,
so project followed by reconstruct is the identity on the snapshot space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_RANK_TOL_FACTOR = 1e-12


@dataclass
class PodBasis:
    """Mean snapshot, orthonormal basis columns and the mode count."""

    mean: np.ndarray
    modes: np.ndarray  # (d, m), orthonormal columns
    singular_values: np.ndarray = field(default=None)

    @property
    def mode_count(self) -> int:
        return self.modes.shape[1]

    def to_dict(self) -> dict:
        d = {"mean": self.mean.tolist(), "modes": self.modes.tolist()}
        if self.singular_values is not None:
            d["singular_values"] = self.singular_values.tolist()
        return d

    @classmethod
    def from_dict(cls, d) -> "PodBasis":
        sv = d.get("singular_values")
        return cls(
            np.array(d["mean"]),
            np.array(d["modes"]),
            None if sv is None else np.array(sv),
        )


def _fix_mode_signs(modes: np.ndarray) -> np.ndarray:
    """Largest-magnitude entry of each mode made positive (first on ties)."""
    modes = modes.copy()
    for k in range(modes.shape[1]):
        idx = int(np.argmax(np.abs(modes[:, k])))
        if modes[idx, k] < 0.0:
            modes[:, k] = -modes[:, k]
    return modes


def pod_fit(snapshots) -> PodBasis:
    """Fit mean and basis to a (d, M) snapshot matrix.

    The mode count is the rank of the deviation matrix, determined by the
    singular values above 1e-12 times the largest one. An all-identical
    snapshot set yields zero modes.
    """
    O = np.atleast_2d(np.asarray(snapshots, dtype=float))
    if O.shape[1] < 1:
        raise ValueError("snapshot matrix needs at least one column")
    mean = O.mean(axis=1)
    dev = O - mean[:, None]
    U, s, _ = np.linalg.svd(dev, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        m = 0
    else:
        m = int(np.count_nonzero(s > _RANK_TOL_FACTOR * s[0]))
    return PodBasis(mean, _fix_mode_signs(U[:, :m]), s[:m].copy())


def pod_project(snapshot, basis: PodBasis) -> np.ndarray:
    """Coefficients of a snapshot: modes^T (snapshot - mean)."""
    x = np.asarray(snapshot, dtype=float)
    if x.shape[0] != basis.mean.shape[0]:
        raise ValueError(
            f"snapshot has {x.shape[0]} components, basis expects {basis.mean.shape[0]}"
        )
    return basis.modes.T @ (x - basis.mean)


def pod_reconstruct(alpha, basis: PodBasis) -> np.ndarray:
    """mean + modes @ alpha."""
    a = np.asarray(alpha, dtype=float)
    if a.shape[0] != basis.mode_count:
        raise ValueError(f"expected {basis.mode_count} coefficients, got {a.shape[0]}")
    return basis.mean + basis.modes @ a


def decouple_sequences(snapshots, basis: PodBasis) -> np.ndarray:
    """Column-wise projection: row i of the result is the target of net i."""
    O = np.atleast_2d(np.asarray(snapshots, dtype=float))
    if O.shape[0] != basis.mean.shape[0]:
        raise ValueError(
            f"snapshots have {O.shape[0]} components, basis expects {basis.mean.shape[0]}"
        )
    return basis.modes.T @ (O - basis.mean[:, None])
