"""Strain-stress sequence generation along proportional loading-unloading paths.

Paths are characterised by the peak displacement of the driven corner of a
unit patch (so displacement equals principal strain numerically): circles of
radius r in 2D, spheres in 3D, and a tension-compression cycle in 1D. Each
path is evaluated step by step against a reference plasticity model while
carrying its state, and the accumulated-absolute-strain history rows are
appended to the strain sequence.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .materials import ElasticParams, PlasticState, neo_hookean_stress, vonmises_return_map
from .scaling import RowScaler
from .tensors import SymTensor


@dataclass(frozen=True)
class LoadingPath:
    """One proportional loading(-unloading) path on a circle or sphere."""

    dim: int
    radius: float
    phi: float
    theta: float | None = None
    n_points: int = 21
    unload: bool = True

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"path radius must be positive, got {self.radius}")
        if self.n_points < 3:
            raise ValueError(f"paths need at least 3 points, got {self.n_points}")
        if self.unload and (self.n_points % 2 != 0 or self.n_points < 4):
            raise ValueError(
                "unloading paths need an even number of points (>= 4) so the "
                "ramp retraces the loading grid exactly"
            )

    def direction(self) -> np.ndarray:
        """Unit loading direction, components sorted descending.

        Sorting fixes the component order once per path; along a proportional
        ramp the ordering never changes, so the sequences match the
        descending-eigenvalue convention used online.
        """
        if self.dim == 2:
            d = np.array([np.cos(self.phi), np.sin(self.phi)])
        else:
            st = np.sin(self.theta)
            d = np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])
        return np.sort(d)[::-1]

    def magnitudes(self) -> np.ndarray:
        """Displacement magnitude per step: linear ramp up, exact retrace down.

        Unloading stops one increment short of the origin. At zero strain the
        accumulated absolute strain cannot tell mirror-image peak directions
        apart (it only sees |increments|), so fully unloaded samples would
        pair identical inputs with different residual stresses and poison the
        regression targets.
        """
        if not self.unload:
            return np.linspace(0.0, self.radius, self.n_points)
        n_up = self.n_points // 2 + 1
        up = np.linspace(0.0, self.radius, n_up)
        return np.concatenate([up, up[-2:0:-1]])


@dataclass
class SequencePair:
    """Time-ordered strain sequence (with history rows) and stress sequence."""

    dim: int
    strain: np.ndarray  # (2*dim, np): principal strains then history rows
    stress: np.ndarray  # (dim, np)
    path: LoadingPath | None = None

    def __post_init__(self):
        if self.strain.shape[0] != 2 * self.stress.shape[0]:
            raise ValueError("strain must carry one history row per strain row")
        if self.strain.shape[1] != self.stress.shape[1]:
            raise ValueError("strain and stress sequences must share their length")


@dataclass
class TrainingSet:
    """Horizontal concatenation of sequence pairs plus per-row scaling records."""

    dim: int
    inputs: np.ndarray  # (2*dim, M)
    outputs: np.ndarray  # (dim, M)
    path_lengths: list = field(default_factory=list)


def gen_paths_2d(radii, n_angles, n_points=21, unload=True) -> list:
    """Paths with n_angles angles evenly spaced over [0, 2pi) per radius."""
    if not radii:
        raise ValueError("need at least one radius")
    if n_angles < 1:
        raise ValueError(f"n_angles must be >= 1, got {n_angles}")
    phis = 2.0 * np.pi * np.arange(n_angles) / n_angles
    return [
        LoadingPath(2, r, phi, n_points=n_points, unload=unload)
        for r in radii
        for phi in phis
    ]


def gen_paths_3d(radius, n_phi, n_theta, n_points=21, unload=True) -> list:
    """n_phi x n_theta paths on the sphere; theta sampled at cell midpoints."""
    if n_phi < 1 or n_theta < 1:
        raise ValueError("need at least one angle per direction")
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    thetas = np.pi * (np.arange(n_theta) + 0.5) / n_theta
    return [
        LoadingPath(3, radius, phi, theta=theta, n_points=n_points, unload=unload)
        for phi in phis
        for theta in thetas
    ]


def accumulated_abs_strain(eps_row) -> np.ndarray:
    """History row h with h[0] = h[1] = 0 and a one-step lag.

    h[t] accumulates the absolute increments |eps[i-1] - eps[i-2]| up to
    step t, i.e. it never includes the increment into the current step.
    """
    eps = np.asarray(eps_row, dtype=float)
    h = np.zeros_like(eps)
    if eps.size > 2:
        h[2:] = np.cumsum(np.abs(np.diff(eps)[:-1]))
    return h


def drive_patch(path: LoadingPath, params: ElasticParams, law) -> SequencePair:
    """Impose the path's homogeneous principal straining on the reference model."""
    direction = path.direction()
    mags = path.magnitudes()
    d = path.dim
    strain = np.empty((d, mags.size))
    stress = np.empty((d, mags.size))
    state = PlasticState.initial(d)
    for t, m in enumerate(mags):
        lam = m * direction
        try:
            sigma, state = vonmises_return_map(lam, state, params, law)
        except Exception as exc:
            raise RuntimeError(
                f"return mapping failed at step {t} of path "
                f"(r={path.radius}, phi={path.phi}, theta={path.theta}): {exc}"
            ) from exc
        strain[:, t] = lam
        stress[:, t] = sigma
    history = np.vstack([accumulated_abs_strain(strain[j]) for j in range(d)])
    return SequencePair(d, np.vstack([strain, history]), stress, path)


def uniaxial_cycle(increment, peak, params: ElasticParams, law) -> SequencePair:
    """1D tension-compression cycle 0 -> +P -> -P -> +P with the given step size.

    The number of steps per segment is round(peak / increment); the increment
    is kept exact, so the realised peak is n * increment.
    """
    if increment <= 0.0 or peak <= 0.0:
        raise ValueError("increment and peak must be positive")
    n = max(1, round(peak / increment))
    up = increment * np.arange(n + 1)
    top = up[-1]
    down = top - increment * np.arange(1, 2 * n + 1)
    back = -top + increment * np.arange(1, 2 * n + 1)
    eps = np.concatenate([up, down, back])
    stress = np.empty_like(eps)
    state = PlasticState.initial(1)
    for t, e in enumerate(eps):
        sigma, state = vonmises_return_map([e], state, params, law)
        stress[t] = sigma[0]
    strain = np.vstack([eps, accumulated_abs_strain(eps)])
    return SequencePair(1, strain, stress[None, :], None)


def assemble_training_set(pairs) -> TrainingSet:
    """Concatenate sequence pairs column-wise, preserving per-path order."""
    if not pairs:
        raise ValueError("need at least one sequence pair")
    dim = pairs[0].dim
    if any(p.dim != dim for p in pairs):
        raise ValueError("all sequence pairs must share the same dimension")
    inputs = np.hstack([p.strain for p in pairs])
    outputs = np.hstack([p.stress for p in pairs])
    return TrainingSet(dim, inputs, outputs, [p.strain.shape[1] for p in pairs])


def scale_fit(rows, limits=(-1.0, 1.0)) -> RowScaler:
    return RowScaler.fit(rows, limits=limits)


def scale_apply(scaler: RowScaler, rows) -> np.ndarray:
    return scaler.apply(rows)


def scale_invert(scaler: RowScaler, rows) -> np.ndarray:
    return scaler.invert(rows)


def neo_hookean_grid(
    params: ElasticParams,
    b11_range=(0.7, 1.4, 15),
    b22_range=(0.7, 1.4, 15),
    b12_range=(-0.2, 0.2, 9),
):
    """Plane-strain hyperelastic sample grid.

    Inputs are (J, b11, b22, b12) on an equally spaced grid with
    J = sqrt(b11*b22 - b12^2) (b33 = 1 under plane strain); outputs are the
    matching Cauchy stress components (s11, s22, s12).

    Returns (inputs (4, M), outputs (3, M)).
    """
    b11s = np.linspace(*b11_range)
    b22s = np.linspace(*b22_range)
    b12s = np.linspace(*b12_range)
    inputs, outputs = [], []
    for b11 in b11s:
        for b22 in b22s:
            for b12 in b12s:
                det = b11 * b22 - b12 * b12
                if det <= 0.0:
                    continue  # not a valid plane-strain state
                J = np.sqrt(det)
                b = SymTensor(2, np.array([b11, b22, b12]))
                sig = neo_hookean_stress(b, J, params)
                inputs.append([J, b11, b22, b12])
                outputs.append(sig.components)
    return np.array(inputs).T, np.array(outputs).T


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

def sequence_header(dim: int) -> list:
    return (
        ["path_id", "step"]
        + [f"eps_{j + 1}" for j in range(dim)]
        + [f"eps_acc_{j + 1}" for j in range(dim)]
        + [f"sig_{j + 1}" for j in range(dim)]
    )


def write_dataset_csv(path, pairs) -> None:
    """One row per time step; columns named per component; '.' decimals, UTF-8."""
    dim = pairs[0].dim
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(sequence_header(dim))
        for pid, pair in enumerate(pairs):
            for t in range(pair.strain.shape[1]):
                writer.writerow(
                    [pid, t]
                    + [repr(v) for v in pair.strain[:, t]]
                    + [repr(v) for v in pair.stress[:, t]]
                )


def read_dataset_csv(path) -> list:
    """Rebuild sequence pairs from a dataset CSV (path provenance is not stored)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        dim = sum(1 for name in header if name.startswith("eps_") and "acc" not in name)
        rows = [(int(r[0]), [float(v) for v in r[2:]]) for r in reader]
    pairs = []
    for pid in sorted({pid for pid, _ in rows}):
        block = np.array([vals for p, vals in rows if p == pid]).T
        pairs.append(SequencePair(dim, block[: 2 * dim], block[2 * dim :]))
    return pairs


def write_grid_csv(path, inputs, outputs) -> None:
    names = ["J", "b_11", "b_22", "b_12", "sig_11", "sig_22", "sig_12"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for k in range(inputs.shape[1]):
            writer.writerow([repr(v) for v in inputs[:, k]] + [repr(v) for v in outputs[:, k]])


def read_grid_csv(path):
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    return data[:, :4].T.copy(), data[:, 4:].T.copy()
