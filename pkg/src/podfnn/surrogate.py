"""Trained-network constitutive models and their history-variable state.

Two surrogates are assembled from trained networks: a direct stress network
for hyperelasticity (inputs J and the left Cauchy-Green components) and the
POD-decoupled plasticity surrogate, which predicts one basis coefficient per
network from the sorted principal strains plus their accumulated-absolute
history rows, reconstructs the principal stress from the basis, and rotates
it back to general axes with the strain eigenvectors.

Gauss-point history advances only when the caller commits a converged load
step, so stress stays a fixed function of strain during each equilibrium
solve.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fnn
from .pod import PodBasis, pod_reconstruct
from .scaling import RowScaler
from .tensors import (
    VOIGT_PAIRS,
    SymTensor,
    rotate_to_general,
    spectral_decompose,
    sym_to_voigt,
    voigt_to_sym,
)


class ExtrapolationWarning(UserWarning):
    """A scaled network input left the trained range by a wide margin."""


class SurrogateEvaluationError(RuntimeError):
    """A network produced a non-finite output."""


_EXTRAP_LIMIT = 1.2


@dataclass
class GaussHistory:
    """Accumulated-absolute-strain state of one material point.

    eps_acc holds the history value at the last committed step; the trial
    value for the running step adds the increment between the two previous
    committed strains. The first two steps carry no history by definition,
    which n_committed tracks.
    """

    eps_prev: np.ndarray
    eps_prev2: np.ndarray
    eps_acc: np.ndarray
    n_committed: int = 0

    @classmethod
    def initial(cls, dim: int) -> "GaussHistory":
        return cls(np.zeros(dim), np.zeros(dim), np.zeros(dim), 0)

    def copy(self) -> "GaussHistory":
        return GaussHistory(
            self.eps_prev.copy(), self.eps_prev2.copy(), self.eps_acc.copy(), self.n_committed
        )


def trial_acc(hist: GaussHistory) -> np.ndarray:
    """History input for the step currently being solved."""
    if hist.n_committed < 2:
        return np.zeros_like(hist.eps_acc)
    return hist.eps_acc + np.abs(hist.eps_prev - hist.eps_prev2)


def commit_history(hist: GaussHistory, eps_principal_committed) -> GaussHistory:
    """Advance the history by one converged step (pure, returns a new state)."""
    eps = np.asarray(eps_principal_committed, dtype=float)
    acc = hist.eps_acc.copy()
    if hist.n_committed >= 2:
        acc += np.abs(hist.eps_prev - hist.eps_prev2)
    return GaussHistory(eps.copy(), hist.eps_prev.copy(), acc, hist.n_committed + 1)


@dataclass
class PodFnnSurrogate:
    """One single-output network per basis coefficient plus the basis itself."""

    dim: int
    basis: PodBasis
    nets: list
    input_scaler: RowScaler
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.nets) != self.basis.mode_count:
            raise ValueError(
                f"{len(self.nets)} networks for {self.basis.mode_count} basis modes"
            )
        for net in self.nets:
            if net.layer_sizes[0] != 2 * self.dim:
                raise ValueError(
                    f"network input width {net.layer_sizes[0]} does not match 2*dim"
                )

    def predict_coeffs(self, strain_rows) -> np.ndarray:
        """Coefficient rows for a (2*dim, n) matrix of strain + history inputs."""
        scaled = self.input_scaler.apply(strain_rows)
        coeffs = np.empty((len(self.nets), scaled.shape[1]))
        for i, net in enumerate(self.nets):
            out = fnn.forward(net, scaled.T)[:, 0]
            coeffs[i] = net.output_scaler.invert(out[None, :])[0]
        return coeffs

    def predict_sequence(self, strain_rows) -> np.ndarray:
        """Principal stress sequence for strain + history rows (offline replay)."""
        coeffs = self.predict_coeffs(np.atleast_2d(strain_rows))
        return self.basis.mean[:, None] + self.basis.modes @ coeffs


def _predict_principal(model: PodFnnSurrogate, lam, acc):
    x = np.concatenate([lam, acc])
    xs = model.input_scaler.apply(x)
    if np.max(np.abs(xs)) > _EXTRAP_LIMIT:
        warnings.warn(
            f"scaled surrogate input reached {np.max(np.abs(xs)):.2f}, outside the "
            f"trained range",
            ExtrapolationWarning,
            stacklevel=3,
        )
    alpha = np.empty(len(model.nets))
    for i, net in enumerate(model.nets):
        out = fnn.forward(net, xs)
        alpha[i] = net.output_scaler.invert(np.atleast_1d(out))[0]
    sigma = pod_reconstruct(alpha, model.basis)
    if not np.all(np.isfinite(sigma)):
        raise SurrogateEvaluationError(
            f"non-finite stress prediction for principal strain {lam}"
        )
    return sigma


def podfnn_stress(model: PodFnnSurrogate, eps: SymTensor, hist: GaussHistory):
    """Stress at a material point plus the history candidate for committing.

    The strain is decomposed into sorted principal values and eigenvectors,
    the networks are evaluated on (principal strains, trial history), the
    reconstructed principal stress is rotated back with the eigenvectors.
    The returned history is what the state becomes if the caller commits
    this step; it is discarded when the load step is re-solved.
    """
    if not np.all(np.isfinite(eps.components)):
        raise SurrogateEvaluationError(f"non-finite strain input {eps.components}")
    ps = spectral_decompose(eps)
    acc = trial_acc(hist)
    sigma_principal = _predict_principal(model, ps.values, acc)
    sigma = rotate_to_general(sigma_principal, ps.rotation)
    return sigma, commit_history(hist, ps.values)


def constitutive_tangent(stress_fn, eps: SymTensor, h: float | None = None) -> np.ndarray:
    """Central-difference tangent d(sigma)/d(eps) in Voigt form.

    stress_fn maps SymTensor -> SymTensor at fixed history/state. Strain
    perturbations use engineering shear on the Voigt components, so the
    result pairs with the FE B-matrix convention. h defaults to
    1e-6 * max(1, ||eps||_inf).
    """
    dim = eps.dim
    if h is None:
        h = 1e-6 * max(1.0, float(np.max(np.abs(eps.components))))
    if h <= 0.0:
        raise ValueError("finite-difference step must be positive")
    eps_v = sym_to_voigt(eps, engineering=True)
    nv = len(VOIGT_PAIRS[dim])
    C = np.empty((nv, nv))
    for j in range(nv):
        dv = np.zeros(nv)
        dv[j] = h
        sig_plus = sym_to_voigt(stress_fn(voigt_to_sym(eps_v + dv, dim, engineering=True)))
        sig_minus = sym_to_voigt(stress_fn(voigt_to_sym(eps_v - dv, dim, engineering=True)))
        C[:, j] = (sig_plus - sig_minus) / (2.0 * h)
    return C


def podfnn_tangent(
    model: PodFnnSurrogate, eps: SymTensor, hist: GaussHistory,
    h: float | None = None, mode: str = "spectral",
) -> np.ndarray:
    """Tangent for the plasticity surrogate at fixed history.

    mode "spectral" (the solver default) differentiates the networks in
    principal-strain space and adds the eigenvector rotation coupling of an
    isotropic tensor function, switching to the derivative-based limit when
    eigenvalues nearly coincide. This never differences the composite map
    across an eigenvalue crossing, where the networks' small departure from
    exact isotropy would otherwise blow up a divided difference.

    mode "fixed_q" drops the rotation coupling (cheap, but no shear
    stiffness at degenerate states); mode "fd" central-differences the full
    stress evaluation and is exact wherever the eigenvalue gaps stay large
    against the step.
    """
    if mode == "fd":
        return constitutive_tangent(
            lambda e: podfnn_stress(model, e, hist)[0], eps, h=h
        )
    if mode not in ("spectral", "fixed_q"):
        raise ValueError(f"unknown tangent mode {mode!r}")
    d = model.dim
    ps = spectral_decompose(eps)
    lam, Q = ps.values, ps.rotation
    acc = trial_acc(hist)
    scale = max(1.0, float(np.max(np.abs(lam))))
    step = h if h is not None else 1e-6 * scale
    sig = _predict_principal(model, lam, acc)
    dSig_dLam = np.empty((d, d))
    for j in range(d):
        dlam = np.zeros(d)
        dlam[j] = step
        plus = _predict_principal(model, lam + dlam, acc)
        minus = _predict_principal(model, lam - dlam, acc)
        dSig_dLam[:, j] = (plus - minus) / (2.0 * step)

    gap_tol = 1e-4 * scale
    pairs = VOIGT_PAIRS[d]
    nv = len(pairs)
    C = np.zeros((nv, nv))
    for col, (k, l) in enumerate(pairs):
        deps = np.zeros((d, d))
        if k == l:
            deps[k, l] = 1.0
        else:
            deps[k, l] = 0.5  # unit engineering shear
            deps[l, k] = 0.5
        deps_p = Q.T @ deps @ Q  # perturbation seen in the principal frame
        dsig_p = np.diag(dSig_dLam @ np.diag(deps_p))
        if mode == "spectral":
            for a in range(d):
                for b in range(a + 1, d):
                    gap = lam[a] - lam[b]
                    if abs(gap) >= gap_tol:
                        g = (sig[a] - sig[b]) / gap
                    else:
                        g = 0.5 * (
                            dSig_dLam[a, a] + dSig_dLam[b, b]
                            - dSig_dLam[a, b] - dSig_dLam[b, a]
                        )
                    dsig_p[a, b] = dsig_p[b, a] = g * deps_p[a, b]
        dsig = Q @ dsig_p @ Q.T
        C[:, col] = [dsig[i, j] for i, j in pairs]
    return C


@dataclass
class HyperFnnModel:
    """Direct stress network for hyperelasticity: inputs (J, b components)."""

    net: fnn.FnnModel
    dim: int = 2

    def __post_init__(self):
        n_b = len(VOIGT_PAIRS[self.dim])
        if self.net.layer_sizes[0] != 1 + n_b:
            raise ValueError(
                f"network input width {self.net.layer_sizes[0]} does not match "
                f"1 + {n_b} strain inputs"
            )


def hyper_stress(model: HyperFnnModel, b: SymTensor, J: float) -> SymTensor:
    """Predicted Cauchy stress: scale inputs, run the net, unscale outputs."""
    x = np.concatenate([[J], b.components])
    xs = model.net.input_scaler.apply(x)
    if np.max(np.abs(xs)) > _EXTRAP_LIMIT:
        warnings.warn(
            f"scaled stress-network input reached {np.max(np.abs(xs)):.2f}, outside "
            f"the trained range",
            ExtrapolationWarning,
            stacklevel=2,
        )
    out = fnn.forward(model.net, xs)
    sig = model.net.output_scaler.invert(out)
    if not np.all(np.isfinite(sig)):
        raise SurrogateEvaluationError(f"non-finite stress prediction at J={J}")
    return SymTensor(model.dim, sig)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def surrogate_to_dict(model) -> dict:
    if isinstance(model, PodFnnSurrogate):
        return {
            "kind": "podfnn",
            "dim": model.dim,
            "basis": model.basis.to_dict(),
            "nets": [fnn.model_to_dict(net) for net in model.nets],
            "scalers": {"input": model.input_scaler.to_dict()},
            "provenance": model.provenance,
        }
    if isinstance(model, HyperFnnModel):
        return {"kind": "hyperelastic_fnn", "dim": model.dim, "net": fnn.model_to_dict(model.net)}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def surrogate_from_dict(d):
    kind = d.get("kind")
    if kind == "podfnn":
        return PodFnnSurrogate(
            dim=int(d["dim"]),
            basis=PodBasis.from_dict(d["basis"]),
            nets=[fnn.model_from_dict(nd) for nd in d["nets"]],
            input_scaler=RowScaler.from_dict(d["scalers"]["input"]),
            provenance=d.get("provenance", {}),
        )
    if kind == "hyperelastic_fnn":
        return HyperFnnModel(net=fnn.model_from_dict(d["net"]), dim=int(d["dim"]))
    raise ValueError(f"unknown surrogate kind {kind!r}")


def save_surrogate(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(surrogate_to_dict(model), fh)


def load_surrogate(path):
    with open(path, encoding="utf-8") as fh:
        return surrogate_from_dict(json.load(fh))
