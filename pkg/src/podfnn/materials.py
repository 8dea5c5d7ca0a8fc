"""Reference constitutive models used as data-generation oracles and FEM baselines.

Neo-Hookean hyperelasticity and small-strain von Mises plasticity with
isotropic hardening, solved by implicit radial return. The plasticity model
comes in two equivalent flavours: a principal-space update driving the
sequence data generation, and a general-space (Voigt) update with the
closed-form consistent tangent for use at FE Gauss points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensors import VOIGT_PAIRS, SymTensor

_SQ32 = np.sqrt(1.5)


class ReturnMappingError(RuntimeError):
    """Scalar Newton on the consistency condition failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ElasticParams:
    """Isotropic elasticity constants. E > 0 and -1 < nu < 0.5."""

    E: float
    nu: float

    def __post_init__(self):
        if self.E <= 0.0:
            raise ValueError(f"Young's modulus must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ValueError(f"Poisson ratio must lie in (-1, 0.5), got {self.nu}")

    @property
    def lam(self) -> float:
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def mu(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))


@dataclass(frozen=True)
class LinearHardening:
    """sigma_y(gamma) = sigma_y0 + H_iso * gamma."""

    sigma_y0: float
    H_iso: float = 0.0

    def sigma_y(self, gamma: float) -> float:
        return self.sigma_y0 + self.H_iso * gamma

    def dsigma_y(self, gamma: float) -> float:
        return self.H_iso


@dataclass(frozen=True)
class ExponentialHardening:
    """sigma_y(gamma) = y0 + y0 * (offset + gamma)^exponent.

    The small offset keeps the initial yield stress finite and the slope
    bounded at gamma = 0; it is a stored parameter, not a constant.
    """

    y0: float
    offset: float = 2.0e-5
    exponent: float = 0.3

    def sigma_y(self, gamma: float) -> float:
        return self.y0 + self.y0 * (self.offset + gamma) ** self.exponent

    def dsigma_y(self, gamma: float) -> float:
        return self.y0 * self.exponent * (self.offset + gamma) ** (self.exponent - 1.0)


def yield_stress(law, gamma: float) -> float:
    """Current yield stress of a hardening law; gamma must be non-negative."""
    if gamma < 0.0:
        raise ValueError(f"accumulated plastic multiplier must be >= 0, got {gamma}")
    return law.sigma_y(gamma)


@dataclass
class PlasticState:
    """Principal plastic strain and the accumulated plastic multiplier.

    The plastic strain is stored as a 3-vector for the multi-axial models
    (trace-free under deviatoric flow) and a 1-vector for the uniaxial rod.
    """

    plastic_strain: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        self.plastic_strain = np.asarray(self.plastic_strain, dtype=float)

    @classmethod
    def initial(cls, dim: int) -> "PlasticState":
        return cls(np.zeros(1 if dim == 1 else 3), 0.0)


def _solve_dgamma(f_trial, slope, gamma_old, law, tol_f):
    """Solve f_trial - slope*dg - (sigma_y(gamma_old+dg) - sigma_y(gamma_old)) = 0.

    Scalar Newton with a bisection safeguard; g is strictly decreasing in dg,
    so the bracket [0, f_trial/slope] always contains the root.
    """
    def g(dg):
        return f_trial - slope * dg - (law.sigma_y(gamma_old + dg) - law.sigma_y(gamma_old))

    lo, hi = 0.0, f_trial / slope
    dg = f_trial / (slope + law.dsigma_y(gamma_old))
    dg = min(max(dg, lo), hi)
    for _ in range(50):
        res = g(dg)
        if abs(res) <= tol_f:
            return dg
        if res > 0.0:
            lo = dg
        else:
            hi = dg
        step = res / (slope + law.dsigma_y(gamma_old + dg))
        dg_new = dg + step
        if not lo < dg_new < hi:
            dg_new = 0.5 * (lo + hi)
        dg = dg_new
    raise ReturnMappingError(
        f"consistency Newton did not converge within 50 iterations (residual {g(dg):.3e})",
        residual=g(dg),
    )


def _return_map_3(lam_total, state, p, law, tol_f):
    eps_e = lam_total - state.plastic_strain
    trace = eps_e.sum()
    sigma_tr = p.lam * trace + 2.0 * p.mu * eps_e
    s_tr = sigma_tr - sigma_tr.mean()
    q_tr = _SQ32 * np.linalg.norm(s_tr)
    f_tr = q_tr - law.sigma_y(state.gamma)
    if f_tr <= tol_f:
        return sigma_tr, PlasticState(state.plastic_strain.copy(), state.gamma)
    dgamma = _solve_dgamma(f_tr, 3.0 * p.mu, state.gamma, law, tol_f)
    n_hat = s_tr / np.linalg.norm(s_tr)
    dep = dgamma * _SQ32 * n_hat
    sigma = sigma_tr - 2.0 * p.mu * dep
    return sigma, PlasticState(state.plastic_strain + dep, state.gamma + dgamma)


def _return_map_rod(eps, state, p, law, tol_f):
    sigma_tr = p.E * (eps - state.plastic_strain[0])
    f_tr = abs(sigma_tr) - law.sigma_y(state.gamma)
    if f_tr <= tol_f:
        return np.array([sigma_tr]), PlasticState(state.plastic_strain.copy(), state.gamma)
    dgamma = _solve_dgamma(f_tr, p.E, state.gamma, law, tol_f)
    dep = dgamma * np.sign(sigma_tr)
    sigma = sigma_tr - p.E * dep
    return np.array([sigma]), PlasticState(state.plastic_strain + dep, state.gamma + dgamma)


def vonmises_return_map(total_principal, state, p, law, tol_f=None):
    """One implicit elastoplastic step in principal space.

    Parameters
    ----------
    total_principal : array of length 1, 2 or 3
        Total principal strain. Length 1 selects the uniaxial rod idiom
        (sigma = E*eps elastic, |sigma| - sigma_y yield); length 2 is treated
        as plane strain with a zero out-of-plane principal strain; length 3
        is the full triaxial case.
    state : PlasticState
        Last converged state (not modified).
    p, law : ElasticParams, hardening law

    Returns
    -------
    (sigma, new_state)
        Principal stress of the same length as the input and the updated
        plastic state.
    """
    lam_total = np.asarray(total_principal, dtype=float)
    d = lam_total.size
    if tol_f is None:
        tol_f = 1e-10 * law.sigma_y(0.0)
    if d == 1:
        return _return_map_rod(lam_total[0], state, p, law, tol_f)
    if d == 2:
        sigma3, new_state = _return_map_3(np.append(lam_total, 0.0), state, p, law, tol_f)
        return sigma3[:2], new_state
    if d == 3:
        return _return_map_3(lam_total, state, p, law, tol_f)
    raise ValueError(f"total_principal must have length 1, 2 or 3, got {d}")


def neo_hookean_stress(b: SymTensor, J: float, p: ElasticParams) -> SymTensor:
    """Cauchy stress of the compressible neo-Hookean model.

    sigma = (lambda / 2J) (J^2 - 1) I + (mu / J) (b - I), with b the left
    Cauchy-Green tensor (symmetric positive definite) and J > 0.
    """
    if J <= 0.0:
        raise ValueError(f"volume ratio J must be positive, got {J}")
    mat = b.as_matrix()
    if np.linalg.eigvalsh(mat).min() <= 0.0:
        raise ValueError("left Cauchy-Green tensor must be positive definite")
    eye = np.eye(b.dim)
    sigma = 0.5 * (p.lam / J) * (J * J - 1.0) * eye + (p.mu / J) * (mat - eye)
    return SymTensor.from_matrix(sigma)


# ---------------------------------------------------------------------------
# Gauss-point adapters for the FE solver
# ---------------------------------------------------------------------------

def _voigt_to_mat3(v):
    m = np.zeros((3, 3))
    for comp, (i, j) in zip(v, VOIGT_PAIRS[3]):
        m[i, j] = comp
        m[j, i] = comp
    return m


def _mat3_to_voigt(m):
    return np.array([m[i, j] for i, j in VOIGT_PAIRS[3]])


class VonMisesMaterial:
    """Small-strain von Mises model in general (Voigt) space for FE use.

    State per Gauss point is the full plastic strain tensor plus gamma, so
    the update stays objective when principal axes rotate between steps.
    2D problems are handled as plane strain by padding to the 3D update.
    Strain input uses engineering shear; stress output uses tensor shear.
    """

    def __init__(self, params: ElasticParams, law, dim: int):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        self.params = params
        self.law = law
        self.dim = dim
        self.tol_f = 1e-10 * law.sigma_y(0.0)

    def initial_state(self):
        return PlasticState(np.zeros(6), 0.0)  # plastic strain in 3D Voigt (tensor shear)

    def _strain_mat(self, eps_voigt_eng):
        eps = np.zeros((3, 3))
        pairs = VOIGT_PAIRS[self.dim]
        for comp, (i, j) in zip(np.asarray(eps_voigt_eng, dtype=float), pairs):
            if i == j:
                eps[i, j] = comp
            else:
                eps[i, j] = 0.5 * comp
                eps[j, i] = 0.5 * comp
        return eps

    def _update(self, eps_mat, state):
        p, law = self.params, self.law
        eps_e = eps_mat - _voigt_to_mat3(state.plastic_strain)
        sigma_tr = p.lam * np.trace(eps_e) * np.eye(3) + 2.0 * p.mu * eps_e
        s_tr = sigma_tr - np.trace(sigma_tr) / 3.0 * np.eye(3)
        norm_s = np.linalg.norm(s_tr)
        q_tr = _SQ32 * norm_s
        f_tr = q_tr - law.sigma_y(state.gamma)
        if f_tr <= self.tol_f:
            return sigma_tr, state, None
        dgamma = _solve_dgamma(f_tr, 3.0 * p.mu, state.gamma, law, self.tol_f)
        n_hat = s_tr / norm_s
        dep = dgamma * _SQ32 * n_hat
        sigma = sigma_tr - 2.0 * p.mu * dep
        new_state = PlasticState(
            state.plastic_strain + _mat3_to_voigt(dep), state.gamma + dgamma
        )
        return sigma, new_state, (dgamma, q_tr, n_hat)

    def stress(self, eps_voigt_eng, state):
        sigma, new_state, _ = self._update(self._strain_mat(eps_voigt_eng), state)
        pairs = VOIGT_PAIRS[self.dim]
        return np.array([sigma[i, j] for i, j in pairs]), new_state

    def tangent(self, eps_voigt_eng, state):
        """Consistent elastoplastic tangent for the radial-return update.

        C = C_e - 6 mu^2 [ dg/q_tr * I_dev + (1/(3mu+H') - dg/q_tr) n (x) n ]
        assembled column-wise by applying the fourth-order tensor to unit
        engineering strain perturbations.
        """
        p = self.params
        eps_mat = self._strain_mat(eps_voigt_eng)
        _, new_state, plastic = self._update(eps_mat, state)
        pairs = VOIGT_PAIRS[self.dim]
        nv = len(pairs)
        C = np.zeros((nv, nv))
        if plastic is not None:
            dgamma, q_tr, n_hat = plastic
            hprime = self.law.dsigma_y(new_state.gamma)
            c1 = 6.0 * p.mu**2 * dgamma / q_tr
            c2 = 6.0 * p.mu**2 * (1.0 / (3.0 * p.mu + hprime) - dgamma / q_tr)
        for col, (k, l) in enumerate(pairs):
            deps = np.zeros((3, 3))
            if k == l:
                deps[k, l] = 1.0
            else:
                deps[k, l] = 0.5  # unit engineering shear
                deps[l, k] = 0.5
            dsig = p.lam * np.trace(deps) * np.eye(3) + 2.0 * p.mu * deps
            if plastic is not None:
                deps_dev = deps - np.trace(deps) / 3.0 * np.eye(3)
                dsig = dsig - c1 * deps_dev - c2 * np.sum(n_hat * deps) * n_hat
            C[:, col] = [dsig[i, j] for i, j in pairs]
        return C


class NeoHookeanMaterial:
    """Finite-strain neo-Hookean material for the FE solver (no state)."""

    def __init__(self, params: ElasticParams, dim: int):
        self.params = params
        self.dim = dim

    def cauchy(self, b_mat, J):
        eye = np.eye(self.dim)
        return 0.5 * (self.params.lam / J) * (J * J - 1.0) * eye + (
            self.params.mu / J
        ) * (b_mat - eye)
