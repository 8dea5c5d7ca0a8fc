"""Residual/tangent assembly and the incremental Newton solution loop.

Small-strain problems assemble K = sum B^T C B with the constitutive tangent
of a pluggable Gauss-point material; finite-strain (hyperelastic) problems
compute internal forces in the current configuration and build element
tangents by central differencing of the element force vector. Material state
commits only when a load step converges; a failed step is retried with up to
four load-increment bisections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .. import surrogate as sg
from ..materials import VonMisesMaterial  # noqa: F401  (re-exported for configs)
from ..tensors import SymTensor, sym_to_voigt, voigt_to_sym
from .elements import EDGE_FAMILY
from .mesh import Mesh


class NewtonError(RuntimeError):
    """Equilibrium iteration failed after all load-increment bisections."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# Gauss-point materials on top of the constitutive modules
# ---------------------------------------------------------------------------

class PodFnnFemMaterial:
    """Adapter running the POD network surrogate at Gauss points.

    The spectral tangent is the default; "fd" differences the composite
    stress map and is only reliable while every Gauss point keeps its
    principal strains well separated.
    """

    def __init__(self, model: sg.PodFnnSurrogate, tangent_mode="spectral"):
        self.model = model
        self.dim = model.dim
        self.tangent_mode = tangent_mode

    def initial_state(self):
        return sg.GaussHistory.initial(self.dim)

    def stress(self, eps_voigt_eng, state):
        eps = voigt_to_sym(eps_voigt_eng, self.dim, engineering=True)
        sigma, committed = sg.podfnn_stress(self.model, eps, state)
        return sym_to_voigt(sigma), committed

    def tangent(self, eps_voigt_eng, state):
        eps = voigt_to_sym(eps_voigt_eng, self.dim, engineering=True)
        return sg.podfnn_tangent(self.model, eps, state, mode=self.tangent_mode)


class NeoHookeanFemMaterial:
    """Analytic neo-Hookean stress for the finite-strain element path."""

    kinematics = "finite"

    def __init__(self, params, dim=2):
        self.params = params
        self.dim = dim

    def cauchy(self, b_mat, J):
        eye = np.eye(self.dim)
        lam, mu = self.params.lam, self.params.mu
        return 0.5 * (lam / J) * (J * J - 1.0) * eye + (mu / J) * (b_mat - eye)


class HyperFnnFemMaterial:
    """Trained stress network evaluated on (J, b) at Gauss points."""

    kinematics = "finite"

    def __init__(self, model: sg.HyperFnnModel):
        self.model = model
        self.dim = model.dim

    def cauchy(self, b_mat, J):
        return sg.hyper_stress(self.model, SymTensor.from_matrix(b_mat), J).as_matrix()


# ---------------------------------------------------------------------------
# Boundary conditions and problem container
# ---------------------------------------------------------------------------

@dataclass
class BoundarySpec:
    """Fixed dofs, factor-scaled prescribed displacements and edge tractions.

    The schedule lists the load factor of every step; prescribed values and
    traction magnitudes scale linearly with it.
    """

    fixed: list = field(default_factory=list)  # (node, comp)
    prescribed: list = field(default_factory=list)  # (node, comp, amplitude)
    tractions: list = field(default_factory=list)  # (edge nodes, direction, line load)
    schedule: np.ndarray = field(default_factory=lambda: np.linspace(0.05, 1.0, 20))

    def constrained_dofs(self, dim):
        dofs = [n * dim + c for n, c in self.fixed]
        dofs += [n * dim + c for n, c, _ in self.prescribed]
        if len(set(dofs)) != len(dofs):
            raise ValueError("a dof appears in more than one boundary condition")
        return np.array(sorted(dofs), dtype=int)


@dataclass
class Problem:
    mesh: Mesh
    bcs: BoundarySpec
    material: object
    kinematics: str = "small"  # "small" | "finite"
    tracked_nodes: list = field(default_factory=list)
    reaction_dofs: list = field(default_factory=list)
    name: str = ""


@dataclass
class SolveOptions:
    tol_r: float = 1e-8
    max_iter: int = 25
    max_bisect: int = 4


@dataclass
class SolveReport:
    steps: list = field(default_factory=list)
    tracked: dict = field(default_factory=dict)  # node -> list of (factor, u components)
    reactions: list = field(default_factory=list)  # (factor, summed reaction)
    converged: bool = True

    def to_dict(self):
        return {
            "converged": self.converged,
            "steps": self.steps,
            "tracked": {str(n): rows for n, rows in self.tracked.items()},
            "reactions": self.reactions,
        }


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def _b_matrix_small(dN_x, dim):
    n = dN_x.shape[0]
    if dim == 2:
        B = np.zeros((3, 2 * n))
        B[0, 0::2] = dN_x[:, 0]
        B[1, 1::2] = dN_x[:, 1]
        B[2, 0::2] = dN_x[:, 1]
        B[2, 1::2] = dN_x[:, 0]
    else:
        B = np.zeros((6, 3 * n))
        B[0, 0::3] = dN_x[:, 0]
        B[1, 1::3] = dN_x[:, 1]
        B[2, 2::3] = dN_x[:, 2]
        B[3, 0::3] = dN_x[:, 1]
        B[3, 1::3] = dN_x[:, 0]
        B[4, 1::3] = dN_x[:, 2]
        B[4, 2::3] = dN_x[:, 1]
        B[5, 0::3] = dN_x[:, 2]
        B[5, 2::3] = dN_x[:, 0]
    return B


def _element_geometry(mesh, conn):
    coords = mesh.nodes[conn]
    fam = mesh.family
    out = []
    for xi, w in zip(fam.gauss_points, fam.gauss_weights):
        _, dN = fam.shape(xi)
        Jmat = dN.T @ coords
        det = np.linalg.det(Jmat)
        dN_x = dN @ np.linalg.inv(Jmat)
        out.append((dN_x, w * det))
    return out


def _element_internal_small(mesh, conn, u_e, material, gp_states):
    dim = mesh.dim
    f = np.zeros(u_e.size)
    new_states = []
    for (dN_x, wdet), state in zip(_element_geometry(mesh, conn), gp_states):
        B = _b_matrix_small(dN_x, dim)
        eps = B @ u_e
        sig, new_state = material.stress(eps, state)
        f += B.T @ sig * wdet
        new_states.append(new_state)
    return f, new_states


def _element_internal_finite(mesh, conn, u_e, material):
    dim = mesh.dim
    coords = mesh.nodes[conn]
    fam = mesh.family
    u_mat = u_e.reshape(-1, dim)
    f = np.zeros(u_e.size)
    for xi, w in zip(fam.gauss_points, fam.gauss_weights):
        _, dN = fam.shape(xi)
        Jmat = dN.T @ coords
        det_ref = np.linalg.det(Jmat)
        dN_X = dN @ np.linalg.inv(Jmat)
        F = np.eye(dim) + u_mat.T @ dN_X
        J = np.linalg.det(F)
        if J <= 0.0:
            raise FloatingPointError(f"negative volume ratio J={J:.3e} in element")
        b = F @ F.T
        sigma = material.cauchy(b, J)
        dN_x = dN_X @ np.linalg.inv(F)  # spatial shape gradients
        B = _b_matrix_small(dN_x, dim)
        sig_v = sym_to_voigt(SymTensor.from_matrix(sigma))
        f += B.T @ sig_v * (w * det_ref * J)
    return f


def assemble_internal_force(mesh, u, material, states, kinematics="small"):
    """Global internal force; also returns trial Gauss states (small strain)."""
    dim = mesh.dim
    f_int = np.zeros(mesh.n_nodes * dim)
    trial = None
    if kinematics == "small":
        trial = []
        for e, conn in enumerate(mesh.elements):
            dofs = (conn[:, None] * dim + np.arange(dim)).ravel()
            try:
                f_e, new_states = _element_internal_small(
                    mesh, conn, u[dofs], material, states[e]
                )
            except Exception as exc:
                raise type(exc)(f"element {e}: {exc}") from exc
            f_int[dofs] += f_e
            trial.append(new_states)
    else:
        for e, conn in enumerate(mesh.elements):
            dofs = (conn[:, None] * dim + np.arange(dim)).ravel()
            f_int[dofs] += _element_internal_finite(mesh, conn, u[dofs], material)
    return f_int, trial


def assemble_residual(mesh, u, material, states, f_ext, kinematics="small"):
    """R = f_ext - internal force; trial states returned alongside."""
    f_int, trial = assemble_internal_force(mesh, u, material, states, kinematics)
    return f_ext - f_int, trial


def assemble_tangent(mesh, u, material, states, kinematics="small"):
    """Sparse global tangent stiffness."""
    dim = mesh.dim
    rows, cols, vals = [], [], []
    for e, conn in enumerate(mesh.elements):
        dofs = (conn[:, None] * dim + np.arange(dim)).ravel()
        u_e = u[dofs]
        if kinematics == "small":
            K_e = np.zeros((u_e.size, u_e.size))
            for (dN_x, wdet), state in zip(_element_geometry(mesh, conn), states[e]):
                B = _b_matrix_small(dN_x, dim)
                C = material.tangent(B @ u_e, state)
                K_e += B.T @ C @ B * wdet
        else:
            K_e = _element_tangent_fd(mesh, conn, u_e, material)
        idx = np.repeat(dofs, dofs.size)
        rows.append(idx)
        cols.append(np.tile(dofs, dofs.size))
        vals.append(K_e.ravel())
    n = mesh.n_nodes * dim
    return scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def _element_tangent_fd(mesh, conn, u_e, material):
    h = 1e-7 * (1.0 + float(np.max(np.abs(u_e))))
    K_e = np.zeros((u_e.size, u_e.size))
    for j in range(u_e.size):
        up = u_e.copy()
        un = u_e.copy()
        up[j] += h
        un[j] -= h
        K_e[:, j] = (
            _element_internal_finite(mesh, conn, up, material)
            - _element_internal_finite(mesh, conn, un, material)
        ) / (2.0 * h)
    return K_e


def traction_force(mesh: Mesh, tractions) -> np.ndarray:
    """Consistent nodal loads of all edge tractions at unit load factor."""
    dim = mesh.dim
    f = np.zeros(mesh.n_nodes * dim)
    if not tractions:
        return f
    edge_fam = EDGE_FAMILY[mesh.family.name]
    for edge_nodes, direction, magnitude in tractions:
        coords = mesh.nodes[list(edge_nodes)]
        load = np.asarray(direction, dtype=float) * magnitude
        for xi, w in zip(edge_fam.gauss_points, edge_fam.gauss_weights):
            N, dN = edge_fam.shape(xi)
            ds = np.linalg.norm(dN[:, 0] @ coords)
            for a, node in enumerate(edge_nodes):
                f[node * dim : node * dim + dim] += N[a] * load * w * ds
    return f


# ---------------------------------------------------------------------------
# Newton loop with load bisection
# ---------------------------------------------------------------------------

def _init_states(problem):
    if problem.kinematics != "small":
        return None
    n_gp = len(problem.mesh.family.gauss_weights)
    return [
        [problem.material.initial_state() for _ in range(n_gp)]
        for _ in range(problem.mesh.n_elements)
    ]


def _apply_constraints(problem, u, factor):
    dim = problem.mesh.dim
    for node, comp in problem.bcs.fixed:
        u[node * dim + comp] = 0.0
    for node, comp, amp in problem.bcs.prescribed:
        u[node * dim + comp] = amp * factor


def _residual_or_none(problem, u, states, f_ext, free):
    try:
        R, trial = assemble_residual(
            problem.mesh, u, problem.material, states, f_ext, problem.kinematics
        )
    except (FloatingPointError, sg.SurrogateEvaluationError):
        return None  # iterate left the evaluable range
    rnorm = float(np.linalg.norm(R[free]))
    if not np.isfinite(rnorm):
        return None
    return R, trial, rnorm


def _solve_step(problem, u, states, factor, f_unit, free, opts):
    """Newton iteration with residual-norm backtracking at one load factor.

    Full steps overshoot when the committed history has shifted the stress
    response between steps (the out-of-balance at entry is state-based, not
    increment-based), so each update is backtracked until the residual norm
    decreases. Returns (u, trial states, norms, iterations, f_int) or None.
    """
    _apply_constraints(problem, u, factor)
    f_ext = factor * f_unit
    ref = 1.0 + np.linalg.norm(f_ext)
    current = _residual_or_none(problem, u, states, f_ext, free)
    if current is None:
        return None
    R, trial, rnorm = current
    norms = [rnorm]
    for it in range(opts.max_iter + 1):
        if rnorm <= opts.tol_r * ref:
            return u, trial, norms, it, f_ext - R
        if it == opts.max_iter:
            return None
        try:
            K = assemble_tangent(
                problem.mesh, u, problem.material, states, problem.kinematics
            )
        except (FloatingPointError, sg.SurrogateEvaluationError):
            return None
        try:
            du = scipy.sparse.linalg.spsolve(K[np.ix_(free, free)].tocsc(), R[free])
        except RuntimeError:
            return None
        if not np.all(np.isfinite(du)):
            return None
        alpha = 1.0
        accepted = None
        for _ in range(10):
            u[free] += alpha * du
            candidate = _residual_or_none(problem, u, states, f_ext, free)
            if candidate is not None and candidate[2] < rnorm:
                accepted = candidate
                break
            u[free] -= alpha * du
            alpha *= 0.5
        if accepted is None:
            return None
        R, trial, rnorm = accepted
        norms.append(rnorm)
    return None


def newton_solve(problem: Problem, opts: SolveOptions | None = None) -> SolveReport:
    """March the load schedule, committing state on each converged step.

    A non-converged increment is bisected up to opts.max_bisect times before
    the solve aborts with NewtonError carrying the partial report.
    """
    opts = opts or SolveOptions()
    mesh = problem.mesh
    dim = mesh.dim
    ndof = mesh.n_nodes * dim
    constrained = problem.bcs.constrained_dofs(dim)
    free = np.setdiff1d(np.arange(ndof), constrained)
    f_unit = traction_force(mesh, problem.bcs.tractions)

    u = np.zeros(ndof)
    states = _init_states(problem)
    report = SolveReport()
    for node in problem.tracked_nodes:
        report.tracked[node] = [[0.0] + [0.0] * dim]
    report.reactions.append([0.0, 0.0])

    def record(factor, f_int):
        for node in problem.tracked_nodes:
            report.tracked[node].append(
                [factor] + [u[node * dim + c] for c in range(dim)]
            )
        reaction = 0.0
        if problem.reaction_dofs:
            reaction = float(np.sum((f_int - factor * f_unit)[problem.reaction_dofs]))
        report.reactions.append([factor, reaction])

    def advance(f_from, f_to, depth):
        nonlocal u, states
        u_backup = u.copy()
        result = _solve_step(problem, u, states, f_to, f_unit, free, opts)
        if result is not None:
            u, states, norms, iters, f_int = result[0], result[1], result[2], result[3], result[4]
            report.steps.append(
                {
                    "factor": f_to,
                    "iterations": iters,
                    "residual_norms": norms,
                    "bisection_depth": depth,
                }
            )
            record(f_to, f_int)
            return
        u = u_backup
        if depth >= opts.max_bisect:
            report.converged = False
            raise NewtonError(
                f"no convergence at load factor {f_to:.6g} after "
                f"{opts.max_bisect} bisections",
                report=report,
            )
        mid = 0.5 * (f_from + f_to)
        advance(f_from, mid, depth + 1)
        advance(mid, f_to, depth + 1)

    prev = 0.0
    for factor in problem.bcs.schedule:
        advance(prev, float(factor), 0)
        prev = float(factor)
    return report
