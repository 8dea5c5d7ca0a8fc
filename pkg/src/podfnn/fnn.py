"""Feed-forward networks trained by Levenberg-Marquardt least squares.

Hidden layers use the symmetric sigmoid 2 / (1 + exp(-2x)) - 1, which is
identical to tanh; the output layer is affine so that targets scaled to
(-1, 1) stay reachable without saturation. The training Jacobian holds one
row per residual and one column per weight or bias, assembled by
backpropagation, and each epoch applies one accepted damped Gauss-Newton
update with an adaptive damping parameter.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from threadpoolctl import threadpool_limits

from .scaling import RowScaler


class TrainingStallError(RuntimeError):
    """The damping parameter overflowed without finding a descent step."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


@dataclass
class TrainOptions:
    max_epochs: int = 1000
    grad_tol: float = 1e-7
    target_mse: float | None = None
    mu0: float = 1e-3
    mu_inc: float = 10.0
    mu_dec: float = 0.1
    mu_max: float = 1e10
    seed: int = 0

    def __post_init__(self):
        if self.mu0 <= 0.0:
            raise ValueError("mu0 must be positive")
        if not (self.mu_inc > 1.0 > self.mu_dec > 0.0):
            raise ValueError("need mu_inc > 1 > mu_dec > 0")


@dataclass
class FnnModel:
    """Layer sizes, parameters, scaler records and training metadata.

    weights[k] has shape (layer_sizes[k+1], layer_sizes[k]); all hidden
    layers are sigmoid, the output layer is affine.
    """

    layer_sizes: list
    weights: list
    biases: list
    input_scaler: RowScaler | None = None
    output_scaler: RowScaler | None = None
    training_meta: dict = field(default_factory=dict)

    @property
    def activations(self) -> list:
        return ["sigmoid"] * (len(self.weights) - 1) + ["linear"]

    @property
    def n_params(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))

    def copy(self) -> "FnnModel":
        return FnnModel(
            list(self.layer_sizes),
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
            self.input_scaler,
            self.output_scaler,
            dict(self.training_meta),
        )


def nguyen_widrow_init(layer_sizes, seed=0) -> FnnModel:
    """Random model with per-layer row norms fixed to beta = 0.7 * H^(1/I).

    H is the layer's output width and I its input width; biases are uniform
    in [-beta, beta]. Deterministic under the seed.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError(f"invalid layer sizes {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        beta = 0.7 * n_out ** (1.0 / n_in)
        W = rng.uniform(-1.0, 1.0, size=(n_out, n_in))
        norms = np.linalg.norm(W, axis=1)
        norms[norms < 1e-12] = 1.0
        W *= beta / norms[:, None]
        b = rng.uniform(-beta, beta, size=n_out)
        weights.append(W)
        biases.append(b)
    return FnnModel(sizes, weights, biases)


def _forward_cached(model: FnnModel, X: np.ndarray) -> list:
    """All layer activations for a (n_samples, n_in) batch."""
    acts = [X]
    last = len(model.weights) - 1
    for k, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ W.T + b
        acts.append(z if k == last else np.tanh(z))
    return acts


def forward(model: FnnModel, x) -> np.ndarray:
    """Network output for a single input vector or a (n, n_in) batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != model.layer_sizes[0]:
        raise ValueError(
            f"input width {X.shape[1]} does not match layer size {model.layer_sizes[0]}"
        )
    out = _forward_cached(model, X)[-1]
    return out[0] if single else out


def get_params(model: FnnModel) -> np.ndarray:
    return np.concatenate(
        [np.concatenate([W.ravel(), b]) for W, b in zip(model.weights, model.biases)]
    )


def set_params(model: FnnModel, theta: np.ndarray) -> None:
    pos = 0
    for W, b in zip(model.weights, model.biases):
        W[...] = theta[pos : pos + W.size].reshape(W.shape)
        pos += W.size
        b[...] = theta[pos : pos + b.size]
        pos += b.size


def jacobian(model: FnnModel, inputs, targets):
    """Residual vector and Jacobian by backpropagation.

    Residual rows are stacked sample-major then output-major; columns run
    over each layer's weights (row-major) followed by its biases.

    Returns (e, J) with e of length n_samples * n_out and J of shape
    (len(e), n_params).
    """
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    if T.shape[0] != X.shape[0] or T.shape[1] != model.layer_sizes[-1]:
        raise ValueError(f"target shape {T.shape} does not match batch/output sizes")
    acts = _forward_cached(model, X)
    E = acts[-1] - T
    n, n_out = E.shape
    L = len(model.weights)

    offsets = []
    pos = 0
    for W, b in zip(model.weights, model.biases):
        offsets.append(pos)
        pos += W.size + b.size
    J = np.empty((n * n_out, pos))
    base_rows = np.arange(n) * n_out

    for o in range(n_out):
        rows = base_rows + o
        delta = np.zeros((n, n_out))
        delta[:, o] = 1.0  # affine output layer
        for k in reversed(range(L)):
            W = model.weights[k]
            a_prev = acts[k]
            blk = offsets[k]
            dW = np.einsum("si,sj->sij", delta, a_prev).reshape(n, -1)
            J[rows, blk : blk + W.size] = dW
            J[rows, blk + W.size : blk + W.size + delta.shape[1]] = delta
            if k > 0:
                delta = (delta @ W) * (1.0 - acts[k] ** 2)
    return E.reshape(-1), J


def _solve_damped(JtJ, Jte, mu):
    """Solve (J^T J + mu I) x = J^T e by Cholesky with a jitter fallback.

    The applied damping is floored at a tiny multiple of the matrix scale so
    a near-singular J^T J stays numerically positive definite once the
    schedule has shrunk mu below round-off level.
    """
    n = JtJ.shape[0]
    mu_eff = max(mu, 1e-14 * np.trace(JtJ) / n)
    A = JtJ + mu_eff * np.eye(n)
    try:
        cf = scipy.linalg.cho_factor(A, check_finite=False)
    except np.linalg.LinAlgError:
        A = A + 1e-10 * np.trace(JtJ) / n * np.eye(n)
        cf = scipy.linalg.cho_factor(A, check_finite=False)
    return scipy.linalg.cho_solve(cf, Jte, check_finite=False)


def _sse(model, X, T):
    E = _forward_cached(model, X)[-1] - T
    return float(np.sum(E * E))


def lm_step(model: FnnModel, inputs, targets, mu, opts: TrainOptions | None = None):
    """One damped Gauss-Newton trial step.

    Returns (candidate, new_error, accepted, new_mu) where new_error is the
    candidate's sum-of-squares error. The step is accepted iff the error
    decreases, in which case mu shrinks; otherwise mu grows and the original
    model should be retried at the new damping.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    opts = opts or TrainOptions()
    if mu > opts.mu_max:
        raise TrainingStallError(f"damping parameter overflowed ({mu:.3e})")
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    e, J = jacobian(model, X, T)
    old_err = float(e @ e)
    step = _solve_damped(J.T @ J, J.T @ e, mu)
    candidate = model.copy()
    set_params(candidate, get_params(model) - step)
    new_err = _sse(candidate, X, T)
    if new_err < old_err:
        return candidate, new_err, True, mu * opts.mu_dec
    return model, old_err, False, mu * opts.mu_inc


def train(model: FnnModel, inputs, targets, opts: TrainOptions):
    """Iterate accepted updates until a stopping criterion fires.

    Stops on the max-norm of the loss gradient falling below grad_tol, on
    reaching target_mse, or on max_epochs; damping overflow raises
    TrainingStallError. Returns the trained model and the per-epoch history
    (epoch, mse, grad_norm, mu).
    """
    # the epoch matrices are small; threaded BLAS only adds sync overhead
    with threadpool_limits(limits=1):
        return _train_serial(model, inputs, targets, opts)


def _train_serial(model: FnnModel, inputs, targets, opts: TrainOptions):
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    n_res = X.shape[0] * T.shape[1]
    model = model.copy()
    mu = opts.mu0
    history = []
    stop = "max_epochs"
    t0 = time.perf_counter()
    mse = _sse(model, X, T) / n_res

    for epoch in range(opts.max_epochs):
        e, J = jacobian(model, X, T)
        sse = float(e @ e)
        Jte = J.T @ e
        grad = 2.0 / n_res * float(np.max(np.abs(Jte)))  # max-norm of the MSE gradient
        if grad < opts.grad_tol:
            stop = "grad_tol"
            mse = sse / n_res
            break
        JtJ = J.T @ J
        theta = get_params(model)
        accepted = False
        while not accepted:
            if mu > opts.mu_max:
                model.training_meta.update(
                    epochs=len(history), final_mse=sse / n_res, grad_norm=grad,
                    seed=opts.seed, stop_reason="stall",
                )
                raise TrainingStallError(
                    f"damping parameter overflowed ({mu:.3e}) at epoch {epoch}",
                    history=history,
                )
            step = _solve_damped(JtJ, Jte, mu)
            candidate = model.copy()
            set_params(candidate, theta - step)
            new_sse = _sse(candidate, X, T)
            if new_sse < sse:
                model = candidate
                mu = max(mu * opts.mu_dec, 1e-16)
                accepted = True
            else:
                mu *= opts.mu_inc
        mse = new_sse / n_res
        history.append({"epoch": epoch + 1, "mse": mse, "grad_norm": grad, "mu": mu})
        if opts.target_mse is not None and mse <= opts.target_mse:
            stop = "target_mse"
            break
    else:
        # recompute the gradient at the final point for the metadata
        e, J = jacobian(model, X, T)
        grad = 2.0 / n_res * float(np.max(np.abs(J.T @ e)))
        mse = float(e @ e) / n_res

    if stop == "target_mse":
        e, J = jacobian(model, X, T)
        grad = 2.0 / n_res * float(np.max(np.abs(J.T @ e)))

    model.training_meta.update(
        epochs=len(history),
        final_mse=mse,
        grad_norm=grad,
        seed=opts.seed,
        stop_reason=stop,
        train_seconds=time.perf_counter() - t0,
    )
    return model, history


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def model_to_dict(model: FnnModel) -> dict:
    return {
        "layer_sizes": list(model.layer_sizes),
        "weights": [W.ravel().tolist() for W in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "activations": model.activations,
        "input_scaler": model.input_scaler.to_dict() if model.input_scaler else None,
        "output_scaler": model.output_scaler.to_dict() if model.output_scaler else None,
        "training_meta": model.training_meta,
    }


def model_from_dict(d) -> FnnModel:
    sizes = list(d["layer_sizes"])
    weights = [
        np.array(w, dtype=float).reshape(n_out, n_in)
        for w, n_in, n_out in zip(d["weights"], sizes[:-1], sizes[1:])
    ]
    biases = [np.array(b, dtype=float) for b in d["biases"]]
    return FnnModel(
        sizes,
        weights,
        biases,
        RowScaler.from_dict(d["input_scaler"]) if d.get("input_scaler") else None,
        RowScaler.from_dict(d["output_scaler"]) if d.get("output_scaler") else None,
        d.get("training_meta", {}),
    )
