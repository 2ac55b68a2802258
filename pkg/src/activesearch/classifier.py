"""Relevance classifier: L2-regularized logistic regression.

Retrained from scratch each round on the labeled set plus a fresh
pseudo-negative sample, by deterministic full-batch gradient descent with
backtracking line search. Zero init, fixed shrink/accept constants and no
randomness anywhere, so a training set order fully determines the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import NonFiniteLoss, NoPositives
from .sparse import CSRMatrix, SparseVector

SEED = "seed"
REVIEWED = "reviewed"
PSEUDO_NEGATIVE = "pseudo-negative"

GRAD_TOL = 1e-6          # infinity-norm stopping criterion
ARMIJO_C = 1e-4
BACKTRACK = 0.5
MAX_BACKTRACKS = 60


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")


@dataclass
class TrainingSet:
    """Stacked feature rows with 0/1 labels and per-example provenance."""

    features: CSRMatrix
    labels: np.ndarray
    provenance: list[str]

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.features.n_rows != self.labels.size or len(self.provenance) != self.labels.size:
            raise ValueError("features, labels and provenance must align")

    @property
    def size(self) -> int:
        return int(self.labels.size)

    def has_both_classes(self) -> bool:
        return bool(np.any(self.labels == 1.0) and np.any(self.labels == 0.0))


def assemble_training_set(labeled: list[tuple[SparseVector, int, str]],
                          pool_rows: np.ndarray, matrix: CSRMatrix,
                          n_pseudo: int, rng: np.random.Generator) -> TrainingSet:
    """Labeled examples plus a fresh random pseudo-negative pool sample.

    The sample is drawn without replacement from `pool_rows` (clamped to the
    pool size) and labeled 0 for this round only; the sampled instances stay
    in the pool. Raises NoPositives when `labeled` has no positive example.
    """
    if not any(lbl == 1 for _, lbl, _ in labeled):
        raise NoPositives("training set needs at least one positive example")
    if n_pseudo < 0:
        raise ValueError("n_pseudo must be nonnegative")
    vectors = [vec for vec, _, _ in labeled]
    labels = [float(lbl) for _, lbl, _ in labeled]
    provenance = [prov for _, _, prov in labeled]
    blocks = [CSRMatrix.from_rows(vectors, matrix.n_cols)]
    take = min(n_pseudo, pool_rows.size)
    if take > 0:
        sampled = rng.choice(pool_rows, size=take, replace=False)
        blocks.append(matrix.sub_rows(sampled))
        labels.extend([0.0] * take)
        provenance.extend([PSEUDO_NEGATIVE] * take)
    return TrainingSet(CSRMatrix.vstack(blocks), np.array(labels), provenance)


def _log1pexp(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z) without overflow
    out = np.empty_like(z)
    pos = z > 0
    out[pos] = z[pos] + np.log1p(np.exp(-z[pos]))
    out[~pos] = np.log1p(np.exp(z[~pos]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_value(ts: TrainingSet, z: np.ndarray, weights: np.ndarray, l2_lambda: float) -> float:
    """Mean logistic loss at margins z plus (l2/2)||w||^2; bias unpenalized."""
    nll = np.mean(_log1pexp(z) - z * ts.labels)
    return float(nll + 0.5 * l2_lambda * np.dot(weights, weights))


def loss_and_gradient(ts: TrainingSet, weights: np.ndarray, bias: float,
                      l2_lambda: float) -> tuple[float, np.ndarray, float]:
    """Loss plus analytic gradient in (weights, bias)."""
    X = ts.features
    z = backend.csr_matvec(X.indptr, X.indices, X.data, weights) + bias
    p = _sigmoid(z)
    resid = (p - ts.labels) / ts.size
    grad_w = backend.csr_rmatvec(X.indptr, X.indices, X.data, resid, X.n_cols) + l2_lambda * weights
    grad_b = float(np.sum(resid))
    return loss_value(ts, z, weights, l2_lambda), grad_w, grad_b


def train(ts: TrainingSet, l2_lambda: float = 1e-4, epochs: int = 300) -> LogRegModel:
    """Full-batch gradient descent with Armijo backtracking, zero init.

    Stops when the gradient infinity-norm drops below 1e-6 or after
    `epochs` accepted steps. Raises NonFiniteLoss if the objective or
    gradient leaves the representable range (bad feature scaling).
    """
    if not ts.has_both_classes():
        raise ValueError("training set needs one example of each class")
    X = ts.features
    w = np.zeros(X.n_cols)
    b = 0.0
    z = np.zeros(ts.size)
    step = 1.0
    for _ in range(epochs):
        p = _sigmoid(z)
        resid = (p - ts.labels) / ts.size
        gw = backend.csr_rmatvec(X.indptr, X.indices, X.data, resid, X.n_cols) + l2_lambda * w
        gb = float(np.sum(resid))
        if not (np.all(np.isfinite(gw)) and np.isfinite(gb)):
            raise NonFiniteLoss("gradient is not finite")
        g_inf = max(float(np.max(np.abs(gw))) if gw.size else 0.0, abs(gb))
        if g_inf < GRAD_TOL:
            break
        loss0 = loss_value(ts, z, w, l2_lambda)
        if not np.isfinite(loss0):
            raise NonFiniteLoss(f"objective became {loss0}")
        # margin change per unit step along -grad
        dz = -(backend.csr_matvec(X.indptr, X.indices, X.data, gw) + gb)
        descent = -(float(np.dot(gw, gw)) + gb * gb)
        t = min(step * 2.0, 1e4)
        accepted = False
        for _bt in range(MAX_BACKTRACKS):
            w_try = w - t * gw
            trial = loss_value(ts, z + t * dz, w_try, l2_lambda)
            if np.isfinite(trial) and trial <= loss0 + ARMIJO_C * t * descent:
                accepted = True
                break
            t *= BACKTRACK
        if not accepted:
            break  # no further float-representable progress
        w -= t * gw
        b -= t * gb
        z += t * dz
        step = t
    return LogRegModel(weights=w, bias=b, l2_lambda=l2_lambda)


def predict(model: LogRegModel, matrix: CSRMatrix, rows: np.ndarray | None = None) -> np.ndarray:
    """Relevance probabilities, clipped into the open interval (0, 1)."""
    if matrix.n_cols != model.weights.size:
        raise ValueError("feature dimension mismatch")
    if rows is None:
        z = backend.csr_matvec(matrix.indptr, matrix.indices, matrix.data, model.weights)
    else:
        rows = np.asarray(rows, dtype=np.int64)
        z = backend.csr_rows_matvec(matrix.indptr, matrix.indices, matrix.data, rows, model.weights)
    return np.clip(_sigmoid(z + model.bias), 1e-300, 1.0 - 1e-15)


def export_model(model: LogRegModel, path) -> None:
    """Debug dump: dimension, bias, then one weight per line (not stable API)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim\t{model.weights.size}\n")
        fh.write(f"l2_lambda\t{float(model.l2_lambda)!r}\n")
        fh.write(f"bias\t{float(model.bias)!r}\n")
        for value in model.weights:
            fh.write(f"{float(value)!r}\n")
