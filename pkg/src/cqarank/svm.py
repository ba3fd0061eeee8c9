"""Binary SVM classifiers with Platt-calibrated probabilities.

Two trainers share one probability model:

* :func:`train_linear_sgd` minimizes ``lam/2 * |w|^2 + mean hinge`` by
  shuffled stochastic subgradient steps of size ``lr / (lam * t)``. The bias
  is an extra constant feature and is regularized with the weights. The
  returned weights average the iterates of the second half of training.
* :func:`train_rbf_smo` solves the kernel SVM dual by SMO, choosing the
  maximal KKT-violating pair at every step.

Probabilities follow the LibSVM sign convention
``P(y=+1 | d) = 1 / (1 + exp(platt_a * d + platt_b))`` with ``platt_a < 0``,
so larger decision values always give larger probabilities. The sigmoid is
fit on out-of-fold decision values.
"""
from __future__ import annotations

import json
import logging
import math
from collections import OrderedDict
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConvergenceError, TrainingError, ValidationError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
PROBA_CLIP = 1e-7


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    gamma: float | None = None  # None means 1 / n_features
    sgd_epochs: int = 20
    sgd_lr: float = 1.0
    sgd_lambda: float = 1e-2
    smo_tol: float = 1e-3
    smo_eps: float = 1e-8
    seed: int = 0
    platt_folds: int = 3
    max_iter: int | None = None
    cache_rows: int = 4096

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.sgd_epochs < 1 or self.sgd_lr <= 0 or self.sgd_lambda <= 0:
            raise ValueError("SGD settings must be positive")
        if self.platt_folds < 2:
            raise ValueError("platt_folds must be >= 2")

    def resolved_gamma(self, n_features: int) -> float:
        return self.gamma if self.gamma is not None else 1.0 / max(1, n_features)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    lam: float
    platt_a: float | None = None
    platt_b: float | None = None
    objective_history: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def decision(self, X) -> np.ndarray:
        X = _check_dims(X, self.n_features)
        return X @ self.weights + self.bias


@dataclass
class RbfModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for each support vector
    bias: float
    gamma: float
    C: float
    platt_a: float | None = None
    platt_b: float | None = None
    n_iter: int = 0
    dual_objective: float = 0.0

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = _check_dims(X, self.n_features)
        if len(self.dual_coef) == 0:
            return np.full(X.shape[0], self.bias)
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias


def _check_dims(X, n_features) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return X


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per label")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise TrainingError("training data must contain both classes")
    return X, y


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


# -- Platt scaling --------------------------------------------------------------


def fit_platt(decisions, labels, max_iter: int = 100) -> tuple[float, float]:
    """Fit ``P(+1|d) = 1/(1+exp(a*d+b))`` by Newton's method with backtracking
    on regularized targets. Returns (a, b) with ``a < 0``."""
    dec = np.asarray(decisions, dtype=float)
    pos = np.asarray(labels) > 0
    prior1 = float(pos.sum())
    prior0 = float(len(pos) - prior1)
    target = np.where(pos, (prior1 + 1.0) / (prior1 + 2.0), 1.0 / (prior0 + 2.0))
    a, b = 0.0, math.log((prior0 + 1.0) / (prior1 + 1.0))
    sigma = 1e-12

    def objective(a_, b_):
        f = dec * a_ + b_
        return float(np.sum(np.where(f >= 0, target * f + np.log1p(np.exp(-f)),
                                     (target - 1.0) * f + np.log1p(np.exp(f)))))

    fval = objective(a, b)
    for _ in range(max_iter):
        f = dec * a + b
        p = np.where(f >= 0, np.exp(-f) / (1.0 + np.exp(-f)), 1.0 / (1.0 + np.exp(f)))
        q = 1.0 - p
        d2 = p * q
        h11 = sigma + np.sum(dec * dec * d2)
        h22 = sigma + np.sum(d2)
        h21 = np.sum(dec * d2)
        d1 = target - p
        g1 = np.sum(dec * d1)
        g2 = np.sum(d1)
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= 1e-10:
            new_a, new_b = a + step * da, b + step * db
            new_f = objective(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                a, b, fval = new_a, new_b, new_f
                break
            step /= 2.0
        else:
            break
    if a >= -1e-9:
        # uninformative or inverted decisions: keep ranking order, predict the prior
        a = -1e-9
        b = math.log((prior0 + 1.0) / (prior1 + 1.0))
    return float(a), float(b)


def _stratified_folds(y, n_folds: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    folds = np.empty(len(y), dtype=np.int64)
    for cls in (-1.0, 1.0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = np.arange(len(idx)) % n_folds
    return folds


def _calibrate(model, X, y, config: TrainConfig, trainer):
    """Fit Platt parameters on out-of-fold decision values."""
    folds = _stratified_folds(y, config.platt_folds, config.seed)
    oof = model.decision(X)  # fallback for folds that cannot be trained
    for k in range(config.platt_folds):
        test = folds == k
        train = ~test
        if not test.any() or len(np.unique(y[train])) < 2:
            continue
        sub = trainer(X[train], y[train], config)
        oof[test] = sub.decision(X[test])
    model.platt_a, model.platt_b = fit_platt(oof, y)
    return model


def predict_decision(model, x):
    """Raw margin. Scalar for a single vector, array for a matrix."""
    d = model.decision(x)
    return float(d[0]) if np.ndim(x) == 1 else d


def predict_proba(model, x):
    """Calibrated probability of the positive class."""
    if model.platt_a is None or model.platt_b is None:
        raise TrainingError("model has no Platt calibration")
    d = model.decision(x)
    p = 1.0 / (1.0 + np.exp(np.clip(model.platt_a * d + model.platt_b, -700, 700)))
    p = np.clip(p, PROBA_CLIP, 1.0 - PROBA_CLIP)
    return float(p[0]) if np.ndim(x) == 1 else p


# -- linear SVM by SGD ----------------------------------------------------------


def linear_objective(w, b, lam, X, y) -> float:
    margins = y * (X @ w + b)
    return 0.5 * lam * (w @ w + b * b) + float(np.maximum(0.0, 1.0 - margins).mean())


def _sgd(X, y, config: TrainConfig) -> LinearModel:
    n, d = X.shape
    lam = config.sgd_lambda
    rng = np.random.default_rng(config.seed)
    w = np.zeros(d)
    b = 0.0
    radius = 1.0 / math.sqrt(lam)
    # iterates of the second half of training are averaged into the output
    avg_start = config.sgd_epochs // 2
    w_avg = np.zeros(d)
    b_avg = 0.0
    n_avg = 0
    history = []
    t = 0
    for epoch in range(config.sgd_epochs):
        for i in rng.permutation(n):
            t += 1
            eta = config.sgd_lr / (lam * t)
            violated = y[i] * (X[i] @ w + b) < 1.0
            shrink = 1.0 - eta * lam
            w *= shrink
            b *= shrink
            if violated:
                w += eta * y[i] * X[i]
                b += eta * y[i]
            norm = math.sqrt(w @ w + b * b)
            if norm > radius:
                w *= radius / norm
                b *= radius / norm
            if epoch >= avg_start:
                n_avg += 1
                w_avg += (w - w_avg) / n_avg
                b_avg += (b - b_avg) / n_avg
        out_w, out_b = (w_avg, b_avg) if n_avg else (w, b)
        history.append(linear_objective(out_w, out_b, lam, X, y))
    out_w, out_b = (w_avg, b_avg) if n_avg else (w, b)
    return LinearModel(weights=out_w.copy(), bias=float(out_b), lam=lam, objective_history=history)


def train_linear_sgd(X, y, config: TrainConfig = TrainConfig()) -> LinearModel:
    X, y = _check_xy(X, y)
    model = _sgd(X, y, config)
    return _calibrate(model, X, y, config, _sgd)


# -- RBF SVM by SMO ---------------------------------------------------------------


class _KernelRows:
    """Rows of Q = diag(y) K diag(y), computed on demand and kept in an LRU cache."""

    def __init__(self, X, y, gamma, capacity):
        self.X = X
        self.y = y
        self.gamma = gamma
        self.sq = (X * X).sum(1)
        self.capacity = max(2, capacity)
        self.cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def __call__(self, i) -> np.ndarray:
        row = self.cache.get(i)
        if row is not None:
            self.cache.move_to_end(i)
            return row
        sq = np.maximum(self.sq + self.sq[i] - 2.0 * self.X @ self.X[i], 0.0)
        row = self.y[i] * self.y * np.exp(-self.gamma * sq)
        self.cache[i] = row
        if len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
        return row


def solve_dual(Q, y, C, tol=1e-3, max_iter=None, diag=None):
    """SMO on ``min 1/2 a'Qa - sum(a)`` s.t. ``0 <= a <= C``, ``y'a = 0``.

    ``Q`` is the label-signed kernel matrix ``Q_ij = y_i y_j K_ij``, either
    as an array or as a callable returning row i. ``diag`` holds ``Q_ii``
    (all ones, as for the RBF kernel, when omitted). Returns
    (alpha, rho, iterations); the decision function is
    ``sum_j alpha_j y_j K(x_j, x) - rho``.
    """
    n = len(y)
    if isinstance(Q, np.ndarray):
        diag = np.diag(Q) if diag is None else diag
        Q = Q.__getitem__
    diag = np.ones(n) if diag is None else np.asarray(diag, dtype=float)
    max_iter = max_iter or max(1_000_000, 100 * n)
    alpha = np.zeros(n)
    G = -np.ones(n)
    pos = y > 0
    neg = ~pos
    it = 0
    while True:
        yG = -y * G
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (pos & (alpha > 0)) | (neg & (alpha < C))
        i = int(np.argmax(np.where(up, yG, -np.inf)))
        j = int(np.argmin(np.where(low, yG, np.inf)))
        gap = yG[i] - yG[j]
        if gap < tol:
            break
        if it >= max_iter:
            raise ConvergenceError(f"SMO did not converge in {max_iter} iterations", gap)
        it += 1
        Qi = Q(i)
        Qj = Q(j)
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] + 2.0 * Qi[j]
            delta = (-G[i] - G[j]) / max(quad, 1e-12)
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Qi[j]
            delta = (G[i] - G[j]) / max(quad, 1e-12)
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total
        G += Qi * (alpha[i] - old_i) + Qj * (alpha[j] - old_j)

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        at_upper = alpha >= C
        upper_side = (at_upper & neg) | (~at_upper & pos)
        ub = yG[upper_side].min(initial=np.inf)
        lb = yG[~upper_side].max(initial=-np.inf)
        rho = float((ub + lb) / 2.0) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return alpha, rho, it


def dual_objective(alpha, K, y) -> float:
    """SVM dual objective ``sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij``."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def _smo(X, y, config: TrainConfig) -> RbfModel:
    gamma = config.resolved_gamma(X.shape[1])
    rows = _KernelRows(X, y, gamma, config.cache_rows)
    alpha, rho, n_iter = solve_dual(rows, y, config.C, config.smo_tol, config.max_iter)
    sv = alpha > config.smo_eps
    ay = alpha[sv] * y[sv]
    K_sv = rbf_kernel(X[sv], X[sv], gamma)
    return RbfModel(
        support_vectors=X[sv].copy(),
        dual_coef=ay,
        bias=-rho,
        gamma=gamma,
        C=config.C,
        n_iter=n_iter,
        dual_objective=float(alpha[sv].sum() - 0.5 * ay @ K_sv @ ay),
    )


def train_rbf_smo(X, y, config: TrainConfig = TrainConfig()) -> RbfModel:
    X, y = _check_xy(X, y)
    model = _smo(X, y, config)
    logger.info("smo: %d iterations, %d support vectors", model.n_iter, len(model.dual_coef))
    return _calibrate(model, X, y, config, _smo)


# -- one-vs-one multi-class -------------------------------------------------------


def train_one_vs_one(X, labels, config: TrainConfig = TrainConfig()) -> dict[tuple, RbfModel]:
    """One RBF model per unordered label pair, for multi-class accuracy."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    classes = sorted(set(labels.tolist()))
    models = {}
    for a_idx, a in enumerate(classes):
        for b in classes[a_idx + 1:]:
            mask = (labels == a) | (labels == b)
            y = np.where(labels[mask] == a, 1.0, -1.0)
            models[a, b] = _smo(X[mask], y, config)
    return models


def predict_one_vs_one(models: dict[tuple, RbfModel], X) -> list:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    classes = sorted({c for pair in models for c in pair})
    votes = np.zeros((X.shape[0], len(classes)))
    for (a, b), model in models.items():
        d = model.decision(X)
        votes[:, classes.index(a)] += d > 0
        votes[:, classes.index(b)] += d <= 0
    return [classes[i] for i in votes.argmax(1)]


# -- persistence -----------------------------------------------------------------


def save_model(model, path) -> None:
    """Write arrays to ``path`` (npz) and hyperparameters to ``path + '.json'``."""
    if isinstance(model, RbfModel):
        kind = "rbf"
        arrays = {"support_vectors": model.support_vectors, "dual_coef": model.dual_coef}
        params = {"bias": model.bias, "gamma": model.gamma, "C": model.C, "n_iter": model.n_iter,
                  "dual_objective": model.dual_objective}
    elif isinstance(model, LinearModel):
        kind = "linear"
        arrays = {"weights": model.weights}
        params = {"bias": model.bias, "lam": model.lam, "objective_history": model.objective_history}
    else:
        raise TypeError(f"cannot save {type(model).__name__}")
    params.update(kind=kind, version=FORMAT_VERSION, platt_a=model.platt_a, platt_b=model.platt_b)
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(params, fh, indent=2, sort_keys=True)


def load_model(path):
    with open(str(path) + ".json", encoding="utf-8") as fh:
        params = json.load(fh)
    if params.pop("version") != FORMAT_VERSION:
        raise ValidationError("unsupported SVM model version")
    kind = params.pop("kind")
    with np.load(path, allow_pickle=False) as data:
        if kind == "rbf":
            return RbfModel(support_vectors=data["support_vectors"], dual_coef=data["dual_coef"], **params)
        return LinearModel(weights=data["weights"], **params)


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)
