"""Logistic-regression tie classifier, evaluation, coefficient reports, and
the two-sample statistics used to contrast the labeled classes.

Training minimizes the L2-regularized logistic loss with deterministic
full-batch gradient descent: zero initialization, Barzilai-Borwein initial
step sizes, and Armijo backtracking so the loss decreases at every iteration.
Reproducible coefficients are the point; there is no stochastic path.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from .features import FeatureSpace, TieKind


@dataclass(frozen=True)
class LogitHyperparams:
    l2_strength: float = 1.0
    max_iters: int = 5000
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.l2_strength < 0:
            raise ValueError("l2_strength must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


DEFAULT_HYPERPARAMS = LogitHyperparams()


@dataclass
class LogitModel:
    weights: np.ndarray
    bias: float
    hyperparams: LogitHyperparams
    converged: bool
    final_grad_norm: float
    loss_history: list[float]

    @property
    def n_columns(self) -> int:
        return len(self.weights)


def _margins(weights: np.ndarray, bias: float, X, y: np.ndarray) -> np.ndarray:
    return y * (np.asarray(X @ weights).ravel() + bias)


def loss_value(weights: np.ndarray, bias: float, X, y: np.ndarray, l2_strength: float) -> float:
    """Mean logistic loss plus (l2/2N)||w||^2; the bias is unregularized."""
    n = X.shape[0]
    m = _margins(weights, bias, X, y)
    return float(
        np.logaddexp(0.0, -m).sum() / n + 0.5 * l2_strength * float(weights @ weights) / n
    )


def loss_and_grad(
    weights: np.ndarray, bias: float, X, y: np.ndarray, l2_strength: float
) -> tuple[float, np.ndarray, float]:
    """Loss plus its analytic gradient in (weights, bias)."""
    n = X.shape[0]
    m = _margins(weights, bias, X, y)
    loss = float(
        np.logaddexp(0.0, -m).sum() / n + 0.5 * l2_strength * float(weights @ weights) / n
    )
    r = y * expit(-m)  # d/dz of log(1+exp(-y z)) is -y*sigmoid(-y z)
    grad_w = -np.asarray(X.T @ r).ravel() / n + (l2_strength / n) * weights
    grad_b = -float(r.sum()) / n
    return loss, grad_w, grad_b


def train_logit(X, y, hyperparams: LogitHyperparams = DEFAULT_HYPERPARAMS) -> LogitModel:
    """Fit the classifier on labels in {+1, -1}; deterministic given the data."""
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if n != len(y):
        raise ValueError(f"X has {n} rows but y has {len(y)} labels")
    if n < 2:
        raise ValueError("need at least 2 training examples")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if len(np.unique(y)) < 2:
        raise ValueError("training data contains a single class")

    w = np.zeros(d)
    b = 0.0
    loss, gw, gb = loss_and_grad(w, b, X, y, hyperparams.l2_strength)
    history = [loss]
    step = 1.0
    grad_norm = math.sqrt(float(gw @ gw) + gb * gb)
    converged = grad_norm <= hyperparams.tolerance

    for _ in range(hyperparams.max_iters):
        if converged:
            break
        g_sq = float(gw @ gw) + gb * gb
        # Armijo backtracking from the BB-suggested step keeps descent monotone.
        trial = step
        while True:
            w_new = w - trial * gw
            b_new = b - trial * gb
            loss_new = loss_value(w_new, b_new, X, y, hyperparams.l2_strength)
            if loss_new <= loss - 1e-4 * trial * g_sq or trial < 1e-18:
                break
            trial *= 0.5
        if trial < 1e-18:
            break  # stagnated; report non-convergence below
        loss2, gw2, gb2 = loss_and_grad(w_new, b_new, X, y, hyperparams.l2_strength)
        s_w, s_b = w_new - w, b_new - b
        y_w, y_b = gw2 - gw, gb2 - gb
        sy = float(s_w @ y_w) + s_b * y_b
        ss = float(s_w @ s_w) + s_b * s_b
        step = min(max(ss / sy, 1e-12), 1e12) if sy > 0 else trial * 2.0
        w, b, loss, gw, gb = w_new, b_new, loss2, gw2, gb2
        history.append(loss)
        grad_norm = math.sqrt(float(gw @ gw) + gb * gb)
        converged = grad_norm <= hyperparams.tolerance

    if not converged:
        warnings.warn(
            f"optimizer stopped before convergence: gradient norm {grad_norm:.3e} "
            f"> tolerance {hyperparams.tolerance:.1e}",
            RuntimeWarning,
            stacklevel=2,
        )
    return LogitModel(
        weights=w,
        bias=b,
        hyperparams=hyperparams,
        converged=converged,
        final_grad_norm=grad_norm,
        loss_history=history,
    )


def predict_scores(model: LogitModel, X) -> np.ndarray:
    """Sigmoid probabilities of the positive class."""
    if X.shape[1] != model.n_columns:
        raise ValueError(f"X has {X.shape[1]} columns, model expects {model.n_columns}")
    return expit(np.asarray(X @ model.weights).ravel() + model.bias)


def predict_labels(model: LogitModel, X) -> np.ndarray:
    """Labels in {+1, -1} at the 0.5 probability threshold."""
    return np.where(predict_scores(model, X) >= 0.5, 1.0, -1.0)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    per_class: dict[int, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float


def _prf(y_true: np.ndarray, y_pred: np.ndarray, cls: float) -> ClassMetrics:
    tp = int(np.sum((y_pred == cls) & (y_true == cls)))
    fp = int(np.sum((y_pred == cls) & (y_true != cls)))
    fn = int(np.sum((y_pred != cls) & (y_true == cls)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClassMetrics(precision=precision, recall=recall, f1=f1)


def compute_metrics(y_true, y_pred) -> Metrics:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    per_class = {int(c): _prf(y_true, y_pred, c) for c in (1.0, -1.0)}
    return Metrics(
        accuracy=float(np.mean(y_true == y_pred)),
        per_class=per_class,
        macro_precision=float(np.mean([m.precision for m in per_class.values()])),
        macro_recall=float(np.mean([m.recall for m in per_class.values()])),
        macro_f1=float(np.mean([m.f1 for m in per_class.values()])),
    )


def evaluate(model: LogitModel, X, y) -> Metrics:
    """Confusion-matrix metrics at the 0.5 decision threshold."""
    return compute_metrics(np.asarray(y, dtype=np.float64), predict_labels(model, X))


def _mean_metrics(folds: Sequence[Metrics]) -> Metrics:
    per_class = {
        cls: ClassMetrics(
            precision=float(np.mean([f.per_class[cls].precision for f in folds])),
            recall=float(np.mean([f.per_class[cls].recall for f in folds])),
            f1=float(np.mean([f.per_class[cls].f1 for f in folds])),
        )
        for cls in (1, -1)
    }
    return Metrics(
        accuracy=float(np.mean([f.accuracy for f in folds])),
        per_class=per_class,
        macro_precision=float(np.mean([f.macro_precision for f in folds])),
        macro_recall=float(np.mean([f.macro_recall for f in folds])),
        macro_f1=float(np.mean([f.macro_f1 for f in folds])),
    )


def cross_validate(
    X,
    y,
    hyperparams: LogitHyperparams = DEFAULT_HYPERPARAMS,
    test_fraction: float = 0.1,
    repeats: int = 10,
) -> Metrics:
    """Mean metrics over repeated, seeded, stratified train/test splits."""
    y = np.asarray(y, dtype=np.float64)
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    class_indices = [np.flatnonzero(y == c) for c in (1.0, -1.0)]
    if any(len(idx) < 2 for idx in class_indices):
        raise ValueError("each class needs at least 2 samples to stratify")
    rng = np.random.default_rng(hyperparams.seed)
    folds = []
    for _ in range(repeats):
        test_parts, train_parts = [], []
        for idx in class_indices:
            perm = rng.permutation(idx)
            n_test = min(max(1, round(test_fraction * len(idx))), len(idx) - 1)
            test_parts.append(perm[:n_test])
            train_parts.append(perm[n_test:])
        train_idx = np.sort(np.concatenate(train_parts))
        test_idx = np.sort(np.concatenate(test_parts))
        model = train_logit(X[train_idx], y[train_idx], hyperparams)
        folds.append(evaluate(model, X[test_idx], y[test_idx]))
    return _mean_metrics(folds)


@dataclass(frozen=True)
class CoefficientReport:
    """Highest-magnitude coefficients per sign; positive identifies circulators."""

    top_positive: tuple[tuple[tuple[str, TieKind], float], ...]
    top_negative: tuple[tuple[tuple[str, TieKind], float], ...]


def top_coefficients(model: LogitModel, space: FeatureSpace, k: int = 100) -> CoefficientReport:
    """The k strongest positive and k strongest negative coefficients."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > space.n_columns:
        raise ValueError(f"k={k} exceeds the {space.n_columns}-column feature space")
    if model.n_columns != space.n_columns:
        raise ValueError("model and feature space have different column counts")
    w = model.weights
    pos = sorted((i for i in range(len(w)) if w[i] > 0), key=lambda i: (-w[i], i))[:k]
    neg = sorted((i for i in range(len(w)) if w[i] < 0), key=lambda i: (w[i], i))[:k]
    return CoefficientReport(
        top_positive=tuple((space.pair_of(i), float(w[i])) for i in pos),
        top_negative=tuple((space.pair_of(i), float(w[i])) for i in neg),
    )


def categorize_report(
    report: CoefficientReport, category_map: Mapping[str, str]
) -> dict[str, dict[str, int]]:
    """Category counts per coefficient sign; unmapped targets are 'Unlabeled'."""
    out: dict[str, dict[str, int]] = {"positive": {}, "negative": {}}
    for side, entries in (("positive", report.top_positive), ("negative", report.top_negative)):
        for (target, _kind), _weight in entries:
            category = category_map.get(target, "Unlabeled")
            out[side][category] = out[side].get(category, 0) + 1
    return out


def save_model(model: LogitModel, path: str | Path, space_hash: str) -> None:
    payload = {
        "format_version": 1,
        "space_hash": space_hash,
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "hyperparams": {
            "l2_strength": model.hyperparams.l2_strength,
            "max_iters": model.hyperparams.max_iters,
            "tolerance": model.hyperparams.tolerance,
            "seed": model.hyperparams.seed,
        },
        "converged": model.converged,
        "final_grad_norm": model.final_grad_norm,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> tuple[LogitModel, str]:
    """Load a model; returns it plus the feature-space hash it was trained on."""
    payload = json.loads(Path(path).read_text(encoding="utf-8-sig"))
    model = LogitModel(
        weights=np.asarray(payload["weights"], dtype=np.float64),
        bias=float(payload["bias"]),
        hyperparams=LogitHyperparams(**payload["hyperparams"]),
        converged=bool(payload["converged"]),
        final_grad_norm=float(payload["final_grad_norm"]),
        loss_history=[],
    )
    return model, payload.get("space_hash", "")


# ---------------------------------------------------------------------------
# Welch's t-test


@dataclass(frozen=True)
class WelchResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz's method)."""
    FPMIN = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-14:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def welch_t_test(a, b) -> WelchResult:
    """Two-sided Welch's t-test (unequal variances, Welch-Satterthwaite df)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least 2 observations")
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    if va == 0.0 or vb == 0.0:
        raise ValueError("degenerate sample: zero variance")
    na, nb = len(a), len(b)
    sa, sb = va / na, vb / nb
    se2 = sa + sb
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(se2)
    df = se2 * se2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
    # Two-sided p from the t-distribution survival function via I_x(df/2, 1/2).
    p = betainc_reg(df / 2.0, 0.5, df / (df + t * t))
    return WelchResult(t_statistic=t, degrees_of_freedom=df, p_value=min(max(p, 0.0), 1.0))
