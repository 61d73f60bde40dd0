"""The three classifier families: NCC, L2 logistic regression, exact 0-1 ERM.

A nearest-centroid classifier is expressed as the linear classifier
W_c = 2 p_c, b_c = -p_c.p_c so argmax of the logits equals argmin of the
squared centroid distances exactly. Logistic probing is deterministic
full-batch optimization from zero init. The exact empirical 0-1 minimizers
exist for 1-d and 2-d inputs (the theory bench setting); higher dimensions
use logistic regression as the probing surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import LabeledFeatureSet, ValidationError
from . import kernels

__all__ = [
    "LinearClassifier",
    "FitConfig",
    "ErmFit",
    "FitError",
    "fit_ncc",
    "fit_logreg",
    "fit_erm01_1d",
    "fit_erm01_2d",
    "evaluate",
]


class FitError(RuntimeError):
    """Raised when an optimizer produces a non-finite loss."""


@dataclass(frozen=True)
class LinearClassifier:
    """Linear classifier with logits W z + b; ties predict the lowest class."""

    W: np.ndarray            # (C, dim)
    b: np.ndarray            # (C,)
    kind: str                # "ncc" | "logistic" | "erm01"
    centroids: np.ndarray | None = None  # (C, dim), ncc only

    def __post_init__(self):
        W = np.ascontiguousarray(self.W, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        if W.ndim != 2 or b.shape != (W.shape[0],):
            raise ValidationError("W must be (C, dim) with matching b")
        if self.kind not in ("ncc", "logistic", "erm01"):
            raise ValidationError(f"unknown classifier kind {self.kind!r}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def n_classes(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def logits(self, features: np.ndarray) -> np.ndarray:
        return features @ self.W.T + self.b

    def predict(self, features: np.ndarray) -> np.ndarray:
        # np.argmax returns the first maximum: lowest class wins ties
        return np.argmax(self.logits(features), axis=1)


@dataclass(frozen=True)
class FitConfig:
    """Logistic regression hyperparameters.

    l2_lambda None means the scale-stable default 1/(n_samples * n_classes).
    step_policy 'lbfgs' is the default full-batch first-order optimizer;
    'nesterov' is a plain accelerated gradient loop with a fixed 1/L step,
    kept as an independent cross-check.
    """

    l2_lambda: float | None = None
    max_iters: int = 1000
    tolerance: float = 1e-8
    step_policy: str = "lbfgs"

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be > 0")
        if self.step_policy not in ("lbfgs", "nesterov"):
            raise ValidationError(f"unknown step policy {self.step_policy!r}")
        if self.l2_lambda is not None and self.l2_lambda < 0:
            raise ValidationError("l2_lambda must be >= 0")


@dataclass(frozen=True)
class ErmFit:
    """Result of an exact 0-1 ERM fit: classifier, its train error, flags."""

    classifier: LinearClassifier
    train_error: float
    degenerate: bool = False


def fit_ncc(train: LabeledFeatureSet) -> LinearClassifier:
    """Nearest-centroid classifier; centroids are per-class feature means."""
    C, m = train.n_classes, train.dim
    P = np.empty((C, m))
    for c in range(C):
        P[c] = train.features[train.labels == c].mean(axis=0)
    return LinearClassifier(W=2.0 * P, b=-(P ** 2).sum(axis=1), kind="ncc",
                            centroids=P)


def _softmax_loss_grad(theta, X, Y, y_idx, lam, C, d):
    n = X.shape[0]
    W = theta[:C * d].reshape(C, d)
    b = theta[C * d:]
    Z = X @ W.T + b
    Z -= Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    P = E / E.sum(axis=1, keepdims=True)
    nll = -np.log(np.maximum(P[np.arange(n), y_idx], 1e-300)).mean()
    loss = nll + lam * float((W ** 2).sum())
    G = (P - Y) / n
    gW = G.T @ X + 2.0 * lam * W
    gb = G.sum(axis=0)
    return loss, np.concatenate([gW.ravel(), gb])


def fit_logreg(train: LabeledFeatureSet,
               cfg: FitConfig = FitConfig()) -> LinearClassifier:
    """Multinomial logistic regression, L2 penalty on W only, zero init.

    Deterministic full-batch first-order optimization (L-BFGS by default)
    run to gradient norm <= cfg.tolerance or cfg.max_iters.
    """
    if train.n_classes < 2:
        raise ValidationError("logistic regression needs >= 2 classes")
    X = train.features
    n, d = X.shape
    C = train.n_classes
    lam = cfg.l2_lambda if cfg.l2_lambda is not None else 1.0 / (n * C)
    Y = np.zeros((n, C))
    Y[np.arange(n), train.labels] = 1.0
    args = (X, Y, train.labels, lam, C, d)
    theta0 = np.zeros(C * d + C)
    if cfg.step_policy == "lbfgs":
        res = minimize(_softmax_loss_grad, theta0, args=args, jac=True,
                       method="L-BFGS-B",
                       options={"maxiter": cfg.max_iters,
                                "gtol": cfg.tolerance, "ftol": 0.0})
        if not np.isfinite(res.fun):
            raise FitError(f"non-finite loss at iteration {res.nit}")
        theta = res.x
    else:
        theta = _nesterov(theta0, args, cfg)
    W = theta[:C * d].reshape(C, d)
    b = theta[C * d:]
    return LinearClassifier(W=W, b=b, kind="logistic")


def _nesterov(theta, args, cfg: FitConfig):
    X, Y, y_idx, lam, C, d = args
    n = X.shape[0]
    # 1/L step from the softmax Hessian bound 0.5 * lmax(X~'X~)/n + 2 lam
    Xb = np.concatenate([X, np.ones((n, 1))], axis=1)
    v = np.ones(Xb.shape[1]) / np.sqrt(Xb.shape[1])
    for _ in range(50):
        v = Xb.T @ (Xb @ v)
        v /= np.linalg.norm(v)
    lmax = float(v @ (Xb.T @ (Xb @ v)))
    step = 1.0 / (0.5 * lmax / n + 2.0 * lam + 1e-12)
    y_prev = theta.copy()
    t_prev = 1.0
    for it in range(cfg.max_iters * 50):
        loss, g = _softmax_loss_grad(theta, *args)
        if not np.isfinite(loss):
            raise FitError(f"non-finite loss at iteration {it}")
        if np.max(np.abs(g)) <= cfg.tolerance:
            break
        y_new = theta - step * g
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev ** 2))
        theta = y_new + ((t_prev - 1.0) / t_new) * (y_new - y_prev)
        y_prev, t_prev = y_new, t_new
    return y_prev


def _binary_clf(w: np.ndarray, b: float, kind: str = "erm01") -> LinearClassifier:
    """Two-class classifier predicting 1 iff w.z + b > 0, ties to class 0."""
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    W = np.vstack([np.zeros_like(w), w])
    return LinearClassifier(W=W, b=np.array([0.0, float(b)]), kind=kind)


def _check_erm_input(train: LabeledFeatureSet, dim: int) -> None:
    if train.dim != dim:
        raise ValidationError(f"exact 0-1 ERM implemented for dim={dim} inputs")
    if train.n_classes > 2:
        raise ValidationError("exact 0-1 ERM is binary only")
    if train.n_samples < 2:
        raise ValidationError("need >= 2 training samples")


def fit_erm01_1d(train: LabeledFeatureSet) -> ErmFit:
    """Exact empirical 0-1 loss minimizer over 1-d threshold classifiers."""
    _check_erm_input(train, 1)
    n = train.n_samples
    if train.n_classes == 1:
        clf = _binary_clf(np.zeros(1), -1.0)
        return ErmFit(classifier=clf, train_error=0.0, degenerate=True)
    orient, threshold, _ = kernels.erm01_1d_search(train.features[:, 0],
                                                   train.labels)
    clf = _binary_clf(np.array([float(orient)]), -orient * threshold)
    err = float((clf.predict(train.features) != train.labels).mean())
    return ErmFit(classifier=clf, train_error=err)


def fit_erm01_2d(train: LabeledFeatureSet) -> ErmFit:
    """Exact empirical 0-1 loss minimizer over linear classifiers in R^2.

    Rotating-line sweep over anchor points, O(n^2 log n); equals exhaustive
    enumeration over pair-anchored boundaries.
    """
    _check_erm_input(train, 2)
    if train.n_classes == 1:
        clf = _binary_clf(np.zeros(2), -1.0)
        return ErmFit(classifier=clf, train_error=0.0, degenerate=True)
    w, b, _ = kernels.erm01_2d_search(train.features, train.labels)
    clf = _binary_clf(w, b)
    err = float((clf.predict(train.features) != train.labels).mean())
    return ErmFit(classifier=clf, train_error=err)


def evaluate(clf: LinearClassifier, query: LabeledFeatureSet) -> float:
    """Fraction of misclassified query points."""
    if clf.dim != query.dim:
        raise ValidationError("classifier/query dimension mismatch")
    if query.n_samples == 0:
        raise ValidationError("query set is empty")
    return float((clf.predict(query.features) != query.labels).mean())
