"""Multi-class linear discriminant analysis with shrinkage.

Gaussian classes sharing one covariance give linear scores
``w_k . x + b_k`` with ``w_k = S^-1 mu_k`` and
``b_k = -mu_k . w_k / 2 + log prior_k``. Ties go to the first class in
label order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, TactileBciError
from .features import FeatureMatrix

__all__ = ["SingularCovarianceError", "LdaModel", "fit_lda", "predict", "predict_scores"]


class SingularCovarianceError(TactileBciError, np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class LdaModel:
    class_labels: tuple
    class_means: np.ndarray
    pooled_covariance: np.ndarray
    weights: np.ndarray
    biases: np.ndarray
    shrinkage_lambda: float
    priors: np.ndarray

    @property
    def n_features(self) -> int:
        return self.class_means.shape[1]

    def check(self, atol: float = 1e-8) -> None:
        """Raise :class:`DomainError` if the stored fields are mutually inconsistent."""
        s = self.pooled_covariance
        if not np.allclose(s, s.T, rtol=0, atol=atol):
            raise DomainError("pooled covariance is not symmetric")
        if np.linalg.eigvalsh(s)[0] <= 0:
            raise DomainError("pooled covariance is not positive definite")
        w = np.linalg.solve(s, self.class_means.T).T
        if not np.allclose(w, self.weights, rtol=atol, atol=atol):
            raise DomainError("weights do not match solve(pooled_covariance, class_means)")
        b = -0.5 * np.einsum("kd,kd->k", self.class_means, self.weights) + np.log(self.priors)
        if not np.allclose(b, self.biases, rtol=atol, atol=atol):
            raise DomainError("biases do not match the class means, weights and priors")


def fit_lda(features: FeatureMatrix, shrinkage_lambda: float = 0.05, label_order=None) -> LdaModel:
    """Fit class means and the shrunk pooled within-class covariance.

    Shrinkage pulls the pooled covariance towards ``trace(S)/d * I``.
    ``label_order`` fixes the class order (defaults to first appearance).
    """
    if not 0.0 <= shrinkage_lambda <= 1.0:
        raise DomainError(f"shrinkage lambda must lie in [0, 1], got {shrinkage_lambda}")
    x = features.values
    labels = np.array(features.labels, dtype=object)
    classes = tuple(label_order) if label_order is not None else tuple(dict.fromkeys(features.labels))
    classes = tuple(c for c in classes if np.any(labels == c))
    if len(classes) < 2:
        raise DomainError(f"LDA needs at least 2 classes, got {list(classes)}")
    n, d = x.shape
    means = np.empty((len(classes), d))
    counts = np.empty(len(classes))
    scatter = np.zeros((d, d))
    for i, c in enumerate(classes):
        xc = x[labels == c]
        if xc.shape[0] < 2:
            raise DomainError(f"class {c!r} has {xc.shape[0]} trial(s); LDA needs at least 2 per class")
        means[i] = xc.mean(axis=0)
        counts[i] = xc.shape[0]
        centered = xc - means[i]
        scatter += centered.T @ centered
    if n - len(classes) < 1:
        raise DomainError("not enough trials to estimate the pooled covariance")
    pooled = scatter / (n - len(classes))
    pooled = (1.0 - shrinkage_lambda) * pooled + shrinkage_lambda * (np.trace(pooled) / d) * np.eye(d)
    pooled = 0.5 * (pooled + pooled.T)
    eig_min = np.linalg.eigvalsh(pooled)[0]
    if not eig_min > 1e-12 * max(np.trace(pooled) / d, np.finfo(float).tiny):
        hint = "; try a shrinkage lambda > 0" if shrinkage_lambda == 0 else ""
        raise SingularCovarianceError(f"pooled covariance is singular (smallest eigenvalue {eig_min:.3e}){hint}")
    weights = np.linalg.solve(pooled, means.T).T
    priors = counts / counts.sum()
    biases = -0.5 * np.einsum("kd,kd->k", means, weights) + np.log(priors)
    return LdaModel(classes, means, pooled, weights, biases, float(shrinkage_lambda), priors)


def _values(model: LdaModel, features) -> np.ndarray:
    x = features.values if isinstance(features, FeatureMatrix) else np.atleast_2d(np.asarray(features, float))
    if x.shape[1] != model.n_features:
        raise DomainError(f"shape mismatch: model expects {model.n_features} features, got {x.shape[1]}")
    return x


def predict_scores(model: LdaModel, features) -> np.ndarray:
    """Discriminant scores, shape ``(n_trials, n_classes)``."""
    return _values(model, features) @ model.weights.T + model.biases


def predict(model: LdaModel, features) -> list[str]:
    scores = predict_scores(model, features)
    return [model.class_labels[k] for k in np.argmax(scores, axis=1)]
