"""L2-regularized logistic regression fit by damped Newton iterations.

Objective (the one the test oracle also minimizes):

    J(w, b) = 0.5 * ||w||^2 + C * sum_i log(1 + exp(-y_i (w.x_i + b)))

with y in {-1, +1} and an unregularized intercept. Convergence when the
gradient norm drops below 1e-6 or the iteration cap is hit.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateLabels, DimensionMismatch


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


class LogRegClassifier:
    def __init__(self, C: float = 1.0, tol: float = 1e-6, max_iter: int = 200):
        self.C = C
        self.tol = tol
        self.max_iter = max_iter
        self.w = None
        self.b = 0.0
        self.n_features = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogRegClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if len(np.unique(y)) < 2:
            raise DegenerateLabels("training labels contain a single class")
        ys = np.where(y > 0, 1.0, -1.0)
        n, d = X.shape
        self.n_features = d
        theta = np.zeros(d + 1)  # [w, b]
        Xb = np.hstack([X, np.ones((n, 1))])
        reg = np.ones(d + 1)
        reg[-1] = 0.0  # intercept unregularized
        for _ in range(self.max_iter):
            z = ys * (Xb @ theta)
            s = _sigmoid(-z)  # = 1 - sigma(z)
            grad = reg * theta - self.C * Xb.T @ (ys * s)
            gnorm = np.linalg.norm(grad)
            if gnorm < self.tol:
                break
            r = s * (1.0 - s)
            H = np.diag(reg) + self.C * (Xb.T * r) @ Xb
            step = np.linalg.solve(H, grad)
            # backtracking on the objective keeps Newton globally stable
            f0 = self._objective(Xb, ys, theta, reg)
            t = 1.0
            while t > 1e-8:
                cand = theta - t * step
                if self._objective(Xb, ys, cand, reg) <= f0 - 1e-4 * t * grad @ step:
                    break
                t *= 0.5
            theta = theta - t * step
        self.w = theta[:-1]
        self.b = float(theta[-1])
        return self

    def _objective(self, Xb, ys, theta, reg):
        z = ys * (Xb @ theta)
        return 0.5 * np.sum(reg * theta * theta) + self.C * np.sum(np.logaddexp(0.0, -z))

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {X.shape[1]}")
        return X @ self.w + self.b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(int)
