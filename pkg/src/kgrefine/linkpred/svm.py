"""Soft-margin SVM solved with sequential minimal optimization (Platt-style
pair updates with a KKT-driven outer loop). Kernels: linear and rbf.
Probability scores come from a logistic link fitted on decision values.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateLabels, DimensionMismatch, NonConvergence
from .logreg import LogRegClassifier, _sigmoid


def linear_kernel(A, B):
    return A @ B.T


def rbf_kernel(A, B, gamma):
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :]
          - 2.0 * A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


class SVMClassifier:
    def __init__(self, kernel: str = "linear", C: float = 1.0,
                 gamma: float | None = None, tol: float = 1e-4,
                 max_passes: int = 200, seed: int = 0):
        if kernel not in ("linear", "rbf"):
            raise ValueError(f"unsupported kernel: {kernel}")
        self.kernel = kernel
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_passes = max_passes
        self.seed = seed
        self.alpha = None
        self.b = 0.0
        self.X = None
        self.y = None
        self.n_features = None
        self._platt = None

    def _kernel_matrix(self, A, B):
        if self.kernel == "linear":
            return linear_kernel(A, B)
        gamma = self.gamma if self.gamma is not None else 1.0 / A.shape[1]
        return rbf_kernel(A, B, gamma)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SVMClassifier":
        X = np.asarray(X, dtype=float)
        y01 = np.asarray(y)
        if len(np.unique(y01)) < 2:
            raise DegenerateLabels("training labels contain a single class")
        ys = np.where(y01 > 0, 1.0, -1.0)
        n = X.shape[0]
        self.X, self.y = X, ys
        self.n_features = X.shape[1]
        if self.gamma is None and self.kernel == "rbf":
            self.gamma = 1.0 / X.shape[1]
        K = self._kernel_matrix(X, X)
        alpha = np.zeros(n)
        b = 0.0
        rng = np.random.default_rng(self.seed)
        passes = 0
        total_passes = 0
        while passes < 3:
            if total_passes >= self.max_passes:
                if self._max_kkt_violation(K, alpha, b) > 1e-3:
                    raise NonConvergence(
                        f"SMO did not converge within {self.max_passes} passes")
                break
            changed = 0
            for i in range(n):
                f_i = (alpha * self.y) @ K[:, i] + b
                e_i = f_i - self.y[i]
                if ((self.y[i] * e_i < -self.tol and alpha[i] < self.C)
                        or (self.y[i] * e_i > self.tol and alpha[i] > 0)):
                    # second index: largest |E_i - E_j| among non-bound alphas,
                    # falling back to a random pick
                    f_all = K @ (alpha * self.y) + b
                    e_all = f_all - self.y
                    nonbound = np.flatnonzero((alpha > 0) & (alpha < self.C))
                    j = -1
                    if nonbound.size > 1:
                        cand = nonbound[nonbound != i]
                        if cand.size:
                            j = int(cand[np.argmax(np.abs(e_all[cand] - e_i))])
                    if j < 0:
                        j = int(rng.integers(n - 1))
                        if j >= i:
                            j += 1
                    if self._update_pair(K, alpha, i, j, e_i, float(e_all[j])):
                        changed += 1
                        b = self._recompute_b(K, alpha)
            total_passes += 1
            passes = passes + 1 if changed == 0 else 0
            b = self._recompute_b(K, alpha)
        self.alpha = alpha
        self.b = self._recompute_b(K, alpha)
        self._fit_platt(X, y01)
        return self

    def _update_pair(self, K, alpha, i, j, e_i, e_j) -> bool:
        yi, yj = self.y[i], self.y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        if yi != yj:
            lo, hi = max(0.0, aj_old - ai_old), min(self.C, self.C + aj_old - ai_old)
        else:
            lo, hi = max(0.0, ai_old + aj_old - self.C), min(self.C, ai_old + aj_old)
        if lo >= hi:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0:
            return False
        aj = aj_old - yj * (e_i - e_j) / eta
        aj = min(hi, max(lo, aj))
        if abs(aj - aj_old) < 1e-12:
            return False
        alpha[j] = aj
        alpha[i] = ai_old + yi * yj * (aj_old - aj)
        return True

    def _recompute_b(self, K, alpha) -> float:
        # average over non-bound support vectors; fall back to all SVs
        f_wo_b = K @ (alpha * self.y)
        nonbound = np.flatnonzero((alpha > 1e-10) & (alpha < self.C - 1e-10))
        idx = nonbound if nonbound.size else np.flatnonzero(alpha > 1e-10)
        if not idx.size:
            return 0.0
        return float(np.mean(self.y[idx] - f_wo_b[idx]))

    def _max_kkt_violation(self, K, alpha, b) -> float:
        f = K @ (alpha * self.y) + b
        margins = self.y * f
        viol = np.zeros_like(alpha)
        lower = alpha <= 1e-10
        upper = alpha >= self.C - 1e-10
        inner = ~lower & ~upper
        viol[lower] = np.maximum(0.0, 1.0 - margins[lower])
        viol[upper] = np.maximum(0.0, margins[upper] - 1.0)
        viol[inner] = np.abs(margins[inner] - 1.0)
        return float(np.max(viol)) if alpha.size else 0.0

    def kkt_violation(self) -> float:
        K = self._kernel_matrix(self.X, self.X)
        return self._max_kkt_violation(K, self.alpha, self.b)

    def _fit_platt(self, X, y01):
        scores = self.decision_function(X).reshape(-1, 1)
        if len(np.unique(y01)) < 2:
            self._platt = None
            return
        link = LogRegClassifier(C=1.0)
        try:
            link.fit(scores, y01)
            self._platt = link
        except DegenerateLabels:
            self._platt = None

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {X.shape[1]}")
        K = self._kernel_matrix(X, self.X)
        return K @ (self.alpha * self.y) + self.b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        scores = self.decision_function(X)
        if self._platt is not None:
            return self._platt.predict_proba(scores.reshape(-1, 1))
        return _sigmoid(scores)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(int)

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 1e-8)

    def weight_vector(self) -> np.ndarray:
        """Primal w for the linear kernel; margin is 2/||w||."""
        if self.kernel != "linear":
            raise ValueError("weight vector only defined for the linear kernel")
        return (self.alpha * self.y) @ self.X
