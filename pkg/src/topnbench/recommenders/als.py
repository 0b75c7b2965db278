"""Confidence-weighted alternating least squares for implicit feedback.

Observed interactions carry binary preference 1 with confidence
``1 + alpha * r``; unobserved cells carry preference 0 with confidence 1.
Each half-sweep solves the regularized normal equations for one side
exactly, so the training objective never increases.
"""

import numpy as np
import scipy.sparse as sp

from .._seeding import stream_rng
from ..validation import check_interactions, check_positive
from .base import BaseRecommender


def _solve_side(mat: sp.csr_matrix, other: np.ndarray, alpha: float, reg: float) -> np.ndarray:
    """Exact least-squares update for all rows of one side."""
    n_factors = other.shape[1]
    gram = other.T @ other + reg * np.eye(n_factors)
    new = np.zeros((mat.shape[0], n_factors))
    for row in range(mat.shape[0]):
        lo, hi = mat.indptr[row], mat.indptr[row + 1]
        if lo == hi:
            continue  # no observations: regularization pulls the row to zero
        idx = mat.indices[lo:hi]
        r = mat.data[lo:hi]
        m = other[idx]
        a = gram + (m.T * (alpha * r)) @ m
        b = m.T @ (1.0 + alpha * r)
        new[row] = np.linalg.solve(a, b)
    if not np.all(np.isfinite(new)):
        raise ArithmeticError("ALS solve produced non-finite factors (ill-conditioned problem)")
    return new


def als_objective(
    user_factors: np.ndarray,
    item_factors: np.ndarray,
    train: sp.csr_matrix,
    alpha: float,
    reg: float,
) -> float:
    """Full confidence-weighted squared-error objective incl. regularization."""
    gram = item_factors.T @ item_factors
    total_sq = float(np.sum((user_factors @ gram) * user_factors))
    observed = 0.0
    for user in range(train.shape[0]):
        lo, hi = train.indptr[user], train.indptr[user + 1]
        if lo == hi:
            continue
        preds = item_factors[train.indices[lo:hi]] @ user_factors[user]
        conf = 1.0 + alpha * train.data[lo:hi]
        observed += float(np.sum(conf * (1.0 - preds) ** 2 - preds**2))
    reg_term = reg * (float(np.sum(user_factors**2)) + float(np.sum(item_factors**2)))
    return total_sq + observed + reg_term


class ALSRecommender(BaseRecommender):
    """Implicit-feedback matrix factorization trained with ALS."""

    def __init__(self, factors=32, regularization=0.01, confidence_alpha=10.0,
                 iterations=15, track_objective=False, seed=0):
        self.factors = factors
        self.regularization = regularization
        self.confidence_alpha = confidence_alpha
        self.iterations = iterations
        self.track_objective = track_objective
        self.seed = seed

    def fit(self, X, y=None):
        check_positive("factors", self.factors)
        check_positive("regularization", self.regularization)
        check_positive("confidence_alpha", self.confidence_alpha)
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        mat = check_interactions(X)
        self.n_users_, self.n_items_ = mat.shape
        mat_t = mat.T.tocsr()

        rng = stream_rng(self.seed, "als-init")
        self.user_factors_ = rng.uniform(-0.01, 0.01, (self.n_users_, self.factors))
        self.item_factors_ = rng.uniform(-0.01, 0.01, (self.n_items_, self.factors))

        history = []
        for _ in range(self.iterations):
            self.user_factors_ = _solve_side(
                mat, self.item_factors_, self.confidence_alpha, self.regularization
            )
            if self.track_objective:
                history.append(self.objective(mat))
            self.item_factors_ = _solve_side(
                mat_t, self.user_factors_, self.confidence_alpha, self.regularization
            )
            if self.track_objective:
                history.append(self.objective(mat))
        self.objective_history_ = history
        return self

    def objective(self, X) -> float:
        """Training objective of the current factors on ``X``."""
        mat = check_interactions(X)
        return als_objective(
            self.user_factors_, self.item_factors_, mat,
            self.confidence_alpha, self.regularization,
        )

    def score_user(self, user: int) -> np.ndarray:
        return self.item_factors_ @ self.user_factors_[user]
