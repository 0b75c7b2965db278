"""Bayesian personalized ranking: pairwise logistic SGD on (u, i, j) triples.

Each epoch draws one uniformly sampled negative item per observed
interaction (negative sampling keyed by (seed, epoch)), shuffles the
triples, and applies strictly sequential SGD updates, so a fit is a single
logical stream and bit-reproducible.
"""

import numpy as np
from numba import njit

from .._seeding import stream_rng
from ..validation import check_interactions, check_positive
from .base import BaseRecommender


def triple_loss(user_vec, pos_vec, neg_vec, reg: float) -> float:
    """Regularized pairwise logistic loss of one (u, i, j) triple."""
    margin = float(user_vec @ (pos_vec - neg_vec))
    data_term = float(np.logaddexp(0.0, -margin))  # -ln sigmoid(margin)
    reg_term = reg * float(user_vec @ user_vec + pos_vec @ pos_vec + neg_vec @ neg_vec)
    return data_term + reg_term


def triple_grads(user_vec, pos_vec, neg_vec, reg: float):
    """Gradients of :func:`triple_loss` w.r.t. (user, positive, negative) vectors."""
    margin = float(user_vec @ (pos_vec - neg_vec))
    # d(-ln sigmoid(x))/dx = -sigmoid(-x)
    slope = -1.0 / (1.0 + np.exp(margin))
    g_user = slope * (pos_vec - neg_vec) + 2.0 * reg * user_vec
    g_pos = slope * user_vec + 2.0 * reg * pos_vec
    g_neg = -slope * user_vec + 2.0 * reg * neg_vec
    return g_user, g_pos, g_neg


@njit(cache=True)
def _sgd_epoch(user_factors, item_factors, users, pos_items, neg_items, lr, reg):
    n_factors = user_factors.shape[1]
    for t in range(users.shape[0]):
        u = users[t]
        i = pos_items[t]
        j = neg_items[t]
        margin = 0.0
        for f in range(n_factors):
            margin += user_factors[u, f] * (item_factors[i, f] - item_factors[j, f])
        slope = 1.0 / (1.0 + np.exp(margin))  # sigmoid(-margin)
        for f in range(n_factors):
            w = user_factors[u, f]
            hi = item_factors[i, f]
            hj = item_factors[j, f]
            user_factors[u, f] = w + lr * (slope * (hi - hj) - 2.0 * reg * w)
            item_factors[i, f] = hi + lr * (slope * w - 2.0 * reg * hi)
            item_factors[j, f] = hj + lr * (-slope * w - 2.0 * reg * hj)


class BPRRecommender(BaseRecommender):
    """Matrix factorization trained with the BPR pairwise objective."""

    def __init__(self, factors=32, learning_rate=0.05, regularization=0.001,
                 epochs=30, seed=0):
        self.factors = factors
        self.learning_rate = learning_rate
        self.regularization = regularization
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y=None):
        check_positive("factors", self.factors)
        check_positive("learning_rate", self.learning_rate)
        if self.regularization < 0:
            raise ValueError("regularization must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        mat = check_interactions(X)
        self.n_users_, self.n_items_ = mat.shape

        rng = stream_rng(self.seed, "bpr-init")
        self.user_factors_ = rng.uniform(-0.01, 0.01, (self.n_users_, self.factors))
        self.item_factors_ = rng.uniform(-0.01, 0.01, (self.n_items_, self.factors))

        coo = mat.tocoo()
        obs_users = coo.row.astype(np.int64)
        obs_items = coo.col.astype(np.int64)
        # Encoded (user, item) pairs for vectorized negative rejection.
        obs_codes = np.sort(obs_users * self.n_items_ + obs_items)
        full_users = np.flatnonzero(np.diff(mat.indptr) == self.n_items_)
        if len(full_users):
            raise ValueError(
                f"{len(full_users)} users interacted with every item; "
                "negative sampling is impossible"
            )

        for epoch in range(self.epochs):
            rng_epoch = stream_rng(self.seed, "bpr-neg", epoch)
            order = rng_epoch.permutation(len(obs_users))
            users = obs_users[order]
            pos = obs_items[order]
            neg = self._sample_negatives(users, obs_codes, rng_epoch)
            _sgd_epoch(
                self.user_factors_, self.item_factors_, users, pos, neg,
                float(self.learning_rate), float(self.regularization),
            )
            if not (np.all(np.isfinite(self.user_factors_))
                    and np.all(np.isfinite(self.item_factors_))):
                raise ArithmeticError(
                    f"BPR diverged at epoch {epoch}: non-finite factors "
                    f"(learning_rate={self.learning_rate})"
                )
        return self

    def _sample_negatives(self, users, obs_codes, rng) -> np.ndarray:
        neg = rng.integers(0, self.n_items_, len(users))
        pending = np.flatnonzero(_is_observed(users, neg, obs_codes, self.n_items_))
        while len(pending):
            neg[pending] = rng.integers(0, self.n_items_, len(pending))
            still = _is_observed(users[pending], neg[pending], obs_codes, self.n_items_)
            pending = pending[still]
        return neg

    def score_user(self, user: int) -> np.ndarray:
        return self.item_factors_ @ self.user_factors_[user]


def _is_observed(users, items, obs_codes, n_items) -> np.ndarray:
    codes = users * n_items + items
    pos = np.searchsorted(obs_codes, codes)
    pos = np.minimum(pos, len(obs_codes) - 1)
    return obs_codes[pos] == codes
