"""Non-personalized baselines: global popularity and seeded random."""

import numpy as np

from .._seeding import stream_rng
from ..validation import check_interactions
from .base import BaseRecommender


class PopularityRecommender(BaseRecommender):
    """Ranks items by global interaction count (ties by item index)."""

    def __init__(self, seed=0):
        self.seed = seed

    def fit(self, X, y=None):
        mat = check_interactions(X)
        self.n_users_, self.n_items_ = mat.shape
        binary = mat.copy()
        binary.data[:] = 1.0
        self.item_counts_ = np.asarray(binary.sum(axis=0)).ravel()
        return self

    def score_user(self, user: int) -> np.ndarray:
        return self.item_counts_


class RandomRecommender(BaseRecommender):
    """Uniformly random rankings from a per-(seed, user) stream.

    The same (seed, user) always yields the same list, regardless of call
    order or parallel scheduling; different seeds yield different lists.
    """

    def __init__(self, seed=0):
        self.seed = seed

    def fit(self, X, y=None):
        mat = check_interactions(X)
        self.n_users_, self.n_items_ = mat.shape
        return self

    def score_user(self, user: int) -> np.ndarray:
        return stream_rng(self.seed, "random-scores", user).random(self.n_items_)
