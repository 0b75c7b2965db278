"""Estimator base class and shared prediction plumbing."""

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..validation import check_user


@dataclass(frozen=True)
class RecommenderConfig:
    """Algorithm tag plus hyperparameters and the model seed."""

    algorithm: str
    params: Mapping = field(default_factory=dict)
    seed: int = 0


@dataclass
class RankedList:
    """One user's ordered predictions: unique items, non-increasing scores."""

    user: int
    items: np.ndarray
    scores: np.ndarray


def rank_items(
    scores: np.ndarray, n: int, exclude: Optional[Iterable[int]] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Top-n item indices by score, excluded items skipped.

    Ties are broken by ascending item index, so rankings are fully
    deterministic. Returns (items, scores); raises if fewer than n items
    remain after exclusion.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n_items = len(scores)
    excluded = (
        np.asarray(sorted(set(map(int, exclude))), dtype=np.intp)
        if exclude is not None
        else np.empty(0, dtype=np.intp)
    )
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > n_items - len(excluded):
        raise ValueError(
            f"cannot rank {n} items: catalog has {n_items} items, {len(excluded)} excluded"
        )
    if len(excluded):
        scores = scores.copy()
        scores[excluded] = -np.inf
    order = np.lexsort((np.arange(n_items), -scores))[:n]
    return order, scores[order]


class BaseRecommender(BaseEstimator):
    """Common fit/recommend surface for all recommenders.

    Subclasses implement ``fit(X)`` (setting ``n_users_`` / ``n_items_``)
    and ``score_user(user)`` returning raw scores for every item. Ranking,
    exclusion handling, and deterministic tie-breaking live in
    :func:`rank_items`.
    """

    def score_user(self, user: int) -> np.ndarray:
        raise NotImplementedError

    def recommend(
        self, user: int, n: int, exclude: Optional[Iterable[int]] = None
    ) -> RankedList:
        """Top-n items for a user, skipping the exclusion set."""
        check_is_fitted(self, "n_items_")
        user = check_user(user, self.n_users_)
        items, item_scores = rank_items(self.score_user(user), n, exclude)
        return RankedList(user, items, item_scores)

    def recommend_all(
        self, n: int, exclude_per_user: Optional[Mapping[int, Iterable[int]]] = None
    ) -> dict[int, RankedList]:
        """Ranked lists for every fitted user, in user index order."""
        exclude_per_user = exclude_per_user or {}
        return {
            user: self.recommend(user, n, exclude_per_user.get(user))
            for user in range(self.n_users_)
        }
