"""Recommender estimators with a scikit-learn style fit/recommend API."""

from .als import ALSRecommender, als_objective
from .base import BaseRecommender, RankedList, RecommenderConfig
from .baselines import PopularityRecommender, RandomRecommender
from .bpr import BPRRecommender, triple_grads, triple_loss
from .knn import ItemKNNRecommender, UserKNNRecommender, knn_similarity
from .weighting import weight_matrix

ALGORITHM_CLASSES = {
    "als": ALSRecommender,
    "bpr": BPRRecommender,
    "item_knn": ItemKNNRecommender,
    "user_knn": UserKNNRecommender,
    "popularity": PopularityRecommender,
    "random": RandomRecommender,
}


def make_recommender(config: RecommenderConfig) -> BaseRecommender:
    """Instantiate the estimator described by a :class:`RecommenderConfig`."""
    try:
        cls = ALGORITHM_CLASSES[config.algorithm]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {config.algorithm!r}; "
            f"expected one of {sorted(ALGORITHM_CLASSES)}"
        )
    return cls(**dict(config.params), seed=config.seed)


from .io import load_model, save_model  # noqa: E402  (needs ALGORITHM_CLASSES)

__all__ = [
    "ALGORITHM_CLASSES",
    "ALSRecommender",
    "BPRRecommender",
    "BaseRecommender",
    "ItemKNNRecommender",
    "PopularityRecommender",
    "RandomRecommender",
    "RankedList",
    "RecommenderConfig",
    "UserKNNRecommender",
    "als_objective",
    "knn_similarity",
    "load_model",
    "make_recommender",
    "save_model",
    "triple_grads",
    "triple_loss",
    "weight_matrix",
]
