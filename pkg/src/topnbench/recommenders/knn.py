"""Item-item and user-user nearest-neighbor recommenders."""

import numpy as np
import scipy.sparse as sp

from ..validation import check_interactions
from .base import BaseRecommender
from .weighting import weight_matrix


def knn_similarity(weighted: sp.csr_matrix, axis: str = "item", truncation: int = 20) -> sp.csr_matrix:
    """Truncated cosine similarity table between items (columns) or users (rows).

    Self-similarity is excluded and each entity keeps its ``truncation``
    most similar neighbors (ties broken by ascending index). Zero vectors
    simply end up with empty neighbor lists.
    """
    if axis not in ("item", "user"):
        raise ValueError(f"axis must be 'item' or 'user', got {axis!r}")
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    vectors = weighted.T.tocsr() if axis == "item" else weighted.tocsr()
    vectors = vectors.astype(np.float64)

    norms = np.sqrt(np.asarray(vectors.multiply(vectors).sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    normed = sp.diags(inv) @ vectors

    sim = (normed @ normed.T).tocsr()
    sim.setdiag(0.0)
    sim.eliminate_zeros()

    # Keep the top-`truncation` neighbors per row.
    n = sim.shape[0]
    indptr = [0]
    cols_out: list[np.ndarray] = []
    data_out: list[np.ndarray] = []
    for i in range(n):
        lo, hi = sim.indptr[i], sim.indptr[i + 1]
        cols = sim.indices[lo:hi]
        vals = sim.data[lo:hi]
        keep = np.lexsort((cols, -vals))[:truncation]
        keep.sort()
        cols_out.append(cols[keep])
        data_out.append(vals[keep])
        indptr.append(indptr[-1] + len(keep))
    out = sp.csr_matrix(
        (np.concatenate(data_out) if data_out else np.empty(0),
         np.concatenate(cols_out) if cols_out else np.empty(0, dtype=np.int32),
         np.asarray(indptr)),
        shape=(n, n),
    )
    out.sort_indices()
    return out


class ItemKNNRecommender(BaseRecommender):
    """Item-based kNN: scores aggregate similarity * interaction weight.

    ``score(u, i) = sum над j in train(u) of sim(i, j) * w(u, j)``; with
    ``normalize=True`` the sum is divided by the total similarity mass of
    item i's retained neighbors among the user's items.
    """

    def __init__(self, neighbors=20, weighting="none", bm25_k1=1.2, bm25_b=0.75,
                 normalize=False, seed=0):
        self.neighbors = neighbors
        self.weighting = weighting
        self.bm25_k1 = bm25_k1
        self.bm25_b = bm25_b
        self.normalize = normalize
        self.seed = seed

    def fit(self, X, y=None):
        mat = check_interactions(X)
        self.n_users_, self.n_items_ = mat.shape
        self.weighted_ = weight_matrix(mat, self.weighting, self.bm25_k1, self.bm25_b)
        self.similarity_ = knn_similarity(self.weighted_, "item", self.neighbors)
        return self

    def score_user(self, user: int) -> np.ndarray:
        profile = np.asarray(self.weighted_[user].todense()).ravel()
        scores = self.similarity_ @ profile
        if self.normalize:
            mask = (profile != 0).astype(np.float64)
            denom = np.abs(self.similarity_) @ mask
            scores = np.divide(scores, denom, out=np.zeros_like(scores), where=denom > 0)
        return scores


class UserKNNRecommender(BaseRecommender):
    """User-based kNN: neighbor users vote with their interaction weights.

    ``score(u, i) = sum over neighbors v of sim(u, v) * w(v, i)``, divided
    by the user's total neighbor similarity when ``normalize=True``.
    """

    def __init__(self, neighbors=20, weighting="none", bm25_k1=1.2, bm25_b=0.75,
                 normalize=True, seed=0):
        self.neighbors = neighbors
        self.weighting = weighting
        self.bm25_k1 = bm25_k1
        self.bm25_b = bm25_b
        self.normalize = normalize
        self.seed = seed

    def fit(self, X, y=None):
        mat = check_interactions(X)
        self.n_users_, self.n_items_ = mat.shape
        self.weighted_ = weight_matrix(mat, self.weighting, self.bm25_k1, self.bm25_b)
        self.similarity_ = knn_similarity(self.weighted_, "user", self.neighbors)
        return self

    def score_user(self, user: int) -> np.ndarray:
        sims = np.asarray(self.similarity_[user].todense()).ravel()
        scores = self.weighted_.T @ sims
        if self.normalize:
            total = np.abs(sims).sum()
            if total > 0:
                scores = scores / total
        return scores
