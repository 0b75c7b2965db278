"""Feature weighting schemes applied to the interaction matrix before kNN."""

import numpy as np
import scipy.sparse as sp

WEIGHTING_SCHEMES = ("none", "tfidf", "bm25")


def weight_matrix(
    train: sp.csr_matrix, scheme: str = "none", k1: float = 1.2, b: float = 0.75
) -> sp.csr_matrix:
    """Re-weight binary interactions with none / TF-IDF / BM25.

    * none:  entry = 1 at every interaction.
    * tfidf: entry = log(1 + N_users / df(item)).
    * bm25:  entry = idf(item) * (k1+1) / (1 + k1*(1 - b + b*len(user)/avg_len))
      with idf(item) = log((N_users - df + 0.5) / (df + 0.5) + 1).

    Term frequency is 1 throughout (the matrix is binary).
    """
    if scheme not in WEIGHTING_SCHEMES:
        raise ValueError(f"unknown weighting scheme {scheme!r}; expected one of {WEIGHTING_SCHEMES}")
    mat = train.tocsr().astype(np.float64).copy()
    mat.sort_indices()
    if mat.nnz == 0:
        return mat
    mat.data[:] = 1.0
    if scheme == "none":
        return mat

    n_users = mat.shape[0]
    df = np.bincount(mat.indices, minlength=mat.shape[1]).astype(np.float64)

    if scheme == "tfidf":
        idf = np.log1p(n_users / np.maximum(df, 1.0))
        mat.data = idf[mat.indices]
        return mat

    if k1 <= 0:
        raise ValueError("bm25 requires k1 > 0")
    if not 0 <= b <= 1:
        raise ValueError("bm25 requires b in [0, 1]")
    idf = np.log((n_users - df + 0.5) / (df + 0.5) + 1.0)
    user_len = np.diff(mat.indptr).astype(np.float64)
    avg_len = user_len[user_len > 0].mean()
    norm = 1.0 + k1 * (1.0 - b + b * user_len / avg_len)
    row_of = np.repeat(np.arange(n_users), np.diff(mat.indptr))
    mat.data = idf[mat.indices] * (k1 + 1.0) / norm[row_of]
    return mat
