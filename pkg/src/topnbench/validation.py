"""Input validation helpers shared by the recommender estimators."""

import numpy as np
import scipy.sparse as sp

from .interactions import InteractionMatrix


def check_interactions(X) -> sp.csr_matrix:
    """Coerce training input to a canonical CSR interaction matrix.

    Accepts an :class:`InteractionMatrix`, any scipy sparse matrix, or a
    dense 2-D array. Returns float64 CSR with sorted indices, duplicates
    summed, and all stored values finite and nonnegative.
    """
    if isinstance(X, InteractionMatrix):
        X = X.matrix
    if sp.issparse(X):
        mat = X.tocsr().astype(np.float64)
    else:
        arr = np.asarray(X, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D user-item matrix, got shape {arr.shape}")
        mat = sp.csr_matrix(arr)
    mat.sum_duplicates()
    mat.sort_indices()
    if mat.shape[0] == 0 or mat.shape[1] == 0:
        raise ValueError(f"interaction matrix has empty dimension: {mat.shape}")
    if mat.nnz and not np.all(np.isfinite(mat.data)):
        raise ValueError("interaction matrix contains non-finite values")
    if mat.nnz and mat.data.min() < 0:
        raise ValueError("interaction matrix contains negative values")
    return mat


def check_user(user: int, n_users: int) -> int:
    """Validate a dense user index against the fitted matrix."""
    user = int(user)
    if not 0 <= user < n_users:
        raise ValueError(f"user index {user} out of range [0, {n_users})")
    return user


def check_positive(name: str, value, minimum=0) -> None:
    if value <= minimum:
        raise ValueError(f"{name} must be > {minimum}, got {value}")
