"""Reproducible per-user train/validation/test splits."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._seeding import stream_rng
from .interactions import InteractionMatrix


@dataclass
class FoldSplit:
    """One repetition's per-user disjoint train/validation/test assignment.

    The three matrices share the parent's identifier maps; per user, their
    item sets are pairwise disjoint and union to the user's interactions.
    """

    repetition: int
    seed: int
    train: InteractionMatrix
    validation: InteractionMatrix
    test: InteractionMatrix


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_per_user(
    matrix: InteractionMatrix,
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
    repetition: int = 0,
) -> FoldSplit:
    """Split each user's interactions into train/validation/test.

    Per user, interactions are shuffled with an RNG stream keyed by
    (seed, repetition, user index), then ``max(1, round(ratio * m))`` items
    go to test and validation and the rest to train. Deterministic and
    independent of user iteration order.
    """
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be three fractions summing to 1")
    _, val_ratio, test_ratio = ratios

    parts = {name: ([], []) for name in ("train", "validation", "test")}
    for user in range(matrix.n_users):
        items = matrix.row_items(user)
        m = len(items)
        if m < 3:
            raise ValueError(
                f"user index {user} has {m} interactions; need >= 3 to fill all three sets"
            )
        n_test = max(1, _round_half_up(test_ratio * m))
        n_val = max(1, _round_half_up(val_ratio * m))
        # Clamps never bind for the default 60/20/20 ratios; they keep all
        # three sets nonempty under extreme custom ratios.
        n_test = min(n_test, m - 2)
        n_val = min(n_val, m - 1 - n_test)
        rng = stream_rng(seed, "split", repetition, user)
        shuffled = items[rng.permutation(m)]
        assignment = {
            "test": shuffled[:n_test],
            "validation": shuffled[n_test : n_test + n_val],
            "train": shuffled[n_test + n_val :],
        }
        for name, chosen in assignment.items():
            rows, cols = parts[name]
            rows.extend([user] * len(chosen))
            cols.extend(chosen.tolist())

    shape = (matrix.n_users, matrix.n_items)
    members = {}
    for name, (rows, cols) in parts.items():
        mat = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=shape)
        mat.sort_indices()
        members[name] = matrix.with_matrix(mat)
    return FoldSplit(repetition, seed, members["train"], members["validation"], members["test"])
