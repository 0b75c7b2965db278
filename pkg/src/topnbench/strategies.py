"""Selection strategies: choosing n positions out of the top-K of a ranked list."""

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence


@dataclass(frozen=True)
class SelectionStrategy:
    """A sorted set of n distinct positions within the top-K candidates.

    ``id`` is the lexicographic rank among all C(K, n) combinations;
    id 0 is always the conventional top-n prefix {0, ..., n-1}.
    """

    id: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("indices must be strictly ascending")

    @property
    def is_top_n(self) -> bool:
        return self.indices == tuple(range(len(self.indices)))

    def label(self) -> str:
        """Dash-joined index string used in persisted tables."""
        return "-".join(str(i) for i in self.indices)


def n_strategies(k: int, n: int) -> int:
    """Number of distinct strategies: C(k, n)."""
    return math.comb(k, n)


def enumerate_strategies(k: int, n: int) -> list[SelectionStrategy]:
    """All C(k, n) strategies in lexicographic order, ids 0..C(k,n)-1."""
    if not 1 <= n <= k:
        raise ValueError(f"need 1 <= n <= k, got n={n}, k={k}")
    return [
        SelectionStrategy(rank, combo)
        for rank, combo in enumerate(combinations(range(k), n))
    ]


def lexicographic_rank(indices: Sequence[int], k: int) -> int:
    """Rank of a sorted index combination in the lexicographic enumeration.

    Uses the combinatorial number system, so it agrees with the position
    of ``indices`` in :func:`enumerate_strategies` output.
    """
    n = len(indices)
    rank = 0
    prev = -1
    for pos, idx in enumerate(indices):
        for skipped in range(prev + 1, idx):
            rank += math.comb(k - skipped - 1, n - pos - 1)
        prev = idx
    return rank


def apply_strategy(items: Sequence, strategy: SelectionStrategy, k: int) -> list:
    """Pick the strategy's positions from the top-k of a ranked item list.

    The selected items keep their original relative order, so strategy id 0
    returns the plain top-n prefix.
    """
    if len(items) < k:
        raise ValueError(f"ranked list has {len(items)} items, need at least {k}")
    return [items[i] for i in strategy.indices]
