"""Threshold metrics with binary relevance: nDCG@n and Precision@n.

Scalar, pure-Python implementations. Evaluation sums these per user in a
fixed order, so the strategy machinery and the conventional metric produce
bit-identical numbers for the top-n selection.
"""

import math
from typing import Sequence

#: Position discounts 1/log2(pos+1) are cached; lists longer than this are
#: not expected in selection-strategy evaluation.
_MAX_CACHED = 64
_DISCOUNTS = [1.0 / math.log2(pos + 2) for pos in range(_MAX_CACHED)]


def _discount(pos: int) -> float:
    if pos < _MAX_CACHED:
        return _DISCOUNTS[pos]
    return 1.0 / math.log2(pos + 2)


def ideal_dcg(n_relevant: int, n: int) -> float:
    """DCG of a list whose first min(n, n_relevant) positions are all hits."""
    return sum(_DISCOUNTS[pos] if pos < _MAX_CACHED else _discount(pos)
               for pos in range(min(n, n_relevant)))


def ndcg_at_n(selected: Sequence, relevant: set, n: int) -> float:
    """Binary-relevance nDCG over an ordered selection of exactly n items.

    DCG discounts position pos (1-based) by 1/log2(pos+1); the ideal DCG
    assumes the first min(n, |relevant|) positions hit. Returns 0.0 when
    the relevant set is empty.
    """
    if len(selected) != n:
        raise ValueError(f"selection has {len(selected)} items, expected {n}")
    if not relevant:
        return 0.0
    dcg = 0.0
    for pos, item in enumerate(selected):
        if item in relevant:
            dcg += _discount(pos)
    return dcg / ideal_dcg(len(relevant), n)


def precision_at_n(selected: Sequence, relevant: set, n: int) -> float:
    """Fraction of the n selected items that are relevant."""
    if len(selected) != n:
        raise ValueError(f"selection has {len(selected)} items, expected {n}")
    hits = sum(1 for item in selected if item in relevant)
    return hits / n
