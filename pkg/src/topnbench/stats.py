"""Nonparametric rank statistics for strategy score tables.

Friedman test over blocks x treatments with tie correction, the Nemenyi
critical difference from the studentized range distribution (infinite
degrees of freedom, computed by numerical integration so arbitrary
treatment counts are supported), and validation-to-test Pearson
correlation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy import stats as spstats


@dataclass
class FriedmanResult:
    statistic: float
    p_value: float
    k: int
    n_blocks: int
    mean_ranks: np.ndarray  # rank 1 = best (highest score)


@dataclass
class NemenyiResult:
    alpha: float
    q_alpha: float
    critical_difference: float
    k: int
    n_blocks: int
    #: Filled by report assembly once mean ranks are known.
    not_different_with_best: float | None = None


@dataclass
class CorrelationResult:
    pearson_r: float
    n_samples: int


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..k of ``values`` in descending order; ties share the average."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(-values, kind="stable")
    ranks = np.empty(len(values))
    pos = 0
    while pos < len(values):
        end = pos
        while end + 1 < len(values) and values[order[end + 1]] == values[order[pos]]:
            end += 1
        ranks[order[pos : end + 1]] = (pos + end) / 2 + 1
        pos = end + 1
    return ranks


def friedman(scores: np.ndarray) -> FriedmanResult:
    """Friedman rank test on a blocks x treatments score matrix.

    Within each block, treatments are ranked (1 = best, ties share the
    average rank). The chi-square statistic uses the standard tie
    correction; the p-value comes from chi-square with k-1 degrees of
    freedom. A fully tied matrix yields statistic 0 and p 1.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise ValueError("scores must be a 2-D blocks x treatments matrix")
    n_blocks, k = scores.shape
    if n_blocks < 2 or k < 2:
        raise ValueError(f"need >= 2 blocks and >= 2 treatments, got {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores contain missing or non-finite cells")

    ranks = np.empty_like(scores)
    tie_term = 0.0
    for b in range(n_blocks):
        ranks[b] = _average_ranks(scores[b])
        _, counts = np.unique(scores[b], return_counts=True)
        tie_term += float(np.sum(counts**3 - counts))

    rank_sums = ranks.sum(axis=0)
    correction = 1.0 - tie_term / (n_blocks * k * (k * k - 1))
    numerator = 12.0 / (k * n_blocks * (k + 1)) * float(np.sum(rank_sums**2)) - 3.0 * n_blocks * (
        k + 1
    )
    if correction <= 0.0:
        # All cells tied in every block: no evidence of any difference.
        statistic = 0.0
    else:
        statistic = numerator / correction
        statistic = max(statistic, 0.0)
    p_value = float(spstats.chi2.sf(statistic, k - 1)) if statistic > 0 else 1.0
    return FriedmanResult(statistic, p_value, k, n_blocks, ranks.mean(axis=0))


def studentized_range_cdf(q: float, k: int) -> float:
    """CDF of the range of k iid standard normals (studentized range, df=inf)."""
    if q <= 0:
        return 0.0

    def integrand(x):
        return spstats.norm.pdf(x) * (spstats.norm.cdf(x + q) - spstats.norm.cdf(x)) ** (k - 1)

    value, _ = integrate.quad(integrand, -9.0, 9.0, limit=200, epsabs=1e-12, epsrel=1e-10)
    return min(1.0, k * value)


def studentized_range_quantile(p: float, k: int) -> float:
    """Inverse of :func:`studentized_range_cdf` in q, by bracketed root finding."""
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    lo, hi = 1e-6, 10.0
    while studentized_range_cdf(hi, k) < p:
        hi *= 2
        if hi > 1e4:
            raise RuntimeError("studentized range quantile bracket did not converge")
    return float(optimize.brentq(lambda q: studentized_range_cdf(q, k) - p, lo, hi, xtol=1e-10))


def nemenyi_cd(k: int, n_blocks: int, alpha: float = 0.05) -> NemenyiResult:
    """Nemenyi critical difference for k treatments over n blocks.

    CD = q_alpha * sqrt(k(k+1) / (6 n)), with q_alpha the studentized range
    quantile at 1 - alpha (infinite df) divided by sqrt(2). Two treatments
    whose mean ranks differ by more than CD are significantly different.
    """
    if k < 2 or n_blocks < 2:
        raise ValueError("need k >= 2 treatments and >= 2 blocks")
    if not 0 < alpha <= 0.2:
        raise ValueError("alpha must be in (0, 0.2]")
    q_alpha = studentized_range_quantile(1.0 - alpha, k) / math.sqrt(2.0)
    cd = q_alpha * math.sqrt(k * (k + 1) / (6.0 * n_blocks))
    return NemenyiResult(alpha, q_alpha, cd, k, n_blocks)


def not_different_fraction(mean_ranks: np.ndarray, critical_difference: float) -> float:
    """Fraction of treatments whose mean rank is within CD of the best.

    Ranks follow the convention of :func:`friedman`: lower is better.
    """
    mean_ranks = np.asarray(mean_ranks, dtype=float)
    if mean_ranks.size == 0:
        raise ValueError("mean_ranks must be nonempty")
    best = float(mean_ranks.min())
    return float(np.mean(mean_ranks <= best + critical_difference))


def pearson(x: np.ndarray, y: np.ndarray) -> CorrelationResult:
    """Product-moment correlation between two equal-length vectors.

    Requires length >= 3 and nonzero variance in both arguments; zero
    variance makes the coefficient undefined and raises ValueError.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D vectors of equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance: correlation undefined")
    r = float(np.sum(dx * dy) / (sx * sy))
    return CorrelationResult(max(-1.0, min(1.0, r)), len(x))
