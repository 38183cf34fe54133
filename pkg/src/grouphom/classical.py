"""Classical per-group baselines: chi-square, likelihood ratio, and their
aggregated forms.

Two aggregation styles are provided for both the chi-square statistic and
the -2 log likelihood-ratio:

* a naive standardization using the chi-square limit's moments
  (mean ``d - 1``, variance ``2(d - 1)``), which is badly mis-centered
  when sample sizes are small relative to ``d``;
* an oracle standardization using the exact null mean and variance of the
  per-group statistic at a known probability vector, obtained either by
  full enumeration of the outcome pairs or by seeded Monte Carlo.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy
from scipy.stats import chi2 as _chi2_dist

from . import _batch
from .data import GroupedDataset, GroupPair, ProbVector
from .errors import OutOfRange, TooManyOutcomes, ZeroVariance

__all__ = [
    "MomentPair",
    "chi_square_group",
    "lrt_group",
    "uit_statistic",
    "wk_statistic",
    "vk_statistic",
    "wk_prime",
    "vk_prime",
    "chi_square_pooled",
    "exact_enumeration_feasible",
    "chi_square_moments_oracle",
    "lrt_moments_oracle",
]

#: Pair-enumeration ceiling for the exact moments path.
EXACT_PAIR_LIMIT = 10_000_000


@dataclass(frozen=True)
class MomentPair:
    """Null mean and variance of a per-group statistic."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ZeroVariance(f"negative variance {self.variance!r}")


def chi_square_group(pair: GroupPair) -> float:
    """Two-sample chi-square statistic for one group.

    ``(n1 n2 / n) * sum_j (p1j - p2j)^2 / pj`` with ``pj`` the pooled
    proportions; categories with pooled count zero contribute 0.
    """
    return float(
        _batch.chi2_group(
            pair.sample1.counts,
            pair.sample2.counts,
            float(pair.sample1.total),
            float(pair.sample2.total),
        )
    )


def lrt_group(pair: GroupPair) -> float:
    """-2 log likelihood-ratio statistic for one group (0*log 0 = 0)."""
    return float(
        _batch.lrt_group(
            pair.sample1.counts,
            pair.sample2.counts,
            float(pair.sample1.total),
            float(pair.sample2.total),
        )
    )


def _group_values(ds: GroupedDataset, stat) -> np.ndarray:
    return np.array([stat(g) for g in ds], dtype=np.float64)


def uit_statistic(ds: GroupedDataset) -> float:
    """Sum of the per-group chi-square statistics."""
    return float(_group_values(ds, chi_square_group).sum())


def _naive_standardized(values: np.ndarray, d: int) -> float:
    k = values.size
    return float(
        (values - (d - 1)).sum() / math.sqrt(2.0 * (d - 1)) / math.sqrt(k)
    )


def wk_statistic(ds: GroupedDataset, d: int | None = None) -> float:
    """Chi-square aggregate standardized by the limiting moments.

    ``sum_r (T_r - (d-1)) / sqrt(2(d-1)) / sqrt(k)``.
    """
    return _naive_standardized(
        _group_values(ds, chi_square_group), ds.d if d is None else d
    )


def vk_statistic(ds: GroupedDataset, d: int | None = None) -> float:
    """Likelihood-ratio aggregate standardized by the limiting moments."""
    return _naive_standardized(
        _group_values(ds, lrt_group), ds.d if d is None else d
    )


def _moments_arrays(moments, k: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(moments, MomentPair):
        moments = [moments] * k
    moments = list(moments)
    if len(moments) != k:
        raise OutOfRange(
            f"need one moment pair per group: got {len(moments)} for k={k}"
        )
    means = np.array([m.mean for m in moments], dtype=np.float64)
    variances = np.array([m.variance for m in moments], dtype=np.float64)
    return means, variances


def _oracle_standardized(values, means, variances) -> float:
    den = variances.sum()
    if den <= 0:
        raise ZeroVariance("sum of null variances is not positive")
    return float((values - means).sum() / math.sqrt(den))


def wk_prime(ds: GroupedDataset, moments) -> float:
    """Chi-square aggregate standardized by exact null moments.

    ``moments`` is a single :class:`MomentPair` (shared by all groups) or
    a sequence of one per group: ``sum_r (T_r - E_r) / sqrt(sum_r V_r)``.
    """
    means, variances = _moments_arrays(moments, ds.k)
    return _oracle_standardized(
        _group_values(ds, chi_square_group), means, variances
    )


def vk_prime(ds: GroupedDataset, moments) -> float:
    """Likelihood-ratio aggregate standardized by exact null moments."""
    means, variances = _moments_arrays(moments, ds.k)
    return _oracle_standardized(_group_values(ds, lrt_group), means, variances)


def chi_square_pooled(ds: GroupedDataset) -> tuple[float, float]:
    """No-grouping baseline: chi-square test on the group-summed counts.

    Returns the statistic and its upper-tail p-value against the
    chi-square distribution with ``d - 1`` degrees of freedom.
    """
    c1 = ds.counts_matrix(1).sum(axis=0)
    c2 = ds.counts_matrix(2).sum(axis=0)
    stat = float(_batch.chi2_group(c1, c2, float(c1.sum()), float(c2.sum())))
    return stat, float(_chi2_dist.sf(stat, ds.d - 1))


# ---------------------------------------------------------------------------
# Null moments of a per-group statistic at a known probability vector.
# ---------------------------------------------------------------------------


def exact_enumeration_feasible(d: int, n1: int, n2: int) -> bool:
    """Whether the ``m1 * m2`` outcome-pair grid fits the exact path."""
    m1 = math.comb(n1 + d - 1, d - 1)
    m2 = math.comb(n2 + d - 1, d - 1)
    return m1 * m2 <= EXACT_PAIR_LIMIT


def _compositions(n: int, d: int) -> np.ndarray:
    """All count vectors of length d summing to n, as an (m, d) array."""
    if d == 1:
        return np.array([[n]], dtype=np.int64)
    bars = np.array(
        list(itertools.combinations(range(n + d - 1), d - 1)), dtype=np.int64
    )
    full = np.empty((bars.shape[0], d + 1), dtype=np.int64)
    full[:, 0] = -1
    full[:, 1:d] = bars
    full[:, d] = n + d - 1
    return np.diff(full, axis=1) - 1


def _log_pmf(counts: np.ndarray, n: int, pi: np.ndarray) -> np.ndarray:
    return (
        gammaln(n + 1)
        - gammaln(counts + 1).sum(axis=1)
        + xlogy(counts, pi).sum(axis=1)
    )


def _null_moments(
    pi: ProbVector,
    n1: int,
    n2: int,
    stat_fn,
    method: str,
    reps: int,
    seed,
) -> MomentPair:
    p = pi.probs
    d = p.size
    if method == "auto":
        method = "exact" if exact_enumeration_feasible(d, n1, n2) else "montecarlo"
    if method == "exact":
        if not exact_enumeration_feasible(d, n1, n2):
            raise TooManyOutcomes(
                f"exact enumeration over >{EXACT_PAIR_LIMIT} outcome pairs "
                f"(d={d}, n1={n1}, n2={n2}); use method='montecarlo'"
            )
        v1 = _compositions(n1, d)
        v2 = _compositions(n2, d)
        w1 = np.exp(_log_pmf(v1, n1, p))
        w2 = np.exp(_log_pmf(v2, n2, p))
        mean = 0.0
        second = 0.0
        chunk = max(1, 2_000_000 // max(1, v2.shape[0]))
        for lo in range(0, v1.shape[0], chunk):
            hi = min(lo + chunk, v1.shape[0])
            t = stat_fn(
                v1[lo:hi, None, :], v2[None, :, :], float(n1), float(n2)
            )
            w = w1[lo:hi, None] * w2[None, :]
            mean += float((w * t).sum())
            second += float((w * t * t).sum())
        return MomentPair(mean, max(0.0, second - mean * mean))
    if method == "montecarlo":
        if reps < 2:
            raise OutOfRange(f"montecarlo moments need reps >= 2, got {reps}")
        rng = np.random.default_rng(seed)
        c1 = rng.multinomial(n1, p, size=reps)
        c2 = rng.multinomial(n2, p, size=reps)
        t = stat_fn(c1, c2, float(n1), float(n2))
        return MomentPair(float(t.mean()), float(t.var(ddof=1)))
    raise OutOfRange(f"method must be 'auto', 'exact' or 'montecarlo': {method!r}")


def chi_square_moments_oracle(
    pi: ProbVector,
    n1: int,
    n2: int,
    method: str = "auto",
    reps: int = 100_000,
    seed=None,
) -> MomentPair:
    """Null mean and variance of the per-group chi-square statistic.

    With both samples drawn from ``pi``, enumerates every outcome pair
    weighted by its exact multinomial probability when the grid has at
    most ``EXACT_PAIR_LIMIT`` entries (or ``method='exact'`` forces it),
    otherwise estimates by seeded Monte Carlo.
    """
    return _null_moments(
        pi, n1, n2, _batch.chi2_group, method, reps, seed
    )


def lrt_moments_oracle(
    pi: ProbVector,
    n1: int,
    n2: int,
    method: str = "auto",
    reps: int = 100_000,
    seed=None,
) -> MomentPair:
    """Null mean and variance of the -2 log likelihood-ratio statistic."""
    return _null_moments(pi, n1, n2, _batch.lrt_group, method, reps, seed)
