"""Null-variance estimators for the aggregated squared-distance statistic.

Under the null, each group's statistic has variance

    var0 = 2/(n1(n1-1)) tr(Sigma^2) + 2/(n2(n2-1)) tr(Sigma^2)
         + 4/(n1 n2) tr(Sigma^2)

with Sigma the shared multinomial covariance.  The estimators differ in
how the trace terms are estimated from one group:

* ``test1`` — each term by its own unbiased estimator: an ordered-pair
  U-statistic of the counts for tr(Sigma^2) within each sample, and the
  trace of the product of the two bias-corrected covariance estimates for
  the cross term.  Unbiased under the null and under alternatives.
* ``test2`` — every term by the cross-sample product trace (unbiased
  under the null only).
* ``test3`` — every term by the pooled-sample U-statistic.
* ``test4``/``test5``/``test6`` — plug-in analogues of 1/2/3 with the
  empirical covariance used directly (no bias correction); always
  non-negative but biased in small samples.
* ``test7`` — nonparametric bootstrap of the aggregate statistic under
  pooled resampling.

Tests 1-3 can go negative in tiny samples; the decision layer treats a
non-positive aggregated variance as degenerate rather than clipping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _batch
from .data import (
    CountVector,
    GroupedDataset,
    GroupPair,
    ProbVector,
    empirical_proportions,
    pooled_counts,
)
from .errors import DimensionMismatch, InvalidB, SampleTooSmall

__all__ = [
    "VarianceEstimate",
    "centered_outer",
    "unbiased_sigma",
    "trace_sigma_sq_unbiased",
    "trace_product",
    "var0_group_test1",
    "var0_group_test2",
    "var0_group_test3",
    "var0_group_plugin",
    "var0_bootstrap",
    "var0_true",
    "var_true_full",
]


@dataclass(frozen=True)
class VarianceEstimate:
    """A null-variance value tagged with the estimator that produced it."""

    value: float
    estimator: str


def centered_outer(pi: ProbVector) -> np.ndarray:
    """Multinomial covariance factor diag(pi) - pi pi' for one trial."""
    p = pi.probs
    return np.diag(p) - np.outer(p, p)


def unbiased_sigma(v: CountVector) -> np.ndarray:
    """Bias-corrected covariance estimate n/(n-1) * (diag(p) - p p').

    Raises
    ------
    SampleTooSmall
        If the total is below 2.
    """
    n = v.total
    if n < 2:
        raise SampleTooSmall(f"covariance estimate needs a total >= 2, got {n}")
    return (n / (n - 1.0)) * centered_outer(empirical_proportions(v))


def trace_sigma_sq_unbiased(v: CountVector) -> float:
    """Unbiased estimate of tr(Sigma^2) from one count vector.

    Ordered-pair double sum over category pairs (t, s), t != s, of

        n_t n_s [ (n_t + n_s - 2)/(n - 2) - ((n_t - n_s)/(n - 2))^2 ]

    scaled by (n - 2) / (2 n (n-1) (n-3)).

    Raises
    ------
    SampleTooSmall
        If the total is below 4.
    """
    n = v.total
    if n < 4:
        raise SampleTooSmall(
            f"tr(Sigma^2) estimate needs a total >= 4, got {n}"
        )
    c = v.counts.astype(np.float64)
    nt = c[:, None]
    ns = c[None, :]
    terms = nt * ns * (
        (nt + ns - 2.0) / (n - 2.0) - ((nt - ns) / (n - 2.0)) ** 2
    )
    np.fill_diagonal(terms, 0.0)
    coef = 0.5 * (n - 2.0) / (n * (n - 1.0) * (n - 3.0))
    return float(coef * terms.sum())


def trace_product(a: np.ndarray, b: np.ndarray) -> float:
    """tr(A B) as the elementwise sum of A * B', in O(d^2)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(
            f"trace_product needs two square matrices of equal shape, "
            f"got {a.shape} and {b.shape}"
        )
    return float(np.sum(a * b.T))


def _bracket(n1: int, n2: int) -> float:
    return 2.0 / (n1 * (n1 - 1)) + 2.0 / (n2 * (n2 - 1)) + 4.0 / (n1 * n2)


def _sizes(pair: GroupPair, minimum: int) -> tuple[int, int]:
    n1, n2 = pair.sample1.total, pair.sample2.total
    if n1 < minimum or n2 < minimum:
        raise SampleTooSmall(
            f"group {pair.group_id!r}: estimator needs totals >= {minimum} "
            f"per population, got ({n1}, {n2})"
        )
    return n1, n2


def var0_group_test1(pair: GroupPair) -> VarianceEstimate:
    """Fully unbiased per-group null-variance estimate (needs totals >= 4)."""
    n1, n2 = _sizes(pair, 4)
    cross = trace_product(
        unbiased_sigma(pair.sample1), unbiased_sigma(pair.sample2)
    )
    value = (
        2.0 / (n1 * (n1 - 1)) * trace_sigma_sq_unbiased(pair.sample1)
        + 2.0 / (n2 * (n2 - 1)) * trace_sigma_sq_unbiased(pair.sample2)
        + 4.0 / (n1 * n2) * cross
    )
    return VarianceEstimate(float(value), "test1")


def var0_group_test2(pair: GroupPair) -> VarianceEstimate:
    """Cross-product-trace estimate (needs totals >= 2)."""
    n1, n2 = _sizes(pair, 2)
    cross = trace_product(
        unbiased_sigma(pair.sample1), unbiased_sigma(pair.sample2)
    )
    return VarianceEstimate(float(_bracket(n1, n2) * cross), "test2")


def var0_group_test3(pair: GroupPair) -> VarianceEstimate:
    """Pooled-sample estimate (needs totals >= 2, pooled >= 4)."""
    n1, n2 = _sizes(pair, 2)
    pooled = pooled_counts(pair)
    if pooled.total < 4:
        raise SampleTooSmall(
            f"group {pair.group_id!r}: pooled total {pooled.total} < 4"
        )
    value = _bracket(n1, n2) * trace_sigma_sq_unbiased(pooled)
    return VarianceEstimate(float(value), "test3")


def var0_group_plugin(pair: GroupPair, which: str) -> VarianceEstimate:
    """Plug-in analogue ``which`` in {'test4', 'test5', 'test6'}."""
    if which not in ("test4", "test5", "test6"):
        raise ValueError(f"unknown plug-in estimator {which!r}")
    n1, n2 = _sizes(pair, 2)
    s1 = centered_outer(empirical_proportions(pair.sample1))
    s2 = centered_outer(empirical_proportions(pair.sample2))
    if which == "test4":
        value = (
            2.0 / (n1 * (n1 - 1)) * trace_product(s1, s1)
            + 2.0 / (n2 * (n2 - 1)) * trace_product(s2, s2)
            + 4.0 / (n1 * n2) * trace_product(s1, s2)
        )
    elif which == "test5":
        value = _bracket(n1, n2) * trace_product(s1, s2)
    else:
        sp = centered_outer(empirical_proportions(pooled_counts(pair)))
        value = _bracket(n1, n2) * trace_product(sp, sp)
    return VarianceEstimate(float(value), which)


def var0_bootstrap(
    ds: GroupedDataset, B: int = 200, seed=None
) -> VarianceEstimate:
    """Bootstrap estimate of the aggregate statistic's null variance.

    For each bootstrap replicate every group's two samples are redrawn
    from that group's pooled empirical proportions (the null resampling
    distribution); the value is the sample variance (divisor ``B - 1``)
    of the aggregated statistic over the ``B`` replicates.

    Each group consumes its own stream derived from ``(seed, group
    index)``, so the result is bit-reproducible for a fixed seed
    regardless of evaluation order.  Resampling uses numpy's multinomial
    generator.

    Raises
    ------
    InvalidB
        If ``B < 2``.
    SampleTooSmall
        If any sample total is below 2.
    """
    if B < 2:
        raise InvalidB(f"bootstrap needs B >= 2, got {B}")
    if seed is None:
        seed = np.random.SeedSequence().entropy
    k = ds.k
    total = np.zeros(B, dtype=np.float64)
    for g_index, pair in enumerate(ds):
        n1, n2 = _sizes(pair, 2)
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=(g_index,)))
        )
        phat = pooled_counts(pair).counts / (n1 + n2)
        c1 = rng.multinomial(n1, phat, size=B)
        c2 = rng.multinomial(n2, phat, size=B)
        total += _batch.tu_group(c1 / n1, c2 / n2, float(n1), float(n2))
    values = total / np.sqrt(k)
    return VarianceEstimate(float(values.var(ddof=1)), "test7")


def var0_true(pi: ProbVector, n1: int, n2: int) -> float:
    """Exact per-group null variance at a known shared probability vector."""
    if n1 < 2 or n2 < 2:
        raise SampleTooSmall(f"null variance needs n1, n2 >= 2, got ({n1}, {n2})")
    sigma = centered_outer(pi)
    return float(_bracket(n1, n2) * trace_product(sigma, sigma))


def var_true_full(pi1: ProbVector, pi2: ProbVector, n1: int, n2: int) -> float:
    """Exact variance of one group's statistic at arbitrary truths.

    Sum of the two mean-driven quadratic terms, the two within-sample
    trace terms and the cross trace term.
    """
    if pi1.d != pi2.d:
        raise DimensionMismatch(
            f"probability vectors have dimensions {pi1.d} and {pi2.d}"
        )
    if n1 < 2 or n2 < 2:
        raise SampleTooSmall(f"variance needs n1, n2 >= 2, got ({n1}, {n2})")
    delta = pi1.probs - pi2.probs
    s1 = centered_outer(pi1)
    s2 = centered_outer(pi2)
    return float(
        4.0 / n1 * delta @ s1 @ delta
        + 4.0 / n2 * delta @ s2 @ delta
        + 2.0 / (n1 * (n1 - 1)) * trace_product(s1, s1)
        + 2.0 / (n2 * (n2 - 1)) * trace_product(s2, s2)
        + 4.0 / (n1 * n2) * trace_product(s1, s2)
    )
