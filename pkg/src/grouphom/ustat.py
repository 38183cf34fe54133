"""Per-group unbiased squared-distance statistic and its aggregate.

For a group with samples of sizes ``n1, n2 >= 2`` and empirical
proportions ``p1, p2``, the statistic

    T = n1/(n1-1) * p1'p1 - 1/(n1-1)
      + n2/(n2-1) * p2'p2 - 1/(n2-1)
      - 2 * p1'p2

is an unbiased estimator of the squared Euclidean distance between the two
population probability vectors.  Across ``k`` groups the aggregate is
``sum_r T_r / sqrt(k)``.
"""

from __future__ import annotations

import numpy as np

from .data import GroupedDataset, GroupPair
from .errors import SampleTooSmall

__all__ = [
    "group_ustat",
    "group_ustat_kernel_oracle",
    "group_statistics",
    "aggregate_statistic",
]


def _check_sizes(pair: GroupPair, minimum: int = 2) -> tuple[int, int]:
    n1, n2 = pair.sample1.total, pair.sample2.total
    if n1 < minimum or n2 < minimum:
        raise SampleTooSmall(
            f"group {pair.group_id!r}: sample totals ({n1}, {n2}) below "
            f"the minimum of {minimum} per population"
        )
    return n1, n2


def group_ustat(pair: GroupPair) -> float:
    """Unbiased squared-distance statistic for one group.

    Raises
    ------
    SampleTooSmall
        If either sample total is below 2.
    """
    n1, n2 = _check_sizes(pair)
    p1 = pair.sample1.counts / n1
    p2 = pair.sample2.counts / n2
    return float(
        (n1 * np.dot(p1, p1) - 1.0) / (n1 - 1.0)
        + (n2 * np.dot(p2, p2) - 1.0) / (n2 - 1.0)
        - 2.0 * np.dot(p1, p2)
    )


def group_ustat_kernel_oracle(pair: GroupPair) -> float:
    """Same statistic via direct four-index kernel enumeration.

    Expands the counts into category label sequences and averages the
    symmetric kernel

        h = 1{x1u = x1v} + 1{x2s = x2t}
            - (1{x1u = x2s} + 1{x1u = x2t} + 1{x1v = x2s} + 1{x1v = x2t}) / 2

    over all ordered pairs (u, v), u != v, from sample 1 crossed with all
    ordered pairs (s, t), s != t, from sample 2.  O(n1^2 n2^2) — reference
    implementation for testing, not for production use.
    """
    n1, n2 = _check_sizes(pair)
    x1 = np.repeat(np.arange(pair.d), pair.sample1.counts)
    x2 = np.repeat(np.arange(pair.d), pair.sample2.counts)
    eq11 = (x1[:, None] == x1[None, :]).astype(np.float64)
    eq22 = (x2[:, None] == x2[None, :]).astype(np.float64)
    eq12 = (x1[:, None] == x2[None, :]).astype(np.float64)
    u, v = np.nonzero(~np.eye(n1, dtype=bool))
    s, t = np.nonzero(~np.eye(n2, dtype=bool))
    h = (
        eq11[u, v][:, None]
        + eq22[s, t][None, :]
        - 0.5
        * (
            eq12[u[:, None], s[None, :]]
            + eq12[u[:, None], t[None, :]]
            + eq12[v[:, None], s[None, :]]
            + eq12[v[:, None], t[None, :]]
        )
    )
    return float(h.mean())


def group_statistics(ds: GroupedDataset) -> np.ndarray:
    """Vector of per-group statistics, in group order."""
    return np.array([group_ustat(g) for g in ds], dtype=np.float64)


def aggregate_statistic(ds: GroupedDataset) -> float:
    """Aggregate statistic: per-group values summed and scaled by 1/sqrt(k)."""
    return float(group_statistics(ds).sum() / np.sqrt(ds.k))
