"""Null-variance estimators: hand-checked values, unbiasedness, the
population-ratio bounds that justify the plug-in estimators, and
agreement between the scalar and vectorized code paths."""

from __future__ import annotations

from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grouphom import _batch
from grouphom.data import CountVector, GroupedDataset, GroupPair, ProbVector
from grouphom.errors import DimensionMismatch, InvalidB, SampleTooSmall
from grouphom.variance import (
    VarianceEstimate,
    trace_product,
    trace_sigma_sq_unbiased,
    unbiased_sigma,
    var0_bootstrap,
    var0_group_plugin,
    var0_group_test1,
    var0_group_test2,
    var0_group_test3,
    var0_true,
    var_true_full,
)


def pair(c1, c2, gid="g"):
    return GroupPair(gid, CountVector(c1), CountVector(c2))


def sigma_of(p):
    """Population multinomial covariance diag(p) - p p'."""
    p = np.asarray(p, dtype=np.float64)
    return np.diag(p) - np.outer(p, p)


# ---------------------------------------------------------------------------
# trace estimators
# ---------------------------------------------------------------------------


class TestTraceEstimators:
    def test_unbiased_sigma_hand_value(self):
        s = unbiased_sigma(CountVector([1, 1]))
        assert np.allclose(s, [[0.5, -0.5], [-0.5, 0.5]])

    def test_trace_sq_hand_values(self):
        # counts (2, 2): only the cross pair (t != s) contributes
        assert trace_sigma_sq_unbiased(CountVector([2, 2])) == pytest.approx(
            2.0 / 3.0
        )
        # counts (3, 1): the (n_t + n_s - 2)/(n - 2) and squared-difference
        # terms cancel exactly
        assert trace_sigma_sq_unbiased(CountVector([3, 1])) == pytest.approx(
            0.0, abs=1e-15
        )

    def test_trace_sq_needs_four(self):
        with pytest.raises(SampleTooSmall):
            trace_sigma_sq_unbiased(CountVector([2, 1]))

    def test_trace_sq_unbiased_by_enumeration(self):
        # E over Multinomial(n, pi) of the estimator equals tr(Sigma^2)
        n, p = 5, 0.3
        pi = np.array([p, 1 - p])
        target = trace_product(sigma_of(pi), sigma_of(pi))
        acc = 0.0
        for a in range(n + 1):
            w = comb(n, a) * p**a * (1 - p) ** (n - a)
            acc += w * trace_sigma_sq_unbiased(CountVector([a, n - a]))
        assert acc == pytest.approx(target, abs=1e-12)

    def test_matches_batch_power_sum_form(self):
        # the explicit pair-sum here and the power-sum reduction in _batch
        # are algebraically the same estimator
        rng = np.random.default_rng(7)
        for _ in range(100):
            d = rng.integers(2, 7)
            c = rng.multinomial(rng.integers(4, 40), np.full(d, 1.0 / d))
            a = trace_sigma_sq_unbiased(CountVector(c))
            b = float(_batch.trace_sq_unbiased(c))
            assert a == pytest.approx(b, abs=1e-12)

    def test_trace_product_hand_value(self):
        a = sigma_of([0.5, 0.5])
        b = sigma_of([0.25, 0.75])
        assert trace_product(a, b) == pytest.approx(0.1875)
        assert float(_batch.trace_cross(np.array([0.5, 0.5]),
                                        np.array([0.25, 0.75]))
                     ) == pytest.approx(0.1875)

    def test_trace_product_shape_check(self):
        with pytest.raises(DimensionMismatch):
            trace_product(np.eye(2), np.eye(3))

    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_population_trace_bounded_by_two(self, weights):
        p = np.array(weights) / np.sum(weights)
        tr = trace_product(sigma_of(p), sigma_of(p))
        assert 0.0 <= tr <= 2.0


# ---------------------------------------------------------------------------
# per-group estimators
# ---------------------------------------------------------------------------


class TestGroupEstimators:
    def test_test1_hand_value(self):
        est = var0_group_test1(pair([2, 2], [2, 2]))
        assert est.estimator == "test1"
        assert est.value == pytest.approx(1.0 / 3.0)

    def test_test2_hand_values(self):
        assert var0_group_test2(pair([2, 2], [2, 2])).value == pytest.approx(
            7.0 / 27.0
        )
        assert var0_group_test2(pair([1, 1], [1, 1])).value == pytest.approx(
            3.0
        )

    def test_test5_hand_value(self):
        est = var0_group_plugin(pair([2, 2], [2, 2]), "test5")
        assert est.value == pytest.approx(7.0 / 48.0)

    def test_true_null_variance_hand_value(self):
        assert var0_true(ProbVector([0.5, 0.5]), 4, 4) == pytest.approx(
            7.0 / 48.0
        )

    def test_full_variance_reduces_to_null_form(self):
        p = ProbVector([0.2, 0.3, 0.5])
        assert var_true_full(p, p, 6, 9) == pytest.approx(
            var0_true(p, 6, 9), abs=1e-15
        )

    def test_test1_needs_four_per_sample(self):
        with pytest.raises(SampleTooSmall):
            var0_group_test1(pair([2, 1], [2, 2]))

    def test_degenerate_point_mass_gives_zero(self):
        assert var0_group_test2(pair([5, 0], [5, 0])).value == pytest.approx(
            0.0, abs=1e-15
        )

    def test_test2_unbiased_by_enumeration(self):
        # E0 of the test-2 estimator is the true null variance: both the
        # within-sample Sigma-hats and the cross trace are unbiased and
        # independent across samples
        n1, n2, q = 3, 4, 0.4
        pi = ProbVector([q, 1 - q])
        target = var0_true(pi, n1, n2)
        acc = 0.0
        for a, b in product(range(n1 + 1), range(n2 + 1)):
            w = (
                comb(n1, a) * q**a * (1 - q) ** (n1 - a)
                * comb(n2, b) * q**b * (1 - q) ** (n2 - b)
            )
            acc += w * var0_group_test2(pair([a, n1 - a], [b, n2 - b])).value
        assert acc == pytest.approx(target, abs=1e-12)

    @pytest.mark.parametrize("which", ["test4", "test5", "test6"])
    def test_plugin_labels(self, which):
        est = var0_group_plugin(pair([3, 2], [2, 3]), which)
        assert est.estimator == which
        assert est.value >= 0.0

    def test_scalar_and_batch_routes_agree(self):
        rng = np.random.default_rng(11)
        scalar = {
            "test1": var0_group_test1,
            "test2": var0_group_test2,
            "test3": var0_group_test3,
            "test4": lambda p: var0_group_plugin(p, "test4"),
            "test5": lambda p: var0_group_plugin(p, "test5"),
            "test6": lambda p: var0_group_plugin(p, "test6"),
        }
        for _ in range(50):
            d = rng.integers(2, 6)
            n1 = int(rng.integers(4, 25))
            n2 = int(rng.integers(4, 25))
            c1 = rng.multinomial(n1, np.full(d, 1.0 / d))
            c2 = rng.multinomial(n2, np.full(d, 1.0 / d))
            p = pair(c1.tolist(), c2.tolist())
            for which, fn in scalar.items():
                batched = float(
                    _batch.var_group(
                        which, c1[None, :], c2[None, :],
                        np.array([float(n1)]), np.array([float(n2)]),
                    )[0]
                )
                assert fn(p).value == pytest.approx(batched, abs=1e-12), which

    def test_estimators_agree_for_large_samples(self):
        # all six closed-form estimators are ratio-consistent for the same
        # target, so at n = 10^4 they should sit within 5% of each other
        rng = np.random.default_rng(3)
        piv = np.array([0.1, 0.15, 0.2, 0.25, 0.3])
        n = 10_000
        p = pair(rng.multinomial(n, piv).tolist(),
                 rng.multinomial(n, piv).tolist())
        values = [
            var0_group_test1(p).value,
            var0_group_test2(p).value,
            var0_group_test3(p).value,
            var0_group_plugin(p, "test4").value,
            var0_group_plugin(p, "test5").value,
            var0_group_plugin(p, "test6").value,
            var0_true(ProbVector(piv), n, n),
        ]
        lo, hi = min(values), max(values)
        assert hi <= 1.05 * lo


# ---------------------------------------------------------------------------
# population ratio bounds behind the mismatched-variance tests
# ---------------------------------------------------------------------------


def var0_population(p1, p2, n1, n2):
    """The null-variance functional evaluated at the actual vectors."""
    s1, s2 = sigma_of(p1), sigma_of(p2)
    return (
        2.0 / (n1 * (n1 - 1)) * trace_product(s1, s1)
        + 2.0 / (n2 * (n2 - 1)) * trace_product(s2, s2)
        + 4.0 / (n1 * n2) * trace_product(s1, s2)
    )


def bracket(n1, n2):
    return 2.0 / (n1 * (n1 - 1)) + 2.0 / (n2 * (n2 - 1)) + 4.0 / (n1 * n2)


class TestPopulationRatioBounds:
    """What the cross-trace (test 2) and pooled (test 3) estimators
    actually estimate under alternatives stays within a factor of M and
    M + 1 of the null-variance functional, where M is the imbalance of
    the two within-population traces."""

    @given(
        st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6),
        st.data(),
    )
    @settings(max_examples=150, deadline=None)
    def test_lemma_bounds(self, w1, data):
        d = len(w1)
        w2 = data.draw(
            st.lists(st.floats(0.05, 1.0), min_size=d, max_size=d)
        )
        n1 = data.draw(st.integers(2, 40))
        n2 = data.draw(st.integers(2, 40))
        p1 = np.array(w1) / np.sum(w1)
        p2 = np.array(w2) / np.sum(w2)
        s1, s2 = sigma_of(p1), sigma_of(p2)
        tr1 = trace_product(s1, s1)
        tr2 = trace_product(s2, s2)
        m_const = max(tr1, tr2) / min(tr1, tr2)

        v0 = var0_population(p1, p2, n1, n2)
        v_full = var_true_full(ProbVector(p1), ProbVector(p2), n1, n2)
        v01 = bracket(n1, n2) * trace_product(s1, s2)
        lam = n1 / (n1 + n2)
        pooled_sigma = lam * s1 + (1 - lam) * s2
        v02 = bracket(n1, n2) * trace_product(pooled_sigma, pooled_sigma)

        tol = 1.0 + 1e-9
        assert 0.0 <= v01 <= m_const * v0 * tol
        assert 0.0 <= v02 <= (m_const + 1.0) * v0 * tol
        # the full variance only adds non-negative location terms
        assert v_full >= v0 - 1e-12


# ---------------------------------------------------------------------------
# bootstrap estimator
# ---------------------------------------------------------------------------


class TestBootstrap:
    @staticmethod
    def dataset(seed=0, k=30, n1=12, n2=12, d=4):
        rng = np.random.default_rng(seed)
        piv = np.full(d, 1.0 / d)
        return GroupedDataset(
            tuple(
                pair(
                    rng.multinomial(n1, piv).tolist(),
                    rng.multinomial(n2, piv).tolist(),
                    f"g{i}",
                )
                for i in range(k)
            )
        )

    def test_deterministic_given_seed(self):
        ds = self.dataset()
        a = var0_bootstrap(ds, B=100, seed=123)
        b = var0_bootstrap(ds, B=100, seed=123)
        c = var0_bootstrap(ds, B=100, seed=124)
        assert a == b
        assert a.estimator == "test7"
        assert a.value != c.value

    def test_unseeded_draws_fresh_entropy(self):
        ds = self.dataset()
        a = var0_bootstrap(ds, B=50)
        b = var0_bootstrap(ds, B=50)
        assert a.value != b.value

    def test_rejects_tiny_b(self):
        with pytest.raises(InvalidB):
            var0_bootstrap(self.dataset(), B=1)

    def test_tracks_closed_form(self):
        # B = 2000 pins the bootstrap well within 15% of the pooled
        # closed-form estimate on a null dataset
        ds = self.dataset(seed=5, k=60, n1=20, n2=20)
        boot = var0_bootstrap(ds, B=2000, seed=99).value
        closed = float(
            np.mean([var0_group_test3(g).value for g in ds])
        )
        assert boot == pytest.approx(closed, rel=0.15)

    def test_value_is_frozen_dataclass(self):
        est = VarianceEstimate(1.0, "test1")
        with pytest.raises(AttributeError):
            est.value = 2.0
