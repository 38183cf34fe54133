"""Normal CDF / quantile helpers against published values and scipy."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from grouphom.errors import OutOfRange
from grouphom.normal import normal_cdf, normal_quantile

# Classical table values, more digits than any test here needs.
KNOWN_QUANTILES = [
    (0.90, 1.2815515655),
    (0.95, 1.6448536270),
    (0.975, 1.9599639845),
    (0.99, 2.3263478740),
    (0.995, 2.5758293035),
]


class TestQuantile:
    @pytest.mark.parametrize("p,expected", KNOWN_QUANTILES)
    def test_table_values(self, p, expected):
        assert normal_quantile(p) == pytest.approx(expected, abs=1e-5)

    def test_symmetry(self):
        for p in (0.01, 0.3, 0.45):
            assert normal_quantile(p) == pytest.approx(
                -normal_quantile(1.0 - p), abs=1e-12
            )

    def test_median(self):
        assert normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_against_scipy_dense_grid(self):
        ps = np.linspace(1e-6, 1.0 - 1e-6, 2001)
        ours = np.array([normal_quantile(p) for p in ps])
        assert np.max(np.abs(ours - norm.ppf(ps))) < 1e-9

    def test_tails(self):
        # deep tails stay accurate thanks to the Halley refinement
        for p in (1e-12, 1e-300, 1 - 1e-12):
            assert normal_quantile(p) == pytest.approx(
                norm.ppf(p), rel=1e-9
            )

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.1, np.nan])
    def test_domain(self, p):
        with pytest.raises(OutOfRange):
            normal_quantile(p)


class TestCdf:
    def test_known_points(self):
        assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
        assert normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-9)
        assert normal_cdf(-8.0) == pytest.approx(norm.cdf(-8.0), rel=1e-12)

    def test_against_scipy(self):
        zs = np.linspace(-10, 10, 4001)
        ours = np.array([normal_cdf(z) for z in zs])
        assert np.max(np.abs(ours - norm.cdf(zs))) < 1e-14

    def test_round_trip(self):
        for p in (0.001, 0.025, 0.5, 0.975, 0.999):
            assert normal_cdf(normal_quantile(p)) == pytest.approx(
                p, abs=1e-12
            )
