"""Standard normal CDF and quantile function.

``normal_cdf`` uses the complementary error function,
``Phi(z) = erfc(-z / sqrt(2)) / 2``, which is accurate to machine
precision.  ``normal_quantile`` implements Peter Acklam's rational
approximation to the inverse normal CDF (three rational pieces, relative
error below 1.15e-9) followed by one Halley refinement step, which takes
the absolute error to the order of machine epsilon — comfortably inside
the 1.5e-7 target of this module.  Both accept scalars or arrays.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

from .errors import OutOfRange

__all__ = ["normal_cdf", "normal_quantile"]

_SQRT2 = np.sqrt(2.0)
_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Acklam coefficients for the central and tail rational approximants.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_cdf(z):
    """Standard normal CDF, vectorized."""
    z = np.asarray(z, dtype=np.float64)
    out = 0.5 * erfc(-z / _SQRT2)
    return float(out) if out.ndim == 0 else out


def _acklam(p):
    x = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)

    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = q * num / den
    if np.any(lo):
        q = np.sqrt(-2.0 * np.log(p[lo]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[lo] = num / den
    if np.any(hi):
        q = np.sqrt(-2.0 * np.log(1.0 - p[hi]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[hi] = -num / den
    return x


def normal_quantile(p):
    """Inverse standard normal CDF, vectorized.

    Raises
    ------
    OutOfRange
        If any probability lies outside the open interval (0, 1).
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise OutOfRange(f"quantile argument must be in (0, 1), got {p!r}")
    flat = np.atleast_1d(arr)
    # Work on the lower half and mirror: 1 - p is exact for p in (1/2, 1),
    # and the erfc-based CDF has full relative accuracy near 0, so the
    # Halley step stays sharp arbitrarily deep into either tail.
    upper = flat > 0.5
    q = np.where(upper, 1.0 - flat, flat)
    x = _acklam(q.copy())
    e = 0.5 * erfc(-x / _SQRT2) - q
    u = e * _SQRT_2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    x = np.where(upper, -x, x)
    return float(x[0]) if arr.ndim == 0 else x.reshape(arr.shape)
