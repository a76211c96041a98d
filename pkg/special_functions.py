"""
Gamma and Bessel J of real order, enough for the Bochner-Riesz and ball
kernels.

bessel_j picks one of three evaluations per argument:
    x <= SERIES_SWITCH      ascending power series
    x >  SERIES_SWITCH      Hankel large-argument expansion, truncated at its
                            smallest term, when that term is below HANKEL_TOL
    otherwise               Miller backward recurrence, normalized with
                            (x/2)^f = sum_k (f+2k) Gamma(f+k)/k! J_{f+2k}(x)
"""
import logging
import math

import numpy as np

from utils import OutOfRangeError

logger = logging.getLogger(__name__)

SERIES_SWITCH = 12.0
SERIES_TERMS = 60
HANKEL_TERMS = 80
HANKEL_TOL = 1e-10
MAX_ORDER = 40.0
MAX_ARGUMENT = 1e4
MAX_GAMMA_ARGUMENT = 170.0

_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_RESCALE = 1e250


def _lanczos_sum(z):
    a = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        a += c / (z + i)
    return a


def _gamma(x: float) -> float:
    if x < 0.5:
        return _gamma(x + 1.0) / x
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # t^(z+1/2) split in two halves so the product does not overflow near 170
    s = t ** ((z + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * s * (s * math.exp(-t)) * _lanczos_sum(z)


def gamma_fn(x: float) -> float:
    """Gamma(x) for 0 < x <= 170, relative error around 1e-15."""
    x = float(x)
    if not 0.0 < x <= MAX_GAMMA_ARGUMENT:
        raise OutOfRangeError(f"gamma_fn needs 0 < x <= {MAX_GAMMA_ARGUMENT}, got {x}")
    return _gamma(x)


def log_gamma(x: float) -> float:
    x = float(x)
    if not x > 0.0:
        raise OutOfRangeError(f"log_gamma needs x > 0, got {x}")
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def _check_order(nu):
    nu = float(nu)
    if not 0.0 <= nu <= MAX_ORDER:
        raise OutOfRangeError(f"Bessel order must lie in [0, {MAX_ORDER}], got {nu}")
    return nu


def _check_argument(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > MAX_ARGUMENT):
        raise OutOfRangeError(f"Bessel argument must lie in [0, {MAX_ARGUMENT:g}]")
    return x


def power_series_over_power(nu, x):
    """sum_k (-x^2/4)^k / (k! Gamma(k+nu+1)) = J_nu(x) / (x/2)^nu."""
    x = np.asarray(x, dtype=float)
    q = -0.25 * x * x
    term = np.ones(x.shape)
    total = term.copy()
    for k in range(1, SERIES_TERMS + 1):
        term = term * q / (k * (k + nu))
        total = total + term
    return total * math.exp(-log_gamma(nu + 1.0))


def power_series_j(nu, x):
    x = np.asarray(x, dtype=float)
    return power_series_over_power(nu, x) * (0.5 * x) ** nu


def hankel_asymptotic_j(nu, x):
    """
    Large-argument expansion sqrt(2/(pi x)) (P cos w - Q sin w),
    w = x - nu pi/2 - pi/4, summed until the terms stop decreasing.
    Returns (values, error estimate = magnitude of the last term used).
    """
    x = np.asarray(x, dtype=float)
    mu = 4.0 * nu * nu
    p = np.ones(x.shape)
    q = np.zeros(x.shape)
    term = np.ones(x.shape)
    last = np.ones(x.shape)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, HANKEL_TERMS + 1):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        mag = np.abs(term)
        active &= mag <= last
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q = np.where(active, q + sign * term, q)
        else:
            p = np.where(active, p + sign * term, p)
        last = np.where(active, mag, last)
        if not np.any(active & (mag > 1e-17)):
            break
    w = x - (0.5 * nu + 0.25) * np.pi
    values = np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(w) - q * np.sin(w))
    return values, last


def miller_j(nu, x):
    """J_nu(x) for one argument by backward recurrence from well above max(nu, x)."""
    x = float(x)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    n = int(math.floor(nu))
    f = nu - n
    start = n + int(x) + 40 + int(math.sqrt(40.0 * (n + x)))
    start += start % 2
    vals = np.zeros(start + 1)
    j_next, j_cur = 0.0, 1e-30
    vals[start] = j_cur
    for m in range(start, 0, -1):
        j_prev = 2.0 * (f + m) / x * j_cur - j_next
        vals[m - 1] = j_prev
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            vals[m - 1:] /= _RESCALE
            j_next /= _RESCALE
            j_cur /= _RESCALE

    # c_0 = Gamma(f+1), c_k = (f+2k) Gamma(f+k)/k!
    g = _gamma(f + 1.0)
    norm = g * vals[0]
    for k in range(1, start // 2 + 1):
        if k > 1:
            g *= (f + k - 1) / k
        norm += (f + 2 * k) * g * vals[2 * k]
    return float(vals[n] * (0.5 * x) ** f / norm)


def bessel_j_array(nu, x):
    """J_nu on an array, no range checks."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    small = x <= SERIES_SWITCH
    if np.any(small):
        out[small] = power_series_j(nu, x[small])
    big = ~small
    if np.any(big):
        xb = x[big]
        vals, err = hankel_asymptotic_j(nu, xb)
        poor = err >= HANKEL_TOL
        if np.any(poor):
            logger.debug("Bessel J_%g: %d arguments via backward recurrence", nu, int(poor.sum()))
            vals[poor] = [miller_j(nu, xi) for xi in xb[poor]]
        out[big] = vals
    return out


def bessel_j(nu, x):
    """
    J_nu(x) for 0 <= nu <= 40 and 0 <= x <= 1e4. Accepts a scalar or an
    array ``x``; returns the same shape.
    """
    nu = _check_order(nu)
    x = _check_argument(x)
    out = bessel_j_array(nu, np.atleast_1d(x))
    return float(out[0]) if x.ndim == 0 else out


def bessel_j_over_power_array(nu, x):
    """J_nu(x) / (x/2)^nu on an array, no range checks."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    small = x <= SERIES_SWITCH
    if np.any(small):
        out[small] = power_series_over_power(nu, x[small])
    if np.any(~small):
        xb = x[~small]
        out[~small] = bessel_j_array(nu, xb) / (0.5 * xb) ** nu
    return out


def bessel_j_over_power(nu, x):
    """J_nu(x) / (x/2)^nu, equal to 1/Gamma(nu+1) at x = 0."""
    nu = _check_order(nu)
    x = _check_argument(x)
    out = bessel_j_over_power_array(nu, np.atleast_1d(x))
    return float(out[0]) if x.ndim == 0 else out
