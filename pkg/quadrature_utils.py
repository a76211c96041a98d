"""
Composite Gauss-Legendre rules: 1-D panels, polar/spherical rules on balls of
dimension <= 3, and a resolution-doubling driver.
"""
import logging
from functools import lru_cache

import numpy as np

from utils import NumericFailure, UnsupportedContextError

logger = logging.getLogger(__name__)

QUAD_ORDER = 16
QUAD_RTOL = 1e-6
MAX_LEVEL = 5
GRADING_LEVELS = 24
BALL_RULE_MAX_DIM = 3
_CHUNK = 1 << 18


@lru_cache(maxsize=None)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre_panels(breaks, order=QUAD_ORDER):
    """Nodes and weights of an order-``order`` rule on every panel [breaks[i], breaks[i+1]]."""
    breaks = np.asarray(breaks, dtype=float)
    ip, w = _leggauss(order)
    half = 0.5 * np.diff(breaks)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    nodes = (mid[:, None] + half[:, None] * ip[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def uniform_breaks(lo, hi, max_width):
    n = max(1, int(np.ceil((hi - lo) / max_width)))
    return np.linspace(lo, hi, n + 1)


def graded_breaks(lo, hi, max_width, grading_levels=0):
    """
    Uniform panels on [lo, hi]; with ``grading_levels`` the last panel is
    split geometrically toward ``hi`` so an endpoint singularity such as
    (hi - r)^alpha is resolved.
    """
    breaks = uniform_breaks(lo, hi, max_width)
    if grading_levels:
        a, b = breaks[-2], breaks[-1]
        tail = b - (b - a) * 0.5 ** np.arange(1, grading_levels + 1)
        breaks = np.concatenate([breaks[:-1], tail, [b]])
    return breaks


def panel_width(offset, level=0):
    """Panel width for an integrand oscillating like exp(2 pi i offset xi)."""
    return min(1.0, 1.0 / (4.0 * max(offset, 1e-300))) / 2.0 ** level


def integrate_interval(f, lo, hi, max_width, order=QUAD_ORDER):
    if hi <= lo:
        return 0j
    nodes, weights = gauss_legendre_panels(uniform_breaks(lo, hi, max_width), order)
    return complex(weights @ f(nodes))


def sphere_directions(dim, angular_count):
    """Unit directions and weights (summing to the sphere area) for d = 2 or 3."""
    if dim == 2:
        theta = 2.0 * np.pi * np.arange(angular_count) / angular_count
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return dirs, np.full(angular_count, 2.0 * np.pi / angular_count)
    if dim == 3:
        ct, wt = _leggauss(max(2, angular_count // 2))
        phi = 2.0 * np.pi * np.arange(angular_count) / angular_count
        st = np.sqrt(1.0 - ct * ct)
        dirs = np.stack([
            np.outer(st, np.cos(phi)).ravel(),
            np.outer(st, np.sin(phi)).ravel(),
            np.repeat(ct, angular_count),
        ], axis=1)
        weights = np.repeat(wt, angular_count) * (2.0 * np.pi / angular_count)
        return dirs, weights
    raise UnsupportedContextError(f"no direction rule for dimension {dim}")


def ball_rule(radius, dim, max_width, angular_count, grading_levels=0, chunk_size=_CHUNK):
    """
    Yields (points, weights) chunks of a product rule on {|xi| <= radius}:
    Gauss-Legendre panels in r (graded toward the boundary if requested)
    times the trapezoid rule in angle. Dimensions 1 to 3.
    """
    r, wr = gauss_legendre_panels(graded_breaks(0.0, radius, max_width, grading_levels))
    if dim == 1:
        yield np.concatenate([-r, r])[:, None], np.concatenate([wr, wr])
        return
    if dim > BALL_RULE_MAX_DIM:
        raise UnsupportedContextError(f"ball quadrature supports d <= {BALL_RULE_MAX_DIM}, got {dim}")
    dirs, wd = sphere_directions(dim, angular_count)
    radial_weight = wr * r ** (dim - 1)
    rows = max(1, chunk_size // len(dirs))
    for start in range(0, len(r), rows):
        rr = r[start:start + rows]
        points = (rr[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
        weights = (radial_weight[start:start + rows, None] * wd[None, :]).ravel()
        yield points, weights


def integrate_until_stable(integrate_level, rtol=QUAD_RTOL, scale=0.0, max_level=MAX_LEVEL, what="integral"):
    """
    Calls ``integrate_level(0), integrate_level(1), ...`` (each doubling the
    resolution) until two successive values differ by at most
    rtol * max(|value|, scale). Raises NumericFailure otherwise.
    """
    previous = np.asarray(integrate_level(0))
    diff = np.inf
    for level in range(1, max_level + 1):
        current = np.asarray(integrate_level(level))
        diff = float(np.max(np.abs(current - previous)))
        bound = rtol * max(float(np.max(np.abs(current))), scale)
        if diff <= bound:
            logger.debug("%s converged at level %d (change %.3g)", what, level, diff)
            return current[()] if current.ndim == 0 else current
        previous = current
    raise NumericFailure(f"{what} did not reach rtol {rtol} after {max_level} refinements (last change {diff:.3g})")


def ball_integral(integrand, radius, dim, oscillation, grading_levels=0, rtol=QUAD_RTOL, scale=0.0,
                  what="ball integral"):
    """
    Integral of ``integrand`` (a function of an (n, dim) point array) over
    {|xi| <= radius}, for an integrand oscillating at most like
    exp(2 pi i oscillation |xi|).
    """
    base_angles = int(np.ceil(4.0 * np.pi * radius * oscillation)) + 64

    def level_value(level):
        total = 0j
        rule = ball_rule(radius, dim, panel_width(oscillation, level), base_angles + 32 * level, grading_levels)
        for points, weights in rule:
            total += complex(weights @ integrand(points))
        return total

    return complex(integrate_until_stable(level_value, rtol, scale, what=what))
