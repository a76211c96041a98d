"""
Folner-set averages of Fourier transforms.

For a Folner sequence (F_n) in the dual group,

    mu({x}) = lim_n 1/m(F_n) * integral over F_n of gamma(x) mu_hat(gamma)

On the torus the integral is a finite lattice sum. On R^d the average is
evaluated on the spatial side, sum_atoms w * phi_F(pos - x), where phi_F is the
normalized inverse transform of the indicator of F; absolutely continuous
parts are integrated on the frequency side and the Cantor part against its
level-m midpoint approximation.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from fourier_modules import MeasureSpectrum, SpectrumSource, as_spectrum, separable_terms
from group_modules import GroupContext, characters
from measure_modules import Measure
from quadrature_utils import (
    BALL_RULE_MAX_DIM,
    QUAD_RTOL,
    ball_integral,
    integrate_interval,
    integrate_until_stable,
    panel_width,
)
from run_records import RunRecord
from special_functions import bessel_j_over_power_array, gamma_fn
from utils import DimensionMismatchError, UnsupportedContextError, sinc

logger = logging.getLogger(__name__)

CANTOR_MIN_LEVEL = 10
CANTOR_MAX_LEVEL = 20
CANTOR_KERNEL_TOL = 1e-8


def unit_ball_volume(d: int) -> float:
    """omega_d = pi^(d/2) / Gamma(d/2 + 1)."""
    return math.pi ** (d / 2.0) / gamma_fn(d / 2.0 + 1.0)


def _grid(half_extents):
    axes = [np.arange(-h, h + 1, dtype=np.int64) for h in half_extents]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@lru_cache(maxsize=64)
def _cube_points(n: int, d: int) -> np.ndarray:
    pts = _grid([n] * d)
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=64)
def _ball_points(n: int, d: int) -> np.ndarray:
    box = _grid([n] * d)
    pts = box[np.sum(box * box, axis=1) <= n * n]
    pts.setflags(write=False)
    return pts


class FolnerSet(ABC):
    """
    A region of the dual group. ``lattice`` sets live in Z^d (torus dual),
    the others in R^d.
    """

    kind = ""

    def __init__(self, dim: int, lattice: bool):
        if dim < 1:
            raise DimensionMismatchError(f"dimension must be >= 1, got {dim}")
        self.dim = dim
        self.lattice = lattice

    @abstractmethod
    def contains(self, points) -> np.ndarray:
        pass

    @abstractmethod
    def half_extents(self) -> tuple:
        """Half side lengths of the smallest centered box holding the set."""

    @abstractmethod
    def euclidean_volume(self) -> float:
        pass

    @abstractmethod
    def inner_radius(self) -> float:
        pass

    @abstractmethod
    def spatial_kernel(self, t) -> np.ndarray:
        """phi_F(t) = 1/m(F) * integral over F of exp(2 pi i <t, xi>), F in R^d."""

    def lattice_points(self) -> np.ndarray:
        if not self.lattice:
            raise UnsupportedContextError(f"{self.kind} set over R^{self.dim} has no lattice points")
        box = _grid([int(math.floor(h)) for h in self.half_extents()])
        return box[self.contains(box)]

    def count(self) -> int:
        return len(self.lattice_points())

    def volume(self) -> float:
        """m(F): counting measure on Z^d, Lebesgue measure on R^d."""
        return float(self.count()) if self.lattice else self.euclidean_volume()

    def _check_euclidean(self):
        if self.lattice:
            raise UnsupportedContextError(f"phi_F is only defined for sets in R^d, got a lattice {self.kind}")

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()}, dim={self.dim}, lattice={self.lattice})"

    def describe(self) -> str:
        return ""


class CubeSet(FolnerSet):
    kind = "cube"

    def __init__(self, n, dim, lattice=True):
        super().__init__(dim, lattice)
        if not n >= 0 or (lattice and n != int(n)):
            raise DimensionMismatchError(f"cube size must be a non-negative {'integer' if lattice else 'real'}, got {n}")
        self.n = int(n) if lattice else float(n)

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all(np.abs(points) <= self.n, axis=1)

    def half_extents(self):
        return (self.n,) * self.dim

    def lattice_points(self):
        if not self.lattice:
            return super().lattice_points()
        return _cube_points(self.n, self.dim)

    def count(self):
        return (2 * self.n + 1) ** self.dim if self.lattice else super().count()

    def euclidean_volume(self):
        return (2.0 * self.n) ** self.dim

    def inner_radius(self):
        return float(self.n)

    def spatial_kernel(self, t):
        self._check_euclidean()
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return np.prod(sinc(2.0 * np.pi * self.n * t), axis=1)

    def describe(self):
        return f"n={self.n}"


class BallSet(FolnerSet):
    """Closed ball of radius n. Lattice membership uses the integer test |k|^2 <= n^2."""

    kind = "ball"

    def __init__(self, n, dim, lattice=True):
        super().__init__(dim, lattice)
        if not n >= 0:
            raise DimensionMismatchError(f"ball radius must be non-negative, got {n}")
        self.n = int(n) if lattice and n == int(n) else float(n)

    def contains(self, points):
        points = np.atleast_2d(points)
        if self.lattice and isinstance(self.n, int):
            k = points.astype(np.int64)
            return np.sum(k * k, axis=1) <= self.n * self.n
        return np.sum(points.astype(float) ** 2, axis=1) <= self.n * self.n

    def half_extents(self):
        return (self.n,) * self.dim

    def lattice_points(self):
        if self.lattice and isinstance(self.n, int):
            return _ball_points(self.n, self.dim)
        return super().lattice_points()

    def euclidean_volume(self):
        return unit_ball_volume(self.dim) * float(self.n) ** self.dim

    def inner_radius(self):
        return float(self.n)

    def spatial_kernel(self, t):
        self._check_euclidean()
        t = np.atleast_2d(np.asarray(t, dtype=float))
        r = np.sqrt(np.sum(t * t, axis=1))
        nu = self.dim / 2.0
        return gamma_fn(nu + 1.0) * bessel_j_over_power_array(nu, 2.0 * np.pi * self.n * r)

    def describe(self):
        return f"n={self.n}"


class BoxSet(FolnerSet):
    kind = "box"

    def __init__(self, half_widths, lattice=False):
        half_widths = tuple(float(h) for h in half_widths)
        super().__init__(len(half_widths), lattice)
        if any(not h > 0 for h in half_widths):
            raise DimensionMismatchError(f"box half-widths must be positive, got {half_widths}")
        self.half_widths = half_widths

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all(np.abs(points) <= np.asarray(self.half_widths), axis=1)

    def half_extents(self):
        return self.half_widths

    def count(self):
        if not self.lattice:
            return super().count()
        return int(np.prod([2 * int(math.floor(h)) + 1 for h in self.half_widths]))

    def euclidean_volume(self):
        return float(np.prod([2.0 * h for h in self.half_widths]))

    def inner_radius(self):
        return min(self.half_widths)

    def spatial_kernel(self, t):
        self._check_euclidean()
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return np.prod(sinc(2.0 * np.pi * np.asarray(self.half_widths)[None, :] * t), axis=1)

    def describe(self):
        return f"half_widths={self.half_widths}"


class EllipsoidSet(FolnerSet):
    """Axis-aligned ellipsoid sum (xi_j / a_j)^2 <= 1."""

    kind = "ellipsoid"

    def __init__(self, semi_axes, lattice=False):
        semi_axes = tuple(float(a) for a in semi_axes)
        super().__init__(len(semi_axes), lattice)
        if any(not a > 0 for a in semi_axes):
            raise DimensionMismatchError(f"semi-axes must be positive, got {semi_axes}")
        self.semi_axes = semi_axes

    def contains(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.sum((points / np.asarray(self.semi_axes)) ** 2, axis=1) <= 1.0 + 1e-12

    def half_extents(self):
        return self.semi_axes

    def euclidean_volume(self):
        return unit_ball_volume(self.dim) * float(np.prod(self.semi_axes))

    def inner_radius(self):
        return min(self.semi_axes)

    def spatial_kernel(self, t):
        self._check_euclidean()
        t = np.atleast_2d(np.asarray(t, dtype=float))
        r = np.sqrt(np.sum((t * np.asarray(self.semi_axes)) ** 2, axis=1))
        nu = self.dim / 2.0
        return gamma_fn(nu + 1.0) * bessel_j_over_power_array(nu, 2.0 * np.pi * r)

    def describe(self):
        return f"semi_axes={self.semi_axes}"


class DualBlock(FolnerSet):
    """Frequencies 0 <= k_j < extents[j] of a finite dual Z_m1 x ... x Z_mk."""

    kind = "block"

    def __init__(self, extents, moduli):
        extents = tuple(int(e) for e in extents)
        moduli = tuple(int(m) for m in moduli)
        super().__init__(len(moduli), True)
        if len(extents) != len(moduli) or any(not 1 <= e <= m for e, m in zip(extents, moduli)):
            raise DimensionMismatchError(f"block extents {extents} must satisfy 1 <= e_j <= m_j for {moduli}")
        self.extents = extents
        self.moduli = moduli

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all((points >= 0) & (points < np.asarray(self.extents)), axis=1)

    def half_extents(self):
        return tuple(e - 1 for e in self.extents)

    def lattice_points(self):
        axes = [np.arange(e, dtype=np.int64) for e in self.extents]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def count(self):
        return int(np.prod(self.extents))

    def euclidean_volume(self):
        return float(self.count())

    def inner_radius(self):
        return min(self.extents) / 2.0

    def spatial_kernel(self, t):
        raise UnsupportedContextError("dual blocks index a finite dual and have no spatial kernel")

    @property
    def is_full(self) -> bool:
        return self.extents == self.moduli

    def describe(self):
        return f"extents={self.extents}"


@dataclass(frozen=True)
class FolnerSequence:
    """n -> F_n. ``shape`` scales boxes and ellipsoids: F_n has half-widths n * shape."""

    name: str
    dim: int
    lattice: bool
    factory: Callable
    shape: tuple = ()

    def __call__(self, n) -> FolnerSet:
        return self.factory(n)

    @property
    def method_tag(self) -> str:
        return "finite_blocks" if self.name == "block" else f"folner_{self.name}"

    @property
    def nested_levels(self):
        """Level function k -> smallest integer n with k in F_n, when one exists."""
        if not self.lattice:
            return None
        if self.name == "cube":
            return lambda pts: np.max(np.abs(pts), axis=1)
        if self.name == "ball":
            def ball_level(pts):
                sq = np.sum(pts.astype(np.int64) ** 2, axis=1)
                root = np.floor(np.sqrt(sq)).astype(np.int64)
                # exact integer square-root correction
                root = np.where(root * root > sq, root - 1, root)
                root = np.where((root + 1) * (root + 1) <= sq, root + 1, root)
                return np.where(root * root < sq, root + 1, root)
            return ball_level
        return None

    @classmethod
    def cubes(cls, dim, lattice=True):
        return cls("cube", dim, lattice, lambda n: CubeSet(n, dim, lattice))

    @classmethod
    def balls(cls, dim, lattice=True):
        return cls("ball", dim, lattice, lambda n: BallSet(n, dim, lattice))

    @classmethod
    def boxes(cls, shape, lattice=False):
        shape = tuple(float(s) for s in shape)
        return cls("box", len(shape), lattice, lambda n: BoxSet([n * s for s in shape], lattice), shape)

    @classmethod
    def ellipsoids(cls, shape, lattice=False):
        shape = tuple(float(s) for s in shape)
        return cls("ellipsoid", len(shape), lattice, lambda n: EllipsoidSet([n * s for s in shape], lattice), shape)

    @classmethod
    def blocks(cls, moduli):
        moduli = tuple(int(m) for m in moduli)
        return cls("block", len(moduli), True,
                   lambda n: DualBlock([min(m, int(n)) for m in moduli], moduli), moduli)

    def measures(self, indices) -> np.ndarray:
        return np.array([self(n).volume() for n in indices], dtype=float)

    def inner_radii(self, indices) -> np.ndarray:
        return np.array([self(n).inner_radius() for n in indices], dtype=float)

    def is_strictly_increasing(self, indices) -> bool:
        return bool(np.all(np.diff(self.measures(indices)) > 0))


def lattice_points(folner_set: FolnerSet):
    """(points, count) of a lattice set, points in lexicographic order."""
    pts = folner_set.lattice_points()
    return pts, len(pts)


def _check_set(ctx: GroupContext, folner_set: FolnerSet):
    if folner_set.dim != ctx.dim:
        raise DimensionMismatchError(f"set of dimension {folner_set.dim} used on {ctx.dual_name}")
    if ctx.is_finite and not isinstance(folner_set, DualBlock):
        raise UnsupportedContextError("finite groups average over dual blocks")
    if ctx.is_torus and (not folner_set.lattice or isinstance(folner_set, DualBlock)):
        raise UnsupportedContextError(f"torus averages need a set in Z^{ctx.dim}")
    if ctx.is_euclidean and folner_set.lattice:
        raise UnsupportedContextError(f"Euclidean averages need a set in R^{ctx.dim}")
    if isinstance(folner_set, DualBlock) and folner_set.moduli != ctx.moduli:
        raise DimensionMismatchError(f"block over {folner_set.moduli} used on {ctx.dual_name}")


def _lattice_average(spectrum: SpectrumSource, folner_set: FolnerSet, x):
    pts = folner_set.lattice_points()
    terms = characters(spectrum.ctx, pts, x) * spectrum.evaluate(pts)
    return complex(np.sum(terms) / len(pts))


def _box_frequency_average(mu: Measure, half_widths, x, rtol):
    total = 0j
    for term in separable_terms(mu):
        value = complex(term.coefficient)
        offsets = term.offsets(x)
        for j, h in enumerate(half_widths):
            limit = min(h, term.cutoff)

            def axis_integrand(xi, j=j, term=term):
                return np.exp(2j * np.pi * x[j] * xi) * term.factor(j, xi)

            def level_value(level, j=j, limit=limit):
                return integrate_interval(axis_integrand, -limit, limit, panel_width(offsets[j], level))

            integral = integrate_until_stable(level_value, rtol, scale=2.0 * h, what=f"box axis {j} integral")
            value *= complex(integral) / (2.0 * h)
        total += value
    return total


def _ellipsoid_frequency_average(mu: Measure, semi_axes, x, rtol):
    """1/omega_d * integral over the unit ball of exp(2 pi i <x, a eta>) mu_hat(a eta)."""
    if mu.ctx.dim > BALL_RULE_MAX_DIM:
        raise UnsupportedContextError(
            f"ball and ellipsoid averages of absolutely continuous parts need d <= {BALL_RULE_MAX_DIM}, got {mu.ctx.dim}")
    a = np.asarray(semi_axes, dtype=float)
    terms = separable_terms(mu)
    if not terms:
        return 0j
    cutoff = max(t.cutoff for t in terms)
    radius = min(1.0, cutoff / float(np.min(a)))
    oscillation = float(np.max(a)) * max(float(np.linalg.norm(t.offsets(x))) for t in terms)
    spectrum = MeasureSpectrum(mu)

    def integrand(eta):
        xi = eta * a[None, :]
        return np.exp(2j * np.pi * (xi @ x)) * spectrum.evaluate(xi)

    scale = unit_ball_volume(mu.ctx.dim) * mu.total_variation_bound()
    integral = ball_integral(integrand, radius, mu.ctx.dim, oscillation, rtol=rtol, scale=scale,
                             what="ellipsoid frequency integral")
    return integral / unit_ball_volume(mu.ctx.dim)


def folner_average_frequency(source, folner_set: FolnerSet, x, rtol=QUAD_RTOL) -> complex:
    """
    Frequency-side evaluation on R^d of 1/m(F) * integral over F of
    exp(2 pi i <x, xi>) mu_hat(xi), by tensor Gauss-Legendre on boxes and a
    polar/spherical rule on balls and ellipsoids.
    """
    spectrum = as_spectrum(source)
    ctx = spectrum.ctx
    if not ctx.is_euclidean or not isinstance(spectrum, MeasureSpectrum):
        raise UnsupportedContextError("frequency-side quadrature needs a measure on R^d")
    _check_set(ctx, folner_set)
    x = np.asarray(ctx.point(x), dtype=float)
    mu = spectrum.measure
    if isinstance(folner_set, (CubeSet, BoxSet)):
        return _box_frequency_average(mu, folner_set.half_extents(), x, rtol)
    return _ellipsoid_frequency_average(mu, folner_set.half_extents(), x, rtol)


def cantor_level(bandwidth: float) -> int:
    """
    IFS level whose midpoint sums integrate a kernel with frequencies up to
    ``bandwidth`` to about CANTOR_KERNEL_TOL.
    """
    need = math.log(max(2.0 * math.pi * bandwidth, 1.0) / math.sqrt(CANTOR_KERNEL_TOL)) / math.log(3.0)
    return int(min(CANTOR_MAX_LEVEL, max(CANTOR_MIN_LEVEL, math.ceil(need))))


def cantor_spatial_sum(mu: Measure, kernel, x, bandwidth) -> complex:
    """coefficient * integral of kernel(t - x) against the Cantor component."""
    if mu.cantor is None:
        return 0j
    points, weights = mu.cantor.support_points(cantor_level(bandwidth))
    vals = kernel(points[:, None] - np.asarray(x, dtype=float)[None, :])
    return complex(mu.cantor.coefficient * np.sum(weights * vals))


def folner_average(source, folner_set: FolnerSet, x, rtol=QUAD_RTOL) -> complex:
    spectrum = as_spectrum(source)
    ctx = spectrum.ctx
    _check_set(ctx, folner_set)
    x = ctx.point(x)
    if not ctx.is_euclidean:
        return _lattice_average(spectrum, folner_set, x)

    if not isinstance(spectrum, MeasureSpectrum):
        raise UnsupportedContextError("Euclidean averages need a measure, not tabulated coefficients")
    mu = spectrum.measure
    value = 0j
    if mu.atoms:
        value += complex(np.sum(mu.weights * folner_set.spatial_kernel(mu.positions - x[None, :])))
    if mu.ac:
        ac_only = Measure(ctx, (), mu.ac, None)
        value += folner_average_frequency(ac_only, folner_set, x, rtol)
    if mu.cantor is not None:
        value += cantor_spatial_sum(mu, folner_set.spatial_kernel, x, max(folner_set.half_extents()))
    return value


def folner_defect(folner_set: FolnerSet, gamma0) -> float:
    """m(F delta (gamma0 + F)) / m(F), exact by integer membership tests."""
    gamma0 = np.asarray(gamma0, dtype=np.int64).reshape(-1)
    if gamma0.shape != (folner_set.dim,):
        raise DimensionMismatchError(f"shift {gamma0} does not match dimension {folner_set.dim}")
    pts = folner_set.lattice_points()
    # |F \ (F - gamma0)| = |(gamma0 + F) \ F|, so the symmetric difference is twice it
    stay = int(np.count_nonzero(folner_set.contains(pts + gamma0[None, :])))
    return 2.0 * (len(pts) - stay) / len(pts)


def _nested_lattice_values(spectrum, sequence: FolnerSequence, x, indices):
    top = sequence(max(indices))
    pts = top.lattice_points()
    levels = sequence.nested_levels(pts)
    order = np.argsort(levels, kind="stable")
    levels = levels[order]
    terms = characters(spectrum.ctx, pts[order], x) * spectrum.evaluate(pts[order])
    partial = np.cumsum(terms)
    values = []
    for n in indices:
        count = int(np.searchsorted(levels, n, side="right"))
        values.append(complex(partial[count - 1] / count))
    return values


def wiener_recover(source, sequence: FolnerSequence, x, indices, rtol=QUAD_RTOL) -> list:
    """One RunRecord per index: the F_n average at x against the true atom weight."""
    indices = list(indices)
    if not indices:
        raise ValueError("indices must be nonempty")
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValueError(f"indices must be strictly increasing, got {indices}")
    spectrum = as_spectrum(source)
    ctx = spectrum.ctx
    if sequence.dim != ctx.dim:
        raise DimensionMismatchError(f"sequence of dimension {sequence.dim} used on {ctx.dual_name}")
    if not sequence.is_strictly_increasing(indices):
        logger.warning("%s: set measures are not strictly increasing over %s", sequence.method_tag, indices)
    x = ctx.point(x)
    truth = spectrum.truth(x)

    integral_indices = all(float(n) == int(n) for n in indices)
    if ctx.is_torus and sequence.nested_levels is not None and integral_indices:
        _check_set(ctx, sequence(indices[0]))
        values = _nested_lattice_values(spectrum, sequence, x, [int(n) for n in indices])
    else:
        values = [folner_average(spectrum, sequence(n), x, rtol) for n in indices]
    logger.debug("%s at x=%s: %d indices", sequence.method_tag, x, len(indices))
    return [RunRecord(sequence.method_tag, None, n, x, v, truth) for n, v in zip(indices, values)]


def dirichlet_cube(n: int, d: int, t) -> np.ndarray:
    """
    Normalized product Dirichlet kernel prod_j sin((2n+1) pi t_j) / ((2n+1) sin(pi t_j)),
    the torus cube average of delta_0 at -t. Equals 1 at integer t.
    """
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if t.shape[1] != d:
        raise DimensionMismatchError(f"points have {t.shape[1]} coordinates, expected {d}")
    u = t - np.rint(t)
    m = 2 * n + 1
    return np.prod(sinc(m * np.pi * u) / sinc(np.pi * u), axis=1)
