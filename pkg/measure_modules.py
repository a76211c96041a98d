"""
Synthetic finite complex measures with known atomic parts.

A Measure is a list of atoms plus absolutely continuous components whose
Fourier transforms have closed forms (see fourier_modules) and an optional
middle-thirds Cantor component. Measures are immutable; every operation
returns a new one.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from group_modules import GroupContext
from utils import DimensionMismatchError, InvalidComponentError, as_complex, complex_pair

logger = logging.getLogger(__name__)

ATOM_MERGE_TOL = 1e-9
WRAPPED_GAUSSIAN_SIGMAS = 8.0


@dataclass(frozen=True)
class Atom:
    position: tuple
    weight: complex


class AcComponent(ABC):
    """An absolutely continuous probability density times a complex coefficient."""

    kind = ""

    @abstractmethod
    def validate(self, ctx: GroupContext):
        pass

    @abstractmethod
    def translated(self, ctx: GroupContext, shift) -> "AcComponent":
        pass

    @abstractmethod
    def density(self, ctx: GroupContext, t) -> np.ndarray:
        """Probability density (coefficient excluded) at an (n, d) array of points."""

    @abstractmethod
    def spatial_extent(self, axis: int):
        """(lo, hi) interval holding the component's mass along ``axis``."""

    @abstractmethod
    def params(self) -> dict:
        pass

    def scaled(self, c) -> "AcComponent":
        return replace(self, coefficient=self.coefficient * c)

    def to_spec(self) -> dict:
        return {"kind": self.kind, "params": self.params(), "coefficient": complex_pair(self.coefficient)}


@dataclass(frozen=True)
class GaussianAc(AcComponent):
    """Isotropic normal density N(center, width^2 I); wrapped (periodized) on the torus."""

    center: tuple
    width: float
    coefficient: complex = 1.0
    kind = "gaussian"

    def validate(self, ctx):
        if len(self.center) != ctx.dim:
            raise DimensionMismatchError(f"gaussian center {self.center} does not match dimension {ctx.dim}")
        if not self.width > 0:
            raise InvalidComponentError(f"gaussian width must be positive, got {self.width}")

    def translated(self, ctx, shift):
        center = ctx.point(np.asarray(self.center) + np.asarray(shift))
        return replace(self, center=tuple(float(c) for c in center))

    def density(self, ctx, t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        sigma = self.width
        out = np.ones(len(t))
        for axis in range(ctx.dim):
            diff = t[:, axis] - self.center[axis]
            if ctx.is_torus:
                # image copies within +-8 sigma of the point
                reach = int(np.ceil(WRAPPED_GAUSSIAN_SIGMAS * sigma)) + 1
                images = np.arange(-reach, reach + 1)
                offsets = diff[:, None] - images[None, :]
                mask = np.abs(offsets) <= WRAPPED_GAUSSIAN_SIGMAS * sigma
                vals = np.exp(-0.5 * (offsets / sigma) ** 2) * mask
                out *= vals.sum(axis=1) / (sigma * np.sqrt(2 * np.pi))
            else:
                out *= np.exp(-0.5 * (diff / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
        return out

    def spatial_extent(self, axis):
        c = self.center[axis]
        return c - WRAPPED_GAUSSIAN_SIGMAS * self.width, c + WRAPPED_GAUSSIAN_SIGMAS * self.width

    def params(self):
        return {"center": list(self.center), "width": self.width}


@dataclass(frozen=True)
class BoxAc(AcComponent):
    """Uniform probability density on the box center +- half_widths."""

    center: tuple
    half_widths: tuple
    coefficient: complex = 1.0
    kind = "box"

    def validate(self, ctx):
        if len(self.center) != ctx.dim or len(self.half_widths) != ctx.dim:
            raise DimensionMismatchError(f"box {self.center}/{self.half_widths} does not match dimension {ctx.dim}")
        if any(not h > 0 for h in self.half_widths):
            raise InvalidComponentError(f"box half-widths must be positive, got {self.half_widths}")

    def translated(self, ctx, shift):
        center = ctx.point(np.asarray(self.center) + np.asarray(shift))
        return replace(self, center=tuple(float(c) for c in center))

    def density(self, ctx, t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        out = np.ones(len(t))
        for axis in range(ctx.dim):
            h = self.half_widths[axis]
            diff = t[:, axis] - self.center[axis]
            if ctx.is_torus:
                reach = int(np.ceil(h)) + 1
                images = np.arange(-reach, reach + 1)
                hits = (np.abs(diff[:, None] - images[None, :]) <= h).sum(axis=1)
                out *= hits / (2 * h)
            else:
                out *= (np.abs(diff) <= h) / (2 * h)
        return out

    def spatial_extent(self, axis):
        return self.center[axis] - self.half_widths[axis], self.center[axis] + self.half_widths[axis]

    def params(self):
        return {"center": list(self.center), "half_widths": list(self.half_widths)}


@dataclass(frozen=True)
class LebesgueAc(AcComponent):
    """Normalized Haar measure of the torus."""

    coefficient: complex = 1.0
    kind = "lebesgue"

    def validate(self, ctx):
        if not ctx.is_torus:
            raise InvalidComponentError("lebesgue component is only defined on the torus")

    def translated(self, ctx, shift):
        return self

    def density(self, ctx, t):
        return np.ones(len(np.atleast_2d(t)))

    def spatial_extent(self, axis):
        return 0.0, 1.0

    def params(self):
        return {}


AC_KINDS = {"gaussian": GaussianAc, "box": BoxAc, "lebesgue": LebesgueAc}


@dataclass(frozen=True)
class CantorComponent:
    """
    Middle-thirds Cantor measure: the law of offset + sum_k eps_k 3^-k with
    eps_k uniform on {0, 2}. Singular continuous, so it carries no atoms.
    """

    coefficient: complex = 1.0
    offset: float = 0.0

    def validate(self, ctx: GroupContext):
        if ctx.dim != 1 or ctx.is_finite:
            raise InvalidComponentError("the Cantor component needs a one-dimensional torus or real line")

    def translated(self, ctx: GroupContext, shift) -> "CantorComponent":
        offset = self.offset + float(np.asarray(shift).reshape(-1)[0])
        if ctx.is_torus:
            offset = float(ctx.point([offset])[0])
        return replace(self, offset=offset)

    def support_points(self, level: int):
        """
        Midpoints of the 2^level level-m intervals (each of mass 2^-level).
        The measure restricted to an interval is symmetric about its midpoint,
        so midpoint sums are exact for affine integrands.
        """
        points = np.zeros(1)
        for k in range(1, level + 1):
            points = np.concatenate([points, points + 2.0 * 3.0 ** (-k)])
        points = points + 0.5 * 3.0 ** (-level) + self.offset
        return points, np.full(points.shape, 2.0 ** (-level))

    def to_spec(self) -> dict:
        return {"coefficient": complex_pair(self.coefficient), "offset": self.offset}


@dataclass(frozen=True)
class Measure:
    ctx: GroupContext
    atoms: tuple = ()
    ac: tuple = ()
    cantor: Optional[CantorComponent] = None
    _positions: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def positions(self) -> np.ndarray:
        if self._positions is None:
            dtype = np.int64 if self.ctx.is_finite else float
            pos = np.array([a.position for a in self.atoms], dtype=dtype).reshape(len(self.atoms), self.ctx.dim)
            object.__setattr__(self, "_positions", pos)
        return self._positions

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=complex)

    @property
    def is_atomic(self) -> bool:
        return not self.ac and self.cantor is None

    def total_variation_bound(self) -> float:
        bound = float(np.sum(np.abs(self.weights)))
        bound += sum(abs(c.coefficient) for c in self.ac)
        if self.cantor is not None:
            bound += abs(self.cantor.coefficient)
        return bound

    def scaled(self, c) -> "Measure":
        c = complex(c)
        return make_measure(
            self.ctx,
            [(a.position, a.weight * c) for a in self.atoms],
            [comp.scaled(c) for comp in self.ac],
            None if self.cantor is None else replace(self.cantor, coefficient=self.cantor.coefficient * c),
        )

    def __add__(self, other: "Measure") -> "Measure":
        if other.ctx != self.ctx:
            raise DimensionMismatchError(f"cannot add measures on {self.ctx} and {other.ctx}")
        cantor = self.cantor
        if other.cantor is not None:
            if cantor is None:
                cantor = other.cantor
            elif abs(cantor.offset - other.cantor.offset) <= ATOM_MERGE_TOL:
                cantor = replace(cantor, coefficient=cantor.coefficient + other.cantor.coefficient)
            else:
                raise InvalidComponentError("a measure holds at most one Cantor component")
        atoms = [(a.position, a.weight) for a in self.atoms + other.atoms]
        return make_measure(self.ctx, atoms, list(self.ac) + list(other.ac), cantor)

    def allclose(self, other: "Measure", tol: float = 1e-12) -> bool:
        if self.ctx != other.ctx or len(self.atoms) != len(other.atoms) or len(self.ac) != len(other.ac):
            return False
        for a in self.atoms:
            if abs(true_atom(other, a.position) - a.weight) > tol:
                return False
        for mine, theirs in zip(self.ac, other.ac):
            if type(mine) is not type(theirs) or abs(mine.coefficient - theirs.coefficient) > tol:
                return False
            for key, value in mine.params().items():
                if not _params_close(self.ctx, value, theirs.params()[key], key, tol):
                    return False
        if (self.cantor is None) != (other.cantor is None):
            return False
        if self.cantor is not None:
            if abs(self.cantor.coefficient - other.cantor.coefficient) > tol:
                return False
            if self.ctx.distance([self.cantor.offset], [other.cantor.offset]) > tol:
                return False
        return True

    def to_spec(self) -> dict:
        return {
            "atoms": [
                {"position": [float(p) for p in a.position], "weight": complex_pair(a.weight)} for a in self.atoms
            ],
            "ac": [c.to_spec() for c in self.ac],
            "cantor": None if self.cantor is None else self.cantor.to_spec(),
        }


def _params_close(ctx, a, b, key, tol):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if key == "center":
        return ctx.distance(a, b) <= tol
    return bool(np.all(np.abs(a - b) <= tol))


def make_measure(ctx: GroupContext, atoms=(), ac=(), cantor: Optional[CantorComponent] = None) -> Measure:
    """
    Builds a normalized Measure: positions canonicalized for ``ctx`` and atoms
    closer than ATOM_MERGE_TOL merged by adding their weights.
    """
    merged = []
    for atom in atoms:
        if isinstance(atom, Atom):
            position, weight = atom.position, atom.weight
        else:
            position, weight = atom
        weight = as_complex(weight)
        if not np.isfinite(weight):
            raise InvalidComponentError(f"atom weight {weight} is not finite")
        point = ctx.point(position)
        for i, (existing, w) in enumerate(merged):
            if ctx.distance(existing, point) <= ATOM_MERGE_TOL:
                merged[i] = (existing, w + weight)
                break
        else:
            merged.append((point, weight))

    if ctx.is_finite and (ac or cantor is not None):
        raise InvalidComponentError("finite groups admit only atoms")
    for comp in ac:
        comp.validate(ctx)
    if cantor is not None:
        cantor.validate(ctx)
        if ctx.is_torus:
            cantor = replace(cantor, offset=float(ctx.point([cantor.offset])[0]))

    caster = int if ctx.is_finite else float
    atom_tuple = tuple(Atom(tuple(caster(c) for c in p), w) for p, w in merged)
    # zero shift canonicalizes centers (torus wrap)
    ac_tuple = tuple(comp.translated(ctx, ctx.identity()) for comp in ac)
    logger.debug("measure on %s: %d atoms, %d ac components, cantor=%s",
                 ctx.dual_name, len(atom_tuple), len(ac_tuple), cantor is not None)
    return Measure(ctx, atom_tuple, ac_tuple, cantor)


def translate(mu: Measure, x0) -> Measure:
    """mu shifted by x0: every atom, center and offset moves by x0 (wrapped on the torus)."""
    x0 = np.atleast_1d(np.asarray(x0))
    if x0.shape != (mu.ctx.dim,):
        raise DimensionMismatchError(f"shift {x0} does not match dimension {mu.ctx.dim}")
    atoms = [(np.asarray(a.position) + x0, a.weight) for a in mu.atoms]
    ac = [comp.translated(mu.ctx, x0) for comp in mu.ac]
    cantor = None if mu.cantor is None else mu.cantor.translated(mu.ctx, x0)
    return make_measure(mu.ctx, atoms, ac, cantor)


def true_atom(mu: Measure, x) -> complex:
    """mu({x}): the weight of the atom within ATOM_MERGE_TOL of x, else 0."""
    point = mu.ctx.point(x)
    for atom in mu.atoms:
        if mu.ctx.distance(atom.position, point) <= ATOM_MERGE_TOL:
            return complex(atom.weight)
    return 0j


def ac_from_spec(kind: str, params: dict, coefficient) -> AcComponent:
    cls = AC_KINDS.get(kind)
    if cls is None:
        raise InvalidComponentError(f"unknown ac kind {kind!r}; expected one of {sorted(AC_KINDS)}")
    coefficient = as_complex(coefficient)
    if cls is GaussianAc:
        return GaussianAc(tuple(float(c) for c in params["center"]), float(params["width"]), coefficient)
    if cls is BoxAc:
        return BoxAc(tuple(float(c) for c in params["center"]),
                     tuple(float(h) for h in params["half_widths"]), coefficient)
    return LebesgueAc(coefficient)
