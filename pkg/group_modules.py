"""
Group contexts: the torus T^d, Euclidean space R^d and finite abelian groups
Z_{m_1} x ... x Z_{m_k}, with their duals and characters.

Additive notation throughout: the identity is the zero vector and a
translate of a set F by gamma is gamma + F. The Fourier kernel is
exp(-2 pi i <gamma, x>) forward and exp(+2 pi i <gamma, x>) inverse.
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np

from utils import DimensionMismatchError, UnsupportedContextError


class GroupKind(str, Enum):
    TORUS = "torus"
    EUCLIDEAN = "euclidean"
    FINITE = "finite"


@dataclass(frozen=True)
class GroupContext:
    kind: GroupKind
    dim: int
    moduli: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", GroupKind(self.kind))
        if self.kind is GroupKind.FINITE:
            moduli = tuple(int(m) for m in self.moduli)
            if not moduli:
                raise UnsupportedContextError("finite group needs at least one modulus")
            if any(m < 2 for m in moduli):
                raise UnsupportedContextError(f"every modulus must be >= 2, got {moduli}")
            object.__setattr__(self, "moduli", moduli)
            object.__setattr__(self, "dim", len(moduli))
        else:
            if int(self.dim) < 1:
                raise UnsupportedContextError(f"dimension must be >= 1, got {self.dim}")
            if self.moduli:
                raise UnsupportedContextError("moduli only apply to finite groups")
            object.__setattr__(self, "dim", int(self.dim))

    @classmethod
    def torus(cls, d: int) -> "GroupContext":
        return cls(GroupKind.TORUS, d)

    @classmethod
    def euclidean(cls, d: int) -> "GroupContext":
        return cls(GroupKind.EUCLIDEAN, d)

    @classmethod
    def finite(cls, moduli) -> "GroupContext":
        moduli = tuple(moduli)
        return cls(GroupKind.FINITE, len(moduli), moduli)

    @property
    def is_torus(self) -> bool:
        return self.kind is GroupKind.TORUS

    @property
    def is_euclidean(self) -> bool:
        return self.kind is GroupKind.EUCLIDEAN

    @property
    def is_finite(self) -> bool:
        return self.kind is GroupKind.FINITE

    @property
    def order(self) -> int:
        """|G| for finite groups."""
        if not self.is_finite:
            raise UnsupportedContextError(f"{self.kind.value} group has no finite order")
        return int(np.prod(self.moduli))

    @property
    def dual_name(self) -> str:
        if self.is_torus:
            return f"Z^{self.dim}"
        if self.is_euclidean:
            return f"R^{self.dim}"
        return "x".join(f"Z_{m}" for m in self.moduli)

    def identity(self) -> np.ndarray:
        if self.is_finite:
            return np.zeros(self.dim, dtype=np.int64)
        return np.zeros(self.dim, dtype=float)

    def _check_shape(self, arr, what):
        if arr.shape[-1:] != (self.dim,):
            raise DimensionMismatchError(
                f"{what} has {arr.shape[-1] if arr.ndim else 0} coordinates, "
                f"{self.kind.value} context has dimension {self.dim}"
            )

    def point(self, coords) -> np.ndarray:
        """Canonical GroupPoint: torus wrapped to [0,1)^d, finite reduced mod m."""
        arr = np.atleast_1d(np.asarray(coords))
        self._check_shape(arr, "point")
        if self.is_finite:
            return np.mod(np.rint(arr).astype(np.int64), self.moduli)
        arr = arr.astype(float)
        if self.is_torus:
            arr = np.mod(arr, 1.0)
            # np.mod(-1e-18, 1.0) rounds to 1.0
            arr = np.where(arr >= 1.0, 0.0, arr)
        return arr

    def points(self, coords) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(coords))
        return np.stack([self.point(row) for row in arr]) if len(arr) else arr.reshape(0, self.dim)

    def frequency(self, coords) -> np.ndarray:
        """Canonical FrequencyPoint: integer on Z^d and finite duals, real on R^d."""
        arr = np.atleast_1d(np.asarray(coords))
        self._check_shape(arr, "frequency")
        if self.is_euclidean:
            return arr.astype(float)
        as_int = np.rint(arr)
        if not np.allclose(as_int, arr):
            raise DimensionMismatchError(f"frequency {arr} is not integral on {self.dual_name}")
        as_int = as_int.astype(np.int64)
        if self.is_finite:
            return np.mod(as_int, self.moduli)
        return as_int

    def pairing(self, gammas, x) -> np.ndarray:
        """
        <gamma, x> in turns, i.e. the character is exp(2 pi i * pairing).
        ``gammas`` may be a single frequency or an (n, d) array. Torus and
        finite phases are reduced to [0, 1).
        """
        gammas = np.asarray(gammas)
        x = np.asarray(x)
        self._check_shape(gammas, "frequency")
        self._check_shape(x, "point")
        if self.is_finite:
            return _finite_pairing(self.moduli, gammas, x)
        phase = gammas @ x if gammas.ndim > 1 else float(np.dot(gammas, x))
        if self.is_torus:
            return np.mod(phase, 1.0)
        return phase

    def distance(self, x, y) -> float:
        """Max-norm distance; periodic on the torus and on finite groups."""
        diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.is_torus:
            diff = np.minimum(diff, 1.0 - diff)
        elif self.is_finite:
            m = np.asarray(self.moduli, dtype=float)
            diff = np.minimum(diff, m - diff)
        return float(np.max(diff)) if diff.size else 0.0

    def all_points(self) -> np.ndarray:
        """Every element of a finite group, in lexicographic order."""
        if not self.is_finite:
            raise UnsupportedContextError("only finite groups can be enumerated")
        grids = np.meshgrid(*[np.arange(m) for m in self.moduli], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    def to_spec(self) -> dict:
        if self.is_finite:
            return {"kind": self.kind.value, "moduli": list(self.moduli)}
        return {"kind": self.kind.value, "dim": self.dim}

    @classmethod
    def from_spec(cls, spec: dict) -> "GroupContext":
        kind = GroupKind(spec["kind"])
        if kind is GroupKind.FINITE:
            return cls.finite(spec["moduli"])
        return cls(kind, int(spec["dim"]))


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def _finite_pairing(moduli, gammas, x):
    # exact: sum_j (k_j x_j mod m_j) * (L / m_j) mod L, L = lcm(moduli)
    L = reduce(_lcm, moduli)
    scale = np.asarray([L // m for m in moduli], dtype=np.int64)
    m = np.asarray(moduli, dtype=np.int64)
    residues = np.mod(np.asarray(gammas, dtype=np.int64) * np.asarray(x, dtype=np.int64), m)
    total = np.mod(residues @ scale, L)
    return total / L


def char_eval(ctx: GroupContext, gamma, x) -> complex:
    """gamma(x) = exp(2 pi i <gamma, x>)."""
    gamma = np.asarray(gamma)
    if gamma.ndim != 1:
        raise DimensionMismatchError("char_eval takes a single frequency; use characters() for arrays")
    return complex(np.exp(2j * np.pi * ctx.pairing(gamma, x)))


def characters(ctx: GroupContext, gammas, x) -> np.ndarray:
    """Vectorized char_eval over an (n, d) array of frequencies."""
    gammas = np.atleast_2d(np.asarray(gammas))
    return np.exp(2j * np.pi * ctx.pairing(gammas, x))


def haar_normalizers(ctx: GroupContext):
    """
    (forward, inverse) constants. c_G = 1 on T^d and R^d; on a finite group the
    inverse sum carries 1/|G| so that inversion is exact.
    """
    if ctx.is_finite:
        return 1.0, 1.0 / ctx.order
    return 1.0, 1.0
