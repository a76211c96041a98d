"""
Bochner-Riesz means on the torus T^d.

    B_N^{d,delta}(x) = sum_k (1 - |k|^2/N^2)_+^delta exp(2 pi i <k, x>)
    beta_N^{d,delta} = B_N^{d,delta}(0)

and mu({x}) = lim_N 1/beta_N * sum_k (1 - |k|^2/N^2)_+^delta mu_hat(k) exp(2 pi i <k, x>).
delta = 0 gives the spherical Dirichlet kernel D_N^d.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from fourier_modules import as_spectrum
from folner_modules import BallSet
from group_modules import GroupContext, characters
from run_records import RunRecord
from utils import DiagnosticUndefinedError, DimensionMismatchError, InvalidComponentError, UnsupportedContextError, sinc

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SquaredRadiusShells:
    """
    Lattice points of the closed ball |k| <= N ordered by |k|^2 (lexicographic
    within a shell). Shell j = {k : |k|^2 = j} is points[offsets[j]:offsets[j+1]],
    so every smaller ball is a prefix.
    """

    N: int
    dim: int
    points: np.ndarray
    squared: np.ndarray
    offsets: np.ndarray

    def shell(self, j: int) -> np.ndarray:
        return self.points[self.offsets[j]:self.offsets[j + 1]]

    def prefix(self, radius: int) -> int:
        """Number of points with |k| <= radius."""
        return int(self.offsets[min(radius * radius, self.N * self.N) + 1])

    def count(self, radius=None) -> int:
        return self.prefix(self.N if radius is None else radius)


@lru_cache(maxsize=32)
def squared_radius_shells(N: int, d: int) -> SquaredRadiusShells:
    if N < 0 or d < 1:
        raise DimensionMismatchError(f"need N >= 0 and d >= 1, got N={N}, d={d}")
    axes = [np.arange(-N, N + 1, dtype=np.int64)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    box = np.stack([m.ravel() for m in mesh], axis=1)
    sq = np.sum(box * box, axis=1)
    keep = sq <= N * N
    box, sq = box[keep], sq[keep]
    order = np.argsort(sq, kind="stable")
    points, squared = box[order], sq[order]
    offsets = np.searchsorted(squared, np.arange(N * N + 2), side="left")
    for arr in (points, squared, offsets):
        arr.setflags(write=False)
    logger.debug("built %d shells for N=%d, d=%d (%d points)", N * N + 1, N, d, len(points))
    return SquaredRadiusShells(N, d, points, squared, offsets)


def _torus_point(d, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (d,):
        raise DimensionMismatchError(f"point {x} does not match dimension {d}")
    return GroupContext.torus(d).point(x)


def br_weights(N: int, delta: float, squared) -> np.ndarray:
    """(1 - |k|^2/N^2)_+^delta; at delta = 0 the boundary |k| = N keeps weight 1."""
    u = 1.0 - np.asarray(squared, dtype=float) / float(N * N)
    if delta == 0:
        return (u >= 0).astype(float)
    return np.clip(u, 0.0, None) ** delta


def _check_params(N, delta):
    if int(N) != N or N < 1:
        raise InvalidComponentError(f"N must be a positive integer, got {N}")
    if not delta >= 0:
        raise InvalidComponentError(f"delta must be >= 0, got {delta}")


def br_kernel_torus(N: int, delta: float, d: int, x) -> complex:
    _check_params(N, delta)
    x = _torus_point(d, x)
    shells = squared_radius_shells(int(N), d)
    chars = characters(GroupContext.torus(d), shells.points, x)
    return complex(np.sum(br_weights(N, delta, shells.squared) * chars))


def dirichlet_spherical(N: int, d: int, x) -> complex:
    """D_N^d(x) = sum over |k| <= N of exp(2 pi i <k, x>)."""
    if int(N) != N or N < 0:
        raise InvalidComponentError(f"N must be a non-negative integer, got {N}")
    x = _torus_point(d, x)
    shells = squared_radius_shells(int(N), d)
    return complex(np.sum(characters(GroupContext.torus(d), shells.points, x)))


def dirichlet_closed_form(N: int, x) -> float:
    """sin((2N+1) pi x) / sin(pi x), continued by 2N+1 at integers."""
    x = np.asarray(x, dtype=float)
    u = x - np.rint(x)
    m = 2 * N + 1
    return m * sinc(m * np.pi * u) / sinc(np.pi * u)


def dirichlet_sliced(M: int, d: int, x) -> complex:
    """
    sum over |k|^2 <= M of exp(2 pi i <k, x>), by slicing on the first coordinate:
    D^{d}[M](x) = sum_{j^2 <= M} exp(2 pi i j x_1) D^{d-1}[M - j^2](x_2..x_d).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (d,):
        raise DimensionMismatchError(f"point {x} does not match dimension {d}")
    if M < 0:
        return 0j
    top = math.isqrt(M)
    if d == 1:
        return complex(dirichlet_closed_form(top, x[0]))
    total = 0j
    for j in range(-top, top + 1):
        total += np.exp(2j * np.pi * j * x[0]) * dirichlet_sliced(M - j * j, d - 1, x[1:])
    return complex(total)


def beta(N: int, delta: float, d: int) -> float:
    _check_params(N, delta)
    shells = squared_radius_shells(int(N), d)
    return float(np.sum(br_weights(N, delta, shells.squared)))


def abel_identity_check(N: int, delta: float, d: int, x):
    """
    B_N = 1 - (1 - 1/N^2)^delta + sum_{j=1}^{N^2-1} [w_j - w_{j+1}] T_j with
    w_j = (1 - j/N^2)_+^delta and T_j = sum over |k|^2 <= j of exp(2 pi i <k, x>).
    Returns (direct, rearranged, |direct - rearranged|).
    """
    _check_params(N, delta)
    if not delta > 0:
        raise InvalidComponentError("the summation-by-parts form needs delta > 0")
    x = _torus_point(d, x)
    ctx = GroupContext.torus(d)

    pts = BallSet(int(N), d, lattice=True).lattice_points()
    sq = np.sum(pts * pts, axis=1)
    direct = complex(np.sum(br_weights(N, delta, sq) * characters(ctx, pts, x)))

    shells = squared_radius_shells(int(N), d)
    chars = characters(ctx, shells.points, x)
    n2 = int(N) * int(N)
    shell_sums = (np.bincount(shells.squared, weights=chars.real, minlength=n2 + 1)
                  + 1j * np.bincount(shells.squared, weights=chars.imag, minlength=n2 + 1))
    partial = np.cumsum(shell_sums)
    w = br_weights(N, delta, np.arange(n2 + 1))
    rearranged = complex(1.0 - w[1] + np.sum((w[1:n2] - w[2:n2 + 1]) * partial[1:n2]))
    return direct, rearranged, abs(direct - rearranged)


@dataclass(frozen=True)
class GrowthReport:
    max_ratio: float
    ratios: np.ndarray
    window_ratio: float


def growth_diagnostic(kernel: str, d: int, x, Ns, delta: float = 0.0) -> GrowthReport:
    """
    |K_N(x)| / N^(d-1) over N in Ns for K = D_N^d (``kernel="dirichlet"``) or
    B_N^{d,delta} (``kernel="br"``). window_ratio compares the largest ratio in
    the last quarter of the range with the largest in the first quarter.
    """
    if kernel == "dirichlet":
        delta = 0.0
    elif kernel != "br":
        raise ValueError(f"kernel must be 'dirichlet' or 'br', got {kernel!r}")
    Ns = [int(n) for n in Ns]
    if not Ns:
        raise ValueError("N range must be nonempty")
    x = _torus_point(d, x)
    if np.all(x == 0.0):
        raise DiagnosticUndefinedError("growth diagnostic is undefined on Z^d, where the kernel peaks")
    shells = squared_radius_shells(max(Ns), d)
    chars = characters(GroupContext.torus(d), shells.points, x)
    ratios = np.empty(len(Ns))
    for i, n in enumerate(Ns):
        _check_params(n, delta)
        end = shells.prefix(n)
        value = np.sum(br_weights(n, delta, shells.squared[:end]) * chars[:end])
        ratios[i] = abs(value) / float(n) ** (d - 1)
    window = max(1, len(Ns) // 4)
    first = float(np.max(ratios[:window]))
    window_ratio = float(np.max(ratios[-window:])) / first if first > 0 else math.inf
    return GrowthReport(float(np.max(ratios)), ratios, window_ratio)


def _require_torus(spectrum):
    if not spectrum.ctx.is_torus:
        raise UnsupportedContextError(f"torus Bochner-Riesz means need a torus, got {spectrum.ctx.kind.value}")


def wiener_br_torus(source, N: int, delta: float, x) -> complex:
    spectrum = as_spectrum(source)
    _require_torus(spectrum)
    _check_params(N, delta)
    x = spectrum.ctx.point(x)
    shells = squared_radius_shells(int(N), spectrum.ctx.dim)
    w = br_weights(N, delta, shells.squared)
    terms = w * spectrum.evaluate(shells.points) * characters(spectrum.ctx, shells.points, x)
    return complex(np.sum(terms) / np.sum(w))


def wiener_br_records(source, Ns, delta: float, x) -> list:
    """wiener_br_torus at every N, sharing one shell enumeration and one coefficient pass."""
    spectrum = as_spectrum(source)
    _require_torus(spectrum)
    Ns = [int(n) for n in Ns]
    if not Ns:
        raise ValueError("N sweep must be nonempty")
    for n in Ns:
        _check_params(n, delta)
    ctx = spectrum.ctx
    x = ctx.point(x)
    truth = spectrum.truth(x)
    shells = squared_radius_shells(max(Ns), ctx.dim)
    terms = spectrum.evaluate(shells.points) * characters(ctx, shells.points, x)
    records = []
    for n in Ns:
        end = shells.prefix(n)
        w = br_weights(n, delta, shells.squared[:end])
        records.append(RunRecord("bochner_riesz_td", delta, n, x, np.sum(w * terms[:end]) / np.sum(w), truth))
    return records
