"""
Fourier-Stieltjes transforms of model measures.

mu_hat(mu, gamma) = sum over atoms of w * conj(gamma(x)) plus closed forms for
every absolutely continuous part and a truncated infinite product for the
Cantor part. On finite groups the full DFT, its exact inverse and the measure
form of Parseval's identity are provided.
"""
import csv
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import reduce, singledispatch
from typing import Callable

import numpy as np

from group_modules import GroupContext, _lcm, haar_normalizers
from measure_modules import BoxAc, CantorComponent, GaussianAc, LebesgueAc, Measure, true_atom
from utils import (
    DimensionMismatchError,
    InvalidComponentError,
    MissingCoefficientError,
    UnsupportedContextError,
    ensure_parent_dir,
    format_number,
    sinc,
)

logger = logging.getLogger(__name__)

CANTOR_FACTOR_CUTOFF = 1e-8
# exp(-41.5) < 1e-18: past this exponent a Gaussian transform is treated as zero
GAUSS_EXPONENT_CUTOFF = 41.5
_CHUNK = 1 << 16


def character_matrix(ctx: GroupContext, gammas, xs) -> np.ndarray:
    """exp(2 pi i <gamma_a, x_b>) for every pair; shape (len(gammas), len(xs))."""
    gammas = np.atleast_2d(np.asarray(gammas))
    xs = np.atleast_2d(np.asarray(xs))
    if gammas.shape[1] != ctx.dim or xs.shape[1] != ctx.dim:
        raise DimensionMismatchError(f"frequencies/points do not match dimension {ctx.dim}")
    if ctx.is_finite:
        L = reduce(_lcm, ctx.moduli)
        m = np.asarray(ctx.moduli, dtype=np.int64)
        scale = np.asarray([L // mj for mj in ctx.moduli], dtype=np.int64)
        residues = np.mod(gammas.astype(np.int64)[:, None, :] * xs.astype(np.int64)[None, :, :], m)
        phase = np.mod(residues @ scale, L) / L
    else:
        phase = gammas.astype(float) @ xs.astype(float).T
        if ctx.is_torus:
            phase = np.mod(phase, 1.0)
    return np.exp(2j * np.pi * phase)


def cantor_hat(xi) -> np.ndarray:
    """
    Transform of the middle-thirds Cantor measure on [0, 1]:
    exp(-pi i xi) * prod_k cos(2 pi xi / 3^k). Factors stop once
    |2 pi xi 3^-k| < CANTOR_FACTOR_CUTOFF; the remaining tail is
    exp(-sum_{j>=k} theta_j^2 / 2) = exp(-9 theta_k^2 / 16).
    """
    xi = np.asarray(xi, dtype=float)
    theta = 2.0 * np.pi * xi / 3.0
    prod = np.ones(xi.shape)
    done = np.zeros(xi.shape, dtype=bool)
    while not np.all(done):
        small = (np.abs(theta) < CANTOR_FACTOR_CUTOFF) & ~done
        prod = np.where(small, prod * np.exp(-9.0 * theta * theta / 16.0), prod)
        done |= small
        prod = np.where(done, prod, prod * np.cos(theta))
        theta = theta / 3.0
    return np.exp(-1j * np.pi * xi) * prod


def cantor_hat_recursive(xi: float, min_scale: float = 1e-10) -> complex:
    """
    Self-similarity oracle: mu_hat(xi) = exp(-2 pi i xi/3) cos(2 pi xi/3) mu_hat(xi/3),
    recursed until |xi| < min_scale, where the second-order moment expansion
    (mean 1/2, second moment 3/8) closes the recursion.
    """
    factor = 1.0 + 0j
    xi = float(xi)
    while abs(xi) >= min_scale:
        factor *= np.exp(-2j * np.pi * xi / 3.0) * np.cos(2.0 * np.pi * xi / 3.0)
        xi /= 3.0
    base = 1.0 - 1j * np.pi * xi - 0.75 * (np.pi * xi) ** 2
    return complex(factor * base)


@singledispatch
def component_transform(comp, ctx: GroupContext, xi: np.ndarray) -> np.ndarray:
    raise InvalidComponentError(f"no closed-form transform for {type(comp).__name__}")


@component_transform.register
def _(comp: GaussianAc, ctx, xi):
    sigma = comp.width
    r2 = np.sum(xi.astype(float) ** 2, axis=1)
    phase = ctx.pairing(xi, np.asarray(comp.center))
    return comp.coefficient * np.exp(-2.0 * np.pi ** 2 * sigma ** 2 * r2) * np.exp(-2j * np.pi * phase)


@component_transform.register
def _(comp: BoxAc, ctx, xi):
    xi = xi.astype(float)
    h = np.asarray(comp.half_widths)
    envelope = np.prod(sinc(2.0 * np.pi * xi * h[None, :]), axis=1)
    phase = ctx.pairing(xi, np.asarray(comp.center))
    return comp.coefficient * envelope * np.exp(-2j * np.pi * phase)


@component_transform.register
def _(comp: LebesgueAc, ctx, xi):
    return comp.coefficient * np.all(xi == 0, axis=1).astype(complex)


@component_transform.register
def _(comp: CantorComponent, ctx, xi):
    xi1 = xi[:, 0].astype(float)
    return comp.coefficient * cantor_hat(xi1) * np.exp(-2j * np.pi * xi1 * comp.offset)


def _validate_frequencies(ctx, gammas):
    gammas = np.atleast_2d(np.asarray(gammas))
    if gammas.shape[1] != ctx.dim:
        raise DimensionMismatchError(f"frequencies have {gammas.shape[1]} coordinates, expected {ctx.dim}")
    if not ctx.is_euclidean:
        gammas = np.rint(gammas).astype(np.int64)
    return gammas


def mu_hat_many(mu: Measure, gammas) -> np.ndarray:
    """mu_hat at every row of an (n, d) frequency array."""
    ctx = mu.ctx
    gammas = _validate_frequencies(ctx, gammas)
    out = np.zeros(len(gammas), dtype=complex)
    for start in range(0, len(gammas), _CHUNK):
        block = gammas[start:start + _CHUNK]
        acc = np.zeros(len(block), dtype=complex)
        if mu.atoms:
            acc += np.conj(character_matrix(ctx, block, mu.positions)) @ mu.weights
        for comp in mu.ac:
            acc += component_transform(comp, ctx, block)
        if mu.cantor is not None:
            acc += component_transform(mu.cantor, ctx, block)
        out[start:start + _CHUNK] = acc
    return out


def mu_hat(mu: Measure, gamma) -> complex:
    gamma = np.atleast_1d(np.asarray(gamma))
    if gamma.shape != (mu.ctx.dim,):
        raise DimensionMismatchError(f"frequency {gamma} does not match dimension {mu.ctx.dim}")
    return complex(mu_hat_many(mu, gamma[None, :])[0])


@dataclass(frozen=True)
class SeparableTerm:
    """
    One component of a measure on T^d or R^d written as
    coefficient * prod_j factor(j, xi_j). ``extents[j]`` is the spatial
    interval carrying its mass along axis j and ``cutoff`` a frequency
    radius past which the transform is negligible on every axis.
    """

    coefficient: complex
    factor: Callable
    extents: tuple
    cutoff: float = np.inf

    def offsets(self, x) -> np.ndarray:
        """Per-axis largest distance from x to the term's support."""
        return np.array([max(abs(x[j] - lo), abs(x[j] - hi)) for j, (lo, hi) in enumerate(self.extents)])


def separable_terms(mu: Measure) -> list:
    if mu.ctx.is_finite:
        raise UnsupportedContextError("separable terms are defined on T^d and R^d only")
    terms = []
    for atom in mu.atoms:
        p = np.asarray(atom.position, dtype=float)
        terms.append(SeparableTerm(
            atom.weight,
            lambda j, xi, p=p: np.exp(-2j * np.pi * xi * p[j]),
            tuple((float(c), float(c)) for c in p),
        ))
    for comp in mu.ac:
        if isinstance(comp, GaussianAc):
            c, s = np.asarray(comp.center), comp.width
            terms.append(SeparableTerm(
                comp.coefficient,
                lambda j, xi, c=c, s=s: np.exp(-2.0 * np.pi ** 2 * s * s * xi * xi - 2j * np.pi * xi * c[j]),
                tuple(comp.spatial_extent(j) for j in range(mu.ctx.dim)),
                np.sqrt(GAUSS_EXPONENT_CUTOFF / (2.0 * np.pi ** 2)) / s,
            ))
        elif isinstance(comp, BoxAc):
            c, h = np.asarray(comp.center), np.asarray(comp.half_widths)
            terms.append(SeparableTerm(
                comp.coefficient,
                lambda j, xi, c=c, h=h: sinc(2.0 * np.pi * h[j] * xi) * np.exp(-2j * np.pi * xi * c[j]),
                tuple(comp.spatial_extent(j) for j in range(mu.ctx.dim)),
            ))
        else:
            raise UnsupportedContextError(f"{comp.kind} component has no separable form on {mu.ctx.dual_name}")
    if mu.cantor is not None:
        off = mu.cantor.offset
        terms.append(SeparableTerm(
            mu.cantor.coefficient,
            lambda j, xi, off=off: cantor_hat(xi) * np.exp(-2j * np.pi * xi * off),
            ((off, off + 1.0),),
        ))
    return terms


class SpectrumSource(ABC):
    """Anything that can hand out Fourier coefficients for a context."""

    ctx: GroupContext

    @abstractmethod
    def evaluate(self, gammas) -> np.ndarray:
        pass

    def truth(self, x) -> complex:
        """Ground-truth mu({x}) when known, NaN otherwise."""
        return complex(np.nan, np.nan)


class MeasureSpectrum(SpectrumSource):
    def __init__(self, measure: Measure):
        self.measure = measure
        self.ctx = measure.ctx

    def evaluate(self, gammas):
        return mu_hat_many(self.measure, gammas)

    def truth(self, x):
        return true_atom(self.measure, x)


class TabulatedSpectrum(SpectrumSource):
    """
    Fourier coefficients read from a table, torus only. Any coefficient a sum
    needs but the table lacks raises MissingCoefficientError rather than being
    silently dropped.
    """

    def __init__(self, ctx: GroupContext, coefficients: dict):
        if not ctx.is_torus:
            raise UnsupportedContextError("tabulated spectra are only accepted on the torus")
        self.ctx = ctx
        self.coefficients = {tuple(int(c) for c in k): complex(v) for k, v in coefficients.items()}

    def evaluate(self, gammas):
        gammas = _validate_frequencies(self.ctx, gammas)
        out = np.empty(len(gammas), dtype=complex)
        for i, k in enumerate(map(tuple, gammas.tolist())):
            try:
                out[i] = self.coefficients[k]
            except KeyError:
                raise MissingCoefficientError(f"spectrum table has no coefficient for k={k}") from None
        return out

    @classmethod
    def from_csv(cls, path, ctx: GroupContext) -> "TabulatedSpectrum":
        coefficients = {}
        with open(path, newline="") as f:
            reader = csv.reader(f)
            for row in reader:
                if not row or row[0].startswith("#"):
                    continue
                try:
                    values = [float(v) for v in row]
                except ValueError:
                    continue  # header
                if len(values) != ctx.dim + 2:
                    raise DimensionMismatchError(f"spectrum row {row} needs {ctx.dim} coordinates plus re, im")
                coefficients[tuple(int(round(v)) for v in values[:ctx.dim])] = complex(values[-2], values[-1])
        logger.info("loaded %d tabulated coefficients from %s", len(coefficients), path)
        return cls(ctx, coefficients)


def as_spectrum(source) -> SpectrumSource:
    if isinstance(source, SpectrumSource):
        return source
    if isinstance(source, Measure):
        return MeasureSpectrum(source)
    raise TypeError(f"expected a Measure or SpectrumSource, got {type(source).__name__}")


@dataclass(frozen=True)
class SpectrumTable:
    """mu_hat on every frequency of a finite dual, indexed like the moduli."""

    ctx: GroupContext
    values: np.ndarray

    def __post_init__(self):
        if not self.ctx.is_finite:
            raise UnsupportedContextError("spectrum tables live on finite groups")
        if self.values.size != self.ctx.order:
            raise DimensionMismatchError(f"table has {self.values.size} entries, group has {self.ctx.order}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex).reshape(self.ctx.moduli))

    def __getitem__(self, gamma):
        return complex(self.values[tuple(int(g) for g in np.atleast_1d(gamma))])

    def to_csv(self, path):
        ensure_parent_dir(path)
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow([f"k_{j + 1}" for j in range(self.ctx.dim)] + ["re", "im"])
            for gamma in self.ctx.all_points():
                value = self[gamma]
                w.writerow([str(int(g)) for g in gamma] + [format_number(value.real), format_number(value.imag)])

    @classmethod
    def from_csv(cls, path, ctx: GroupContext) -> "SpectrumTable":
        values = np.zeros(ctx.moduli, dtype=complex)
        with open(path, newline="") as f:
            reader = csv.reader(f)
            next(reader)
            for row in reader:
                k = tuple(int(v) for v in row[:ctx.dim])
                values[k] = complex(float(row[-2]), float(row[-1]))
        return cls(ctx, values)


def _require_finite_atomic(mu: Measure):
    if not mu.ctx.is_finite:
        raise UnsupportedContextError(f"expected a finite group, got {mu.ctx.kind.value}")
    if not mu.is_atomic:
        raise InvalidComponentError("finite groups admit only atoms")


def finite_dft(mu: Measure) -> SpectrumTable:
    """table[gamma] = sum_x mu({x}) conj(gamma(x)), direct O(|G| * #atoms)."""
    _require_finite_atomic(mu)
    values = mu_hat_many(mu, mu.ctx.all_points())
    logger.debug("finite dft on %s: %d frequencies", mu.ctx.dual_name, len(values))
    return SpectrumTable(mu.ctx, values)


def finite_inverse(table: SpectrumTable) -> dict:
    """weights[x] = (1/|G|) sum_gamma table[gamma] gamma(x) for every x in G."""
    ctx = table.ctx
    _, inverse_const = haar_normalizers(ctx)
    gammas = ctx.all_points()
    flat = table.values.reshape(-1)
    weights = {}
    block = max(1, _CHUNK // max(1, len(gammas)))
    for start in range(0, len(gammas), block):
        xs = gammas[start:start + block]
        vals = inverse_const * (flat @ character_matrix(ctx, gammas, xs))
        for x, v in zip(xs, vals):
            weights[tuple(int(c) for c in x)] = complex(v)
    return weights


def parseval_measure_check(g, mu: Measure):
    """
    Both sides of sum_x Fg(x) mu({x}) = (1/|G|) sum_gamma g(gamma) mu_hat(gamma), where
    Fg(x) = (1/|G|) sum_gamma g(gamma) conj(gamma(x)) is the forward transform on the dual.
    Computed independently; returns (lhs, rhs, |lhs - rhs|).
    """
    _require_finite_atomic(mu)
    ctx = mu.ctx
    gammas = ctx.all_points()
    g = np.asarray(g, dtype=complex).reshape(-1)
    if g.size != ctx.order:
        raise DimensionMismatchError(f"g has {g.size} entries, dual has {ctx.order}")
    fwd_g = (g @ np.conj(character_matrix(ctx, gammas, mu.positions))) / ctx.order if mu.atoms else np.zeros(0)
    lhs = complex(np.sum(fwd_g * mu.weights)) if mu.atoms else 0j
    rhs = complex(np.sum(g * mu_hat_many(mu, gammas)) / ctx.order)
    return lhs, rhs, abs(lhs - rhs)
