"""
Weighted Fourier means on R^d.

For a nonnegative integrable profile psi with transform psi_hat, the mean

    1/(R^d psi_hat(0)) * integral psi(xi/R) mu_hat(xi) exp(2 pi i <x, xi>) dxi
        = 1/psi_hat(0) * integral psi_hat(R(t - x)) dmu(t)

tends to mu({x}) as R grows. Both sides are computed here: the spatial side
is the default (exact for atoms), the frequency side exists to check that
the two agree.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from fourier_modules import MeasureSpectrum, separable_terms
from folner_modules import cantor_spatial_sum
from measure_modules import Measure, true_atom
from quadrature_utils import (
    GRADING_LEVELS,
    QUAD_RTOL,
    ball_integral,
    integrate_interval,
    integrate_until_stable,
    panel_width,
)
from run_records import RunRecord
from special_functions import bessel_j_over_power_array, gamma_fn
from utils import InvalidComponentError, UnsupportedContextError, sinc

logger = logging.getLogger(__name__)

# exp(-pi u^2) < 1e-18 beyond this |u|
GAUSS_PROFILE_CUTOFF = math.sqrt(41.5 / math.pi)


def m_alpha(xi, alpha: float) -> np.ndarray:
    """(1 - |xi|^2)_+^alpha for a single point or an (n, d) array."""
    xi = np.asarray(xi, dtype=float)
    r2 = np.sum(xi * xi, axis=-1)
    return np.where(r2 < 1.0, np.clip(1.0 - r2, 0.0, None) ** alpha, 0.0)


def m_alpha_hat(t, d: int, alpha: float):
    """
    Transform of m_alpha on R^d:
    Gamma(alpha+1) pi^(d/2) J_{d/2+alpha}(2 pi |t|) / (pi |t|)^(d/2+alpha),
    whose value at 0 is pi^(d/2) Gamma(alpha+1) / Gamma(d/2+alpha+1).
    """
    if not alpha > 0:
        raise InvalidComponentError(f"Bochner-Riesz exponent must be positive, got {alpha}")
    t = np.asarray(t, dtype=float)
    scalar = t.ndim <= 1
    t = np.atleast_2d(t) if t.ndim else np.atleast_2d([t])
    r = np.sqrt(np.sum(t * t, axis=1))
    out = gamma_fn(alpha + 1.0) * math.pi ** (d / 2.0) * bessel_j_over_power_array(d / 2.0 + alpha, 2.0 * np.pi * r)
    return float(out[0]) if scalar else out


class WeightKernel(ABC):
    """A profile psi and its transform psi_hat, both in closed form."""

    kind = ""
    separable = False
    # psi vanishes (or is negligible) for |xi| > support
    support = 1.0

    def __init__(self, dim: int):
        self.dim = int(dim)

    @property
    def param(self):
        return None

    @property
    def method_tag(self) -> str:
        return self.kind

    @abstractmethod
    def profile(self, xi) -> np.ndarray:
        pass

    @abstractmethod
    def transform(self, t) -> np.ndarray:
        pass

    @abstractmethod
    def transform_at_zero(self) -> float:
        pass

    def axis_profile(self, u) -> np.ndarray:
        raise UnsupportedContextError(f"{self.kind} kernel is not separable")

    def phi(self, R, xi) -> np.ndarray:
        """phi_R(xi) = psi_hat(R xi) / psi_hat(0)."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return self.transform(R * xi) / self.transform_at_zero()


class GaussianKernel(WeightKernel):
    kind = "gaussian"
    separable = True
    support = GAUSS_PROFILE_CUTOFF

    def profile(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.exp(-np.pi * np.sum(xi * xi, axis=1))

    def transform(self, t):
        return self.profile(t)

    def transform_at_zero(self):
        return 1.0

    def axis_profile(self, u):
        return np.exp(-np.pi * u * u)


class BoxKernel(WeightKernel):
    """psi = indicator of [-1, 1]^d."""

    kind = "box_weight"
    separable = True

    def profile(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.all(np.abs(xi) <= 1.0, axis=1).astype(float)

    def transform(self, t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return np.prod(2.0 * sinc(2.0 * np.pi * t), axis=1)

    def transform_at_zero(self):
        return 2.0 ** self.dim

    def axis_profile(self, u):
        return (np.abs(u) <= 1.0).astype(float)


class BochnerRieszKernel(WeightKernel):
    kind = "bochner_riesz_rd"

    def __init__(self, dim: int, alpha: float):
        super().__init__(dim)
        if not alpha > 0:
            raise InvalidComponentError(f"Bochner-Riesz exponent must be positive, got {alpha}")
        self.alpha = float(alpha)

    @property
    def param(self):
        return self.alpha

    def profile(self, xi):
        return m_alpha(np.atleast_2d(xi), self.alpha)

    def transform(self, t):
        return m_alpha_hat(np.atleast_2d(t), self.dim, self.alpha)

    def transform_at_zero(self):
        return math.pi ** (self.dim / 2.0) * gamma_fn(self.alpha + 1.0) / gamma_fn(self.dim / 2.0 + self.alpha + 1.0)


def _require_euclidean(mu: Measure, kernel: WeightKernel):
    if not mu.ctx.is_euclidean:
        raise UnsupportedContextError(f"weighted means live on R^d, got {mu.ctx.kind.value}")
    if kernel.dim != mu.ctx.dim:
        raise UnsupportedContextError(f"kernel of dimension {kernel.dim} used on R^{mu.ctx.dim}")


def _separable_frequency_mean(mu, kernel, R, x, rtol):
    axis_norm = kernel.transform_at_zero() ** (1.0 / mu.ctx.dim)
    total = 0j
    for term in separable_terms(mu):
        value = complex(term.coefficient)
        offsets = term.offsets(x)
        limit = min(R * kernel.support, term.cutoff)
        for j in range(mu.ctx.dim):
            def axis_integrand(xi, j=j, term=term):
                return kernel.axis_profile(xi / R) * np.exp(2j * np.pi * x[j] * xi) * term.factor(j, xi)

            def level_value(level, j=j):
                return integrate_interval(axis_integrand, -limit, limit, panel_width(offsets[j], level))

            integral = integrate_until_stable(level_value, rtol, scale=R * axis_norm, what=f"{kernel.kind} axis {j}")
            value *= complex(integral) / (R * axis_norm)
        total += value
    return total


def bochner_riesz_frequency_integral(mu: Measure, R, alpha, x, rtol=QUAD_RTOL) -> complex:
    """integral over |xi| <= R of (1 - |xi|^2/R^2)^alpha mu_hat(xi) exp(2 pi i <x, xi>)."""
    terms = separable_terms(mu)
    if not terms:
        return 0j
    cutoff = max(t.cutoff for t in terms)
    radius = min(R, cutoff)
    oscillation = max(float(np.linalg.norm(t.offsets(x))) for t in terms)
    spectrum = MeasureSpectrum(mu)

    def integrand(xi):
        return m_alpha(xi / R, alpha) * np.exp(2j * np.pi * (xi @ x)) * spectrum.evaluate(xi)

    grading = GRADING_LEVELS if radius >= R else 0
    scale = R ** mu.ctx.dim * mu.total_variation_bound()
    return ball_integral(integrand, radius, mu.ctx.dim, oscillation, grading, rtol, scale,
                         what="Bochner-Riesz frequency integral")


def weighted_mean_frequency(mu: Measure, kernel: WeightKernel, R, x, rtol=QUAD_RTOL) -> complex:
    """1/(R^d psi_hat(0)) * integral psi(xi/R) mu_hat(xi) exp(2 pi i <x, xi>) dxi by quadrature."""
    _require_euclidean(mu, kernel)
    x = np.asarray(mu.ctx.point(x), dtype=float)
    if kernel.separable:
        return _separable_frequency_mean(mu, kernel, R, x, rtol)
    if isinstance(kernel, BochnerRieszKernel):
        integral = bochner_riesz_frequency_integral(mu, R, kernel.alpha, x, rtol)
        return integral / (R ** mu.ctx.dim * kernel.transform_at_zero())
    raise UnsupportedContextError(f"no frequency quadrature for {kernel.kind}")


def scaled_weight_mean(mu: Measure, kernel: WeightKernel, R, x, rtol=QUAD_RTOL) -> complex:
    """
    Spatial side 1/psi_hat(0) * integral psi_hat(R(t - x)) dmu(t): closed form
    on atoms, frequency quadrature on the absolutely continuous parts and a
    midpoint sum on the Cantor part.
    """
    _require_euclidean(mu, kernel)
    if not R > 0:
        raise InvalidComponentError(f"scale R must be positive, got {R}")
    x = np.asarray(mu.ctx.point(x), dtype=float)
    value = 0j
    if mu.atoms:
        value += complex(np.sum(mu.weights * kernel.phi(R, mu.positions - x[None, :])))
    if mu.ac:
        value += weighted_mean_frequency(Measure(mu.ctx, (), mu.ac, None), kernel, R, x, rtol)
    if mu.cantor is not None:
        value += cantor_spatial_sum(mu, lambda t: kernel.phi(R, t), x, R * kernel.support)
    return value


@dataclass(frozen=True)
class CorollaryCheck:
    spatial: complex
    frequency: complex
    discrepancy: float
    relative: float


def verify_weight_mean(mu: Measure, kernel: WeightKernel, R, x, rtol=1e-8) -> CorollaryCheck:
    """
    Both sides of the weighted mean. ``relative`` is the discrepancy over
    max(|spatial|, sum |w|).
    """
    spatial = scaled_weight_mean(mu, kernel, R, x, rtol)
    frequency = weighted_mean_frequency(mu, kernel, R, x, rtol)
    discrepancy = abs(spatial - frequency)
    scale = max(abs(spatial), mu.total_variation_bound(), 1e-300)
    logger.debug("%s R=%g: spatial=%s frequency=%s discrepancy=%.3g", kernel.kind, R, spatial, frequency, discrepancy)
    return CorollaryCheck(spatial, frequency, discrepancy, discrepancy / scale)


def br_mean_rd(mu: Measure, R, alpha, x, side="spatial", rtol=QUAD_RTOL) -> complex:
    """
    Bochner-Riesz mean
    Gamma(d/2+alpha+1) / (R^d pi^(d/2) Gamma(alpha+1)) * integral (1 - |xi|^2/R^2)_+^alpha mu_hat(xi) exp(2 pi i x xi).
    ``side="frequency"`` evaluates this display directly by quadrature.
    """
    kernel = BochnerRieszKernel(mu.ctx.dim, alpha)
    if side == "spatial":
        return scaled_weight_mean(mu, kernel, R, x, rtol)
    if side != "frequency":
        raise ValueError(f"side must be 'spatial' or 'frequency', got {side!r}")
    _require_euclidean(mu, kernel)
    d = mu.ctx.dim
    const = gamma_fn(d / 2.0 + alpha + 1.0) / (R ** d * math.pi ** (d / 2.0) * gamma_fn(alpha + 1.0))
    x = np.asarray(mu.ctx.point(x), dtype=float)
    return const * bochner_riesz_frequency_integral(mu, R, alpha, x, rtol)


def scaling_lemma_check(kernel: WeightKernel, R, freqs) -> float:
    """max |phi_R(xi)| over the given frequencies (bounded by 1)."""
    return float(np.max(np.abs(kernel.phi(R, freqs))))


def tail_sup(kernel: WeightKernel, R, eta, rng, samples=4096) -> float:
    """
    Sampled sup of |phi_R(xi)| over |xi| >= eta: random directions, radii
    spread over [eta, 5 eta] with the boundary sphere always included.
    """
    dirs = rng.standard_normal((samples, kernel.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = eta * (1.0 + 4.0 * rng.random(samples) ** 2)
    radii[: samples // 8] = eta
    axis_hits = eta * np.eye(kernel.dim)
    freqs = np.vstack([dirs * radii[:, None], axis_hits, -axis_hits])
    return float(np.max(np.abs(kernel.phi(R, freqs))))


def weighted_mean_records(mu: Measure, kernel: WeightKernel, scales, x, rtol=QUAD_RTOL) -> list:
    x = mu.ctx.point(x)
    truth = true_atom(mu, x)
    return [
        RunRecord(kernel.method_tag, kernel.param, R, x, scaled_weight_mean(mu, kernel, R, x, rtol), truth)
        for R in scales
    ]
