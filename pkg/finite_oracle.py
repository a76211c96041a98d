"""
On a finite abelian group the dual is itself a Folner set, so the averaged
inversion formula holds exactly: mu({x}) = 1/|G| * sum_gamma gamma(x) mu_hat(gamma).
"""
import logging
from dataclasses import dataclass

import numpy as np

from fourier_modules import finite_dft
from folner_modules import FolnerSequence, folner_average
from group_modules import characters, haar_normalizers
from measure_modules import Measure
from utils import UnsupportedContextError

logger = logging.getLogger(__name__)


def _require_finite(mu: Measure):
    if not mu.ctx.is_finite:
        raise UnsupportedContextError(f"exact recovery needs a finite group, got {mu.ctx.kind.value}")


def exact_wiener(mu: Measure, x, table=None) -> complex:
    """1/|G| * sum over the whole dual of gamma(x) mu_hat(gamma); pass ``table`` to reuse a DFT."""
    _require_finite(mu)
    ctx = mu.ctx
    table = finite_dft(mu) if table is None else table
    _, inverse_const = haar_normalizers(ctx)
    chars = characters(ctx, ctx.all_points(), ctx.point(x))
    return complex(inverse_const * np.sum(chars * table.values.reshape(-1)))


@dataclass(frozen=True)
class CrossCheckReport:
    sizes: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    exact: complex
    final_error: float
    tv_bound: float

    @property
    def within_tv_bound(self) -> bool:
        return bool(np.all(np.abs(self.values) <= self.tv_bound + 1e-12))


def oracle_cross_check(mu: Measure, x) -> CrossCheckReport:
    """
    exact_wiener against averages over growing lexicographic dual blocks
    [0, n)^k; the last block is the whole dual, where the two must agree.
    """
    _require_finite(mu)
    sequence = FolnerSequence.blocks(mu.ctx.moduli)
    indices = range(1, max(mu.ctx.moduli) + 1)
    exact = exact_wiener(mu, x)
    sizes = np.array([sequence(n).count() for n in indices])
    values = np.array([folner_average(mu, sequence(n), x) for n in indices])
    errors = np.abs(values - exact)
    logger.debug("cross check on %s at x=%s: final error %.3g", mu.ctx.dual_name, x, errors[-1])
    return CrossCheckReport(sizes, values, errors, exact, float(errors[-1]), mu.total_variation_bound())

