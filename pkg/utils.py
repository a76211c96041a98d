import math
import os

import numpy as np


class WienerError(Exception):
    """Base class for every error raised by the atom-recovery library."""


class DimensionMismatchError(WienerError, ValueError):
    pass


class UnsupportedContextError(WienerError, ValueError):
    pass


class InvalidComponentError(WienerError, ValueError):
    pass


class OutOfRangeError(WienerError, ValueError):
    pass


class DiagnosticUndefinedError(WienerError, ValueError):
    pass


class MissingCoefficientError(WienerError, KeyError):
    pass


class ConfigError(WienerError, ValueError):
    """
    Raised for malformed or inconsistent scenario configs.

    :param message: human readable reason.
    :param field_path: dotted path of the offending field, e.g. ``measure.atoms.0.weight``.
    """

    def __init__(self, message, field_path=""):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class NumericFailure(WienerError, RuntimeError):
    """A quadrature or series did not reach its tolerance."""


def as_complex(pair) -> complex:
    """Accepts ``[re, im]``, a bare real, or a complex number."""
    if isinstance(pair, complex):
        return pair
    if isinstance(pair, (int, float)):
        return complex(pair, 0.0)
    re, im = pair
    return complex(float(re), float(im))


def complex_pair(value: complex) -> list:
    return [float(value.real), float(value.imag)]


def format_number(value) -> str:
    """
    Deterministic text form for CSV cells: integral floats print without a
    fractional part, everything else uses ``repr`` so a re-run is byte-identical.
    """
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def sinc(u):
    """
    sin(u)/u with the removable singularity handled by a Taylor fallback
    below |u| < 1e-6.
    """
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-6
    safe = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 - u2 / 6.0 + u2 * u2 / 120.0, np.sin(safe) / safe)


def ensure_parent_dir(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent, exist_ok=True)
