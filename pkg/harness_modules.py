"""
Config-driven experiment runner: scenario configs, sweeps over indices and
probe points, atom scans over grids and convergence-rate fits.
"""
import csv
import json
import logging
from concurrent import futures
from dataclasses import dataclass
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from fourier_modules import MeasureSpectrum, TabulatedSpectrum, as_spectrum, character_matrix
from folner_modules import FolnerSequence, folner_average, wiener_recover
from group_modules import GroupContext
from measure_modules import CantorComponent, ac_from_spec, make_measure
from run_records import write_records
from torus_br_modules import br_weights, squared_radius_shells, wiener_br_records
from utils import ConfigError, WienerError, as_complex, ensure_parent_dir, format_number
from weighted_mean_modules import (
    BochnerRieszKernel,
    BoxKernel,
    GaussianKernel,
    scaled_weight_mean,
    weighted_mean_records,
)

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 4
EXACT_TOL = 1e-14
PLOT_POINTS = 64


TORUS_METHODS = {"folner_cube", "folner_ball", "folner_box", "folner_ellipsoid", "bochner_riesz_td"}
EUCLIDEAN_METHODS = {"folner_cube", "folner_ball", "folner_box", "folner_ellipsoid",
                     "gaussian", "box_weight", "bochner_riesz_rd"}
FINITE_METHODS = {"finite_blocks"}


def _check_complex(value):
    if isinstance(value, list) and len(value) != 2:
        raise ValueError("complex numbers are written as [re, im]")
    return value


ComplexSpec = Annotated[Union[float, List[float]], AfterValidator(_check_complex)]


class GroupSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["torus", "euclidean", "finite"]
    dim: Optional[int] = Field(default=None, ge=1)
    moduli: Optional[List[int]] = None

    @model_validator(mode="after")
    def _shape(self):
        if self.kind == "finite":
            if not self.moduli or any(m < 2 for m in self.moduli):
                raise ValueError("finite groups need moduli, each >= 2")
        elif self.dim is None:
            raise ValueError(f"{self.kind} groups need a dimension")
        return self

    def to_context(self) -> GroupContext:
        if self.kind == "finite":
            return GroupContext.finite(self.moduli)
        return GroupContext(self.kind, self.dim)


class AtomSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    position: List[float]
    weight: ComplexSpec


class AcSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["gaussian", "box", "lebesgue"]
    params: dict = Field(default_factory=dict)
    coefficient: ComplexSpec = 1.0


class CantorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    coefficient: ComplexSpec = 1.0
    offset: float = 0.0


class MeasureSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    atoms: List[AtomSpec] = Field(default_factory=list)
    ac: List[AcSpec] = Field(default_factory=list)
    cantor: Optional[CantorSpec] = None
    spectrum_file: Optional[str] = None

    @model_validator(mode="after")
    def _exclusive(self):
        if self.spectrum_file and (self.atoms or self.ac or self.cantor):
            raise ValueError("give either measure components or a spectrum_file, not both")
        return self


class MethodSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Literal["folner_cube", "folner_ball", "folner_box", "folner_ellipsoid", "gaussian", "box_weight",
                  "bochner_riesz_rd", "bochner_riesz_td", "finite_blocks"]
    alpha: Optional[float] = None
    delta: Optional[float] = None
    shape: Optional[List[float]] = None

    @model_validator(mode="after")
    def _params(self):
        if self.name == "bochner_riesz_rd" and not (self.alpha is not None and self.alpha > 0):
            raise ValueError("bochner_riesz_rd needs alpha > 0")
        if self.name == "bochner_riesz_td" and not (self.delta is not None and self.delta >= 0):
            raise ValueError("bochner_riesz_td needs delta >= 0")
        if self.shape is not None:
            if self.name not in ("folner_box", "folner_ellipsoid"):
                raise ValueError("shape only applies to folner_box and folner_ellipsoid")
            if any(not s > 0 for s in self.shape):
                raise ValueError("shape entries must be positive")
        return self

    @property
    def param(self):
        if self.name == "bochner_riesz_rd":
            return self.alpha
        if self.name == "bochner_riesz_td":
            return self.delta
        return None


class ScanSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    index: Optional[float] = None
    grid: float = Field(default=0.01, gt=0, le=0.1)
    threshold: float = Field(default=0.1, gt=0)
    box: Optional[List[List[float]]] = None

    @field_validator("box")
    @classmethod
    def _bounds(cls, value):
        if value is not None and any(len(b) != 2 or not b[0] < b[1] for b in value):
            raise ValueError("scan box is a list of [lo, hi] pairs with lo < hi")
        return value


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    group: GroupSpec
    measure: MeasureSpec
    method: MethodSpec
    sweep: List[float]
    points: List[List[float]] = Field(default_factory=list)
    random_points: int = Field(default=0, ge=0)
    seed: int = 0
    tolerance: Optional[float] = None
    scan: Optional[ScanSpec] = None

    @field_validator("sweep")
    @classmethod
    def _sweep(cls, value):
        if not value:
            raise ValueError("sweep must be nonempty")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("sweep must be strictly increasing")
        if value[0] <= 0:
            raise ValueError("sweep indices must be positive")
        return value

    @model_validator(mode="after")
    def _compatible(self):
        kind, name = self.group.kind, self.method.name
        allowed = {"torus": TORUS_METHODS, "euclidean": EUCLIDEAN_METHODS, "finite": FINITE_METHODS}[kind]
        if name not in allowed:
            raise ValueError(f"method {name} is not available on a {kind} group")
        if kind in ("torus", "finite") and any(float(n) != int(n) for n in self.sweep):
            raise ValueError(f"{name} on a {kind} group needs integer indices")
        if self.measure.spectrum_file and kind != "torus":
            raise ValueError("tabulated spectra are only accepted on the torus")
        if not self.points and not self.random_points:
            raise ValueError("give probe points or random_points")
        dim = len(self.group.moduli) if kind == "finite" else self.group.dim
        if self.method.shape is not None and len(self.method.shape) != dim:
            raise ValueError(f"method shape needs {dim} entries")
        if any(len(p) != dim for p in self.points):
            raise ValueError(f"every probe point needs {dim} coordinates")
        return self


def _field_path(error) -> str:
    return ".".join(str(part) for part in error["loc"])


def parse_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], _field_path(first)) from None


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config: {e}", str(path)) from None
    return parse_config(data)


def build_source(config: ScenarioConfig):
    """The Measure (or, on the torus, tabulated spectrum) a scenario describes."""
    ctx = config.group.to_context()
    spec = config.measure
    if spec.spectrum_file:
        try:
            return TabulatedSpectrum.from_csv(spec.spectrum_file, ctx)
        except (OSError, WienerError) as e:
            raise ConfigError(f"cannot read spectrum file: {e}", "measure.spectrum_file") from None
    for i, a in enumerate(spec.atoms):
        if len(a.position) != ctx.dim:
            raise ConfigError(f"position needs {ctx.dim} coordinates", f"measure.atoms.{i}.position")
    atoms = [(a.position, as_complex(a.weight)) for a in spec.atoms]
    ac = []
    for i, comp in enumerate(spec.ac):
        try:
            ac.append(ac_from_spec(comp.kind, comp.params, comp.coefficient))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad parameters: {e}", f"measure.ac.{i}.params") from None
    cantor = None
    if spec.cantor is not None:
        cantor = CantorComponent(as_complex(spec.cantor.coefficient), spec.cantor.offset)
    try:
        return make_measure(ctx, atoms, ac, cantor)
    except WienerError as e:
        raise ConfigError(str(e), "measure") from None


def probe_points(config: ScenarioConfig, ctx: GroupContext) -> list:
    points = [ctx.point(p) for p in config.points]
    if config.random_points:
        rng = np.random.default_rng(config.seed)
        n, d = config.random_points, ctx.dim
        if ctx.is_torus:
            extra = rng.random((n, d))
        elif ctx.is_finite:
            extra = np.stack([rng.integers(0, m, n) for m in ctx.moduli], axis=1)
        else:
            extra = rng.uniform(-1.0, 1.0, (n, d))
        points.extend(ctx.point(p) for p in extra)
    return points


def _kernel_for(method: MethodSpec, dim: int):
    if method.name == "gaussian":
        return GaussianKernel(dim)
    if method.name == "box_weight":
        return BoxKernel(dim)
    return BochnerRieszKernel(dim, method.alpha)


def _sequence_for(method: MethodSpec, ctx: GroupContext) -> FolnerSequence:
    lattice = ctx.is_torus
    shape = method.shape or [1.0] * ctx.dim
    if method.name == "folner_cube":
        return FolnerSequence.cubes(ctx.dim, lattice)
    if method.name == "folner_ball":
        return FolnerSequence.balls(ctx.dim, lattice)
    if method.name == "folner_box":
        return FolnerSequence.boxes(shape, lattice)
    if method.name == "folner_ellipsoid":
        return FolnerSequence.ellipsoids(shape, lattice)
    return FolnerSequence.blocks(ctx.moduli)


def records_at_point(source, method: MethodSpec, sweep, x) -> list:
    spectrum = as_spectrum(source)
    ctx = spectrum.ctx
    if method.name == "bochner_riesz_td":
        return wiener_br_records(spectrum, [int(n) for n in sweep], method.delta, x)
    if method.name in ("gaussian", "box_weight", "bochner_riesz_rd"):
        return weighted_mean_records(spectrum.measure, _kernel_for(method, ctx.dim), sweep, x)
    indices = [int(n) for n in sweep] if not ctx.is_euclidean else list(sweep)
    return wiener_recover(spectrum, _sequence_for(method, ctx), x, indices)


def dense_sweep(sweep, integral: bool, count=PLOT_POINTS) -> list:
    """Geometric grid between the first and last sweep index, for plot data."""
    grid = np.geomspace(sweep[0], sweep[-1], count)
    if integral:
        return sorted(set(int(round(n)) for n in grid))
    return [float(n) for n in grid]


def run_scenario(config: ScenarioConfig, out=None, workers=DEFAULT_WORKERS, plot_data=False) -> list:
    """
    One record per (point, index), points in config order. Points are
    evaluated on a thread pool; the CSV is written once all are done.
    """
    source = build_source(config)
    ctx = as_spectrum(source).ctx
    points = probe_points(config, ctx)
    sweep = dense_sweep(config.sweep, not ctx.is_euclidean) if plot_data else list(config.sweep)
    logger.info("scenario %s: %s on %s, %d points x %d indices",
                config.name, config.method.name, ctx.dual_name, len(points), len(sweep))

    def evaluate(x):
        return records_at_point(source, config.method, sweep, x)

    with futures.ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        per_point = list(executor.map(evaluate, points))
    records = [r for block in per_point for r in block]
    if config.tolerance is not None:
        worst = max((r.abs_error for r in records if r.index == sweep[-1] and r.has_truth), default=0.0)
        if worst > config.tolerance:
            logger.warning("scenario %s: final-index error %.3g exceeds tolerance %.3g",
                           config.name, worst, config.tolerance)
    if out is not None:
        write_records(records, out, ctx.dim)
    logger.info("scenario %s finished: %d records", config.name, len(records))
    return records


@dataclass(frozen=True)
class Detection:
    location: tuple
    weight: complex

    @property
    def magnitude(self) -> float:
        return abs(self.weight)


def _scan_grid(ctx: GroupContext, h, box):
    if ctx.is_finite:
        return ctx.all_points(), tuple(ctx.moduli)
    if ctx.is_torus:
        axes = [np.arange(int(round(1.0 / h))) * h for _ in range(ctx.dim)]
    else:
        if box is None or len(box) != ctx.dim:
            raise ConfigError(f"Euclidean scans need {ctx.dim} [lo, hi] bounds", "scan.box")
        axes = [np.arange(lo, hi + 0.5 * h, h) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1), tuple(len(a) for a in axes)


def _lattice_scan_values(spectrum, frequencies, weights, grid):
    coefficients = weights * spectrum.evaluate(frequencies)
    total = float(np.sum(weights))
    values = np.empty(len(grid), dtype=complex)
    rows = max(1, (1 << 22) // max(1, len(frequencies)))
    for start in range(0, len(grid), rows):
        block = grid[start:start + rows]
        values[start:start + rows] = character_matrix(spectrum.ctx, block, frequencies) @ coefficients / total
    return values


def scan_values(source, method: MethodSpec, index, grid) -> np.ndarray:
    """The chosen average at every grid point."""
    spectrum = as_spectrum(source)
    ctx = spectrum.ctx
    if ctx.is_torus and method.name == "bochner_riesz_td":
        shells = squared_radius_shells(int(index), ctx.dim)
        return _lattice_scan_values(spectrum, shells.points, br_weights(int(index), method.delta, shells.squared), grid)
    if not ctx.is_euclidean:
        pts = _sequence_for(method, ctx)(int(index)).lattice_points()
        return _lattice_scan_values(spectrum, pts, np.ones(len(pts)), grid)
    if not isinstance(spectrum, MeasureSpectrum):
        raise ConfigError("Euclidean scans need a measure", "measure")
    mu = spectrum.measure
    if method.name in ("gaussian", "box_weight", "bochner_riesz_rd"):
        kernel = _kernel_for(method, ctx.dim)
        return np.array([scaled_weight_mean(mu, kernel, index, x) for x in grid])
    folner_set = _sequence_for(method, ctx)(index)
    return np.array([folner_average(mu, folner_set, x) for x in grid])


def _local_maxima(mags, shape, periodic):
    field = mags.reshape(shape)
    keep = np.ones(field.shape, dtype=bool)
    padded = field if periodic else np.pad(field, 1, constant_values=-np.inf)
    for offset in np.ndindex(*([3] * len(shape))):
        shift = tuple(o - 1 for o in offset)
        if not any(shift):
            continue
        if periodic:
            neighbor = np.roll(field, shift, axis=tuple(range(len(shape))))
        else:
            sl = tuple(slice(1 - s, padded.shape[i] - 1 - s) for i, s in enumerate(shift))
            neighbor = padded[sl]
        keep &= field >= neighbor
    return keep.ravel()


def main_lobe_radius(ctx, method: MethodSpec, index) -> float:
    """
    Max-norm radius 1/index (1/(index * min shape) for shaped sets) that holds
    the main lobe and first side lobe of the averaging kernel. Zero on finite groups.
    """
    if ctx.is_finite:
        return 0.0
    scale = float(index) * (min(method.shape) if method.shape else 1.0)
    return 1.0 / scale


def atom_scan(source, method: MethodSpec, index, h, tau, box=None) -> list:
    """
    Local maxima of |average| above tau on a grid of step h. Hits within one
    grid step or within main_lobe_radius of a stronger hit are merged, keeping
    the larger |value| (ties: the lexicographically smaller location). Side
    lobes further out than that radius are reported when they exceed tau.
    """
    spectrum = as_spectrum(source)
    ctx = spectrum.ctx
    if not tau > 0:
        raise ConfigError("threshold must be positive", "scan.threshold")
    if not ctx.is_finite:
        if not 0 < h <= 0.1:
            raise ConfigError("grid step must lie in (0, 0.1]", "scan.grid")
        if ctx.is_torus and h > 1.0 / (2.0 * index) + 1e-15:
            raise ConfigError(f"grid step {h} misses the main lobe at index {index}; need h <= {1.0 / (2 * index):g}",
                              "scan.grid")
    merge = max(1.0 if ctx.is_finite else h, main_lobe_radius(ctx, method, index))
    grid, shape = _scan_grid(ctx, h, box)
    values = scan_values(spectrum, method, index, grid)
    mags = np.abs(values)
    peaks = _local_maxima(mags, shape, periodic=not ctx.is_euclidean) & (mags > tau)

    candidates = sorted(np.flatnonzero(peaks), key=lambda i: (-mags[i], tuple(grid[i])))
    accepted = []
    for i in candidates:
        if all(ctx.distance(grid[i], grid[j]) > merge * (1.0 + 1e-9) for j in accepted):
            accepted.append(i)
    detections = [Detection(tuple(float(c) for c in grid[i]), complex(values[i])) for i in accepted]
    logger.info("scan at index %g: %d detections above %g", index, len(detections), tau)
    return detections


def write_detections(detections, path, dim: int):
    ensure_parent_dir(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"x_{j + 1}" for j in range(dim)] + ["weight_re", "weight_im", "abs_weight"])
        for det in detections:
            w.writerow([format_number(c) for c in det.location]
                       + [format_number(det.weight.real), format_number(det.weight.imag),
                          format_number(det.magnitude)])


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    exact: bool = False


def rate_fit(records) -> RateFit:
    """Least-squares slope of log(abs_error) against log(index) for one probe point."""
    records = list(records)
    errors = np.array([r.abs_error for r in records], dtype=float)
    if records and np.all(errors <= EXACT_TOL):
        return RateFit(float("nan"), float("nan"), 0.0, exact=True)
    positive = [(r.index, r.abs_error) for r in records if r.abs_error > 0]
    if len(positive) < 4:
        raise ValueError(f"rate fit needs at least 4 records with positive error, got {len(positive)}")
    logn = np.log([n for n, _ in positive])
    loge = np.log([e for _, e in positive])
    slope, intercept = np.polyfit(logn, loge, 1)
    residual = float(np.sqrt(np.mean((loge - (slope * logn + intercept)) ** 2)))
    return RateFit(float(slope), float(intercept), residual)


def rate_fits_by_point(records) -> dict:
    groups = {}
    for r in records:
        groups.setdefault(r.point, []).append(r)
    fits = {}
    for point, group in groups.items():
        try:
            fits[point] = rate_fit(group)
        except ValueError as e:
            logger.debug("no rate fit at %s: %s", point, e)
    return fits
