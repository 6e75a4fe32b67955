"""Evaluation of the approximate displacement field of a perforated medium.

Two representations are available once the coefficients ``C`` are known:

* ``uniform``: ``u(x) + sum_k Q_k(x) C_k`` with the closed-form sphere
  dipole fields, valid everywhere outside the voids;
* ``far``: ``u(x) + sum_k K(x, O_k) M_k C_k``, which keeps only the leading
  dipole term and is meant for points well away from the cloud.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cloud import Cloud
from .errors import GeometryError
from .kernels import FreeSpaceKernel, GreenKernel
from .solver import BackgroundField, background_eval
from .sphere import dipole_field, dipole_field_unchecked, dipole_matrix

NEAR_SOURCE_FACTOR = 1e-3
CHUNK = 4096


class FarFieldWarning(UserWarning):
    """The far-field formula was evaluated too close to the cloud."""


class Status(Enum):
    EXTERIOR = "exterior"
    INSIDE_VOID = "inside_void"
    NEAR_SOURCE = "near_source"


@dataclass(frozen=True)
class FieldSample:
    point: tuple[float, float, float]
    u: tuple[float, float, float] | None
    status: Status
    void_index: int | None = None  # zero-based, set for INSIDE_VOID

    @property
    def status_code(self) -> int:
        """CSV status: 0 exterior, k > 0 inside void k (one-based), -1 near a source."""
        if self.status is Status.EXTERIOR:
            return 0
        if self.status is Status.NEAR_SOURCE:
            return -1
        return self.void_index + 1


@dataclass(frozen=True)
class EvaluationGrid:
    """Explicit point list, or a lattice built with :meth:`lattice`."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "points", pts)

    @classmethod
    def lattice(cls, origin, spacing, counts) -> EvaluationGrid:
        """Axis-aligned lattice; points ordered with z varying fastest, then y, then x."""
        origin = np.asarray(origin, dtype=float).reshape(3)
        spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (3,))
        counts = np.broadcast_to(np.asarray(counts, dtype=int), (3,))
        if np.any(spacing <= 0.0):
            raise GeometryError("lattice spacing must be positive")
        if np.any(counts < 1):
            raise GeometryError("lattice counts must be at least 1")
        axes = [origin[i] + spacing[i] * np.arange(counts[i]) for i in range(3)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(np.stack([m.ravel() for m in mesh], axis=1))

    def __len__(self) -> int:
        return len(self.points)


def _check_coefficients(cloud: Cloud, coefficients) -> np.ndarray:
    c = np.asarray(coefficients, dtype=float).reshape(-1)
    if c.size != 6 * len(cloud):
        raise GeometryError(f"expected {6 * len(cloud)} coefficients, got {c.size}")
    return c.reshape(-1, 6)


def far_field(
    x,
    cloud: Cloud,
    bg: BackgroundField,
    coefficients,
    kernel: GreenKernel | None = None,
    min_distance: float | None = None,
) -> np.ndarray:
    """Far-field approximation ``u(x) + sum_k K(x, O_k) M_k C_k``.

    Emits :class:`FarFieldWarning` when a point is within ``min_distance``
    (default: the region radius) of the cloud region; the value is still
    returned.
    """
    x = np.asarray(x, dtype=float)
    c = _check_coefficients(cloud, coefficients)
    if np.any(too_close_for_far_field(x, cloud, min_distance)):
        warnings.warn("far-field formula used near the cloud region", FarFieldWarning, stacklevel=2)
    return _far_sum(x, cloud, bg, c, kernel)


def too_close_for_far_field(x, cloud: Cloud, min_distance: float | None = None) -> np.ndarray:
    limit = cloud.region.radius if min_distance is None else min_distance
    return cloud.region.distance_outside(x) <= limit


def _far_sum(x, cloud, bg, c, kernel):
    kernel = FreeSpaceKernel(cloud.params) if kernel is None else kernel
    u = background_eval(bg, x)
    for v, ck in zip(cloud.voids, c):
        mc = dipole_matrix(v.radius, cloud.params) @ ck
        u = u + kernel.dipole_kernel(x, v.center_array) @ mc
    return u


def uniform_field(
    x,
    cloud: Cloud,
    bg: BackgroundField,
    coefficients,
    kernel: GreenKernel | None = None,
    check: bool = True,
) -> np.ndarray:
    """Uniform approximation ``u(x) + sum_k Q_k(x) C_k``.

    The regular-part correction of a bounded domain is taken from
    ``kernel.regular_dipole_kernel``; it vanishes in the whole space.
    ``check=False`` skips the exterior test so that difference stencils may
    cross a void surface (the closed forms extend smoothly inside).

    Raises:
        GeometryError: if a point lies inside or on a void.
    """
    x = np.asarray(x, dtype=float)
    c = _check_coefficients(cloud, coefficients)
    kernel = FreeSpaceKernel(cloud.params) if kernel is None else kernel
    u = background_eval(bg, x)
    for v, ck in zip(cloud.voids, c):
        q = dipole_field(x, v, cloud.params) if check else dipole_field_unchecked(x, v, cloud.params)
        q = q - kernel.regular_dipole_kernel(x, v.center_array) @ dipole_matrix(v.radius, cloud.params)
        u = u + q @ ck
    return u


def classify_points(points: np.ndarray, cloud: Cloud, bg: BackgroundField):
    """Status and void index (or -1) for each point; inside-void wins over near-source."""
    n = len(points)
    status = np.zeros(n, dtype=int)  # 0 exterior, 1 inside void, 2 near source
    index = np.full(n, -1)
    for pair in bg.pairs:
        guard = NEAR_SOURCE_FACTOR * pair.gap
        for s in pair.sources():
            near = np.linalg.norm(points - s, axis=1) <= guard
            status[near] = 2
    for k in range(len(cloud) - 1, -1, -1):
        v = cloud.voids[k]
        inside = np.linalg.norm(points - v.center_array, axis=1) <= v.radius
        status[inside] = 1
        index[inside] = k
    return status, index


def _evaluate_chunk(points, mask, kind, cloud, bg, c, kernel):
    out = np.full(points.shape, np.nan)
    if np.any(mask):
        if kind == "uniform":
            out[mask] = uniform_field(points[mask], cloud, bg, c, kernel)
        else:
            out[mask] = _far_sum(points[mask], cloud, bg, c, kernel)
    return out


def evaluate_arrays(
    grid: EvaluationGrid,
    cloud: Cloud,
    bg: BackgroundField,
    coefficients,
    kind: str = "uniform",
    workers: int = 1,
    kernel: GreenKernel | None = None,
):
    """Array form of :func:`evaluate_grid`: ``(u, status_code)``; ``u`` is NaN where masked.

    Points are processed in fixed-size chunks whether or not threads are
    used, so serial and parallel runs produce identical bits.
    """
    if kind not in ("uniform", "far"):
        raise ValueError(f"unknown field kind {kind!r}; expected 'uniform' or 'far'")
    c = _check_coefficients(cloud, coefficients)
    pts = grid.points
    status, index = classify_points(pts, cloud, bg)
    mask = status == 0
    starts = range(0, len(pts), CHUNK)
    jobs = [(pts[s : s + CHUNK], mask[s : s + CHUNK]) for s in starts]

    def run(job):
        return _evaluate_chunk(job[0], job[1], kind, cloud, bg, c, kernel)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    u = np.concatenate(results) if results else np.zeros((0, 3))
    if kind == "far" and np.any(too_close_for_far_field(pts[mask], cloud)):
        warnings.warn("far-field formula used near the cloud region", FarFieldWarning, stacklevel=2)
    codes = np.where(status == 0, 0, np.where(status == 1, index + 1, -1))
    return u, codes


def evaluate_grid(
    grid: EvaluationGrid,
    cloud: Cloud,
    bg: BackgroundField,
    coefficients,
    kind: str = "uniform",
    workers: int = 1,
    kernel: GreenKernel | None = None,
) -> list[FieldSample]:
    """Evaluate the chosen approximation at every grid point, in grid order.

    Points inside a void or within ``1e-3 * gap`` of a point force are
    reported with their status and no displacement.
    """
    u, codes = evaluate_arrays(grid, cloud, bg, coefficients, kind, workers, kernel)
    samples = []
    for pt, uu, code in zip(grid.points, u, codes):
        point = tuple(pt.tolist())
        if code == 0:
            samples.append(FieldSample(point, tuple(uu.tolist()), Status.EXTERIOR))
        elif code > 0:
            samples.append(FieldSample(point, None, Status.INSIDE_VOID, int(code) - 1))
        else:
            samples.append(FieldSample(point, None, Status.NEAR_SOURCE))
    return samples
