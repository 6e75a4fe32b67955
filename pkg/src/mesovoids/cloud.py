"""Void clouds: geometry constraints, validation and seeded random generation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import pdist

from .elastic import LameParams
from .errors import CapacityError, GateError, GeometryError
from .sphere import Void

DEFAULT_GATE_C = 0.2

# relative slack on the separation/clearance checks, so that configurations
# built exactly on the bound survive a decimal round trip
_REL_TOL = 1e-12

# candidates drawn per batch; part of the seeded stream, so changing it changes clouds
_BLOCK = 1024


@dataclass(frozen=True)
class Ball:
    center: tuple[float, float, float]
    radius: float

    def __post_init__(self) -> None:
        c = tuple(float(v) for v in np.asarray(self.center, dtype=float).reshape(3))
        if not float(self.radius) > 0.0:
            raise GeometryError(f"region radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def center_array(self) -> np.ndarray:
        return np.array(self.center)

    def distance_outside(self, x) -> np.ndarray:
        """Signed distance from points to the sphere, positive outside the ball."""
        return np.linalg.norm(np.asarray(x, dtype=float) - self.center_array, axis=-1) - self.radius


@dataclass(frozen=True)
class Cloud:
    """A collection of spherical voids inside an enclosing ball.

    ``d`` is half the minimal admissible centre separation.
    """

    voids: tuple[Void, ...]
    d: float
    region: Ball
    params: LameParams

    def __post_init__(self) -> None:
        object.__setattr__(self, "voids", tuple(self.voids))
        if not float(self.d) > 0.0:
            raise GeometryError(f"separation parameter d must be positive, got {self.d}")
        object.__setattr__(self, "d", float(self.d))

    def __len__(self) -> int:
        return len(self.voids)

    @property
    def centers(self) -> np.ndarray:
        return np.array([v.center for v in self.voids], dtype=float).reshape(-1, 3)

    @property
    def radii(self) -> np.ndarray:
        return np.array([v.radius for v in self.voids], dtype=float)

    def with_radii(self, radii) -> Cloud:
        """Copy of the cloud with new radii (a scalar applies to every void)."""
        radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(self.voids),))
        voids = tuple(Void(v.center, r) for v, r in zip(self.voids, radii))
        return replace(self, voids=voids)

    def translated(self, shift) -> Cloud:
        shift = np.asarray(shift, dtype=float)
        voids = tuple(Void(v.center_array + shift, v.radius) for v in self.voids)
        region = Ball(self.region.center_array + shift, self.region.radius)
        return replace(self, voids=voids, region=region)


@dataclass(frozen=True)
class CloudReport:
    min_separation: float  # inf for fewer than two voids
    min_clearance: float  # dist(void balls, region boundary); inf when empty
    max_eps_ratio: float  # max radius / d
    gate_c: float
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_dict(self) -> dict:
        return {
            "min_separation": self.min_separation,
            "min_clearance": self.min_clearance,
            "max_eps_ratio": self.max_eps_ratio,
            "gate_c": self.gate_c,
            "checks": dict(self.checks),
            "ok": self.ok,
        }


def validate_cloud(cloud: Cloud, gate_c: float = DEFAULT_GATE_C) -> CloudReport:
    """Check the separation, boundary-clearance and smallness constraints.

    Never raises for constraint violations; they are reported in ``checks``.
    """
    centers, radii, d = cloud.centers, cloud.radii, cloud.d
    n = len(radii)
    min_sep = float(pdist(centers).min()) if n >= 2 else float("inf")
    if n:
        dist_to_boundary = -cloud.region.distance_outside(centers) - radii
        min_clear = float(dist_to_boundary.min())
        ratio = float(radii.max() / d)
    else:
        min_clear, ratio = float("inf"), 0.0
    slack = _REL_TOL * max(d, 1.0)
    checks = {
        "separation": min_sep >= 2.0 * d - slack,
        "clearance": min_clear >= 2.0 * d - slack,
        "gate": ratio < gate_c,
    }
    return CloudReport(min_sep, min_clear, ratio, float(gate_c), checks)


def generate_cloud(
    region: Ball,
    n: int,
    d: float,
    eps: float,
    seed: int,
    params: LameParams,
    gate_c: float = DEFAULT_GATE_C,
    max_attempts: int | None = None,
) -> Cloud:
    """Random sequential placement of ``n`` voids of radius ``eps``.

    Centres are drawn uniformly from the part of ``region`` that keeps each
    void at least ``2d`` from the region boundary, and rejected when closer
    than ``2d`` to an accepted centre.  Candidates are drawn in fixed-size
    blocks and considered in draw order.  The result depends only on the
    arguments (``numpy.random.default_rng(seed)`` drives the sampling).

    Raises:
        GateError: if ``eps >= gate_c * d``.
        CapacityError: if placement fails within ``max_attempts`` draws
            (default ``10_000 * n``).
    """
    if n < 0:
        raise GeometryError(f"void count must be non-negative, got {n}")
    if not d > 0.0 or not eps > 0.0:
        raise GeometryError("d and eps must be positive")
    if eps >= gate_c * d:
        raise GateError(f"eps/d = {eps / d:.6g} violates the gate eps < {gate_c} d")
    inner = region.radius - 2.0 * d - eps
    if n > 0 and inner < 0.0:
        raise CapacityError("region too small to hold a void with the required clearance")
    max_attempts = 10_000 * max(n, 1) if max_attempts is None else max_attempts

    rng = np.random.default_rng(seed)
    center = region.center_array
    accepted = np.empty((n, 3))
    count = 0
    attempts = 0
    min_d2 = (2.0 * d) ** 2
    while count < n and attempts < max_attempts:
        size = min(_BLOCK, max_attempts - attempts)
        direction = rng.normal(size=(size, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = inner * rng.random(size) ** (1.0 / 3.0)
        block = center + radius[:, None] * direction
        # candidates already too close to an accepted centre can never be accepted
        if count:
            d2 = np.sum((block[:, None, :] - accepted[None, :count]) ** 2, axis=2)
            alive = np.flatnonzero(d2.min(axis=1) >= min_d2)
        else:
            alive = np.arange(size)
        used = size
        start = count
        for i in alive:
            cand = block[i]
            if count > start and np.min(np.sum((accepted[start:count] - cand) ** 2, axis=1)) < min_d2:
                continue
            accepted[count] = cand
            count += 1
            if count == n:
                used = i + 1
                break
        attempts += used
    if count < n:
        raise CapacityError(f"placed {count} of {n} voids after {attempts} attempts; enlarge the region")
    voids = tuple(Void(c, eps) for c in accepted)
    return Cloud(voids, d, region, params)
