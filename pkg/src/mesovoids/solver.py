"""Background loading and the void-interaction system ``(I + P M) C = -V``.

The background field ``u`` is generated by self-equilibrated point-force
pairs in the unperturbed whole space.  ``V`` stacks the strain vectors of
``u`` at the void centres, ``M`` is block diagonal with the void dipole
matrices and ``P`` holds the 6x6 interaction blocks between distinct voids.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cloud import Cloud
from .elastic import LameParams
from .errors import ConvergenceError, GeometryError, NumericalError
from .kernels import FreeSpaceKernel, GreenKernel, displacement_strain_kernel, gamma
from .sphere import dipole_matrix

log = logging.getLogger(__name__)

# dense solves with a larger 1-norm condition number are rejected
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class PointForcePair:
    """Forces ``+b e`` at ``y0 + gap/2 e`` and ``-b e`` at ``y0 - gap/2 e``.

    The pair has zero net force and zero net moment.
    """

    y0: tuple[float, float, float]
    axis: tuple[float, float, float]
    gap: float
    magnitude: float

    def __post_init__(self) -> None:
        y0 = np.asarray(self.y0, dtype=float).reshape(3)
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        norm = np.linalg.norm(axis)
        if not norm > 0.0 or not np.all(np.isfinite(axis)):
            raise GeometryError("force-pair axis must be a non-zero vector")
        if not float(self.gap) > 0.0:
            raise GeometryError(f"force-pair gap must be positive, got {self.gap}")
        object.__setattr__(self, "y0", tuple(y0.tolist()))
        object.__setattr__(self, "axis", tuple((axis / norm).tolist()))
        object.__setattr__(self, "gap", float(self.gap))
        object.__setattr__(self, "magnitude", float(self.magnitude))

    def sources(self) -> tuple[np.ndarray, np.ndarray]:
        """Application points of the positive and negative forces."""
        y0, e = np.array(self.y0), np.array(self.axis)
        return y0 + 0.5 * self.gap * e, y0 - 0.5 * self.gap * e

    def force(self) -> np.ndarray:
        return self.magnitude * np.array(self.axis)


@dataclass(frozen=True)
class BackgroundField:
    """Displacement of a set of force pairs in the void-free whole space."""

    pairs: tuple[PointForcePair, ...]
    params: LameParams

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def source_points(self) -> np.ndarray:
        pts = [s for pair in self.pairs for s in pair.sources()]
        return np.array(pts, dtype=float).reshape(-1, 3)

    def scaled(self, factor: float) -> BackgroundField:
        pairs = tuple(
            PointForcePair(p.y0, p.axis, p.gap, factor * p.magnitude) for p in self.pairs
        )
        return BackgroundField(pairs, self.params)

    def translated(self, shift) -> BackgroundField:
        shift = np.asarray(shift, dtype=float)
        pairs = tuple(
            PointForcePair(np.array(p.y0) + shift, p.axis, p.gap, p.magnitude) for p in self.pairs
        )
        return BackgroundField(pairs, self.params)


def background_eval(bg: BackgroundField, x) -> np.ndarray:
    """Displacement ``sum [Gamma(x, y+) - Gamma(x, y-)] b e`` at points ``x``.

    Decays like ``|x|**-2`` because the monopoles of each pair cancel.

    Raises:
        SingularityError: if ``x`` coincides with a source point.
    """
    x = np.asarray(x, dtype=float)
    u = np.zeros(x.shape)
    for pair in bg.pairs:
        plus, minus = pair.sources()
        f = pair.force()
        u += (gamma(x, plus, bg.params) - gamma(x, minus, bg.params)) @ f
    return u


def background_strain(bg: BackgroundField, x) -> np.ndarray:
    """Strain vector of the background field at ``x`` from the analytic kernels."""
    x = np.asarray(x, dtype=float)
    e = np.zeros(x.shape[:-1] + (6,))
    for pair in bg.pairs:
        plus, minus = pair.sources()
        f = pair.force()
        k = displacement_strain_kernel(x, plus, bg.params) - displacement_strain_kernel(
            x, minus, bg.params
        )
        e += k @ f
    return e


def check_sources(cloud: Cloud, bg: BackgroundField, clearance: float = 1.0) -> float:
    """Return the distance from the force application points to the cloud region.

    Raises:
        GeometryError: if a source lies closer than ``clearance * region.radius``
            to the region (or inside it).
    """
    pts = bg.source_points()
    if not len(pts):
        return float("inf")
    dist = float(cloud.region.distance_outside(pts).min())
    if dist < clearance * cloud.region.radius:
        raise GeometryError(
            f"force sources are {dist:.6g} from the cloud region; "
            f"need at least {clearance * cloud.region.radius:.6g}"
        )
    return dist


@dataclass(frozen=True)
class InteractionSystem:
    """Assembled block system; immutable once built."""

    centers: np.ndarray  # (N, 3)
    interaction: np.ndarray  # P, (6N, 6N) with zero diagonal blocks
    dipoles: np.ndarray  # (N, 6, 6) blocks of M
    rhs_strain: np.ndarray  # V, (6N,)
    radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    d: float = float("nan")

    @property
    def n_voids(self) -> int:
        return len(self.dipoles)

    def apply_m(self, c: np.ndarray) -> np.ndarray:
        return np.einsum("kab,kb->ka", self.dipoles, c.reshape(-1, 6)).reshape(-1)

    def apply_pm(self, c: np.ndarray) -> np.ndarray:
        return self.interaction @ self.apply_m(c)

    def pm_matrix(self) -> np.ndarray:
        n = self.n_voids
        m = scipy.linalg.block_diag(*self.dipoles) if n else np.zeros((0, 0))
        return self.interaction @ m

    def matrix(self) -> np.ndarray:
        """The dense operator ``I + P M``."""
        return np.eye(6 * self.n_voids) + self.pm_matrix()

    def residual(self, c: np.ndarray) -> np.ndarray:
        return np.asarray(c) + self.apply_pm(np.asarray(c)) + self.rhs_strain


def assemble_system(
    cloud: Cloud,
    bg: BackgroundField,
    kernel: GreenKernel | None = None,
    source_clearance: float = 1.0,
) -> InteractionSystem:
    """Build ``P``, ``M`` and ``V`` for a cloud under a background load.

    ``kernel`` defaults to the whole-space Green's tensor; a bounded-domain
    kernel would be passed here.
    """
    kernel = FreeSpaceKernel(cloud.params) if kernel is None else kernel
    centers = cloud.centers
    n = len(centers)
    check_sources(cloud, bg, source_clearance)

    p = np.zeros((6 * n, 6 * n))
    for j in range(n):
        others = np.r_[0:j, j + 1 : n]
        if not len(others):
            continue
        diff = np.linalg.norm(centers[others] - centers[j], axis=1)
        if np.any(diff == 0.0):
            raise GeometryError(f"void {j} shares its centre with another void")
        blocks = kernel.hessian_kernel(centers[j], centers[others])  # (N-1, 6, 6)
        row = p[6 * j : 6 * j + 6].reshape(6, n, 6)
        row[:, others, :] = np.moveaxis(blocks, 0, 1)
    m = np.array([dipole_matrix(r, cloud.params) for r in cloud.radii]).reshape(n, 6, 6)
    v = background_strain(bg, centers).reshape(-1)
    return InteractionSystem(centers, p, m, v, cloud.radii.copy(), cloud.d)


def solve_coefficients(
    system: InteractionSystem,
    method: str = "dense",
    tol: float = 1e-12,
    max_terms: int = 100,
) -> np.ndarray:
    """Solve ``(I + P M) C = -V``.

    ``dense`` uses LU with partial pivoting on the full matrix and refuses
    systems whose condition number exceeds ``MAX_CONDITION``.  ``neumann``
    sums the series ``C = sum_k (-P M)^k (-V)`` and requires ``||P M||_inf < 1``.

    Raises:
        NumericalError: singular or ill-conditioned dense system.
        ConvergenceError: Neumann series inapplicable or not converged within
            ``max_terms`` terms.
    """
    v = system.rhs_strain
    if system.n_voids == 0:
        return np.zeros(0)
    if method == "dense":
        a = system.matrix()
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            try:
                cond = np.linalg.cond(a, 1)
            except np.linalg.LinAlgError:
                cond = np.inf
        if not cond <= MAX_CONDITION:
            raise NumericalError(f"system matrix is singular or ill-conditioned (cond_1 = {cond:.3g})")
        with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            try:
                c = scipy.linalg.solve(a, -v)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
                raise NumericalError(f"dense solve failed: {exc}") from exc
        if not np.all(np.isfinite(c)):
            raise NumericalError("dense solve produced non-finite coefficients (singular system)")
        return c
    if method == "neumann":
        norm = pm_norm(system)
        if norm >= 1.0:
            raise ConvergenceError(f"Neumann series needs ||PM||_inf < 1, got {norm:.6g}")
        term = -v
        c = term.copy()
        scale = max(np.abs(v).max(), np.finfo(float).tiny)
        for k in range(1, max_terms + 1):
            term = -system.apply_pm(term)
            c += term
            if np.abs(term).max() <= tol * scale:
                log.debug("Neumann series converged after %d terms", k)
                return c
        raise ConvergenceError(f"Neumann series not converged after {max_terms} terms")
    raise ValueError(f"unknown method {method!r}; expected 'dense' or 'neumann'")


def pm_norm(system: InteractionSystem) -> float:
    """``||P M||_inf`` (maximum absolute row sum)."""
    if system.n_voids == 0:
        return 0.0
    return float(np.abs(system.pm_matrix()).sum(axis=1).max())


@dataclass(frozen=True)
class SystemDiagnostics:
    n_voids: int
    pm_norm_inf: float
    eig_min: float  # smallest eigenvalue over the -M blocks
    eig_max: float  # largest eigenvalue over the -M blocks
    eig_min_scaled: float  # eig_min / radius^3 of the same void
    eig_max_scaled: float
    gate_passed: bool  # ||PM||_inf < 1: the system is a contraction perturbation of I
    residual_inf: float | None = None
    relative_residual: float | None = None
    interaction_ratio: float | None = None  # <MC, PMC> / <MC, MC>
    interaction_constant: float | None = None  # |ratio| * d^3
    solution_bound: float | None = None  # sum |C|^2 / sum |V|^2

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def system_diagnostics(system: InteractionSystem, coefficients: np.ndarray | None = None) -> SystemDiagnostics:
    """Runtime checks mirroring the solvability argument.

    With ``coefficients`` given, also reports the solve residual, the
    quadratic-form ratio ``<MC, PMC>/<MC, MC>`` (bounded by ``Const d^-3``) and
    the ratio ``sum |C|^2 / sum |V|^2`` (bounded by a constant for small
    ``eps/d``).
    """
    n = system.n_voids
    if n:
        eigs = np.linalg.eigvalsh(-system.dipoles)  # ascending, (N, 6)
        cubes = system.radii**3 if len(system.radii) == n else np.ones(n)
        emin, emax = float(eigs[:, 0].min()), float(eigs[:, -1].max())
        smin, smax = float((eigs[:, 0] / cubes).min()), float((eigs[:, -1] / cubes).max())
    else:
        emin = emax = smin = smax = float("nan")
    norm = pm_norm(system)
    diag = dict(
        n_voids=n,
        pm_norm_inf=norm,
        eig_min=emin,
        eig_max=emax,
        eig_min_scaled=smin,
        eig_max_scaled=smax,
        gate_passed=bool(norm < 1.0),
    )
    if coefficients is not None and n:
        c = np.asarray(coefficients, dtype=float)
        res = float(np.abs(system.residual(c)).max())
        vmax = float(np.abs(system.rhs_strain).max())
        mc = system.apply_m(c)
        mcmc = float(mc @ mc)
        ratio = float(mc @ (system.interaction @ mc)) / mcmc if mcmc > 0 else 0.0
        vv = float(system.rhs_strain @ system.rhs_strain)
        diag.update(
            residual_inf=res,
            relative_residual=res / vmax if vmax > 0 else res,
            interaction_ratio=ratio,
            interaction_constant=abs(ratio) * system.d**3 if np.isfinite(system.d) else None,
            solution_bound=float(c @ c) / vv if vv > 0 else None,
        )
    return SystemDiagnostics(**diag)
