"""Independent numerical oracles for the closed-form machinery.

Finite differences, sphere and ball quadrature, the mean-value identities
for solutions of the homogeneous Lamé system, and convergence studies of
the boundary traction left over by the uniform approximation.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .cloud import Ball, Cloud, generate_cloud, validate_cloud
from .elastic import (
    LameParams,
    big_xi,
    lame_operator_coefficients,
    small_xi,
    stiffness_matrix,
    strain_vector,
    traction,
)
from .field import uniform_field
from .kernels import gamma, gamma_dipole_kernel, gamma_hessian_kernel
from .solver import (
    BackgroundField,
    PointForcePair,
    assemble_system,
    background_eval,
    background_strain,
    solve_coefficients,
    system_diagnostics,
)
from .sphere import Void, check_orthogonality, dipole_matrix

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CheckReport:
    name: str
    measured: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)

    @classmethod
    def below(cls, name: str, measured: float, threshold: float, **details) -> CheckReport:
        measured = float(measured)
        return cls(name, measured, float(threshold), bool(measured < threshold), details)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "threshold": self.threshold,
            "passed": self.passed,
            "details": self.details,
        }


@dataclass(frozen=True)
class SlopeFit:
    log_x: np.ndarray
    log_y: np.ndarray
    slope: float
    intercept: float
    residual: float  # root-mean-square misfit of the straight line

    def to_dict(self) -> dict:
        return {
            "log_x": self.log_x.tolist(),
            "log_y": self.log_y.tolist(),
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }


def fit_slope(x, y, min_points: int = 4) -> SlopeFit:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < min_points:
        raise ValueError(f"slope fit needs at least {min_points} points, got {len(x)}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("slope fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return SlopeFit(lx, ly, float(slope), float(intercept), rms)


# -- quadrature ---------------------------------------------------------------


def sphere_rule(n_theta: int = 16, n_phi: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on the unit sphere: Gauss-Legendre in cos(theta), trapezoid in phi.

    Returns unit vectors ``(n_theta * n_phi, 3)`` and weights summing to 4 pi.
    """
    t, wt = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - t**2)
    nodes = np.stack(
        [
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(t, n_phi),
        ],
        axis=1,
    )
    weights = np.repeat(wt, n_phi) * (2.0 * np.pi / n_phi)
    return nodes, weights


def ball_rule(
    radius: float, n_r: int = 12, n_theta: int = 16, n_phi: int = 32
) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre in r times :func:`sphere_rule`; points relative to the centre."""
    t, wt = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (t + 1.0)
    wr = 0.5 * radius * wt * r**2
    nodes, ws = sphere_rule(n_theta, n_phi)
    pts = (r[:, None, None] * nodes[None]).reshape(-1, 3)
    return pts, np.outer(wr, ws).ravel()


# -- finite differences -------------------------------------------------------


def fd_gradient(field_fn: Field, x, h: float) -> np.ndarray:
    """Central-difference gradient, with the derivative index appended last.

    ``field_fn`` must accept points with arbitrary leading axes.  For values
    of shape ``batch + S`` the result has shape ``batch + S + (3,)``.
    """
    x = np.asarray(x, dtype=float)
    steps = h * np.eye(3).reshape((3,) + (1,) * (x.ndim - 1) + (3,))
    vals = field_fn(np.concatenate([x[None] + steps, x[None] - steps]))
    return np.moveaxis((vals[:3] - vals[3:]) / (2.0 * h), 0, -1)


def fd_gradient_richardson(field_fn: Field, x, h: float) -> np.ndarray:
    """Richardson-extrapolated central difference, fourth-order accurate."""
    coarse = fd_gradient(field_fn, x, h)
    fine = fd_gradient(field_fn, x, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def fd_hessian(field_fn: Field, x, h: float) -> np.ndarray:
    """Second-order central differences; two derivative indices appended last."""
    x = np.asarray(x, dtype=float)
    e = np.eye(3)
    offsets = [np.zeros(3)]
    for k in range(3):
        offsets += [h * e[k], -h * e[k]]
    pairs = [(k, l) for k in range(3) for l in range(k + 1, 3)]
    for k, l in pairs:
        offsets += [h * (e[k] + e[l]), h * (e[k] - e[l]), h * (-e[k] + e[l]), -h * (e[k] + e[l])]
    offsets = np.array(offsets).reshape((-1,) + (1,) * (x.ndim - 1) + (3,))
    vals = field_fn(x[None] + offsets)
    f0 = vals[0]
    out = np.zeros(f0.shape + (3, 3))
    for k in range(3):
        out[..., k, k] = (vals[1 + 2 * k] - 2.0 * f0 + vals[2 + 2 * k]) / h**2
    for n, (k, l) in enumerate(pairs):
        pp, pm, mp, mm = vals[7 + 4 * n : 11 + 4 * n]
        out[..., k, l] = out[..., l, k] = (pp - pm - mp + mm) / (4.0 * h**2)
    return out


def lame_residual(field_fn: Field, x, p: LameParams, h: float) -> np.ndarray:
    """``L(grad) w`` at ``x`` by finite differences of ``w``.

    Values of ``field_fn`` must carry the displacement component on the first
    axis after the batch axes of ``x`` (so a 3x6 matrix field is allowed).
    """
    x = np.asarray(x, dtype=float)
    nb = x.ndim - 1
    hess = np.moveaxis(fd_hessian(field_fn, x, h), nb, -3)  # batch + extra + (j, k, l)
    res = np.einsum("ijkl,...jkl->...i", lame_operator_coefficients(p), hess)
    return np.moveaxis(res, -1, nb)


# -- operator identities ------------------------------------------------------


def operator_identity_errors() -> tuple[float, float]:
    """Apply Xi(grad).T to Xi(x) and xi(x) exactly; return the max deviations from I and 0.

    The entries are affine in ``x``, so ``Xi(grad).T F(x) = sum_k Xi(e_k).T dF/dx_k``
    with ``dF/dx_k = F(e_k) - F(0)``.
    """
    zero = np.zeros(3)
    basis = np.eye(3)
    total_big = sum(big_xi(e).T @ (big_xi(e) - big_xi(zero)) for e in basis)
    total_small = sum(big_xi(e).T @ (small_xi(e) - small_xi(zero)) for e in basis)
    return float(np.abs(total_big - np.eye(6)).max()), float(np.abs(total_small).max())


# -- kernel consistency -------------------------------------------------------


def numeric_dipole_kernel(x, z, p: LameParams, h: float) -> np.ndarray:
    """Dipole kernel from Richardson differences of Gamma in the source slot.

    ``x`` may carry leading batch axes; ``z`` is a single point.
    """
    x = np.asarray(x, dtype=float)
    zb = np.broadcast_to(np.asarray(z, dtype=float), x.shape)
    g = fd_gradient_richardson(lambda s: gamma(s, x, p), zb, h)  # [..., j, i, k]
    return strain_vector(np.swapaxes(g, -3, -2))


def dipole_kernel_fd_error(x, z, p: LameParams, rel_step: float = 1e-3) -> float:
    """Relative max-norm error of the dipole kernel against Richardson FD of Gamma."""
    h = rel_step * float(np.linalg.norm(np.subtract(x, z)))
    k = gamma_dipole_kernel(x, z, p)
    return float(np.abs(k - numeric_dipole_kernel(x, z, p, h)).max() / np.abs(k).max())


def hessian_kernel_fd_error(x, y, p: LameParams, rel_step: float = 1e-3) -> float:
    """Relative max-norm error of the interaction kernel against nested Richardson FD.

    Both derivatives are numerical differences of Gamma itself: the inner one
    in the source slot, the outer one in the field slot.
    """
    x = np.asarray(x, dtype=float)
    h = rel_step * float(np.linalg.norm(x - np.asarray(y, dtype=float)))
    gd = fd_gradient_richardson(lambda q: numeric_dipole_kernel(q, y, p, h), x, h)  # [m, b, l]
    p_fd = strain_vector(np.swapaxes(gd, 0, 1)).T
    k = gamma_hessian_kernel(x, y, p)
    return float(np.abs(k - p_fd).max() / np.abs(k).max())


# -- mean-value identities and local regularity --------------------------------


def mean_value_check(
    field_fn: Field,
    center,
    radius: float,
    p: LameParams,
    tol: float = 1e-7,
    n_theta: int = 16,
    n_phi: int = 32,
    n_r: int = 12,
) -> CheckReport:
    """Compare ``w(center)`` with the surface and volume mean-value formulas.

    For a solution of the homogeneous Lamé system in the closed ball,

        w_i(O) = 15(lam+mu)/(8 pi R^4 (lam+4mu)) int_S x_i x_j w_j
                 - 3(lam-mu)/(8 pi R^2 (lam+4mu)) int_S w_i
               = 75(lam+mu)/(8 pi R^5 (lam+4mu)) int_B x_i x_j w_j
                 - 15(lam-mu)/(8 pi R^5 (lam+4mu)) int_B |x|^2 w_i

    with ``x`` measured from the centre.  The reported value is the larger of
    the two deviations, relative to the largest ``|w|`` seen at the nodes.
    """
    center = np.asarray(center, dtype=float)
    lam, mu = p.lam, p.mu
    denom = 8.0 * np.pi * (lam + 4.0 * mu)
    w0 = field_fn(center)

    nodes, ws = sphere_rule(n_theta, n_phi)
    xs = radius * nodes
    w = field_fn(center + xs)
    ws = ws * radius**2
    proj = np.einsum("qi,qj,qj->qi", xs, xs, w)
    surface = 15.0 * (lam + mu) / (radius**4 * denom) * (ws @ proj) - 3.0 * (
        lam - mu
    ) / (radius**2 * denom) * (ws @ w)

    xb, wb = ball_rule(radius, n_r, n_theta, n_phi)
    wball = field_fn(center + xb)
    projb = np.einsum("qi,qj,qj->qi", xb, xb, wball)
    r2 = np.sum(xb**2, axis=1)
    volume = 75.0 * (lam + mu) / (radius**5 * denom) * (wb @ projb) - 15.0 * (
        lam - mu
    ) / (radius**5 * denom) * (wb @ (r2[:, None] * wball))

    scale = max(np.abs(w).max(), np.abs(wball).max(), np.abs(w0).max(), np.finfo(float).tiny)
    dev_s = float(np.abs(surface - w0).max() / scale)
    dev_v = float(np.abs(volume - w0).max() / scale)
    return CheckReport.below(
        "mean_value", max(dev_s, dev_v), tol, surface=dev_s, volume=dev_v, radius=float(radius)
    )


def local_regularity_probe(
    field_fn: Field,
    center,
    radius: float,
    bound: float = 10.0,
    n_theta: int = 16,
    n_phi: int = 32,
    n_r: int = 12,
) -> CheckReport:
    """Ratio ``max |dw_i/dx_k (O)| * R / sup_B |w|``, which must stay bounded in R.

    The supremum is sampled on the ball and surface quadrature nodes; the
    gradient comes from central differences with step ``1e-5 R``.
    """
    center = np.asarray(center, dtype=float)
    grad = fd_gradient(field_fn, center, 1e-5 * radius)
    xb, _ = ball_rule(radius, n_r, n_theta, n_phi)
    nodes, _ = sphere_rule(n_theta, n_phi)
    pts = np.concatenate([xb, radius * nodes, np.zeros((1, 3))])
    sup = np.linalg.norm(field_fn(center + pts), axis=-1).max()
    ratio = float(np.abs(grad).max() * radius / sup) if sup > 0 else 0.0
    return CheckReport.below("local_regularity", ratio, bound, radius=float(radius))


# -- boundary residual of the uniform approximation ----------------------------


def boundary_traction_residual(
    cloud: Cloud,
    bg: BackgroundField,
    coefficients,
    n_theta: int = 16,
    n_phi: int = 32,
    rel_step: float = 1e-4,
) -> np.ndarray:
    """Per-void sup of ``|T_n u_approx|`` over surface nodes of each cavity.

    The exact field is traction free on every void, so this measures the
    boundary discrepancy of the uniform approximation.  Gradients are central
    differences of the assembled field with step ``rel_step * radius``.
    """
    nodes, _ = sphere_rule(n_theta, n_phi)
    out = np.zeros(len(cloud))
    for j, v in enumerate(cloud.voids):
        pts = v.center_array + v.radius * nodes
        g = fd_gradient(
            lambda y: uniform_field(y, cloud, bg, coefficients, check=False),
            pts,
            rel_step * v.radius,
        )
        t = traction(g, nodes, cloud.params)
        out[j] = np.linalg.norm(t, axis=-1).max()
    return out


def background_traction(cloud: Cloud, bg: BackgroundField, n_theta: int = 16, n_phi: int = 32) -> np.ndarray:
    """Per-void sup of the traction the background alone puts on each cavity surface."""
    nodes, _ = sphere_rule(n_theta, n_phi)
    out = np.zeros(len(cloud))
    for j, v in enumerate(cloud.voids):
        e = background_strain(bg, v.center_array + v.radius * nodes)
        t = np.einsum("qia,ab,qb->qi", big_xi(nodes), stiffness_matrix(cloud.params), e)
        out[j] = np.linalg.norm(t, axis=-1).max()
    return out


@dataclass(frozen=True)
class ConvergenceStudy:
    eps: np.ndarray
    residual: np.ndarray
    notes: list[str]
    fit: SlopeFit | None

    def to_dict(self) -> dict:
        return {
            "eps": self.eps.tolist(),
            "residual": self.residual.tolist(),
            "notes": list(self.notes),
            "fit": None if self.fit is None else self.fit.to_dict(),
        }


def residual_convergence_study(
    base_cloud: Cloud,
    bg: BackgroundField,
    eps_list,
    gate_c: float = 0.2,
    method: str = "dense",
    n_theta: int = 16,
    n_phi: int = 32,
) -> ConvergenceStudy:
    """Boundary-traction residual of the uniform approximation versus void radius.

    Every void of ``base_cloud`` gets radius ``eps`` in turn; entries failing
    the gate ``eps < gate_c * d`` are skipped and noted.  The residual is a
    computable stand-in for the traction discrepancy left on the voids, which
    is bounded by ``Const * eps`` plus interaction tails.
    """
    kept_eps, kept_res, notes = [], [], []
    for eps in eps_list:
        cloud = base_cloud.with_radii(float(eps))
        report = validate_cloud(cloud, gate_c)
        if not report.ok:
            notes.append(f"eps={eps!r} skipped: {', '.join(report.failures())} check failed")
            continue
        system = assemble_system(cloud, bg)
        c = solve_coefficients(system, method)
        res = boundary_traction_residual(cloud, bg, c, n_theta, n_phi).max()
        kept_eps.append(float(eps))
        kept_res.append(float(res))
    fit = fit_slope(kept_eps, kept_res) if len(kept_eps) >= 4 else None
    if fit is None:
        notes.append(f"only {len(kept_eps)} admissible radii; no slope fitted")
    return ConvergenceStudy(np.array(kept_eps), np.array(kept_res), notes, fit)


# -- default problem and suite ------------------------------------------------


def default_background(params: LameParams) -> BackgroundField:
    pairs = (
        PointForcePair((3.0, 0.0, 0.0), (1.0, 0.0, 0.0), 0.5, 1.0),
        PointForcePair((0.0, 0.0, -3.0), (0.3, 0.2, 1.0), 0.5, 1.0),
        PointForcePair((0.0, 3.5, 0.5), (1.0, 1.0, 0.0), 0.4, -0.7),
    )
    return BackgroundField(pairs, params)


def default_problem(
    n: int = 5, seed: int = 0, eps_over_d: float = 0.1, params: LameParams | None = None
) -> tuple[Cloud, BackgroundField]:
    """Seeded cloud in the unit ball (d = 0.2) with three force pairs outside it."""
    params = LameParams(1.0, 1.0) if params is None else params
    d = 0.2
    cloud = generate_cloud(Ball((0.0, 0.0, 0.0), 1.0), n, d, eps_over_d * d, seed, params)
    return cloud, default_background(params)


def run_suite(cloud: Cloud, bg: BackgroundField, seed: int = 0) -> list[CheckReport]:
    """Run every numerical check on one problem; each report carries its own threshold."""
    p = cloud.params
    rng = np.random.default_rng(seed)
    reports: list[CheckReport] = []

    big, small = operator_identity_errors()
    reports.append(CheckReport.below("operator_identities", max(big, small), 1e-15))

    geo = validate_cloud(cloud)
    reports.append(
        CheckReport("cloud_geometry", float(geo.ok), 1.0, geo.ok, geo.to_dict())
    )

    pts = rng.normal(size=(20, 2, 3))
    errs_k = [dipole_kernel_fd_error(a, b, p) for a, b in pts]
    errs_h = [hessian_kernel_fd_error(a, b, p) for a, b in pts[:5]]
    reports.append(CheckReport.below("dipole_kernel_fd", max(errs_k), 1e-7))
    reports.append(CheckReport.below("hessian_kernel_fd", max(errs_h), 1e-7))

    worst = 0.0
    for a, b in pts[:10]:
        rho = np.linalg.norm(a - b)
        res = lame_residual(lambda x: gamma(x, b, p), a, p, 1e-4 * rho)
        worst = max(worst, np.abs(res).max() * rho**3)
    reports.append(CheckReport.below("gamma_lame_residual", worst, 1e-4))

    eig_max = max(np.linalg.eigvalsh(dipole_matrix(r, p)).max() for r in cloud.radii) if len(cloud) else -1.0
    reports.append(CheckReport("dipole_negative_definite", float(eig_max), 0.0, bool(eig_max < 0.0)))

    orth = check_orthogonality(Void((0.0, 0.0, 0.0), 1.0), p)
    reports.append(CheckReport.below("sphere_traction", orth.traction_error, 1e-6))
    reports.append(CheckReport.below("sphere_force_moment", max(orth.force, orth.moment), 1e-8))

    system = assemble_system(cloud, bg)
    c = solve_coefficients(system, "dense")
    diag = system_diagnostics(system, c)
    reports.append(
        CheckReport.below("solve_residual", diag.relative_residual or 0.0, 1e-10, **diag.to_dict())
    )
    if diag.pm_norm_inf < 1.0 and len(cloud):
        cn = solve_coefficients(system, "neumann")
        agree = np.abs(cn - c).max() / max(np.abs(c).max(), np.finfo(float).tiny)
        reports.append(CheckReport.below("dense_vs_neumann", agree, 1e-9))

    mv = 0.0
    for _ in range(3):
        r = cloud.region.radius * rng.uniform(0.3, 0.9)
        y0 = cloud.region.center_array + rng.normal(size=3)
        y0 = y0 / np.linalg.norm(y0) * 3.0 * r + cloud.region.center_array
        col = rng.integers(3)
        mv = max(mv, mean_value_check(lambda x: gamma(x, y0, p)[..., col], cloud.region.center, r, p).measured)
    mv = max(mv, mean_value_check(lambda x: background_eval(bg, x), cloud.region.center, cloud.region.radius, p).measured)
    reports.append(CheckReport.below("mean_value_identities", mv, 1e-7))

    lr = max(
        local_regularity_probe(lambda x: background_eval(bg, x), cloud.region.center, r).measured
        for r in cloud.region.radius * np.array([0.25, 0.5, 1.0])
    )
    reports.append(CheckReport.below("local_regularity", lr, 10.0))

    if len(cloud):
        before = background_traction(cloud, bg)
        after = boundary_traction_residual(cloud, bg, c)
        reduction = float((after / before).max())
        reports.append(CheckReport.below("boundary_traction_reduction", reduction, 0.1))
    return reports
