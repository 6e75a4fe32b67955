"""Closed-form dipole characteristics of a traction-free spherical cavity.

``dipole_matrix`` gives the 6x6 matrix ``M`` of a sphere of radius ``a``; it
scales as ``a**3``.  ``dipole_field`` gives the 3x6 matrix ``Q(x)`` whose
columns are the exterior displacement fields that cancel the traction of a
unit uniform strain (in strain-vector ordering) on the cavity surface:

    T_n Q = Xi(n) A   on |x - O| = a,     Q -> 0 at infinity.

Far from the cavity ``Q`` reduces to the dipole-kernel term ``K(x, O) M``; the
remaining terms decay like ``|x - O|**-4``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elastic import LameParams, big_xi, rigid_motion_matrix, stiffness_matrix, traction
from .errors import GeometryError, ParameterError
from .kernels import gamma_dipole_kernel


@dataclass(frozen=True)
class Void:
    """Spherical cavity with centre ``center`` and radius ``radius``."""

    center: tuple[float, float, float]
    radius: float

    def __post_init__(self) -> None:
        c = tuple(float(v) for v in np.asarray(self.center, dtype=float).reshape(3))
        r = float(self.radius)
        if not (np.isfinite(r) and r > 0.0) or not all(np.isfinite(c)):
            raise GeometryError(f"void needs a finite centre and positive radius, got {c}, {r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def center_array(self) -> np.ndarray:
        return np.array(self.center)


def dipole_matrix(radius: float, p: LameParams) -> np.ndarray:
    """Dipole matrix of a spherical cavity; symmetric negative definite.

    Block diagonal: a 3x3 block with diagonal ``m = 9 lam^2 + 20 lam mu + 36 mu^2``
    and off-diagonal ``m - 40 mu^2``, then ``40 mu^2 I3``, all multiplied by
    ``-(lam + 2 mu) pi a^3 / (mu (9 lam + 14 mu))``.
    """
    if not isinstance(p, LameParams):
        raise ParameterError("dipole_matrix expects LameParams")
    a = float(radius)
    if not (np.isfinite(a) and a > 0.0):
        raise ParameterError(f"radius must be positive, got {radius}")
    lam, mu = p.lam, p.mu
    m = 9.0 * lam**2 + 20.0 * lam * mu + 36.0 * mu**2
    block = np.zeros((6, 6))
    block[:3, :3] = m - 40.0 * mu**2
    block[[0, 1, 2], [0, 1, 2]] = m
    block[[3, 4, 5], [3, 4, 5]] = 40.0 * mu**2
    scale = -(lam + 2.0 * mu) * np.pi * a**3 / (mu * (9.0 * lam + 14.0 * mu))
    return scale * block


def _correction_matrices(radius: float, p: LameParams):
    lam, mu = p.lam, p.mu
    c = (lam + mu) * radius**5 / (9.0 * lam + 14.0 * mu)
    a1 = np.zeros((6, 6))
    a1[:3, :3] = np.ones((3, 3)) + 2.0 * np.eye(3)
    a1[3:, 3:] = 2.0 * np.eye(3)
    a1 *= -3.0 * c
    a2 = np.zeros((3, 6))
    a2[:, 3:] = np.fliplr(np.eye(3))
    a2 *= 15.0 * np.sqrt(2.0) * c
    a3 = np.zeros((6, 6))
    a3[3:, 3:] = 30.0 * c * np.eye(3)
    return c, a1, a2, a3


def dipole_field_unchecked(x, void: Void, p: LameParams) -> np.ndarray:
    """``dipole_field`` without the exterior check.

    The closed form is smooth away from the centre, so finite-difference
    stencils may straddle the cavity surface.
    """
    r = np.asarray(x, dtype=float) - void.center_array
    rho = np.linalg.norm(r, axis=-1)[..., None, None]
    c, a1, a2, a3 = _correction_matrices(void.radius, p)
    xi = big_xi(r)
    sq = r**2
    lead = gamma_dipole_kernel(x, void.center_array, p) @ dipole_matrix(void.radius, p)

    # Y(r) = 15 c [[ones @ diag(r^2), 0], [0, 0]], so Xi(r) Y(r) only fills columns 0..2
    xi_y = np.zeros(r.shape[:-1] + (3, 6))
    xi_y[..., :3] = 15.0 * c * xi[..., :, :3].sum(axis=-1, keepdims=True) * sq[..., None, :]
    triple = (r[..., 0] * r[..., 1] * r[..., 2])[..., None, None]
    diag_xi = sq[..., :, None] * xi  # diag(r^2) @ Xi(r)

    return (
        lead
        + (xi @ a1) / rho**5
        + (xi_y + triple * a2 + diag_xi @ a3) / rho**7
    )


def dipole_field(x, void: Void, p: LameParams) -> np.ndarray:
    """3x6 dipole field ``Q(x)`` of a spherical cavity, batched over ``x``.

    Raises:
        GeometryError: if any point lies inside or on the cavity.
    """
    r = np.asarray(x, dtype=float) - void.center_array
    if np.any(np.linalg.norm(r, axis=-1) <= void.radius):
        raise GeometryError("dipole field evaluated inside or on the cavity")
    return dipole_field_unchecked(x, void, p)


def dipole_field_far(x, void: Void, p: LameParams) -> np.ndarray:
    """Leading far-field term ``K(x, O) M`` of the dipole field."""
    return gamma_dipole_kernel(x, void.center_array, p) @ dipole_matrix(void.radius, p)


@dataclass(frozen=True)
class SurfaceTractionReport:
    """Traction residual and resultant force/moment of the dipole field on a sphere."""

    traction_error: float  # sup |T_n Q - Xi(n) A| / sup |Xi(n) A|
    force: float  # max |entry| of the surface integral of T_n Q
    moment: float  # max |entry| of the surface integral of J(x - O) T_n Q
    n_nodes: int

    def to_dict(self) -> dict:
        return {
            "traction_error": self.traction_error,
            "force": self.force,
            "moment": self.moment,
            "n_nodes": self.n_nodes,
        }


def dipole_surface_traction(void: Void, p: LameParams, nodes: np.ndarray, step: float | None = None):
    """Traction ``T_n Q`` at points ``O + a n`` from central differences of ``Q``.

    Returns an array of shape ``(len(nodes), 3, 6)``.
    """
    from .validation import fd_gradient

    h = 1e-4 * void.radius if step is None else step
    pts = void.center_array + void.radius * nodes
    grad = fd_gradient(lambda y: dipole_field_unchecked(y, void, p), pts, h)  # (P, 3, 6, 3)
    grad = np.moveaxis(grad, 2, 1)  # (P, 6, 3, 3): column, component, derivative
    return np.moveaxis(traction(grad, nodes[:, None, :], p), 1, 2)


def check_orthogonality(
    void: Void,
    p: LameParams,
    n_theta: int = 16,
    n_phi: int = 32,
    step: float | None = None,
) -> SurfaceTractionReport:
    """Verify the boundary condition and the zero force/moment conditions on one cavity.

    The surface integrals use a Gauss-Legendre (in cos theta) by trapezoid
    (in phi) product rule; gradients of ``Q`` come from central differences
    with step ``1e-4 * radius`` so the check does not reuse the closed form's
    own derivatives.
    """
    from .validation import sphere_rule

    nodes, weights = sphere_rule(n_theta, n_phi)
    t = dipole_surface_traction(void, p, nodes, step)
    target = big_xi(nodes) @ stiffness_matrix(p)
    err = np.abs(t - target).max() / np.abs(target).max()
    area = void.radius**2
    force = np.einsum("q,qia->ia", weights * area, t)
    arm = rigid_motion_matrix(void.radius * nodes)
    moment = np.einsum("q,qij,qja->ia", weights * area, arm, t)
    return SurfaceTractionReport(
        traction_error=float(err),
        force=float(np.abs(force).max()),
        moment=float(np.abs(moment).max()),
        n_nodes=len(nodes),
    )
