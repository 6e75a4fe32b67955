"""Isotropic elasticity in the 6-component strain-vector notation.

Strain and stress vectors use the ordering

    E = (e11, e22, e33, sqrt2*e12, sqrt2*e13, sqrt2*e23)
    N = (s11, s22, s33, sqrt2*s12, sqrt2*s13, sqrt2*s23)

and every kernel, dipole matrix and coefficient vector in the package uses
exactly this ordering.  With it, the Lamé operator factors as
``L(grad) = Xi(grad) @ A @ Xi(grad).T`` and the traction on a surface with
normal ``n`` is ``Xi(n) @ A @ E(u)``.

All functions accept batched inputs: a trailing axis of length 3 (vectors)
or trailing ``(3, 3)`` axes (gradients), with arbitrary leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ParameterError

SQRT1_2 = 1.0 / np.sqrt(2.0)

# STRAIN_MAP[a, j, k]: weight of du_j/dx_k in strain component a.
STRAIN_MAP = np.zeros((6, 3, 3))
for _a, (_j, _k) in enumerate([(0, 0), (1, 1), (2, 2)]):
    STRAIN_MAP[_a, _j, _k] = 1.0
for _a, (_j, _k) in enumerate([(0, 1), (0, 2), (1, 2)], start=3):
    STRAIN_MAP[_a, _j, _k] = SQRT1_2
    STRAIN_MAP[_a, _k, _j] = SQRT1_2
del _a, _j, _k


@dataclass(frozen=True)
class LameParams:
    """Lamé constants of an isotropic medium (nondimensional).

    Construction fails with :class:`ParameterError` unless ``mu > 0`` and the
    Poisson ratio lies strictly inside (-1, 1/2).
    """

    lam: float
    mu: float

    def __post_init__(self) -> None:
        lam, mu = float(self.lam), float(self.mu)
        if not (np.isfinite(lam) and np.isfinite(mu)):
            raise ParameterError(f"Lamé parameters must be finite, got lambda={lam}, mu={mu}")
        if mu <= 0.0:
            raise ParameterError(f"shear modulus mu must be positive, got {mu}")
        # nu in (-1, 1/2) with mu > 0 is equivalent to a positive bulk modulus
        if 3.0 * lam + 2.0 * mu <= 0.0:
            raise ParameterError(
                f"Poisson ratio outside (-1, 1/2) for lambda={lam}, mu={mu}"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_poisson(cls, nu: float, mu: float = 1.0) -> LameParams:
        """Build parameters from a Poisson ratio and shear modulus."""
        if not -1.0 < nu < 0.5:
            raise ParameterError(f"Poisson ratio must lie in (-1, 1/2), got {nu}")
        return cls(2.0 * mu * nu / (1.0 - 2.0 * nu), mu)

    @property
    def poisson(self) -> float:
        return self.lam / (2.0 * (self.lam + self.mu))


def big_xi(x) -> np.ndarray:
    """Return the 3x6 matrix Xi(x); batched over leading axes of ``x``.

    Applied formally to the gradient, ``Xi(grad).T u`` is the strain vector
    of ``u``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (3, 6))
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    out[..., 0, 0] = x1
    out[..., 1, 1] = x2
    out[..., 2, 2] = x3
    out[..., 0, 3] = SQRT1_2 * x2
    out[..., 1, 3] = SQRT1_2 * x1
    out[..., 0, 4] = SQRT1_2 * x3
    out[..., 2, 4] = SQRT1_2 * x1
    out[..., 1, 5] = SQRT1_2 * x3
    out[..., 2, 5] = SQRT1_2 * x2
    return out


def small_xi(x) -> np.ndarray:
    """Return the 3x6 matrix xi(x) (constant block plus an antisymmetric linear part)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (3, 6))
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    out[..., 0, 0] = out[..., 1, 1] = out[..., 2, 2] = 1.0
    out[..., 0, 3] = SQRT1_2 * x2
    out[..., 1, 3] = -SQRT1_2 * x1
    out[..., 0, 4] = SQRT1_2 * x3
    out[..., 2, 4] = -SQRT1_2 * x1
    out[..., 1, 5] = SQRT1_2 * x3
    out[..., 2, 5] = -SQRT1_2 * x2
    return out


def stiffness_matrix(p: LameParams) -> np.ndarray:
    """6x6 stiffness ``A = diag(B, 2 mu I3)`` mapping strain vectors to stress vectors."""
    if not isinstance(p, LameParams):
        raise ParameterError("stiffness_matrix expects LameParams")
    a = np.zeros((6, 6))
    a[:3, :3] = p.lam
    a[[0, 1, 2], [0, 1, 2]] = p.lam + 2.0 * p.mu
    a[[3, 4, 5], [3, 4, 5]] = 2.0 * p.mu
    return a


def strain_vector(grad_u) -> np.ndarray:
    """Strain vector of a displacement gradient ``grad_u[..., i, j] = du_i/dx_j``."""
    g = np.asarray(grad_u, dtype=float)
    return np.einsum("ajk,...jk->...a", STRAIN_MAP, g)


def strain_tensor(e) -> np.ndarray:
    """Inverse of the strain-vector packing: 6-vector -> symmetric 3x3 tensor."""
    e = np.asarray(e, dtype=float)
    return np.einsum("ajk,...a->...jk", STRAIN_MAP, e)


def stress_vector(grad_u, p: LameParams) -> np.ndarray:
    return strain_vector(grad_u) @ stiffness_matrix(p).T


def traction(grad_u, n, p: LameParams) -> np.ndarray:
    """Surface traction ``Xi(n) A E(u)`` for a unit normal ``n``.

    Raises:
        GeometryError: if ``n`` is not a unit vector (tolerance 1e-10).
    """
    n = np.asarray(n, dtype=float)
    if np.any(np.abs(np.linalg.norm(n, axis=-1) - 1.0) > 1e-10):
        raise GeometryError("traction requires a unit normal")
    s = stress_vector(grad_u, p)
    return np.einsum("...ia,...a->...i", big_xi(n), s)


def rigid_motion_matrix(x) -> np.ndarray:
    """Matrix J(x) with ``J(x) @ v == cross(x, v)``; its columns are the infinitesimal rotations."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (3, 3))
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    out[..., 0, 1] = -x3
    out[..., 0, 2] = x2
    out[..., 1, 0] = x3
    out[..., 1, 2] = -x1
    out[..., 2, 0] = -x2
    out[..., 2, 1] = x1
    return out


def energy_density(e) -> np.ndarray | float:
    """``tr(e e)`` of the strain tensor, computed from its strain vector.

    With the sqrt2 packing of the shear components the quadratic form is the
    plain Euclidean norm; a weight of 1/2 on the shear block belongs to the
    engineering-shear packing (2*e12) instead.
    """
    e = np.asarray(e, dtype=float)
    out = np.einsum("...a,...a->...", e, e)
    return float(out) if out.ndim == 0 else out


def lame_operator_coefficients(p: LameParams) -> np.ndarray:
    """Coefficients ``c[i, j, k, l]`` with ``(L u)_i = c[i,j,k,l] d_k d_l u_j``.

    Built literally from ``Xi(grad) A Xi(grad).T``; equals
    ``mu delta_ij delta_kl + (lam + mu) delta_ik delta_jl`` after
    symmetrization in (k, l).
    """
    a = stiffness_matrix(p)
    basis = big_xi(np.eye(3))  # basis[k] = Xi(e_k)
    c = np.einsum("kia,ab,ljb->ijkl", basis, a, basis)
    return 0.5 * (c + c.transpose(0, 1, 3, 2))
