"""Kelvin-Somigliana tensor and its strain-contracted derivatives.

Three closed-form kernels are provided, each batched over leading axes:

* ``gamma(x, y)``: the 3x3 fundamental solution, ``L Gamma + delta I = 0``.
* ``gamma_dipole_kernel(x, z)``: the 3x6 field at ``x`` of a unit strain
  dipole at ``z``, ``K[i, a] = E_a(z -> Gamma(z, x) e_i)``.
* ``gamma_hessian_kernel(x, y)``: the 6x6 strain at ``x`` of the dipole
  kernel with source ``y``, ``P[a, b] = E_a(x -> K(x, y)[:, b])``.

The derivative kernels come from differentiating the closed form by hand;
finite differences appear only in tests and in :mod:`mesovoids.validation`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .elastic import STRAIN_MAP, LameParams
from .errors import SingularityError

_I3 = np.eye(3)
# strain map flattened over its (j, k) pair, for contraction by matrix product
_S9 = STRAIN_MAP.reshape(6, 9).T


def _separation(x, y) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    rho = np.linalg.norm(r, axis=-1)
    if np.any(rho == 0.0) or not np.all(np.isfinite(rho)):
        raise SingularityError("kernel evaluated at coincident points")
    return r, rho


def _coefficients(p: LameParams) -> tuple[float, float, float]:
    c = 1.0 / (8.0 * np.pi * p.mu * (p.lam + 2.0 * p.mu))
    return c, p.lam + 3.0 * p.mu, p.lam + p.mu


def gamma(x, y, p: LameParams) -> np.ndarray:
    """Kelvin-Somigliana tensor Gamma(x, y); symmetric in its indices and arguments."""
    r, rho = _separation(x, y)
    c, alpha, beta = _coefficients(p)
    rho = rho[..., None, None]
    rr = r[..., :, None] * r[..., None, :]
    return c * (alpha * _I3 / rho + beta * rr / rho**3)


def gamma_gradient(r, p: LameParams) -> np.ndarray:
    """``D[..., i, j, k] = dGamma_ij/dr_k`` as a function of the separation ``r = x - y``."""
    r = np.asarray(r, dtype=float)
    rho = np.linalg.norm(r, axis=-1)
    if np.any(rho == 0.0):
        raise SingularityError("kernel evaluated at coincident points")
    c, alpha, beta = _coefficients(p)
    n = r / rho[..., None]
    scale = (c / rho**2)[..., None, None, None]
    ni = n[..., :, None, None]
    nj = n[..., None, :, None]
    nk = n[..., None, None, :]
    d = beta * (_I3[:, None, :] * nj + _I3[None, :, :] * ni) - alpha * _I3[:, :, None] * nk
    d -= 3.0 * beta * (ni * nj) * nk
    return scale * d


def gamma_second_gradient(r, p: LameParams) -> np.ndarray:
    """``T[..., i, j, k, l] = d2 Gamma_ij / dr_k dr_l``; even in ``r``."""
    r = np.asarray(r, dtype=float)
    rho = np.linalg.norm(r, axis=-1)
    if np.any(rho == 0.0):
        raise SingularityError("kernel evaluated at coincident points")
    c, alpha, beta = _coefficients(p)
    rho = rho[..., None, None, None, None]
    ri = r[..., :, None, None, None]
    rj = r[..., None, :, None, None]
    rk = r[..., None, None, :, None]
    rl = r[..., None, None, None, :]
    dij = _I3[:, :, None, None]
    dkl = _I3[None, None, :, :]
    dik = _I3[:, None, :, None]
    djl = _I3[None, :, None, :]
    djk = _I3[None, :, :, None]
    dil = _I3[:, None, None, :]
    t = -alpha * dij * (dkl / rho**3 - 3.0 * rk * rl / rho**5)
    t = t + beta * (dik * djl + djk * dil) / rho**3
    t = t - 3.0 * beta * (dik * rj * rl + djk * ri * rl) / rho**5
    t = t - 3.0 * beta * (dil * rj * rk + djl * ri * rk + dkl * ri * rj) / rho**5
    t = t + 15.0 * beta * ri * rj * rk * rl / rho**7
    return c * t


def gamma_dipole_kernel(x, z, p: LameParams) -> np.ndarray:
    """3x6 dipole kernel ``(Xi(grad_z).T Gamma(z, x)).T`` for field point ``x``, source ``z``.

    Row ``i`` is the strain vector, taken in ``z``, of the ``i``-th column of
    ``Gamma(z, x)``.  Odd and homogeneous of degree -2 in ``x - z``.
    """
    r, _ = _separation(x, z)
    # Gamma(z, x) depends on s = z - x = -r and dGamma/ds is odd
    d = -gamma_gradient(r, p)
    d = np.swapaxes(d, -3, -2)  # [..., i, j, k]
    return d.reshape(d.shape[:-2] + (9,)) @ _S9


def gamma_hessian_kernel(x, y, p: LameParams) -> np.ndarray:
    """6x6 interaction block ``Xi(grad_x).T (Xi(grad_y).T Gamma(y, x)).T``.

    Symmetric, even and homogeneous of degree -3 in ``x - y``, so
    ``K(x, y) == K(y, x).T == K(y, x)``.
    """
    r, _ = _separation(x, y)
    t = gamma_second_gradient(r, p)
    # contract (j, k) with the second strain index and (m, l) with the first
    t = np.swapaxes(t, -3, -2)  # [..., j, k, m, l]
    t = t.reshape(t.shape[:-4] + (9, 9))
    return -(_S9.T @ np.swapaxes(t, -1, -2) @ _S9)


def displacement_strain_kernel(x, y, p: LameParams) -> np.ndarray:
    """Strain at ``x`` of the field ``Gamma(., y) f``, as a 6x3 matrix acting on ``f``.

    Equals ``gamma_dipole_kernel(y, x).T``: moving the derivative from the
    source slot to the field slot of the symmetric tensor.
    """
    return np.swapaxes(gamma_dipole_kernel(y, x, p), -1, -2)


class GreenKernel(ABC):
    """Green's tensor ``G = Gamma - H`` of a domain, with its derivative kernels.

    Only the free-space case ``H = 0`` is implemented.  A bounded-domain
    subclass must supply the regular part through :meth:`regular_dipole_kernel`
    and override the interaction kernel accordingly.
    """

    def __init__(self, params: LameParams) -> None:
        self.params = params

    @abstractmethod
    def evaluate(self, x, y) -> np.ndarray: ...

    @abstractmethod
    def dipole_kernel(self, x, z) -> np.ndarray: ...

    @abstractmethod
    def hessian_kernel(self, x, y) -> np.ndarray: ...

    def regular_dipole_kernel(self, x, z) -> np.ndarray:
        """``(Xi(grad_z).T H(z, x)).T``; zero unless the domain has a boundary."""
        shape = np.broadcast_shapes(np.shape(x), np.shape(z))[:-1]
        return np.zeros(shape + (3, 6))


class FreeSpaceKernel(GreenKernel):
    """Green's tensor of the whole space, ``G = Gamma``."""

    def evaluate(self, x, y) -> np.ndarray:
        return gamma(x, y, self.params)

    def dipole_kernel(self, x, z) -> np.ndarray:
        return gamma_dipole_kernel(x, z, self.params)

    def hessian_kernel(self, x, y) -> np.ndarray:
        return gamma_hessian_kernel(x, y, self.params)
