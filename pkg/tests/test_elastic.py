"""Strain-vector notation, stiffness, traction and the operator identities."""

from __future__ import annotations

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mesovoids.elastic import (
    LameParams,
    big_xi,
    energy_density,
    lame_operator_coefficients,
    rigid_motion_matrix,
    small_xi,
    stiffness_matrix,
    strain_tensor,
    strain_vector,
    traction,
)
from mesovoids.errors import GeometryError, ParameterError

from .conftest import poisson, vec3

R2 = 1.0 / np.sqrt(2.0)


def _symbolic_xi(x, small=False):
    x1, x2, x3 = x
    h = 1 / sp.sqrt(2)
    s = -1 if small else 1
    head = sp.eye(3) if small else sp.diag(x1, x2, x3)
    tail = sp.Matrix(
        [
            [h * x2, h * x3, 0],
            [s * h * x1, 0, h * x3],
            [0, s * h * x1, s * h * x2],
        ]
    )
    return head.row_join(tail)


def _apply_xi_grad_transpose(f, x):
    """Exact application of Xi(grad).T to a 3-column matrix function F(x)."""
    grad = lambda g: [sp.diff(g, xi) for xi in x]
    out = sp.zeros(6, f.shape[1])
    for col in range(f.shape[1]):
        u = [f[i, col] for i in range(3)]
        d = [grad(ui) for ui in u]
        out[0, col] = d[0][0]
        out[1, col] = d[1][1]
        out[2, col] = d[2][2]
        out[3, col] = (d[0][1] + d[1][0]) / sp.sqrt(2)
        out[4, col] = (d[0][2] + d[2][0]) / sp.sqrt(2)
        out[5, col] = (d[1][2] + d[2][1]) / sp.sqrt(2)
    return sp.simplify(out)


class TestLameParams:
    def test_valid(self):
        p = LameParams(1.0, 1.0)
        assert p.poisson == pytest.approx(0.25)

    @pytest.mark.parametrize("lam,mu", [(1.0, 0.0), (1.0, -1.0), (-1.0, 1.0), (np.nan, 1.0)])
    def test_invalid(self, lam, mu):
        with pytest.raises(ParameterError):
            LameParams(lam, mu)

    @given(poisson)
    def test_from_poisson_round_trip(self, nu):
        p = LameParams.from_poisson(nu, 2.0)
        assert p.poisson == pytest.approx(nu, abs=1e-12)
        assert p.lam + 2 * p.mu > 0 and 9 * p.lam + 14 * p.mu > 0

    def test_from_poisson_rejects_half(self):
        with pytest.raises(ParameterError):
            LameParams.from_poisson(0.5)


class TestXiMatrices:
    def test_big_xi_zero(self):
        np.testing.assert_array_equal(big_xi(np.zeros(3)), np.zeros((3, 6)))

    def test_big_xi_e1(self):
        expected = np.zeros((3, 6))
        expected[0, 0] = 1.0
        expected[1, 3] = R2
        expected[2, 4] = R2
        np.testing.assert_allclose(big_xi([1.0, 0.0, 0.0]), expected, atol=0)

    def test_small_xi_zero(self):
        expected = np.zeros((3, 6))
        expected[:, :3] = np.eye(3)
        np.testing.assert_array_equal(small_xi(np.zeros(3)), expected)

    def test_small_xi_e2(self):
        expected = np.zeros((3, 6))
        expected[:, :3] = np.eye(3)
        expected[0, 3] = R2
        expected[2, 5] = -R2
        np.testing.assert_allclose(small_xi([0.0, 1.0, 0.0]), expected, atol=0)

    def test_numeric_matches_symbolic(self):
        x = sp.symbols("x1 x2 x3")
        pt = np.array([0.3, -1.2, 2.5])
        sub = dict(zip(x, pt))
        for fn, small in ((big_xi, False), (small_xi, True)):
            sym = np.array(_symbolic_xi(x, small).subs(sub).evalf(), dtype=float)
            np.testing.assert_allclose(fn(pt), sym, atol=1e-15)

    def test_symbolic_identities(self):
        x = sp.symbols("x1 x2 x3")
        assert _apply_xi_grad_transpose(_symbolic_xi(x), x) == sp.eye(6)
        assert _apply_xi_grad_transpose(_symbolic_xi(x, small=True), x) == sp.zeros(6, 6)

    def test_batched(self, rng):
        x = rng.normal(size=(4, 5, 3))
        out = big_xi(x)
        assert out.shape == (4, 5, 3, 6)
        np.testing.assert_array_equal(out[2, 3], big_xi(x[2, 3]))

    @given(vec3)
    def test_transpose_gives_strain_of_linear_field(self, b):
        # u(x) = G x has Xi(grad).T u = strain_vector(G); a rank-one G = b e1^T
        g = np.outer(b, [1.0, 0.0, 0.0])
        e = strain_vector(g)
        np.testing.assert_allclose(e, big_xi([1.0, 0.0, 0.0]).T @ b, atol=1e-12)


class TestStiffness:
    def test_lambda0(self):
        a = stiffness_matrix(LameParams(0.0, 1.0))
        np.testing.assert_array_equal(a, 2.0 * np.eye(6))

    def test_lambda1(self):
        a = stiffness_matrix(LameParams(1.0, 1.0))
        np.testing.assert_array_equal(a[:3, :3], np.ones((3, 3)) + 2 * np.eye(3))
        np.testing.assert_array_equal(a[3:, 3:], 2 * np.eye(3))
        np.testing.assert_array_equal(a[:3, 3:], 0.0)

    @given(poisson)
    def test_positive_definite(self, nu):
        a = stiffness_matrix(LameParams.from_poisson(nu))
        np.testing.assert_array_equal(a, a.T)
        assert np.linalg.eigvalsh(a).min() > 0

    def test_rejects_non_params(self):
        with pytest.raises(ParameterError):
            stiffness_matrix((1.0, 1.0))

    def test_operator_coefficients(self, params):
        c = lame_operator_coefficients(params)
        d = np.eye(3)
        expected = params.mu * np.einsum("ij,kl->ijkl", d, d) + 0.5 * (params.lam + params.mu) * (
            np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d)
        )
        np.testing.assert_allclose(c, expected, atol=1e-14)


class TestStrainAndTraction:
    def test_dilatation(self):
        np.testing.assert_allclose(strain_vector(np.eye(3)), [1, 1, 1, 0, 0, 0])

    def test_rotation_has_no_strain(self, rng):
        w = rng.normal(size=3)
        np.testing.assert_allclose(strain_vector(rigid_motion_matrix(w)), 0.0, atol=1e-15)

    def test_simple_shear(self):
        np.testing.assert_allclose(strain_vector(np.outer([1, 0, 0], [0, 1, 0])), [0, 0, 0, R2, 0, 0])

    @given(st.lists(st.floats(-5, 5), min_size=9, max_size=9))
    def test_tensor_round_trip(self, vals):
        g = np.array(vals).reshape(3, 3)
        eps = 0.5 * (g + g.T)
        np.testing.assert_allclose(strain_tensor(strain_vector(g)), eps, atol=1e-12)

    def test_traction_zero(self, params):
        np.testing.assert_array_equal(traction(np.zeros((3, 3)), [1.0, 0.0, 0.0], params), 0.0)

    def test_traction_dilatation(self, params):
        np.testing.assert_allclose(traction(np.eye(3), [1.0, 0.0, 0.0], params), [5.0, 0.0, 0.0])

    def test_traction_of_rotation(self, params, rng):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        t = traction(rigid_motion_matrix(rng.normal(size=3)), n, params)
        np.testing.assert_allclose(t, 0.0, atol=1e-14)

    def test_traction_matches_stress_tensor(self, params, rng):
        g = rng.normal(size=(3, 3))
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        eps = 0.5 * (g + g.T)
        sigma = params.lam * np.trace(eps) * np.eye(3) + 2 * params.mu * eps
        np.testing.assert_allclose(traction(g, n, params), sigma @ n, atol=1e-13)

    def test_traction_rejects_non_unit(self, params):
        with pytest.raises(GeometryError):
            traction(np.eye(3), [2.0, 0.0, 0.0], params)

    @given(st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=30)
    def test_traction_linear_in_gradient(self, a, b):
        rng = np.random.default_rng(7)
        p = LameParams(1.3, 0.7)
        g1, g2 = rng.normal(size=(2, 3, 3))
        n = np.array([0.0, 0.6, 0.8])
        lhs = traction(a * g1 + b * g2, n, p)
        rhs = a * traction(g1, n, p) + b * traction(g2, n, p)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_traction_linear_in_normal(self, params, rng):
        g = rng.normal(size=(3, 3))
        n1, n2 = np.eye(3)[:2]
        n = (n1 + n2) / np.sqrt(2)
        combo = (traction(g, n1, params) + traction(g, n2, params)) / np.sqrt(2)
        np.testing.assert_allclose(traction(g, n, params), combo, atol=1e-13)


class TestRigidMotionAndEnergy:
    def test_zero(self):
        np.testing.assert_array_equal(rigid_motion_matrix(np.zeros(3)), np.zeros((3, 3)))

    def test_e1_entries(self):
        j = rigid_motion_matrix([1.0, 0.0, 0.0])
        assert j[1, 2] == -1.0 and j[2, 1] == 1.0
        assert np.count_nonzero(j) == 2

    @given(vec3, vec3)
    def test_cross_product(self, x, v):
        np.testing.assert_allclose(rigid_motion_matrix(x) @ v, np.cross(x, v), atol=1e-12)

    def test_energy_zero(self):
        assert energy_density(np.zeros(6)) == 0.0

    def test_energy_dilatation(self):
        assert energy_density([1, 1, 1, 0, 0, 0]) == pytest.approx(3.0)

    def test_energy_matches_trace(self, rng):
        g = rng.normal(size=(100, 3, 3))
        eps = 0.5 * (g + np.swapaxes(g, -1, -2))
        direct = np.einsum("nij,nji->n", eps, eps)
        np.testing.assert_allclose(energy_density(strain_vector(g)), direct, rtol=1e-13)
