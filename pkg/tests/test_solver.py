"""Background fields, system assembly and the two solvers."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mesovoids.cloud import Ball, Cloud, generate_cloud
from mesovoids.elastic import strain_vector
from mesovoids.errors import (
    ConvergenceError,
    GeometryError,
    NumericalError,
    SingularityError,
)
from mesovoids.kernels import gamma, gamma_hessian_kernel
from mesovoids.solver import (
    BackgroundField,
    InteractionSystem,
    PointForcePair,
    assemble_system,
    background_eval,
    background_strain,
    check_sources,
    pm_norm,
    solve_coefficients,
    system_diagnostics,
)
from mesovoids.sphere import Void, dipole_matrix
from mesovoids.validation import fd_gradient, fit_slope, lame_residual

UNIT = Ball((0.0, 0.0, 0.0), 1.0)


class TestPointForcePair:
    def test_normalizes_axis(self):
        p = PointForcePair((0, 0, 0), (0, 3, 4), 1.0, 2.0)
        np.testing.assert_allclose(p.axis, (0, 0.6, 0.8))
        np.testing.assert_allclose(p.force(), [0, 1.2, 1.6])

    def test_self_equilibrated(self):
        p = PointForcePair((1, 2, 3), (1, 1, 0), 0.4, 2.0)
        plus, minus = p.sources()
        f = p.force()
        np.testing.assert_allclose(f - f, 0.0)
        np.testing.assert_allclose(np.cross(plus, f) + np.cross(minus, -f), 0.0, atol=1e-15)

    @pytest.mark.parametrize("axis,gap", [((0, 0, 0), 1.0), ((1, 0, 0), 0.0)])
    def test_rejects(self, axis, gap):
        with pytest.raises(GeometryError):
            PointForcePair((0, 0, 0), axis, gap, 1.0)


class TestBackground:
    def test_empty(self, params, rng):
        bg = BackgroundField((), params)
        x = rng.normal(size=(4, 3))
        np.testing.assert_array_equal(background_eval(bg, x), 0.0)
        np.testing.assert_array_equal(background_strain(bg, x), 0.0)

    def test_matches_kelvin_sum(self, background, params, rng):
        x = rng.normal(size=3)
        expected = sum((gamma(x, p.sources()[0], params) - gamma(x, p.sources()[1], params)) @ p.force() for p in background.pairs)
        np.testing.assert_allclose(background_eval(background, x), expected)

    def test_decay(self, params):
        bg = BackgroundField((PointForcePair((0, 0, 0), (1, 0.2, 0), 0.5, 1.0),), params)
        direction = np.array([0.36, 0.48, 0.8])
        r = np.geomspace(1e2, 1e4, 6)
        mags = np.linalg.norm(background_eval(bg, r[:, None] * direction), axis=1)
        scaled = mags * r**2
        assert scaled.max() / scaled.min() < 1.01
        assert fit_slope(r, mags).slope == pytest.approx(-2.0, abs=1e-3)

    def test_lame_residual(self, background, params, rng):
        for x in rng.normal(size=(10, 3)):
            res = lame_residual(lambda q: background_eval(background, q), x, params, 1e-4)
            g = fd_gradient(lambda q: background_eval(background, q), x, 1e-5)
            assert np.abs(res).max() < 1e-6 * np.abs(g).max() / 1e-1

    def test_strain_matches_fd(self, background, rng):
        x = rng.normal(size=(20, 3))
        g = fd_gradient(lambda q: background_eval(background, q), x, 1e-5)
        e = background_strain(background, x)
        np.testing.assert_allclose(e, strain_vector(g), rtol=1e-8, atol=1e-8 * np.abs(e).max())

    @given(st.floats(-5, 5))
    @settings(max_examples=20)
    def test_linear_in_magnitude(self, b):
        from mesovoids.elastic import LameParams

        bg = BackgroundField((PointForcePair((3, 0, 0), (1, 0, 0), 0.5, 1.0),), LameParams(1.0, 1.0))
        x = np.array([0.1, 0.2, -0.3])
        np.testing.assert_allclose(background_strain(bg.scaled(b), x), b * background_strain(bg, x), atol=1e-15)

    def test_singular(self, background):
        with pytest.raises(SingularityError):
            background_eval(background, background.source_points()[0])

    def test_check_sources(self, small_cloud, params):
        near = BackgroundField((PointForcePair((1.5, 0, 0), (1, 0, 0), 0.2, 1.0),), params)
        with pytest.raises(GeometryError):
            check_sources(small_cloud, near)
        assert check_sources(small_cloud, BackgroundField((), params)) == np.inf


class TestAssembly:
    def test_single_void(self, background, params):
        cloud = Cloud((Void((0.1, 0, 0), 0.02),), 0.2, UNIT, params)
        system = assemble_system(cloud, background)
        np.testing.assert_array_equal(system.interaction, 0.0)
        c = solve_coefficients(system)
        np.testing.assert_array_equal(c, -system.rhs_strain)
        np.testing.assert_array_equal(solve_coefficients(system, "neumann"), -system.rhs_strain)

    def test_blocks(self, small_cloud, background):
        system = assemble_system(small_cloud, background)
        n = len(small_cloud)
        p = system.interaction.reshape(n, 6, n, 6)
        for j in range(n):
            np.testing.assert_array_equal(p[j, :, j, :], 0.0)
            for k in range(n):
                if j != k:
                    block = gamma_hessian_kernel(small_cloud.centers[j], small_cloud.centers[k], small_cloud.params)
                    np.testing.assert_allclose(p[j, :, k, :], block, rtol=1e-14)
                    np.testing.assert_allclose(p[j, :, k, :], p[k, :, j, :].T, atol=1e-13 * np.abs(block).max())
        np.testing.assert_allclose(system.dipoles[0], dipole_matrix(0.02, small_cloud.params))
        np.testing.assert_allclose(system.rhs_strain, background_strain(background, small_cloud.centers).ravel())

    def test_coincident_centres(self, background, params):
        cloud = Cloud((Void((0, 0, 0), 0.01), Void((0, 0, 0), 0.01)), 0.2, UNIT, params)
        with pytest.raises(GeometryError):
            assemble_system(cloud, background)

    def test_pm_norm_scales_with_d(self, params, background):
        # shrink the configuration with eps fixed: ||PM|| ~ d^-3
        base = generate_cloud(UNIT, 6, 0.2, 0.01, 11, params)
        s = np.array([1.0, 0.8, 0.6, 0.5, 0.4])
        norms = []
        for f in s:
            voids = tuple(Void(f * c, 0.01) for c in base.centers)
            norms.append(pm_norm(assemble_system(Cloud(voids, f * 0.2, UNIT, params), background)))
        assert fit_slope(s, norms).slope == pytest.approx(-3.0, abs=1e-9)


class TestSolve:
    def test_methods_agree(self, small_cloud, background):
        system = assemble_system(small_cloud, background)
        dense = solve_coefficients(system, "dense")
        neumann = solve_coefficients(system, "neumann")
        np.testing.assert_allclose(neumann, dense, rtol=1e-9, atol=1e-9 * np.abs(dense).max())
        v = system.rhs_strain
        assert np.abs(system.residual(dense)).max() <= 1e-10 * np.abs(v).max()
        np.testing.assert_allclose(system.matrix() @ dense, -v, atol=1e-14)

    def test_dilute_limit(self, params, background):
        base = generate_cloud(UNIT, 8, 0.2, 0.02, 2, params)
        eps = np.array([0.002, 0.004, 0.008, 0.016, 0.032])
        rel = []
        for e in eps:
            system = assemble_system(base.with_radii(e), background)
            c = solve_coefficients(system)
            v = system.rhs_strain
            rel.append(np.linalg.norm(c + v) / np.linalg.norm(v))
        assert fit_slope(eps, rel).slope == pytest.approx(3.0, abs=0.05)

    def test_neumann_refuses_large_norm(self, params, background):
        # artificially huge dipoles
        system = assemble_system(generate_cloud(UNIT, 3, 0.2, 0.02, 0, params), background)
        big = InteractionSystem(system.centers, system.interaction, 1e6 * system.dipoles, system.rhs_strain)
        with pytest.raises(ConvergenceError):
            solve_coefficients(big, "neumann")

    def test_neumann_iteration_cap(self, small_cloud, background):
        system = assemble_system(small_cloud, background)
        with pytest.raises(ConvergenceError):
            solve_coefficients(system, "neumann", tol=0.0, max_terms=3)

    def test_singular_dense(self):
        # P M = -I makes I + P M singular
        system = InteractionSystem(np.zeros((1, 3)), -np.eye(6), np.eye(6)[None], np.ones(6))
        with pytest.raises(NumericalError):
            solve_coefficients(system, "dense")

    def test_unknown_method(self, small_cloud, background):
        with pytest.raises(ValueError):
            solve_coefficients(assemble_system(small_cloud, background), "magic")

    def test_empty(self, params, background):
        system = assemble_system(Cloud((), 0.2, UNIT, params), background)
        assert solve_coefficients(system).size == 0
        assert pm_norm(system) == 0.0

    def test_diagnostics(self, small_cloud, background):
        system = assemble_system(small_cloud, background)
        c = solve_coefficients(system)
        diag = system_diagnostics(system, c)
        assert diag.gate_passed and diag.pm_norm_inf < 1
        assert diag.relative_residual <= 1e-10
        assert 0 < diag.eig_min <= diag.eig_max
        a = 0.02
        p = small_cloud.params
        lo, hi = np.linalg.eigvalsh(-dipole_matrix(1.0, p))[[0, -1]]
        assert diag.eig_min_scaled == pytest.approx(lo) and diag.eig_max == pytest.approx(hi * a**3)
        assert diag.solution_bound == pytest.approx(1.0, abs=1e-3)
        d = diag.to_dict()
        assert d["n_voids"] == 5 and "interaction_constant" in d


def test_dense_rejects_rank_deficient():
    # I + P M with a rank-one defect that is not diagonal
    u = np.ones(6) / np.sqrt(6)
    system = InteractionSystem(np.zeros((1, 3)), -np.outer(u, u), np.eye(6)[None], np.ones(6))
    with pytest.raises(NumericalError):
        solve_coefficients(system, "dense")
