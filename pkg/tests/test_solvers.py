"""Krylov solver and preconditioner tests."""

import numpy as np
import pytest

from surface_calc.geometry import build_metric, evaluate_surface, flat_metric
from surface_calc.operators import (
    TangentField,
    cross_normal,
    curl,
    div,
    inner_product_scalar,
    inner_product_vector,
    scalar_norm,
    vector_norm,
)
from surface_calc.solvers import (
    KrylovConfig,
    NonConvergenceError,
    _perturbed_nullspace_solve,
    bicgstab,
    flat_field_apply,
    flat_field_pseudoinverse,
    flat_lb_apply,
    flat_lb_inverse,
    harmonic_basis,
    solve_laplace_beltrami,
)
from surface_calc.spectral import Grid, dft2_forward, dft2_inverse


class TestKrylovConfig:
    def test_defaults(self):
        cfg = KrylovConfig()
        assert cfg.rel_tolerance == 1e-13
        assert cfg.max_iterations == 500

    def test_validation(self):
        with pytest.raises(ValueError):
            KrylovConfig(rel_tolerance=0.0)
        with pytest.raises(ValueError):
            KrylovConfig(max_iterations=0)


class TestBicgstab:
    def test_identity_converges_immediately(self):
        b = np.random.default_rng(0).standard_normal(50)
        x, report = bicgstab(lambda v: v, None, b, KrylovConfig())
        assert report.iterations <= 1
        assert np.allclose(x, b, atol=1e-13)

    def test_diagonal_system_matches_elementwise_division(self):
        rng = np.random.default_rng(1)
        diag = np.arange(1.0, 11.0)
        b = rng.standard_normal(10)
        x, report = bicgstab(lambda v: diag * v, None, b, KrylovConfig())
        assert np.abs(x - b / diag).max() <= 1e-12
        assert report.final_relative_residual <= 1e-13

    def test_exact_preconditioner_converges_in_two_steps(self):
        grid = Grid(23)
        rng = np.random.default_rng(2)
        b = rng.standard_normal((23, 23))

        def apply_op(vec):
            return flat_lb_apply(grid, vec.reshape(23, 23)).ravel()

        def precond(vec):
            return flat_lb_inverse(grid, vec.reshape(23, 23)).ravel()

        x, report = bicgstab(apply_op, precond, b.ravel(), KrylovConfig())
        assert report.iterations <= 2
        assert np.abs(apply_op(x) - b.ravel()).max() <= 1e-11 * np.abs(b).max()

    def test_dense_system_matches_direct_solve(self):
        rng = np.random.default_rng(3)
        a = np.eye(30) + 0.1 * rng.standard_normal((30, 30))
        b = rng.standard_normal(30)
        want = np.linalg.solve(a, b)
        x, _ = bicgstab(lambda v: a @ v, None, b, KrylovConfig())
        assert np.abs(x - want).max() <= 1e-11 * np.abs(want).max()

    def test_zero_rhs(self):
        x, report = bicgstab(lambda v: 2 * v, None, np.zeros(7), KrylovConfig())
        assert report.iterations == 0
        assert np.all(x == 0.0)

    def test_budget_exhaustion_raises(self):
        rng = np.random.default_rng(4)
        diag = np.linspace(1.0, 1e6, 200)  # badly conditioned
        b = rng.standard_normal(200)
        with pytest.raises(NonConvergenceError):
            bicgstab(lambda v: diag * v, None, b, KrylovConfig(max_iterations=3))


class TestFlatScalarPreconditioner:
    def test_inverse_property_random(self):
        grid = Grid(23)
        f = np.random.default_rng(5).standard_normal((23, 23))
        back = flat_lb_inverse(grid, flat_lb_apply(grid, f))
        assert np.abs(back - f).max() <= 1e-12 * np.abs(f).max()

    def test_single_mode(self):
        grid = Grid(23)
        f = np.cos(3 * grid.u_mesh)
        assert np.abs(flat_lb_inverse(grid, f) + f / 9.0).max() <= 1e-13

    def test_constant_rhs_inverse_property(self):
        grid = Grid(11)
        result = flat_lb_inverse(grid, np.ones((11, 11)))
        assert np.abs(flat_lb_apply(grid, result) - 1.0).max() <= 1e-12

    def test_matches_discrete_flat_operator(self, flat_metric_23):
        # dual route: the symbol-based stabilized operator against the
        # composition div(grad .) + ones ones^T on the flat metric
        grid = flat_metric_23.grid
        from surface_calc.operators import grad, laplace_beltrami

        f = np.random.default_rng(6).standard_normal((23, 23))
        via_symbol = flat_lb_apply(grid, f)
        via_operators = laplace_beltrami(flat_metric_23, f) + f.sum()
        assert np.abs(via_symbol - via_operators).max() <= 1e-10 * np.abs(via_symbol).max()


class TestFlatFieldPseudoinverse:
    def test_composition_is_identity_on_zero_mean_fields(self):
        grid = Grid(23)
        rng = np.random.default_rng(7)
        f1 = rng.standard_normal((23, 23))
        f2 = rng.standard_normal((23, 23))
        f1 -= f1.mean()
        f2 -= f2.mean()
        field = TangentField(f1, f2)
        back = flat_field_pseudoinverse(grid, flat_field_apply(grid, field))
        assert np.abs(back.f1 - f1).max() <= 1e-12 * np.abs(f1).max()
        assert np.abs(back.f2 - f2).max() <= 1e-12 * np.abs(f2).max()
        forth = flat_field_apply(grid, flat_field_pseudoinverse(grid, field))
        assert np.abs(forth.f1 - f1).max() <= 1e-12 * np.abs(f1).max()

    def test_constant_field_unchanged(self):
        grid = Grid(11)
        field = TangentField(np.full((11, 11), 2.0), np.full((11, 11), -3.0))
        out = flat_field_pseudoinverse(grid, field)
        assert np.abs(out.f1 - 2.0).max() <= 1e-13
        assert np.abs(out.f2 + 3.0).max() <= 1e-13

    def test_single_mode_against_dense_solve(self):
        grid = Grid(11)
        field = TangentField(np.cos(grid.u_mesh), np.zeros((11, 11)))
        out = flat_field_pseudoinverse(grid, field)
        # per-mode oracle: solve the dense 2x2 block at (m, n) = (+-1, 0)
        out1 = np.zeros((11, 11), dtype=complex)
        out2 = np.zeros((11, 11), dtype=complex)
        for m in (1, -1):
            block = np.array([[1j * m, 0.0], [0.0, 1j * m]])
            sol = np.linalg.solve(block, np.array([0.5, 0.0]))
            out1[0, m % 11], out2[0, m % 11] = sol
        want1 = dft2_inverse(out1)
        want2 = dft2_inverse(out2)
        assert np.abs(out.f1 - want1).max() <= 1e-13
        assert np.abs(out.f2 - want2).max() <= 1e-13


class TestSolveLaplaceBeltrami:
    def test_torus_analytic_solution(self, torus_metric_95):
        m = torus_metric_95
        u, v = m.grid.u_mesh, m.grid.v_mesh
        b = -np.sin(v) / (3 + np.cos(u)) ** 2
        phi, report = solve_laplace_beltrami(m, b)
        err = scalar_norm(m, phi - np.sin(v)) / scalar_norm(m, np.sin(v))
        assert err <= 1e-10
        assert report.final_relative_residual <= 1e-13

    def test_zero_rhs_gives_zero(self, stell_metric_47):
        phi, report = solve_laplace_beltrami(stell_metric_47, np.zeros((47, 47)))
        assert np.all(phi == 0.0)
        assert report.iterations == 0

    def test_solution_is_mean_zero(self, stell_metric_47):
        m = stell_metric_47
        u, v = m.grid.u_mesh, m.grid.v_mesh
        psi = np.cos(u) + np.sin(2 * v)
        from surface_calc.operators import laplace_beltrami

        b = laplace_beltrami(m, psi)
        phi, _ = solve_laplace_beltrami(m, b)
        ones = np.ones_like(phi)
        mean = inner_product_scalar(m, phi, ones) / m.area
        assert abs(mean) <= 1e-10 * scalar_norm(m, phi)

    def test_warns_on_mean_component(self, stell_metric_47):
        m = stell_metric_47
        b = 1.0 + np.sin(m.grid.v_mesh)
        with pytest.warns(UserWarning, match="mean component"):
            _, report = solve_laplace_beltrami(m, b)
        assert report.dropped_mean > 1e-10

    def test_nonconvergence_raises(self, stell_metric_47):
        b = np.sin(stell_metric_47.grid.v_mesh)
        b -= inner_product_scalar(stell_metric_47, b, np.ones_like(b)) / stell_metric_47.area
        with pytest.raises(NonConvergenceError):
            solve_laplace_beltrami(stell_metric_47, b, KrylovConfig(max_iterations=2))


class TestHarmonicBasis:
    def test_stellarator_residuals(self, stell_metric_47):
        h1, h2, report = harmonic_basis(stell_metric_47, KrylovConfig(rng_seed=11))
        m = stell_metric_47
        assert abs(vector_norm(m, h1) - 1.0) <= 1e-12
        assert scalar_norm(m, div(m, h1)) <= 1e-7
        assert scalar_norm(m, curl(m, h1)) <= 1e-7
        # second basis vector is harmonic at the same scale
        assert scalar_norm(m, div(m, h2)) <= 1e-7
        assert scalar_norm(m, curl(m, h2)) <= 1e-7

    def test_determinism(self, stell_metric_47):
        cfg = KrylovConfig(rng_seed=42)
        h1a, _, _ = harmonic_basis(stell_metric_47, cfg)
        h1b, _, _ = harmonic_basis(stell_metric_47, cfg)
        assert np.array_equal(h1a.f1, h1b.f1)
        assert np.array_equal(h1a.f2, h1b.f2)

    def test_nullspace_orthogonality_identity(self, stell_metric_47):
        cfg = KrylovConfig(rng_seed=13)
        f_vec, _, s_mat, _ = _perturbed_nullspace_solve(stell_metric_47, cfg)
        assert np.linalg.norm(s_mat.T @ f_vec) <= 1e-8 * np.linalg.norm(f_vec)

    def test_surface_of_revolution_known_direction(self, revolution_metric_95):
        m = revolution_metric_95
        h1, h2, _ = harmonic_basis(m, KrylovConfig(rng_seed=3))
        w = TangentField(np.zeros((95, 95)), 1.0 / m.gvv)
        w = w * (1.0 / vector_norm(m, w))
        w_perp = cross_normal(m, w)
        # project h1 onto span{w, n x w} via the 2x2 Gram system
        g11 = inner_product_vector(m, w, w)
        g12 = inner_product_vector(m, w, w_perp)
        g22 = inner_product_vector(m, w_perp, w_perp)
        b1 = inner_product_vector(m, w, h1)
        b2 = inner_product_vector(m, w_perp, h1)
        det = g11 * g22 - g12**2
        c1 = (g22 * b1 - g12 * b2) / det
        c2 = (-g12 * b1 + g11 * b2) / det
        residual = h1 - (c1 * w + c2 * w_perp)
        assert vector_norm(m, residual) <= 1e-8

    def test_flat_torus_harmonic_fields_are_constant(self):
        metric = flat_metric(Grid(23))
        h1, _, _ = harmonic_basis(metric, KrylovConfig(rng_seed=5))
        assert h1.f1.std() <= 1e-9
        assert h1.f2.std() <= 1e-9
