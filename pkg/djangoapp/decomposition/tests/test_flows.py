import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from decomposition.core import GEOMETRIC, UNIFORM, Signal, TimeGrid, \
    make_time_grid
from decomposition.exceptions import SolverError
from decomposition.flows import (
    Method, default_time_grid, estimate_extinction_time, run_gradient_flow,
    run_inverse_scale_space, run_variational_path, scale_path,
)
from decomposition.functionals import (
    FunctionalKind, FunctionalSpec, evaluate, prox,
)

TV1D = FunctionalSpec(FunctionalKind.TV1D)
L1_IDENTITY = FunctionalSpec(FunctionalKind.L1_ANALYSIS,
                             transform='identity')
STEP = Signal([1.0, 1.0, -1.0, -1.0])


def shrinking(t):
    return max(1.0 - 0.5 * t, 0.0) * STEP.values


class GradientFlowTests(SimpleTestCase):

    def setUp(self):
        self.grid = make_time_grid(UNIFORM, 0.25, 3.0, 12)

    def test_eigenfunction_shrinks_linearly_and_goes_extinct(self):
        path = run_gradient_flow(STEP, TV1D, self.grid)
        for t, u in zip(path.nodes, path.u):
            assert_allclose(u.values, shrinking(t), atol=1e-12)
        self.assertEqual(path.extinction_index, 7)
        self.assertAlmostEqual(path.extinction_time, 2.0)

    def test_subgradients_are_difference_quotients(self):
        path = run_gradient_flow(STEP, TV1D, self.grid)
        for k, p in enumerate(path.p):
            expected = 0.5 * STEP.values if k <= 7 else np.zeros(4)
            assert_allclose(p.values, expected, atol=1e-12)

    def test_zero_signal(self):
        path = run_gradient_flow(Signal(np.zeros(4)), TV1D, self.grid)
        self.assertTrue(all(u.is_zero() for u in path.u))
        self.assertIsNone(path.extinction_index)

    def test_grid_starting_at_zero_keeps_the_input(self):
        grid = TimeGrid([0.0, 0.5, 1.0])
        path = run_gradient_flow(STEP, TV1D, grid)
        assert_allclose(path.u[0].values, STEP.values)
        assert_allclose(path.u[2].values, shrinking(1.0), atol=1e-12)

    def test_l1_iterated_prox_equals_single_prox(self):
        rng = np.random.default_rng(1)
        f = Signal(rng.standard_normal(16))
        spec = FunctionalSpec(FunctionalKind.L1_ANALYSIS)
        grid = make_time_grid(GEOMETRIC, 0.01, 2.0, 20)
        path = run_gradient_flow(f, spec, grid)
        for t, u in zip(grid.nodes, path.u):
            assert_allclose(u.values, prox(spec, f, t).u.values, atol=1e-10)

    def test_energy_dissipation(self):
        rng = np.random.default_rng(2)
        values = rng.standard_normal(32)
        f = Signal(values - values.mean())
        path = run_gradient_flow(f, TV1D, make_time_grid(UNIFORM, 0.1, 8, 80))
        energies = [evaluate(TV1D, u) for u in path.u]
        norms = [u.norm() for u in path.u]
        self.assertTrue(np.all(np.diff(energies) <= 1e-10))
        self.assertTrue(np.all(np.diff(norms) <= 1e-10))

    def test_solver_error_names_the_step(self):
        rng = np.random.default_rng(0)
        f = Signal(rng.standard_normal((6, 6)))
        spec = FunctionalSpec(FunctionalKind.TV2D_ANISO)
        with self.assertRaises(SolverError) as raised:
            run_gradient_flow(f, spec, self.grid, tol=1e-14, max_iter=10)
        self.assertEqual(raised.exception.step, 0)
        self.assertIn('passo 0', str(raised.exception))


class VariationalPathTests(SimpleTestCase):

    def test_eigenfunction(self):
        grid = make_time_grid(GEOMETRIC, 0.1, 4.0, 15)
        path = run_variational_path(STEP, TV1D, grid)
        for t, u, p in zip(grid.nodes, path.u, path.p):
            assert_allclose(u.values, shrinking(t), atol=1e-12)
            assert_allclose(p.values, (STEP.values - u.values) / t,
                            atol=1e-12)

    def test_small_scale_keeps_the_input(self):
        rng = np.random.default_rng(4)
        f = Signal(rng.standard_normal(16))
        path = run_variational_path(f, TV1D, TimeGrid([1e-6, 1e-3]))
        self.assertLessEqual((path.u[0] - f).norm(), 1e-4 * f.norm())

    def test_soft_shrinkage_node(self):
        grid = TimeGrid([0.75, 1.5, 4.0], GEOMETRIC)
        path = run_variational_path(Signal([3.0, 1.0, 0.5]), L1_IDENTITY,
                                    grid)
        assert_allclose(path.u[0].values, [2.25, 0.25, 0.0])
        assert_allclose(path.u[1].values, [1.5, 0.0, 0.0])
        self.assertEqual(path.extinction_index, 2)


class InverseScaleSpaceTests(SimpleTestCase):

    def test_eigenfunction_jumps_at_its_eigenvalue(self):
        grid = make_time_grid(UNIFORM, 0.15, 1.5, 10)
        path = run_inverse_scale_space(STEP, TV1D, grid)
        step = grid.steps[0]
        for s, v in zip(path.nodes, path.u):
            if s < 0.5:
                assert_allclose(v.values, np.zeros(4), atol=1e-12)
            elif s >= 0.5 + step:
                assert_allclose(v.values, STEP.values, atol=1e-10)

    def test_zero_signal(self):
        grid = make_time_grid(UNIFORM, 0.1, 1.0, 10)
        path = run_inverse_scale_space(Signal(np.zeros(3)), TV1D, grid)
        self.assertTrue(all(v.is_zero() for v in path.u))

    def test_l1_components_appear_at_reciprocal_magnitude(self):
        grid = make_time_grid(UNIFORM, 0.1, 3.0, 30)
        f = Signal([2.0, 0.5])
        path = run_inverse_scale_space(f, L1_IDENTITY, grid)
        step = grid.steps[0]
        for s, v in zip(path.nodes, path.u):
            if s < 0.5:
                self.assertAlmostEqual(v.values[0], 0.0, places=12)
            elif s >= 0.5 + step:
                self.assertAlmostEqual(v.values[0], 2.0, places=10)
            if s < 2.0:
                self.assertAlmostEqual(v.values[1], 0.0, places=12)
        self.assertAlmostEqual(path.u[-1].values[1], 0.5, places=10)

    def test_residual_decreases(self):
        rng = np.random.default_rng(6)
        values = rng.standard_normal(32)
        f = Signal(values - values.mean())
        grid = make_time_grid(UNIFORM, 0.05, 3.0, 60)
        path = run_inverse_scale_space(f, TV1D, grid)
        residuals = [(v - f).norm() for v in path.u]
        self.assertTrue(np.all(np.diff(residuals) <= 1e-10))

    def test_reaches_the_input(self):
        f = Signal([3.0, 1.0, 0.5, -2.0])
        grid = make_time_grid(UNIFORM, 0.5, 4.0, 8)
        path = run_inverse_scale_space(f, L1_IDENTITY, grid)
        self.assertLessEqual((path.u[-1] - f).norm(), 0.01 * f.norm())


class ScalePathTests(SimpleTestCase):

    def test_nullspace_is_split_off(self):
        f = Signal(STEP.values + 3.0)
        grid = make_time_grid(UNIFORM, 0.25, 3.0, 12)
        path = scale_path(f, TV1D, 'gf', grid)
        assert_allclose(path.f.values, STEP.values, atol=1e-12)
        assert_allclose(path.nullspace_signal().values, np.full(4, 3.0))
        self.assertIs(path.method, Method.GF)

    def test_default_grids_follow_the_extinction_time(self):
        self.assertAlmostEqual(estimate_extinction_time(STEP, TV1D), 2.0)
        gf = default_time_grid(STEP, TV1D, Method.GF, 20)
        self.assertAlmostEqual(gf.nodes[-1], 2.1)
        self.assertAlmostEqual(gf.nodes[0], 2.1 / 20)
        vm = default_time_grid(STEP, TV1D, Method.VM, 20)
        self.assertEqual(vm.kind, GEOMETRIC)
        self.assertAlmostEqual(vm.nodes[0], 2.1e-3)
        iss = default_time_grid(STEP, TV1D, Method.IS, 20)
        self.assertAlmostEqual(iss.nodes[0], 1 / 2.1)
        self.assertAlmostEqual(iss.nodes[-1], 20 / 2.1)

    def test_extinction_of_invisible_signals(self):
        self.assertEqual(estimate_extinction_time(Signal(np.zeros(3)), TV1D),
                         1.0)

    def test_default_grid_path_goes_extinct(self):
        path = scale_path(STEP, TV1D, Method.GF, steps=40)
        self.assertEqual(len(path.grid), 40)
        self.assertIsNotNone(path.extinction_index)
        self.assertTrue(path.u[-1].is_zero())

    def test_iteration_budget_reaches_the_extinction_search(self):
        rng = np.random.default_rng(4)
        f = Signal(rng.standard_normal((6, 6)))
        spec = FunctionalSpec(FunctionalKind.TV2D_ISO)
        with self.assertRaises(SolverError) as raised:
            scale_path(f, spec, 'gf', tol=1e-14, max_iter=7, steps=5)
        self.assertEqual(raised.exception.iterations, 7)
        self.assertIsNone(raised.exception.step)
