import numpy as np
from django.test import SimpleTestCase, tag
from numpy.testing import assert_allclose
from scipy.fft import dct, idct

from decomposition import operators
from decomposition.core import Signal
from decomposition.exceptions import ParameterError, SolverError
from decomposition.functionals import (
    FunctionalKind, FunctionalSpec, Transform, evaluate, prox,
    register_transform, subgradient_at_zero_scale,
)
from decomposition.oracles import bruteforce_prox
from decomposition.solvers import taut_string
from decomposition.synthetic import piecewise_linear

TV1D = FunctionalSpec(FunctionalKind.TV1D)
L1_IDENTITY = FunctionalSpec(FunctionalKind.L1_ANALYSIS,
                             transform='identity')
COLLAB = FunctionalSpec(FunctionalKind.COLLAB_LINF1)


class FunctionalSpecTests(SimpleTestCase):

    def test_parse(self):
        spec = FunctionalSpec.parse('tgv2:beta=0.05')
        self.assertIs(spec.kind, FunctionalKind.TGV2)
        self.assertEqual(spec.beta, 0.05)
        self.assertEqual(spec.label(), 'tgv2:beta=0.05')
        spec = FunctionalSpec.parse('l1:transform=identity')
        self.assertEqual(spec.transform, 'identity')

    def test_invalid_parameters(self):
        for text in ('tgv2', 'tgv2:beta=1.5', 'tgv2:beta=0', 'tv1d:beta=0.5',
                     'tv1d:foo=1', 'tv3d', 'l1:transform=wavelet',
                     'tgv2:beta=abc'):
            with self.subTest(text=text):
                with self.assertRaises(ParameterError):
                    FunctionalSpec.parse(text)

    def test_non_orthonormal_transform_is_rejected(self):
        doubling = Transform('doubling', lambda x: 2 * x, lambda z: z / 2)
        with self.assertRaises(ParameterError):
            register_transform(doubling)


class EvaluateTests(SimpleTestCase):

    def test_tv1d_single_jump(self):
        self.assertAlmostEqual(
            evaluate(TV1D, Signal([1.0, 1.0, -1.0, -1.0])), 2.0,
        )

    def test_tv1d_does_not_depend_on_spacing(self):
        self.assertAlmostEqual(
            evaluate(TV1D, Signal([1.0, 1.0, -1.0, -1.0], 0.5)), 2.0,
        )

    def test_zero_for_every_kind(self):
        cases = {
            'tv1d': np.zeros(5), 'tv2d': np.zeros((3, 3)),
            'tv2d_iso': np.zeros((3, 3)), 'l1': np.zeros(5),
            'tgv2:beta=0.3': np.zeros(5), 'collab': np.zeros((3, 2)),
            'gradcollab': np.zeros((3, 2)),
        }
        for text, values in cases.items():
            with self.subTest(functional=text):
                spec = FunctionalSpec.parse(text)
                self.assertEqual(evaluate(spec, Signal(values)), 0.0)

    def test_collaborative_rows_are_groups(self):
        u = Signal([[3.0, -1.0], [0.0, 2.0]])
        self.assertAlmostEqual(evaluate(COLLAB, u), 5.0)

    def test_gradcollab_takes_the_largest_jump_per_row(self):
        u = Signal([[0.0, 0.0], [1.0, -3.0], [1.0, -3.0]])
        spec = FunctionalSpec(FunctionalKind.GRAD_COLLAB_LINF1)
        self.assertAlmostEqual(evaluate(spec, u), 3.0)

    def test_tv2d_isotropic_versus_anisotropic(self):
        u = Signal([[0.0, 1.0], [1.0, 1.0]])
        aniso = evaluate(FunctionalSpec(FunctionalKind.TV2D_ANISO), u)
        iso = evaluate(FunctionalSpec(FunctionalKind.TV2D_ISO), u)
        self.assertAlmostEqual(aniso, 2.0)
        self.assertAlmostEqual(iso, np.sqrt(2.0))

    def test_tgv_of_a_jump_and_of_a_ramp(self):
        spec = FunctionalSpec(FunctionalKind.TGV2, beta=0.3)
        self.assertAlmostEqual(
            evaluate(spec, Signal([0.0, 0.0, 1.0, 1.0])), 0.3, places=7,
        )
        self.assertAlmostEqual(
            evaluate(spec, Signal(0.5 * np.arange(6) - 1.0)), 0.0, places=9,
        )

    def test_dimension_mismatch(self):
        with self.assertRaises(ParameterError):
            evaluate(TV1D, Signal(np.ones((2, 2))))
        with self.assertRaises(ParameterError):
            evaluate(FunctionalSpec(FunctionalKind.TV2D_ANISO),
                     Signal(np.ones(4)))


class ProxTests(SimpleTestCase):

    def test_soft_shrinkage(self):
        result = prox(L1_IDENTITY, Signal([3.0, 1.0, 0.5]), 2.0)
        assert_allclose(result.u.values, [1.0, 0.0, 0.0])
        assert_allclose(result.p.values, [1.0, 0.5, 0.25])

    def test_dct_shrinkage(self):
        values = np.array([1.0, 4.0, -2.0, 0.5, 3.0])
        spec = FunctionalSpec(FunctionalKind.L1_ANALYSIS)
        result = prox(spec, Signal(values), 0.7)
        expected = idct(operators.shrink(dct(values, norm='ortho'), 0.7),
                        norm='ortho')
        assert_allclose(result.u.values, expected, atol=1e-12)

    def test_eigenfunction_vanishes_at_extinction(self):
        result = prox(TV1D, Signal([1.0, 1.0, -1.0, -1.0]), 2.0)
        assert_allclose(result.u.values, np.zeros(4), atol=1e-12)

    def test_eigenfunction_shrinks_linearly(self):
        f = Signal([1.0, 1.0, -1.0, -1.0])
        result = prox(TV1D, f, 0.5)
        assert_allclose(result.u.values, 0.75 * f.values)

    def test_collaborative_single_row(self):
        result = prox(COLLAB, Signal([3.0, -1.0]), 1.0)
        assert_allclose(result.u.values, [2.0, -1.0])

    def test_collaborative_rows_are_independent(self):
        result = prox(COLLAB, Signal([[3.0, -1.0], [0.2, 0.1]]), 1.0)
        assert_allclose(result.u.values, [[2.0, -1.0], [0.0, 0.0]])

    def test_zero_input(self):
        for text, values in (('tv1d', np.zeros(4)),
                             ('tv2d', np.zeros((3, 3)))):
            result = prox(FunctionalSpec.parse(text), Signal(values), 1.0)
            self.assertTrue(result.u.is_zero())
            self.assertTrue(result.p.is_zero())

    def test_invalid_scale_or_tolerance(self):
        f = Signal([1.0, -1.0])
        for t, tol in ((0.0, 1e-8), (-1.0, 1e-8), (1.0, 0.0)):
            with self.subTest(t=t, tol=tol):
                with self.assertRaises(ParameterError):
                    prox(TV1D, f, t, tol)

    def test_subgradient_pairs_with_the_minimizer(self):
        rng = np.random.default_rng(3)
        f = Signal(rng.standard_normal(32))
        result = prox(TV1D, f, 0.8)
        self.assertAlmostEqual(evaluate(TV1D, result.u),
                               result.p.inner(result.u), places=8)

    def test_taut_string_small_case(self):
        assert_allclose(taut_string(np.array([1.0, 1.0, -1.0, -1.0]), 0.1),
                        [0.95, 0.95, -0.95, -0.95])
        assert_allclose(taut_string(np.array([0.0, 3.0, 0.0]), 0.5),
                        [0.5, 2.0, 0.5])

    def test_tv2d_reduces_to_1d_on_layered_images(self):
        profile = np.array([0.0, 2.0, 1.5, -1.0, -1.0, 0.5])
        values = np.tile(profile[:, None], (1, 4))
        expected = taut_string(profile, 0.6)
        for kind in (FunctionalKind.TV2D_ANISO, FunctionalKind.TV2D_ISO):
            with self.subTest(kind=kind):
                result = prox(FunctionalSpec(kind), Signal(values), 0.6,
                              tol=1e-10, max_iter=500_000)
                assert_allclose(result.u.values,
                                np.tile(expected[:, None], (1, 4)),
                                atol=2e-4)

    def test_gradcollab_single_column_is_tv1d(self):
        profile = np.array([1.0, 3.0, -2.0, -2.0, 0.0])
        spec = FunctionalSpec(FunctionalKind.GRAD_COLLAB_LINF1)
        result = prox(spec, Signal(profile[:, None]), 0.4, tol=1e-10,
                      max_iter=500_000)
        assert_allclose(result.u.values[:, 0], taut_string(profile, 0.4),
                        atol=1e-4)

    def test_tgv_keeps_affine_signals(self):
        ramp = Signal(0.3 * np.arange(8) - 1.0)
        spec = FunctionalSpec(FunctionalKind.TGV2, beta=0.2)
        result = prox(spec, ramp, 5.0)
        assert_allclose(result.u.values, ramp.values, atol=1e-6)

    def test_warm_start_reaches_the_same_minimizer(self):
        rng = np.random.default_rng(5)
        f = Signal(rng.standard_normal((6, 6)))
        spec = FunctionalSpec(FunctionalKind.TV2D_ISO)
        first = prox(spec, f, 0.3, tol=1e-8)
        cold = prox(spec, f, 0.4, tol=1e-8)
        warm = prox(spec, f, 0.4, tol=1e-8, warm_start=first.state)
        assert_allclose(warm.u.values, cold.u.values, atol=2e-3)

    def test_solver_error_carries_the_residual(self):
        rng = np.random.default_rng(0)
        f = Signal(rng.standard_normal((8, 8)))
        spec = FunctionalSpec(FunctionalKind.TV2D_ANISO)
        with self.assertRaises(SolverError) as raised:
            prox(spec, f, 1.0, tol=1e-14, max_iter=10)
        self.assertEqual(raised.exception.iterations, 10)
        self.assertGreater(raised.exception.residual, 1e-14)


class SubgradientTests(SimpleTestCase):

    def test_eigenfunction(self):
        p = subgradient_at_zero_scale(TV1D, Signal([1.0, 1.0, -1.0, -1.0]),
                                      0.1)
        assert_allclose(p.values, [0.5, 0.5, -0.5, -0.5])

    def test_sign_pattern(self):
        p = subgradient_at_zero_scale(L1_IDENTITY, Signal([3.0, 1.0, 0.5]),
                                      0.1)
        assert_allclose(p.values, [1.0, 1.0, 1.0])

    def test_zero(self):
        p = subgradient_at_zero_scale(TV1D, Signal(np.zeros(4)), 0.1)
        self.assertTrue(p.is_zero())


class BruteForceAgreementTests(SimpleTestCase):

    def test_tv1d_matches_on_a_few_instances(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            f = Signal(rng.standard_normal(4))
            t = float(rng.uniform(0.1, 1.5))
            expected = bruteforce_prox(TV1D, f, t).values
            assert_allclose(prox(TV1D, f, t).u.values, expected, atol=1e-3)

    @tag('slow')
    def test_tv1d_matches_on_fifty_instances(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            f = Signal(rng.standard_normal(4))
            t = float(rng.uniform(0.05, 2.0))
            expected = bruteforce_prox(TV1D, f, t).values
            assert_allclose(prox(TV1D, f, t).u.values, expected, atol=1e-3)

    def test_collaborative(self):
        f = Signal([[1.5, -0.5], [0.3, 2.0]])
        expected = bruteforce_prox(COLLAB, f, 0.8).values
        assert_allclose(prox(COLLAB, f, 0.8).u.values, expected, atol=1e-3)

    @tag('slow')
    def test_fifty_instances_per_functional(self):
        cases = (
            (FunctionalSpec(FunctionalKind.TV2D_ANISO), (2, 2), 1),
            (FunctionalSpec(FunctionalKind.TV2D_ISO), (2, 2), 1),
            (FunctionalSpec(FunctionalKind.GRAD_COLLAB_LINF1), (2, 2), 1),
            (COLLAB, (2, 2), 8),
            (L1_IDENTITY, (4,), 8),
            (FunctionalSpec(FunctionalKind.TGV2, beta=0.4), (4,), 0),
        )
        rng = np.random.default_rng(13)
        for spec, shape, restarts in cases:
            for index in range(50):
                f = Signal(rng.standard_normal(shape))
                t = float(rng.uniform(0.05, 2.0))
                with self.subTest(spec=spec.label(), index=index):
                    expected = bruteforce_prox(spec, f, t,
                                               restarts=restarts).values
                    result = prox(spec, f, t, tol=1e-10, max_iter=500_000)
                    assert_allclose(result.u.values, expected, atol=1e-3)


def sample(kind, rng):
    if kind in (FunctionalKind.TV1D, FunctionalKind.TGV2):
        return Signal(rng.standard_normal(12))
    if kind is FunctionalKind.L1_ANALYSIS:
        return Signal(rng.standard_normal(10))
    return Signal(rng.standard_normal((4, 3)))


def spec_for(kind):
    if kind is FunctionalKind.TGV2:
        return FunctionalSpec(kind, beta=0.3)
    return FunctionalSpec(kind)


class HomogeneityTests(SimpleTestCase):

    def test_value_scales_with_the_absolute_factor(self):
        rng = np.random.default_rng(21)
        for kind in FunctionalKind:
            spec = spec_for(kind)
            u = sample(kind, rng)
            value = evaluate(spec, u)
            for c in (-2.0, -1.0, 0.5, 3.0):
                with self.subTest(kind=kind, c=c):
                    self.assertAlmostEqual(evaluate(spec, u * c),
                                           abs(c) * value,
                                           delta=1e-8 * (1.0 + value))

    def test_prox_scaling_law(self):
        rng = np.random.default_rng(22)
        for kind in (FunctionalKind.TV1D, FunctionalKind.L1_ANALYSIS,
                     FunctionalKind.COLLAB_LINF1, FunctionalKind.TGV2):
            spec = spec_for(kind)
            f = sample(kind, rng)
            base = prox(spec, f, 0.4, tol=1e-10).u
            for c in (0.5, 3.0):
                with self.subTest(kind=kind, c=c):
                    scaled = prox(spec, f * c, 0.4 * c, tol=1e-10).u
                    assert_allclose(scaled.values, c * base.values,
                                    atol=1e-5 * c * f.norm())

    def test_prox_norm_decreases_with_the_scale(self):
        rng = np.random.default_rng(23)
        scales = np.geomspace(0.01, 20.0, 15)
        for kind in (FunctionalKind.TV1D, FunctionalKind.L1_ANALYSIS,
                     FunctionalKind.COLLAB_LINF1, FunctionalKind.TGV2):
            spec = spec_for(kind)
            f = sample(kind, rng)
            norms = [prox(spec, f, t, tol=1e-10).u.norm() for t in scales]
            with self.subTest(kind=kind):
                self.assertTrue(np.all(np.diff(norms) <= 1e-7 * f.norm()))

    def test_soft_shrinkage_is_a_semigroup(self):
        rng = np.random.default_rng(24)
        for transform in ('identity', 'dct'):
            spec = FunctionalSpec(FunctionalKind.L1_ANALYSIS,
                                  transform=transform)
            f = Signal(rng.standard_normal(16))
            for s, t in ((0.1, 0.3), (0.5, 0.25), (1.0, 2.0)):
                with self.subTest(transform=transform, s=s, t=t):
                    twice = prox(spec, prox(spec, f, s).u, t).u
                    once = prox(spec, f, s + t).u
                    assert_allclose(twice.values, once.values, atol=1e-12)


class SubgradientInequalityTests(SimpleTestCase):

    def test_prox_subgradient_bounds_the_functional(self):
        rng = np.random.default_rng(31)
        t = 0.5
        for kind in FunctionalKind:
            spec = spec_for(kind)
            f = sample(kind, rng)
            p = prox(spec, f, t, tol=1e-10, max_iter=500_000).p
            slack = 1e-4 * f.norm() / t
            for index in range(100):
                v = f.like(rng.standard_normal(f.shape))
                with self.subTest(kind=kind, index=index):
                    self.assertGreaterEqual(
                        evaluate(spec, v) - p.inner(v), -slack * v.norm()
                    )

    def test_primal_dual_subgradient_pairs_with_the_minimizer(self):
        rng = np.random.default_rng(32)
        for kind in (FunctionalKind.TV2D_ANISO, FunctionalKind.TV2D_ISO,
                     FunctionalKind.GRAD_COLLAB_LINF1, FunctionalKind.TGV2):
            spec = spec_for(kind)
            f = sample(kind, rng)
            result = prox(spec, f, 0.5, tol=1e-10, max_iter=500_000)
            with self.subTest(kind=kind):
                self.assertAlmostEqual(
                    evaluate(spec, result.u), result.p.inner(result.u),
                    delta=1e-3 * (1.0 + evaluate(spec, f)),
                )


@tag('slow')
class SecondOrderLargeScaleTests(SimpleTestCase):

    def test_prox_converges_at_large_scales(self):
        f = piecewise_linear(256, noise=0.1, seed=0)
        spec = FunctionalSpec(FunctionalKind.TGV2, beta=0.05)
        norm = f.norm() ** 2
        for t in (5.0, 50.0, 500.0):
            with self.subTest(t=t):
                result = prox(spec, f, t, tol=1e-8)
                self.assertLessEqual(result.residual, 1e-8)
                self.assertAlmostEqual(evaluate(spec, result.u),
                                       result.p.inner(result.u),
                                       delta=1e-6 * norm)
                self.assertLessEqual(result.u.norm(), f.norm())
