"""
End-to-end scenarios on the synthetic generators.
"""
import numpy as np
from django.test import SimpleTestCase, tag
from numpy.testing import assert_allclose
from scipy.fft import dct

from decomposition.core import UNIFORM, make_time_grid
from decomposition.functionals import FunctionalKind, FunctionalSpec
from decomposition.oracles import dct_hard_threshold
from decomposition.pipeline import decompose
from decomposition.spectral import TransferFunction, apply_filter
from decomposition.synthetic import (
    collaborative_jumps, collaborative_peaks, piecewise_linear,
    sinusoid_mixture,
)


class SinusoidDenoisingTests(SimpleTestCase):

    def test_low_pass_is_hard_thresholding(self):
        f = sinusoid_mixture(128, noise=0.05, seed=0)
        clean = sinusoid_mixture(128, noise=0.0, seed=0)
        noise = dct(f.values - clean.values, norm='ortho')
        self.assertLess(np.max(np.abs(noise)), 0.25)
        spec = FunctionalSpec(FunctionalKind.L1_ANALYSIS)
        grid = make_time_grid(UNIFORM, 0.05, 5.0, 100)
        _, dec = decompose(f, spec, 'gf', grid)
        filtered = apply_filter(dec, TransferFunction.low_pass(0.3))
        assert_allclose(filtered.values,
                        dct_hard_threshold(f, 0.3).values, atol=1e-10)
        self.assertLess((filtered - clean).norm(), 0.5 * (f - clean).norm())


class CollaborativeTests(SimpleTestCase):

    def test_low_pass_keeps_the_common_support(self):
        f = collaborative_peaks(seed=0)
        clean = collaborative_peaks(noise=0.0, seed=0)
        support = np.flatnonzero(np.any(clean.values != 0, axis=1))
        spec = FunctionalSpec(FunctionalKind.COLLAB_LINF1)
        grid = make_time_grid(UNIFORM, 0.25, 25.0, 100)
        _, dec = decompose(f, spec, 'vm', grid)
        filtered = apply_filter(dec, TransferFunction.low_pass(2.9))
        rows = np.max(np.abs(filtered.values), axis=1)
        self.assertEqual(list(np.flatnonzero(rows > 0.1 * rows.max())),
                         list(support))
        others = np.setdiff1d(np.arange(rows.size), support)
        assert_allclose(rows[others], 0.0, atol=1e-9)

    @tag('slow')
    def test_low_pass_keeps_one_shared_jump(self):
        f = collaborative_jumps(seed=0)
        clean = collaborative_jumps(noise=0.0, seed=0)
        jump = int(np.flatnonzero(np.any(np.diff(clean.values, axis=0) != 0,
                                          axis=1))[0])
        spec = FunctionalSpec(FunctionalKind.GRAD_COLLAB_LINF1)
        grid = make_time_grid(UNIFORM, 2.5, 10.0, 4)
        _, dec = decompose(f, spec, 'vm', grid, tol=1e-7,
                           max_iter=2_000_000)
        filtered = apply_filter(dec, TransferFunction.low_pass(5.0))
        steps = np.abs(np.diff(filtered.values, axis=0))
        largest = steps.max()
        self.assertTrue(np.all(steps[jump] > 0.05))
        others = np.delete(steps, jump, axis=0)
        self.assertLessEqual(others.max(), 1e-2 * largest)


class PiecewiseLinearTests(SimpleTestCase):

    @tag('slow')
    def test_inverse_scale_space_denoises(self):
        f = piecewise_linear(256, noise=0.1, seed=0)
        clean = piecewise_linear(256, noise=0.0, seed=0)
        noise_level = (f - clean).norm()
        spec = FunctionalSpec(FunctionalKind.TGV2, beta=0.05)
        path, _ = decompose(f, spec, 'iss', tol=1e-5, max_iter=500_000,
                            steps=60)
        affine = path.nullspace_signal()
        estimates = [v + affine for v in path.u]
        chosen = next((u for u in estimates
                       if (f - u).norm() <= noise_level), estimates[-1])
        self.assertLessEqual((chosen - clean).norm(), 0.5 * noise_level)
