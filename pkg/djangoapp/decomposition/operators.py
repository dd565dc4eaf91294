"""
Linear operators and projections used by the functionals.

Differences are forward differences divided by the grid spacing with a
Neumann boundary: the last difference along each axis is zero. Every
operator comes with its exact transpose so primal-dual iterations converge.
"""
from functools import reduce

import numpy as np
import scipy.sparse as sps


def forward_diff(x: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    """Forward difference along ``axis``, zero in the last slot."""
    out = np.zeros_like(x)
    head = [slice(None)] * x.ndim
    tail = [slice(None)] * x.ndim
    head[axis] = slice(None, -1)
    tail[axis] = slice(1, None)
    out[tuple(head)] = (x[tuple(tail)] - x[tuple(head)]) / spacing
    return out


def forward_diff_adjoint(y: np.ndarray, axis: int,
                         spacing: float) -> np.ndarray:
    """Transpose of ``forward_diff`` along ``axis``."""
    z = np.array(y, copy=True)
    last = [slice(None)] * y.ndim
    last[axis] = -1
    z[tuple(last)] = 0.0
    shifted = np.zeros_like(z)
    dst = [slice(None)] * y.ndim
    src = [slice(None)] * y.ndim
    dst[axis] = slice(1, None)
    src[axis] = slice(None, -1)
    shifted[tuple(dst)] = z[tuple(src)]
    return (shifted - z) / spacing


def grad(x: np.ndarray, spacing: float, axes: tuple[int, ...]) -> np.ndarray:
    """Stack of forward differences along ``axes`` (new leading axis)."""
    return np.stack([forward_diff(x, axis, spacing) for axis in axes])


def grad_adjoint(y: np.ndarray, spacing: float,
                 axes: tuple[int, ...]) -> np.ndarray:
    """Transpose of ``grad``: ``-div``."""
    return reduce(
        np.add,
        (forward_diff_adjoint(y[k], axis, spacing)
         for k, axis in enumerate(axes)),
    )


def grad_norm_bound(spacing: float, n_axes: int) -> float:
    """Upper bound of ||grad||: 2/h in 1D, sqrt(8)/h in 2D."""
    return float(np.sqrt(4.0 * n_axes)) / spacing


def shrink(x: np.ndarray, threshold: float) -> np.ndarray:
    """Soft shrinkage ``sign(x) max(|x| - threshold, 0)``."""
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def project_box(y: np.ndarray, radius: float) -> np.ndarray:
    """Projection onto the ℓ∞ ball: dual of the anisotropic ℓ¹ norm."""
    return np.clip(y, -radius, radius)


def project_pointwise_l2(y: np.ndarray, radius: float) -> np.ndarray:
    """Pointwise projection of the leading-axis vectors onto radius balls."""
    norms = np.sqrt(np.sum(y ** 2, axis=0))
    return y / np.maximum(1.0, norms / radius)


def project_l1_rows(x: np.ndarray, radius: float) -> np.ndarray:
    """
    Project each row of a 2D array onto the ℓ¹ ball of ``radius``.

    Sort-based algorithm: the threshold ``theta`` is fixed by the largest
    prefix of sorted magnitudes that stays above it.
    """
    x = np.atleast_2d(x)
    if radius <= 0:
        return np.zeros_like(x)
    magnitudes = np.abs(x)
    inside = magnitudes.sum(axis=1) <= radius
    ordered = -np.sort(-magnitudes, axis=1)
    cumulative = np.cumsum(ordered, axis=1)
    counts = np.arange(1, x.shape[1] + 1)
    active = ordered - (cumulative - radius) / counts > 0
    rho = np.maximum(active.sum(axis=1), 1)
    rows = np.arange(x.shape[0])
    theta = (cumulative[rows, rho - 1] - radius) / rho
    projected = np.sign(x) * np.maximum(magnitudes - theta[:, None], 0.0)
    return np.where(inside[:, None], x, projected)


def valid_diff(x: np.ndarray, spacing: float) -> np.ndarray:
    """Differences of a 1D array without boundary padding (length n-1)."""
    return np.diff(x) / spacing


def valid_diff_matrix(n: int, spacing: float) -> sps.csr_matrix:
    """Sparse ``valid_diff``: shape (n-1, n)."""
    return sps.diags(
        [-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n),
        format='csr',
    ) / spacing
