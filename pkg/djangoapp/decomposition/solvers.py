"""
Numerical kernels behind the proximal operators.

Functions:
    taut_string(y, lam)
        Exact minimizer of 0.5 ||x - y||^2 + lam * sum |x[i+1] - x[i]|.
    primal_dual(...)
        First-order primal-dual iteration with duality-gap stopping.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from decomposition.exceptions import SolverError

logger = logging.getLogger(__name__)


def taut_string(y: np.ndarray, lam: float) -> np.ndarray:
    """
    Direct (taut string) solution of 1D total variation denoising.

    Runs in linear time in most cases. The loop follows the lower and upper
    strings, emitting a constant segment whenever one of them cannot be
    extended any further.
    """
    y = np.asarray(y, dtype=np.float64)
    width = y.size
    x = np.empty(width)
    if width == 0:
        return x
    if lam <= 0:
        return y.copy()
    k = k0 = kplus = kminus = 0
    umin, umax = lam, -lam
    vmin, vmax = y[0] - lam, y[0] + lam
    twolam = 2.0 * lam
    while True:
        while k == width - 1:
            if umin < 0.0:
                while True:
                    x[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = kminus = k0
                vmin = y[k]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    x[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = kplus = k0
                vmax = y[k]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while True:
                    x[k0] = vmin
                    k0 += 1
                    if k0 > k:
                        break
                return x
        umin += y[k + 1] - vmin
        if umin < -lam:
            while True:
                x[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = kplus = kminus = k0
            vmin = y[k]
            vmax = vmin + twolam
            umin, umax = lam, -lam
            continue
        umax += y[k + 1] - vmax
        if umax > lam:
            while True:
                x[k0] = vmax
                k0 += 1
                if k0 > kplus:
                    break
            k = kplus = kminus = k0
            vmax = y[k]
            vmin = vmax - twolam
            umin, umax = lam, -lam
            continue
        k += 1
        if umin >= lam:
            kminus = k
            vmin += (umin - lam) / (kminus - k0 + 1)
            umin = lam
        if umax <= -lam:
            kplus = k
            vmax += (umax + lam) / (kplus - k0 + 1)
            umax = -lam


@dataclass
class PrimalDualResult:
    x: np.ndarray
    y: np.ndarray
    iterations: int
    gap: float


def primal_dual(
    x0: np.ndarray,
    y0: np.ndarray,
    apply: Callable[[np.ndarray], np.ndarray],
    adjoint: Callable[[np.ndarray], np.ndarray],
    prox_primal: Callable[[np.ndarray, float], np.ndarray],
    project_dual: Callable[[np.ndarray], np.ndarray],
    gap: Callable[[np.ndarray, np.ndarray], float],
    norm_bound: float,
    tol: float,
    max_iter: int,
    strong_convexity: float = 0.0,
    check_every: int = 10,
    label: Optional[str] = None,
) -> PrimalDualResult:
    """
    Chambolle-Pock iteration for ``min_x G(x) + F(Kx)``.

    ``prox_primal`` is the prox of G, ``project_dual`` the prox of F*
    (a projection for the norms used here). With ``strong_convexity > 0``
    the accelerated step-size rule is used. ``gap`` must return the
    normalized duality gap of a primal/dual pair; the loop stops as soon as
    it drops to ``tol``.

    Raises:
        SolverError: ``max_iter`` reached above tolerance.
    """
    tau = sigma = 0.99 / norm_bound
    x = np.array(x0, dtype=np.float64, copy=True)
    x_bar = x.copy()
    y = project_dual(np.array(y0, dtype=np.float64, copy=True))
    current = float('inf')
    for iteration in range(1, max_iter + 1):
        y = project_dual(y + sigma * apply(x_bar))
        x_new = prox_primal(x - tau * adjoint(y), tau)
        theta = 1.0
        if strong_convexity > 0:
            theta = 1.0 / np.sqrt(1.0 + 2.0 * strong_convexity * tau)
            tau *= theta
            sigma /= theta
        x_bar = x_new + theta * (x_new - x)
        x = x_new
        if iteration % check_every == 0 or iteration == max_iter:
            current = gap(x, y)
            if current <= tol:
                logger.debug('%s: gap %.3e after %d iterations',
                             label or 'primal-dual', current, iteration)
                return PrimalDualResult(x, y, iteration, current)
    raise SolverError(
        f'{label or "primal-dual"} não convergiu: gap {current:.3e} > '
        f'{tol:.1e} após {max_iter} iterações',
        residual=current, iterations=max_iter,
    )
