"""
Scale paths of a signal under a one-homogeneous functional.

Three methods sample a trajectory on a TimeGrid:

* gradient flow (``gf``): backward Euler, one prox per step, ``u(0) = f``;
* variational path (``vm``): an independent prox per node, ``u(0) = f``;
* inverse scale space (``iss``): Bregman iteration from ``v(0) = 0``.

The first stored node is reached from time 0 with a step of length
``nodes[0]``; grids may start at 0 in which case node 0 holds the initial
state.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from decomposition import conf
from decomposition.core import (
    GEOMETRIC, UNIFORM, Signal, TimeGrid, make_time_grid, remove_nullspace,
)
from decomposition.exceptions import ParameterError, SolverError
from decomposition.functionals import (
    FunctionalSpec, evaluate, prox, subgradient_at_zero_scale,
)

logger = logging.getLogger(__name__)


class Method(str, Enum):
    GF = 'gf'
    VM = 'vm'
    IS = 'iss'


@dataclass(frozen=True, eq=False)
class ScalePath:
    """
    Sampled trajectory of one of the three methods.

    Attributes:
        method (Method): gf, vm or iss.
        grid (TimeGrid): t-grid for gf/vm, s-grid for iss.
        u (tuple[Signal]): u_k (v_k for iss) at the nodes.
        p (tuple[Signal]): p_k in the subdifferential at u_k (q_k for iss).
        f (Signal): nullspace-free datum.
        spec (FunctionalSpec): the functional.
        nullspace (Signal | None): component removed from the raw input.
        extinction_index (int | None): first node with u_k set to zero.
    """
    method: Method
    grid: TimeGrid
    u: tuple[Signal, ...]
    p: tuple[Signal, ...]
    f: Signal
    spec: FunctionalSpec
    nullspace: Optional[Signal] = None
    extinction_index: Optional[int] = None

    def __post_init__(self):
        if not len(self.u) == len(self.p) == len(self.grid):
            raise ParameterError('Caminho com listas de tamanhos diferentes.')

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def extinction_time(self) -> Optional[float]:
        if self.extinction_index is None:
            return None
        return float(self.nodes[self.extinction_index])

    def nullspace_signal(self) -> Signal:
        if self.nullspace is None:
            return self.f.like(np.zeros(self.f.shape))
        return self.nullspace


def _extinct(u: Signal, norm_f: float) -> bool:
    return u.norm() <= conf.get('SPECTRAL_EXTINCTION_EPS') * norm_f


def _initial_subgradient(spec, f, grid, tol) -> Signal:
    if f.is_zero():
        return f.like(np.zeros(f.shape))
    return subgradient_at_zero_scale(spec, f, 1e-3 * grid.steps[0], tol)


def run_gradient_flow(f: Signal, spec: FunctionalSpec, grid: TimeGrid,
                      tol: Optional[float] = None,
                      max_iter: Optional[int] = None) -> ScalePath:
    """
    Backward Euler gradient flow ``u_k = prox(u_{k-1}, dt_k)`` with
    ``p_k = (u_{k-1} - u_k) / dt_k``.

    Once ``||u_k|| <= eps ||f||`` the path is extinct: u_k is set to zero
    and every later node is zero.

    Raises:
        SolverError: carrying the node index of the failing step.
    """
    zero = f.like(np.zeros(f.shape))
    norm_f = f.norm()
    us: list[Signal] = []
    ps: list[Signal] = []
    current, warm, extinction = f, None, None
    for k, step in enumerate(grid.increments()):
        if step == 0:
            us.append(f)
            ps.append(_initial_subgradient(spec, f, grid, tol))
            continue
        if extinction is not None or norm_f == 0:
            us.append(zero)
            ps.append(zero)
            continue
        try:
            result = prox(spec, current, step, tol, max_iter, warm)
        except SolverError as error:
            raise error.at_step(k) from error
        following = result.u
        if _extinct(following, norm_f):
            following, extinction = zero, k
            logger.info('gradient flow extinct at t=%.6g (node %d)',
                        grid.nodes[k], k)
        us.append(following)
        ps.append((current - following) / step)
        current, warm = following, result.state
    return ScalePath(Method.GF, grid, tuple(us), tuple(ps), f, spec,
                     extinction_index=extinction)


def run_variational_path(f: Signal, spec: FunctionalSpec, grid: TimeGrid,
                         tol: Optional[float] = None,
                         max_iter: Optional[int] = None) -> ScalePath:
    """
    ``u_k = prox(f, t_k)`` and ``p_k = (f - u_k) / t_k`` at every node.

    Nodes are solved in increasing order so each solve warm-starts from the
    previous one; past extinction the prox is zero and no solve is run.
    """
    zero = f.like(np.zeros(f.shape))
    norm_f = f.norm()
    us: list[Signal] = []
    ps: list[Signal] = []
    warm, extinction = None, None
    for k, t in enumerate(grid.nodes):
        if t == 0:
            us.append(f)
            ps.append(_initial_subgradient(spec, f, grid, tol))
            continue
        if extinction is not None or norm_f == 0:
            us.append(zero)
            ps.append(f / t)
            continue
        try:
            result = prox(spec, f, t, tol, max_iter, warm)
        except SolverError as error:
            raise error.at_step(k) from error
        u = result.u
        if _extinct(u, norm_f):
            u, extinction = zero, k
            logger.info('variational path extinct at t=%.6g (node %d)', t, k)
        us.append(u)
        ps.append((f - u) / t)
        warm = result.state
    return ScalePath(Method.VM, grid, tuple(us), tuple(ps), f, spec,
                     extinction_index=extinction)


def run_inverse_scale_space(f: Signal, spec: FunctionalSpec,
                            grid: TimeGrid, tol: Optional[float] = None,
                            max_iter: Optional[int] = None) -> ScalePath:
    """
    Bregman iteration on the s-grid, starting from ``v = q = 0`` at s = 0:

        v_k = argmin 0.5 ||v - f||^2 + (J(v) - <q_{k-1}, v>) / ds_k
            = prox(f + q_{k-1} / ds_k, 1 / ds_k)
        q_k = q_{k-1} + ds_k (f - v_k)
    """
    zero = f.like(np.zeros(f.shape))
    vs: list[Signal] = []
    qs: list[Signal] = []
    v, q, warm = zero, zero, None
    for k, step in enumerate(grid.increments()):
        if step == 0 or f.is_zero():
            vs.append(v)
            qs.append(q)
            continue
        try:
            result = prox(spec, f + q / step, 1.0 / step, tol, max_iter,
                          warm)
        except SolverError as error:
            raise error.at_step(k) from error
        v = result.u
        q = q + step * (f - v)
        vs.append(v)
        qs.append(q)
        warm = result.state
    return ScalePath(Method.IS, grid, tuple(vs), tuple(qs), f, spec)


RUNNERS = {
    Method.GF: run_gradient_flow,
    Method.VM: run_variational_path,
    Method.IS: run_inverse_scale_space,
}


def scale_path(f: Signal, spec: FunctionalSpec, method: Method | str,
               grid: Optional[TimeGrid] = None, tol: Optional[float] = None,
               max_iter: Optional[int] = None,
               steps: Optional[int] = None) -> ScalePath:
    """
    Remove the nullspace of J from ``f`` and run ``method`` on the rest.
    The removed component is kept on the returned path. Without ``grid`` a
    default grid of ``steps`` nodes is sized from the extinction time.
    """
    method = Method(method)
    f0, n0 = remove_nullspace(f, spec)
    if grid is None:
        grid = default_time_grid(f0, spec, method, steps, tol, max_iter)
    path = RUNNERS[method](f0, spec, grid, tol, max_iter)
    return ScalePath(path.method, path.grid, path.u, path.p, path.f,
                     path.spec, n0, path.extinction_index)


def estimate_extinction_time(f: Signal, spec: FunctionalSpec,
                             tol: Optional[float] = None,
                             max_iter: Optional[int] = None) -> float:
    """
    Smallest ``t = 2**k * ||f||^2 / J(f)`` at which ``prox(f, t)`` vanishes
    (to 1e-3 relative). Returns 1.0 for signals J does not see.
    """
    value = evaluate(spec, f)
    if f.is_zero() or value == 0:
        return 1.0
    t = f.norm() ** 2 / value
    for _ in range(60):
        if prox(spec, f, t, tol, max_iter).u.norm() <= 1e-3 * f.norm():
            return t
        t *= 2.0
    raise SolverError('Tempo de extinção não encontrado.')


def default_time_grid(f: Signal, spec: FunctionalSpec, method: Method | str,
                      n: Optional[int] = None,
                      tol: Optional[float] = None,
                      max_iter: Optional[int] = None) -> TimeGrid:
    """
    Grid sized by the estimated extinction time ``T``: uniform to 1.05 T for
    gf, geometric from 1e-3 T to 1.05 T for vm, uniform ``s_k = k / 1.05 T``
    for iss.
    """
    method = Method(method)
    n = n or conf.get('SPECTRAL_GRID_STEPS')
    horizon = 1.05 * estimate_extinction_time(f, spec, tol, max_iter)
    if method is Method.GF:
        return make_time_grid(UNIFORM, horizon / n, horizon, n)
    if method is Method.VM:
        return make_time_grid(GEOMETRIC, 1e-3 * horizon, horizon, n)
    return make_time_grid(UNIFORM, 1.0 / horizon, n / horizon, n)
