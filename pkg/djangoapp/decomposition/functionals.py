"""
One-homogeneous convex functionals J and their proximal operators.

Every functional is stored as ``J(u) = h**d * Jh(u)`` where ``Jh`` sums
local magnitudes of spacing-scaled differences (or transform
coefficients). With the spacing-weighted inner product of ``Signal`` the
prox of J is the plain Euclidean prox of ``Jh`` and ``J(u) = <p, u>``
holds for every subgradient ``p`` at ``u``.

Classes:
    FunctionalKind, Transform, FunctionalSpec, ProxResult
    Functional and one subclass per kind.

Functions:
    evaluate(spec, u), prox(spec, f, t, tol), subgradient_at_zero_scale(...)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

import cvxpy as cp
import numpy as np
import scipy.sparse as sps
from scipy.fft import dctn, idctn
from scipy.optimize import linprog

from decomposition import conf, operators
from decomposition.core import Signal, affine_fit
from decomposition.exceptions import ParameterError, SolverError
from decomposition.solvers import primal_dual, taut_string

logger = logging.getLogger(__name__)


class FunctionalKind(str, Enum):
    TV1D = 'tv1d'
    TV2D_ANISO = 'tv2d'
    TV2D_ISO = 'tv2d_iso'
    L1_ANALYSIS = 'l1'
    TGV2 = 'tgv2'
    COLLAB_LINF1 = 'collab'
    GRAD_COLLAB_LINF1 = 'gradcollab'


@dataclass(frozen=True)
class Transform:
    """Orthonormal linear transform given by forward/inverse callbacks."""
    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]


TRANSFORMS: dict[str, Transform] = {
    'dct': Transform(
        'dct',
        lambda x: dctn(x, type=2, norm='ortho'),
        lambda z: idctn(z, type=2, norm='ortho'),
    ),
    'identity': Transform('identity', np.array, np.array),
}


def register_transform(transform: Transform) -> None:
    """Make ``transform`` available to ``FunctionalSpec(transform=name)``."""
    check_orthonormal(transform)
    TRANSFORMS[transform.name] = transform


def check_orthonormal(transform: Transform, samples: int = 4) -> None:
    """
    Reject transforms that do not preserve norms on random signals.

    Raises:
        ParameterError: ``| ||Vu|| - ||u|| | > 1e-10 ||u||`` on a sample, or
            the inverse does not undo the forward map.
    """
    rng = np.random.default_rng(0)
    for shape in [(8,)] * samples + [(4, 6)] * samples:
        u = rng.standard_normal(shape)
        z = np.asarray(transform.forward(u))
        back = np.asarray(transform.inverse(z))
        norm = np.linalg.norm(u)
        if abs(np.linalg.norm(z) - norm) > 1e-10 * norm \
                or np.linalg.norm(back - u) > 1e-10 * norm:
            raise ParameterError(
                'Transformada %(name)s não é ortonormal.',
                params={'name': transform.name},
            )


@dataclass(frozen=True)
class FunctionalSpec:
    """
    Selects a regularizer J and its parameters.

    Attributes:
        kind (FunctionalKind): which functional.
        beta (float | None): TGV-2 weight, required in (0, 1) for ``tgv2``.
        transform (str): name of the orthonormal transform of ``l1``.
    """
    kind: FunctionalKind
    beta: Optional[float] = None
    transform: str = 'dct'

    def __post_init__(self):
        try:
            kind = FunctionalKind(self.kind)
        except ValueError:
            raise ParameterError(
                'Funcional desconhecido: %(kind)s.',
                params={'kind': self.kind},
            )
        object.__setattr__(self, 'kind', kind)
        if kind is FunctionalKind.TGV2:
            if self.beta is None or not 0 < self.beta < 1:
                raise ParameterError(
                    'TGV2 exige beta em (0, 1) (recebido %(beta)s).',
                    params={'beta': self.beta},
                )
            object.__setattr__(self, 'beta', float(self.beta))
        elif self.beta is not None:
            raise ParameterError('beta só se aplica a TGV2.')
        if kind is FunctionalKind.L1_ANALYSIS:
            if self.transform not in TRANSFORMS:
                raise ParameterError(
                    'Transformada desconhecida: %(name)s.',
                    params={'name': self.transform},
                )
            check_orthonormal(TRANSFORMS[self.transform])

    @classmethod
    def parse(cls, text: str) -> FunctionalSpec:
        """
        Parse ``kind[:key=value,...]``, e.g. ``tgv2:beta=0.05`` or
        ``l1:transform=identity``.
        """
        kind, _, rest = text.strip().partition(':')
        params: dict[str, Any] = {}
        for item in filter(None, rest.split(',')):
            key, sep, value = item.partition('=')
            key = key.strip()
            if not sep or key not in ('beta', 'transform'):
                raise ParameterError(
                    'Parâmetro de funcional inválido: %(item)s.',
                    params={'item': item},
                )
            if key == 'beta':
                try:
                    params[key] = float(value)
                except ValueError:
                    raise ParameterError('beta precisa ser numérico.')
            else:
                params[key] = value.strip()
        return cls(kind.strip(), **params)

    def label(self) -> str:
        if self.kind is FunctionalKind.TGV2:
            return f'{self.kind.value}:beta={self.beta:g}'
        if self.kind is FunctionalKind.L1_ANALYSIS:
            return f'{self.kind.value}:transform={self.transform}'
        return self.kind.value


@dataclass(frozen=True, eq=False)
class ProxResult:
    """
    Minimizer of ``0.5 ||u - f||^2 + t J(u)`` with its subgradient.

    Attributes:
        u (Signal): minimizer.
        p (Signal): ``(f - u) / t``, an element of the subdifferential at u.
        iterations (int): solver iterations (0 for closed forms).
        residual (float): normalized duality gap (0 for closed forms).
        state (Any): solver state usable as a warm start.
    """
    u: Signal
    p: Signal
    iterations: int = 0
    residual: float = 0.0
    state: Any = field(default=None, repr=False)


class Functional:
    """
    Base class: value, prox and nullspace of one kind of functional.

    Subclasses work on raw arrays with unit measure (``Jh``); the public
    functions of this module add the measure and wrap arrays in Signals.
    """
    ndims: tuple[int, ...] = (1, 2)

    def __init__(self, spec: FunctionalSpec):
        self.spec = spec

    def check_shape(self, signal: Signal) -> None:
        if signal.ndim not in self.ndims:
            raise ParameterError(
                '%(kind)s não aceita sinais de dimensão %(ndim)s.',
                params={'kind': self.spec.kind.value, 'ndim': signal.ndim},
            )

    def unit_value(self, values: np.ndarray, spacing: float) -> float:
        raise NotImplementedError

    def nullspace_component(self, values: np.ndarray) -> np.ndarray:
        return np.zeros_like(values)

    def unit_prox(self, values, spacing, t, tol, max_iter, warm_start):
        """Return ``(u, iterations, residual, state)``."""
        raise NotImplementedError


class TV1D(Functional):
    ndims = (1,)

    def unit_value(self, values, spacing):
        return float(np.sum(np.abs(np.diff(values)))) / spacing

    def nullspace_component(self, values):
        return np.full_like(values, values.mean())

    def unit_prox(self, values, spacing, t, tol, max_iter, warm_start):
        return taut_string(values, t / spacing), 0, 0.0, None


class GradientPrimalDual(Functional):
    """
    ``Jh(u) = sum of a norm of spacing-scaled forward differences``, prox by
    accelerated primal-dual iteration on ``0.5||u-f||^2 + t Jh(u)``.
    """
    axes: tuple[int, ...] = ()

    def norm_value(self, gradient: np.ndarray) -> float:
        raise NotImplementedError

    def project(self, y: np.ndarray, radius: float) -> np.ndarray:
        raise NotImplementedError

    def apply(self, values, spacing):
        return operators.grad(values, spacing, self.axes)

    def adjoint(self, y, spacing):
        return operators.grad_adjoint(y, spacing, self.axes)

    def unit_value(self, values, spacing):
        return self.norm_value(self.apply(values, spacing))

    def unit_prox(self, values, spacing, t, tol, max_iter, warm_start):
        f = values
        scale = float(np.sum(f ** 2))
        x0, y0 = f, np.zeros((len(self.axes),) + f.shape)
        if warm_start is not None and warm_start['y'].shape == y0.shape:
            x0 = warm_start['x']
            y0 = warm_start['y'] * (t / warm_start['t'])

        def gap(u, y):
            back = self.adjoint(y, spacing)
            primal = 0.5 * np.sum((u - f) ** 2) \
                + t * self.unit_value(u, spacing)
            dual = np.sum(f * back) - 0.5 * np.sum(back ** 2)
            return max(primal - dual, 0.0) / scale

        result = primal_dual(
            x0, y0,
            apply=lambda u: self.apply(u, spacing),
            adjoint=lambda y: self.adjoint(y, spacing),
            prox_primal=lambda v, tau: (v + tau * f) / (1.0 + tau),
            project_dual=lambda y: self.project(y, t),
            gap=gap,
            norm_bound=operators.grad_norm_bound(spacing, len(self.axes)),
            tol=tol, max_iter=max_iter, strong_convexity=1.0,
            label=self.spec.kind.value,
        )
        state = {'x': result.x, 'y': result.y, 't': t}
        return result.x, result.iterations, result.gap, state


class TV2DAniso(GradientPrimalDual):
    ndims = (2,)
    axes = (0, 1)

    def norm_value(self, gradient):
        return float(np.sum(np.abs(gradient)))

    def project(self, y, radius):
        return operators.project_box(y, radius)

    def nullspace_component(self, values):
        return np.full_like(values, values.mean())


class TV2DIso(TV2DAniso):

    def norm_value(self, gradient):
        return float(np.sum(np.sqrt(np.sum(gradient ** 2, axis=0))))

    def project(self, y, radius):
        return operators.project_pointwise_l2(y, radius)


class GradCollabLinf1(GradientPrimalDual):
    """``sum_i max_j |(grad u)_ij|`` with the gradient along axis 0."""
    ndims = (2,)
    axes = (0,)

    def norm_value(self, gradient):
        return float(np.sum(np.max(np.abs(gradient[0]), axis=1)))

    def project(self, y, radius):
        return operators.project_l1_rows(y[0], radius)[None]

    def nullspace_component(self, values):
        return np.broadcast_to(values.mean(axis=0), values.shape).copy()


class CollabLinf1(Functional):
    """``sum_i max_j |u_ij|``; rows are groups, a 1D signal is one group."""

    def unit_value(self, values, spacing):
        rows = np.atleast_2d(values)
        return float(np.sum(np.max(np.abs(rows), axis=1)))

    def unit_prox(self, values, spacing, t, tol, max_iter, warm_start):
        rows = np.atleast_2d(values)
        u = rows - operators.project_l1_rows(rows, t)
        return u.reshape(values.shape), 0, 0.0, None


class L1Analysis(Functional):
    """``||V u||_1`` for an orthonormal transform V."""

    @property
    def transform(self) -> Transform:
        return TRANSFORMS[self.spec.transform]

    def unit_value(self, values, spacing):
        return float(np.sum(np.abs(self.transform.forward(values))))

    def unit_prox(self, values, spacing, t, tol, max_iter, warm_start):
        z = operators.shrink(self.transform.forward(values), t)
        return np.asarray(self.transform.inverse(z)), 0, 0.0, None


class TGV2(Functional):
    """
    Second order total generalized variation on 1D signals,
    ``Jh(u) = min_w beta ||Du - w||_1 + (1 - beta) ||Dw||_1`` with
    unpadded differences D, so affine signals form the nullspace.
    """
    ndims = (1,)

    @property
    def beta(self) -> float:
        return float(self.spec.beta)

    def nullspace_component(self, values):
        return affine_fit(values)

    def unit_value(self, values, spacing):
        n = values.size
        if n < 3 or not np.any(values):
            return 0.0
        m = n - 1
        g = operators.valid_diff(values, spacing)
        d = operators.valid_diff_matrix(m, spacing)
        eye = sps.identity(m, format='csr')
        # variables: w (m), a >= |g - w| (m), b >= |Dw| (m - 1)
        cost = np.concatenate((
            np.zeros(m), np.full(m, self.beta),
            np.full(m - 1, 1.0 - self.beta),
        ))
        zeros_b = sps.csr_matrix((m, m - 1))
        zeros_a = sps.csr_matrix((m - 1, m))
        eye_b = sps.identity(m - 1, format='csr')
        constraints = sps.vstack([
            sps.hstack([-eye, -eye, zeros_b]),
            sps.hstack([eye, -eye, zeros_b]),
            sps.hstack([d, zeros_a, -eye_b]),
            sps.hstack([-d, zeros_a, -eye_b]),
        ], format='csr')
        bounds_rhs = np.concatenate((-g, g, np.zeros(2 * (m - 1))))
        bounds = [(None, None)] * m + [(0, None)] * (2 * m - 1)
        result = linprog(cost, A_ub=constraints, b_ub=bounds_rhs,
                         bounds=bounds, method='highs',
                         options={'primal_feasibility_tolerance': 1e-10,
                                  'dual_feasibility_tolerance': 1e-10})
        if result.status != 0:
            raise SolverError(
                f'TGV2: programa linear falhou ({result.message})'
            )
        return float(result.fun)

    def dual_operators(self, n: int, spacing: float):
        """
        ``(second, first)``: the maps taking the dual variable ``y`` of the
        bend term to ``D^T D^T y`` (length n) and to ``D^T y`` (length n-1).
        """
        first = operators.valid_diff_matrix(n - 1, spacing).T.tocsr()
        second = (operators.valid_diff_matrix(n - 1, spacing)
                  @ operators.valid_diff_matrix(n, spacing)).T.tocsr()
        return second, first

    def unit_prox(self, values, spacing, t, tol, max_iter, warm_start):
        """
        Solve the dual problem with w eliminated,

            min_y 0.5 ||f - t D^T D^T y||^2
            s.t.  |y| <= 1 - beta,  |D^T y| <= beta,

        as a QP, then certify ``u = f - t D^T D^T y`` with the duality gap
        of a feasible rescaling of ``y``.
        """
        f = values
        n = f.size
        if n < 3:
            return f.copy(), 0, 0.0, None
        scale = float(np.sum(f ** 2))
        beta = self.beta
        second, first = self.dual_operators(n, spacing)
        y = cp.Variable(n - 2)
        problem = cp.Problem(
            cp.Minimize(0.5 * cp.sum_squares(f - t * (second @ y)) / scale),
            [cp.abs(y) <= 1.0 - beta, cp.abs(first @ y) <= beta],
        )
        try:
            problem.solve(solver=cp.CLARABEL, max_iter=max_iter,
                          tol_gap_abs=1e-11, tol_gap_rel=1e-11,
                          tol_feas=1e-11)
        except cp.SolverError:
            logger.debug('tgv2: retrying with the solver tolerances')
            try:
                problem.solve(solver=cp.CLARABEL, max_iter=max_iter)
            except cp.SolverError as error:
                raise SolverError(f'tgv2: {error}')
        if y.value is None:
            raise SolverError(f'tgv2: solver terminou com {problem.status}')
        iterations = int(problem.solver_stats.num_iters or 0)

        y_value = np.clip(y.value, -(1.0 - beta), 1.0 - beta)
        largest = np.max(np.abs(first @ y_value), initial=0.0)
        if largest > beta:
            y_value = y_value * (beta / largest)
        q = t * (second @ y_value)
        u = f - q
        primal = 0.5 * np.sum(q ** 2) + t * self.unit_value(u, spacing)
        dual = np.sum(f * q) - 0.5 * np.sum(q ** 2)
        gap = max(primal - dual, 0.0) / scale
        if gap > tol:
            raise SolverError(
                f'tgv2 não convergiu: gap {gap:.3e} > {tol:.1e} após '
                f'{iterations} iterações',
                residual=gap, iterations=iterations,
            )
        logger.debug('tgv2: gap %.3e after %d iterations', gap, iterations)
        return u, iterations, gap, None


FUNCTIONALS: dict[FunctionalKind, type[Functional]] = {
    FunctionalKind.TV1D: TV1D,
    FunctionalKind.TV2D_ANISO: TV2DAniso,
    FunctionalKind.TV2D_ISO: TV2DIso,
    FunctionalKind.L1_ANALYSIS: L1Analysis,
    FunctionalKind.TGV2: TGV2,
    FunctionalKind.COLLAB_LINF1: CollabLinf1,
    FunctionalKind.GRAD_COLLAB_LINF1: GradCollabLinf1,
}


def get_functional(spec: FunctionalSpec) -> Functional:
    return FUNCTIONALS[spec.kind](spec)


def evaluate(spec: FunctionalSpec, u: Signal) -> float:
    """
    J(u) >= 0.

    Raises:
        ParameterError: ``u`` has a dimension the functional does not take.
    """
    functional = get_functional(spec)
    functional.check_shape(u)
    return u.measure * functional.unit_value(u.values, u.spacing)


def prox(spec: FunctionalSpec, f: Signal, t: float,
         tol: Optional[float] = None, max_iter: Optional[int] = None,
         warm_start: Any = None) -> ProxResult:
    """
    Minimize ``0.5 ||u - f||^2 + t J(u)``.

    Iterative solvers stop once the duality gap is at most ``tol * ||f||^2``
    (Euclidean norm of the values).

    Raises:
        ParameterError: ``t <= 0``, ``tol <= 0`` or a shape the functional
            does not take.
        SolverError: no convergence within ``max_iter`` iterations.
    """
    tol = conf.get('SPECTRAL_TOL') if tol is None else tol
    max_iter = conf.get('SPECTRAL_MAX_ITER') if max_iter is None \
        else max_iter
    if not t > 0 or not tol > 0:
        raise ParameterError(
            'prox exige t > 0 e tol > 0 (recebido t=%(t)s, tol=%(tol)s).',
            params={'t': t, 'tol': tol},
        )
    functional = get_functional(spec)
    functional.check_shape(f)
    if f.is_zero():
        zero = f.like(np.zeros(f.shape))
        return ProxResult(zero, zero)
    u, iterations, residual, state = functional.unit_prox(
        f.values, f.spacing, float(t), tol, int(max_iter), warm_start,
    )
    u_signal = f.like(u)
    p_signal = f.like((f.values - u_signal.values) / t)
    return ProxResult(u_signal, p_signal, iterations, residual, state)


def subgradient_at_zero_scale(spec: FunctionalSpec, f: Signal,
                              t_small: float, tol: Optional[float] = None
                              ) -> Signal:
    """
    Subgradient p = (f - u)/t_small of the prox at a small scale; for
    diagnostics and flow initialization checks.
    """
    return prox(spec, f, t_small, tol).p
