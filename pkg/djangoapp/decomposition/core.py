"""
Data model shared by every part of the decomposition app.

Classes:
    Signal
        Immutable 1D/2D grid function with its grid spacing.
    TimeGrid
        Strictly increasing sampling nodes of a scale parameter (t or s).

Functions:
    make_time_grid(kind, t_min, t_max, n)
        Uniform or geometric grid between two positive bounds.
    remove_nullspace(f, spec)
        Split f into a part free of the functional's nullspace and the
        nullspace component.

All difference operators use Neumann (replicate) boundaries. Inner
products carry the measure ``spacing ** ndim``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from decomposition.exceptions import ParameterError

if TYPE_CHECKING:
    from decomposition.functionals import FunctionalSpec

UNIFORM = 'uniform'
GEOMETRIC = 'geometric'
GRID_KINDS = (UNIFORM, GEOMETRIC)


@dataclass(frozen=True, eq=False)
class Signal:
    """
    A real-valued grid function.

    Attributes:
        values (np.ndarray): float64 array, 1D (n,) or 2D (h, w); read only.
        spacing (float): grid step, the same along every axis.
    """
    values: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim not in (1, 2):
            raise ParameterError(
                'Sinal precisa ser 1D ou 2D (recebido ndim=%(ndim)s).',
                params={'ndim': values.ndim},
            )
        if values.size == 0:
            raise ParameterError('Sinal vazio.')
        if not np.all(np.isfinite(values)):
            raise ParameterError('Sinal contém NaN ou Inf.')
        if not self.spacing > 0:
            raise ParameterError('Espaçamento precisa ser positivo.')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'spacing', float(self.spacing))

    @classmethod
    def zeros(cls, shape, spacing: float = 1.0) -> Signal:
        return cls(np.zeros(shape), spacing)

    def like(self, values) -> Signal:
        """Signal with the same geometry and new ``values``."""
        return Signal(np.reshape(values, self.shape), self.spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def measure(self) -> float:
        """Cell volume ``spacing ** ndim`` used by inner products."""
        return self.spacing ** self.ndim

    def check_compatible(self, other: Signal) -> None:
        if self.shape != other.shape or self.spacing != other.spacing:
            raise ParameterError(
                'Sinais incompatíveis: %(a)s/%(ha)s e %(b)s/%(hb)s.',
                params={'a': self.shape, 'ha': self.spacing,
                        'b': other.shape, 'hb': other.spacing},
            )

    def inner(self, other: Signal) -> float:
        self.check_compatible(other)
        return self.measure * float(np.sum(self.values * other.values))

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self)))

    def norm_l1(self) -> float:
        return self.measure * float(np.sum(np.abs(self.values)))

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def __add__(self, other: Signal) -> Signal:
        self.check_compatible(other)
        return self.like(self.values + other.values)

    def __sub__(self, other: Signal) -> Signal:
        self.check_compatible(other)
        return self.like(self.values - other.values)

    def __mul__(self, scalar: float) -> Signal:
        return self.like(float(scalar) * self.values)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> Signal:
        return self.like(self.values / float(scalar))

    def __neg__(self) -> Signal:
        return self.like(-self.values)

    def __repr__(self) -> str:
        return f'Signal(shape={self.shape}, spacing={self.spacing})'


def sum_signals(signals, template: Signal) -> Signal:
    """Ordered sum of ``signals``; zero signal shaped like ``template``."""
    total = np.zeros(template.shape)
    for signal in signals:
        template.check_compatible(signal)
        total = total + signal.values
    return template.like(total)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """
    Sampling nodes of a scale parameter.

    Attributes:
        nodes (np.ndarray): strictly increasing, ``nodes[0] >= 0``, at
            least two entries; read only.
        kind (str): ``'uniform'`` or ``'geometric'``.
    """
    nodes: np.ndarray
    kind: str = UNIFORM
    steps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=np.float64, copy=True)
        if self.kind not in GRID_KINDS:
            raise ParameterError(
                'Tipo de grade desconhecido: %(kind)s.',
                params={'kind': self.kind},
            )
        if nodes.ndim != 1 or nodes.size < 2:
            raise ParameterError('A grade precisa de pelo menos 2 nós.')
        if not np.all(np.isfinite(nodes)) or nodes[0] < 0:
            raise ParameterError('Nós da grade precisam ser finitos e >= 0.')
        steps = np.diff(nodes)
        if np.any(steps <= 0):
            raise ParameterError('Nós da grade precisam ser crescentes.')
        if self.kind == UNIFORM:
            slack = 1e-9 * steps[0] + 8 * np.spacing(nodes[-1])
            if np.max(np.abs(steps - steps[0])) > slack:
                raise ParameterError('Grade uniforme com passos desiguais.')
        nodes.setflags(write=False)
        steps.setflags(write=False)
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'steps', steps)

    def __len__(self) -> int:
        return self.nodes.size

    def increments(self) -> np.ndarray:
        """
        Step lengths seen by a time stepper starting at zero: the first one
        is ``nodes[0]`` (empty first step when the grid starts at 0).
        """
        return np.diff(np.concatenate(([0.0], self.nodes)))


def make_time_grid(kind: str, t_min: float, t_max: float, n: int) -> TimeGrid:
    """
    Build a uniform or geometric grid with ``n`` nodes on [t_min, t_max].

    Raises:
        ParameterError: unless ``0 < t_min < t_max`` and ``n >= 2``.
    """
    if not (0 < t_min < t_max) or int(n) < 2:
        raise ParameterError(
            'Grade inválida: exige 0 < tmin < tmax e N >= 2 '
            '(recebido %(a)s, %(b)s, %(n)s).',
            params={'a': t_min, 'b': t_max, 'n': n},
        )
    if kind == UNIFORM:
        nodes = np.linspace(t_min, t_max, int(n))
    elif kind == GEOMETRIC:
        nodes = np.geomspace(t_min, t_max, int(n))
    else:
        raise ParameterError(
            'Tipo de grade desconhecido: %(kind)s.', params={'kind': kind}
        )
    return TimeGrid(nodes, kind)


def remove_nullspace(f: Signal, spec: FunctionalSpec) -> tuple[Signal, Signal]:
    """
    Split ``f = f0 + n0`` with ``n0`` in the nullspace of J.

    TV kinds remove the mean, TGV-2 the least-squares affine part, the
    gradient collaborative norm the per-column mean; ℓ¹-analysis and the
    plain collaborative norm have a trivial nullspace.
    """
    from decomposition.functionals import get_functional

    functional = get_functional(spec)
    functional.check_shape(f)
    n0 = functional.nullspace_component(f.values)
    return f.like(f.values - n0), f.like(n0)


def affine_fit(values: np.ndarray) -> np.ndarray:
    """Least-squares fit of ``a + Σ b_i x_i`` over the array indices."""
    coords = np.indices(values.shape).reshape(values.ndim, -1).T
    design = np.column_stack([np.ones(values.size), coords.astype(float)])
    coeffs, *_ = np.linalg.lstsq(design, values.ravel(), rcond=None)
    return (design @ coeffs).reshape(values.shape)
