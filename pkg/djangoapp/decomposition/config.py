"""
Run configuration shared by the management commands.

A RunConfig is built from a JSON file (``--config``) overlaid with explicit
command-line flags and validated before any computation.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
from django.core.exceptions import ValidationError

from decomposition import conf
from decomposition.core import GRID_KINDS, TimeGrid, make_time_grid
from decomposition.exceptions import ParameterError
from decomposition.flows import Method
from decomposition.functionals import FunctionalSpec
from decomposition.spectral import TransferFunction
from utils.validators import validate_flag


def parse_filter(text: str) -> tuple[tuple[float, float, float], ...]:
    """
    Parse ``"lo:hi:gain,..."`` into intervals; ``inf`` is accepted as an
    upper bound.

    Raises:
        ParameterError: malformed item or ``lo >= hi``.
    """
    intervals = []
    for item in filter(None, (part.strip() for part in text.split(','))):
        pieces = item.split(':')
        if len(pieces) != 3:
            raise ParameterError(
                'Filtro inválido: %(item)s (esperado lo:hi:ganho).',
                params={'item': item},
            )
        try:
            lo, hi, gain = (float(piece) for piece in pieces)
        except ValueError:
            raise ParameterError(
                'Filtro com valor não numérico: %(item)s.',
                params={'item': item},
            )
        if not 0 <= lo < hi:
            raise ParameterError(
                'Filtro exige 0 <= lo < hi: %(item)s.', params={'item': item},
            )
        intervals.append((lo, hi, gain))
    return tuple(intervals)


@dataclass(frozen=True)
class RunConfig:
    functional: str = 'tv1d'
    beta: Optional[float] = None
    transform: str = 'dct'
    method: str = 'gf'
    grid: str = 'uniform'
    tmin: Optional[float] = None
    tmax: Optional[float] = None
    steps: Optional[int] = None
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    filter: str = ''
    tail: int = 1
    mean: int = 1
    spacing: float = 1.0
    input: Optional[str] = None
    out_dir: Optional[str] = None
    manifest: Optional[str] = None
    kind: str = 'step'
    n: int = 64
    noise: float = 0.0
    seed: int = 0

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(item.name for item in fields(cls))

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> RunConfig:
        """
        Raises:
            ParameterError: unknown keys.
        """
        unknown = sorted(set(values) - set(cls.keys()))
        if unknown:
            raise ParameterError(
                'Chaves de configuração desconhecidas: %(keys)s.',
                params={'keys': ', '.join(unknown)},
            )
        return cls(**values)

    @classmethod
    def load(cls, path: Optional[str | Path] = None,
             overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
        """
        Read ``path`` (JSON) if given, apply the non-None ``overrides`` and
        validate the result.
        """
        values: dict[str, Any] = {}
        if path:
            try:
                values = json.loads(Path(path).read_text())
            except (OSError, ValueError) as error:
                raise ParameterError(
                    'Configuração ilegível: %(error)s.',
                    params={'error': error},
                )
            if not isinstance(values, dict):
                raise ParameterError('Configuração precisa ser um objeto.')
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        config = cls.from_mapping(values)
        config.validate()
        return config

    def validate(self) -> None:
        """
        Check every field; building the functional, grid and filter runs
        their own validation.

        Raises:
            ParameterError
        """
        try:
            Method(self.method)
        except ValueError:
            raise ParameterError(
                'Método desconhecido: %(method)s.',
                params={'method': self.method},
            )
        if self.grid not in GRID_KINDS:
            raise ParameterError(
                'Tipo de grade desconhecido: %(kind)s.',
                params={'kind': self.grid},
            )
        if (self.tmin is None) != (self.tmax is None):
            raise ParameterError('tmin e tmax precisam vir juntos.')
        if self.steps is not None and int(self.steps) < 3:
            raise ParameterError('steps precisa ser >= 3.')
        for name in ('tol', 'spacing'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ParameterError(
                    '%(name)s precisa ser > 0.', params={'name': name},
                )
        if self.max_iter is not None and int(self.max_iter) < 1:
            raise ParameterError('max_iter precisa ser >= 1.')
        if self.noise < 0:
            raise ParameterError('noise precisa ser >= 0.')
        try:
            validate_flag(self.tail)
            validate_flag(self.mean)
        except ValidationError as error:
            raise ParameterError(error.messages[0])
        self.functional_spec()
        self.time_grid()
        self.transfer_function()

    def functional_spec(self) -> FunctionalSpec:
        """Functional with ``beta`` and ``transform`` merged in."""
        text = self.functional
        extras = []
        if self.beta is not None and 'beta=' not in text:
            extras.append(f'beta={self.beta!r}')
        if self.transform != 'dct' and 'transform=' not in text:
            extras.append(f'transform={self.transform}')
        if extras:
            text += (',' if ':' in text else ':') + ','.join(extras)
        return FunctionalSpec.parse(text)

    def time_grid(self) -> Optional[TimeGrid]:
        """Explicit grid, or None to size it from the extinction time."""
        if self.tmin is None or self.tmax is None:
            return None
        return make_time_grid(self.grid, float(self.tmin), float(self.tmax),
                              self.grid_steps)

    @property
    def grid_steps(self) -> int:
        return int(self.steps or conf.get('SPECTRAL_GRID_STEPS'))

    def transfer_function(self) -> TransferFunction:
        intervals = parse_filter(self.filter)
        if not intervals:
            return TransferFunction(((0.0, np.inf, 1.0),), tail=self.tail,
                                    nullspace=self.mean)
        return TransferFunction(intervals, tail=self.tail,
                                nullspace=self.mean)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)
