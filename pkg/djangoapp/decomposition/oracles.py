"""
Reference implementations the generic machinery is checked against.

Functions:
    dct_closed_form_path(f, method, grid, transform)
        gf/vm/iss paths of the ℓ¹-analysis functional in closed form.
    dct_spectrum(f, definition, transform)
        Exact spectral peaks of the same functional.
    dct_hard_threshold(f, threshold, transform)
        Classical hard thresholding of transform coefficients.
    make_tv_eigenfunction(n, spacing)
        Certified step eigenfunction of 1D total variation.
    verify_eigenfunction(spec, f, tol)
        Prox check of ``prox(f, tau) = (1 - lambda tau)+ f``.
    bruteforce_prox(spec, f, t, resolution)
        Derivative-free minimization of the prox objective in <= 4 unknowns.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from decomposition import conf
from decomposition.core import Signal, TimeGrid
from decomposition.exceptions import EigenfunctionError, ParameterError
from decomposition.flows import Method, ScalePath
from decomposition.functionals import (
    TRANSFORMS, FunctionalKind, FunctionalSpec, evaluate, prox,
)
from decomposition.operators import shrink
from decomposition.spectral import Spectrum, SpectrumDefinition

logger = logging.getLogger(__name__)

FRACTIONS = (0.1, 0.5, 0.9)


@dataclass(frozen=True, eq=False)
class EigenpairCertificate:
    """
    Attributes:
        f (Signal): the tested signal.
        eigenvalue (float): ``J(f) / ||f||^2``.
        residual (float): worst relative deviation over the tested scales.
        accepted (bool): ``residual <= tol``.
    """
    f: Signal
    eigenvalue: float
    residual: float
    accepted: bool


def _coefficients(f: Signal, transform: str) -> np.ndarray:
    if transform not in TRANSFORMS:
        raise ParameterError(
            'Transformada desconhecida: %(name)s.', params={'name': transform},
        )
    return np.asarray(TRANSFORMS[transform].forward(f.values))


def _synthesize(f: Signal, z: np.ndarray, transform: str) -> Signal:
    return f.like(np.asarray(TRANSFORMS[transform].inverse(z)))


def dct_closed_form_path(f: Signal, method: Method | str, grid: TimeGrid,
                         transform: str = 'dct') -> ScalePath:
    """
    Path of ``J(u) = ||V u||_1`` computed on the coefficients ``c = V f``:

    * vm and gf: ``z(t) = sign(c) max(|c| - t, 0)``;
    * iss: ``z(s) = c [s |c| >= 1]``, ``q(s) = sign(c) min(s |c|, 1)``.

    Subgradients follow the discrete conventions of the generic flows so
    both can be compared node by node.
    """
    method = Method(method)
    spec = FunctionalSpec(FunctionalKind.L1_ANALYSIS, transform=transform)
    c = _coefficients(f, transform)
    eps = conf.get('SPECTRAL_EXTINCTION_EPS')
    norm_c = float(np.linalg.norm(c))
    us, ps = [], []
    extinction = None
    if method is Method.IS:
        for s in grid.nodes:
            us.append(c * (s * np.abs(c) >= 1.0))
            ps.append(np.sign(c) * np.minimum(s * np.abs(c), 1.0))
    else:
        for k, t in enumerate(grid.nodes):
            z = shrink(c, t)
            if t > 0 and norm_c > 0 and extinction is None \
                    and np.linalg.norm(z) <= eps * norm_c:
                extinction = k
            if extinction is not None:
                z = np.zeros_like(c)
            us.append(z)
        previous, elapsed = c, 0.0
        for t, z in zip(grid.nodes, us):
            if t == 0:
                ps.append(np.sign(c))
            elif method is Method.GF:
                ps.append((previous - z) / (t - elapsed))
            else:
                ps.append((c - z) / t)
            previous, elapsed = z, t
    return ScalePath(
        method, grid,
        tuple(_synthesize(f, z, transform) for z in us),
        tuple(_synthesize(f, q, transform) for q in ps),
        f, spec, extinction_index=extinction,
    )


def dct_spectrum(f: Signal, definition: SpectrumDefinition | str = 'energy',
                 transform: str = 'dct') -> Spectrum:
    """
    One peak per distinct coefficient magnitude ``t`` with multiplicity
    ``m``: height ``t sqrt(m)`` (energy) or ``t m`` (l1). Peaks are
    Diracs, so widths are ones.
    """
    definition = SpectrumDefinition(definition)
    magnitudes = np.abs(_coefficients(f, transform)).ravel()
    magnitudes = magnitudes[magnitudes > 0]
    t, counts = np.unique(magnitudes, return_counts=True)
    if definition is SpectrumDefinition.ENERGY:
        heights = t * np.sqrt(counts)
    else:
        heights = t * counts
    return Spectrum(t, heights, definition, np.ones_like(t))


def dct_hard_threshold(f: Signal, threshold: float,
                       transform: str = 'dct') -> Signal:
    """Keep the coefficients with ``|c| >= threshold``."""
    c = _coefficients(f, transform)
    return _synthesize(f, c * (np.abs(c) >= threshold), transform)


def verify_eigenfunction(spec: FunctionalSpec, f: Signal,
                         tol: float = 1e-8,
                         prox_tol: Optional[float] = None
                         ) -> EigenpairCertificate:
    """
    Compare ``prox(f, tau)`` against ``(1 - lambda tau) f`` at
    ``tau in {0.1, 0.5, 0.9} / lambda`` with ``lambda = J(f) / ||f||^2``.

    Raises:
        ParameterError: f is zero or lies in the nullspace of J.
    """
    if f.is_zero():
        raise ParameterError('Autofunção exige f não nulo.')
    norm = f.norm()
    eigenvalue = evaluate(spec, f) / norm ** 2
    if not eigenvalue > 0:
        raise ParameterError('f está no núcleo do funcional.')
    residual = 0.0
    for fraction in FRACTIONS:
        tau = fraction / eigenvalue
        u = prox(spec, f, tau, prox_tol).u
        deviation = (u - f * (1.0 - eigenvalue * tau)).norm() / norm
        residual = max(residual, deviation)
    accepted = residual <= tol
    logger.info('eigenfunction check: lambda=%.6g residual=%.3e (%s)',
                eigenvalue, residual, 'ok' if accepted else 'rejected')
    return EigenpairCertificate(f, eigenvalue, residual, accepted)


def make_tv_eigenfunction(n: int, spacing: float = 1.0
                          ) -> EigenpairCertificate:
    """
    Zero-mean step ``[1, ..., 1, -1, ..., -1]`` of length n, certified as a
    1D total variation eigenfunction with ``lambda = 2 / (n h)``.

    Raises:
        ParameterError: n odd or below 4.
        EigenfunctionError: certification failed.
    """
    if n < 4 or n % 2:
        raise ParameterError(
            'Autofunção degrau exige n par e n >= 4 (recebido %(n)s).',
            params={'n': n},
        )
    half = n // 2
    f = Signal(np.concatenate((np.ones(half), -np.ones(half))), spacing)
    certificate = verify_eigenfunction(FunctionalSpec(FunctionalKind.TV1D), f)
    if not certificate.accepted:
        raise EigenfunctionError(
            f'Certificação falhou: resíduo {certificate.residual:.3e}',
            residual=certificate.residual,
        )
    return certificate


def _pattern_search(objective, x: np.ndarray, value: float, step: float,
                    resolution: float) -> tuple[np.ndarray, float]:
    directions = [
        np.array(d, dtype=float)
        for d in itertools.product((-1, 0, 1), repeat=x.size) if any(d)
    ]
    while step >= resolution:
        moved = False
        for direction in directions:
            candidate = x + step * direction
            candidate_value = objective(candidate)
            if candidate_value < value:
                x, value, moved = candidate, candidate_value, True
        if not moved:
            step /= 2.0
    return x, value


def bruteforce_prox(spec: FunctionalSpec, f: Signal, t: float,
                    resolution: float = 1e-4, restarts: int = 8,
                    seed: int = 0) -> Signal:
    """
    Minimize ``0.5 ||u - f||^2 + t J(u)`` without using any prox: Nelder-Mead
    from several starts, then a pattern search over ``{-1, 0, 1}^d``
    directions refined down to ``resolution``.

    Raises:
        ParameterError: more than 4 unknowns or ``t < 0``.
    """
    if f.values.size > 4:
        raise ParameterError('Força bruta limitada a 4 incógnitas.')
    if t < 0:
        raise ParameterError('t precisa ser >= 0.')
    if t == 0 or f.is_zero():
        return f.like(f.values if t == 0 else np.zeros(f.shape))
    shape = f.shape

    def objective(x: np.ndarray) -> float:
        u = f.like(x.reshape(shape))
        return 0.5 * (u - f).norm() ** 2 + t * evaluate(spec, u)

    flat = f.values.ravel()
    scale = float(np.max(np.abs(flat)))
    rng = np.random.default_rng(seed)
    starts = [flat, np.zeros_like(flat), np.full_like(flat, flat.mean())]
    starts += [flat + scale * rng.standard_normal(flat.size)
               for _ in range(restarts)]
    best, best_value = flat, objective(flat)
    for start in starts:
        result = minimize(objective, start, method='Nelder-Mead',
                          options={'xatol': resolution * 1e-2,
                                   'fatol': 1e-14, 'maxiter': 4000})
        if result.fun < best_value:
            best, best_value = result.x, float(result.fun)
    best, _ = _pattern_search(objective, best, best_value, 0.1 * scale,
                              resolution * 1e-2)
    return f.like(best.reshape(shape))
