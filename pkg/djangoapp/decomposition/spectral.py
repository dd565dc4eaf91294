"""
Spectral decompositions built from scale paths.

The wavelength representation ``phi = t u''`` is a measure in t. A path
sampled at nodes is read as piecewise linear in t (constant beyond the
last node, equal to f at t = 0), so ``u''`` is a sum of Diracs at the
nodes and each band atom is the exact integral of phi over one node:

    Phi_k = t_k (D_k - D_{k-1}),   D_k = (u_{k+1} - u_k) / (t_{k+1} - t_k)

Abel summation gives ``sum_k Phi_k + u_N = f``, so the tail is the last
sample. For gradient flows ``D_k = -p_{k+1}`` and the atoms read
``t_k (p_k - p_{k+1})``. The frequency representation of the inverse
scale space uses ``Psi_k = v_k - v_{k-1}`` with tail ``f - v_N``.
Atoms are integrals, so switching representation relabels bands by
``t = 1/s`` and reverses their order without touching the atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from decomposition.core import Signal, sum_signals
from decomposition.exceptions import ParameterError
from decomposition.flows import Method, ScalePath
from decomposition.functionals import evaluate


class Representation(str, Enum):
    WAVELENGTH = 'wavelength'
    FREQUENCY = 'frequency'


@dataclass(frozen=True, eq=False)
class Band:
    """One atom with its position in both scale variables (s = 1/t)."""
    t: float
    s: float
    atom: Signal


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Ordered band atoms plus tail and nullspace components.

    Bands increase in t (wavelength) or in s (frequency).
    """
    bands: tuple[Band, ...]
    tail: Signal
    nullspace: Signal
    method: Method
    representation: Representation

    @property
    def positions(self) -> np.ndarray:
        if self.representation is Representation.WAVELENGTH:
            return np.array([band.t for band in self.bands])
        return np.array([band.s for band in self.bands])

    @property
    def atoms(self) -> tuple[Signal, ...]:
        return tuple(band.atom for band in self.bands)

    def edges(self) -> np.ndarray:
        return cell_edges(self.positions)

    def widths(self) -> np.ndarray:
        return np.diff(self.edges())


def cell_edges(positions: np.ndarray) -> np.ndarray:
    """
    Edges of the cells around increasing ``positions``: midpoints inside,
    half a neighbouring gap outside, never below zero.
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.size == 0:
        return np.zeros(1)
    if positions.size == 1:
        return np.array([0.0, 2.0 * positions[0]])
    middle = 0.5 * (positions[1:] + positions[:-1])
    first = max(positions[0] - (middle[0] - positions[0]), 0.0)
    last = positions[-1] + (positions[-1] - middle[-1])
    return np.concatenate(([first], middle, [last]))


def _check_length(path: ScalePath) -> None:
    if len(path.grid) < 3:
        raise ParameterError('Decomposição exige pelo menos 3 nós.')


def wavelength_bands(path: ScalePath) -> SpectralDecomposition:
    """
    Wavelength bands of a gf/vm path; an iss path goes through its
    frequency bands.

    Raises:
        ParameterError: fewer than 3 nodes.
    """
    _check_length(path)
    if path.method is Method.IS:
        return to_wavelength(frequency_bands(path))
    times = list(path.nodes)
    samples = [signal.values for signal in path.u]
    if times[0] > 0:
        times.insert(0, 0.0)
        samples.insert(0, path.f.values)
    slopes = [
        (samples[j + 1] - samples[j]) / (times[j + 1] - times[j])
        for j in range(len(times) - 1)
    ]
    slopes.append(np.zeros(path.f.shape))
    bands = tuple(
        Band(times[j], 1.0 / times[j],
             path.f.like(times[j] * (slopes[j] - slopes[j - 1])))
        for j in range(1, len(times))
    )
    return SpectralDecomposition(
        bands, path.f.like(samples[-1]), path.nullspace_signal(),
        path.method, Representation.WAVELENGTH,
    )


def frequency_bands(path: ScalePath) -> SpectralDecomposition:
    """
    Frequency bands of an iss path, ``Psi_k = v_k - v_{k-1}`` over
    ``(s_{k-1}, s_k]`` with ``v = 0`` at s = 0; gf/vm paths go through
    their wavelength bands.
    """
    _check_length(path)
    if path.method is not Method.IS:
        return to_frequency(wavelength_bands(path))
    bands = []
    previous = np.zeros(path.f.shape)
    for s, v in zip(path.nodes, path.u):
        if s > 0:
            bands.append(Band(1.0 / s, float(s),
                              path.f.like(v.values - previous)))
        previous = v.values
    return SpectralDecomposition(
        tuple(bands), path.f - path.u[-1], path.nullspace_signal(),
        path.method, Representation.FREQUENCY,
    )


def _relabel(dec: SpectralDecomposition,
             representation: Representation) -> SpectralDecomposition:
    if dec.representation is representation:
        return dec
    return SpectralDecomposition(
        tuple(reversed(dec.bands)), dec.tail, dec.nullspace, dec.method,
        representation,
    )


def to_wavelength(dec: SpectralDecomposition) -> SpectralDecomposition:
    return _relabel(dec, Representation.WAVELENGTH)


def to_frequency(dec: SpectralDecomposition) -> SpectralDecomposition:
    return _relabel(dec, Representation.FREQUENCY)


def reconstruct(dec: SpectralDecomposition) -> Signal:
    """``sum Phi_k + tail + nullspace``, summed in band order."""
    return sum_signals(
        list(dec.atoms) + [dec.tail, dec.nullspace], dec.tail,
    )


@dataclass(frozen=True)
class TransferFunction:
    """
    Piecewise constant H(t) in the wavelength variable.

    ``H(t)`` is the sum of the gains of the intervals ``[lo, hi)`` that
    contain t, plus ``constant``. ``tail`` and ``nullspace`` weight the two
    extra components (1 keeps them, 0 drops them).
    """
    intervals: tuple[tuple[float, float, float], ...] = ()
    constant: float = 0.0
    tail: float = 1.0
    nullspace: float = 1.0

    def __post_init__(self):
        for lo, hi, _ in self.intervals:
            if not lo < hi:
                raise ParameterError(
                    'Intervalo de filtro inválido: %(lo)s:%(hi)s.',
                    params={'lo': lo, 'hi': hi},
                )

    @classmethod
    def identity(cls) -> TransferFunction:
        return cls(constant=1.0)

    @classmethod
    def low_pass(cls, cutoff: float) -> TransferFunction:
        """Keep scales ``t >= cutoff`` (coarse structure)."""
        return cls(((cutoff, np.inf, 1.0),))

    @classmethod
    def high_pass(cls, cutoff: float) -> TransferFunction:
        """Keep scales ``t < cutoff`` (fine structure)."""
        return cls(((0.0, cutoff, 1.0),), tail=0.0, nullspace=0.0)

    @classmethod
    def band_pass(cls, lo: float, hi: float) -> TransferFunction:
        return cls(((lo, hi, 1.0),), tail=0.0, nullspace=0.0)

    def __call__(self, t: float) -> float:
        return self.constant + sum(
            gain for lo, hi, gain in self.intervals if lo <= t < hi
        )

    def scaled(self, factor: float) -> TransferFunction:
        return TransferFunction(
            tuple((lo, hi, factor * gain) for lo, hi, gain in self.intervals),
            factor * self.constant, factor * self.tail,
            factor * self.nullspace,
        )

    def __add__(self, other: TransferFunction) -> TransferFunction:
        return TransferFunction(
            self.intervals + other.intervals, self.constant + other.constant,
            self.tail + other.tail, self.nullspace + other.nullspace,
        )

    def complement(self) -> TransferFunction:
        """``1 - H`` including the tail and nullspace weights."""
        return TransferFunction.identity() + self.scaled(-1.0)


def apply_filter(dec: SpectralDecomposition, H: TransferFunction) -> Signal:
    """``sum H(t_k) Phi_k + H.tail * tail + H.nullspace * nullspace``."""
    weighted = [band.atom * H(band.t) for band in dec.bands]
    weighted.append(dec.tail * H.tail)
    weighted.append(dec.nullspace * H.nullspace)
    return sum_signals(weighted, dec.tail)


class SpectrumDefinition(str, Enum):
    L1 = 'l1'
    ENERGY = 'energy'


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Spectral response sampled as a density over cells around ``t``.

    ``S * widths`` are the per-band masses (L1) and ``S**2 * widths`` the
    per-band energies (energy definition). ``clipped`` is the negative
    energy mass set to zero.
    """
    t: np.ndarray
    S: np.ndarray
    definition: SpectrumDefinition
    widths: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    clipped: float = 0.0

    def areas(self) -> np.ndarray:
        if self.definition is SpectrumDefinition.ENERGY:
            return self.S ** 2 * self.widths
        return self.S * self.widths

    def peaks(self, fraction: float = 0.05) -> np.ndarray:
        """Indices of local maxima above ``fraction`` of the largest value."""
        S = self.S
        if S.size == 0 or not np.any(S > 0):
            return np.zeros(0, dtype=int)
        padded = np.concatenate(([-np.inf], S, [-np.inf]))
        is_peak = (S > padded[:-2]) & (S >= padded[2:])
        return np.flatnonzero(is_peak & (S >= fraction * S.max()))


def spectrum_l1(dec: SpectralDecomposition) -> Spectrum:
    """``S_k = ||Phi_k||_L1 / width_k`` on the wavelength cells."""
    dec = to_wavelength(dec)
    widths = dec.widths()
    masses = np.array([atom.norm_l1() for atom in dec.atoms])
    density = np.divide(masses, widths, out=np.zeros_like(masses),
                        where=widths > 0)
    return Spectrum(dec.positions, density, SpectrumDefinition.L1, widths)


def band_purity(dec: SpectralDecomposition, position: float) -> float:
    """
    Share of the band L1 mass held by the first band at or beyond
    ``position`` (t or s, in the representation of ``dec``) and its two
    neighbours; 0 for an empty decomposition.
    """
    masses = np.array([atom.norm_l1() for atom in dec.atoms])
    total = float(np.sum(masses))
    if total == 0:
        return 0.0
    index = int(np.searchsorted(dec.positions, position, side='left'))
    index = min(index, masses.size - 1)
    return float(np.sum(masses[max(index - 1, 0):index + 2])) / total


def _flow_nodes(path: ScalePath):
    """Nodes with t > 0 and their samples (t = 0 carries no band)."""
    keep = [k for k, t in enumerate(path.nodes) if t > 0]
    return (path.nodes[keep], [path.u[k] for k in keep],
            [path.p[k] for k in keep])


def _energy_masses(path: ScalePath) -> tuple[np.ndarray, np.ndarray]:
    """
    Dirac weights of ``t^2 d^2/dt^2 J(u(t))`` at the nodes, from
    ``d/dt J(u) = -||p||^2`` with p constant on ``(t_{k-1}, t_k]``.
    """
    times, _, subgradients = _flow_nodes(path)
    squares = np.array([p.norm() ** 2 for p in subgradients])
    following = np.append(
        squares[1:], 0.0 if path.extinction_index is not None
        else squares[-1],
    )
    return times, times ** 2 * (squares - following)


def spectrum_energy(path: ScalePath) -> Spectrum:
    """
    ``S(t) = t sqrt(d^2/dt^2 J(u(t)))`` of a gradient flow, as a density on
    the node cells. Negative second derivatives are clipped and reported.

    Raises:
        ParameterError: path is not a gradient flow.
    """
    if path.method is not Method.GF:
        raise ParameterError(
            'Espectro de energia só está definido para o fluxo gradiente.'
        )
    times, masses = _energy_masses(path)
    widths = np.diff(cell_edges(times))
    clipped = float(-np.sum(masses[masses < 0]))
    positive = np.maximum(masses, 0.0)
    density = np.sqrt(np.divide(positive, widths,
                                out=np.zeros_like(positive),
                                where=widths > 0))
    return Spectrum(times, density, SpectrumDefinition.ENERGY, widths,
                    clipped)


@dataclass(frozen=True)
class OrthogonalityReport:
    """
    ``max_ratio`` normalizes each pairing by ``||Phi_k|| ||u_k||``;
    ``max_scaled`` by ``||Phi_k|| ||f||``. The first is O(1) at the node
    before extinction unless the grid hits the extinction time, the second
    is first order in the step.
    """
    max_ratio: float
    max_scaled: float
    time: Optional[float]
    ratios: tuple[float, ...]

    def as_dict(self) -> dict:
        return {'max_ratio': self.max_ratio, 'max_scaled': self.max_scaled,
                'time': self.time}


def orthogonality_report(path: ScalePath,
                         dec: SpectralDecomposition) -> OrthogonalityReport:
    """
    Pairings of each band with the flow sample at its node.

    ``max_ratio`` is ``max_k |<Phi_k, u_k>| / (||Phi_k|| ||u_k|| + eps)``
    and ``max_scaled`` is ``max_k |<Phi_k, u_k>| / (||Phi_k|| ||f|| + eps)``
    with ``eps = 1e-8 ||f||^2`` so rounding-level atoms do not count.

    On a discrete grid ``max_ratio`` stays O(1) at the last node before
    extinction, where ``u_k`` is small and nearly parallel to its band.
    ``max_scaled`` is the diagnostic to check: it is first order in the
    step and shrinks when the step is halved.
    """
    if path.method is not Method.GF:
        raise ParameterError('Relatório de ortogonalidade exige fluxo gf.')
    dec = to_wavelength(dec)
    times, samples, _ = _flow_nodes(path)
    norm_f = path.f.norm()
    eps = 1e-8 * norm_f ** 2
    ratios, scaled = [], []
    for band, u in zip(dec.bands, samples):
        pairing = abs(band.atom.inner(u))
        ratios.append(pairing / (band.atom.norm() * u.norm() + eps)
                      if eps > 0 else 0.0)
        scaled.append(pairing / (band.atom.norm() * norm_f + eps)
                      if eps > 0 else 0.0)
    if not ratios:
        return OrthogonalityReport(0.0, 0.0, None, ())
    worst = int(np.argmax(ratios))
    return OrthogonalityReport(float(ratios[worst]), float(max(scaled)),
                               float(times[worst]), tuple(ratios))


@dataclass(frozen=True)
class ParsevalReport:
    norm_squared: float
    dissipation_integral: float
    spectrum_integral: float
    dissipation_error: float
    spectrum_error: float
    clipped: float
    extinct: bool

    def as_dict(self) -> dict:
        return {
            'norm_squared': self.norm_squared,
            'dissipation_integral': self.dissipation_integral,
            'spectrum_integral': self.spectrum_integral,
            'dissipation_error': self.dissipation_error,
            'spectrum_error': self.spectrum_error,
            'clipped': self.clipped,
            'extinct': self.extinct,
        }


def parseval_report(f: Signal, path: ScalePath) -> ParsevalReport:
    """
    Relative errors of ``||f||^2 = 2 int J(u(t)) dt`` (trapezoidal rule on
    the nodes, J(f) at t = 0) and of ``||f||^2 = int S(t)^2 dt`` (sum of the
    band energies).
    """
    if path.method is not Method.GF:
        raise ParameterError('Identidade de Parseval exige fluxo gf.')
    norm_squared = f.norm() ** 2
    times, samples, _ = _flow_nodes(path)
    values = [evaluate(path.spec, u) for u in samples]
    times = np.concatenate(([0.0], times))
    values = np.array([evaluate(path.spec, f)] + values)
    dissipation = 2.0 * float(trapezoid(values, times))
    _, masses = _energy_masses(path)
    energy = float(np.sum(np.maximum(masses, 0.0)))
    clipped = float(-np.sum(masses[masses < 0]))
    if norm_squared == 0:
        errors = (0.0, 0.0)
    else:
        errors = (abs(norm_squared - dissipation) / norm_squared,
                  abs(norm_squared - energy) / norm_squared)
    return ParsevalReport(norm_squared, dissipation, energy, *errors,
                          clipped, path.extinction_index is not None)
