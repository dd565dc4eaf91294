"""
Synthetic inputs with seeded noise.

Every generator draws its random structure first and its noise last, so a
call with ``noise=0`` returns the clean counterpart of a noisy call with
the same seed.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from decomposition.core import Signal
from decomposition.exceptions import ParameterError
from utils.rands import gaussian_noise, make_rng

# (start on [0, 1), value at start, slope)
PIECEWISE_LINEAR = (
    (0.0, 0.2, 2.0),
    (0.2, 1.3, -1.5),
    (0.45, -0.4, 0.0),
    (0.6, -0.6, 4.0),
    (0.8, 0.9, -2.0),
)

SINUSOID_MODES = ((3, 0.5), (11, 0.35), (24, 0.25), (40, 0.2))


def step(n: int = 64, noise: float = 0.0, seed: int = 0) -> Signal:
    """Zero-mean step ``[1, ..., 1, -1, ..., -1]``."""
    if n < 2:
        raise ParameterError('Degrau exige n >= 2.')
    half = n // 2
    values = np.concatenate((np.ones(half), -np.ones(n - half)))
    return Signal(values + gaussian_noise(n, noise, make_rng(seed)))


def random_zero_mean(n: int = 64, noise: float = 1.0,
                     seed: int = 0) -> Signal:
    """Gaussian samples with their mean removed."""
    values = gaussian_noise(n, noise or 1.0, make_rng(seed))
    return Signal(values - values.mean())


def dct_mode(n: int, k: int) -> np.ndarray:
    """Unit-amplitude cosine aligned with the k-th DCT-II atom."""
    return np.cos(np.pi * k * (np.arange(n) + 0.5) / n)


def sinusoid_mixture(n: int = 128, noise: float = 0.05, seed: int = 0,
                     modes=SINUSOID_MODES) -> Signal:
    """Sum of DCT-aligned cosines ``(index, amplitude)`` plus noise."""
    values = sum(amplitude * dct_mode(n, k) for k, amplitude in modes)
    return Signal(values + gaussian_noise(n, noise, make_rng(seed)))


def piecewise_linear(n: int = 256, noise: float = 0.1,
                     seed: int = 0) -> Signal:
    """
    Piecewise linear signal with jumps; ``noise`` is the standard deviation
    as a fraction of the clean range.
    """
    x = np.arange(n) / n
    values = np.zeros(n)
    for start, value, slope in PIECEWISE_LINEAR:
        inside = x >= start
        values[inside] = value + slope * (x[inside] - start)
    spread = values.max() - values.min()
    return Signal(values + gaussian_noise(n, noise * spread, make_rng(seed)))


def collaborative_peaks(n: int = 100, signals: int = 15, peaks: int = 10,
                        noise: float = 0.05, seed: int = 0) -> Signal:
    """
    Rows are positions, columns are signals. All signals peak at the same
    ``peaks`` rows with amplitudes in [1, 2] and random signs.
    """
    rng = make_rng(seed)
    support = np.sort(rng.choice(n, size=peaks, replace=False))
    amplitudes = rng.uniform(1.0, 2.0, size=(peaks, signals))
    signs = rng.choice((-1.0, 1.0), size=(peaks, signals))
    values = np.zeros((n, signals))
    values[support] = signs * amplitudes
    return Signal(values + gaussian_noise(values.shape, noise, rng))


def collaborative_jumps(n: int = 100, signals: int = 15,
                        noise: float = 0.05, seed: int = 0) -> Signal:
    """
    Piecewise constant columns sharing one jump row, each with levels and
    a jump height of its own.
    """
    rng = make_rng(seed)
    jump = int(rng.integers(n // 4, 3 * n // 4))
    levels = rng.uniform(-1.0, 1.0, size=signals)
    heights = rng.uniform(1.0, 2.0, size=signals) \
        * rng.choice((-1.0, 1.0), size=signals)
    values = np.tile(levels, (n, 1))
    values[jump:] += heights
    return Signal(values + gaussian_noise(values.shape, noise, rng))


def block_image(height: int = 32, width: int = 32, noise: float = 0.0,
                seed: int = 0) -> Signal:
    """Two nested rectangles on a zero background."""
    values = np.zeros((height, width))
    values[height // 8: 7 * height // 8, width // 8: 5 * width // 8] = 1.0
    values[height // 4: height // 2, width // 2: 7 * width // 8] = -0.5
    return Signal(values + gaussian_noise(values.shape, noise,
                                          make_rng(seed)))


GENERATORS: dict[str, Callable[..., Signal]] = {
    'step': step,
    'random': random_zero_mean,
    'sinusoids': sinusoid_mixture,
    'pwlinear': piecewise_linear,
    'collab_peaks': collaborative_peaks,
    'collab_jumps': collaborative_jumps,
    'blocks': block_image,
}


def generate(kind: str, n: int, noise: float, seed: int) -> Signal:
    """
    Dispatch to a generator; 2D generators build square images of side n.

    Raises:
        ParameterError: unknown generator.
    """
    if kind not in GENERATORS:
        raise ParameterError(
            'Gerador desconhecido: %(kind)s.', params={'kind': kind},
        )
    if kind == 'blocks':
        return block_image(n, n, noise, seed)
    return GENERATORS[kind](n, noise=noise, seed=seed)
