"""
Seeded random streams for synthetic inputs.

Functions:
    make_rng(seed)
        A numpy Generator; the same seed always yields the same stream.
    gaussian_noise(shape, sigma, rng)
        Zero-mean Gaussian noise with standard deviation `sigma`.
"""
import numpy as np


def make_rng(seed=0):
    """
    Return a PCG64 generator seeded with `seed`.

    :param seed: int, optional, default=0.
    :return: numpy.random.Generator.
    """
    return np.random.default_rng(int(seed))


def gaussian_noise(shape, sigma, rng):
    """
    Draw Gaussian noise, or zeros when `sigma` is 0 (no draw is made, so the
    stream stays aligned with a noiseless run).

    :param shape: tuple. Shape of the noise array.
    :param sigma: float. Standard deviation.
    :param rng: numpy.random.Generator.
    :return: numpy.ndarray.
    """
    if sigma == 0:
        return np.zeros(shape)
    return sigma * rng.standard_normal(shape)
