"""
Module for reading and writing grayscale PGM images.

2D signals are stored as 16-bit PGM files (P5, maxval 65535) next to a
JSON sidecar ``<name>.pgm.json`` holding the affine map back to the
original values, ``values = offset + scale * pixels``.
"""
import json
from pathlib import Path

import numpy as np
from PIL import Image

MAXVAL = 65535


def sidecar_path(image_path):
    """Path of the JSON sidecar of `image_path`."""
    image_path = Path(image_path)
    return image_path.with_name(image_path.name + '.json')


def write_pgm(image_path, values):
    """
    Save a 2D array as a 16-bit PGM plus its rescaling sidecar.

    The array is mapped affinely onto [0, 65535] and rounded, so a read
    back is exact up to ``scale / 2``.

    Args:
        image_path (Path | str): destination, usually ``*.pgm``.
        values (np.ndarray): 2D float array.

    Returns:
        dict: the sidecar contents.
    """
    values = np.asarray(values, dtype=np.float64)
    low, high = float(values.min()), float(values.max())
    scale = (high - low) / MAXVAL if high > low else 1.0
    pixels = np.rint((values - low) / scale).astype(np.int32)
    Image.fromarray(pixels, mode='I').save(image_path, format='PPM')
    sidecar = {'offset': low, 'scale': scale, 'maxval': MAXVAL}
    sidecar_path(image_path).write_text(json.dumps(sidecar, indent=2))
    return sidecar


def read_pgm(image_path):
    """
    Load a P2/P5 grayscale image as a float array.

    When a sidecar exists its affine map is applied; otherwise raw pixel
    values are returned.
    """
    with Image.open(image_path) as image_pillow:
        if image_pillow.mode not in ('L', 'I', 'I;16', 'I;16B'):
            raise ValueError(f'PGM em tons de cinza esperado, '
                             f'modo {image_pillow.mode}')
        pixels = np.asarray(image_pillow, dtype=np.float64)
    sidecar = sidecar_path(image_path)
    if sidecar.exists():
        params = json.loads(sidecar.read_text())
        return params['offset'] + params['scale'] * pixels
    return pixels
