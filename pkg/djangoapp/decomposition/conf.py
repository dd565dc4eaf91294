"""
Default numerical parameters of the decomposition app.

Values come from ``django.conf.settings`` (see ``SPECTRAL_*`` in
``project/settings.py``). When the modules are imported outside a
configured Django process the hard defaults below are used.
"""
from pathlib import Path

from django.conf import settings

DEFAULTS = {
    'SPECTRAL_TOL': 1e-8,
    'SPECTRAL_MAX_ITER': 50_000,
    'SPECTRAL_EXTINCTION_EPS': 1e-8,
    'SPECTRAL_GRID_STEPS': 200,
    'SPECTRAL_OUTPUT_DIR': Path('data') / 'runs',
}


def get(name: str):
    """
    Return the configured value of ``name`` or its default.
    """
    if settings.configured:
        return getattr(settings, name, DEFAULTS[name])
    return DEFAULTS[name]
