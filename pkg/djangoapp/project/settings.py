"""
Django settings for the spectral decomposition project.

The project has no web front end and no database: Django provides the
settings layer, the management commands (``manage.py decompose`` and
friends), logging configuration and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = BASE_DIR.parent / 'data'

# Only used by Django internals (signing); nothing here is served.
SECRET_KEY = os.getenv('SECRET_KEY', 'change-me')

DEBUG = bool(int(os.getenv('DEBUG', 0)))

ALLOWED_HOSTS: list[str] = []

# Application definition

INSTALLED_APPS = [
    'decomposition',
]

MIDDLEWARE: list[str] = []

# No models, no migrations.
DATABASES: dict = {}


# Internationalization
# https://docs.djangoproject.com/en/5.0/topics/i18n/

LANGUAGE_CODE = 'pt-br'

TIME_ZONE = 'America/Sao_Paulo'

USE_I18N = True

USE_TZ = True


# Spectral decomposition defaults

# Relative duality gap at which the iterative prox solvers stop.
SPECTRAL_TOL = float(os.getenv('SPECTRAL_TOL', '1e-8'))
SPECTRAL_MAX_ITER = int(os.getenv('SPECTRAL_MAX_ITER', '50000'))
# ||u_k|| <= eps * ||f|| marks extinction of a flow.
SPECTRAL_EXTINCTION_EPS = float(
    os.getenv('SPECTRAL_EXTINCTION_EPS', '1e-8')
)
SPECTRAL_GRID_STEPS = int(os.getenv('SPECTRAL_GRID_STEPS', '200'))
# /data/runs
SPECTRAL_OUTPUT_DIR = Path(
    os.getenv('SPECTRAL_OUTPUT_DIR', str(DATA_DIR / 'runs'))
)


# Logging
# https://docs.djangoproject.com/en/5.0/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'decomposition': {
            'handlers': ['console'],
            'level': os.getenv('SPECTRAL_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}
