"""
This module contains validators for command-line inputs.

Validators:
    validate_signal_path: the input is an existing CSV or PGM file.
    validate_flag: a 0/1 switch.
"""
from pathlib import Path

from django.core.exceptions import ValidationError

SIGNAL_SUFFIXES = ('.csv', '.pgm')


def validate_signal_path(path):
    """
    Validate that `path` names an existing CSV or PGM file.

    This function checks the file extension first and then its existence.
    If either check fails, it raises a ValidationError.
    """
    path = Path(path)
    if path.suffix.lower() not in SIGNAL_SUFFIXES:
        raise ValidationError('Entrada precisa ser CSV ou PGM.')
    if not path.is_file():
        raise ValidationError(
            'Arquivo de entrada não encontrado: %(path)s.',
            params={'path': str(path)},
        )


def validate_flag(value):
    """Validate that a tail/mean switch is 0 or 1."""
    if value not in (0, 1):
        raise ValidationError(
            'Opção precisa ser 0 ou 1 (recebido %(value)s).',
            params={'value': value},
        )
