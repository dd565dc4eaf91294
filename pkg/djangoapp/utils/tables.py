"""
Plain-text tables and content hashes for run artifacts.

Functions:
    read_csv(path)
        One value per line (1D) or comma-separated rows (2D).
    write_csv(path, values)
        Same layout, full double precision.
    write_columns(path, columns)
        Named columns with a header line.
    file_sha256(path)
        Hex digest of the file contents.
"""
import hashlib

import numpy as np

CSV_FORMAT = '%.17g'


def read_csv(path):
    """Load a 1D or 2D float array written by `write_csv`."""
    return np.loadtxt(path, delimiter=',', dtype=np.float64, ndmin=1)


def write_csv(path, values):
    values = np.asarray(values, dtype=np.float64)
    np.savetxt(path, values, fmt=CSV_FORMAT, delimiter=',')


def write_columns(path, columns):
    """
    Write ``{name: 1D array}`` as CSV with a header; columns must share
    their length.
    """
    names = list(columns)
    table = np.column_stack([np.asarray(columns[name], dtype=np.float64)
                             for name in names]) if names else np.zeros((0, 0))
    np.savetxt(path, table.reshape(-1, len(names)), fmt=CSV_FORMAT,
               delimiter=',', header=','.join(names), comments='')


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()
