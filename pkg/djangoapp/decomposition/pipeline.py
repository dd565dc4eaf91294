"""
Run logic behind the management commands.

Functions:
    decompose(f, spec, method, ...)
        Nullspace removal, scale path and wavelength bands in one call.
    run_decompose(config), run_filter(config), run_spectrum(config),
    run_verify(config), run_gen(config)
        Read inputs, compute, write artifacts and return a summary.

Artifacts of a decompose run (all under ``out_dir``)::

    manifest.json        input hash, band positions and files, bin edges
    bands/band_0000.csv  one file per band, 2D signals as CSV rows
    tail.csv, nullspace.csv
    spectrum.csv         t, S_l1 and, for gradient flows, S_energy
    diagnostics.json     reconstruction, Parseval, orthogonality, extinction
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np
from django.core.exceptions import ValidationError

from decomposition import conf
from decomposition.config import RunConfig
from decomposition.core import (
    GEOMETRIC, UNIFORM, Signal, TimeGrid, make_time_grid,
)
from decomposition.exceptions import (
    EigenfunctionError, ManifestMismatch, ParameterError,
)
from decomposition.flows import RUNNERS, Method, ScalePath, scale_path
from decomposition.functionals import (
    TRANSFORMS, FunctionalKind, FunctionalSpec,
)
from decomposition.oracles import dct_closed_form_path, make_tv_eigenfunction
from decomposition.spectral import (
    Band, Representation, SpectralDecomposition, apply_filter, band_purity,
    orthogonality_report, parseval_report, reconstruct, spectrum_energy,
    spectrum_l1, to_frequency, wavelength_bands,
)
from decomposition.synthetic import generate, sinusoid_mixture
from utils.images import read_pgm, write_pgm
from utils.tables import file_sha256, read_csv, write_columns, write_csv
from utils.validators import validate_signal_path

logger = logging.getLogger(__name__)

# Bounds of the verify suite.
VERIFY_BOUNDS = {
    'eigenfunction_certificate': 1e-8,
    'reconstruction': 1e-10,
    'parseval_dissipation': 1e-2,
    'parseval_energy': 5e-2,
    'eigenfunction_purity_gf': 5e-2,
    'eigenfunction_purity_vm': 5e-2,
    'eigenfunction_purity_iss': 5e-2,
    'l1_agreement_gf': 1e-8,
    'l1_agreement_vm': 1e-8,
    'l1_agreement_iss': 1e-8,
}


def decompose(f: Signal, spec: FunctionalSpec, method: Method | str,
              grid: Optional[TimeGrid] = None, tol: Optional[float] = None,
              max_iter: Optional[int] = None, steps: Optional[int] = None
              ) -> tuple[ScalePath, SpectralDecomposition]:
    """Scale path of ``f`` and its wavelength bands (nullspace attached)."""
    path = scale_path(f, spec, method, grid, tol, max_iter, steps)
    logger.info('%s path of %s: %d nodes, extinction %s', path.method.value,
                spec.label(), len(path.grid), path.extinction_time)
    return path, wavelength_bands(path)


def load_signal(path: str | Path, spacing: float = 1.0) -> Signal:
    """
    Read a CSV (1D or 2D) or PGM (2D) file.

    Raises:
        ParameterError: wrong extension, missing or unreadable file.
    """
    try:
        validate_signal_path(path)
    except ValidationError as error:
        raise ParameterError(error.messages[0])
    path = Path(path)
    try:
        if path.suffix.lower() == '.pgm':
            values = read_pgm(path)
        else:
            values = read_csv(path)
    except (OSError, ValueError) as error:
        raise ParameterError(
            'Entrada ilegível %(path)s: %(error)s.',
            params={'path': str(path), 'error': error},
        )
    return Signal(values, spacing)


def save_signal(directory: Path, stem: str, signal: Signal,
                preview: bool = False) -> str:
    """
    Write ``stem.csv`` at full precision (2D signals as rows) and return
    its name. With ``preview`` a 2D signal also gets ``stem.pgm``.
    """
    name = f'{stem}.csv'
    write_csv(directory / name, signal.values)
    if preview and signal.ndim == 2:
        write_pgm(directory / f'{stem}.pgm', signal.values)
    return name


def save_input(directory: Path, stem: str, signal: Signal) -> str:
    """Write an input file: ``stem.pgm`` for images, ``stem.csv`` else."""
    if signal.ndim == 2:
        name = f'{stem}.pgm'
        write_pgm(directory / name, signal.values)
        return name
    return save_signal(directory, stem, signal)


def _read_saved(path: Path, spacing: float, shape: list[int]) -> Signal:
    return Signal(np.reshape(read_csv(path), shape), spacing)


def write_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n')


def output_dir(config: RunConfig) -> Path:
    directory = Path(config.out_dir or conf.get('SPECTRAL_OUTPUT_DIR'))
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def reconstruction_error(f: Signal, dec: SpectralDecomposition) -> float:
    """Max abs reconstruction error over ``max |f|`` (absolute at 0)."""
    error = float(np.max(np.abs(reconstruct(dec).values - f.values)))
    peak = float(np.max(np.abs(f.values)))
    return error / peak if peak > 0 else error


def diagnostics(f: Signal, path: ScalePath,
                dec: SpectralDecomposition) -> dict[str, Any]:
    report: dict[str, Any] = {
        'reconstruction_error': reconstruction_error(f, dec),
        'extinction_time': path.extinction_time,
        'method': path.method.value,
        'functional': path.spec.label(),
        'nodes': len(path.grid),
    }
    if path.method is Method.GF:
        report['parseval'] = parseval_report(path.f, path).as_dict()
        report['orthogonality'] = orthogonality_report(path, dec).as_dict()
    return report


def spectrum_columns(path: ScalePath,
                     dec: SpectralDecomposition) -> dict[str, np.ndarray]:
    """Spectrum table; empty when the decomposed signal is zero."""
    if path.f.is_zero():
        columns = {'t': np.zeros(0), 'S_l1': np.zeros(0)}
        if path.method is Method.GF:
            columns['S_energy'] = np.zeros(0)
        return columns
    l1 = spectrum_l1(dec)
    columns = {'t': l1.t, 'S_l1': l1.S}
    if path.method is Method.GF:
        columns['S_energy'] = spectrum_energy(path).S
    return columns


def run_decompose(config: RunConfig) -> Path:
    """Decompose ``config.input``; return the manifest path."""
    if not config.input:
        raise ParameterError('decompose exige --in.')
    f = load_signal(config.input, config.spacing)
    directory = output_dir(config)
    bands_dir = directory / 'bands'
    bands_dir.mkdir(exist_ok=True)
    path, dec = decompose(
        f, config.functional_spec(), config.method, config.time_grid(),
        config.tol, config.max_iter, config.grid_steps,
    )
    band_entries = []
    for index, band in enumerate(dec.bands):
        name = save_signal(bands_dir, f'band_{index:04d}', band.atom)
        band_entries.append({'t': band.t, 's': band.s,
                             'file': f'bands/{name}'})
    write_columns(directory / 'spectrum.csv', spectrum_columns(path, dec))
    report = diagnostics(f, path, dec)
    write_json(directory / 'diagnostics.json', report)
    manifest = {
        'input': str(Path(config.input).resolve()),
        'input_sha256': file_sha256(config.input),
        'functional': path.spec.label(),
        'method': path.method.value,
        'representation': dec.representation.value,
        'spacing': f.spacing,
        'shape': list(f.shape),
        'edges': dec.edges().tolist(),
        'bands': band_entries,
        'tail': save_signal(directory, 'tail', dec.tail),
        'nullspace': save_signal(directory, 'nullspace', dec.nullspace),
        'spectrum': 'spectrum.csv',
        'diagnostics': 'diagnostics.json',
        'config': config.as_dict(),
    }
    manifest_path = directory / 'manifest.json'
    write_json(manifest_path, manifest)
    logger.info('decomposition of %s written to %s (%d bands)',
                config.input, directory, len(dec.bands))
    return manifest_path


def load_decomposition(manifest_path: str | Path
                       ) -> tuple[dict[str, Any], SpectralDecomposition]:
    """
    Rebuild a wavelength decomposition from a manifest and its files.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, ValueError) as error:
        raise ParameterError(
            'Manifesto ilegível: %(error)s.', params={'error': error},
        )
    base = manifest_path.parent
    spacing, shape = manifest['spacing'], manifest['shape']
    bands = tuple(
        Band(entry['t'], entry['s'],
             _read_saved(base / entry['file'], spacing, shape))
        for entry in manifest['bands']
    )
    dec = SpectralDecomposition(
        bands,
        _read_saved(base / manifest['tail'], spacing, shape),
        _read_saved(base / manifest['nullspace'], spacing, shape),
        Method(manifest['method']),
        Representation(manifest['representation']),
    )
    return manifest, dec


def run_filter(config: RunConfig) -> dict[str, Any]:
    """
    Filter a decomposition (from ``config.manifest`` or computed inline),
    write ``filtered.*`` and ``filter.json`` and return the report.

    Raises:
        ManifestMismatch: the input file is not the one decomposed.
    """
    if config.manifest:
        manifest, dec = load_decomposition(config.manifest)
        source = config.input or manifest['input']
        digest = file_sha256(source) if Path(source).is_file() else None
        if digest != manifest['input_sha256']:
            raise ManifestMismatch(
                f'Entrada {source} difere da decomposta '
                f'({manifest["input_sha256"][:12]}).'
            )
        f = load_signal(source, manifest['spacing'])
    else:
        if not config.input:
            raise ParameterError('filter exige --in ou --manifest.')
        f = load_signal(config.input, config.spacing)
        _, dec = decompose(
            f, config.functional_spec(), config.method, config.time_grid(),
            config.tol, config.max_iter, config.grid_steps,
        )
    H = config.transfer_function()
    filtered = apply_filter(dec, H)
    complement = apply_filter(dec, H.complement())
    total = (filtered + complement).values
    report = {
        'filter': config.filter or '0:inf:1',
        'tail': config.tail,
        'mean': config.mean,
        'complement_error': float(np.max(np.abs(
            total - reconstruct(dec).values))),
        'input_error': float(np.max(np.abs(total - f.values))),
    }
    directory = output_dir(config)
    report['output'] = save_signal(directory, 'filtered', filtered,
                                   preview=True)
    write_json(directory / 'filter.json', report)
    logger.info('filtered output written to %s', directory)
    return report


def run_spectrum(config: RunConfig) -> Path:
    """Decompose ``config.input`` and write only ``spectrum.csv``."""
    if not config.input:
        raise ParameterError('spectrum exige --in.')
    f = load_signal(config.input, config.spacing)
    path, dec = decompose(
        f, config.functional_spec(), config.method, config.time_grid(),
        config.tol, config.max_iter, config.grid_steps,
    )
    target = output_dir(config) / 'spectrum.csv'
    write_columns(target, spectrum_columns(path, dec))
    return target


def run_gen(config: RunConfig) -> Path:
    """Write a synthetic input named after its generator."""
    signal = generate(config.kind, config.n, config.noise, config.seed)
    directory = output_dir(config)
    return directory / save_input(directory, config.kind, signal)


def _check(name: str, value: float) -> dict[str, Any]:
    bound = VERIFY_BOUNDS[name]
    return {'name': name, 'value': float(value), 'bound': bound,
            'passed': bool(value <= bound)}


def _eigenfunction_checks(config: RunConfig) -> list[dict[str, Any]]:
    try:
        certificate = make_tv_eigenfunction(config.n, config.spacing)
    except EigenfunctionError as error:
        return [_check('eigenfunction_certificate', error.residual)]
    checks = [_check('eigenfunction_certificate', certificate.residual)]
    f = certificate.f
    eigenvalue = certificate.eigenvalue
    horizon = 1.0 / eigenvalue
    grids = {
        Method.GF: make_time_grid(UNIFORM, 0.1 * horizon, 3.0 * horizon,
                                  config.grid_steps),
        Method.VM: make_time_grid(GEOMETRIC, 0.1 * horizon, 3.0 * horizon,
                                  config.grid_steps),
        Method.IS: make_time_grid(UNIFORM, 0.1 * eigenvalue,
                                  3.0 * eigenvalue, config.grid_steps),
    }
    spec = FunctionalSpec(FunctionalKind.TV1D)
    purity = {}
    for method, default in grids.items():
        path, dec = decompose(f, spec, method, config.time_grid() or default,
                              config.tol, config.max_iter)
        if method is Method.GF:
            checks.append(_check('reconstruction',
                                 reconstruction_error(f, dec)))
            parseval = parseval_report(path.f, path)
            checks.append(_check('parseval_dissipation',
                                 parseval.dissipation_error))
            checks.append(_check('parseval_energy', parseval.spectrum_error))
        if method is Method.IS:
            share = band_purity(to_frequency(dec), eigenvalue)
        else:
            share = band_purity(dec, horizon)
        purity[method] = 1.0 - share
    checks.extend(_check(f'eigenfunction_purity_{method.value}', value)
                  for method, value in purity.items())
    return checks


def _closed_form_deviation(f: Signal, generic: ScalePath,
                           closed: ScalePath) -> float:
    """
    Largest node-wise distance of two ℓ¹/DCT paths over ``||f||``. On an
    s-grid, coefficients within one step of their jump ``1/|c|`` are left
    out.
    """
    forward = TRANSFORMS['dct'].forward
    c = forward(f.values)
    jumps = np.full(c.shape, np.inf)
    np.divide(1.0, np.abs(c), out=jumps, where=c != 0)
    step = float(np.max(generic.grid.steps))
    deviation = 0.0
    for s, a, b in zip(generic.nodes, generic.u, closed.u):
        keep = np.ones(c.shape, dtype=bool)
        if generic.method is Method.IS:
            keep = np.abs(s - jumps) > step
        difference = forward(a.values) - forward(b.values)
        deviation = max(deviation,
                        float(np.linalg.norm(difference[keep])))
    return deviation / float(np.linalg.norm(f.values))


def _l1_agreement_checks(config: RunConfig) -> list[dict[str, Any]]:
    f = sinusoid_mixture(seed=config.seed)
    spec = FunctionalSpec(FunctionalKind.L1_ANALYSIS)
    largest = float(np.max(np.abs(TRANSFORMS['dct'].forward(f.values))))
    grids = {
        Method.GF: make_time_grid(GEOMETRIC, 1e-2, 1.05 * largest,
                                  config.grid_steps),
        Method.VM: make_time_grid(GEOMETRIC, 1e-2, 1.05 * largest,
                                  config.grid_steps),
        Method.IS: make_time_grid(UNIFORM, 0.5 / largest,
                                  0.5 * config.grid_steps / largest,
                                  config.grid_steps),
    }
    checks = []
    for method, grid in grids.items():
        generic = RUNNERS[method](f, spec, grid, config.tol, config.max_iter)
        closed = dct_closed_form_path(f, method, grid)
        checks.append(_check(f'l1_agreement_{method.value}',
                             _closed_form_deviation(f, generic, closed)))
    return checks


def run_verify(config: RunConfig) -> dict[str, Any]:
    """
    Run the invariant suite: step eigenfunction certificate,
    reconstruction and both Parseval identities of its gradient flow,
    band purity under all three methods, then closed-form agreement of
    the ℓ¹/DCT paths.
    """
    checks = _eigenfunction_checks(config) + _l1_agreement_checks(config)
    report = {'checks': checks,
              'passed': all(check['passed'] for check in checks)}
    write_json(output_dir(config) / 'verify.json', report)
    for check in checks:
        logger.info('verify %-26s %.3e <= %.1e: %s', check['name'],
                    check['value'], check['bound'],
                    'ok' if check['passed'] else 'FALHOU')
    return report
