"""
Shared plumbing of the spectral management commands: the common flags,
config loading and the mapping of errors to exit codes.
"""
from django.core.management.base import BaseCommand, CommandError

from decomposition.config import RunConfig
from decomposition.exceptions import (
    ManifestMismatch, ParameterError, SolverError,
)

EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3
EXIT_MANIFEST = 4


class SpectralCommand(BaseCommand):
    """Parse flags into a RunConfig and hand it to ``run``."""

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON com chaves do RunConfig')
        parser.add_argument('--in', dest='input', help='CSV ou PGM')
        parser.add_argument('--out-dir', dest='out_dir')
        parser.add_argument('--functional',
                            help='tv1d, tv2d, tv2d_iso, l1, tgv2, collab, '
                                 'gradcollab (ex.: tgv2:beta=0.05; tgv2 só '
                                 'aceita sinais 1D)')
        parser.add_argument('--beta', type=float)
        parser.add_argument('--transform')
        parser.add_argument('--method', choices=['gf', 'vm', 'iss'])
        parser.add_argument('--grid', choices=['uniform', 'geometric'])
        parser.add_argument('--tmin', type=float)
        parser.add_argument('--tmax', type=float)
        parser.add_argument('--steps', type=int)
        parser.add_argument('--tol', type=float)
        parser.add_argument('--max-iter', dest='max_iter', type=int)
        parser.add_argument('--spacing', type=float)
        parser.add_argument('--seed', type=int)

    def run(self, config: RunConfig) -> str:
        raise NotImplementedError

    def handle(self, *args, **options):
        overrides = {key: options[key] for key in RunConfig.keys()
                     if key in options}
        try:
            config = RunConfig.load(options.get('config'), overrides)
            return self.run(config)
        except ParameterError as error:
            raise CommandError('; '.join(error.messages),
                               returncode=EXIT_BAD_INPUT) from error
        except SolverError as error:
            raise CommandError(str(error), returncode=EXIT_SOLVER) from error
        except ManifestMismatch as error:
            raise CommandError(str(error),
                               returncode=EXIT_MANIFEST) from error
