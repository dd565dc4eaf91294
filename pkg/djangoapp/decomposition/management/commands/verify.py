import json

from django.core.management.base import CommandError

from decomposition.management.commands._base import (
    EXIT_VERIFY_FAILED, SpectralCommand,
)
from decomposition.pipeline import run_verify


class Command(SpectralCommand):
    help = (
        'Roda a bateria de invariantes (autofunção degrau, Parseval, '
        'reconstrução, pureza espectral nos três métodos, concordância '
        'l1/DCT); sai com 1 se algo falhar.'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--n', type=int,
                            help='tamanho da autofunção degrau')

    def run(self, config):
        report = run_verify(config)
        if not report['passed']:
            failed = [check['name'] for check in report['checks']
                      if not check['passed']]
            raise CommandError(
                f'Verificação falhou: {", ".join(failed)}',
                returncode=EXIT_VERIFY_FAILED,
            )
        return json.dumps(report, sort_keys=True)
