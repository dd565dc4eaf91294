import json

from decomposition.management.commands._base import SpectralCommand
from decomposition.pipeline import run_filter


class Command(SpectralCommand):
    help = (
        'Filtra um sinal com H(t) constante por partes, a partir de um '
        'manifesto ou decompondo na hora.'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--manifest')
        parser.add_argument('--filter', help='lo:hi:ganho,... em t')
        parser.add_argument('--tail', type=int, choices=[0, 1])
        parser.add_argument('--mean', type=int, choices=[0, 1],
                            help='mantém a componente do núcleo')

    def run(self, config):
        report = run_filter(config)
        return json.dumps(report, sort_keys=True)
