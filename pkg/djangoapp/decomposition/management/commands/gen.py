from decomposition.management.commands._base import SpectralCommand
from decomposition.pipeline import run_gen
from decomposition.synthetic import GENERATORS


class Command(SpectralCommand):
    help = 'Gera um sinal sintético com ruído semeado.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--kind', choices=sorted(GENERATORS))
        parser.add_argument('--n', type=int)
        parser.add_argument('--noise', type=float)

    def run(self, config):
        return str(run_gen(config))
