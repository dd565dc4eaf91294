from decomposition.management.commands._base import SpectralCommand
from decomposition.pipeline import run_spectrum


class Command(SpectralCommand):
    help = 'Grava apenas o espectro (spectrum.csv) de um sinal.'

    def run(self, config):
        return str(run_spectrum(config))
