from decomposition.management.commands._base import SpectralCommand
from decomposition.pipeline import run_decompose


class Command(SpectralCommand):
    help = (
        'Decompõe um sinal em bandas espectrais e grava o manifesto. '
        'tgv2 só aceita sinais 1D; imagens usam tv2d, tv2d_iso, l1, collab '
        'ou gradcollab.'
    )

    def run(self, config):
        return str(run_decompose(config))
