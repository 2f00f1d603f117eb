from dataclasses import replace

from django.conf import settings

from adsorption.ic_gen import load_dataset
from core.management.commands.train import add_training_arguments, init_seed, training_overrides
from core.management.pipeline import PipelineCommand
from operator_net.ablation import best_row, parse_pairs, run_lambda_ablation, write_ablation


class Command(PipelineCommand):
    help = 'Trains one model per (lambda_ic, lambda_data) pair and tabulates validation and test errors'
    requires_seed = True

    def add_command_arguments(self, parser):
        add_training_arguments(parser)
        parser.add_argument('--pairs', help='Comma-separated lambda_ic:lambda_data items, e.g. 3:1,1:1.')

    def config_overrides(self, options):
        return training_overrides(options)

    def run(self, config, options):
        pairs = parse_pairs(options['pairs'] or settings.SURROGATE['LAMBDA_ABLATION'])
        dataset = load_dataset(self.require_directory(options['dataset'], 'Dataset'))
        architecture = replace(config.architecture, n_sensors=dataset.grid.n_x)
        rows = run_lambda_ablation(
            dataset, architecture, config.train, pairs, init_seed(config.seed), dtype=config.dtype)
        path = write_ablation(rows, config.out)
        best = best_row(rows)
        self.stdout.write(self.style.SUCCESS(
            f'{len(rows)} weight pairs written to {path}; lowest test error at '
            f'lambda_ic={best.lambda_ic:g}, lambda_data={best.lambda_data:g}'))
