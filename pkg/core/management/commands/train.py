import logging
import os
from dataclasses import replace

import numpy as np

from adsorption.ic_gen import load_dataset
from adsorption.solver import PHASES
from core.exceptions import TrainingDiverged
from core.management.pipeline import PipelineCommand
from operator_net.deeponet import build_model, save_checkpoint
from operator_net.trainer import train, write_report

logger = logging.getLogger(__name__)

INIT_STREAM = 1


def init_seed(seed):
    """Seed of the weight-initialization stream, kept apart from dataset sampling."""
    return np.random.SeedSequence(seed, spawn_key=(INIT_STREAM,))


def add_training_arguments(parser):
    parser.add_argument('--dataset', required=True, help='Dataset directory.')
    parser.add_argument('--phase', choices=PHASES, help='Field to learn (default gas).')
    parser.add_argument('--max-epochs', type=int)
    parser.add_argument('--stop-at', type=int, help='Manual epoch cap.')
    parser.add_argument('--batch-size', type=int)
    parser.add_argument('--val-every', type=int)
    parser.add_argument('--patience', type=int, dest='early_stop_patience')
    parser.add_argument('--lr', type=float)
    parser.add_argument('--hidden-layers', type=int)
    parser.add_argument('--width', type=int)
    parser.add_argument('--latent', type=int)


def training_overrides(options):
    return {
        'train': {
            'phase': options['phase'],
            'max_epochs': options['max_epochs'],
            'stop_at': options['stop_at'],
            'batch_size': options['batch_size'],
            'val_every': options['val_every'],
            'early_stop_patience': options['early_stop_patience'],
            'lr': options['lr'],
            'lambda_ic': options.get('lambda_ic'),
            'lambda_data': options.get('lambda_data'),
        },
        'architecture': {
            'hidden_layers': options['hidden_layers'],
            'width': options['width'],
            'latent': options['latent'],
        },
    }


class Command(PipelineCommand):
    help = 'Trains the operator network of one phase on a dataset directory'
    requires_seed = True

    def add_command_arguments(self, parser):
        add_training_arguments(parser)
        parser.add_argument('--lambda-ic', type=float, help='Weight of the IC loss term.')
        parser.add_argument('--lambda-data', type=float, help='Weight of the data loss term.')

    def config_overrides(self, options):
        return training_overrides(options)

    def run(self, config, options):
        dataset = load_dataset(self.require_directory(options['dataset'], 'Dataset'))
        architecture = replace(config.architecture, n_sensors=dataset.grid.n_x)
        rng = np.random.default_rng(init_seed(config.seed))
        model = build_model(architecture, config.train.phase, rng, dtype=config.dtype)
        directory = os.path.join(config.out, config.train.phase)

        try:
            best, report = train(model, dataset, config.train)
        except TrainingDiverged as exc:
            if exc.model is not None:
                save_checkpoint(exc.model, directory)
                logger.error('Kept the last finite checkpoint in %s', directory)
            raise

        save_checkpoint(best, directory)
        write_report(report, directory)
        self.stdout.write(self.style.SUCCESS(
            f'{report.phase} model trained for {report.epochs_run} epochs '
            f'(best epoch {report.best_epoch}); checkpoint in {directory}'))
