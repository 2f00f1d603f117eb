from django.core.exceptions import ValidationError

from adsorption.ic_gen import OOD, load_dataset
from adsorption.solver import GAS, PHASES, SOLID
from core.management.pipeline import PipelineCommand
from operator_net.deeponet import load_checkpoint
from operator_net.metrics import ModelPredictor, OraclePredictor, evaluate, write_report


def build_predictors(options):
    if options['oracle']:
        return {phase: OraclePredictor(phase) for phase in PHASES}
    predictors = {}
    for phase, key in ((GAS, 'gas_checkpoint'), (SOLID, 'solid_checkpoint')):
        if options[key]:
            model = load_checkpoint(options[key])
            if model.phase != phase:
                raise ValidationError({key: f'{options[key]} holds a {model.phase} model.'})
            predictors[phase] = ModelPredictor(model)
    return predictors


def add_predictor_arguments(parser):
    parser.add_argument('--dataset', required=True, help='Dataset directory.')
    parser.add_argument('--split', help='Split to evaluate (default test, or ood for OOD sets).')
    parser.add_argument('--gas-checkpoint', help='Checkpoint directory of the gas model.')
    parser.add_argument('--solid-checkpoint', help='Checkpoint directory of the solid model.')
    parser.add_argument('--oracle', action='store_true',
                        help='Use the stored solver fields as predictions.')


def default_split(dataset, split):
    return split or (OOD if dataset.kind == OOD else 'test')


class Command(PipelineCommand):
    help = 'Computes relative L2 errors of trained models on a dataset split'

    def add_command_arguments(self, parser):
        add_predictor_arguments(parser)

    def run(self, config, options):
        dataset = load_dataset(self.require_directory(options['dataset'], 'Dataset'))
        split = default_split(dataset, options['split'])
        report = evaluate(build_predictors(options), dataset, split)
        write_report(report, config.out, extra={'dataset': options['dataset']})
        means = ', '.join(
            f'{phase} {100.0 * report.mean(phase):.4f}%' for phase in report.phases)
        self.stdout.write(self.style.SUCCESS(
            f'Mean relative L2 on {split} ({len(report.indices)} samples): {means}'))
