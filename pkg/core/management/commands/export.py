import logging

from django.core.exceptions import ValidationError

from adsorption.ic_gen import load_dataset
from adsorption.solver import PHASES
from core import exports
from core.management.commands.eval import (add_predictor_arguments, build_predictors,
                                           default_split)
from core.management.pipeline import PipelineCommand

logger = logging.getLogger(__name__)


def parse_indices(value):
    try:
        return [int(item) for item in value.split(',') if item.strip()]
    except ValueError as exc:
        raise ValidationError({'indices': f'Expected integers, got {value!r}.'}) from exc


class Command(PipelineCommand):
    help = 'Writes parity, heatmap and time-snapshot CSVs for selected samples'

    def add_command_arguments(self, parser):
        add_predictor_arguments(parser)
        parser.add_argument('--what', default=','.join(exports.PRODUCTS),
                            help='Comma-separated products: parity, heatmap, snapshots.')
        parser.add_argument('--taus', default=','.join(str(t) for t in exports.DEFAULT_TAUS),
                            help='tau* levels for snapshots.')
        parser.add_argument('--indices', help='Dataset sample indices (default: first of the split).')
        parser.add_argument('--phase', choices=PHASES, help='Restrict to one phase.')

    def run(self, config, options):
        products = exports.parse_products(options['what'])
        taus = exports.parse_floats(options['taus'])
        dataset = load_dataset(self.require_directory(options['dataset'], 'Dataset'))
        split = default_split(dataset, options['split'])
        members = dataset.split_indices(split)
        if options['indices']:
            indices = parse_indices(options['indices'])
            unknown = sorted(set(indices) - set(int(i) for i in members))
            if unknown:
                raise ValidationError(
                    {'indices': f'Samples {unknown} are not in the {split} split.'})
        elif len(members):
            indices = [int(members[0])]
        else:
            raise ValidationError({'split': f'Split {split!r} is empty.'})

        predictors = build_predictors(options)
        if options['phase']:
            predictors = {options['phase']: predictors[options['phase']]} \
                if options['phase'] in predictors else {}
        if not predictors:
            raise ValidationError('Pass --oracle or a checkpoint for the exported phase.')

        view = dataset.subset_view(indices)
        written = []
        for phase, predictor in predictors.items():
            predictions = predictor(view, dataset.grid)
            truths = getattr(view, phase)
            for row, index in enumerate(indices):
                written += exports.export_sample(
                    config.out, index, phase, truths[row], predictions[row], dataset.grid,
                    products, taus=taus)
        logger.info('Exported %d files for samples %s', len(written), indices)
        self.stdout.write(self.style.SUCCESS(f'{len(written)} files written to {config.out}'))
