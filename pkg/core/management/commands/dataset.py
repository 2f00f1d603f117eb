import logging

from django.conf import settings
from django.core.exceptions import ValidationError

from adsorption.ic_gen import IN_DISTRIBUTION, OOD, SPLIT_NAMES, build_dataset, save_dataset
from adsorption.physics import check_specific_area, dimensionless_coefficients
from core.management.pipeline import PipelineCommand, atomic_directory

logger = logging.getLogger(__name__)


def parse_split_sizes(value, kind):
    names = SPLIT_NAMES[kind]
    try:
        sizes = [int(item) for item in value.split(',')]
    except ValueError as exc:
        raise ValidationError({'split_sizes': f'Expected integers, got {value!r}.'}) from exc
    if len(sizes) != len(names):
        raise ValidationError(
            {'split_sizes': f'Expected {len(names)} sizes for {", ".join(names)}.'})
    return dict(zip(names, sizes))


class Command(PipelineCommand):
    help = 'Samples initial conditions, solves them and writes a dataset directory'
    requires_seed = True

    def add_command_arguments(self, parser):
        parser.add_argument('--n', type=int, help='Number of samples.')
        parser.add_argument('--ood', action='store_true',
                            help='Extended ranges plus the sine family, single "ood" split.')
        parser.add_argument('--split-sizes', help='Comma-separated sizes, e.g. 7200,1800,1000.')

    def config_overrides(self, options):
        kind = OOD if options['ood'] else IN_DISTRIBUTION
        n_samples = options['n']
        if n_samples is None and kind == OOD:
            n_samples = settings.SURROGATE['DATASET']['ood_samples']
        dataset = {'kind': kind, 'n_samples': n_samples}
        if options['split_sizes']:
            dataset['split_sizes'] = parse_split_sizes(options['split_sizes'], kind)
        return {'dataset': dataset}

    def run(self, config, options):
        params = config.params
        check_specific_area(params)
        coeffs = dimensionless_coefficients(params)
        dataset = build_dataset(
            config.dataset, config.seed, coeffs, grid=config.grid,
            threads=config.threads, params=params.as_dict())
        with atomic_directory(config.out) as staging:
            save_dataset(dataset, staging)
        logger.info('Wrote %d samples to %s', dataset.n_samples, config.out)
        self.stdout.write(self.style.SUCCESS(
            f'{dataset.kind} dataset with {dataset.n_samples} samples written to {config.out}'))
