import logging
import os

import numpy as np

from adsorption.ic_gen import evaluate_ic
from adsorption.physics import check_specific_area, dimensionless_coefficients
from adsorption.serializers import ICSpecSerializer
from adsorption.solver import solve
from core import formats
from core.management.pipeline import PipelineCommand, atomic_directory

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Solves the bed model for one initial condition and writes both fields'

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--ic-spec', help='JSON file holding one initial-condition spec.')
        source.add_argument('--constant', type=float, help='Uniform initial concentration.')

    def load_ic(self, options, grid):
        if options['constant'] is not None:
            return np.full(grid.n_x, options['constant']), {'constant': options['constant']}
        serializer = ICSpecSerializer(data=formats.read_json(options['ic_spec']))
        serializer.is_valid(raise_exception=True)
        spec = serializer.save()
        return evaluate_ic(spec, grid.xi_centers), spec.as_dict()

    def run(self, config, options):
        grid = config.grid
        check_specific_area(config.params)
        coeffs = dimensionless_coefficients(config.params)
        ic, source = self.load_ic(options, grid)
        output = solve(ic, coeffs, grid)

        summary = {
            'source': source,
            'params': config.params.as_dict(),
            'grid': grid.as_dict(),
            'max_mass_balance_residual': float(np.max(np.abs(output.mass_balance_residual))),
        }

        with atomic_directory(config.out) as staging:
            formats.write_array(os.path.join(staging, 'ic.bin'), ic)
            for field in (output.gas, output.solid):
                formats.write_array(os.path.join(staging, f'{field.phase}.bin'), field.values)
                formats.write_csv(
                    os.path.join(staging, f'{field.phase}.csv'), ['xi', 'tau', 'value'],
                    formats.field_rows(field.values, grid.xi_centers, grid.tau_levels))
            formats.write_json(os.path.join(staging, 'summary.json'), summary)
        logger.info('Solved %s on a %d x %d grid', source, grid.n_x, grid.n_t)
        self.stdout.write(self.style.SUCCESS(f'Fields written to {config.out}'))
