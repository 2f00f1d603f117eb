"""Plot-data products: parity pairs, heatmaps and time snapshots per sample."""
import logging
import os

import numpy as np
from django.core.exceptions import ValidationError

from adsorption.solver import Grid
from core import formats

logger = logging.getLogger(__name__)

PARITY = 'parity'
HEATMAP = 'heatmap'
SNAPSHOTS = 'snapshots'
PRODUCTS = (PARITY, HEATMAP, SNAPSHOTS)
DEFAULT_TAUS = (0.0, 0.25, 0.5, 0.75, 1.0)


def parse_products(value):
    products = [item.strip() for item in value.split(',') if item.strip()]
    unknown = sorted(set(products) - set(PRODUCTS))
    if unknown or not products:
        raise ValidationError({'what': f'Choose from {", ".join(PRODUCTS)}; got {value!r}.'})
    return products


def parse_floats(value):
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError as exc:
        raise ValidationError(f'Expected comma-separated numbers, got {value!r}.') from exc


def parity_rows(truth, prediction):
    if truth.shape != prediction.shape:
        raise ValidationError('Truth and prediction shapes differ.')
    for true, pred in zip(truth.ravel(), prediction.ravel()):
        yield repr(float(true)), repr(float(pred))


def snapshot_columns(grid: Grid, taus):
    columns = []
    for tau in taus:
        column = grid.level_index(tau)
        if abs(grid.tau_levels[column] - tau) > 1e-9:
            raise ValidationError({'taus': f'tau* = {tau} is not a stored time level.'})
        columns.append(column)
    return columns


def snapshot_rows(values, grid: Grid, columns):
    for j, xi in enumerate(grid.xi_centers):
        yield [repr(float(xi))] + [repr(float(values[j, k])) for k in columns]


def export_sample(directory, index, phase, truth, prediction, grid: Grid, products,
                  taus=DEFAULT_TAUS):
    """Writes the selected products for one sample and returns the file paths."""
    os.makedirs(directory, exist_ok=True)
    stem = os.path.join(directory, f'{phase}_{index}')
    written = []
    if PARITY in products:
        path = f'{stem}_parity.csv'
        formats.write_csv(path, ['true', 'pred'], parity_rows(truth, prediction))
        written.append(path)
    if HEATMAP in products:
        for label, values in (('pred', prediction), ('abs_err', np.abs(prediction - truth))):
            path = f'{stem}_heatmap_{label}.csv'
            formats.write_csv(
                path, ['xi', 'tau', 'value'],
                formats.field_rows(values, grid.xi_centers, grid.tau_levels))
            written.append(path)
    if SNAPSHOTS in products:
        columns = snapshot_columns(grid, taus)
        header = ['xi'] + [f'tau={grid.tau_levels[k]:g}' for k in columns]
        for label, values in (('true', truth), ('pred', prediction)):
            path = f'{stem}_snapshots_{label}.csv'
            formats.write_csv(path, header, snapshot_rows(values, grid, columns))
            written.append(path)
    logger.debug('Exported %s sample %d: %s', phase, index, written)
    return written
