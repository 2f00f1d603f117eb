"""
Parametric initial conditions and the datasets built from them.

Every IC is an analytical profile f from one family, min-max normalized on
the cell centres and rescaled to g = a * f + b with 0.05 <= a <= 1 and
0 <= b <= 1 - a, so g always lies in [0, 1]. The ICSpec is the source of
truth: the stored vector is re-derived from it bit-exactly.
"""
import copy
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from django.core.exceptions import ValidationError

from adsorption.physics import DimlessCoeffs
from adsorption.solver import Grid, solve_batch
from core import formats
from core.exceptions import ArtifactIOError, DatasetBuildError, NumericalError

logger = logging.getLogger(__name__)

IN_DISTRIBUTION = 'in_distribution'
OOD = 'ood'
DATASET_KINDS = (IN_DISTRIBUTION, OOD)

LINE = 'line'
SIGMOID = 'sigmoid'
EXPONENTIAL = 'exponential'
GAUSSIAN = 'gaussian'
SINE = 'sine'
FAMILIES = (LINE, SIGMOID, EXPONENTIAL, GAUSSIAN, SINE)

# parameter -> tuple of (low, high) intervals; low == high pins the value
RANGE_TABLES = {
    IN_DISTRIBUTION: {
        LINE: {'m': ((-2.0, 2.0),), 'q': ((-1.0, 1.0),)},
        SIGMOID: {'k': ((5.0, 30.0),), 'c': ((0.0, 1.0),)},
        EXPONENTIAL: {'alpha': ((-5.0, 5.0),), 'beta': ((0.5, 0.5),)},
        GAUSSIAN: {'mu': ((0.0, 1.0),), 'sigma': ((0.05, 2.0),)},
    },
    OOD: {
        LINE: {'m': ((-4.0, -2.0), (2.0, 4.0)), 'q': ((-1.0, 1.0),)},
        SIGMOID: {'k': ((30.0, 50.0),), 'c': ((-0.8, 1.2),)},
        EXPONENTIAL: {'alpha': ((-7.0, 7.0),), 'beta': ((0.2, 0.7),)},
        GAUSSIAN: {'mu': ((-0.5, 1.5),), 'sigma': ((0.2, 0.4),)},
        SINE: {'w0': ((0.1, 0.5),), 'phi': ((0.0, 0.0),)},
    },
}

AMPLITUDE_RANGE = (0.05, 1.0)
FLAT_SPAN = 1e-12

SPLIT_NAMES = {
    IN_DISTRIBUTION: ('train', 'val', 'test'),
    OOD: ('ood',),
}
SPLIT_STREAM = 2 ** 32
SOLVE_CHUNK = 256


@dataclass(frozen=True)
class ICSpec:
    """
    family: one of FAMILIES.
    params: raw family parameters (m, q | k, c | alpha, beta | mu, sigma | w0, phi).
    a, b: rescale factors applied after min-max normalization.
    seed: seed of the RNG stream the sample was drawn from.
    """
    family: str
    params: Dict[str, float]
    a: float
    b: float
    seed: Optional[int] = None

    def as_dict(self):
        return asdict(self)


def family_profile(family, params, x):
    x = np.asarray(x, dtype=np.float64)
    if family == LINE:
        return params['m'] * x + params['q']
    if family == SIGMOID:
        return 1.0 / (1.0 + np.exp(-params['k'] * (x - params['c'])))
    if family == EXPONENTIAL:
        return np.exp(params['alpha'] * (x - params['beta']))
    if family == GAUSSIAN:
        return np.exp(-(x - params['mu']) ** 2 / (2.0 * params['sigma'] ** 2))
    if family == SINE:
        return np.sin(params['w0'] * x + params['phi'])
    raise ValidationError({'family': f'Unknown family {family!r}.'})


def _draw(intervals, rng):
    if len(intervals) == 1:
        low, high = intervals[0]
    else:
        lengths = np.array([high - low for low, high in intervals])
        low, high = intervals[rng.choice(len(intervals), p=lengths / lengths.sum())]
    if low == high:
        return float(low)
    return float(rng.uniform(low, high))


def sample_ic(family, range_table, rng, seed=None) -> ICSpec:
    """Draw one ICSpec of ``family``; ``range_table`` maps families to parameter ranges."""
    if family not in FAMILIES:
        raise ValidationError({'family': f'Unknown family {family!r}.'})
    if family not in range_table:
        raise ValidationError(
            {'family': f'Family {family!r} is not part of the selected range table.'})

    params = {name: _draw(intervals, rng) for name, intervals in range_table[family].items()}
    a = float(rng.uniform(*AMPLITUDE_RANGE))
    b = float(rng.uniform(0.0, 1.0 - a))
    return ICSpec(family=family, params=params, a=a, b=b, seed=seed)


def evaluate_ic(spec: ICSpec, xi_centers):
    profile = family_profile(spec.family, spec.params, xi_centers)
    low, high = profile.min(), profile.max()
    if high - low < FLAT_SPAN:
        normalized = np.full_like(profile, 0.5)
    else:
        normalized = (profile - low) / (high - low)
    return np.clip(spec.a * normalized + spec.b, 0.0, 1.0)


def sample_seed(master_seed, index):
    sequence = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass
class DatasetConfig:
    """
    kind: 'in_distribution' (train/val/test) or 'ood' (single 'ood' split).
    split_sizes: explicit sizes per split; otherwise split_fractions apply.
    range_overrides: {family: {param: [[low, high], ...]}} patched onto the table.
    """
    kind: str = IN_DISTRIBUTION
    n_samples: int = 10000
    families: Optional[Tuple[str, ...]] = None
    split_sizes: Optional[Dict[str, int]] = None
    split_fractions: Tuple[float, ...] = (0.72, 0.18, 0.10)
    range_overrides: Dict[str, Dict[str, list]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ValidationError({'kind': f'Unknown dataset kind {self.kind!r}.'})
        if self.families is None:
            self.families = tuple(RANGE_TABLES[self.kind])
        if self.n_samples < 1:
            raise ValidationError({'n_samples': 'n_samples must be positive.'})

    @property
    def split_names(self):
        return SPLIT_NAMES[self.kind]

    def resolved_split_sizes(self):
        names = self.split_names
        if self.split_sizes is not None:
            sizes = {name: int(self.split_sizes.get(name, 0)) for name in names}
        elif len(names) == 1:
            sizes = {names[0]: self.n_samples}
        else:
            if len(self.split_fractions) != len(names):
                raise ValidationError(
                    {'split_fractions': f'Expected {len(names)} fractions.'})
            sizes = {name: int(round(fraction * self.n_samples))
                     for name, fraction in zip(names[:-1], self.split_fractions)}
            sizes[names[-1]] = self.n_samples - sum(sizes.values())
        if any(size < 0 for size in sizes.values()) or sum(sizes.values()) != self.n_samples:
            raise ValidationError(
                {'split_sizes': f'Split sizes {sizes} do not partition {self.n_samples} samples.'})
        return sizes

    def range_table(self):
        table = copy.deepcopy(RANGE_TABLES[self.kind])
        for family, overrides in self.range_overrides.items():
            if family not in table:
                raise ValidationError(
                    {'range_overrides': f'Family {family!r} is not in the {self.kind} table.'})
            for name, intervals in overrides.items():
                if name not in table[family]:
                    raise ValidationError(
                        {'range_overrides': f'{family} has no parameter {name!r}.'})
                table[family][name] = tuple((float(low), float(high)) for low, high in intervals)
        for family in self.families:
            if family not in table:
                raise ValidationError(
                    {'families': f'Family {family!r} is not available for {self.kind} datasets.'})
        return {family: table[family] for family in self.families}

    def family_assignment(self):
        """Family of every sample index: contiguous blocks with exact counts."""
        count, extra = divmod(self.n_samples, len(self.families))
        blocks = [[family] * (count + (i < extra)) for i, family in enumerate(self.families)]
        return [family for block in blocks for family in block]


@dataclass
class SplitView:
    indices: np.ndarray
    ics: np.ndarray
    gas: np.ndarray
    solid: np.ndarray
    families: np.ndarray

    def __len__(self):
        return len(self.indices)


@dataclass
class Dataset:
    kind: str
    master_seed: int
    grid: Grid
    specs: list
    ics: np.ndarray
    gas: np.ndarray
    solid: np.ndarray
    splits: Dict[str, np.ndarray]
    ranges: dict
    params: Optional[dict] = None

    @property
    def n_samples(self):
        return self.ics.shape[0]

    @property
    def families(self):
        return np.array([spec.family for spec in self.specs])

    def family_counts(self, indices=None):
        families = self.families if indices is None else self.families[indices]
        names, counts = np.unique(families, return_counts=True)
        return {str(name): int(count) for name, count in zip(names, counts)}

    def split_indices(self, name):
        if name == 'all':
            return np.arange(self.n_samples)
        if name not in self.splits:
            raise ValidationError(
                {'split': f'Unknown split {name!r}; available: {sorted(self.splits)}.'})
        return self.splits[name]

    def split_view(self, name) -> SplitView:
        return self.subset_view(self.split_indices(name))

    def subset_view(self, indices) -> SplitView:
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.n_samples):
            raise ValidationError({'indices': f'Sample indices must lie in [0, {self.n_samples}).'})
        return SplitView(
            indices=indices,
            ics=self.ics[indices],
            gas=self.gas[indices],
            solid=self.solid[indices],
            families=self.families[indices],
        )


def _solve_chunk(start, ics, coeffs, grid):
    try:
        return solve_batch(ics, coeffs, grid)[:2]
    except (ValidationError, NumericalError) as exc:
        for offset, ic in enumerate(ics):
            try:
                solve_batch(ic[np.newaxis, :], coeffs, grid)
            except (ValidationError, NumericalError) as sample_exc:
                raise DatasetBuildError(start + offset, sample_exc) from sample_exc
        raise DatasetBuildError(start, exc) from exc


def solve_all(ics, coeffs, grid, threads=1):
    starts = range(0, len(ics), SOLVE_CHUNK)
    jobs = [(start, ics[start:start + SOLVE_CHUNK]) for start in starts]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(
                lambda job: _solve_chunk(job[0], job[1], coeffs, grid), jobs))
    else:
        results = [_solve_chunk(start, chunk, coeffs, grid) for start, chunk in jobs]
    gas = np.concatenate([result[0] for result in results])
    solid = np.concatenate([result[1] for result in results])
    return gas, solid


def build_dataset(config: DatasetConfig, master_seed: int, coeffs: DimlessCoeffs,
                  grid: Grid = None, threads=1, params=None) -> Dataset:
    grid = grid or Grid()
    table = config.range_table()
    sizes = config.resolved_split_sizes()
    assignment = config.family_assignment()

    specs = []
    for index, family in enumerate(assignment):
        seed = sample_seed(master_seed, index)
        specs.append(sample_ic(family, table, np.random.default_rng(seed), seed=seed))
    ics = np.array([evaluate_ic(spec, grid.xi_centers) for spec in specs])
    logger.info('Sampled %d %s initial conditions: %s',
                len(specs), config.kind, dict(zip(*np.unique(assignment, return_counts=True))))

    gas, solid = solve_all(ics, coeffs, grid, threads=threads)

    split_rng = np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(SPLIT_STREAM,)))
    order = split_rng.permutation(config.n_samples)
    splits, offset = {}, 0
    for name in config.split_names:
        splits[name] = np.sort(order[offset:offset + sizes[name]])
        offset += sizes[name]
    logger.info('Split sizes: %s', {name: len(indices) for name, indices in splits.items()})

    return Dataset(
        kind=config.kind,
        master_seed=master_seed,
        grid=grid,
        specs=specs,
        ics=ics,
        gas=gas,
        solid=solid,
        splits=splits,
        ranges=table,
        params=params,
    )


def build_ood_dataset(config: DatasetConfig, master_seed: int, coeffs: DimlessCoeffs,
                      grid: Grid = None, threads=1, params=None) -> Dataset:
    if config.kind != OOD:
        raise ValidationError({'kind': 'build_ood_dataset needs an ood configuration.'})
    return build_dataset(config, master_seed, coeffs, grid=grid, threads=threads, params=params)


MANIFEST = 'manifest.json'
ICS_FILE = 'ics.bin'
GAS_FILE = 'gas.bin'
SOLID_FILE = 'solid.bin'


def save_dataset(dataset: Dataset, directory):
    os.makedirs(directory, exist_ok=True)
    formats.write_array(os.path.join(directory, ICS_FILE), dataset.ics)
    formats.write_array(os.path.join(directory, GAS_FILE), dataset.gas)
    formats.write_array(os.path.join(directory, SOLID_FILE), dataset.solid)
    manifest = {
        'kind': dataset.kind,
        'seed': dataset.master_seed,
        'grid': dataset.grid.as_dict(),
        'params': dataset.params,
        'counts': {
            'total': dataset.n_samples,
            'families': dataset.family_counts(),
            'splits': {name: len(indices) for name, indices in dataset.splits.items()},
        },
        'ranges': {family: {name: [list(interval) for interval in intervals]
                            for name, intervals in table.items()}
                   for family, table in dataset.ranges.items()},
        'splits': {name: [int(i) for i in indices] for name, indices in dataset.splits.items()},
        'samples': [spec.as_dict() for spec in dataset.specs],
    }
    formats.write_json(os.path.join(directory, MANIFEST), manifest)


def load_dataset(directory) -> Dataset:
    from adsorption.serializers import ICSpecSerializer

    manifest_path = os.path.join(directory, MANIFEST)
    if not os.path.exists(manifest_path):
        raise ArtifactIOError(f'No dataset manifest in {directory}.')
    manifest = formats.read_json(manifest_path)

    serializer = ICSpecSerializer(data=manifest['samples'], many=True)
    serializer.is_valid(raise_exception=True)
    specs = [ICSpec(**item) for item in serializer.validated_data]

    dataset = Dataset(
        kind=manifest['kind'],
        master_seed=manifest['seed'],
        grid=Grid(**manifest['grid']),
        specs=specs,
        ics=formats.read_array(os.path.join(directory, ICS_FILE)),
        gas=formats.read_array(os.path.join(directory, GAS_FILE)),
        solid=formats.read_array(os.path.join(directory, SOLID_FILE)),
        splits={name: np.array(indices, dtype=np.int64)
                for name, indices in manifest['splits'].items()},
        ranges={family: {name: tuple(tuple(interval) for interval in intervals)
                         for name, intervals in table.items()}
                for family, table in manifest['ranges'].items()},
        params=manifest.get('params'),
    )
    expected = (dataset.n_samples,) + dataset.grid.shape
    if dataset.gas.shape != expected or dataset.solid.shape != expected:
        raise ArtifactIOError(f'Fields in {directory} do not match the manifest grid.')
    return dataset
