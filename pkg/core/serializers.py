"""
Run configuration shared by the management commands.

Sections are merged with command-line flags first, then the ``--config``
JSON file, then ``settings.SURROGATE``; the merged document is validated
by RunConfigSerializer.
"""
import copy
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django.conf import settings
from rest_framework import serializers

from adsorption.ic_gen import DatasetConfig
from adsorption.physics import PhysicalParams
from adsorption.serializers import (DatasetConfigSerializer, GridSerializer,
                                    PhysicalParamsSerializer)
from adsorption.solver import Grid
from core import formats
from operator_net.deeponet import Architecture
from operator_net.serializers import ArchitectureSerializer, TrainConfigSerializer
from operator_net.trainer import TrainConfig

SECTIONS = ('params', 'grid', 'dataset', 'architecture', 'train')


@dataclass
class RunConfig:
    params: PhysicalParams
    grid: Grid
    dataset: DatasetConfig
    architecture: Architecture
    train: TrainConfig
    seed: Optional[int]
    out: Optional[str]
    threads: int
    dtype: type


class RunConfigSerializer(serializers.Serializer):
    params = PhysicalParamsSerializer()
    grid = GridSerializer()
    dataset = DatasetConfigSerializer()
    architecture = ArchitectureSerializer()
    train = TrainConfigSerializer()
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    out = serializers.CharField(required=False, allow_null=True, default=None)
    threads = serializers.IntegerField(min_value=1, default=1)
    f32 = serializers.BooleanField(default=False)

    def save(self, **kwargs):
        data = self.validated_data
        grid = Grid(**data['grid'])
        train = dict(data['train'])
        if data['seed'] is not None:
            train['seed'] = data['seed']
        return RunConfig(
            params=PhysicalParams(**data['params']),
            grid=grid,
            dataset=DatasetConfigSerializer.to_config(data['dataset']),
            architecture=Architecture(**{**data['architecture'], 'n_sensors': grid.n_x}),
            train=TrainConfig(**train),
            seed=data['seed'],
            out=data['out'],
            threads=data['threads'],
            dtype=np.float32 if data['f32'] else np.float64,
        )


def _defaults():
    surrogate = settings.SURROGATE
    dataset = {key: value for key, value in surrogate['DATASET'].items()
               if key != 'ood_samples'}
    return {
        'params_file': surrogate['PARAMS_FILE'],
        'params': {},
        'grid': copy.deepcopy(surrogate['GRID']),
        'dataset': copy.deepcopy(dataset),
        'architecture': copy.deepcopy(surrogate['ARCHITECTURE']),
        'train': copy.deepcopy(surrogate['TRAIN']),
        'threads': surrogate['THREADS'],
    }


def _merge(base, layer):
    for key, value in layer.items():
        if value is None:
            continue
        if key in SECTIONS and isinstance(value, dict):
            base.setdefault(key, {}).update(
                {name: item for name, item in value.items() if item is not None})
        else:
            base[key] = value
    return base


def resolve_run_config(config_path=None, **overrides) -> RunConfig:
    """
    overrides: top-level keys (seed, out, threads, f32, params_file) or
    section dicts ({'train': {'max_epochs': 10}}); None values are ignored.
    """
    document = _defaults()
    if config_path:
        loaded = formats.read_json(config_path)
        if not isinstance(loaded, dict):
            raise serializers.ValidationError({'config': 'The config file must hold a JSON object.'})
        _merge(document, loaded)
    _merge(document, overrides)

    params_file = document.pop('params_file', None)
    if params_file:
        document['params'] = {**formats.read_json(params_file), **document['params']}

    serializer = RunConfigSerializer(data=document)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
