from rest_framework import serializers

from adsorption.ic_gen import DATASET_KINDS, FAMILIES, RANGE_TABLES, DatasetConfig, ICSpec
from adsorption.physics import PhysicalParams
from adsorption.solver import Grid

DEFAULTS = PhysicalParams()


class PhysicalParamsSerializer(serializers.Serializer):
    """
    Keys match the usual symbols of the bed model. A missing key takes the
    reference value of PhysicalParams.
    """
    L = serializers.FloatField(default=DEFAULTS.L)
    v_x = serializers.FloatField(default=DEFAULTS.v_x)
    eps_B = serializers.FloatField(default=DEFAULTS.eps_B)
    k_g = serializers.FloatField(default=DEFAULTS.k_g)
    d_p = serializers.FloatField(default=DEFAULTS.d_p)
    a_s = serializers.FloatField(default=DEFAULTS.a_s)
    K_eq = serializers.FloatField(default=DEFAULTS.K_eq)
    t_tot = serializers.FloatField(default=DEFAULTS.t_tot)
    C_0 = serializers.FloatField(default=DEFAULTS.C_0)

    def validate(self, attrs):
        errors = {}
        for name, value in attrs.items():
            if value <= 0:
                errors[name] = f'{name} must be strictly positive.'
        if 'eps_B' not in errors and attrs['eps_B'] >= 1:
            errors['eps_B'] = 'eps_B must lie in (0, 1).'
        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def save(self, **kwargs):
        return PhysicalParams(**self.validated_data)


class GridSerializer(serializers.Serializer):
    n_x = serializers.IntegerField(min_value=1, default=100)
    n_t = serializers.IntegerField(min_value=2, default=101)
    substeps = serializers.IntegerField(min_value=1, default=1)

    def save(self, **kwargs):
        return Grid(**self.validated_data)


class ICSpecSerializer(serializers.Serializer):
    family = serializers.ChoiceField(choices=FAMILIES)
    params = serializers.DictField(child=serializers.FloatField())
    a = serializers.FloatField(min_value=0.0, max_value=1.0)
    b = serializers.FloatField(min_value=0.0, max_value=1.0)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)

    def validate(self, attrs):
        expected = set(RANGE_TABLES['ood'][attrs['family']])
        if set(attrs['params']) != expected:
            raise serializers.ValidationError(
                {'params': f'{attrs["family"]} takes parameters {sorted(expected)}.'})
        if attrs['a'] <= 0:
            raise serializers.ValidationError({'a': 'The amplitude must be positive.'})
        if attrs['a'] + attrs['b'] > 1.0 + 1e-12:
            raise serializers.ValidationError({'b': 'a + b must not exceed 1.'})
        return attrs

    def save(self, **kwargs):
        return ICSpec(**self.validated_data)


class IntervalListField(serializers.ListField):
    child = serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2)

    def to_internal_value(self, data):
        intervals = super().to_internal_value(data)
        for low, high in intervals:
            if low > high:
                raise serializers.ValidationError(f'Interval [{low}, {high}] is reversed.')
        return [tuple(interval) for interval in intervals]


class DatasetConfigSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=DATASET_KINDS, default='in_distribution')
    n_samples = serializers.IntegerField(min_value=1, default=10000)
    families = serializers.ListField(
        child=serializers.ChoiceField(choices=FAMILIES), required=False, allow_null=True,
        default=None)
    split_sizes = serializers.DictField(
        child=serializers.IntegerField(min_value=0), required=False, allow_null=True,
        default=None)
    split_fractions = serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0), required=False,
        default=[0.72, 0.18, 0.10])
    range_overrides = serializers.DictField(
        child=serializers.DictField(child=IntervalListField()), required=False, default=dict)

    def save(self, **kwargs):
        return self.to_config(self.validated_data, **kwargs)

    @staticmethod
    def to_config(validated_data, **kwargs):
        data = dict(validated_data)
        if data['families'] is not None:
            data['families'] = tuple(data['families'])
        data['split_fractions'] = tuple(data['split_fractions'])
        data.update(kwargs)
        return DatasetConfig(**data)
