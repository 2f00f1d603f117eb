from rest_framework import serializers

from adsorption.solver import PHASES
from operator_net.deeponet import Architecture
from operator_net.trainer import TrainConfig


class ArchitectureSerializer(serializers.Serializer):
    n_sensors = serializers.IntegerField(min_value=1, default=100)
    hidden_layers = serializers.IntegerField(min_value=0, default=6)
    width = serializers.IntegerField(min_value=1, default=200)
    latent = serializers.IntegerField(min_value=1, default=100)
    omega0 = serializers.FloatField(default=20.0)
    output_bias = serializers.BooleanField(default=True)

    def validate_omega0(self, value):
        if value <= 0:
            raise serializers.ValidationError('omega0 must be positive.')
        return value

    def save(self, **kwargs):
        return Architecture(**{**self.validated_data, **kwargs})


class TrainConfigSerializer(serializers.Serializer):
    lambda_ic = serializers.FloatField(min_value=0.0, default=3.0)
    lambda_data = serializers.FloatField(min_value=0.0, default=1.0)
    lr = serializers.FloatField(default=1e-4)
    min_lr = serializers.FloatField(default=1e-7)
    max_epochs = serializers.IntegerField(min_value=0, default=500000)
    val_every = serializers.IntegerField(min_value=1, default=100)
    early_stop_patience = serializers.IntegerField(min_value=1, default=10000)
    scheduler_factor = serializers.FloatField(default=0.5)
    scheduler_patience = serializers.IntegerField(min_value=0, default=2000)
    scheduler_threshold = serializers.FloatField(min_value=0.0, default=1e-6)
    batch_size = serializers.IntegerField(min_value=1, default=64)
    seed = serializers.IntegerField(min_value=0, default=0)
    phase = serializers.ChoiceField(choices=PHASES, default='gas')
    stop_at = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)

    def validate(self, attrs):
        if attrs['lambda_ic'] == 0 and attrs['lambda_data'] == 0:
            raise serializers.ValidationError(
                {'lambda_ic': 'lambda_ic and lambda_data cannot both be zero.'})
        if attrs['early_stop_patience'] % attrs['val_every']:
            raise serializers.ValidationError(
                {'val_every': 'val_every must divide early_stop_patience.'})
        if not 0 < attrs['min_lr'] <= attrs['lr']:
            raise serializers.ValidationError(
                {'min_lr': 'min_lr must be positive and not exceed lr.'})
        if not 0 < attrs['scheduler_factor'] < 1:
            raise serializers.ValidationError(
                {'scheduler_factor': 'scheduler_factor must lie in (0, 1).'})
        return attrs

    def save(self, **kwargs):
        return TrainConfig(**{**self.validated_data, **kwargs})


class HistoryRowSerializer(serializers.Serializer):
    epoch = serializers.IntegerField()
    train_loss = serializers.FloatField()
    val_loss = serializers.FloatField()
    lr = serializers.FloatField()
    train_ic_loss = serializers.FloatField()
    train_data_loss = serializers.FloatField()


class TrainReportSerializer(serializers.Serializer):
    phase = serializers.CharField()
    wall_time_s = serializers.FloatField()
    best_epoch = serializers.IntegerField()
    epochs_run = serializers.IntegerField()
    stopped_reason = serializers.CharField()
    min_train_loss = serializers.FloatField(allow_null=True)
    min_val_loss = serializers.FloatField(allow_null=True)
    min_data_loss = serializers.FloatField(allow_null=True)
    min_ic_loss = serializers.FloatField(allow_null=True)
    history = HistoryRowSerializer(many=True)


class PhaseSummarySerializer(serializers.Serializer):
    mean = serializers.FloatField()
    mean_pct = serializers.SerializerMethodField()
    worst_indices = serializers.ListField(child=serializers.IntegerField())
    per_family = serializers.DictField(child=serializers.FloatField())

    def get_mean_pct(self, summary):
        return 100.0 * summary.mean


class EvalReportSerializer(serializers.Serializer):
    split = serializers.CharField()
    n_samples = serializers.SerializerMethodField()
    predictors = serializers.DictField(child=serializers.CharField())
    summaries = serializers.DictField(child=PhaseSummarySerializer())
    max_abs_err = serializers.SerializerMethodField()
    reference = serializers.DictField()

    def get_n_samples(self, report):
        return len(report.indices)

    def get_max_abs_err(self, report):
        return {
            phase: {
                'max': float(values.max()),
                'mean': float(values.mean()),
            }
            for phase, values in report.max_abs_err.items()
        }
