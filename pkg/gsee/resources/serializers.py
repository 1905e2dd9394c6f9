from rest_framework import serializers

from gsee.conf import setting_default
from gsee.tables import write_table

SWEEP_FIELDS = ['M', 'eta_resolvable']


class ResourceSpecSerializer(serializers.Serializer):
    """Serializer for the resources section of an experiment config"""

    eta = serializers.FloatField(required=False, allow_null=True, default=None)
    vartheta = serializers.FloatField(default=setting_default('vartheta'))
    sweep = serializers.BooleanField(default=False)
    sweep_min = serializers.FloatField(default=1e2)
    sweep_max = serializers.FloatField(default=1e12)
    sweep_points = serializers.IntegerField(min_value=2, max_value=1000, default=41)

    def validate_vartheta(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("Vartheta must lie in (0, 1).")
        return value

    def validate_eta(self, value):
        if value is not None and not 0.0 < value <= 1.0:
            raise serializers.ValidationError("Eta must lie in (0, 1].")
        return value

    def validate(self, data):
        if not 1.0 <= data['sweep_min'] < data['sweep_max']:
            raise serializers.ValidationError({'sweep_min': 'Sweep bounds must satisfy 1 <= min < max.'})
        return data


class ResourceEstimateSerializer(serializers.Serializer):
    """Serializer for a ResourceEstimate"""

    D = serializers.IntegerField()
    M = serializers.IntegerField()
    r = serializers.IntegerField()
    depth = serializers.IntegerField()
    depth_fast_forward = serializers.IntegerField()
    t_max = serializers.FloatField()
    inputs = serializers.DictField()


def write_sweep(path, rows, meta=None):
    return write_table(path, SWEEP_FIELDS, rows, meta)
