from rest_framework import serializers

from acdf.estimator import AGGREGATE_CHOICES
from gsee.conf import setting_default

from .changepoint import ORIENTATION_CHOICES
from .search import METHOD_CHOICES, GuardParams


class DetectionSpecSerializer(serializers.Serializer):
    """Serializer for the detection section of an experiment config"""

    method = serializers.ChoiceField(choices=METHOD_CHOICES, default=setting_default('detection_method'))
    alpha = serializers.FloatField(default=setting_default('alpha'))
    orientation = serializers.ChoiceField(choices=ORIENTATION_CHOICES, default=setting_default('orientation'))
    guard_k = serializers.FloatField(min_value=0.0, default=setting_default('guard_k'))
    guard_l = serializers.IntegerField(min_value=1, default=setting_default('guard_l'))
    percentile_gate = serializers.BooleanField(default=setting_default('percentile_gate'))
    gate_percentile = serializers.FloatField(min_value=0.0, max_value=100.0, default=setting_default('gate_percentile'))
    gate_s = serializers.FloatField(min_value=0.0, default=setting_default('gate_s'))
    scan_s = serializers.FloatField(min_value=0.0, default=setting_default('scan_s'))
    scan_window = serializers.IntegerField(min_value=1, default=setting_default('scan_window'))
    scan_fraction = serializers.FloatField(default=setting_default('scan_fraction'))
    half_window = serializers.FloatField(required=False, allow_null=True, default=None)
    eta = serializers.FloatField(required=False, allow_null=True, default=None)
    aggregate = serializers.ChoiceField(choices=AGGREGATE_CHOICES, default=setting_default('aggregate'))
    groups = serializers.IntegerField(min_value=1, default=setting_default('mom_groups'))

    def validate_alpha(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("Alpha must lie in (0, 1).")
        return value

    def validate_scan_fraction(self, value):
        if not 0.0 < value <= 1.0:
            raise serializers.ValidationError("Scan fraction must lie in (0, 1].")
        return value

    def validate_half_window(self, value):
        if value is not None and value <= 0.0:
            raise serializers.ValidationError("Half window must be positive.")
        return value


def guard_from_spec(spec):
    return GuardParams(
        k=spec['guard_k'], l=spec['guard_l'], percentile_gate=spec['percentile_gate'],
        gate_percentile=spec['gate_percentile'], gate_s=spec['gate_s'],
    )


def detection_kwargs(spec):
    """detect_inflection keyword arguments from a validated detection spec"""
    return {
        'method': spec['method'],
        'alpha': spec['alpha'],
        'guard': guard_from_spec(spec),
        'orientation': spec['orientation'],
        'scan_s': spec['scan_s'],
        'scan_window': spec['scan_window'],
        'scan_fraction': spec['scan_fraction'],
        'half_window': spec.get('half_window'),
    }


class TraceEntrySerializer(serializers.Serializer):
    candidate = serializers.IntegerField()
    f = serializers.FloatField()
    p = serializers.FloatField()
    accepted = serializers.BooleanField()
    reason = serializers.CharField(allow_blank=True)


class DetectionResultSerializer(serializers.Serializer):
    """Serializer for a DetectionResult, acceptance trace included"""

    method = serializers.CharField()
    detected = serializers.BooleanField()
    breakpoint_index = serializers.IntegerField()
    inflection_x = serializers.FloatField(allow_null=True)
    refined_energy = serializers.FloatField(allow_null=True)
    sigma_empirical = serializers.FloatField()
    noise_floor = serializers.FloatField()
    trace = TraceEntrySerializer(many=True)
    decisions = serializers.ListField(child=serializers.DictField())
    gradient_floor = serializers.FloatField(allow_null=True)
