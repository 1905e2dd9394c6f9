from rest_framework import serializers


class OverlapsField(serializers.Field):
    """Target overlaps as 'k:p,k:p' text or a list of [k, p] pairs"""

    default_error_messages = {
        'invalid': 'Expected "k:p" pairs separated by commas or a list of [k, p] pairs.',
    }

    def to_internal_value(self, data):
        if isinstance(data, str):
            pairs = [item.split(':') for item in data.split(',') if item.strip()]
        elif isinstance(data, (list, tuple)):
            pairs = list(data)
        else:
            self.fail('invalid')
        try:
            return [(int(k), float(p)) for k, p in pairs]
        except (TypeError, ValueError):
            self.fail('invalid')

    def to_representation(self, value):
        return [[int(k), float(p)] for k, p in value]


class StateSpecSerializer(serializers.Serializer):
    """Serializer for the state section of an experiment config"""

    KIND_CHOICES = [
        ('random', 'Random complex Gaussian state'),
        ('overlaps', 'Prescribed overlaps with low-lying eigenvectors'),
        ('eigenstate', 'Single eigenvector'),
        ('file', 'Binary state file'),
    ]

    kind = serializers.ChoiceField(choices=KIND_CHOICES, default='random')
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    overlaps = OverlapsField(required=False, default=list)
    index = serializers.IntegerField(min_value=0, default=0)
    path = serializers.CharField(required=False, allow_blank=True, default='')
    sparsity = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)

    def validate_overlaps(self, value):
        for k, p in value:
            if k < 0 or p < 0:
                raise serializers.ValidationError(f"Overlap entries must be non-negative, got ({k}, {p}).")
        if sum(p for _, p in value) > 1.0 + 1e-12:
            raise serializers.ValidationError("Target overlaps sum to more than 1.")
        return value

    def validate(self, data):
        if data['kind'] in ('random', 'overlaps') and data.get('seed') is None:
            raise serializers.ValidationError({'seed': f"State kind '{data['kind']}' needs a seed."})
        if data['kind'] == 'overlaps' and not data['overlaps']:
            raise serializers.ValidationError({'overlaps': 'At least one (k, p) target is required.'})
        if data['kind'] == 'file' and not data['path']:
            raise serializers.ValidationError({'path': 'A state file path is required.'})
        return data
