from rest_framework import serializers

from gsee.conf import setting_default
from gsee.tables import write_table

from .series import norm_bound

SERIES_FIELDS = ['k', 'j', 'coeff_mag']


class FilterSpecSerializer(serializers.Serializer):
    """Serializer for the filter section of an experiment config"""

    epsilon = serializers.FloatField()
    delta = serializers.FloatField(required=False, allow_null=True, default=None)
    D = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    beta = serializers.FloatField(min_value=1.0, required=False, allow_null=True, default=None)
    grid_points = serializers.IntegerField(min_value=16, default=setting_default('grid_points'))

    def validate_epsilon(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("Epsilon must lie in (0, 1).")
        return value

    def validate_D(self, value):
        if value is not None and value % 2 == 0:
            raise serializers.ValidationError("D must be odd.")
        return value


def write_series(path, fs, meta=None):
    header = {
        **(meta or {}),
        'beta': fs.beta,
        'd': fs.d,
        'D': fs.D,
        'norm_F': fs.norm_F,
        'norm_bound': norm_bound(fs.D),
    }
    rows = ({'k': k, 'j': 2 * k + 1, 'coeff_mag': float(c)} for k, c in enumerate(fs.coeff_mags))
    return write_table(path, SERIES_FIELDS, rows, header)
