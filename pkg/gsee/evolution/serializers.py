import numpy as np
from rest_framework import serializers

from gsee.conf import setting_default
from gsee.exceptions import ParameterError
from gsee.tables import read_table, write_table

from .spectrum import MomentSet
from .trotter import STEPS_POLICIES

MOMENT_FIELDS = ['j', 're_g', 'im_g', 'backend', 'r']


class BackendSpecSerializer(serializers.Serializer):
    """Serializer for the backend section of an experiment config"""

    KIND_CHOICES = [
        ('auto', 'Exact up to 14 sites, Trotter beyond'),
        ('exact', 'Dense eigendecomposition'),
        ('trotter', 'Second-order Trotter statevector'),
    ]

    kind = serializers.ChoiceField(choices=KIND_CHOICES, default='auto')
    steps_policy = serializers.ChoiceField(choices=STEPS_POLICIES, default=setting_default('steps_policy'))
    steps_per_unit = serializers.IntegerField(min_value=1, default=setting_default('steps_per_unit'))
    prefactor = serializers.FloatField(min_value=0.0, default=setting_default('trotter_prefactor'))
    order = serializers.IntegerField(min_value=1, default=setting_default('trotter_order'))

    def validate_prefactor(self, value):
        if value <= 0.0:
            raise serializers.ValidationError("Trotter prefactor must be positive.")
        return value


# ==================== MOMENTS CSV ====================

def write_moments(path, moments, meta=None):
    return write_table(path, MOMENT_FIELDS, moments.rows(), meta)


def read_moments(path):
    meta, rows = read_table(path)
    if not rows:
        raise ParameterError(f"{path} holds no moments")
    try:
        j_values = np.array([int(row['j']) for row in rows])
        values = np.array([complex(float(row['re_g']), float(row['im_g'])) for row in rows])
        steps = [row['r'] for row in rows]
        backend = rows[0]['backend']
    except (KeyError, ValueError) as e:
        raise ParameterError(f"malformed moments table {path}: {str(e)}")
    steps = np.array([int(s) for s in steps]) if all(steps) else None
    return meta, MomentSet(j_values=j_values, values=values, backend=backend, steps=steps)
