from pathlib import Path

import numpy as np
from rest_framework import serializers

from gsee.conf import setting_default
from gsee.exceptions import ParameterError
from gsee.rendering import read_json, write_json
from gsee.tables import read_table, write_table

from .estimator import SAMPLING_MODES, AcdfCurve

CURVE_FIELDS = ['x', 'g', 'grad']


class SamplingSpecSerializer(serializers.Serializer):
    """Serializer for the sampling section of an experiment config"""

    M = serializers.IntegerField(min_value=1, default=setting_default('batch_size'))
    mode = serializers.ChoiceField(choices=SAMPLING_MODES, default=setting_default('sampling_mode'))
    repetitions = serializers.IntegerField(min_value=1, default=setting_default('repetitions'))
    root_seed = serializers.IntegerField(min_value=0, default=setting_default('root_seed'))


# ==================== CURVE FILES ====================

def sidecar_path(path):
    return Path(path).with_suffix('.json')


def write_curve(path, curve, sidecar):
    """Curve CSV plus a JSON sidecar describing how it was produced"""
    meta = {k: sidecar[k] for k in ('config_hash', 'root_seed') if k in sidecar}
    write_table(path, CURVE_FIELDS, curve.rows(), meta)
    write_json(sidecar_path(path), {
        **sidecar,
        'M': curve.m_samples,
        'norm_F': curve.norm_F,
        **curve.meta,
    })
    return Path(path)


def read_curve(path):
    """Return (curve, sidecar); the sidecar is empty when missing"""
    _, rows = read_table(path)
    if len(rows) < 2:
        raise ParameterError(f"{path} holds fewer than two curve points")
    try:
        grid = np.array([float(row['x']) for row in rows])
        g_values = np.array([float(row['g']) for row in rows])
        grad_values = np.array([float(row['grad']) for row in rows])
    except (KeyError, ValueError) as e:
        raise ParameterError(f"malformed curve table {path}: {str(e)}")
    sidecar = read_json(sidecar_path(path)) if sidecar_path(path).exists() else {}
    curve = AcdfCurve(
        grid=grid, g_values=g_values, grad_values=grad_values,
        norm_F=float(sidecar.get('norm_F', 0.0)), m_samples=int(sidecar.get('M', 0)),
        meta={k: sidecar[k] for k in ('mode', 'seed', 'repetition') if k in sidecar},
    )
    return curve, sidecar
