"""JSON artifacts through the REST framework renderer and parser."""
import io
import json
import math
from pathlib import Path

import numpy as np
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer
from rest_framework.utils.encoders import JSONEncoder

from .exceptions import ConfigError


def _finite(value):
    """Replace non-finite floats by 'inf', '-inf' or 'nan' so strict JSON accepts them"""
    if isinstance(value, dict):
        return {str(k): _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_finite(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def render_json(data):
    return JSONRenderer().render(_finite(data), renderer_context={'indent': 2}) + b'\n'


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(render_json(data))
    return path


def parse_json(payload, source='<json>'):
    try:
        return JSONParser().parse(io.BytesIO(payload))
    except ParseError as e:
        raise ConfigError(source, str(e.detail))


def read_json(path):
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise ConfigError(path, f"cannot read JSON: {str(e)}")
    return parse_json(payload, path)


def canonical_json(data):
    """Sorted, compact rendering used for config hashes"""
    return json.dumps(_finite(data), cls=JSONEncoder, sort_keys=True, separators=(',', ':'), ensure_ascii=True)
