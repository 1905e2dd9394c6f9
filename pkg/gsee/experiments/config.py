"""
Experiment config files.

The main encoding is dotenv text with section-prefixed keys::

    hamiltonian.model=xxz
    hamiltonian.n=4
    filter.epsilon=0.1

JSON with one object per section is accepted as well. Both feed
ExperimentConfigSerializer.
"""
import hashlib
import logging
from pathlib import Path

from dotenv import dotenv_values
from rest_framework import serializers

from gsee.exceptions import ConfigError
from gsee.rendering import canonical_json, read_json

from .serializers import ExperimentConfigSerializer, flatten_errors

logger = logging.getLogger(__name__)


def nest(flat, source='<config>'):
    """{'a.b': v} -> {'a': {'b': v}}; keys must carry a section prefix"""
    nested = {}
    for key, value in flat.items():
        if value is None:
            continue
        section, sep, field = key.strip().partition('.')
        if not sep or not section or not field:
            raise ConfigError(source, f"key '{key}' must look like section.field")
        nested.setdefault(section, {})[field] = value
    return nested


def load_config(path):
    """Raw nested config from a dotenv or JSON file"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(path, "config file not found")
    if path.suffix.lower() == '.json':
        data = read_json(path)
        if not isinstance(data, dict):
            raise ConfigError(path, "JSON config must be an object of sections")
        return data
    try:
        flat = dotenv_values(path)
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(path, f"cannot read config: {str(e)}")
    return nest(flat, path)


def parse_assignments(assignments, source='--set'):
    """'section.key=value' strings as given on the command line"""
    flat = {}
    for item in assignments or []:
        key, sep, value = item.partition('=')
        if not sep:
            raise ConfigError(source, f"expected section.key=value, got '{item}'")
        flat[key.strip()] = value.strip()
    return nest(flat, source)


def merge(base, overrides):
    merged = {section: dict(values) if isinstance(values, dict) else values for section, values in base.items()}
    for section, values in overrides.items():
        if isinstance(values, dict) and isinstance(merged.get(section), dict):
            merged[section].update(values)
        else:
            merged[section] = values
    return merged


def validate_config(data, sections=None):
    """Validated config dict; errors carry dotted field paths"""
    serializer = ExperimentConfigSerializer(data=data, sections=sections)
    if not serializer.is_valid():
        raise serializers.ValidationError(flatten_errors(serializer.errors))
    return _plain(serializer.validated_data)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_hash(config):
    """SHA-256 of the canonical JSON of a validated config"""
    return hashlib.sha256(canonical_json(config).encode('utf-8')).hexdigest()
