"""CSV tables with '# key=value' metadata lines ahead of the header row."""
import csv
import io
from pathlib import Path

from .exceptions import ConfigError


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def dumps_table(fieldnames, rows, meta=None):
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={_cell(value)}\n")
    writer = csv.DictWriter(buf, fieldnames=fieldnames, extrasaction='ignore', lineterminator='\n')
    writer.writeheader()
    for row in rows:
        if not isinstance(row, dict):
            row = dict(zip(fieldnames, row))
        writer.writerow({key: _cell(row.get(key, '')) for key in fieldnames})
    return buf.getvalue()


def write_table(path, fieldnames, rows, meta=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as f:
        f.write(dumps_table(fieldnames, rows, meta))
    return path


def read_table(path):
    """Return (meta, rows) with every value left as text"""
    path = Path(path)
    meta = {}
    try:
        with path.open('r', encoding='utf-8', newline='') as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ConfigError(path, f"cannot read table: {str(e)}")
    body = []
    for line in lines:
        if line.startswith('#'):
            key, sep, value = line[1:].strip().partition('=')
            if sep:
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    return meta, list(csv.DictReader(body))
