"""
CSV and JSON artifacts of an experiment run.

Floats are written with 17 significant digits so every value is re-read
bit for bit.
"""
import csv
import json
import logging
import math
import os

import numpy as np

from .errors import OutputError

log = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
MANIFEST = 'manifest.json'
ERROR_FILE = 'error.json'


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def _plain(value):
    """ json.dump fallback for numpy scalars and arrays. """
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError('cannot serialise {!r}'.format(type(value)))


def _finite(value):
    """ Map non-finite floats to None, recursively; JSON has no nan or inf. """
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    if isinstance(value, np.ndarray):
        return _finite(value.tolist())
    if isinstance(value, (float, np.floating)) and not math.isfinite(float(value)):
        return None
    return value


def ensure_output_dir(path):
    """ Create *path* if needed and make sure it is writable. """
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OutputError('cannot create output dir {}: {}'.format(path, exc))
    if not os.path.isdir(path) or not os.access(path, os.W_OK):
        raise OutputError('output dir {} is not writable'.format(path))
    return path


def write_csv(path, columns, rows):
    """ Write *rows* under a header of *columns*; returns the number of rows. """
    count = 0
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError('row of length {} under {} columns'.format(len(row), len(columns)))
            writer.writerow([format_value(value) for value in row])
            count += 1
    log.debug('wrote %d rows to %s', count, path)
    return count


def read_csv(path):
    """ Read a CSV written by :func:`write_csv` as (columns, list of string rows). """
    with open(path, newline='') as handle:
        reader = csv.reader(handle)
        columns = next(reader)
        return columns, [row for row in reader]


def write_json(path, data):
    with open(path, 'w') as handle:
        json.dump(_finite(data), handle, indent=2, sort_keys=True, default=_plain, allow_nan=False)
        handle.write('\n')
    log.debug('wrote %s', path)


def read_json(path):
    with open(path) as handle:
        return json.load(handle)


def write_manifest(output_dir, config, version, wall_time, artifacts):
    """ The manifest names every artifact and echoes the config that produced it. """
    write_json(os.path.join(output_dir, MANIFEST), {
        'config': config,
        'version': version,
        'wall_time': wall_time,
        'artifacts': sorted(artifacts),
    })


def error_document(exc, experiment=None):
    return {
        'error': getattr(exc, 'code', 'error'),
        'message': str(exc),
        'experiment': experiment,
    }


def write_error(output_dir, document):
    """ Best effort: an unwritable directory is logged, never raised. """
    try:
        write_json(os.path.join(output_dir, ERROR_FILE), document)
    except (OSError, TypeError, ValueError) as exc:
        log.warning('could not write %s to %s: %s', ERROR_FILE, output_dir, exc)
