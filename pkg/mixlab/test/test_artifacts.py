# -*- coding: utf-8 -*-
import json
import math

import numpy as np
import pytest


@pytest.mark.parametrize("value,text", [
    (None, ''),
    (True, 'true'),
    (np.bool_(False), 'false'),
    (3, '3'),
    (np.int64(-7), '-7'),
    (0.1, '0.10000000000000001'),
    (np.float64(2.5), '2.5'),
    ('agm', 'agm'),
])
def test_format_value(value, text):
    from ..artifacts import format_value

    assert format_value(value) == text


def test_csv_floats_survive_exactly(tmpdir):
    from ..artifacts import read_csv
    from ..artifacts import write_csv

    values = [math.pi, 1 / 3.0, 1e-300, -2.0 ** 0.5]
    path = str(tmpdir.join('values.csv'))

    assert write_csv(path, ('x', 'label'), [(v, 'v') for v in values]) == 4
    columns, rows = read_csv(path)
    assert columns == ['x', 'label']
    assert [float(row[0]) for row in rows] == values
    assert '\r' not in tmpdir.join('values.csv').read()


def test_csv_row_length_checked(tmpdir):
    from ..artifacts import write_csv

    with pytest.raises(ValueError):
        write_csv(str(tmpdir.join('bad.csv')), ('a', 'b'), [(1,)])


def test_json_maps_non_finite_to_null(tmpdir):
    from ..artifacts import read_json
    from ..artifacts import write_json

    path = str(tmpdir.join('report.json'))
    write_json(path, {'beta': math.nan, 'values': np.array([1.0, np.inf]), 'count': np.int32(2),
                      'pair': (1, 2)})

    assert read_json(path) == {'beta': None, 'values': [1.0, None], 'count': 2, 'pair': [1, 2]}


def test_ensure_output_dir(tmpdir):
    from ..artifacts import ensure_output_dir
    from ..errors import OutputError

    target = tmpdir.join('a', 'b')
    assert ensure_output_dir(str(target)) == str(target)
    assert target.check(dir=True)

    blocker = tmpdir.join('file')
    blocker.write('')
    with pytest.raises(OutputError):
        ensure_output_dir(str(blocker))


def test_manifest_sorts_artifacts(tmpdir):
    from ..artifacts import write_manifest

    write_manifest(str(tmpdir), {'experiment': 'period-table'}, '0.1.0', 1.5, ['periods.json', 'periods.csv'])
    manifest = json.loads(tmpdir.join('manifest.json').read())

    assert manifest['artifacts'] == ['periods.csv', 'periods.json']
    assert manifest['version'] == '0.1.0'


def test_error_document(tmpdir):
    from ..artifacts import error_document
    from ..artifacts import write_error
    from ..errors import StallError

    document = error_document(StallError('speed below floor'), 'chart-validate')
    assert document == {'error': 'stall', 'message': 'speed below floor', 'experiment': 'chart-validate'}
    assert error_document(KeyError('x'))['error'] == 'error'

    write_error(str(tmpdir), document)
    assert json.loads(tmpdir.join('error.json').read()) == document

    # unwritable targets are only logged
    write_error(str(tmpdir.join('missing')), document)


@pytest.mark.parametrize("flag,configured,env,expected", [
    (None, None, None, 1),
    (None, None, '3', 3),
    (None, 2, '3', 2),
    (4, 2, '3', 4),
])
def test_resolve_workers(monkeypatch, flag, configured, env, expected):
    from ..pool import WORKERS_ENV
    from ..pool import resolve_workers

    if env is None:
        monkeypatch.delenv(WORKERS_ENV, raising=False)
    else:
        monkeypatch.setenv(WORKERS_ENV, env)
    assert resolve_workers(flag, configured) == expected


@pytest.mark.parametrize("env", ['zero', '0'])
def test_resolve_workers_rejects_env(monkeypatch, env):
    from ..pool import WORKERS_ENV
    from ..pool import resolve_workers

    monkeypatch.setenv(WORKERS_ENV, env)
    with pytest.raises(ValueError):
        resolve_workers()


def test_map_ordered_keeps_order():
    from ..pool import map_ordered

    assert map_ordered(abs, [-3, 2, -1], workers=2) == [3, 2, 1]
    assert map_ordered(abs, [], workers=4) == []
