# -*- coding: utf-8 -*-
import pytest


def _write(tmpdir, text, name='config.yml'):
    path = tmpdir.join(name)
    path.write(text)
    return str(path)


def test_nested_and_dotted_keys_are_equivalent():
    from ..config import flatten

    assert flatten({'grid': {'N': 64}, 'annulus.h_lo': 0.2}) == {'grid.N': 64, 'annulus.h_lo': 0.2}


def test_flatten_rejects_duplicates():
    from ..config import flatten
    from ..errors import ConfigError

    with pytest.raises(ConfigError):
        flatten({'grid': {'N': 64}, 'grid.N': 128})


def test_defaults_are_filled_in():
    from ..config import SCHEMA
    from ..config import validate_config

    config = validate_config({'experiment': 'period-table'})

    assert set(config) == set(SCHEMA)
    assert config['field'] == 'cellular'
    assert config['grid.N'] == 256
    assert config['levels.count'] == 50
    assert config['workers'] is None


@pytest.mark.parametrize("raw,message", [
    ({}, 'experiment: missing'),
    ({'experiment': 'nope'}, 'experiment: must be one of'),
    ({'experiment': 'period-table', 'grid.N': 100}, 'grid.N: value must be a power of two'),
    ({'experiment': 'period-table', 'bogus': 1}, 'unknown key bogus'),
    ({'experiment': 'period-table', 'field': 'expr:tan(x1)'}, 'field: unknown name in expression: tan'),
    ({'experiment': 'period-table', 'samples': 1}, 'samples: value too small (must be >= 2)'),
    ({'experiment': 'mixing-decay', 'annulus.h_lo': 0.3}, 'must be given together'),
    ({'experiment': 'mixing-decay', 'annulus.h_lo': 0.5, 'annulus.h_hi': 0.3}, 'smaller than annulus.h_hi'),
    ({'experiment': 'mixing-decay', 'initial.kind': 'file'}, 'initial.path is required'),
    ({'experiment': 'period-table', 'field': 'shear-cos'}, 'field must be cellular'),
    ({'experiment': 'mixing-decay', 'mixing.route': 'oracle', 'field': 'shear-cos'}, 'needs the cellular field'),
    ({'experiment': 'thm-main-protocol', 'protocol.variant': 'elliptic'}, 'elliptic.r is required'),
    ({'experiment': 'dissipation-sweep', 'nu_list': [0.0, 1e-3]}, 'positive viscosities'),
])
def test_invalid_configs(raw, message):
    from ..config import validate_config
    from ..errors import ConfigError

    with pytest.raises(ConfigError) as exc:
        validate_config(raw)
    assert message in str(exc.value)


def test_all_problems_are_reported():
    from ..config import validate_config
    from ..errors import ConfigError

    with pytest.raises(ConfigError) as exc:
        validate_config({'experiment': 'period-table', 'grid.N': 3, 'seed': -1})
    assert 'grid.N' in str(exc.value)
    assert 'seed' in str(exc.value)


def test_config_error_is_a_value_error():
    from ..errors import ConfigError
    from ..errors import MixlabError

    assert issubclass(ConfigError, ValueError)
    assert issubclass(ConfigError, MixlabError)
    assert ConfigError.code == 'config'


def test_load_config(tmpdir):
    from ..config import load_config
    from ..config import validate_config

    path = _write(tmpdir, '\n'.join([
        'experiment: dissipation-sweep',
        'field: "expr:sin(x1)*sin(x2)"',
        'grid:',
        '  N: 64',
        'nu_list: [1.0e-5, 1.0e-4, 1.0e-3]',
        'annulus.h_lo: 0.3',
        'annulus.h_hi: 0.6',
        '',
    ]))
    config = validate_config(load_config(path))

    assert config['experiment'] == 'dissipation-sweep'
    assert config['field'] == 'expr:sin(x1)*sin(x2)'
    assert config['grid.N'] == 64
    assert config['nu_list'] == [1e-5, 1e-4, 1e-3]
    assert (config['annulus.h_lo'], config['annulus.h_hi']) == (0.3, 0.6)


@pytest.mark.parametrize("text", [
    '- just\n- a list\n',
    'experiment: [unclosed\n',
    '',
])
def test_load_config_rejects_non_mappings(tmpdir, text):
    from ..config import load_config
    from ..errors import ConfigError

    with pytest.raises(ConfigError):
        load_config(_write(tmpdir, text))


def test_load_config_missing_file(tmpdir):
    from ..config import load_config
    from ..errors import ConfigError

    with pytest.raises(ConfigError) as exc:
        load_config(str(tmpdir.join('missing.yml')))
    assert 'cannot read config' in str(exc.value)


def test_echo_is_plain():
    from ..config import echo
    from ..config import validate_config

    config = validate_config({'experiment': 'chart-validate', 'field': 'expr:-cos(x2)', 'field.center': [1, 2]})
    echoed = echo(config)

    assert echoed['field.center'] == [1.0, 2.0]
    assert echoed['experiment'] == 'chart-validate'
