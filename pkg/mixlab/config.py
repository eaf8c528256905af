"""
Experiment configuration: one YAML document of flat dotted keys.

Every key is declared once in :data:`SCHEMA` with its validator and default.
Nested mappings are flattened, so ``grid: {N: 128}`` and ``grid.N: 128`` mean
the same thing.
"""
import logging

import yaml

from .errors import ConfigError
from .types import boolean
from .types import choice
from .types import field_spec
from .types import float_list
from .types import point
from .types import power_of_two
from .types import restricted_float
from .types import restricted_int
from .types import restricted_str

log = logging.getLogger(__name__)

EXPERIMENT_NAMES = (
    'period-table',
    'chart-validate',
    'mixing-decay',
    'dissipation-sweep',
    'thm-main-protocol',
    'envelope-scan',
    'vanishing-gap',
    'beta-exponent',
)

_PATH = restricted_str(regex=r'^[A-Za-z0-9_./~+-]+$', maxlen=4096)
_POSITIVE = restricted_float(minimum=0, exclusive=True)
_UNIT = restricted_float(minimum=0, maximum=1, exclusive=True)

SCHEMA = {
    'experiment': (choice(*EXPERIMENT_NAMES), None),
    'field': (field_spec(), 'cellular'),
    'field.domain': (choice('torus', 'cell', 'plane'), 'torus'),
    'field.center': (point(), None),
    'grid.N': (power_of_two(minimum=8, maximum=4096), 256),
    'nu_list': (float_list(minimum=0), [1e-3]),
    't_end': (_POSITIVE, 10.0),
    'samples': (restricted_int(minimum=2), 21),
    'annulus.h_lo': (restricted_float(), None),
    'annulus.h_hi': (restricted_float(), None),
    'annulus.n_levels': (restricted_int(minimum=2), 19),
    'elliptic.r': (_POSITIVE, None),
    'elliptic.radii': (float_list(minlen=4, increasing=True, minimum=0, exclusive=True),
                       [0.05, 0.08, 0.12, 0.17, 0.23, 0.3]),
    'initial.kind': (choice('annulus-bump', 'angle-mode', 'file'), 'annulus-bump'),
    'initial.k': (restricted_int(minimum=1, maximum=64), 1),
    'initial.path': (_PATH, None),
    'initial.project': (boolean(), True),
    'seed': (restricted_int(minimum=0), 0),
    'output_dir': (_PATH, 'mixlab-output'),
    'workers': (restricted_int(minimum=1), None),
    'levels.count': (restricted_int(minimum=1, maximum=100000), 50),
    'levels.min': (_UNIT, 1e-4),
    'levels.max': (restricted_float(minimum=0, maximum=1, exclusive=False), 1 - 1e-6),
    'levels.spacing': (choice('log', 'linear'), 'log'),
    'period.method': (choice('agm', 'quadrature', 'return-map'), 'agm'),
    'period.max_time': (_POSITIVE, 500.0),
    'chart.variant': (choice('standard', 'cellular'), 'standard'),
    'chart.n_theta': (restricted_int(minimum=2), 64),
    'chart.n_levels': (restricted_int(minimum=2), 32),
    'chart.h_lo': (_UNIT, 0.2),
    'chart.h_hi': (_UNIT, 0.8),
    'chart.checks': (restricted_int(minimum=0), 100),
    'chart.t_max_periods': (_POSITIVE, 10.0),
    'projection.n_bins': (restricted_int(minimum=1), 256),
    'mixing.route': (choice('spectral', 'oracle'), 'spectral'),
    'mixing.t_min': (restricted_float(minimum=1), 20.0),
    'mixing.t_max': (_POSITIVE, 2000.0),
    'mixing.n_s': (restricted_int(minimum=3), 8001),
    'mixing.oracle_check': (boolean(), False),
    'envelope.regime': (choice('interior', 'elliptic', 'global'), 'global'),
    'envelope.eps': (_UNIT, 0.02),
    'envelope.absorb_logs': (boolean(), True),
    'envelope.t_min': (restricted_float(minimum=1), 1e2),
    'envelope.t_max': (restricted_float(minimum=1), 1e6),
    'envelope.count': (restricted_int(minimum=4), 25),
    'envelope.trials': (restricted_int(minimum=0), 20),
    'oracle.delta': (restricted_float(minimum=0, maximum=0.25, exclusive=True), 0.1),
    'oracle.delta_prime': (restricted_float(minimum=0, maximum=0.25, exclusive=True), 0.1),
    'oracle.lattice': (restricted_int(minimum=1), 1),
    'oracle.k_max': (restricted_int(minimum=1), 8),
    'protocol.variant': (choice('global', 'elliptic'), 'global'),
    'protocol.beta': (restricted_float(minimum=0), 1.0),
    'protocol.threshold': (_UNIT, 0.4),
    'protocol.calibration_time': (_POSITIVE, 2.0),
    'gap.nu': (_POSITIVE, 1e-4),
    'gap.t_list': (float_list(minlen=2, increasing=True, minimum=0, exclusive=True), [5.0, 10.0, 20.0, 40.0]),
    'gap.t_fixed': (_POSITIVE, 20.0),
    'tolerances.ode': (restricted_float(minimum=1e-14, maximum=1e-3), 1e-12),
    'tolerances.cfl': (restricted_float(minimum=0, maximum=1, exclusive=True), 0.5),
}


def flatten(data, prefix=''):
    """ Turn nested mappings into one level of dotted keys. """
    flat = {}
    for key, value in data.items():
        if not isinstance(key, str):
            raise ConfigError('config keys must be strings, got {!r}'.format(key))
        name = prefix + key
        if isinstance(value, dict):
            flat.update(flatten(value, name + '.'))
        elif name in flat:
            raise ConfigError('duplicate key {}'.format(name))
        else:
            flat[name] = value
    return flat


def load_config(path):
    """ Read a config file; the result still needs :func:`validate_config`. """
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except (IOError, OSError) as exc:
        raise ConfigError('cannot read config {}: {}'.format(path, exc))
    except yaml.YAMLError as exc:
        raise ConfigError('config {} is not valid YAML: {}'.format(path, exc))

    if not isinstance(data, dict):
        raise ConfigError('config {} must be a mapping of keys to values'.format(path))
    return flatten(data)


def validate_config(raw):
    """
    Check every key against the schema and fill in the defaults.

    :raises ConfigError: listing every offending key

    """
    unknown = sorted(set(raw) - set(SCHEMA))
    problems = ['unknown key {}'.format(key) for key in unknown]

    config = {}
    for key, (validator, default) in sorted(SCHEMA.items()):
        if key not in raw or raw[key] is None:
            config[key] = default
            continue
        try:
            config[key] = validator(raw[key])
        except ValueError as exc:
            problems.append('{}: {}'.format(key, exc))

    if raw.get('experiment') is None:
        problems.append('experiment: missing')

    if not problems:
        problems.extend(_cross_checks(config))
    if problems:
        raise ConfigError('; '.join(problems))

    log.debug('validated config: %s', config)
    return config


def _cross_checks(config):
    lo, hi = config['annulus.h_lo'], config['annulus.h_hi']
    if (lo is None) != (hi is None):
        yield 'annulus.h_lo and annulus.h_hi must be given together'
    elif lo is not None and not lo < hi:
        yield 'annulus.h_lo must be smaller than annulus.h_hi'
    if not config['levels.min'] < config['levels.max']:
        yield 'levels.min must be smaller than levels.max'
    if not config['chart.h_lo'] < config['chart.h_hi']:
        yield 'chart.h_lo must be smaller than chart.h_hi'
    if not config['mixing.t_min'] < config['mixing.t_max']:
        yield 'mixing.t_min must be smaller than mixing.t_max'
    if not config['envelope.t_min'] < config['envelope.t_max']:
        yield 'envelope.t_min must be smaller than envelope.t_max'
    if config['initial.kind'] == 'file' and config['initial.path'] is None:
        yield 'initial.path is required for initial.kind file'
    if config['experiment'] == 'period-table' and config['field'] != 'cellular':
        yield 'period-table tabulates the cellular flow, field must be cellular'
    if config['experiment'] == 'mixing-decay' and config['mixing.route'] == 'oracle' and config['field'] != 'cellular':
        yield 'the oracle route of mixing-decay needs the cellular field'
    if config['experiment'] == 'thm-main-protocol' and config['protocol.variant'] == 'elliptic' \
            and config['elliptic.r'] is None:
        yield 'elliptic.r is required for protocol.variant elliptic'
    if config['experiment'] in ('dissipation-sweep', 'thm-main-protocol', 'vanishing-gap'):
        if not config['nu_list'] or min(config['nu_list']) <= 0:
            yield 'nu_list must hold positive viscosities'


def echo(config):
    """ The config as stored in the manifest: plain lists instead of tuples. """
    return {key: list(value) if isinstance(value, tuple) else value for key, value in config.items()}
