# -*- coding: utf-8 -*-
import json
import math

import pytest

SMALL_SPECTRAL = {
    'grid.N': 32,
    'annulus.h_lo': 0.3,
    'annulus.h_hi': 0.7,
    'projection.n_bins': 64,
    't_end': 2.0,
    'samples': 5,
}


def _run(name, tmpdir, **keys):
    from ..config import validate_config
    from ..experiments import EXPERIMENTS

    raw = dict(keys, experiment=name)
    experiment = EXPERIMENTS[name](validate_config(raw), str(tmpdir))
    experiment.run()
    return experiment


def _json(tmpdir, name):
    return json.loads(tmpdir.join(name).read())


def _csv(tmpdir, name):
    from ..artifacts import read_csv

    return read_csv(str(tmpdir.join(name)))


def test_period_table(tmpdir):
    experiment = _run('period-table', tmpdir)

    columns, rows = _csv(tmpdir, 'periods.csv')
    assert columns == ['h', 'T', 'Tprime', 'method']
    assert len(rows) == 50
    assert all(row[3] == 'agm' for row in rows)
    assert float(rows[0][1]) > float(rows[-1][1])

    report = _json(tmpdir, 'periods.json')
    assert report['decreasing'] is True
    assert report['agm_discrepancy'] < 1e-14
    assert sorted(experiment.artifacts) == ['periods.csv', 'periods.json']


def test_period_table_is_deterministic(tmpdir):
    first, second = tmpdir.mkdir('first'), tmpdir.mkdir('second')
    _run('period-table', first, **{'levels.count': 20, 'period.method': 'quadrature'})
    _run('period-table', second, **{'levels.count': 20, 'period.method': 'quadrature'})

    assert first.join('periods.csv').read() == second.join('periods.csv').read()
    assert _json(first, 'periods.json')['agm_discrepancy'] < 1e-9


def test_beta_exponent(tmpdir):
    _run('beta-exponent', tmpdir)

    report = _json(tmpdir, 'beta.json')
    assert 0.9 <= report['beta'] <= 1.1
    assert report['degenerate'] is False
    assert report['mixing_lower_bound_exponent'] == pytest.approx(-2 / (report['beta'] + 1))
    assert len(_csv(tmpdir, 'beta.csv')[1]) == 6


def test_beta_exponent_isochronous(tmpdir):
    _run('beta-exponent', tmpdir, field='harmonic', **{'field.domain': 'plane', 'elliptic.radii': [0.1, 0.2, 0.3, 0.4]})

    report = _json(tmpdir, 'beta.json')
    assert report['degenerate'] is True
    assert report['beta'] is None
    assert report['dissipation_upper_exponent'] is None


def test_chart_validate(tmpdir):
    _run('chart-validate', tmpdir, **{
        'chart.variant': 'cellular',
        'chart.n_theta': 16,
        'chart.n_levels': 5,
        'chart.h_lo': 0.4,
        'chart.h_hi': 0.8,
        'chart.checks': 3,
        'chart.t_max_periods': 2.0,
    })

    columns, rows = _csv(tmpdir, 'chart.csv')
    assert columns == ['theta', 'level', 'x1', 'x2', 'jacobian']
    assert len(rows) == 16 * 5

    checks = _json(tmpdir, 'checks.json')
    assert checks['jacobian_error'] < 1e-5
    assert checks['round_trip_error'] < 1e-6
    assert checks['evolution_error'] < 1e-6
    assert checks['inversion_error'] <= checks['resolution']
    assert checks['area'] == pytest.approx(checks['expected_area'], rel=0.05)
    assert 'theta_ratio' in checks
    assert _json(tmpdir, 'chart.json')['variant'] == 'cellular'


def test_mixing_decay_oracle_route(tmpdir):
    _run('mixing-decay', tmpdir, **{
        'mixing.route': 'oracle',
        'grid.N': 128,
        'annulus.h_lo': 0.3,
        'annulus.h_hi': 0.7,
        'chart.n_theta': 32,
        'chart.n_levels': 16,
        'oracle.k_max': 4,
        'mixing.n_s': 4001,
        'mixing.t_min': 100.0,
        'mixing.t_max': 2000.0,
        'samples': 9,
    })

    report = _json(tmpdir, 'mixing.json')
    assert report['route'] == 'oracle'
    assert -1.15 <= report['fit']['exponent'] <= -0.85
    assert report['lower_bound_exponent'] == -1.0
    columns, rows = _csv(tmpdir, 'series.csv')
    assert columns == ['t', 'dual_norm'] and len(rows) == 10


def test_mixing_decay_spectral_route(tmpdir):
    from ..spectral import read_snapshot

    experiment = _run('mixing-decay', tmpdir, **dict(SMALL_SPECTRAL, **{
        't_end': 4.0,
        'mixing.t_min': 1.0,
        'mixing.t_max': 4.0,
    }))

    columns, rows = _csv(tmpdir, 'series.csv')
    assert columns == ['t', 'l2', 'h1', 'hminus1', 'energy_residual']
    assert float(rows[0][0]) == 0.0
    assert 'fit' in _json(tmpdir, 'mixing.json')

    final, header = read_snapshot(str(tmpdir.join('final.f8')))
    assert final.N == 32 and header['time'] == 4.0
    assert {'final.f8', 'final.f8.json', 'series.csv', 'mixing.json'} == set(experiment.artifacts)


def test_mixing_decay_oracle_check(tmpdir):
    experiment = _run('mixing-decay', tmpdir, **dict(SMALL_SPECTRAL, **{
        'grid.N': 64,
        'mixing.t_min': 1.0,
        'mixing.t_max': 2.0,
        'mixing.oracle_check': True,
        'chart.n_theta': 32,
        'chart.n_levels': 8,
    }))

    check = _json(tmpdir, 'oracle.json')
    assert check['t'] == 2.0
    assert 0 <= check['discrepancy'] < 0.25
    assert check['n_theta'] == 32 and check['n_levels'] == 8
    assert 'oracle.json' in experiment.artifacts


def test_dissipation_sweep(tmpdir):
    _run('dissipation-sweep', tmpdir, nu_list=[0.3, 0.1, 0.03, 0.01, 0.003], **SMALL_SPECTRAL)

    columns, rows = _csv(tmpdir, 'series.csv')
    assert columns == ['nu', 't', 'l2', 'h1', 'hminus1', 'energy_residual']
    assert len(rows) == 5 * 5

    report = _json(tmpdir, 'dissipation.json')
    assert len(report['rows']) == 5
    assert 'scaling' in report
    assert report['upper_exponent'] == 0.5


def test_thm_main_protocol(tmpdir):
    _run('thm-main-protocol', tmpdir, nu_list=[1e-2, 1e-3], **dict(SMALL_SPECTRAL, **{
        'protocol.calibration_time': 1.0,
    }))

    columns, rows = _csv(tmpdir, 'protocol.csv')
    assert columns == ['nu', 't', 'l2_ratio', 'gap', 'loss', 'bound', 'consistent']
    assert len(rows) == 3
    assert rows[0][0] == ''
    report = _json(tmpdir, 'protocol.json')
    assert report['annulus'] == [0.3, 0.7]
    assert report['time_exponent'] == pytest.approx(1 / 3)
    assert isinstance(report['all_consistent'], bool)


def test_vanishing_gap(tmpdir):
    _run('vanishing-gap', tmpdir, nu_list=[1e-2, 1e-3, 1e-4], **dict(SMALL_SPECTRAL, **{
        'gap.nu': 1e-3,
        'gap.t_list': [0.5, 1.0, 2.0],
        'gap.t_fixed': 1.0,
    }))

    assert len(_csv(tmpdir, 'gap_t.csv')[1]) == 3
    assert len(_csv(tmpdir, 'gap_nu.csv')[1]) == 3
    report = _json(tmpdir, 'gap.json')
    assert report['support_ok'] is True
    # the gap grows with nu at fixed t
    assert report['nu_fit']['slope'] > 0
    assert report['time_fit']['slope'] > 0


def test_envelope_scan(tmpdir):
    _run('envelope-scan', tmpdir, **{
        'envelope.regime': 'elliptic',
        'envelope.eps': 0.05,
        'envelope.t_max': 1e6,
        'envelope.count': 9,
        'envelope.trials': 2,
    })

    columns, rows = _csv(tmpdir, 'envelope.csv')
    assert columns == ['t', 'envelope', 'r_t', 'delta', 'delta_prime'] and len(rows) == 9
    # the elliptic envelope has no separatrix cut-off
    assert all(row[3] == '' and float(row[4]) > 0 for row in rows)
    report = _json(tmpdir, 'envelope.json')
    assert -1.02 <= report['fit']['exponent'] <= -0.93
    assert report['predicted_exponent'] == pytest.approx(-0.95)
    assert sorted(report['minimising_terms']) == ['elliptic_cap', 'transport']
    assert report['stationary_phase']['violations'] == 0


def test_envelope_scan_defaults(tmpdir):
    _run('envelope-scan', tmpdir, **{'envelope.trials': 0})

    columns, rows = _csv(tmpdir, 'envelope.csv')
    assert len(rows) == 25
    # the minimising cut-offs shrink as t grows
    deltas = [float(row[3]) for row in rows]
    assert deltas[-1] < deltas[0]

    report = _json(tmpdir, 'envelope.json')
    assert report['regime'] == 'global' and report['eps'] == 0.02
    assert -0.36 <= report['fit']['exponent'] <= -0.31
    terms = report['minimising_terms']
    assert sorted(terms) == ['elliptic_cap', 'separatrix_strip', 'transport']
    assert sum(terms.values()) == pytest.approx(float(rows[-1][1]), rel=1e-6)


def test_log_slope():
    from ..experiments.base import log_slope

    fit = log_slope([1.0, 10.0, 100.0], [2.0, 20.0, 200.0])
    assert fit['slope'] == pytest.approx(1.0)
    assert fit['intercept'] == pytest.approx(math.log(2.0))
    assert log_slope([1.0, 2.0], [0.0, 1.0])['slope'] is None
