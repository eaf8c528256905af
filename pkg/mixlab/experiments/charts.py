import logging
import math

import numpy as np

from .. import actionangle
from .. import lagrangian
from ..period import period_agm
from .base import Experiment

log = logging.getLogger(__name__)

CHART_COLUMNS = ('theta', 'level', 'x1', 'x2', 'jacobian')


def circular_distance(a, b):
    """ Distance of two angles in [0, 1) on the circle of length one. """
    d = np.mod(np.asarray(a) - np.asarray(b), 1.0)
    return np.minimum(d, 1.0 - d)


class ChartValidate(Experiment):
    """
    Build an action-angle chart and check it: the Jacobian identity, the area
    of the annulus, the angle evolution law and the inversion round trip.
    """
    name = 'chart-validate'

    def chart(self):
        c = self.config
        field = self.field
        if c['chart.variant'] == 'cellular':
            I_grid = np.linspace(math.asin(c['chart.h_lo']), math.asin(c['chart.h_hi']), c['chart.n_levels'])
            return actionangle.build_cellular_chart(field, I_grid, c['chart.n_theta'], tol=self.tolerance,
                                                    max_time=c['period.max_time'], workers=self.workers)

        curve = actionangle.build_transversal(field, c['chart.h_lo'], c['chart.h_hi'],
                                              field.section_point(c['chart.h_lo']), c['chart.n_levels'],
                                              tol=self.tolerance)
        return actionangle.build_chart(field, curve, c['chart.n_theta'], tol=self.tolerance,
                                       max_time=c['period.max_time'], workers=self.workers)

    def evolution_checks(self, chart):
        """
        Draw points x = X(theta T(h), x(h)) and times t, and compare
        Psi(X(t, x)) - Psi(x) with t / T(h) modulo one. The inversion through
        the interpolated chart is checked against the chart resolution.
        """
        c = self.config
        field = self.field
        rng = self.rng()
        lo, hi = chart.h_values.min(), chart.h_values.max()
        margin = 0.01 * (hi - lo)

        evolution, round_trip, inversion = [], [], []
        for _ in range(c['chart.checks']):
            theta = rng.uniform(0.0, 1.0)
            h = rng.uniform(lo + margin, hi - margin)
            base = actionangle.base_point(field, chart, h)
            period, _ = lagrangian.orbit_return_time(field, base, max_time=c['period.max_time'], tol=self.tolerance)
            x = lagrangian.orbit_solution(field, base, period, tol=self.tolerance)(theta * period)
            t = rng.uniform(0.0, c['chart.t_max_periods'] * period)

            psi_x, _ = actionangle.angle_of_point(chart, field, x, c['period.max_time'], exact=True)
            round_trip.append(float(circular_distance(psi_x, theta)))
            if t > 0:
                y = lagrangian.integrate_orbit(field, x, t, tol=self.tolerance).points[-1]
                psi_y, _ = actionangle.angle_of_point(chart, field, y, c['period.max_time'], exact=True)
                evolution.append(float(circular_distance(psi_y - psi_x, t / period)))

            coarse, level = actionangle.angle_of_point(chart, field, x)
            level = min(max(level, chart.level_grid[0]), chart.level_grid[-1])
            gap = lagrangian.wrapped_difference(field, chart.interpolate(coarse, level) - x)
            inversion.append(float(np.hypot(*gap)))

        inversion_error = max(inversion) if inversion else None
        if inversion_error is not None and inversion_error > chart.resolution():
            log.warning('chart inversion misses by %.3g, more than the resolution %.3g',
                        inversion_error, chart.resolution())
        return {
            'checks': c['chart.checks'],
            'evolution_error': max(evolution) if evolution else None,
            'round_trip_error': max(round_trip) if round_trip else None,
            'inversion_error': inversion_error,
        }

    def run(self):
        chart = self.chart()
        self.write_csv('chart.csv', CHART_COLUMNS, chart.rows())
        self.write_json('chart.json', chart.header())

        checks = {'jacobian_error': chart.jacobian_error(), 'lipschitz': chart.lipschitz(),
                  'resolution': chart.resolution(), 'area': chart.area(), 'expected_area': None}
        if self.field.name == 'cellular':
            lo, hi = chart.h_values.min(), chart.h_values.max()
            checks['expected_area'] = actionangle.annulus_area(period_agm, lo, hi)
        if chart.variant == 'cellular':
            checks.update(chart.derivative_bounds())
        checks.update(self.evolution_checks(chart))
        log.info('chart checks: %s', checks)
        self.write_json('checks.json', checks)
