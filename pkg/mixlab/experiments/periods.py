import logging

import numpy as np

from ..diagnostics import dissipation_upper_exponent
from ..diagnostics import mixing_lower_bound_exponent
from ..period import beta_exponent
from ..period import build_period_table
from ..period import period_agm
from ..period import second_difference_bound
from .base import Experiment

log = logging.getLogger(__name__)


class PeriodTable(Experiment):
    """ T(h) and T'(h) of the cellular flow on a level grid. """
    name = 'period-table'

    def levels(self):
        c = self.config
        if c['levels.spacing'] == 'log':
            return np.geomspace(c['levels.min'], c['levels.max'], c['levels.count'])
        return np.linspace(c['levels.min'], c['levels.max'], c['levels.count'])

    def run(self):
        c = self.config
        levels = self.levels()
        table = build_period_table(levels, c['period.method'], self.workers)
        self.write_csv('periods.csv', ('h', 'T', 'Tprime', 'method'), table.rows())

        discrepancy = np.abs(table.T - period_agm(levels)) / table.T
        decreasing = table.is_decreasing()
        if not decreasing:
            log.warning('T(h) is not strictly decreasing on the table')
        self.write_json('periods.json', {
            'method': c['period.method'],
            'count': len(levels),
            'decreasing': decreasing,
            'constant': table.estimate_constant(),
            'agm_discrepancy': float(discrepancy.max()),
            'second_difference_bound': float(second_difference_bound(levels).max()),
        })


class BetaExponent(Experiment):
    """ The exponent beta of |T'(r)| ~ r^beta near the field's elliptic point. """
    name = 'beta-exponent'

    def run(self):
        c = self.config
        estimate = beta_exponent(self.field, c['elliptic.radii'], direction=self.field.ray,
                                 max_time=c['period.max_time'])
        self.write_csv('beta.csv', ('r', 'T', 'Tprime'),
                       zip(estimate.radii, estimate.periods, estimate.slopes))

        report = {
            'field': self.field.name,
            'beta': estimate.beta,
            'residual': estimate.residual,
            'degenerate': estimate.degenerate,
            'mixing_lower_bound_exponent': None,
            'dissipation_upper_exponent': None,
        }
        if not estimate.degenerate:
            report['mixing_lower_bound_exponent'] = mixing_lower_bound_exponent(estimate.beta)
            report['dissipation_upper_exponent'] = dissipation_upper_exponent(estimate.beta)
        self.write_json('beta.json', report)
