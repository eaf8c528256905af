import logging

import numpy as np

from .. import spectral
from ..diagnostics import dissipation_upper_exponent
from ..diagnostics import fit_dissipation_rate
from ..diagnostics import verify_thm_main_protocol
from ..field import make_field
from ..pool import map_ordered
from .base import Experiment
from .base import log_slope

log = logging.getLogger(__name__)


def _sweep_job(job):
    rho0, field_args, nu, t_end, samples, cfl = job
    series = spectral.solve(rho0, make_field(*field_args), nu, t_end, samples, cfl=cfl)
    series.final = None
    return series


def _gap_job(job):
    rho0, field_args, nu, t_grid, cfl = job
    return spectral.viscosity_gap(rho0, make_field(*field_args), nu, t_grid, cfl=cfl)


class DissipationSweep(Experiment):
    """ Decay rate lambda(nu) from the 1/e time of ||rho^nu(t)|| for every nu in nu_list. """
    name = 'dissipation-sweep'

    def run(self):
        c = self.config
        rho0 = self.initial_datum(self.annulus())
        samples = self.sample_times()
        jobs = [(rho0, self.field.rebuild_args(), nu, c['t_end'], samples, c['tolerances.cfl'])
                for nu in c['nu_list']]
        results = map_ordered(_sweep_job, jobs, self.workers)

        rows = []
        for nu, series in zip(c['nu_list'], results):
            rows.extend((nu,) + row for row in series.rows())
        self.write_csv('series.csv', ('nu',) + spectral.NormSeries.COLUMNS, rows)

        fit = fit_dissipation_rate([(nu, series.times, series.l2) for nu, series in zip(c['nu_list'], results)])
        report = fit.as_dict()
        report['upper_exponent'] = dissipation_upper_exponent(c['protocol.beta'])
        self.write_json('dissipation.json', report)


class ThmMainProtocol(Experiment):
    """
    Check ||rho^nu(t)|| >= threshold ||rho_0|| at t = eps0 nu^(-a): a = 1/3 on a
    good annulus, a = (1 + beta) / (3 + beta) about an elliptic point.
    """
    name = 'thm-main-protocol'

    def run(self):
        c = self.config
        if c['protocol.variant'] == 'elliptic':
            annulus = self.elliptic_annulus()
            time_exponent = dissipation_upper_exponent(c['protocol.beta'])
        else:
            annulus = self.annulus()
            time_exponent = 1.0 / 3.0

        report = verify_thm_main_protocol(
            self.field, annulus, c['nu_list'],
            N=c['grid.N'],
            rho0=self.initial_datum(annulus),
            calibration_time=c['protocol.calibration_time'],
            threshold=c['protocol.threshold'],
            time_exponent=time_exponent,
            workers=self.workers,
        )
        report['variant'] = c['protocol.variant']
        report['annulus'] = [annulus.h_lo, annulus.h_hi]
        report['all_consistent'] = all(row['consistent'] for row in report['rows'])

        columns = ('nu', 't', 'l2_ratio', 'gap', 'loss', 'bound', 'consistent')
        self.write_csv('protocol.csv', columns, ([row[name] for name in columns] for row in report['rows']))
        self.write_json('protocol.json', report)


class VanishingGap(Experiment):
    """ Growth of ||rho^nu(t) - rho(t)||^2 in t at fixed nu, and in nu at fixed t. """
    name = 'vanishing-gap'

    def run(self):
        c = self.config
        annulus = self.annulus()
        rho0 = self.initial_datum(annulus)
        field_args = self.field.rebuild_args()
        cfl = c['tolerances.cfl']

        in_time = spectral.viscosity_gap(rho0, self.field, c['gap.nu'], c['gap.t_list'], annulus=annulus, cfl=cfl)
        self.write_csv('gap_t.csv', spectral.GapSeries.COLUMNS, in_time.rows())

        jobs = [(rho0, field_args, nu, [c['gap.t_fixed']], cfl) for nu in c['nu_list']]
        in_nu = map_ordered(_gap_job, jobs, self.workers)
        gaps = np.array([series.gaps[-1] for series in in_nu])
        self.write_csv('gap_nu.csv', ('nu', 'gap'), zip(c['nu_list'], gaps))

        self.write_json('gap.json', {
            'nu': c['gap.nu'],
            't_fixed': c['gap.t_fixed'],
            'support_ok': in_time.support_ok,
            'time_fit': log_slope(in_time.times, in_time.gaps),
            'nu_fit': log_slope(c['nu_list'], gaps),
        })
