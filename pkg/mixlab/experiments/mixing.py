import logging
import math

import numpy as np

from .. import actionangle
from .. import oracle
from .. import spectral
from ..diagnostics import fit_mixing_rate
from ..diagnostics import fit_power_law
from ..diagnostics import mixing_lower_bound_exponent
from ..diagnostics import sobolev_norm
from .base import Experiment

log = logging.getLogger(__name__)


def smooth_profile(s_grid, lo, hi):
    """ A C-infinity bump on (lo, hi), zero elsewhere. """
    u = (2 * np.asarray(s_grid, dtype=float) - (lo + hi)) / (hi - lo)
    return spectral.bump(u)


class MixingDecay(Experiment):
    """
    Inviscid decay of the mix norm, either from the spectral solver or from
    exact transport in the cellular action-angle variables.
    """
    name = 'mixing-decay'

    def fit_times(self):
        c = self.config
        return np.geomspace(c['mixing.t_min'], c['mixing.t_max'], c['samples'])

    def spectral_series(self):
        c = self.config
        annulus = self.annulus()
        rho0 = self.initial_datum(annulus)
        times = np.unique(np.concatenate([[0.0], np.geomspace(1.0, c['t_end'], c['samples'] - 1)]))
        series = spectral.solve(rho0, self.field, 0.0, c['t_end'], times, cfl=c['tolerances.cfl'])
        self.write_csv('series.csv', spectral.NormSeries.COLUMNS, series.rows())
        spectral.write_snapshot(series.final, self.path('final.f8'), self.field.name, 0.0)
        self.artifacts.extend(['final.f8', 'final.f8.json'])
        if c['mixing.oracle_check']:
            self.oracle_check(rho0, series.final)
        return series.times, series.hminus1, sobolev_norm(rho0, 1)

    def cellular_chart(self, annulus):
        c = self.config
        if self.field.name != 'cellular':
            raise ValueError('the action-angle routes need the cellular field')
        I_grid = np.linspace(math.asin(annulus.h_lo), math.asin(annulus.h_hi), c['chart.n_levels'])
        return actionangle.build_cellular_chart(self.field, I_grid, c['chart.n_theta'], tol=self.tolerance,
                                                max_time=c['period.max_time'], workers=self.workers)

    def oracle_check(self, rho0, final):
        """ Transport the chart pushforward of rho0 exactly and compare with the spectral solution. """
        c = self.config
        chart = self.cellular_chart(self.annulus())
        start = spectral.SpectralSolver(self.field, rho0.N, 0.0).dealias(rho0)
        state = oracle.transport_exact(oracle.pushforward(start.evaluate, chart), final.time)
        discrepancy = oracle.chart_discrepancy(state, chart, final)
        log.info('oracle discrepancy at t=%g: %.3g', final.time, discrepancy)
        self.write_json('oracle.json', {'t': final.time, 'discrepancy': discrepancy,
                                        'n_theta': c['chart.n_theta'], 'n_levels': c['chart.n_levels']})

    def oracle_series(self):
        """
        Push the initial datum through the cellular chart of the annulus, carry
        its angular modes to the mixing.n_s grid and transport them exactly.
        """
        c = self.config
        annulus = self.annulus()
        rho0 = self.initial_datum(annulus)
        chart = self.cellular_chart(annulus)
        coarse = oracle.pushforward(rho0.evaluate, chart, k_max=c['oracle.k_max'], lattice=c['oracle.lattice'])

        s_grid = np.linspace(chart.level_grid[0], chart.level_grid[-1], c['mixing.n_s'])
        period, _, weight = oracle.cellular_weights(s_grid)
        state = oracle.resample(coarse, s_grid, weight, period)

        h1_initial = oracle.h1g_norm(state)
        times = np.concatenate([[0.0], self.fit_times()])
        norms = np.array([oracle.dual_norm(oracle.transport_exact(state, t)) for t in times])
        self.write_csv('series.csv', ('t', 'dual_norm'), zip(times, norms))
        return times, norms, h1_initial

    def run(self):
        c = self.config
        if c['mixing.route'] == 'oracle':
            times, norms, h1_initial = self.oracle_series()
        else:
            times, norms, h1_initial = self.spectral_series()

        fit = fit_mixing_rate(times, norms, h1_initial, t_min=c['mixing.t_min'], t_max=c['mixing.t_max'])
        report = {
            'route': c['mixing.route'],
            'fit': fit.as_dict(),
            'h1_initial': h1_initial,
            'lower_bound_exponent': mixing_lower_bound_exponent(c['protocol.beta']),
        }
        log.info('mixing exponent %.4f over %s', fit.exponent, fit.window)
        self.write_json('mixing.json', report)


def random_state(rng, s_grid, weight, period, lo, hi, k_max=3):
    """ A real state with random smooth profiles in s on (lo, hi) for 1 <= k <= k_max. """
    envelope = smooth_profile(s_grid, lo, hi)
    u = (s_grid - lo) / (hi - lo)
    profiles = []
    for _ in range(k_max):
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        profiles.append(envelope * (a[0] + a[1] * u + a[2] * u ** 2))
    return oracle.from_profiles(list(range(1, k_max + 1)), s_grid, profiles, weight, period)


class EnvelopeScan(Experiment):
    """
    The optimised mixing envelope and the stationary-phase bound r(t) on a log
    grid of times, plus random trials of the correlation inequality.
    """
    name = 'envelope-scan'

    def times(self):
        c = self.config
        return np.geomspace(c['envelope.t_min'], c['envelope.t_max'], c['envelope.count'])

    def trials(self, terms):
        c = self.config
        delta, delta_prime = c['oracle.delta'], c['oracle.delta_prime']
        lo, hi = delta, math.pi / 2 - delta_prime
        s_grid = np.linspace(lo, hi, 2001)
        period, _, weight = oracle.cellular_weights(s_grid)
        rng = self.rng()

        worst = 0.0
        violations = 0
        for _ in range(c['envelope.trials']):
            state = random_state(rng, s_grid, weight, period, lo, hi)
            phi = random_state(rng, s_grid, weight, period, lo, hi)
            scale = oracle.h1g_norm(state) * oracle.h1g_norm(phi)
            for t in (10.0, 100.0, 1000.0):
                bound = scale * oracle.stationary_phase_bound(None, None, delta, delta_prime, t, terms=terms)
                value = abs(oracle.correlation(oracle.transport_exact(state, t), phi))
                worst = max(worst, value / bound)
                if value > bound:
                    violations += 1
        if violations:
            log.warning('%d correlation trials exceed r(t)', violations)
        return {'trials': c['envelope.trials'], 'worst_ratio': worst, 'violations': violations}

    def run(self):
        c = self.config
        eps, regime = c['envelope.eps'], c['envelope.regime']
        T_fn, g_fn, Tprime_fn = oracle.cellular_bound_functions()
        terms = oracle.stationary_phase_terms(T_fn, g_fn, c['oracle.delta'], c['oracle.delta_prime'], Tprime_fn)

        times = self.times()
        absorb = c['envelope.absorb_logs']
        minima = [oracle.envelope_cutoffs(t, eps, regime, absorb) for t in times]
        envelope = np.array([value for value, _, _ in minima])
        r_t = np.array([oracle.stationary_phase_bound(T_fn, g_fn, c['oracle.delta'], c['oracle.delta_prime'], t,
                                                      terms=terms) for t in times])
        self.write_csv('envelope.csv', ('t', 'envelope', 'r_t', 'delta', 'delta_prime'),
                       ((t, value, r, delta, delta_prime)
                        for t, (value, delta, delta_prime), r in zip(times, minima, r_t)))

        fit = fit_power_law(times, envelope)
        self.write_json('envelope.json', {
            'regime': regime,
            'eps': eps,
            'absorb_logs': absorb,
            'fit': fit.as_dict(),
            'predicted_exponent': oracle.envelope_exponent(eps, regime) if absorb else None,
            'minimising_terms': oracle.envelope_terms(times[-1], eps, regime, *minima[-1][1:], absorb_logs=absorb),
            'terms': terms,
            'stationary_phase': self.trials(terms),
        })
