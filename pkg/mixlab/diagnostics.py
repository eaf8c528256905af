"""
Torus norms, decay-rate fits and the dissipation-bound verification protocol.
"""
import logging
import math
from dataclasses import dataclass
from dataclasses import field as dataclass_field

import numpy as np

from .errors import FitQualityError

log = logging.getLogger(__name__)

MEAN_TOLERANCE = 1e-10


def wavenumbers(N):
    """ Integer wavenumbers (kx, ky) of an rfft2 array of an N x N grid, broadcastable. """
    kx = np.fft.fftfreq(N, 1.0 / N)[:, None]
    ky = np.fft.rfftfreq(N, 1.0 / N)[None, :]
    return kx, ky


def half_spectrum_weights(N):
    """ Multiplicity of each rfft2 column in the full spectrum. """
    weights = np.full(N // 2 + 1, 2.0)
    weights[0] = 1.0
    if N % 2 == 0:
        weights[-1] = 1.0
    return weights[None, :]


def sobolev_norm(rho, order):
    """
    Homogeneous Sobolev norm of order -1, 0 or 1 on [0, 2 pi)^2 by Parseval.

    :raises ValueError: for the H^-1 norm of a field with nonzero mean

    """
    if order not in (-1, 0, 1):
        raise ValueError('order must be -1, 0 or 1')

    N = rho.N
    coefficients = rho.coefficients
    energy = np.abs(coefficients) ** 2 * half_spectrum_weights(N)
    scale = (2 * math.pi) ** 2 / float(N) ** 4

    if order == 0:
        return math.sqrt(scale * energy.sum())

    kx, ky = wavenumbers(N)
    k2 = kx ** 2 + ky ** 2
    if order == 1:
        return math.sqrt(scale * (k2 * energy).sum())

    total = energy.sum()
    if energy[0, 0] > MEAN_TOLERANCE ** 2 * max(total, np.finfo(float).tiny):
        raise ValueError('H^-1 norm needs a mean-free field')
    k2[0, 0] = 1.0
    multiplier = 1.0 / k2
    multiplier[0, 0] = 0.0
    return math.sqrt(scale * (multiplier * energy).sum())


@dataclass
class RateEstimate:
    exponent: float
    prefactor: float
    window: tuple
    residual: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 4:
            raise FitQualityError('a rate fit needs at least 4 points, got {}'.format(self.n_points))
        if not self.window[0] < self.window[1]:
            raise FitQualityError('empty fit window {}'.format(self.window))
        if not math.isfinite(self.residual):
            raise FitQualityError('fit residual is not finite')

    def as_dict(self):
        return {
            'exponent': self.exponent,
            'prefactor': self.prefactor,
            'window': list(self.window),
            'residual': self.residual,
            'n_points': self.n_points,
        }


def fit_power_law(x, y):
    """ Least squares of log y against log x: y ~ prefactor * x^exponent. """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError('power-law fits need positive data')

    logx, logy = np.log(x), np.log(y)
    exponent, intercept = np.polyfit(logx, logy, 1)
    residual = float(np.sqrt(np.mean((logy - (exponent * logx + intercept)) ** 2)))
    return RateEstimate(
        exponent=float(exponent),
        prefactor=float(math.exp(intercept)),
        window=(float(x.min()), float(x.max())),
        residual=residual,
        n_points=int(x.size),
    )


def fit_mixing_rate(times, hminus1, h1_initial, t_min=1.0, t_max=None):
    """ Power-law exponent of ||rho(t)||_{H^-1} / ||rho_0||_{H^1} over t in [t_min, t_max]. """
    times = np.asarray(times, dtype=float)
    hminus1 = np.asarray(hminus1, dtype=float)
    if not h1_initial > 0:
        raise ValueError('initial H^1 norm must be positive')
    if np.any(hminus1 <= 0):
        raise ValueError('mix norms must be positive')

    keep = times >= max(t_min, 1.0)
    if t_max is not None:
        keep &= times <= t_max
    return fit_power_law(times[keep], hminus1[keep] / h1_initial)


def efold_time(times, l2):
    """ First time the series drops to l2[0] / e, interpolated in log l2; None if never. """
    times = np.asarray(times, dtype=float)
    logs = np.log(np.asarray(l2, dtype=float))
    target = logs[0] - 1.0
    below = np.nonzero(logs <= target)[0]
    if not below.size:
        return None
    i = below[0]
    if i == 0:
        return float(times[0])
    fraction = (logs[i - 1] - target) / (logs[i - 1] - logs[i])
    return float(times[i - 1] + fraction * (times[i] - times[i - 1]))


@dataclass
class DissipationFit:
    rows: list
    scaling: RateEstimate = None
    excluded: list = dataclass_field(default_factory=list)
    violations: list = dataclass_field(default_factory=list)

    def as_dict(self):
        return {
            'rows': self.rows,
            'scaling': self.scaling.as_dict() if self.scaling is not None else None,
            'excluded': self.excluded,
            'monotonicity_violations': self.violations,
        }


def fit_dissipation_rate(runs):
    """
    Extract lambda(nu) = 1 / (e-folding time) per run and fit lambda ~ nu^alpha.

    :param runs: iterable of (nu, times, l2) triples

    """
    rows = []
    for nu, times, l2 in sorted(runs, key=lambda run: run[0]):
        l2 = np.asarray(l2, dtype=float)
        flags = []
        t_e = efold_time(times, l2)
        if t_e is None or t_e <= 0:
            flags.append('no-decay')
        if l2.min() > l2[0] * math.exp(-2):
            flags.append('short-run')
        rows.append({
            'nu': float(nu),
            'lambda': 1.0 / t_e if t_e else None,
            'efold_time': t_e,
            'flags': flags,
        })

    included = [row for row in rows if row['lambda'] is not None]
    excluded = [row['nu'] for row in rows if row['lambda'] is None]
    if excluded:
        log.warning('runs for nu=%s never decayed by 1/e and are excluded', excluded)

    violations = []
    for before, after in zip(included, included[1:]):
        if after['lambda'] < before['lambda']:
            after['flags'].append('non-monotone')
            violations.append(after['nu'])
    if violations:
        log.warning('lambda(nu) decreases at nu=%s', violations)

    scaling = None
    if len(included) >= 4:
        scaling = fit_power_law([r['nu'] for r in included], [r['lambda'] for r in included])
    else:
        log.warning('only %d usable runs, skipping the scaling fit', len(included))

    return DissipationFit(rows=rows, scaling=scaling, excluded=excluded, violations=violations)


def mixing_lower_bound_exponent(beta):
    """ Exponent of the lower bound gamma(t) >~ t^(-2/(beta+1)) near an elliptic point. """
    return -2.0 / (beta + 1.0)


def dissipation_upper_exponent(beta):
    """ Exponent of lambda(nu) <~ nu^((1+beta)/(3+beta)) near an elliptic point. """
    return (1.0 + beta) / (3.0 + beta)


def calibrate_gap_constant(series, grad_sup):
    """
    Estimate C(Omega, H) with 2 int_0^t ||grad rho||^2 <= C^2 (1+t)^3 ||grad rho_0||_inf^2
    from the H^1 samples of a short inviscid run.
    """
    times = np.asarray(series.times, dtype=float)
    dissipation = 2 * np.concatenate([[0.0], np.cumsum(
        0.5 * (series.h1[1:] ** 2 + series.h1[:-1] ** 2) * np.diff(times))])
    ratio = dissipation / ((1 + times) ** 3 * grad_sup ** 2)
    return float(math.sqrt(ratio.max()))


def verify_thm_main_protocol(field, annulus, nu_list, N=128, rho0=None, calibration_time=2.0,
                             threshold=0.4, time_exponent=1.0 / 3.0, workers=1):
    """
    Check the dissipation upper bound chain at t = eps0 nu^(-time_exponent).

    For every nu the report holds the measured ||rho^nu(t)|| / ||rho_0||, the
    viscosity gap, the loss ||rho_0|| - ||rho^nu(t)|| (bounded by the square
    root of the gap) and the calibrated envelope C^2 nu (1+t)^3 ||grad rho_0||^2.

    """
    from . import spectral
    from .pool import map_ordered

    if rho0 is None:
        rho0 = spectral.annulus_bump(field, annulus, N)
    l2_0 = sobolev_norm(rho0, 0)
    grad_sup = spectral.gradient_sup(rho0)

    calibration = spectral.solve(rho0, field, 0.0, calibration_time,
                                 np.linspace(0.0, calibration_time, 9))
    constant = calibrate_gap_constant(calibration, grad_sup)
    eps0 = 0.5 * (l2_0 / (constant * grad_sup)) ** (2.0 / 3.0)
    log.info('calibrated C=%.4g, eps0=%.4g', constant, eps0)

    rows = [{'nu': None, 't': 0.0, 'l2_ratio': 1.0, 'gap': 0.0, 'loss': 0.0, 'bound': 0.0,
             'consistent': True, 'flags': []}]
    jobs = [(rho0, field.rebuild_args(), annulus, float(nu), eps0 * float(nu) ** (-time_exponent))
            for nu in nu_list]
    for (_, _, _, nu, t_star), gap in zip(jobs, map_ordered(_protocol_job, jobs, workers)):
        ratio = gap.viscous_l2[-1] / l2_0
        loss = l2_0 - gap.viscous_l2[-1]
        bound = constant ** 2 * nu * (1 + t_star) ** 3 * grad_sup ** 2
        flags = [] if gap.support_ok else ['support']
        if ratio < 0.5 or gap.gaps[-1] > bound:
            flags.append('preasymptotic')
        consistent = bool(ratio >= threshold and loss <= math.sqrt(gap.gaps[-1]) * (1 + 1e-6) + 1e-12)
        if not consistent:
            log.warning('protocol inconsistent at nu=%g: ratio %.3f', nu, ratio)
        rows.append({'nu': nu, 't': t_star, 'l2_ratio': ratio, 'gap': float(gap.gaps[-1]), 'loss': loss,
                     'bound': bound, 'consistent': consistent, 'flags': flags})

    return {
        'constant': constant,
        'eps0': eps0,
        'time_exponent': time_exponent,
        'threshold': threshold,
        'l2_initial': l2_0,
        'grad_sup': grad_sup,
        'rows': rows,
    }


def _protocol_job(job):
    from . import spectral
    from .field import make_field

    rho0, field_args, annulus, nu, t_star = job
    return spectral.viscosity_gap(rho0, make_field(*field_args), nu, [0.0, t_star], annulus=annulus)
