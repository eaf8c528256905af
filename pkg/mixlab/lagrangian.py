"""
Lagrangian orbits of b: integration, return periods and flow-gradient probes.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoReturnError
from .errors import StallError

log = logging.getLogger(__name__)

METHOD = 'DOP853'
CRITICAL_SPEED = 1e-14


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    h_drift: float

    def __post_init__(self):
        if len(self.times) != len(self.points):
            raise ValueError('times and points differ in length')
        if np.any(np.diff(self.times) <= 0):
            raise ValueError('trajectory times must be strictly increasing')

    def rows(self, field):
        h0 = field.H(self.points[0])
        drift = np.abs(field.H(self.points.T) - h0)
        for t, (x1, x2), d in zip(self.times, self.points, drift):
            yield t, x1, x2, d


@dataclass
class OrbitPeriod:
    h: float
    period: float
    method: str
    residual: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError('period must be positive')


def _rhs(field, sign=1.0):
    def rhs(t, y):
        return sign * field.velocity(y)
    return rhs


def wrapped_difference(field, diff):
    if field.domain == 'torus':
        return np.mod(diff + math.pi, 2 * math.pi) - math.pi
    return diff


def integrate_orbit(field, x0, t_end, tol=1e-10, t_eval=None, backward=False, drift_budget=1e-9):
    """
    Integrate dX/dt = b(X) (or -b with *backward*) from x0 over [0, t_end].

    :param t_eval: optional sample times; the solver's own steps otherwise
    :raises StallError: when the step size collapses

    """
    if not t_end > 0:
        raise ValueError('t_end must be positive')

    x0 = np.asarray(x0, dtype=float)
    solution = solve_ivp(
        _rhs(field, -1.0 if backward else 1.0),
        (0.0, t_end),
        x0,
        method=METHOD,
        rtol=tol,
        atol=tol,
        t_eval=t_eval,
    )
    if solution.status < 0:
        raise StallError('orbit from {} stalled: {}'.format(x0.tolist(), solution.message))

    drift = float(np.max(np.abs(field.H(solution.y) - field.H(x0)))) if solution.t.size else 0.0
    if drift > drift_budget * max(t_end, 1.0):
        log.warning('H drift %.3g over t=%g exceeds the budget %.3g per unit time', drift, t_end, drift_budget)

    return Trajectory(times=solution.t, points=solution.y.T, h_drift=drift)


def orbit_solution(field, x0, t_end, tol=1e-12):
    """ Return the dense-output interpolant of the orbit through x0 on [0, t_end]. """
    solution = solve_ivp(_rhs(field), (0.0, t_end), np.asarray(x0, dtype=float), method=METHOD,
                         rtol=tol, atol=tol, dense_output=True)
    if solution.status < 0:
        raise StallError(solution.message)
    return solution.sol


def orbit_return_time(field, x0, max_time=500.0, tol=1e-12, lead=1e-3):
    """
    Return (period, residual) of the orbit through x0.

    The orbit is first moved off the section through x0 for a short *lead*
    time; the period is then the first crossing of the section in the launch
    direction, located on the dense output.

    """
    x0 = np.asarray(x0, dtype=float)
    if field.speed(x0) < CRITICAL_SPEED:
        raise StallError('{} is a critical point of {}'.format(x0.tolist(), field.name))

    section = field.section_function(x0)
    first = solve_ivp(_rhs(field), (0.0, lead), x0, method=METHOD, rtol=tol, atol=tol)
    if first.status < 0:
        raise StallError(first.message)
    start = first.y[:, -1]
    # the shifted section of a wrapping orbit is only reached from below
    direction = 1.0 if field.wraps else np.sign(section(start))
    if direction == 0:
        raise StallError('orbit from {} does not leave its section'.format(x0.tolist()))

    def crossing(t, y):
        return section(y)
    crossing.terminal = True
    crossing.direction = direction

    solution = solve_ivp(_rhs(field), (lead, max_time), start, method=METHOD, rtol=tol, atol=tol,
                         events=crossing)
    if solution.status < 0:
        raise StallError(solution.message)
    if not solution.t_events[0].size:
        raise NoReturnError('orbit from {} did not return within t={}'.format(x0.tolist(), max_time))

    period = float(solution.t_events[0][0])
    residual = float(np.hypot(*wrapped_difference(field, solution.y_events[0][0] - x0)))
    return period, residual


def return_period(field, h, max_time=500.0, tol=1e-12, launch=None):
    """ Measure T(h) by the first return of the orbit to its section. """
    if field.level_guard is not None:
        lo, hi = field.level_guard
        if not lo <= h <= hi:
            raise ValueError('level {} outside [{}, {}] (separatrix or critical value)'.format(h, lo, hi))

    x0 = field.section_point(h) if launch is None else np.asarray(launch, dtype=float)
    period, residual = orbit_return_time(field, x0, max_time=max_time, tol=tol)
    return OrbitPeriod(h=h, period=period, method='return-map', residual=residual)


def growth_curve(field, r, times, delta, tol=1e-12, direction=(1.0, 0.0)):
    """
    Return |X(t, c + r e) - X(t, c + (r + delta) e)| / delta for each t in
    *times*, c being the field's elliptic point.
    """
    if delta < 10 * tol:
        raise ValueError('separation {} below 10 * tolerance'.format(delta))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError('times must be non-negative')

    e = np.asarray(direction, dtype=float) / np.hypot(*direction)
    start = field.center + r * e
    shifted = field.center + (r + delta) * e
    if field.speed(start) < CRITICAL_SPEED:
        raise StallError('probe starts on a critical point')

    amplification = np.ones_like(times)
    positive = times > 0
    if np.any(positive):
        t_eval = np.unique(times[positive])
        a = integrate_orbit(field, start, t_eval[-1], tol=tol, t_eval=t_eval).points
        b = integrate_orbit(field, shifted, t_eval[-1], tol=tol, t_eval=t_eval).points
        separation = np.hypot(*wrapped_difference(field, (a - b).T)) / delta
        amplification[positive] = separation[np.searchsorted(t_eval, times[positive])]
    return amplification


def gradient_growth_probe(field, r, t, delta, tol=1e-12):
    return float(growth_curve(field, r, [t], delta, tol=tol)[0])


def fit_linear_growth(times, amplification):
    """ Least-squares line through the probe data; returns (slope, intercept, rms residual). """
    times = np.asarray(times, dtype=float)
    amplification = np.asarray(amplification, dtype=float)
    slope, intercept = np.polyfit(times, amplification, 1)
    residual = float(np.sqrt(np.mean((amplification - (slope * times + intercept)) ** 2)))
    return float(slope), float(intercept), residual
