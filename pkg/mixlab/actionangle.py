"""
Action-angle charts Phi(theta, h) = X(theta T(h), x(h)) of an invariant annulus.

``x(h)`` is a curve transversal to the level sets, parametrised by the level
itself. The cellular chart instead starts every orbit at (pi/2, I) and is
parametrised by I, with level sin I.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.integrate import solve_ivp
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize_scalar

from . import lagrangian
from .errors import OutsideChartError
from .errors import StallError
from .pool import map_ordered

log = logging.getLogger(__name__)

STEP = 1e-5
RESIDUAL_BUDGET = 1e-9


@dataclass
class TransversalCurve:
    levels: np.ndarray
    points: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        if len(self.levels) != len(self.points):
            raise ValueError('levels and points differ in length')


def _transversal_rhs(field):
    def rhs(h, x):
        grad = field.grad_H(x)
        return grad / np.dot(grad, grad)
    return rhs


def build_transversal(field, h0, h1, x0, n, c0=None, tol=1e-12):
    """
    Integrate x'(h) = grad H / |grad H|^2 from x0 (on {H = h0}) to level h1 and
    sample it at n equally spaced levels.

    :param c0: speed floor of the annulus; the integration stalls when
        |grad H| drops below c0 / 2
    :raises StallError: when the curve leaves the annulus

    """
    x0 = np.asarray(x0, dtype=float)
    if abs(float(field.H(x0)) - h0) > RESIDUAL_BUDGET:
        raise ValueError('x0 is not on the level {}'.format(h0))
    if n < 1:
        raise ValueError('value too small (must be >= 1)')

    if n == 1 or h0 == h1:
        return TransversalCurve(np.array([h0]), x0[None, :], np.array([abs(float(field.H(x0)) - h0)]))

    events = None
    if c0 is not None:
        def stall(h, x):
            return field.speed(x) - 0.5 * c0
        stall.terminal = True
        events = stall

    levels = np.linspace(h0, h1, n)
    solution = solve_ivp(_transversal_rhs(field), (h0, h1), x0, method=lagrangian.METHOD,
                         rtol=tol, atol=tol, t_eval=levels, events=events)
    if solution.status < 0:
        raise StallError('transversal from {} stalled: {}'.format(x0.tolist(), solution.message))
    if solution.status == 1:
        raise StallError('transversal left the annulus at h={:.6g}'.format(solution.t_events[0][0]))

    points = solution.y.T
    residuals = np.abs(field.H(solution.y) - levels)
    if residuals.max() > RESIDUAL_BUDGET:
        log.warning('transversal residual %.3g above %.1g', residuals.max(), RESIDUAL_BUDGET)
    return TransversalCurve(levels, points, residuals)


def transversal_point(field, x, h, target, tol=1e-12):
    """ Follow the transversal from x (level h) to the level target. """
    if target == h:
        return np.asarray(x, dtype=float)
    return build_transversal(field, h, target, x, 2, tol=tol).points[-1]


@dataclass
class ActionAngleChart:
    """
    Tables of Phi on a uniform theta grid in [0, 1) times a level grid.

    ``positions`` has shape (levels, thetas, 2); ``dtheta`` and ``dlevel``
    are the centered-difference partial derivatives, ``jacobians`` their
    determinant. ``level_grid`` holds h for the standard chart and I for the
    cellular one; ``h_values`` always holds the H-levels.
    """
    field_name: str
    variant: str
    theta_grid: np.ndarray
    level_grid: np.ndarray
    h_values: np.ndarray
    positions: np.ndarray
    periods: np.ndarray
    dtheta: np.ndarray
    dlevel: np.ndarray
    jacobians: np.ndarray
    wraps: bool = False
    cell: tuple = (0, 0)
    tolerance: float = 1e-12

    def __post_init__(self):
        if self.variant not in ('standard', 'cellular'):
            raise ValueError('unknown chart variant {}'.format(self.variant))
        self._interpolator = None

    @property
    def expected_jacobians(self):
        if self.variant == 'cellular':
            return self.periods * np.cos(self.level_grid)
        return self.periods

    def jacobian_error(self):
        """ max | |det D Phi| - expected | / expected over all nodes. """
        expected = self.expected_jacobians[:, None]
        return float(np.max(np.abs(np.abs(self.jacobians) - expected) / expected))

    def _closing_offset(self):
        if not self.wraps:
            return np.zeros((len(self.level_grid), 2))
        drift = self.positions[:, -1] - self.positions[:, 0]
        return 2 * math.pi * np.round(drift / (2 * math.pi))

    def interpolate(self, theta, level):
        """ Bilinear interpolation of Phi, periodic in theta. """
        if self._interpolator is None:
            closed = self.positions[:, :1] + self._closing_offset()[:, None, :]
            table = np.concatenate([self.positions, closed], axis=1)
            thetas = np.append(self.theta_grid, 1.0)
            self._interpolator = RegularGridInterpolator((self.level_grid, thetas), table)

        theta = np.mod(np.asarray(theta, dtype=float), 1.0)
        level = np.asarray(level, dtype=float)
        theta, level = np.broadcast_arrays(theta, level)
        try:
            values = self._interpolator(np.stack([level.ravel(), theta.ravel()], axis=-1))
        except ValueError:
            raise OutsideChartError('level outside [{}, {}]'.format(self.level_grid[0], self.level_grid[-1]))
        return values.T.reshape((2,) + theta.shape)

    def resolution(self):
        """ Largest distance between neighbouring nodes. """
        along = np.hypot(*np.moveaxis(np.diff(self.positions, axis=1), -1, 0))
        across = np.hypot(*np.moveaxis(np.diff(self.positions, axis=0), -1, 0))
        return float(max(along.max(), across.max() if across.size else 0.0))

    def lipschitz(self):
        """ max over nodes of the operator norm of D Phi. """
        matrix = np.stack([self.dtheta, self.dlevel], axis=-1)
        return float(np.max(np.linalg.norm(matrix, ord=2, axis=(-2, -1))))

    def derivative_bounds(self):
        """
        Ratios max |d_theta Phi| / ((1 + |ln I|)(pi/2 - I)) and max I |d_I Phi|
        of the cellular chart.
        """
        if self.variant != 'cellular':
            raise ValueError('derivative bounds are defined for the cellular chart')
        I = self.level_grid[:, None]
        dtheta = np.hypot(self.dtheta[..., 0], self.dtheta[..., 1])
        dlevel = np.hypot(self.dlevel[..., 0], self.dlevel[..., 1])
        return {
            'theta_ratio': float(np.max(dtheta / ((1 + np.abs(np.log(I))) * (math.pi / 2 - I)))),
            'level_ratio': float(np.max(I * dlevel)),
        }

    def area(self):
        """ int |det D Phi| dtheta dlevel, periodic trapezoid in theta. """
        return float(trapezoid(np.abs(self.jacobians).mean(axis=1), self.level_grid))

    def rows(self):
        for i, level in enumerate(self.level_grid):
            for j, theta in enumerate(self.theta_grid):
                x1, x2 = self.positions[i, j]
                yield theta, level, x1, x2, self.jacobians[i, j]

    def header(self):
        return {
            'field': self.field_name,
            'variant': self.variant,
            'n_theta': len(self.theta_grid),
            'n_levels': len(self.level_grid),
            'level_range': [float(self.level_grid[0]), float(self.level_grid[-1])],
            'tolerance': self.tolerance,
            'jacobian_error': self.jacobian_error(),
            'resolution': self.resolution(),
            'lipschitz': self.lipschitz(),
        }


def _chart_row(job):
    """ One level of a chart: positions and centered differences in theta and level. """
    from .field import make_field

    field_args, base, minus, plus, step, n_theta, tol, max_time = job
    field = make_field(*field_args)
    thetas = np.arange(n_theta) / float(n_theta)

    def orbit(x0):
        period, _ = lagrangian.orbit_return_time(field, x0, max_time=max_time, tol=tol)
        return period, lagrangian.orbit_solution(field, x0, period, tol=tol)

    period, solution = orbit(base)
    period_minus, solution_minus = orbit(minus)
    period_plus, solution_plus = orbit(plus)

    positions = solution(thetas * period)
    forward = solution(np.mod(thetas + STEP, 1.0) * period)
    backward = solution(np.mod(thetas - STEP, 1.0) * period)
    dtheta = lagrangian.wrapped_difference(field, forward - backward) / (2 * STEP)
    dlevel = lagrangian.wrapped_difference(
        field, solution_plus(thetas * period_plus) - solution_minus(thetas * period_minus)) / (2 * step)
    jacobian = dtheta[0] * dlevel[1] - dtheta[1] * dlevel[0]
    return period, positions.T, dtheta.T, dlevel.T, jacobian


def _assemble(field, variant, thetas, level_grid, h_values, rows, tol):
    return ActionAngleChart(
        field_name=field.name,
        variant=variant,
        theta_grid=thetas,
        level_grid=np.asarray(level_grid, dtype=float),
        h_values=np.asarray(h_values, dtype=float),
        positions=np.array([row[1] for row in rows]),
        periods=np.array([row[0] for row in rows]),
        dtheta=np.array([row[2] for row in rows]),
        dlevel=np.array([row[3] for row in rows]),
        jacobians=np.array([row[4] for row in rows]),
        wraps=field.wraps,
        cell=field.cell_of(rows[0][1][0]) if rows else (0, 0),
        tolerance=tol,
    )


def build_chart(field, curve, n_theta, tol=1e-12, max_time=500.0, workers=1):
    """ Chart Phi over the levels of a transversal curve. """
    if n_theta < 2:
        raise ValueError('value too small (must be >= 2)')

    jobs = []
    for h, x in zip(curve.levels, curve.points):
        minus = transversal_point(field, x, h, h - STEP, tol)
        plus = transversal_point(field, x, h, h + STEP, tol)
        jobs.append((field.rebuild_args(), x, minus, plus, STEP, n_theta, tol, max_time))
    rows = map_ordered(_chart_row, jobs, workers)

    thetas = np.arange(n_theta) / float(n_theta)
    return _assemble(field, 'standard', thetas, curve.levels, curve.levels, rows, tol)


def build_cellular_chart(field, I_grid, n_theta, tol=1e-12, max_time=500.0, workers=1):
    """ Chart Phi~(theta, I) = X(theta T(sin I), (pi/2, I)) of the cellular flow. """
    I_grid = np.asarray(I_grid, dtype=float)
    if np.any(I_grid - STEP <= 0) or np.any(I_grid + STEP >= math.pi / 2):
        raise ValueError('I must lie inside (0, pi/2)')
    if n_theta < 2:
        raise ValueError('value too small (must be >= 2)')

    jobs = [
        (field.rebuild_args(), np.array([math.pi / 2, I]), np.array([math.pi / 2, I - STEP]),
         np.array([math.pi / 2, I + STEP]), STEP, n_theta, tol, max_time)
        for I in I_grid
    ]
    rows = map_ordered(_chart_row, jobs, workers)

    thetas = np.arange(n_theta) / float(n_theta)
    return _assemble(field, 'cellular', thetas, I_grid, np.sin(I_grid), rows, tol)


def base_point(field, chart, h):
    if chart.variant == 'cellular':
        return np.array([math.pi / 2, math.asin(h)])
    i = int(np.argmin(np.abs(chart.h_values - h)))
    return transversal_point(field, chart.positions[i, 0], chart.h_values[i], h, chart.tolerance)


def angle_of_point(chart, field, x, max_time=500.0, exact=False):
    """
    Invert the chart: return (theta, level) with Phi(theta, level) = x.

    The level is H(x) (sin^-1 H(x) for the cellular chart). theta is seeded
    at the nearest of the n_theta nodes of Phi(., level) and refined by
    bounded Brent minimisation of the squared distance to the interpolated
    Phi(., level); the result is accurate to the chart resolution. With
    *exact* the refinement runs on the orbit through the base point of the
    level instead, to integrator accuracy.

    :raises OutsideChartError: if x is not in the chart's annulus

    """
    x = np.asarray(x, dtype=float)
    if field.cell_of(x) != tuple(chart.cell):
        raise OutsideChartError('{} lies outside the chart cell {}'.format(x.tolist(), chart.cell))
    _, h = field.cell_level(x)
    lo, hi = chart.h_values.min(), chart.h_values.max()
    if not lo <= h <= hi:
        raise OutsideChartError('level {:.6g} outside the chart range [{:.6g}, {:.6g}]'.format(h, lo, hi))
    level = math.asin(h) if chart.variant == 'cellular' else h

    if exact:
        base = base_point(field, chart, h)
        period, _ = lagrangian.orbit_return_time(field, base, max_time=max_time, tol=chart.tolerance)
        solution = lagrangian.orbit_solution(field, base, period, tol=chart.tolerance)

        def phi(theta):
            return solution(np.mod(theta, 1.0) * period)
    else:
        node_level = min(max(level, chart.level_grid[0]), chart.level_grid[-1])

        def phi(theta):
            return chart.interpolate(theta, node_level)

    def distance2(theta):
        diff = lagrangian.wrapped_difference(field, phi(theta) - x)
        return float(np.dot(diff, diff))

    n = len(chart.theta_grid)
    gaps = lagrangian.wrapped_difference(field, phi(chart.theta_grid) - x[:, None])
    # argmin keeps the first of equal distances, so ties go to the smaller theta
    seed = chart.theta_grid[int(np.argmin(np.hypot(*gaps)))]
    result = minimize_scalar(distance2, bounds=(seed - 1.0 / n, seed + 1.0 / n), method='bounded',
                             options={'xatol': 1e-12})

    theta = float(np.mod(result.x, 1.0))
    if theta >= 1.0:
        theta = 0.0
    return theta, level


def annulus_area(period_fn, h0, h1):
    """ Area of {h0 <= H <= h1} by the coarea formula int T(h) dh. """
    return quad(period_fn, h0, h1, epsrel=1e-12)[0]
