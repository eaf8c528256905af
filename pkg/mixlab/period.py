"""
The cellular period function T(h) = 4 K(sqrt(1 - h^2)) and its derivative.

Three independent routes are kept side by side: the arithmetic-geometric
mean (production), singular-endpoint quadrature (oracle) and the orbit return
map from :mod:`mixlab.lagrangian`.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.integrate import quad

from . import lagrangian
from .errors import FitQualityError

log = logging.getLogger(__name__)

AGM_TOLERANCE = 4 * np.finfo(float).eps
AGM_MAX_ITERATIONS = 64
QUAD_EPSREL = 1e-13


def agm(a, b):
    """ Arithmetic-geometric mean, elementwise over arrays. """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for _ in range(AGM_MAX_ITERATIONS):
        if np.all(np.abs(a - b) <= AGM_TOLERANCE * np.abs(a)):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def _period_agm(h):
    return 2 * math.pi / agm(1.0, h)


def period_agm(h):
    """ T(h) = 2 pi / AGM(1, h); accepts scalars or arrays with 0 < h <= 1. """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0) or np.any(h > 1):
        raise ValueError('level must lie in (0, 1]')
    value = _period_agm(h)
    return float(value) if value.ndim == 0 else value


def _panels(h):
    """ Geometric panel edges in v = pi/2 - u, refined towards the peak at v = 0. """
    edges = [0.0]
    edge = h
    while edge < math.pi / 2:
        edges.append(edge)
        edge *= 10
    edges.append(math.pi / 2)
    return zip(edges[:-1], edges[1:])


def _singular_integral(integrand, h):
    return sum(quad(integrand, a, b, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)[0] for a, b in _panels(h))


def _check_open_level(h):
    if not 0 < h < 1:
        raise ValueError('level must lie in (0, 1)')


def period_quadrature(h):
    """
    T(h) = 4 int_0^1 (1 - x^2)^(-1/2) (1 - (1 - h^2) x^2)^(-1/2) dx.

    With x = sin u and v = pi/2 - u the integrand becomes
    1 / hypot(sin v, h cos v), smooth but peaked on the scale h at v = 0.

    """
    _check_open_level(h)
    return 4 * _singular_integral(lambda v: 1.0 / math.hypot(math.sin(v), h * math.cos(v)), h)


def period_derivative(h):
    """ T'(h) from -T'(h) = 4 int_0^1 (1-x^2)^(-1/2) h x^2 (1-(1-h^2)x^2)^(-3/2) dx. """
    _check_open_level(h)

    def integrand(v):
        c = math.cos(v)
        return h * c * c / math.hypot(math.sin(v), h * c) ** 3

    return -4 * _singular_integral(integrand, h)


def period_derivative_elliptic(h):
    """
    T'(h) = -4 (E(m) - h^2 K(m)) / (m h) with m = 1 - h^2.

    Vectorised closed form used wherever T' is needed on fine grids.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0) or np.any(h >= 1):
        raise ValueError('level must lie in (0, 1)')
    m = (1 - h) * (1 + h)
    value = -4 * (special.ellipe(m) - h * h * special.ellipk(m)) / (m * h)
    return float(value) if value.ndim == 0 else value


def second_difference_bound(levels, relative_step=1e-3):
    """ Return h^2 |T''(h)| from central second differences of the AGM period. """
    levels = np.asarray(levels, dtype=float)
    step = relative_step * levels
    second = (_period_agm(levels + step) - 2 * _period_agm(levels) + _period_agm(levels - step)) / step ** 2
    return levels ** 2 * np.abs(second)


@dataclass
class PeriodTable:
    levels: np.ndarray
    T: np.ndarray
    Tprime: np.ndarray
    methods: list

    def __post_init__(self):
        if not (len(self.levels) == len(self.T) == len(self.Tprime) == len(self.methods)):
            raise ValueError('period table columns differ in length')

    def rows(self):
        return zip(self.levels, self.T, self.Tprime, self.methods)

    def is_decreasing(self):
        order = np.argsort(self.levels)
        return bool(np.all(np.diff(self.T[order]) < 0))

    def estimate_constant(self):
        """
        Smallest C with T <= C (1 + ln 1/h), h |T'| <= C and -h T' >= 1/C over
        the table.
        """
        h = self.levels
        return float(max(
            np.max(self.T / (1 + np.log(1 / h))),
            np.max(h * np.abs(self.Tprime)),
            np.max(1 / (-h * self.Tprime)),
        ))


def _table_entry(job):
    h, method, field_name = job
    if method == 'agm':
        value = period_agm(h)
    elif method == 'quadrature':
        value = period_quadrature(h)
    else:
        from .field import make_field
        value = lagrangian.return_period(make_field(field_name), h).period
    return value, period_derivative(h)


def build_period_table(levels, method='agm', workers=1):
    """ Tabulate T and T' (quadrature route) of the cellular flow on *levels*. """
    from .pool import map_ordered

    if method not in ('agm', 'quadrature', 'return-map'):
        raise ValueError('unknown period method {}'.format(method))
    levels = np.asarray(levels, dtype=float)
    entries = map_ordered(_table_entry, [(float(h), method, 'cellular') for h in levels], workers)
    return PeriodTable(
        levels=levels,
        T=np.array([e[0] for e in entries]),
        Tprime=np.array([e[1] for e in entries]),
        methods=[method] * len(levels),
    )


@dataclass
class BetaEstimate:
    beta: float
    residual: float
    degenerate: bool
    radii: np.ndarray
    periods: np.ndarray
    slopes: np.ndarray


def beta_exponent(field, r_grid, direction=(1.0, 0.0), max_time=500.0, degenerate_ratio=1e-6):
    """
    Fit |T'(r)| ~ r^beta for orbits through center + r e along *direction*.

    An isochronous center (T' indistinguishable from zero) is reported as
    degenerate with beta = nan.

    :raises FitQualityError: when T' changes sign over the grid

    """
    from .diagnostics import fit_power_law

    radii = np.sort(np.asarray(r_grid, dtype=float))
    if radii.size < 4 or radii[0] <= 0:
        raise ValueError('need at least four positive radii')

    e = np.asarray(direction, dtype=float) / np.hypot(*direction)
    periods = np.array([
        lagrangian.orbit_return_time(field, field.center + r * e, max_time=max_time)[0] for r in radii
    ])
    slopes = np.gradient(periods, radii, edge_order=2)

    if np.max(np.abs(slopes) * radii) <= degenerate_ratio * np.mean(periods):
        log.info('%s is isochronous on the probed radii', field.name)
        return BetaEstimate(math.nan, math.nan, True, radii, periods, slopes)
    if not (np.all(slopes > 0) or np.all(slopes < 0)):
        raise FitQualityError('T\'(r) changes sign on the probed radii')

    fit = fit_power_law(radii, np.abs(slopes))
    return BetaEstimate(fit.exponent, fit.residual, False, radii, periods, slopes)
