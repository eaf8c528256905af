"""
Exact transport in action-angle variables and the stationary-phase bound.

A state is f(theta, s) = sum_k f_k(s) exp(2 pi i k theta) with theta in
[0, 1); under the flow every mode turns with the orbit period,
f_k(t, s) = f_k(0, s) exp(-2 pi i k t / T(s)). Integrals over the angle are
taken in vartheta = 2 pi theta, so int dvartheta = 2 pi.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .period import period_agm
from .period import period_derivative_elliptic

log = logging.getLogger(__name__)

REALITY_TOLERANCE = 1e-12
ENVELOPE_REGIMES = ('interior', 'elliptic', 'global')


@dataclass
class AngleModeField:
    k_list: np.ndarray
    s_grid: np.ndarray
    coefficients: np.ndarray
    weight: np.ndarray
    period: np.ndarray
    time: float = 0.0
    mean_free: bool = False

    def __post_init__(self):
        self.k_list = np.asarray(self.k_list, dtype=int)
        self.s_grid = np.asarray(self.s_grid, dtype=float)
        self.coefficients = np.array(self.coefficients, dtype=complex)
        self.weight = np.asarray(self.weight, dtype=float)
        self.period = np.asarray(self.period, dtype=float)

        if self.coefficients.shape != (len(self.k_list), len(self.s_grid)):
            raise ValueError('coefficients must have shape (len(k_list), len(s_grid))')
        if np.any(np.diff(self.s_grid) <= 0):
            raise ValueError('s_grid must be increasing')
        if np.any(self.weight <= 0):
            raise ValueError('weight must be positive')
        if np.any(self.period <= 0):
            raise ValueError('period must be positive')

        index = {k: i for i, k in enumerate(self.k_list)}
        if len(index) != len(self.k_list):
            raise ValueError('repeated wavenumbers')
        scale = max(float(np.max(np.abs(self.coefficients), initial=0.0)), 1.0)
        for k, i in index.items():
            if k == 0:
                continue
            if -k not in index:
                raise ValueError('wavenumber {} has no partner {}'.format(k, -k))
            mismatch = np.abs(self.coefficients[index[-k]] - np.conj(self.coefficients[i]))
            if np.max(mismatch) > REALITY_TOLERANCE * scale:
                raise ValueError('modes {} and {} are not conjugate'.format(k, -k))
        if self.mean_free and 0 in index:
            self.coefficients[index[0]] = 0.0

    def copy(self, coefficients=None, time=None):
        return AngleModeField(
            self.k_list, self.s_grid,
            self.coefficients if coefficients is None else coefficients,
            self.weight, self.period,
            self.time if time is None else time,
            self.mean_free,
        )

    def values(self, thetas):
        """ f(theta, s) on a theta grid; shape (len(s_grid), len(thetas)). """
        thetas = np.asarray(thetas, dtype=float)
        phases = np.exp(2j * math.pi * np.outer(self.k_list, thetas))
        return np.real(self.coefficients.T @ phases)

    def rows(self):
        for k, row in zip(self.k_list, self.coefficients):
            for s, value in zip(self.s_grid, row):
                yield int(k), s, value.real, value.imag

    def header(self):
        return {
            'k_list': [int(k) for k in self.k_list],
            'n_s': len(self.s_grid),
            's_range': [float(self.s_grid[0]), float(self.s_grid[-1])],
            'time': self.time,
            'mean_free': self.mean_free,
        }


def from_profiles(k_list, s_grid, profiles, weight, period, mean_free=True):
    """
    Build a real state from profiles of the non-negative wavenumbers; the
    negative partners are filled in by conjugation.
    """
    modes, rows = [], []
    for k, profile in zip(k_list, profiles):
        if k < 0:
            raise ValueError('give profiles for k >= 0 only')
        modes.append(k)
        rows.append(np.asarray(profile, dtype=complex))
        if k > 0:
            modes.append(-k)
            rows.append(np.conj(np.asarray(profile, dtype=complex)))
    return AngleModeField(modes, s_grid, np.array(rows), weight, period, mean_free=mean_free)


def cellular_weights(s_grid):
    """ T~(s) = T(sin s), T~'(s) = T'(sin s) cos s and g(s) = T~(s) cos s. """
    s = np.asarray(s_grid, dtype=float)
    if np.any(s <= 0) or np.any(s >= math.pi / 2):
        raise ValueError('s must lie in (0, pi/2)')
    period = period_agm(np.sin(s))
    slope = period_derivative_elliptic(np.sin(s)) * np.cos(s)
    return period, slope, period * np.cos(s)


def transport_exact(state, t):
    """ Rotate every mode by its own angle: no time step, no stability limit. """
    phase = np.exp(-2j * math.pi * np.outer(state.k_list, 1.0 / state.period) * t)
    return state.copy(state.coefficients * phase, state.time + t)


def h1g_norm(state, squared=False):
    """
    ||f||_{H^1_g} with ||f||^2 = int int (|f|^2 + |d_s f|^2) g ds dvartheta,
    trapezoid in s and central differences for d_s f.
    """
    f = state.coefficients
    if len(state.s_grid) > 2:
        derivative = np.gradient(f, state.s_grid, axis=1, edge_order=2)
    else:
        derivative = np.gradient(f, state.s_grid, axis=1)
    density = (np.abs(f) ** 2 + np.abs(derivative) ** 2).sum(axis=0) * state.weight
    value = 2 * math.pi * trapezoid(density, state.s_grid)
    return float(value) if squared else math.sqrt(value)


def correlation(state, phi):
    """ int int f phi g ds dvartheta for two states on the same grids. """
    if not np.array_equal(state.s_grid, phi.s_grid):
        raise ValueError('states live on different s grids')
    lookup = {int(k): i for i, k in enumerate(phi.k_list)}
    total = np.zeros(len(state.s_grid), dtype=complex)
    for k, row in zip(state.k_list, state.coefficients):
        if int(k) in lookup:
            total += row * np.conj(phi.coefficients[lookup[int(k)]])
    return float(2 * math.pi * trapezoid(np.real(total) * state.weight, state.s_grid))


def _h1g_banded(s_grid, weight):
    """ Tridiagonal matrix of the discrete H^1_g inner product, banded storage. """
    ds = np.diff(s_grid)
    nodes = np.zeros(len(s_grid))
    nodes[:-1] += 0.5 * ds
    nodes[1:] += 0.5 * ds
    mass = nodes * weight
    stiffness = 0.5 * (weight[1:] + weight[:-1]) / ds

    banded = np.zeros((3, len(s_grid)))
    banded[1] = mass
    banded[1, :-1] += stiffness
    banded[1, 1:] += stiffness
    banded[0, 1:] = -stiffness
    banded[2, :-1] = -stiffness
    return banded, mass


def dual_norm(state):
    """
    Norm of f in the dual of H^1_g, sup over ||phi||_{H^1_g} <= 1 of the
    correlation; per mode one tridiagonal Riesz solve.
    """
    banded, mass = _h1g_banded(state.s_grid, state.weight)
    rhs = (mass[:, None] * state.coefficients.T)
    riesz = solve_banded((1, 1), banded, rhs)
    value = 2 * math.pi * float(np.real(np.sum(np.conj(rhs) * riesz)))
    return math.sqrt(max(value, 0.0))


def _check_margins(delta, delta_prime):
    for name, value in (('delta', delta), ('delta_prime', delta_prime)):
        if not 0 < value < 0.25:
            raise ValueError('{} must lie in (0, 1/4)'.format(name))


def stationary_phase_terms(T_fn, g_fn, delta, delta_prime, Tprime_fn=None, upper=math.pi / 2, n_grid=4001):
    """
    The t-independent pieces of r(t) on (delta, upper - delta'): the squared
    L^2 norm of g^(-1/2), both boundary values of T^2 g / |T'|, the L^1 norm
    of (T^2 g / T')' and the L^2 norm of T^2 g^(1/2) / T'.
    """
    _check_margins(delta, delta_prime)
    lo, hi = delta, upper - delta_prime

    if Tprime_fn is None:
        def Tprime_fn(s):
            step = 1e-6 * max(1.0, abs(s))
            return (T_fn(s + step) - T_fn(s - step)) / (2 * step)

    def ratio(s):
        return T_fn(s) ** 2 * g_fn(s) / Tprime_fn(s)

    grid = np.linspace(lo, hi, n_grid)
    ratios = np.array([ratio(s) for s in grid])
    return {
        'inverse_weight': quad(lambda s: 1.0 / g_fn(s), lo, hi, limit=200)[0],
        'boundary_lo': abs(ratio(lo)),
        'boundary_hi': abs(ratio(hi)),
        # L^1 norm of the derivative is the total variation
        'variation': float(np.sum(np.abs(np.diff(ratios)))),
        'l2': math.sqrt(quad(lambda s: T_fn(s) ** 4 * g_fn(s) / Tprime_fn(s) ** 2, lo, hi, limit=200)[0]),
    }


def stationary_phase_bound(T_fn, g_fn, delta, delta_prime, t, Tprime_fn=None, upper=math.pi / 2, terms=None):
    """
    r(t) = A / t (B(delta) + B(upper - delta') + ||(T^2 g / T')'||_1 + L)
           + sqrt(A) L / t,
    with A = ||g^(-1/2)||_2^2, B = T^2 g / |T'| and L = ||T^2 g^(1/2) / T'||_2.
    """
    if not t > 0:
        raise ValueError('value too small (must be > 0)')
    if terms is None:
        terms = stationary_phase_terms(T_fn, g_fn, delta, delta_prime, Tprime_fn, upper)
    A = terms['inverse_weight']
    bracket = terms['boundary_lo'] + terms['boundary_hi'] + terms['variation'] + terms['l2']
    return (A * bracket + math.sqrt(A) * terms['l2']) / t


def cellular_bound_functions():
    """ (T, g, T') of the cellular chart as scalar callables of I. """
    def T_fn(s):
        return period_agm(math.sin(s))

    def g_fn(s):
        return period_agm(math.sin(s)) * math.cos(s)

    def Tprime_fn(s):
        return period_derivative_elliptic(math.sin(s)) * math.cos(s)

    return T_fn, g_fn, Tprime_fn


def envelope_terms(t, eps, regime, delta=None, delta_prime=None, absorb_logs=True):
    """
    The separate terms of the mixing envelope at given cut-offs.

    With absorbed logarithms |ln d|^2 becomes d^(-2 eps) and
    (1 + |ln d|)^(1 - eps) becomes d^(-eps (1 - eps)); every constant is 1.
    """
    if regime not in ENVELOPE_REGIMES:
        raise ValueError('unknown regime {}'.format(regime))
    if regime == 'interior':
        return {'transport': 1.0 / t}

    def log_square(d):
        return d ** (-2 * eps) if absorb_logs else math.log(d) ** 2

    terms = {
        'elliptic_cap': delta_prime ** (2 - 2 * eps),
        'transport': log_square(delta_prime) / t,
    }
    if regime == 'global':
        if absorb_logs:
            terms['separatrix_strip'] = delta ** ((1 - eps) ** 2)
        else:
            terms['separatrix_strip'] = (delta * (1 + abs(math.log(delta)))) ** (1 - eps)
        terms['transport'] /= delta ** 2
    return terms


def envelope_cutoffs(t, eps, regime, absorb_logs=True, n_grid=600, lower=1e-12, upper=1.0):
    """
    Minimise the envelope terms over log grids of delta and delta'.

    :returns: (envelope, delta, delta') at the grid minimum; a cut-off the
        regime does not use is None
    """
    if t < 1:
        raise ValueError('value too small (must be >= 1)')
    if not 0 < eps < 1:
        raise ValueError('eps must lie in (0, 1)')
    if regime not in ENVELOPE_REGIMES:
        raise ValueError('unknown regime {}'.format(regime))
    if regime == 'interior':
        return 1.0 / t, None, None

    cuts = np.geomspace(lower, upper, n_grid)
    if absorb_logs:
        log_square = cuts ** (-2 * eps)
    else:
        log_square = np.log(cuts) ** 2
    cap = cuts ** (2 - 2 * eps)

    if regime == 'elliptic':
        total = cap + log_square / t
        j = int(np.argmin(total))
        return float(total[j]), None, float(cuts[j])

    if absorb_logs:
        strip = cuts ** ((1 - eps) ** 2)
    else:
        strip = (cuts * (1 + np.abs(np.log(cuts)))) ** (1 - eps)
    # rows: delta, columns: delta'
    total = strip[:, None] + cap[None, :] + log_square[None, :] / (t * cuts[:, None] ** 2)
    i, j = np.unravel_index(np.argmin(total), total.shape)
    return float(total[i, j]), float(cuts[i]), float(cuts[j])


def mixing_envelope(t, eps, regime, absorb_logs=True, n_grid=600, lower=1e-12, upper=1.0):
    return envelope_cutoffs(t, eps, regime, absorb_logs=absorb_logs, n_grid=n_grid, lower=lower, upper=upper)[0]


def envelope_exponent(eps, regime):
    """ Power of t the log-absorbed envelope decays with. """
    if regime == 'interior':
        return -1.0
    if regime == 'elliptic':
        return -(1 - eps)
    p, q = (1 - eps) ** 2, 2 - 2 * eps
    return -1.0 / (1 + 2 / p + 2 * eps / q)


def pushforward(rho_fn, chart, k_max=None, mean_free=True, lattice=1):
    """
    Pull a physical datum back to the chart: f(theta, s) = rho(Phi(theta, s)),
    expanded in angular modes with |k| <= k_max that are multiples of
    *lattice*.
    """
    if lattice < 1:
        raise ValueError('value too small (must be >= 1)')
    samples = rho_fn(np.moveaxis(chart.positions, -1, 0))
    n_theta = len(chart.theta_grid)
    spectrum = np.fft.fft(samples, axis=1) / n_theta
    k_all = np.fft.fftfreq(n_theta, 1.0 / n_theta).astype(int)
    if k_max is None:
        k_max = (n_theta - 1) // 2
    keep = (np.abs(k_all) <= min(k_max, (n_theta - 1) // 2)) & (k_all % lattice == 0)
    return AngleModeField(
        k_all[keep],
        chart.level_grid,
        spectrum[:, keep].T,
        np.abs(chart.expected_jacobians),
        chart.periods,
        mean_free=mean_free,
    )


def resample(state, s_grid, weight, period):
    """ Carry a state to a finer s grid by cubic splines of every mode. """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid[0] < state.s_grid[0] or s_grid[-1] > state.s_grid[-1]:
        raise ValueError('s grid leaves [{}, {}]'.format(state.s_grid[0], state.s_grid[-1]))
    coefficients = state.coefficients
    real = CubicSpline(state.s_grid, coefficients.real, axis=1)(s_grid)
    imag = CubicSpline(state.s_grid, coefficients.imag, axis=1)(s_grid)
    return AngleModeField(state.k_list, s_grid, real + 1j * imag, weight, period, state.time, state.mean_free)


def chart_discrepancy(state, chart, rho):
    """
    Relative L^2 distance, in the chart's area measure, between a transported
    state and a spectral field sampled at the chart nodes.
    """
    oracle = state.values(chart.theta_grid)
    direct = rho.evaluate(np.moveaxis(chart.positions, -1, 0))
    weights = np.abs(chart.jacobians)
    error = trapezoid((weights * (oracle - direct) ** 2).mean(axis=1), chart.level_grid)
    scale = trapezoid((weights * direct ** 2).mean(axis=1), chart.level_grid)
    return math.sqrt(error / scale)
