"""
Hamiltonian velocity fields b = (-d2 H, d1 H) and their point evaluation.

All evaluators take points as arrays whose leading axis has length two, so the
same callables serve single points, orbit samples and whole spectral grids.
"""
import logging
import math
from dataclasses import dataclass
from dataclasses import field as dataclass_field

import numpy as np
import sympy
from scipy.optimize import brentq
from sympy.parsing.sympy_parser import convert_xor
from sympy.parsing.sympy_parser import parse_expr
from sympy.parsing.sympy_parser import standard_transformations

from . import lagrangian
from .errors import DegenerateFieldError
from .types import field_spec

log = logging.getLogger(__name__)

DOMAINS = ('torus', 'cell', 'plane')
DOMAIN_SCALE = {'torus': 2 * math.pi, 'cell': math.pi, 'plane': 1.0}

_X1, _X2 = sympy.symbols('x1 x2', real=True)
_EXPR_NAMES = {
    'x1': _X1,
    'x2': _X2,
    'sin': sympy.sin,
    'cos': sympy.cos,
    'exp': sympy.exp,
    'pi': sympy.pi,
    'e': sympy.E,
}
_EXPR_FUNCTIONS = (sympy.sin, sympy.cos, sympy.exp)


def _points(x):
    return np.asarray(x, dtype=float)


class HamiltonianField:
    """
    A Hamiltonian H together with everything the orbit and chart code needs.

    :param hamiltonian: callable H(x)
    :param gradient: callable returning an array stacked as (d1 H, d2 H);
        central differences are used when missing
    :param hessian: callable returning the 2x2 stack of second derivatives;
        central differences of the gradient when missing
    :param center: location of the elliptic point the orbits wind around
    :param section_point: callable h -> point on the level {H = h}; when
        missing the level is searched along the ray ``center + r * ray``
    :param levels: default level range scanned for good annuli
    :param level_guard: levels outside this closed range are refused by the
        return-period code
    :param wraps: orbits close only modulo the torus period (shear flows)

    """

    def __init__(self, name, hamiltonian, gradient=None, hessian=None,
                 domain='torus', smoothness='C3', center=(math.pi / 2, math.pi / 2),
                 section_point=None, ray=(0.0, -1.0), ray_length=math.pi / 2,
                 levels=(0.05, 0.95), level_guard=None, cells=((0, 0),),
                 wraps=False):
        if domain not in DOMAINS:
            raise ValueError('unknown domain {}'.format(domain))
        if smoothness not in ('C1', 'C2', 'C3'):
            raise ValueError('unknown smoothness tag {}'.format(smoothness))

        self.name = name
        self.domain = domain
        self.smoothness = smoothness
        self.center = np.asarray(center, dtype=float)
        self.ray = np.asarray(ray, dtype=float) / np.hypot(*ray)
        self.ray_length = ray_length
        self.levels = levels
        self.level_guard = level_guard
        self.cells = tuple(cells)
        self.wraps = wraps
        self._hamiltonian = hamiltonian
        self._gradient = gradient
        self._hessian = hessian
        self._section_point = section_point
        # (machine epsilon)^(1/3) is the optimal step for central differences
        self.fd_step = np.finfo(float).eps ** (1.0 / 3.0) * DOMAIN_SCALE[domain]

    def __repr__(self):
        return 'HamiltonianField({!r})'.format(self.name)

    def rebuild_args(self):
        """ Picklable (name, domain, center) from which make_field rebuilds this field. """
        return self.name, self.domain, tuple(float(c) for c in self.center)

    def H(self, x):
        return self._hamiltonian(_points(x))

    def grad_H(self, x):
        x = _points(x)
        if self._gradient is not None:
            return np.asarray(self._gradient(x), dtype=float)

        step = self.fd_step
        e1 = np.array([step, 0.0]).reshape((2,) + (1,) * (x.ndim - 1))
        e2 = np.array([0.0, step]).reshape((2,) + (1,) * (x.ndim - 1))
        return np.stack([
            (self.H(x + e1) - self.H(x - e1)) / (2 * step),
            (self.H(x + e2) - self.H(x - e2)) / (2 * step),
        ])

    def velocity(self, x):
        d1, d2 = self.grad_H(x)
        return np.stack([-d2, d1])

    def speed(self, x):
        return np.hypot(*self.grad_H(x))

    def hessian(self, x):
        x = _points(x)
        if self._hessian is not None:
            return np.asarray(self._hessian(x), dtype=float)

        step = self.fd_step
        e1 = np.array([step, 0.0]).reshape((2,) + (1,) * (x.ndim - 1))
        e2 = np.array([0.0, step]).reshape((2,) + (1,) * (x.ndim - 1))
        d1 = (self.grad_H(x + e1) - self.grad_H(x - e1)) / (2 * step)
        d2 = (self.grad_H(x + e2) - self.grad_H(x - e2)) / (2 * step)
        off = 0.5 * (d1[1] + d2[0])
        return np.stack([np.stack([d1[0], off]), np.stack([off, d2[1]])])

    def section_point(self, h):
        """ Return a point on {H = h} in the reference cell. """
        if self._section_point is not None:
            return np.asarray(self._section_point(h), dtype=float)

        def offset(r):
            return float(self.H(self.center + r * self.ray)) - h

        lo = self.ray_length * 1e-9
        if offset(lo) * offset(self.ray_length) > 0:
            raise ValueError('level {} is not crossed by the section ray of {}'.format(h, self.name))
        r = brentq(offset, lo, self.ray_length, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return self.center + r * self.ray

    def section_function(self, x0):
        """
        Return g whose zero set crosses the orbit through x0 transversally:
        the line through x0 perpendicular to b(x0). For wrapping orbits the
        line is shifted one torus period ahead along the flow, so g increases
        from -2 pi and vanishes once, at the first return.
        """
        x0 = _points(x0)
        b0 = self.velocity(x0)
        norm = np.hypot(*b0)
        if norm == 0.0:
            raise ValueError('no transversal section through a critical point')
        direction = b0 / norm

        shift = 2 * math.pi if self.wraps else 0.0
        return lambda x: float(np.dot(_points(x) - x0, direction)) - shift

    def cell_of(self, x):
        """ Return the (i, j) quarter-cell index of x for multi-cell fields. """
        x = _points(x)
        if len(self.cells) == 1:
            return self.cells[0]
        i = int(np.floor(np.mod(x[0], 2 * math.pi) / math.pi))
        j = int(np.floor(np.mod(x[1], 2 * math.pi) / math.pi))
        return (i, j)

    def to_reference_cell(self, x):
        """ Map x to the reference cell; returns (point, cell, sign of H there). """
        x = _points(x)
        cell = self.cell_of(x)
        if len(self.cells) == 1:
            return x, cell, 1.0
        shift = math.pi * np.array(cell, dtype=float)
        reference = np.mod(x, 2 * math.pi) - shift.reshape((2,) + (1,) * (x.ndim - 1))
        return reference, cell, float((-1) ** (cell[0] + cell[1]))

    def cell_level(self, x):
        """ Return (cell, level) where level is H measured in the reference cell. """
        reference, cell, sign = self.to_reference_cell(x)
        return cell, sign * float(self.H(x))


def _cellular_gradient(x):
    s1, s2 = np.sin(x[0]), np.sin(x[1])
    c1, c2 = np.cos(x[0]), np.cos(x[1])
    return np.stack([c1 * s2, s1 * c2])


def _cellular_hessian(x):
    s1, s2 = np.sin(x[0]), np.sin(x[1])
    c1, c2 = np.cos(x[0]), np.cos(x[1])
    return np.stack([np.stack([-s1 * s2, c1 * c2]), np.stack([c1 * c2, -s1 * s2])])


def cellular():
    """ The cellular flow H = sin x1 sin x2 on the torus. """
    return HamiltonianField(
        'cellular',
        lambda x: np.sin(x[0]) * np.sin(x[1]),
        gradient=_cellular_gradient,
        hessian=_cellular_hessian,
        section_point=lambda h: (math.pi / 2, math.asin(h)),
        levels=(0.05, 0.95),
        level_guard=(1e-4, 1 - 1e-6),
        cells=((0, 0), (1, 0), (0, 1), (1, 1)),
    )


def shear_cos():
    """ The shear H = -cos x2, b = (-sin x2, 0). """
    return HamiltonianField(
        'shear-cos',
        lambda x: -np.cos(x[1]) + 0.0 * x[0],
        gradient=lambda x: np.stack([0.0 * x[0], np.sin(x[1])]),
        hessian=lambda x: np.stack([
            np.stack([0.0 * x[0], 0.0 * x[0]]),
            np.stack([0.0 * x[0], np.cos(x[1])]),
        ]),
        center=(math.pi, math.pi / 2),
        section_point=lambda h: (math.pi, math.acos(-h)),
        levels=(-0.95, 0.95),
        wraps=True,
    )


def harmonic():
    """ The isochronous center H = |x|^2 / 2. """
    return HamiltonianField(
        'harmonic',
        lambda x: 0.5 * (x[0] ** 2 + x[1] ** 2),
        gradient=lambda x: np.stack([x[0], x[1]]),
        hessian=lambda x: np.stack([
            np.stack([1.0 + 0.0 * x[0], 0.0 * x[0]]),
            np.stack([0.0 * x[0], 1.0 + 0.0 * x[0]]),
        ]),
        domain='plane',
        center=(0.0, 0.0),
        ray=(1.0, 0.0),
        ray_length=1.0,
        section_point=lambda h: (math.sqrt(2 * h), 0.0),
        levels=(0.005, 0.3),
    )


def _anharmonic_hessian(x):
    r2 = x[0] ** 2 + x[1] ** 2
    return np.stack([
        np.stack([1 + r2 + 2 * x[0] ** 2, 2 * x[0] * x[1]]),
        np.stack([2 * x[0] * x[1], 1 + r2 + 2 * x[1] ** 2]),
    ])


def anharmonic():
    """ H = |x|^2/2 + |x|^4/4, whose period is 2 pi / (1 + r^2). """
    return HamiltonianField(
        'anharmonic',
        lambda x: 0.5 * (x[0] ** 2 + x[1] ** 2) + 0.25 * (x[0] ** 2 + x[1] ** 2) ** 2,
        gradient=lambda x: np.stack([
            x[0] * (1 + x[0] ** 2 + x[1] ** 2),
            x[1] * (1 + x[0] ** 2 + x[1] ** 2),
        ]),
        hessian=_anharmonic_hessian,
        domain='plane',
        center=(0.0, 0.0),
        ray=(1.0, 0.0),
        ray_length=1.0,
        section_point=lambda h: (math.sqrt(math.sqrt(1 + 4 * h) - 1), 0.0),
        levels=(0.005, 0.3),
    )


def _broadcasting(func):
    def evaluate(x):
        return np.asarray(func(x[0], x[1]), dtype=float) + np.zeros_like(x[0], dtype=float)
    return evaluate


def from_expression(text, domain='torus', center=(math.pi / 2, math.pi / 2), **options):
    """
    Build a field from an expression in x1 and x2.

    Derivatives are taken symbolically, so expression fields get exact
    gradients and Hessians just like the built-in ones.

    """
    try:
        expression = parse_expr(
            text,
            local_dict=dict(_EXPR_NAMES),
            transformations=standard_transformations + (convert_xor,),
        )
    except Exception as exc:
        raise ValueError('invalid expression {!r}: {}'.format(text, exc))

    expression = sympy.sympify(expression)
    unknown = expression.free_symbols - {_X1, _X2}
    if unknown:
        raise ValueError('unknown symbols in expression: {}'.format(', '.join(sorted(map(str, unknown)))))
    for function in expression.atoms(sympy.Function):
        if function.func not in _EXPR_FUNCTIONS:
            raise ValueError('unsupported function {}'.format(function.func))

    gradient = [sympy.diff(expression, v) for v in (_X1, _X2)]
    hessian = [[sympy.diff(g, v) for v in (_X1, _X2)] for g in gradient]

    def lambdified(e):
        return _broadcasting(sympy.lambdify((_X1, _X2), e, modules='numpy'))

    value = lambdified(expression)
    gradient_funcs = [lambdified(g) for g in gradient]
    hessian_funcs = [[lambdified(e) for e in row] for row in hessian]

    return HamiltonianField(
        'expr:' + text,
        value,
        gradient=lambda x: np.stack([g(x) for g in gradient_funcs]),
        hessian=lambda x: np.stack([np.stack([e(x) for e in row]) for row in hessian_funcs]),
        domain=domain,
        center=center,
        **options
    )


_BUILTIN = {
    'cellular': cellular,
    'shear-cos': shear_cos,
    'harmonic': harmonic,
    'anharmonic': anharmonic,
}


def make_field(spec, domain='torus', center=None):
    """ Build the field named by a (validated) field spec string. """
    spec = field_spec()(spec)
    if spec in _BUILTIN:
        return _BUILTIN[spec]()

    options = {'domain': domain}
    if center is not None:
        options['center'] = center
    return from_expression(spec[len(field_spec.EXPR_PREFIX):], **options)


def eval_velocity(field, x):
    return field.velocity(x)


def speed_bounds(h):
    """ Return the bracket (2h(1-h), 2(1-h^2)) of |b|^2 on the cellular level {H = h}. """
    if not 0 < h < 1:
        raise ValueError('level must lie in (0, 1)')
    return 2 * h * (1 - h), 2 * (1 - h * h)


@dataclass
class LevelAnnulus:
    h_lo: float
    h_hi: float
    c0: float
    cell: tuple = (0, 0)
    scan_levels: np.ndarray = dataclass_field(default=None, repr=False)
    scan_speeds: np.ndarray = dataclass_field(default=None, repr=False)

    def __post_init__(self):
        if not self.h_lo < self.h_hi:
            raise ValueError('annulus needs h_lo < h_hi')
        if not self.c0 > 0:
            raise ValueError('annulus needs a positive speed floor')

    def contains(self, field, x):
        cell, level = field.cell_level(x)
        return cell == tuple(self.cell) and self.h_lo <= level <= self.h_hi


def level_speed_floor(field, h, n_samples=1000, max_time=500.0, floor=0.0):
    """ Return min |b| over n_samples equally timed points of the orbit {H = h}. """
    try:
        x0 = field.section_point(h)
    except ValueError:
        return 0.0
    if field.speed(x0) <= floor:
        return 0.0

    period, _ = lagrangian.orbit_return_time(field, x0, max_time=max_time)
    times = np.arange(n_samples) * (period / n_samples)
    orbit = lagrangian.integrate_orbit(field, x0, period, t_eval=times)
    return float(field.speed(orbit.points.T).min())


def find_good_annulus(field, cell=(0, 0), n_levels=19, n_samples=1000, levels=None, width=None,
                      floor=1e-3, max_time=500.0):
    """
    Scan c_S(h) = min |b| over {H = h} and return the band of *width*
    consecutive scanned levels whose smallest c_S is largest.

    Multi-cell fields are scanned in the reference cell only; the other cells
    are images of it under the cell symmetries.

    :raises DegenerateFieldError: if no band reaches *floor*

    """
    if tuple(cell) not in field.cells:
        raise ValueError('field {} has no cell {}'.format(field.name, cell))
    if n_levels < 2:
        raise ValueError('need at least two levels')

    lo, hi = levels if levels is not None else field.levels
    grid = np.linspace(lo, hi, n_levels)
    width = width or max(2, n_levels // 3)
    width = min(width, n_levels)

    speeds = np.array([level_speed_floor(field, h, n_samples, max_time, floor) for h in grid])
    log.debug('speed floors of %s: %s', field.name, speeds)

    band_floors = np.array([speeds[i:i + width].min() for i in range(n_levels - width + 1)])
    best = int(np.argmax(band_floors))
    c0 = float(band_floors[best])
    if c0 <= floor:
        raise DegenerateFieldError('no level band of {} has |b| above {}'.format(field.name, floor))

    return LevelAnnulus(
        h_lo=float(grid[best]),
        h_hi=float(grid[best + width - 1]),
        c0=c0,
        cell=tuple(cell),
        scan_levels=grid,
        scan_speeds=speeds,
    )
