"""
Pseudospectral advection-diffusion on the 2 pi periodic torus.

Fields are stored as ``numpy.fft.rfft2`` coefficients of an N x N grid with
x1 along axis 0 and x2 along axis 1. The advection term is evaluated in
conservative form -div(b rho) with 2/3-rule dealiasing; diffusion is carried
exactly by the integrating factor exp(-nu |k|^2 t) and advection by a fourth
order Runge-Kutta scheme under that factor.
"""
import json
import logging
import math
from dataclasses import dataclass
from dataclasses import field as dataclass_field

import numpy as np

from .diagnostics import half_spectrum_weights
from .diagnostics import sobolev_norm
from .diagnostics import wavenumbers
from .errors import CFLViolation

log = logging.getLogger(__name__)

CFL = 0.5
EVALUATE_CHUNK = 4096
TIE_TOLERANCE = 1e-12


def grid(N):
    """ Physical grid points as an array of shape (2, N, N). """
    x = 2 * math.pi * np.arange(N) / N
    return np.stack(np.meshgrid(x, x, indexing='ij'))


def _derivative_wavenumbers(N):
    """ Wavenumbers with the Nyquist modes zeroed, so derivatives stay real. """
    kx, ky = wavenumbers(N)
    kx = kx.copy()
    ky = ky.copy()
    if N % 2 == 0:
        kx[N // 2, 0] = 0.0
        ky[0, -1] = 0.0
    return kx, ky


class ScalarField(object):
    """ A real field on the torus, held as its half spectrum. """

    def __init__(self, N, coefficients, time=0.0):
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.shape != (N, N // 2 + 1):
            raise ValueError('coefficients of shape {} do not match N={}'.format(coefficients.shape, N))
        self.N = N
        self.coefficients = coefficients
        self.time = float(time)

    def __repr__(self):
        return 'ScalarField(N={}, time={})'.format(self.N, self.time)

    @classmethod
    def from_physical(cls, values, time=0.0):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError('expected a square grid of values')
        return cls(values.shape[0], np.fft.rfft2(values), time)

    @classmethod
    def from_function(cls, func, N, time=0.0):
        """ Sample func(x) on the grid; func takes points stacked along axis 0. """
        return cls.from_physical(func(grid(N)), time)

    def to_physical(self):
        return np.fft.irfft2(self.coefficients, s=(self.N, self.N))

    def copy(self, coefficients=None, time=None):
        return ScalarField(
            self.N,
            self.coefficients.copy() if coefficients is None else coefficients,
            self.time if time is None else time,
        )

    def mean(self):
        return float(self.coefficients[0, 0].real) / self.N ** 2

    def fluctuation(self):
        coefficients = self.coefficients.copy()
        coefficients[0, 0] = 0.0
        return self.copy(coefficients)

    def evaluate(self, points):
        """ Evaluate the trigonometric interpolant at arbitrary points of shape (2, ...). """
        points = np.asarray(points, dtype=float)
        shape = points.shape[1:]
        flat = points.reshape(2, -1)
        kx, ky = wavenumbers(self.N)
        kx = kx[:, 0]
        ky = ky[0, :]
        weighted = self.coefficients * half_spectrum_weights(self.N) / self.N ** 2

        values = np.empty(flat.shape[1])
        for start in range(0, flat.shape[1], EVALUATE_CHUNK):
            x1 = flat[0, start:start + EVALUATE_CHUNK]
            x2 = flat[1, start:start + EVALUATE_CHUNK]
            left = np.exp(1j * np.outer(x1, kx)) @ weighted
            values[start:start + EVALUATE_CHUNK] = np.real(np.sum(left * np.exp(1j * np.outer(x2, ky)), axis=1))
        return values.reshape(shape)


def gradient(rho):
    kx, ky = _derivative_wavenumbers(rho.N)
    shape = (rho.N, rho.N)
    return np.stack([
        np.fft.irfft2(1j * kx * rho.coefficients, s=shape),
        np.fft.irfft2(1j * ky * rho.coefficients, s=shape),
    ])


def gradient_sup(rho):
    """ max |grad rho| over the grid. """
    return float(np.max(np.hypot(*gradient(rho))))


def _check_torus(field):
    if field.domain == 'plane':
        raise ValueError('the spectral solver needs a torus field, {} lives on the plane'.format(field.name))


class SpectralSolver(object):
    """
    Time stepper for d rho/dt + b . grad rho = nu Laplace rho at fixed N and nu.

    :param cfl: advective Courant number bounding dt * max|b| / dx

    """

    def __init__(self, field, N, nu, cfl=CFL):
        _check_torus(field)
        if nu < 0:
            raise ValueError('value too small (must be >= 0)')
        self.field = field
        self.N = N
        self.nu = float(nu)
        self.cfl = cfl
        self.dx = 2 * math.pi / N

        velocity = field.velocity(grid(N))
        self.b1, self.b2 = velocity[0], velocity[1]
        self.max_speed = float(np.max(np.hypot(self.b1, self.b2)))
        self.kx, self.ky = _derivative_wavenumbers(N)
        self.k2 = self.kx ** 2 + self.ky ** 2
        kx, ky = wavenumbers(N)
        self.mask = (np.abs(kx) < N / 3.0) & (ky < N / 3.0)

    @property
    def max_dt(self):
        if self.max_speed == 0.0:
            return math.inf
        return self.cfl * self.dx / self.max_speed

    def dealias(self, rho):
        return rho.copy(rho.coefficients * self.mask)

    def advection(self, coefficients):
        """ -div(b rho) in spectral space, dealiased. """
        rho = np.fft.irfft2(coefficients, s=(self.N, self.N))
        flux1 = np.fft.rfft2(self.b1 * rho)
        flux2 = np.fft.rfft2(self.b2 * rho)
        return -1j * (self.kx * flux1 + self.ky * flux2) * self.mask

    def step(self, rho, dt):
        if dt > self.max_dt * (1 + 1e-12):
            raise CFLViolation('dt={:.4g} exceeds the CFL limit {:.4g}'.format(dt, self.max_dt))

        full = np.exp(-self.nu * self.k2 * dt)
        if self.max_speed == 0.0:
            return rho.copy(rho.coefficients * full, rho.time + dt)

        half = np.exp(-0.5 * self.nu * self.k2 * dt)
        u = rho.coefficients
        k1 = self.advection(u)
        k2 = self.advection(half * (u + 0.5 * dt * k1))
        k3 = self.advection(half * u + 0.5 * dt * k2)
        k4 = self.advection(full * u + dt * half * k3)
        u = full * u + dt / 6.0 * (full * k1 + 2 * half * (k2 + k3) + k4)
        return rho.copy(u, rho.time + dt)

    def schedule(self, t0, t1):
        """ Number and size of equal steps covering [t0, t1] within the CFL limit. """
        span = t1 - t0
        if span <= 0:
            return 0, 0.0
        count = max(1, int(math.ceil(span / self.max_dt * (1 - 1e-12)))) if math.isfinite(self.max_dt) else 1
        return count, span / count


def step(rho, field, nu, dt, cfl=CFL):
    """ Advance rho by one step of size dt. """
    return SpectralSolver(field, rho.N, nu, cfl).step(rho, dt)


def _squared_gradient(rho):
    return sobolev_norm(rho, 1) ** 2


@dataclass
class NormSeries:
    times: np.ndarray
    l2: np.ndarray
    h1: np.ndarray
    hminus1: np.ndarray
    energy_residual: np.ndarray
    means: np.ndarray
    final: ScalarField = None
    snapshots: list = dataclass_field(default_factory=list)

    COLUMNS = ('t', 'l2', 'h1', 'hminus1', 'energy_residual')

    def rows(self):
        return zip(self.times, self.l2, self.h1, self.hminus1, self.energy_residual)


def _check_samples(sample_times, t_end):
    samples = np.unique(np.asarray(sample_times, dtype=float))
    if samples.size == 0:
        raise ValueError('need at least one sample time')
    if samples[0] < 0 or samples[-1] > t_end:
        raise ValueError('sample times must lie in [0, {}]'.format(t_end))
    return samples


def solve(rho0, field, nu, t_end, sample_times, cfl=CFL, keep_snapshots=False):
    """
    Evolve rho0 to t_end and record norms at every sample time.

    The energy residual at a sample is
    |(||rho||^2(t_b) - ||rho||^2(t_a)) / (t_b - t_a) + 2 nu int ||grad rho||^2 / (t_b - t_a)|
    over the preceding sample interval, the integral by the trapezoid rule on
    the solver steps.

    """
    samples = _check_samples(sample_times, t_end)
    solver = SpectralSolver(field, rho0.N, nu, cfl)
    rho = solver.dealias(rho0).copy(time=0.0)

    records = {name: [] for name in ('l2', 'h1', 'hminus1', 'residual', 'mean')}
    snapshots = []
    previous_energy, previous_time = sobolev_norm(rho, 0) ** 2, 0.0

    def record(rho, dissipation):
        nonlocal previous_energy, previous_time
        energy = sobolev_norm(rho, 0) ** 2
        if rho.time == previous_time:
            residual = 0.0
        else:
            span = rho.time - previous_time
            residual = abs((energy - previous_energy) / span + 2 * nu * dissipation / span)
        previous_energy, previous_time = energy, rho.time
        records['l2'].append(math.sqrt(energy))
        records['h1'].append(sobolev_norm(rho, 1))
        records['hminus1'].append(sobolev_norm(rho.fluctuation(), -1))
        records['residual'].append(residual)
        records['mean'].append(rho.mean())
        if keep_snapshots:
            snapshots.append(rho.copy())

    for target in list(samples) + ([t_end] if samples[-1] < t_end else []):
        count, dt = solver.schedule(rho.time, target)
        dissipation = 0.0
        grad_before = _squared_gradient(rho) if nu > 0 else 0.0
        for _ in range(count):
            rho = solver.step(rho, dt)
            if nu > 0:
                grad_after = _squared_gradient(rho)
                dissipation += 0.5 * (grad_before + grad_after) * dt
                grad_before = grad_after
        rho.time = float(target)
        if target in samples:
            record(rho, dissipation)
        log.debug('t=%g reached in %d steps of %.4g', target, count, dt)

    return NormSeries(
        times=samples,
        l2=np.array(records['l2']),
        h1=np.array(records['h1']),
        hminus1=np.array(records['hminus1']),
        energy_residual=np.array(records['residual']),
        means=np.array(records['mean']),
        final=rho,
        snapshots=snapshots,
    )


def grid_cells(field, points):
    """ Invariant-cell id and in-cell level of every grid point. """
    levels = np.asarray(field.H(points), dtype=float)
    if len(field.cells) > 1:
        i = np.floor(np.mod(points[0], 2 * math.pi) / math.pi).astype(int)
        j = np.floor(np.mod(points[1], 2 * math.pi) / math.pi).astype(int)
        return 2 * i + j, np.where((i + j) % 2 == 0, levels, -levels)
    if field.wraps:
        # both strips of a shear carry the same levels
        return np.floor(np.mod(points[1], 2 * math.pi) / math.pi).astype(int), levels
    return np.zeros(levels.shape, dtype=int), levels


def cell_id(field, cell):
    if len(field.cells) > 1:
        return 2 * cell[0] + cell[1]
    return cell[1] if field.wraps else 0


def _level_bins(levels, n_bins):
    """ Equal-count bins of sorted levels that never split tied values. """
    order = np.argsort(levels, kind='stable')
    ordered = levels[order]
    size = ordered.size
    scale = max(np.max(np.abs(ordered)), 1.0)
    breaks = np.nonzero(np.diff(ordered) > TIE_TOLERANCE * scale)[0] + 1
    if not breaks.size:
        return [order]

    targets = np.round(np.arange(1, n_bins) * size / float(n_bins)).astype(int)
    nearest = np.clip(np.searchsorted(breaks, targets), 0, breaks.size - 1)
    lower = np.clip(nearest - 1, 0, breaks.size - 1)
    pick = np.where(np.abs(breaks[lower] - targets) <= np.abs(breaks[nearest] - targets), lower, nearest)
    edges = np.unique(breaks[pick])
    return np.split(order, edges)


def project_streamline_mean_free(rho, field, n_bins=256):
    """
    Subtract from rho its average over level sets of H, cell by cell.

    Grid points of one cell are sorted by level and cut into n_bins groups of
    (nearly) equal count; every group mean is removed.

    """
    if n_bins < 1:
        raise ValueError('value too small (must be >= 1)')
    points = grid(rho.N)
    values = rho.to_physical().ravel()
    cells, levels = grid_cells(field, points)
    cells = cells.ravel()
    levels = levels.ravel()

    projected = values.copy()
    for cell in np.unique(cells):
        members = np.nonzero(cells == cell)[0]
        for group in _level_bins(levels[members], n_bins):
            indices = members[group]
            projected[indices] -= projected[indices].mean()
    return ScalarField.from_physical(projected.reshape(rho.N, rho.N), rho.time)


def bump(u):
    """ exp(1 - 1 / (1 - u^2)) on |u| < 1, zero outside. """
    inside = np.abs(u) < 1
    safe = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(1 - 1 / (1 - safe ** 2)), 0.0)


def annulus_bump(field, annulus, N, amplitude=1.0, k=1):
    """
    A smooth datum supported in the annulus: a bump in the level times
    cos(k phi), phi the polar angle about the field's center.

    Under the reflection symmetry of a cellular cell the k = 1 datum is odd,
    so its streamline averages vanish.

    """
    if k < 1:
        raise ValueError('value too small (must be >= 1)')
    points = grid(N)
    cells, levels = grid_cells(field, points)
    mid = 0.5 * (annulus.h_lo + annulus.h_hi)
    half_width = 0.5 * (annulus.h_hi - annulus.h_lo)
    radial = bump((levels - mid) / half_width)

    reference = np.mod(points, 2 * math.pi) if len(field.cells) > 1 else points
    center = field.center.reshape(2, 1, 1)
    if len(field.cells) > 1:
        shift = math.pi * np.stack([cells // 2, cells % 2]).astype(float)
        offset = reference - shift - center
    else:
        offset = reference - center
    angular = np.where(np.hypot(*offset) > 0, np.cos(k * np.arctan2(offset[1], offset[0])), 0.0)

    values = amplitude * radial * angular * (cells == cell_id(field, annulus.cell))
    return ScalarField.from_physical(values)


def support_mask(field, annulus, N):
    cells, levels = grid_cells(field, grid(N))
    return (cells == cell_id(field, annulus.cell)) & (levels >= annulus.h_lo) & (levels <= annulus.h_hi)


@dataclass
class GapSeries:
    times: np.ndarray
    gaps: np.ndarray
    viscous_l2: np.ndarray
    inviscid_l2: np.ndarray
    support_ok: bool = True

    COLUMNS = ('t', 'gap', 'viscous_l2', 'inviscid_l2')

    def rows(self):
        return zip(self.times, self.gaps, self.viscous_l2, self.inviscid_l2)


def viscosity_gap(rho0, field, nu, t_grid, annulus=None, cfl=CFL, support_tolerance=1e-8):
    """
    Co-evolve the nu > 0 and nu = 0 solutions from rho0 and return
    ||rho^nu(t) - rho(t)||^2 at every t in t_grid.

    When an annulus is given, rho0 is checked against it; data leaking outside
    is flagged on the result, not refused.

    """
    samples = _check_samples(t_grid, max(np.max(t_grid), 0.0))
    support_ok = True
    if annulus is not None:
        values = np.abs(rho0.to_physical())
        outside = values[~support_mask(field, annulus, rho0.N)]
        if outside.size and outside.max() > support_tolerance * values.max():
            log.warning('initial datum leaks outside the annulus [%g, %g]', annulus.h_lo, annulus.h_hi)
            support_ok = False

    viscous = SpectralSolver(field, rho0.N, nu, cfl)
    inviscid = SpectralSolver(field, rho0.N, 0.0, cfl)
    a = viscous.dealias(rho0).copy(time=0.0)
    b = a.copy()

    gaps, viscous_l2, inviscid_l2 = [], [], []
    for target in samples:
        count, dt = viscous.schedule(a.time, target)
        for _ in range(count):
            a = viscous.step(a, dt)
            b = inviscid.step(b, dt)
        a.time = b.time = float(target)
        gaps.append(sobolev_norm(a.copy(a.coefficients - b.coefficients), 0) ** 2)
        viscous_l2.append(sobolev_norm(a, 0))
        inviscid_l2.append(sobolev_norm(b, 0))

    return GapSeries(
        times=samples,
        gaps=np.array(gaps),
        viscous_l2=np.array(viscous_l2),
        inviscid_l2=np.array(inviscid_l2),
        support_ok=support_ok,
    )


def write_snapshot(rho, path, field_name, nu):
    """ Raw little-endian float64 grid at *path* plus a JSON sidecar at *path*.json. """
    rho.to_physical().astype('<f8').tofile(path)
    header = {'N': rho.N, 'time': rho.time, 'field': field_name, 'nu': nu, 'dtype': '<f8', 'order': 'C'}
    with open(path + '.json', 'w') as handle:
        json.dump(header, handle, indent=2, sort_keys=True)


def read_snapshot(path):
    with open(path + '.json') as handle:
        header = json.load(handle)
    N = int(header['N'])
    values = np.fromfile(path, dtype=header.get('dtype', '<f8')).reshape(N, N)
    return ScalarField.from_physical(values, header['time']), header
