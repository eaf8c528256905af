import logging
import math
import os

import numpy as np

from .. import artifacts
from .. import spectral
from ..errors import ConfigError
from ..errors import DegenerateFieldError
from ..field import LevelAnnulus
from ..field import find_good_annulus
from ..field import level_speed_floor
from ..field import make_field

log = logging.getLogger(__name__)


class Experiment:
    """
    One named experiment of a validated config.

    Subclasses implement :meth:`run`; every file they write goes through
    :meth:`write_csv` or :meth:`write_json` so it is listed in the manifest.

    """
    name = None

    def __init__(self, config, output_dir, workers=1):
        self.config = config
        self.output_dir = output_dir
        self.workers = workers
        self.artifacts = []
        self._field = None
        self._annulus = None

    def run(self):
        raise NotImplementedError

    def path(self, filename):
        return os.path.join(self.output_dir, filename)

    def write_csv(self, filename, columns, rows):
        count = artifacts.write_csv(self.path(filename), columns, rows)
        self.artifacts.append(filename)
        return count

    def write_json(self, filename, data):
        artifacts.write_json(self.path(filename), data)
        self.artifacts.append(filename)

    @property
    def field(self):
        if self._field is None:
            c = self.config
            self._field = make_field(c['field'], c['field.domain'], c['field.center'])
        return self._field

    @property
    def tolerance(self):
        return self.config['tolerances.ode']

    def annulus(self):
        """ The configured level band, or the best band found by scanning the speed floor. """
        if self._annulus is None:
            self._annulus = self._find_annulus()
        return self._annulus

    def _find_annulus(self):
        c = self.config
        field = self.field
        if c['annulus.h_lo'] is None:
            return find_good_annulus(field, n_levels=c['annulus.n_levels'], max_time=c['period.max_time'])

        levels = np.linspace(c['annulus.h_lo'], c['annulus.h_hi'], 5)
        c0 = min(level_speed_floor(field, h, max_time=c['period.max_time']) for h in levels)
        if not c0 > 0:
            raise DegenerateFieldError('|b| vanishes on the annulus [{}, {}] of {}'.format(
                c['annulus.h_lo'], c['annulus.h_hi'], field.name))
        return LevelAnnulus(c['annulus.h_lo'], c['annulus.h_hi'], c0, cell=field.cells[0])

    def elliptic_annulus(self):
        """ The disc of radius elliptic.r about the field's center, as a level band. """
        field = self.field
        r = self.config['elliptic.r']
        h_center = float(field.H(field.center))
        h_edge = float(field.H(field.center + r * field.ray))
        c0 = level_speed_floor(field, h_edge, max_time=self.config['period.max_time'])
        if not c0 > 0:
            raise DegenerateFieldError('|b| vanishes on the level through radius {}'.format(r))
        return LevelAnnulus(min(h_center, h_edge), max(h_center, h_edge), c0, cell=field.cells[0])

    def initial_datum(self, annulus):
        c = self.config
        kind = c['initial.kind']
        if kind == 'file':
            rho, header = spectral.read_snapshot(os.path.expanduser(c['initial.path']))
            if rho.N != c['grid.N']:
                raise ConfigError('snapshot {} has N={}, grid.N is {}'.format(c['initial.path'], rho.N, c['grid.N']))
        else:
            k = c['initial.k'] if kind == 'angle-mode' else 1
            rho = spectral.annulus_bump(self.field, annulus, c['grid.N'], k=k)

        if c['initial.project']:
            rho = spectral.project_streamline_mean_free(rho, self.field, c['projection.n_bins'])
        return rho

    def sample_times(self, t_end=None):
        t_end = self.config['t_end'] if t_end is None else t_end
        return np.linspace(0.0, t_end, self.config['samples'])

    def rng(self):
        return np.random.default_rng(self.config['seed'])


def log_slope(x, y):
    """ Slope of log y against log x, with the fit residual; points with y <= 0 are dropped. """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return {'slope': None, 'intercept': None, 'residual': None, 'n_points': int(keep.sum())}
    logx, logy = np.log(x[keep]), np.log(y[keep])
    slope, intercept = np.polyfit(logx, logy, 1)
    residual = math.sqrt(float(np.mean((logy - (slope * logx + intercept)) ** 2)))
    return {'slope': float(slope), 'intercept': float(intercept), 'residual': residual, 'n_points': int(keep.sum())}
