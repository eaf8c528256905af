# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest


@pytest.mark.parametrize("spec", [
    'cellular',
    'shear-cos',
    'harmonic',
    'anharmonic',
    'expr:sin(x1)*sin(x2)',
    'expr:x1^2/2 + x2^2/2 + (x1^2 + x2^2)^2/4',
])
def test_velocity_is_divergence_free_and_tangent(spec):
    from ..field import make_field

    domain = 'plane' if 'x1^2' in spec else 'torus'
    field = make_field(spec, domain=domain, center=(0.0, 0.0) if domain == 'plane' else None)
    rng = np.random.default_rng(7)
    x = rng.uniform(0.1, 1.2, size=(2, 25))

    velocity = field.velocity(x)
    grad = field.grad_H(x)
    hessian = field.hessian(x)

    # b . grad H = 0 and div b = -d12 H + d21 H = 0
    assert np.max(np.abs(np.sum(velocity * grad, axis=0))) < 1e-12
    assert np.max(np.abs(hessian[0, 1] - hessian[1, 0])) < 1e-12


def test_expression_matches_builtin():
    from ..field import make_field

    builtin = make_field('cellular')
    parsed = make_field('expr:sin(x1)*sin(x2)')
    x = np.stack(np.meshgrid(np.linspace(0, 6, 7), np.linspace(0, 6, 7)))

    assert np.allclose(builtin.H(x), parsed.H(x), atol=1e-14)
    assert np.allclose(builtin.velocity(x), parsed.velocity(x), atol=1e-14)
    assert np.allclose(builtin.hessian(x), parsed.hessian(x), atol=1e-14)


def test_expression_constant_terms_broadcast():
    from ..field import make_field

    field = make_field('expr:x1 + 0*x2 + pi')
    x = np.zeros((2, 3, 4))

    assert field.H(x).shape == (3, 4)
    assert field.hessian(x).shape == (2, 2, 3, 4)


@pytest.mark.parametrize("spec", [
    'nope',
    'expr:tan(x1)',
    'expr:sin(x1',
])
def test_make_field_rejects(spec):
    from ..field import make_field

    with pytest.raises(ValueError):
        make_field(spec)


def test_eval_velocity_cellular():
    from ..field import cellular
    from ..field import eval_velocity

    b = eval_velocity(cellular(), np.array([0.3, 1.1]))
    assert b == pytest.approx([-math.sin(0.3) * math.cos(1.1), math.cos(0.3) * math.sin(1.1)], abs=1e-15)


def test_finite_difference_fallback():
    from ..field import HamiltonianField

    field = HamiltonianField('fd', lambda x: np.sin(x[0]) * np.sin(x[1]))
    x = np.array([0.4, 0.9])

    assert field.velocity(x) == pytest.approx([-math.sin(0.4) * math.cos(0.9), math.cos(0.4) * math.sin(0.9)],
                                              abs=1e-9)
    assert field.hessian(x)[0, 0] == pytest.approx(-math.sin(0.4) * math.sin(0.9), abs=1e-5)


@pytest.mark.parametrize("h", [1e-3, 0.1, 0.5, 0.9, 1 - 1e-6])
def test_cellular_section_point(h):
    from ..field import cellular

    field = cellular()
    assert float(field.H(field.section_point(h))) == pytest.approx(h, abs=1e-15)


def test_section_point_by_bisection():
    from ..field import make_field

    field = make_field('expr:cos(x1) + cos(x2)', center=(0.0, 0.0))
    x = field.section_point(1.5)

    assert float(field.H(x)) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(ValueError):
        field.section_point(5.0)


@pytest.mark.parametrize("x,cell,level", [
    ((math.pi / 2, math.pi / 2), (0, 0), 1.0),
    ((3 * math.pi / 2, math.pi / 2), (1, 0), 1.0),
    ((math.pi / 2, 3 * math.pi / 2), (0, 1), 1.0),
    ((3 * math.pi / 2, 3 * math.pi / 2), (1, 1), 1.0),
    ((math.pi / 2 - 2 * math.pi, math.pi / 6), (0, 0), 0.5),
])
def test_cell_level(x, cell, level):
    from ..field import cellular

    got_cell, got_level = cellular().cell_level(np.array(x))

    assert got_cell == cell
    assert got_level == pytest.approx(level, abs=1e-14)


@pytest.mark.parametrize("h", [0.1, 0.5, 0.9])
def test_speed_bounds_bracket_orbit_speeds(h):
    from ..field import cellular
    from ..field import speed_bounds

    x2 = np.linspace(math.asin(h), math.pi - math.asin(h), 401)
    x1 = np.arcsin(np.clip(h / np.sin(x2), -1, 1))
    field = cellular()
    speed2 = field.speed(np.stack([x1, x2])) ** 2
    lo, hi = speed_bounds(h)

    assert np.all(speed2 >= lo - 1e-12)
    assert np.all(speed2 <= hi + 1e-12)


def test_speed_bounds_rejects_outside_levels():
    from ..field import speed_bounds

    with pytest.raises(ValueError):
        speed_bounds(1.0)


def test_level_speed_floor_cellular():
    from ..field import cellular
    from ..field import level_speed_floor
    from ..field import speed_bounds

    h = 0.5
    floor = level_speed_floor(cellular(), h, n_samples=400)
    lo, hi = speed_bounds(h)

    assert math.sqrt(lo) - 1e-9 <= floor <= math.sqrt(hi)


def test_find_good_annulus_cellular():
    from ..field import cellular
    from ..field import find_good_annulus

    annulus = find_good_annulus(cellular(), n_levels=7, n_samples=200)

    assert 0.05 <= annulus.h_lo < annulus.h_hi <= 0.95
    assert annulus.c0 > 0.1
    assert annulus.contains(cellular(), np.array([math.pi / 2, math.asin(0.5 * (annulus.h_lo + annulus.h_hi))]))
    assert not annulus.contains(cellular(), np.array([3 * math.pi / 2, math.pi / 2]))


def test_find_good_annulus_shear():
    from ..field import find_good_annulus
    from ..field import shear_cos

    annulus = find_good_annulus(shear_cos(), n_levels=9, n_samples=100)

    # |b| = sqrt(1 - h^2) on {-cos x2 = h}: the middle band of three levels wins
    assert annulus.h_lo == pytest.approx(-0.2375)
    assert annulus.h_hi == pytest.approx(0.2375)
    assert annulus.c0 == pytest.approx(math.sqrt(1 - 0.2375 ** 2), rel=1e-9)
    assert np.allclose(annulus.scan_speeds, np.sqrt(1 - annulus.scan_levels ** 2), rtol=1e-9)


def test_shear_speed_floor_on_every_level():
    from ..field import level_speed_floor
    from ..field import shear_cos

    field = shear_cos()
    for h in (-0.9, -0.3, 0.0, 0.6):
        assert level_speed_floor(field, h, n_samples=50) == pytest.approx(math.sqrt(1 - h * h), rel=1e-9)


def test_find_good_annulus_degenerate():
    from ..errors import DegenerateFieldError
    from ..field import find_good_annulus
    from ..field import make_field

    # |b| = |x|^3 is below the floor on every level near the center
    field = make_field('expr:(x1^2 + x2^2)^2/4', domain='plane', center=(0.0, 0.0))
    field.ray_length = 0.05
    with pytest.raises(DegenerateFieldError):
        find_good_annulus(field, n_levels=4, n_samples=50, levels=(1e-8, 1e-6), floor=1e-3)


def test_annulus_validation():
    from ..field import LevelAnnulus

    with pytest.raises(ValueError):
        LevelAnnulus(0.5, 0.2, 1.0)
    with pytest.raises(ValueError):
        LevelAnnulus(0.2, 0.5, 0.0)
