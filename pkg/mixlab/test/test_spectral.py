# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest


def _sin_x1(N=16):
    from ..spectral import ScalarField

    return ScalarField.from_function(lambda x: np.sin(x[0]), N)


def test_norms_of_a_single_mode():
    from ..diagnostics import sobolev_norm

    rho = _sin_x1()
    for order in (-1, 0, 1):
        assert sobolev_norm(rho, order) ** 2 == pytest.approx(2 * math.pi ** 2, rel=1e-12)


def test_physical_round_trip():
    from ..spectral import ScalarField
    from ..spectral import grid

    values = np.cos(grid(16)[0] + 2 * grid(16)[1])
    assert np.allclose(ScalarField.from_physical(values).to_physical(), values, atol=1e-14)


def test_scalar_field_shape_checked():
    from ..spectral import ScalarField

    with pytest.raises(ValueError):
        ScalarField(16, np.zeros((16, 16)))
    with pytest.raises(ValueError):
        ScalarField.from_physical(np.zeros((16, 8)))


def test_evaluate_off_grid():
    from ..spectral import ScalarField

    rho = ScalarField.from_function(lambda x: np.sin(x[0]) * np.cos(2 * x[1]) + 0.5, 16)
    points = np.random.default_rng(3).uniform(0, 2 * math.pi, size=(2, 5, 7))

    expected = np.sin(points[0]) * np.cos(2 * points[1]) + 0.5
    assert np.allclose(rho.evaluate(points), expected, atol=1e-12)


def test_mean_and_fluctuation():
    from ..spectral import ScalarField

    rho = ScalarField.from_function(lambda x: np.cos(x[1]) + 2.0, 8)

    assert rho.mean() == pytest.approx(2.0)
    assert rho.fluctuation().mean() == 0.0


def test_heat_mode_decays_exactly():
    from ..field import shear_cos
    from ..spectral import ScalarField
    from ..spectral import solve

    # cos x2 is invariant under the shear, only diffusion acts
    rho0 = ScalarField.from_function(lambda x: np.cos(x[1]), 16)
    series = solve(rho0, shear_cos(), 0.1, 2.0, [0.0, 1.0, 2.0])

    assert series.l2 / series.l2[0] == pytest.approx(np.exp(-0.1 * series.times), rel=1e-10)
    assert np.all(series.energy_residual < 1e-3 * series.l2[0] ** 2)


def test_shear_transport_matches_characteristics():
    from ..field import shear_cos
    from ..spectral import ScalarField
    from ..spectral import grid
    from ..spectral import solve

    rho0 = ScalarField.from_function(lambda x: np.cos(x[0]), 32)
    series = solve(rho0, shear_cos(), 0.0, 1.0, [1.0], cfl=0.1)

    x = grid(32)
    # b = (-sin x2, 0) carries rho0 along x1
    exact = np.cos(x[0] + 1.0 * np.sin(x[1]))
    assert series.final.time == 1.0
    assert np.allclose(series.final.to_physical(), exact, atol=1e-6)


def test_transport_conserves_l2():
    from ..field import cellular
    from ..spectral import ScalarField
    from ..spectral import solve

    rho0 = ScalarField.from_function(lambda x: np.cos(x[0]) * np.cos(2 * x[1]), 64)
    series = solve(rho0, cellular(), 0.0, 1.0, [0.0, 0.5, 1.0])

    assert np.allclose(series.l2, series.l2[0], rtol=1e-5)
    assert np.allclose(series.means, 0.0, atol=1e-12)
    assert list(series.rows())[0][0] == 0.0


def test_energy_balance_with_viscosity():
    from ..field import cellular
    from ..spectral import ScalarField
    from ..spectral import solve

    rho0 = ScalarField.from_function(lambda x: np.sin(x[0]) * np.cos(x[1]), 32)
    series = solve(rho0, cellular(), 0.05, 1.0, np.linspace(0, 1, 5))

    assert series.l2[-1] < series.l2[0]
    assert np.all(series.energy_residual < 1e-3 * series.l2[0] ** 2)


def test_sample_times_checked():
    from ..field import cellular
    from ..spectral import solve

    with pytest.raises(ValueError):
        solve(_sin_x1(), cellular(), 0.0, 1.0, [2.0])
    with pytest.raises(ValueError):
        solve(_sin_x1(), cellular(), 0.0, 1.0, [])


def test_cfl_violation():
    from ..errors import CFLViolation
    from ..field import cellular
    from ..spectral import SpectralSolver

    solver = SpectralSolver(cellular(), 16, 0.0)
    with pytest.raises(CFLViolation):
        solver.step(_sin_x1(), 10 * solver.max_dt)


def test_solver_rejects_plane_fields_and_negative_viscosity():
    from ..field import cellular
    from ..field import harmonic
    from ..spectral import SpectralSolver

    with pytest.raises(ValueError):
        SpectralSolver(harmonic(), 16, 0.0)
    with pytest.raises(ValueError):
        SpectralSolver(cellular(), 16, -1.0)


def test_schedule_covers_interval():
    from ..field import cellular
    from ..spectral import SpectralSolver

    solver = SpectralSolver(cellular(), 32, 0.0)
    count, dt = solver.schedule(0.0, 1.0)

    assert count * dt == pytest.approx(1.0)
    assert dt <= solver.max_dt
    assert solver.schedule(1.0, 1.0) == (0, 0.0)


def test_projection_keeps_odd_data():
    from ..field import cellular
    from ..spectral import ScalarField
    from ..spectral import project_streamline_mean_free

    # odd under x1 -> pi - x1 in every cell, so every level average vanishes
    rho = ScalarField.from_function(lambda x: np.sin(2 * x[0]) * np.sin(x[1]), 32)
    projected = project_streamline_mean_free(rho, cellular(), n_bins=64)

    assert np.allclose(projected.to_physical(), rho.to_physical(), atol=1e-12)


def test_projection_removes_functions_of_H():
    from ..field import cellular
    from ..spectral import ScalarField
    from ..spectral import project_streamline_mean_free

    rho = ScalarField.from_function(lambda x: (np.sin(x[0]) * np.sin(x[1])) ** 2, 32)
    projected = project_streamline_mean_free(rho, cellular(), n_bins=64)

    assert np.max(np.abs(projected.to_physical())) < 0.1 * np.max(np.abs(rho.to_physical()))
    with pytest.raises(ValueError):
        project_streamline_mean_free(rho, cellular(), n_bins=0)


@pytest.mark.parametrize("k", [1, 2])
def test_annulus_bump_support(k):
    from ..field import LevelAnnulus
    from ..field import cellular
    from ..spectral import annulus_bump
    from ..spectral import support_mask

    field = cellular()
    annulus = LevelAnnulus(0.3, 0.7, 0.5)
    values = annulus_bump(field, annulus, 32, k=k).to_physical()
    inside = support_mask(field, annulus, 32)

    assert np.max(np.abs(values[~inside])) < 1e-10
    assert np.max(np.abs(values[inside])) > 0.1


def test_annulus_bump_rejects_k():
    from ..field import LevelAnnulus
    from ..field import cellular
    from ..spectral import annulus_bump

    with pytest.raises(ValueError):
        annulus_bump(cellular(), LevelAnnulus(0.3, 0.7, 0.5), 16, k=0)


def test_bump():
    from ..spectral import bump

    assert bump(np.array([0.0]))[0] == 1.0
    assert np.all(bump(np.array([-1.0, 1.0, 2.0])) == 0.0)


def test_viscosity_gap():
    from ..field import LevelAnnulus
    from ..field import cellular
    from ..spectral import annulus_bump
    from ..spectral import viscosity_gap

    field = cellular()
    annulus = LevelAnnulus(0.3, 0.7, 0.5)
    rho0 = annulus_bump(field, annulus, 32)
    gap = viscosity_gap(rho0, field, 1e-3, [0.0, 0.5, 1.0], annulus=annulus)

    assert gap.support_ok
    assert gap.gaps[0] == 0.0
    assert np.all(np.diff(gap.gaps) > 0)
    assert np.all(gap.viscous_l2 <= gap.inviscid_l2 * (1 + 1e-9))
    assert len(list(gap.rows())) == 3


def test_viscosity_gap_flags_leaking_data():
    from ..field import LevelAnnulus
    from ..field import cellular
    from ..spectral import viscosity_gap

    gap = viscosity_gap(_sin_x1(), cellular(), 1e-3, [0.0, 0.1], annulus=LevelAnnulus(0.3, 0.7, 0.5))
    assert not gap.support_ok


def test_snapshot_round_trip(tmpdir):
    from ..spectral import read_snapshot
    from ..spectral import write_snapshot

    rho = _sin_x1()
    rho.time = 2.5
    path = str(tmpdir.join('final.f8'))
    write_snapshot(rho, path, 'cellular', 0.0)
    restored, header = read_snapshot(path)

    assert tmpdir.join('final.f8').size() == 16 * 16 * 8
    assert header['N'] == 16 and header['field'] == 'cellular'
    assert restored.time == 2.5
    assert np.allclose(restored.to_physical(), rho.to_physical(), atol=1e-15)
