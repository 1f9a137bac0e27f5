"""Empirical boundary measures, ball averages, and the surface-limit study."""

import math

import numpy as np
import pytest

from fluxgauge import (
    ball,
    ball_boundary_area,
    ball_mean_normal,
    disintegration_estimate,
    empirical_measure,
    grid_centers,
    make_comb,
    mesh_boundary,
    surface_limit_study,
)
from fluxgauge.errors import PreconditionFailedError


def circle_measure(pitch=1.0 / 256.0):
    return empirical_measure(mesh_boundary(ball((0.0, 0.0), 1.0), pitch))


def test_measure_is_normalized():
    mu = circle_measure()
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert mu.source_area == pytest.approx(2 * math.pi, rel=1e-3)
    assert np.allclose(np.linalg.norm(mu.normals, axis=1), 1.0, atol=1e-12)


def test_ball_integral_of_normals_over_an_arc():
    mu = circle_measure()
    got = ball_mean_normal(mu, (1.0, 0.0), 0.2)
    # the arc within 0.2 of (1, 0) spans half-angle 2*asin(0.1); its normal
    # integral is (2 sin(a), 0), normalized by the full perimeter
    a = 2.0 * math.asin(0.1)
    assert got[0] == pytest.approx(2.0 * math.sin(a) / (2 * math.pi), abs=2e-3)
    assert got[1] == pytest.approx(0.0, abs=2e-3)


def test_ball_integral_over_everything_cancels():
    mu = circle_measure()
    whole = ball_mean_normal(mu, (0.0, 0.0), 3.0)
    assert np.linalg.norm(whole) < 1e-10


def test_ball_boundary_area_formulas():
    assert ball_boundary_area(2, 0.2) == pytest.approx(2 * math.pi * 0.2)
    assert ball_boundary_area(3, 0.5) == pytest.approx(4 * math.pi * 0.25)


def test_disintegration_cap_on_the_circle():
    mu = circle_measure()
    centers = [(1.0, 0.0), (0.0, 0.0), (0.0, -1.0)]
    est = disintegration_estimate(mu, centers, 0.2)
    assert est.bound == pytest.approx(
        ball_boundary_area(2, 0.2) / (2.0 * mu.source_area)
    )
    assert est.magnitudes[1] == 0.0  # empty ball at the center
    assert est.within_bound()
    assert np.all(est.magnitudes <= est.bound + est.slacks + 1e-12)


def test_disintegration_csv_round_trip(tmp_path):
    mu = circle_measure(1.0 / 64.0)
    est = disintegration_estimate(mu, [(1.0, 0.0)], 0.3)
    out = tmp_path / "est.csv"
    est.to_csv(out)
    text = out.read_text().splitlines()
    assert len(text) == 2
    assert "magnitude" in text[0]


def test_grid_centers_are_cell_centers():
    pts = grid_centers((0.0, 0.0), (1.0, 1.0), (3, 3))
    assert pts.shape == (9, 2)
    assert pts.min() == pytest.approx(1.0 / 6.0)
    assert pts.max() == pytest.approx(5.0 / 6.0)


def test_surface_limit_study_decays_on_combs():
    domains = [make_comb(4), make_comb(8)]
    study = surface_limit_study(
        domains, grid_centers((0.0, 0.0), (1.0, 1.0), (3, 3)), 0.2, [1.0 / 128.0, 1.0 / 512.0]
    )
    assert study.all_bounded
    assert len(study.estimates) == 2
    assert study.max_magnitudes[1] < study.max_magnitudes[0]
    assert study.decay_factors[0] > 1.0


def test_surface_limit_study_resolution_mismatch():
    with pytest.raises(PreconditionFailedError):
        surface_limit_study(
            [make_comb(4), make_comb(8)],
            grid_centers((0.0, 0.0), (1.0, 1.0), (2, 2)),
            0.2,
            [1.0 / 128.0],
        )


def test_surface_limit_study_scalar_resolution():
    study = surface_limit_study(
        [make_comb(4)], grid_centers((0.0, 0.0), (1.0, 1.0), (2, 2)), 0.25, 1.0 / 256.0
    )
    assert len(study.estimates) == 1
    assert study.all_bounded
