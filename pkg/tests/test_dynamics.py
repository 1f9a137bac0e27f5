"""Trajectories, masked displacement, and the half-perimeter bound.

The radial limit cycle traverses the unit circle at unit angular speed, so
chord lengths, residence times, and return gaps all have closed forms.
"""

import math

import numpy as np
import pytest

from fluxgauge import (
    annulus,
    ball,
    check_cor_2d,
    circle_loop,
    field_catalog,
    integrate,
    make_m_cover,
    masked_displacement,
    masked_intervals,
    minimal_set_probe,
    residence_time,
    trajectory_from_curve,
)
from fluxgauge.errors import BadParamsError, NotSimpleError

CYCLE = field_catalog("limit_cycle", 2)
WINDOW = ball((1.0, 0.0), 0.3)
HALF_ANGLE = 2.0 * math.asin(0.15)


@pytest.fixture(scope="module")
def orbit():
    return integrate(CYCLE, (1.0, 0.0), 2.0 * math.pi, tol=1e-10)


def test_cycle_period_is_two_pi(orbit):
    assert orbit.closure_gap < 1e-8
    assert orbit.t1 - orbit.t0 == pytest.approx(2.0 * math.pi)


def test_off_cycle_start_converges_to_the_cycle():
    traj = integrate(CYCLE, (0.2, 0.0), 40.0, tol=1e-10)
    assert np.linalg.norm(traj.states[-1]) == pytest.approx(1.0, abs=1e-6)


def test_dense_output_matches_the_circle(orbit):
    ts = np.linspace(0.0, 2.0 * math.pi, 200)
    pts = orbit.at(ts)
    exact = np.column_stack([np.cos(ts), np.sin(ts)])
    assert np.max(np.linalg.norm(pts - exact, axis=1)) < 1e-7


def test_masked_displacement_is_the_chord(orbit):
    disp = masked_displacement(orbit, WINDOW)
    assert np.linalg.norm(disp) == pytest.approx(2.0 * math.sin(HALF_ANGLE), abs=1e-6)
    assert disp[1] > 0  # ccw motion exits above the entry point


def test_masked_displacement_of_contained_loop_cancels(orbit):
    everything = ball((0.0, 0.0), 2.0)
    disp = masked_displacement(orbit, everything)
    assert np.linalg.norm(disp) < 1e-8


def test_time_reversal_flips_the_displacement(orbit):
    fwd = masked_displacement(orbit, WINDOW)
    bwd = masked_displacement(orbit.reversed(), WINDOW)
    assert np.allclose(fwd, -bwd, atol=1e-9)


def test_residence_time_is_the_arc_angle(orbit):
    assert residence_time(orbit, WINDOW) == pytest.approx(2.0 * HALF_ANGLE, abs=1e-6)
    assert residence_time(orbit, ball((5.0, 0.0), 0.3)) == 0.0


def test_masked_intervals_bracket_the_window_pass(orbit):
    intervals = masked_intervals(orbit, WINDOW)
    assert len(intervals) == 2  # the orbit starts inside: head and tail pieces
    total = sum(b - a for a, b in intervals)
    assert total == pytest.approx(2.0 * HALF_ANGLE, abs=1e-6)


def test_half_perimeter_bound_on_the_orbit(orbit):
    rep = check_cor_2d(orbit, WINDOW)
    assert rep.verdict == "HOLDS"
    assert rep.lhs == pytest.approx(2.0 * math.sin(HALF_ANGLE), abs=1e-6)
    assert rep.rhs == pytest.approx(math.pi * 0.3, rel=1e-9)
    assert rep.flags == ()


def test_half_perimeter_bound_via_parametrized_curve():
    rep = check_cor_2d(trajectory_from_curve(circle_loop()), WINDOW)
    assert rep.verdict == "HOLDS"
    assert rep.lhs == pytest.approx(2.0 * math.sin(HALF_ANGLE), abs=1e-4)


def test_non_simple_curves_are_rejected_unless_allowed():
    cover = trajectory_from_curve(make_m_cover(3, perturbation=0.05))
    with pytest.raises(NotSimpleError):
        check_cor_2d(cover, WINDOW)
    rep = check_cor_2d(cover, WINDOW, allow_non_simple=True)
    assert "NOT_SIMPLE" in rep.flags


def test_open_arcs_are_rejected():
    traj = integrate(CYCLE, (1.0, 0.0), 1.0, tol=1e-10)
    with pytest.raises(Exception) as err:
        check_cor_2d(traj, WINDOW)
    assert "closed" in str(err.value)


def test_probe_accumulates_same_direction_chords():
    probe = minimal_set_probe(CYCLE, (1.0, 0.0), (1.0, 0.0), 0.1, [5.0, 10.0, 20.0])
    mags = [r.displacement_magnitude for r in probe.rows]
    assert mags == sorted(mags)  # repeated passes stack up
    assert probe.rows[0].chord_bound == pytest.approx(math.pi * 0.1)
    assert probe.rows[0].within_bound
    assert probe.rows[-1].n_passes >= 3
    # residence per horizon: a, 3a, 7a for arc half-width a (the start point
    # sits mid-window, so the first visit is a half pass)
    assert probe.residence_growth == pytest.approx(7.0, rel=1e-6)


def test_probe_far_from_the_cycle_sees_nothing():
    probe = minimal_set_probe(CYCLE, (1.0, 0.0), (3.0, 3.0), 0.1, [10.0])
    assert probe.rows[0].n_passes == 0
    assert probe.rows[0].displacement_magnitude == 0.0


def test_integrate_rejects_bad_horizons():
    with pytest.raises(BadParamsError):
        integrate(CYCLE, (1.0, 0.0), -1.0)
    with pytest.raises(BadParamsError):
        integrate(CYCLE, (1.0, 0.0), 0.0)


def test_planar_bound_needs_planar_window(orbit):
    with pytest.raises(BadParamsError):
        check_cor_2d(orbit, ball((0.0, 0.0, 0.0), 1.0))


def test_windows_with_holes_still_bound(orbit):
    ring = annulus((0.0, 0.0), 0.9, 1.1)
    rep = check_cor_2d(orbit, ring)
    assert rep.verdict == "HOLDS"
    # the whole orbit lies inside the ring, so the displacement telescopes away
    assert rep.lhs < 1e-6
