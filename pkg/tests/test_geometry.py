"""Implicit-domain catalog: signs, distances, transforms, and curves."""

import math

import numpy as np
import pytest

from fluxgauge import (
    annulus,
    ball,
    circle_loop,
    halfspace,
    make_comb,
    make_m_cover,
    make_zoo,
    rounded_box,
    rounded_polygon,
    torus,
)
from fluxgauge.errors import BadParamsError
from fluxgauge.geometry.implicit import Membership


def test_ball_signed_distance():
    dom = ball((0.5, -0.25), 0.75)
    pts = np.array([[0.5, -0.25], [1.25, -0.25], [2.0, -0.25], [0.5, 0.9]])
    expected = [-0.75, 0.0, 0.75, 0.4]
    assert np.allclose(dom.phi(pts), expected, atol=1e-12)
    assert dom.exact_sdf
    assert dom.dimension == 2


def test_ball_membership_and_contains():
    dom = ball((0.0, 0.0), 1.0)
    assert dom.membership((0.0, 0.0)) is Membership.INSIDE
    assert dom.membership((2.0, 0.0)) is Membership.OUTSIDE
    assert dom.membership((1.0, 0.0)) is Membership.BOUNDARY
    inside = dom.contains(np.array([[0.1, 0.1], [3.0, 0.0]]))
    assert inside.tolist() == [True, False]


def test_exact_sdf_gradients_are_unit():
    rng = np.random.default_rng(11)
    domains = [
        ball((0.2, -0.1), 0.8),
        annulus((0.0, 0.0), 0.4, 0.9),
        halfspace((0.0, -1.0), 0.3),
        rounded_box((0.0, 0.0), (0.6, 0.4), 0.1),
        ball((0.1, 0.0, -0.2), 0.7),
        torus((0.0, 0.0, 0.0), 0.6, 0.25),
    ]
    for dom in domains:
        pts = rng.uniform(-1.4, 1.4, size=(256, dom.dimension))
        # gradient is undefined on the medial axis; keep points near the boundary
        keep = np.abs(dom.phi(pts)) > 1e-3
        grads = dom.gradient(pts[keep])
        norms = np.linalg.norm(grads, axis=1)
        assert np.all(np.abs(norms - 1.0) < 1e-6), dom.label


def test_halfspace_geometry():
    dom = halfspace((0.0, -1.0), -0.4, extent=1.8)
    # normal points toward -y, so {(-y) <= -0.4} is the region y >= 0.4
    assert dom.phi(np.array([[0.0, 1.0]]))[0] < 0
    assert dom.phi(np.array([[0.0, 0.0]]))[0] > 0
    assert abs(dom.phi(np.array([[5.0, 0.4]]))[0]) < 1e-12
    assert not make_zoo("halfspace", normal=[0, -1]).params.get("compact", False)


def test_annulus_contains_ring_only():
    dom = annulus((0.0, 0.0), 0.5, 1.0)
    assert dom.contains(np.array([[0.75, 0.0]]))[0]
    assert not dom.contains(np.array([[0.0, 0.0]]))[0]
    assert not dom.contains(np.array([[1.5, 0.0]]))[0]
    assert dom.surface_area_hint == pytest.approx(2 * math.pi * 1.5)


def test_torus_level_set():
    dom = torus((0.0, 0.0, 0.0), 0.6, 0.25)
    on_tube = np.array([[0.85, 0.0, 0.0], [0.6, 0.0, 0.25], [0.35, 0.0, 0.0]])
    assert np.allclose(dom.phi(on_tube), 0.0, atol=1e-12)
    assert dom.contains(np.array([[0.6, 0.0, 0.0]]))[0]
    assert not dom.contains(np.array([[0.0, 0.0, 0.0]]))[0]


def test_rounded_box_distance():
    dom = rounded_box((0.0, 0.0), (0.5, 0.3), 0.1)
    # flat face: distance to the x = 0.5 face
    assert dom.phi(np.array([[0.9, 0.0]]))[0] == pytest.approx(0.4, abs=1e-12)
    # corner: distance to the rounded arc around (0.4, 0.2)
    corner = np.array([[0.4 + 0.3, 0.2 + 0.4]])
    assert dom.phi(corner)[0] == pytest.approx(0.5 - 0.1, abs=1e-12)
    assert dom.contains(np.array([[0.0, 0.0]]))[0]


def test_rounded_polygon_matches_box():
    square = rounded_polygon(
        [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)], rounding=0.1
    )
    box = rounded_box((0.0, 0.0), (0.6, 0.6), 0.1)
    pts = np.random.default_rng(3).uniform(-1.0, 1.0, size=(128, 2))
    assert np.allclose(square.phi(pts), box.phi(pts), atol=1e-9)


def test_polygon_rejects_bad_input():
    with pytest.raises(BadParamsError):
        rounded_polygon([(0, 0), (1, 0)])
    with pytest.raises(BadParamsError):
        # clockwise orientation
        rounded_polygon([(0, 0), (0, 1), (1, 1), (1, 0)])


def test_translated_and_scaled():
    dom = ball((0.0, 0.0), 1.0)
    moved = dom.translated((2.0, 0.0))
    assert moved.contains(np.array([[2.0, 0.0]]))[0]
    assert not moved.contains(np.array([[0.0, 0.0]]))[0]
    assert np.allclose(moved.bounding_box, dom.bounding_box + np.array([2.0, 0.0]))

    grown = dom.scaled(2.0)
    assert grown.contains(np.array([[1.5, 0.0]]))[0]
    assert grown.phi(np.array([[2.0, 0.0]]))[0] == pytest.approx(0.0, abs=1e-12)
    assert grown.surface_area_hint == pytest.approx(2.0 * dom.surface_area_hint)
    assert grown.volume_hint == pytest.approx(4.0 * dom.volume_hint)


def test_offset_is_outward_sublevel():
    dom = ball((0.0, 0.0), 1.0)
    fat = dom.offset(0.1)
    assert fat.phi(np.array([[1.05, 0.0]]))[0] < 0
    assert fat.phi(np.array([[1.1, 0.0]]))[0] == pytest.approx(0.0, abs=1e-12)
    # negative eta erodes
    thin = dom.offset(-0.1)
    assert not thin.contains(np.array([[0.95, 0.0]]))[0]
    assert thin.contains(np.array([[0.85, 0.0]]))[0]


def test_comb_teeth_and_gaps():
    n = 4
    dom = make_comb(n)
    t = 1.0 / n**2
    # center of each tooth is inside, center of each gap is outside
    for i in range(n):
        y_tooth = i / n + t / 2.0
        assert dom.contains(np.array([[0.5, y_tooth]]))[0], f"tooth {i}"
        y_gap = i / n + t + (1.0 / n - t) / 2.0
        assert not dom.contains(np.array([[0.5, y_gap]]))[0], f"gap {i}"
    # the spine joins the teeth on the left
    assert dom.contains(np.array([[t / 2.0, 0.5]]))[0]
    assert dom.params["n"] == n


def test_comb_needs_room_for_smoothing():
    with pytest.raises(BadParamsError):
        make_comb(2)
    with pytest.raises(BadParamsError):
        make_comb(4, smoothing=1.0)


def test_make_zoo_dispatch():
    dom = make_zoo("ball", center=[0, 0, 0], radius=0.5)
    assert dom.dimension == 3
    with pytest.raises(BadParamsError):
        make_zoo("klein-bottle")
    with pytest.raises(BadParamsError):
        make_zoo("ball", radius=0.5)


def test_circle_loop_closure_and_length():
    loop = circle_loop((0.0, 0.0), 1.0)
    assert np.allclose(loop.point(0.0), loop.point(loop.period), atol=1e-12)
    assert loop.length() == pytest.approx(2 * math.pi, rel=1e-6)
    assert loop.is_embedded_hint


def test_m_cover_wraps_m_times():
    m = 5
    cover = make_m_cover(m)
    assert cover.winding == m
    assert not cover.is_embedded_hint
    assert cover.length() == pytest.approx(m * 2 * math.pi, rel=1e-4)
    ts = np.linspace(0.0, cover.period, 4096, endpoint=False)
    radii = np.linalg.norm(cover.points(ts), axis=1)
    assert np.all(np.abs(radii - 1.0) < 1e-9)


def test_m_cover_perturbation_stays_near_circle():
    cover = make_m_cover(10, perturbation=0.05)
    ts = np.linspace(0.0, cover.period, 8192, endpoint=False)
    radii = np.linalg.norm(cover.points(ts), axis=1)
    assert np.all(radii < 1.06)
    assert np.all(radii > 0.94)
    assert cover.length() >= 10 * 2 * math.pi - 1e-6
