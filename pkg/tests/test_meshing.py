"""Boundary extraction and clipping against analytic areas and lengths."""

import math

import numpy as np
import pytest

from fluxgauge import (
    annulus,
    ball,
    clip_mesh,
    halfspace,
    make_comb,
    mesh_boundary,
    rounded_box,
)
from fluxgauge.errors import BadParamsError


def test_circle_perimeter():
    mesh = mesh_boundary(ball((0.0, 0.0), 1.0), 0.01)
    assert mesh.dimension == 2
    assert mesh.closed
    assert mesh.total_area == pytest.approx(2 * math.pi, rel=1e-3)


def test_circle_vertices_sit_on_the_level_set():
    # linear edge interpolation leaves an O(h^2 * curvature) residue
    dom = ball((0.3, -0.2), 0.8)
    h = 0.02
    mesh = mesh_boundary(dom, h)
    verts = mesh.facet_vertices.reshape(-1, 2)
    assert np.max(np.abs(dom.phi(verts))) < h**2


def test_circle_normals_point_outward():
    dom = ball((0.0, 0.0), 1.0)
    mesh = mesh_boundary(dom, 0.02)
    radial = mesh.centroids / np.linalg.norm(mesh.centroids, axis=1, keepdims=True)
    dots = np.einsum("ij,ij->i", mesh.normals, radial)
    assert np.all(dots > 0.99)
    assert np.allclose(np.linalg.norm(mesh.normals, axis=1), 1.0, atol=1e-12)


def test_sphere_area():
    mesh = mesh_boundary(ball((0.0, 0.0, 0.0), 1.0), 1.0 / 32.0)
    assert mesh.dimension == 3
    assert mesh.total_area == pytest.approx(4 * math.pi, rel=1e-2)


def test_sphere_normals_point_outward():
    mesh = mesh_boundary(ball((0.0, 0.0, 0.0), 1.0), 1.0 / 16.0)
    radial = mesh.centroids / np.linalg.norm(mesh.centroids, axis=1, keepdims=True)
    dots = np.einsum("ij,ij->i", mesh.normals, radial)
    assert np.all(dots > 0.9)


def test_annulus_perimeter_counts_both_circles():
    mesh = mesh_boundary(annulus((0.0, 0.0), 0.5, 1.0), 0.01)
    assert mesh.total_area == pytest.approx(2 * math.pi * 1.5, rel=1e-3)


def test_comb_perimeter_tracks_tooth_count():
    for n in (4, 8):
        dom = make_comb(n)
        pitch = (1.0 / n**2) / 8.0
        mesh = mesh_boundary(dom, pitch)
        assert mesh.total_area == pytest.approx(2 * n + 2, rel=0.15), n


def test_resolution_must_resolve_the_box():
    with pytest.raises(BadParamsError):
        mesh_boundary(ball((0.0, 0.0), 0.01), 0.25)


def test_clip_circle_by_halfplane():
    circle = mesh_boundary(ball((0.0, 0.0), 1.0), 0.005)
    upper = halfspace((0.0, -1.0), 0.0, extent=1.8)
    clipped = clip_mesh(circle, upper)
    assert clipped.total_area == pytest.approx(math.pi, rel=1e-3)
    assert np.all(clipped.centroids[:, 1] >= -1e-6)


def test_clip_refinement_sharpens_the_cut():
    circle = mesh_boundary(ball((0.0, 0.0), 1.0), 0.02)
    window = ball((1.0, 0.0), 0.5)
    rough = clip_mesh(circle, window, refine_depth=0)
    fine = clip_mesh(circle, window, refine_depth=8)
    # arc of the unit circle inside a disk of radius 0.5 about (1, 0):
    # endpoints at angle +-2*asin(0.25); arc length 4*asin(0.25)
    exact = 4.0 * math.asin(0.25)
    assert abs(fine.total_area - exact) < abs(rough.total_area - exact) + 1e-12
    assert fine.total_area == pytest.approx(exact, rel=1e-3)


def test_clip_to_nothing_gives_empty_mesh():
    circle = mesh_boundary(ball((0.0, 0.0), 1.0), 0.02)
    faraway = ball((5.0, 0.0), 0.5)
    clipped = clip_mesh(circle, faraway)
    assert len(clipped.areas) == 0
    assert clipped.total_area == 0.0
    assert not clipped.closed


def test_clip_is_conservative():
    # clipped pieces never exceed their parents in total measure
    sphere = mesh_boundary(ball((0.0, 0.0, 0.0), 1.0), 1.0 / 24.0)
    window = ball((0.0, 0.0, 1.0), 0.8)
    clipped = clip_mesh(sphere, window)
    assert 0.0 < clipped.total_area < sphere.total_area
    assert not clipped.closed


def test_clip_sphere_cap_area():
    # cap cut by the plane z >= 0.5: area 2*pi*r*h with h = 0.5
    sphere = mesh_boundary(ball((0.0, 0.0, 0.0), 1.0), 1.0 / 48.0)
    upper = halfspace((0.0, 0.0, -1.0), -0.5, extent=1.6)
    cap = clip_mesh(sphere, upper)
    assert cap.total_area == pytest.approx(2 * math.pi * 0.5, rel=2e-2)


def test_box_mesh_matches_perimeter_hint():
    dom = rounded_box((0.0, 0.0), (0.5, 0.3), 0.1)
    mesh = mesh_boundary(dom, 0.005)
    # straight sides minus the cut corners plus the four arcs
    exact = 2 * (2 * 0.5) + 2 * (2 * 0.3) - 8 * 0.1 + 2 * math.pi * 0.1
    assert mesh.total_area == pytest.approx(exact, rel=1e-3)


def test_subset_keeps_selected_facets():
    mesh = mesh_boundary(ball((0.0, 0.0), 1.0), 0.05)
    mask = mesh.centroids[:, 0] > 0.0
    right = mesh.subset(mask)
    assert len(right.areas) == int(mask.sum())
    assert right.total_area == pytest.approx(mesh.areas[mask].sum())
    assert not right.closed


def test_meshes_are_deterministic():
    dom = make_comb(4)
    a = mesh_boundary(dom, 1.0 / 256.0)
    b = mesh_boundary(dom, 1.0 / 256.0)
    assert np.array_equal(a.facet_vertices, b.facet_vertices)
    assert a.total_area == b.total_area
