"""Catalog fields: values, divergences, and sup estimates."""

import numpy as np
import pytest

from fluxgauge import ball, field_catalog, sup_norms
from fluxgauge.errors import BadParamsError


def rand_points(dim, n=64, seed=5):
    return np.random.default_rng(seed).uniform(-1.2, 1.2, size=(n, dim))


def test_constant_field():
    f = field_catalog("constant", 2, v=[2.0, -1.0])
    pts = rand_points(2)
    vals = f(pts)
    assert np.allclose(vals, [2.0, -1.0])
    assert np.allclose(f.divergence(pts), 0.0)
    assert f.divergence_free


def test_constant_default_is_last_axis():
    assert np.allclose(field_catalog("constant", 3)(rand_points(3, 4)), [0, 0, 1])


def test_identity_divergence_is_dimension():
    for dim in (2, 3):
        f = field_catalog("identity", dim)
        pts = rand_points(dim)
        assert np.allclose(f(pts), pts)
        assert np.allclose(f.divergence(pts), float(dim))
        assert not f.divergence_free


def test_rotation_is_tangent_and_divergence_free():
    f = field_catalog("rotation", 2)
    pts = rand_points(2)
    # perpendicular to the position vector everywhere
    assert np.allclose(np.einsum("ij,ij->i", f(pts), pts), 0.0, atol=1e-12)
    assert np.allclose(f.divergence(pts), 0.0)
    assert f.divergence_free


def test_shear_rate_scales_output():
    f1 = field_catalog("shear", 2)
    f2 = field_catalog("shear", 2, rate=2.5)
    pts = rand_points(2)
    assert np.allclose(f2(pts), 2.5 * f1(pts))
    assert f2.divergence_free


def test_poly_divergence_matches_finite_differences():
    eps = 1e-6
    for dim in (2, 3):
        f = field_catalog("poly", dim)
        pts = rand_points(dim, 32)
        fd = np.zeros(len(pts))
        for k in range(dim):
            step = np.zeros(dim)
            step[k] = eps
            fd += (f(pts + step)[:, k] - f(pts - step)[:, k]) / (2 * eps)
        assert np.allclose(f.divergence(pts), fd, atol=1e-5)


def test_saddle_is_3d_only():
    f = field_catalog("saddle", 3)
    assert np.allclose(f.divergence(rand_points(3)), 0.0)
    with pytest.raises(BadParamsError):
        field_catalog("saddle", 2)


def test_unknown_name_and_params_rejected():
    with pytest.raises(BadParamsError):
        field_catalog("vortex", 2)
    with pytest.raises(BadParamsError):
        field_catalog("constant", 2, vector=[1.0, 0.0])
    with pytest.raises(BadParamsError):
        field_catalog("identity", 2, rate=2.0)
    with pytest.raises(BadParamsError):
        field_catalog("constant", 3, v=[1.0, 0.0])


def test_limit_cycle_vanishes_on_unit_circle_radially():
    f = field_catalog("limit_cycle", 2)
    theta = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    vals = f(pts)
    # on the cycle the radial component is zero and the motion is ccw rotation
    radial = np.einsum("ij,ij->i", vals, pts)
    assert np.allclose(radial, 0.0, atol=1e-12)
    tangents = np.column_stack([-pts[:, 1], pts[:, 0]])
    assert np.all(np.einsum("ij,ij->i", vals, tangents) > 0)


def test_sup_norms_on_the_unit_disk():
    s = sup_norms(field_catalog("identity", 2), ball((0.0, 0.0), 1.0))
    assert s.exact_sup_f == pytest.approx(1.0)
    assert s.exact_sup_div == pytest.approx(2.0)
    # sampled values never exceed the exact sup
    assert s.sup_f <= 1.0 + 1e-12
    assert s.samples_inside > 1000


def test_sup_norms_sampled_fallback_is_close():
    # poly has no exact sup on an offset disk; the sample sup approaches it
    s = sup_norms(field_catalog("poly", 2), ball((0.5, 0.0), 0.5), samples=8192)
    # sup over the disk of |(x^2, xy)| = max at x = 1: magnitude 1
    assert s.sup_f == pytest.approx(1.0, abs=0.05)
    assert s.sup_div == pytest.approx(3.0, abs=0.05)
