"""Catalog of implicit domains with exact or near-exact distance functions."""

from __future__ import annotations

import math

import numpy as np

from ..errors import BadParamsError
from .implicit import ImplicitDomain

__all__ = [
    "ball",
    "halfspace",
    "annulus",
    "torus",
    "rounded_box",
    "rounded_polygon",
    "make_comb",
    "make_zoo",
]


def _box_for(center: np.ndarray, reach: float) -> np.ndarray:
    pad = max(0.04 * reach, 0.02)
    return np.array([center - (reach + pad), center + (reach + pad)])


def ball(center, radius: float) -> ImplicitDomain:
    """Euclidean ball; phi is the exact signed distance |x - c| - r."""
    c = np.asarray(center, dtype=float)
    r = float(radius)
    if r <= 0:
        raise BadParamsError("ball radius must be positive")
    d = c.size

    def level(p):
        return np.linalg.norm(p - c, axis=1) - r

    def grad(p):
        diff = p - c
        nrm = np.linalg.norm(diff, axis=1, keepdims=True)
        return np.divide(diff, nrm, out=np.zeros_like(diff), where=nrm > 0)

    area = 2.0 * math.pi * r if d == 2 else 4.0 * math.pi * r * r
    vol = math.pi * r * r if d == 2 else 4.0 / 3.0 * math.pi * r**3
    return ImplicitDomain(
        level_fn=level,
        dimension=d,
        bounding_box=_box_for(c, r),
        label=f"ball(r={r:g})",
        exact_sdf=True,
        gradient_fn=grad,
        kind="ball",
        params={"center": tuple(c.tolist()), "radius": r},
        surface_area_hint=area,
        volume_hint=vol,
    )


def halfspace(normal, offset: float = 0.0, extent: float = 3.0) -> ImplicitDomain:
    """Half-space ``{n . x <= offset}`` with outward unit normal ``n``.

    Unbounded, so the bounding box is a region of interest of half-width
    ``extent`` centered at the nearest boundary point to the origin.
    """
    n = np.asarray(normal, dtype=float)
    nrm = float(np.linalg.norm(n))
    if nrm == 0:
        raise BadParamsError("half-space normal must be nonzero")
    n = n / nrm
    b = float(offset) / nrm
    d = n.size
    anchor = n * b

    def level(p):
        return p @ n - b

    return ImplicitDomain(
        level_fn=level,
        dimension=d,
        bounding_box=np.array([anchor - extent, anchor + extent]),
        label="halfspace",
        exact_sdf=True,
        gradient_fn=lambda p: np.broadcast_to(n, p.shape).copy(),
        kind="halfspace",
        params={"normal": tuple(n.tolist()), "offset": b, "extent": extent},
    )


def annulus(center, r_inner: float, r_outer: float) -> ImplicitDomain:
    """Spherical shell ``{r_inner <= |x - c| <= r_outer}`` (any dimension)."""
    c = np.asarray(center, dtype=float)
    ri, ro = float(r_inner), float(r_outer)
    if not 0 < ri < ro:
        raise BadParamsError("annulus needs 0 < r_inner < r_outer")
    d = c.size

    def level(p):
        rho = np.linalg.norm(p - c, axis=1)
        return np.maximum(ri - rho, rho - ro)

    if d == 2:
        area, vol = 2 * math.pi * (ri + ro), math.pi * (ro**2 - ri**2)
    else:
        area = 4 * math.pi * (ri**2 + ro**2)
        vol = 4.0 / 3.0 * math.pi * (ro**3 - ri**3)
    return ImplicitDomain(
        level_fn=level,
        dimension=d,
        bounding_box=_box_for(c, ro),
        label=f"annulus({ri:g},{ro:g})",
        exact_sdf=True,
        kind="annulus",
        params={"center": tuple(c.tolist()), "r_inner": ri, "r_outer": ro},
        surface_area_hint=area,
        volume_hint=vol,
    )


def torus(center, major: float, minor: float) -> ImplicitDomain:
    """Solid torus about the z-axis through ``center`` (dimension 3)."""
    c = np.asarray(center, dtype=float)
    if c.size != 3:
        raise BadParamsError("torus lives in dimension 3")
    R, r = float(major), float(minor)
    if not 0 < r < R:
        raise BadParamsError("torus needs 0 < minor < major")

    def level(p):
        q = p - c
        ring = np.hypot(np.hypot(q[:, 0], q[:, 1]) - R, q[:, 2])
        return ring - r

    lo = c - np.array([R + r, R + r, r])
    hi = c + np.array([R + r, R + r, r])
    pad = max(0.04 * r, 0.02)
    return ImplicitDomain(
        level_fn=level,
        dimension=3,
        bounding_box=np.array([lo - pad, hi + pad]),
        label=f"torus({R:g},{r:g})",
        exact_sdf=True,
        kind="torus",
        params={"center": tuple(c.tolist()), "major": R, "minor": r},
        surface_area_hint=4 * math.pi**2 * R * r,
        volume_hint=2 * math.pi**2 * R * r**2,
    )


def _round_box_level(p: np.ndarray, center: np.ndarray, core_half: np.ndarray, rounding: float):
    q = np.abs(p - center) - core_half
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
    inside = np.minimum(np.max(q, axis=1), 0.0)
    return outside + inside - rounding


def rounded_box(center, half_extents, rounding: float = 0.0) -> ImplicitDomain:
    """Axis-aligned box with corners rounded at radius ``rounding``.

    ``half_extents`` are the outer half-widths; the core box is shrunk by the
    rounding radius and re-inflated, so outer dimensions are preserved and the
    boundary is C^1 for rounding > 0.  phi is an exact signed distance.
    """
    c = np.asarray(center, dtype=float)
    half = np.asarray(half_extents, dtype=float)
    rho = float(rounding)
    if half.shape != c.shape or np.any(half <= 0):
        raise BadParamsError("box half extents must be positive and match center")
    if rho < 0 or rho >= np.min(half):
        raise BadParamsError("rounding must satisfy 0 <= rounding < min(half_extents)")
    core = half - rho
    d = c.size

    hp = core  # core half-widths, used by the Steiner-formula hints below
    if d == 2:
        area_hint = 4 * (hp[0] + hp[1]) + 2 * math.pi * rho
        vol_hint = 4 * hp[0] * hp[1] + 4 * rho * (hp[0] + hp[1]) + math.pi * rho**2
    elif d == 3:
        s2 = hp[0] * hp[1] + hp[1] * hp[2] + hp[0] * hp[2]
        s1 = hp[0] + hp[1] + hp[2]
        area_hint = 8 * s2 + 4 * math.pi * rho * s1 + 4 * math.pi * rho**2
        vol_hint = (
            8 * hp[0] * hp[1] * hp[2]
            + 8 * rho * s2
            + 2 * math.pi * rho**2 * s1
            + 4.0 / 3.0 * math.pi * rho**3
        )
    else:
        area_hint = vol_hint = None

    pad = max(0.04 * float(np.max(half)), 0.02)
    return ImplicitDomain(
        level_fn=lambda p: _round_box_level(p, c, core, rho),
        dimension=d,
        bounding_box=np.array([c - half - pad, c + half + pad]),
        label=f"box(half={tuple(np.round(half, 6).tolist())},rho={rho:g})",
        exact_sdf=True,
        kind="box",
        params={
            "center": tuple(c.tolist()),
            "half_extents": tuple(half.tolist()),
            "rounding": rho,
        },
        surface_area_hint=area_hint,
        volume_hint=vol_hint,
    )


def rounded_polygon(vertices, rounding: float = 0.0) -> ImplicitDomain:
    """Convex polygon (CCW vertices) dilated by ``rounding``; exact distance.

    The supplied vertices describe the core polygon; the domain is its
    Minkowski sum with a disk of radius ``rounding``.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise BadParamsError("polygon needs >= 3 planar vertices")
    rho = float(rounding)
    if rho < 0:
        raise BadParamsError("rounding must be nonnegative")
    edges = np.roll(v, -1, axis=0) - v

    def cross2(a, b):
        return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]

    if np.any(cross2(edges, np.roll(edges, -1, axis=0)) <= 0):
        raise BadParamsError("vertices must describe a strictly convex CCW polygon")

    def level(p):
        # Unsigned distance to the polygon outline, signed by half-plane test.
        d2 = np.full(len(p), np.inf)
        inside = np.ones(len(p), dtype=bool)
        for a, e in zip(v, edges):
            w = p - a
            t = np.clip((w @ e) / (e @ e), 0.0, 1.0)
            proj = w - t[:, None] * e
            d2 = np.minimum(d2, np.einsum("ij,ij->i", proj, proj))
            inside &= cross2(e, w) >= 0
        dist = np.sqrt(d2)
        return np.where(inside, -dist, dist) - rho

    perim = float(np.sum(np.linalg.norm(edges, axis=1)))
    core_area = 0.5 * float(np.sum(cross2(v, np.roll(v, -1, axis=0))))
    lo, hi = v.min(axis=0) - rho, v.max(axis=0) + rho
    pad = max(0.04 * float(np.max(hi - lo)), 0.02)
    return ImplicitDomain(
        level_fn=level,
        dimension=2,
        bounding_box=np.array([lo - pad, hi + pad]),
        label=f"polygon[{len(v)}]",
        exact_sdf=True,
        kind="polygon",
        params={"vertices": [tuple(p) for p in v.tolist()], "rounding": rho},
        surface_area_hint=perim + 2 * math.pi * rho,
        volume_hint=core_area + rho * perim + math.pi * rho**2,
    )


def make_comb(n: int, smoothing: float | None = None) -> ImplicitDomain:
    """Comb domain in the unit square: n horizontal teeth plus a left spine.

    Tooth i occupies ``{(x, y) : 0 <= x <= 1, i/n <= y <= i/n + 1/n^2}`` and
    the spine is ``{0 <= x <= 1/n^2, 0 <= y <= 1}``.  Corners are rounded at
    scale ``smoothing`` (default ``1/(8 n^2)``).  As n grows the boundary
    measure grows like 2n + 2 while the domain stays inside the unit square.
    """
    n = int(n)
    if n <= 2:
        raise BadParamsError("comb needs n > 2")
    t = 1.0 / n**2  # tooth thickness and spine width
    rho = t / 8.0 if smoothing is None else float(smoothing)
    if not 0 <= rho < t / 4.0:
        raise BadParamsError("comb smoothing must satisfy 0 <= rho < 1/(4 n^2)")

    tooth_half = np.array([0.5, t / 2.0]) - rho
    spine_center = np.array([t / 2.0, 0.5])
    spine_half = np.array([t / 2.0, 0.5]) - rho
    period = 1.0 / n

    def level(p):
        # Teeth are identical and uniformly spaced, so fold y onto the nearest
        # tooth instead of taking a min over all n boxes.
        idx = np.clip(np.round((p[:, 1] - t / 2.0) / period), 0, n - 1)
        tooth_center_y = idx * period + t / 2.0
        q = np.column_stack([p[:, 0] - 0.5, p[:, 1] - tooth_center_y])
        qa = np.abs(q) - tooth_half
        teeth = (
            np.linalg.norm(np.maximum(qa, 0.0), axis=1)
            + np.minimum(np.max(qa, axis=1), 0.0)
            - rho
        )
        spine = _round_box_level(p, spine_center, spine_half, rho)
        return np.minimum(teeth, spine)

    pad = 0.02
    return ImplicitDomain(
        level_fn=level,
        dimension=2,
        bounding_box=np.array([[-pad, -pad], [1.0 + pad, 1.0 + pad]]),
        label=f"comb(n={n})",
        exact_sdf=False,
        kind="comb",
        params={"n": n, "smoothing": rho},
    )


_ZOO = {
    "ball": ball,
    "halfspace": halfspace,
    "annulus": annulus,
    "torus": torus,
    "box": rounded_box,
    "polygon": rounded_polygon,
    "comb": make_comb,
}


def make_zoo(name: str, **params) -> ImplicitDomain:
    """Construct a catalog domain by name; raises BAD_PARAMS for unknowns."""
    try:
        factory = _ZOO[name]
    except KeyError:
        raise BadParamsError(f"unknown domain {name!r}; choices: {sorted(_ZOO)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise BadParamsError(f"bad parameters for {name!r}: {exc}") from None
