"""Boundary extraction and facet meshes.

The boundary of ``{phi <= 0}`` is discretised on a uniform grid of pitch h:
marching squares in dimension 2 (segments) and marching cubes in dimension 3
(triangles).  Facet normals are the geometric facet normals oriented toward
``{phi > 0}``, verified by probing phi on both sides of each centroid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage.measure import marching_cubes as _skimage_marching_cubes

from ..errors import (
    BadParamsError,
    DimensionMismatchError,
    EmptyBoundaryError,
    EmptyMeshError,
    ResolutionTooCoarseError,
)
from .implicit import ImplicitDomain

__all__ = ["SurfaceMesh", "mesh_boundary", "clip_mesh", "mesh_to_csv", "mesh_to_svg"]

# Grid nodes are shifted by an arbitrary sub-cell fraction so that axis-aligned
# boundaries never coincide with grid lines (which would create degenerate,
# zero-length facets).
_GRID_SHIFT = 0.5371
_POINT_CHUNK = 1 << 21


def _eval_chunked(domain: ImplicitDomain, pts: np.ndarray) -> np.ndarray:
    out = np.empty(len(pts))
    for s in range(0, len(pts), _POINT_CHUNK):
        out[s : s + _POINT_CHUNK] = domain.level_fn(pts[s : s + _POINT_CHUNK])
    return out


@dataclass(frozen=True)
class SurfaceMesh:
    """Flat facet soup: segments (d=2) or triangles (d=3).

    ``facet_vertices`` has shape (n, 2, 2) or (n, 3, 3); ``areas`` are segment
    lengths or triangle areas; ``normals`` are unit vectors pointing out of the
    originating domain.
    """

    dimension: int
    facet_vertices: np.ndarray
    areas: np.ndarray
    normals: np.ndarray
    centroids: np.ndarray
    source_label: str = "mesh"
    resolution: float | None = None
    closed: bool = False

    def __post_init__(self):
        n = len(self.areas)
        if self.facet_vertices.shape[0] != n or self.normals.shape[0] != n:
            raise BadParamsError("inconsistent facet arrays")

    def __len__(self) -> int:
        return len(self.areas)

    @property
    def total_area(self) -> float:
        return math.fsum(self.areas.tolist())

    def subset(self, mask_or_index) -> "SurfaceMesh":
        return SurfaceMesh(
            dimension=self.dimension,
            facet_vertices=self.facet_vertices[mask_or_index],
            areas=self.areas[mask_or_index],
            normals=self.normals[mask_or_index],
            centroids=self.centroids[mask_or_index],
            source_label=self.source_label,
            resolution=self.resolution,
            closed=False,
        )


def _facet_geometry(verts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Areas, unit normals (arbitrary side), centroids for a facet array."""
    if verts.shape[1] == 2:  # segments
        d = verts[:, 1] - verts[:, 0]
        lengths = np.linalg.norm(d, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            normals = np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]
        centroids = verts.mean(axis=1)
        return lengths, normals, centroids
    cross = np.cross(verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0])
    nrm = np.linalg.norm(cross, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        normals = cross / nrm[:, None]
    return 0.5 * nrm, normals, verts.mean(axis=1)


def _orient_outward(
    domain: ImplicitDomain, verts: np.ndarray, eps: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Drop degenerate facets and flip normals so phi increases along them."""
    areas, normals, centroids = _facet_geometry(verts)
    keep = areas > 1e-12 * max(eps, 1e-30)
    verts, areas, normals, centroids = (
        verts[keep],
        areas[keep],
        normals[keep],
        centroids[keep],
    )
    if len(verts):
        ahead = _eval_chunked(domain, centroids + eps * normals)
        behind = _eval_chunked(domain, centroids - eps * normals)
        flip = ahead < behind
        if np.any(flip):
            normals[flip] *= -1.0
            verts[flip] = verts[flip, ::-1]
    return verts, areas, normals, centroids


# ---------------------------------------------------------------------------
# marching squares
# ---------------------------------------------------------------------------

# Case -> directed (start_edge, end_edge) pairs, with the interior kept on the
# left of each segment so the right-hand normal points outward.  Edges are
# 0: bottom, 1: right, 2: top, 3: left; corner bit k set means corner k is
# inside, corners ordered (lo,lo), (hi,lo), (hi,hi), (lo,hi).
_SEGMENTS = {
    1: ((0, 3),),
    2: ((1, 0),),
    3: ((1, 3),),
    4: ((2, 1),),
    6: ((2, 0),),
    7: ((2, 3),),
    8: ((3, 2),),
    9: ((0, 2),),
    11: ((1, 2),),
    12: ((3, 1),),
    13: ((0, 1),),
    14: ((3, 0),),
}
# Saddle cells carry two segments; the cell-centre sign picks the topology.
_SADDLES = {
    5: {True: ((0, 1), (2, 3)), False: ((0, 3), (2, 1))},
    10: {True: ((3, 0), (1, 2)), False: ((1, 0), (3, 2))},
}


def _axis_nodes(box: np.ndarray, h: float) -> list[np.ndarray]:
    axes = []
    for lo, hi in zip(box[0], box[1]):
        start = lo - (2.0 + _GRID_SHIFT) * h
        count = int(math.ceil((hi - start) / h)) + 3
        axes.append(start + h * np.arange(count))
    return axes


def _marching_squares(domain: ImplicitDomain, h: float, ambiguous_limit):
    xs, ys = _axis_nodes(domain.bounding_box, h)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    f = _eval_chunked(domain, grid.reshape(-1, 2)).reshape(len(xs), len(ys))
    inside = f <= 0.0

    b0 = inside[:-1, :-1]
    b1 = inside[1:, :-1]
    b2 = inside[1:, 1:]
    b3 = inside[:-1, 1:]
    case = (
        b0.astype(np.uint8)
        | (b1.astype(np.uint8) << 1)
        | (b2.astype(np.uint8) << 2)
        | (b3.astype(np.uint8) << 3)
    )
    crossing = (case != 0) & (case != 15)
    if not crossing.any():
        raise EmptyBoundaryError(
            f"no boundary of {domain.label} inside its bounding box at h={h:g}"
        )

    n_saddles = int(np.isin(case, (5, 10)).sum())
    limit = ambiguous_limit
    if limit is None:
        limit = 8 + int(0.02 * crossing.sum())
    if n_saddles > limit:
        raise ResolutionTooCoarseError(
            f"{n_saddles} ambiguous cells at h={h:g} exceed the limit {limit}"
        )

    touches_border = bool(
        crossing[0, :].any()
        or crossing[-1, :].any()
        or crossing[:, 0].any()
        or crossing[:, -1].any()
    )

    def edge_points(eid, ci, cj):
        f0, f1 = f[ci, cj], f[ci + 1, cj]
        f2, f3 = f[ci + 1, cj + 1], f[ci, cj + 1]
        if eid == 0:
            t = f0 / (f0 - f1)
            return np.column_stack([xs[ci] + t * h, ys[cj]])
        if eid == 1:
            t = f1 / (f1 - f2)
            return np.column_stack([xs[ci + 1], ys[cj] + t * h])
        if eid == 2:
            t = f3 / (f3 - f2)
            return np.column_stack([xs[ci] + t * h, ys[cj + 1]])
        t = f0 / (f0 - f3)
        return np.column_stack([xs[ci], ys[cj] + t * h])

    pieces = []
    for code, segs in _SEGMENTS.items():
        ci, cj = np.nonzero(case == code)
        if len(ci) == 0:
            continue
        for a, b in segs:
            pieces.append(np.stack([edge_points(a, ci, cj), edge_points(b, ci, cj)], axis=1))
    for code, variants in _SADDLES.items():
        ci, cj = np.nonzero(case == code)
        if len(ci) == 0:
            continue
        centers = np.column_stack([xs[ci] + 0.5 * h, ys[cj] + 0.5 * h])
        center_inside = domain.level_fn(centers) <= 0.0
        for flag in (True, False):
            sel = center_inside if flag else ~center_inside
            if not sel.any():
                continue
            for a, b in variants[flag]:
                pieces.append(
                    np.stack(
                        [edge_points(a, ci[sel], cj[sel]), edge_points(b, ci[sel], cj[sel])],
                        axis=1,
                    )
                )
    verts = np.concatenate(pieces, axis=0)
    return verts, not touches_border


# ---------------------------------------------------------------------------
# marching cubes
# ---------------------------------------------------------------------------


def _marching_cubes(domain: ImplicitDomain, h: float):
    axes = _axis_nodes(domain.bounding_box, h)
    nx, ny, nz = (len(a) for a in axes)
    f = np.empty((nx, ny, nz))
    # Fill slab-by-slab to keep peak memory at one grid copy.
    yz = np.stack(np.meshgrid(axes[1], axes[2], indexing="ij"), axis=-1).reshape(-1, 2)
    plane = np.empty((len(yz), 3))
    plane[:, 1:] = yz
    for i, x in enumerate(axes[0]):
        plane[:, 0] = x
        f[i] = domain.level_fn(plane).reshape(ny, nz)

    inside = f <= 0.0
    if not inside.any() or inside.all():
        raise EmptyBoundaryError(
            f"no boundary of {domain.label} inside its bounding box at h={h:g}"
        )
    crossing = inside[:-1, :-1, :-1]
    for sx in (0, 1):
        for sy in (0, 1):
            for sz in (0, 1):
                crossing = crossing ^ inside[sx : sx + nx - 1, sy : sy + ny - 1, sz : sz + nz - 1]

    touches_border = bool(
        inside[0].any() or inside[-1].any()
        or inside[:, 0].any() or inside[:, -1].any()
        or inside[:, :, 0].any() or inside[:, :, -1].any()
    )
    try:
        verts, faces, _, _ = _skimage_marching_cubes(
            f, level=0.0, spacing=(h, h, h), allow_degenerate=False
        )
    except (ValueError, RuntimeError) as exc:
        raise EmptyBoundaryError(f"isosurface extraction failed: {exc}") from exc
    origin = np.array([axes[0][0], axes[1][0], axes[2][0]])
    tri = verts[faces] + origin
    return tri, not touches_border


def mesh_boundary(
    domain: ImplicitDomain, resolution: float, ambiguous_limit: int | None = None
) -> SurfaceMesh:
    """Mesh the zero level set of ``domain`` at grid pitch ``resolution``.

    Returns a facet mesh with outward unit normals.  Raises EMPTY_BOUNDARY
    when the level set misses the bounding box and RESOLUTION_TOO_COARSE
    when too many grid cells are topologically ambiguous (d=2).
    """
    h = float(resolution)
    if h <= 0:
        raise BadParamsError("resolution must be positive")
    span = float(np.min(domain.bounding_box[1] - domain.bounding_box[0]))
    if h > span:
        raise BadParamsError(f"resolution {h:g} exceeds the bounding box span {span:g}")

    if domain.dimension == 2:
        verts, closed = _marching_squares(domain, h, ambiguous_limit)
    elif domain.dimension == 3:
        verts, closed = _marching_cubes(domain, h)
    else:
        raise BadParamsError("meshing supports dimensions 2 and 3")

    verts, areas, normals, centroids = _orient_outward(domain, verts, eps=0.5 * h)
    if len(verts) == 0:
        raise EmptyBoundaryError(f"all candidate facets of {domain.label} were degenerate")
    return SurfaceMesh(
        dimension=domain.dimension,
        facet_vertices=verts,
        areas=areas,
        normals=normals,
        centroids=centroids,
        source_label=domain.label,
        resolution=h,
        closed=closed,
    )


# ---------------------------------------------------------------------------
# clipping
# ---------------------------------------------------------------------------


def _split_segments(verts: np.ndarray) -> np.ndarray:
    mid = verts.mean(axis=1, keepdims=True)
    first = np.concatenate([verts[:, :1], mid], axis=1)
    second = np.concatenate([mid, verts[:, 1:]], axis=1)
    return np.concatenate([first, second], axis=0)


def _split_triangles(verts: np.ndarray) -> np.ndarray:
    a, b, c = verts[:, 0], verts[:, 1], verts[:, 2]
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    children = [
        np.stack([a, ab, ca], axis=1),
        np.stack([ab, b, bc], axis=1),
        np.stack([ca, bc, c], axis=1),
        np.stack([ab, bc, ca], axis=1),
    ]
    return np.concatenate(children, axis=0)


def clip_mesh(surface: SurfaceMesh, clip: ImplicitDomain, refine_depth: int = 8) -> SurfaceMesh:
    """Facets of ``surface`` lying inside ``clip`` (phi <= 0, ties inside).

    Facets whose vertices straddle the clip boundary are bisected
    ``refine_depth`` times before centroid classification, so misclassified
    area shrinks like 2**-refine_depth.
    """
    if surface.dimension != clip.dimension:
        raise DimensionMismatchError("mesh and clip domain dimensions differ")
    band = clip.eps_band
    depth = int(refine_depth)
    split = _split_segments if surface.dimension == 2 else _split_triangles

    kept = []
    verts = surface.facet_vertices
    for level in range(depth + 1):
        if len(verts) == 0:
            break
        flat = verts.reshape(-1, surface.dimension)
        vert_in = (clip.phi(flat) <= band).reshape(len(verts), -1)
        n_in = vert_in.sum(axis=1)
        straddle = (n_in > 0) & (n_in < vert_in.shape[1])
        if level == depth:
            straddle[:] = False
        settled = verts[~straddle]
        if len(settled):
            inside = clip.phi(settled.mean(axis=1)) <= band
            if inside.any():
                kept.append(settled[inside])
        verts = split(verts[straddle]) if straddle.any() else verts[:0]

    if not kept:
        empty = np.empty((0,) + surface.facet_vertices.shape[1:])
        return SurfaceMesh(
            dimension=surface.dimension,
            facet_vertices=empty,
            areas=np.empty(0),
            normals=np.empty((0, surface.dimension)),
            centroids=np.empty((0, surface.dimension)),
            source_label=f"{surface.source_label}|clip({clip.label})",
            resolution=surface.resolution,
            closed=False,
        )

    out = np.concatenate(kept, axis=0)
    areas, normals, centroids = _facet_geometry(out)
    ok = areas > 0
    out, areas, normals, centroids = out[ok], areas[ok], normals[ok], centroids[ok]
    # Splitting preserves vertex order, so children keep the parent's outward
    # geometric normal; no re-orientation probe is needed here.
    return SurfaceMesh(
        dimension=surface.dimension,
        facet_vertices=out,
        areas=areas,
        normals=normals,
        centroids=centroids,
        source_label=f"{surface.source_label}|clip({clip.label})",
        resolution=surface.resolution,
        closed=False,
    )


# ---------------------------------------------------------------------------
# interchange
# ---------------------------------------------------------------------------


def mesh_to_csv(mesh: SurfaceMesh, path) -> Path:
    """Write one row per facet: id, vertex coordinates, area, normal."""
    path = Path(path)
    nv = mesh.facet_vertices.shape[1] if len(mesh) else mesh.dimension
    axes = "xyz"[: mesh.dimension]
    header = ["facet_id"]
    for k in range(nv):
        header += [f"v{k}{ax}" for ax in axes]
    header += ["area"] + [f"n{ax}" for ax in axes]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(mesh)):
            row = [i]
            row += [f"{c:.17g}" for c in mesh.facet_vertices[i].ravel()]
            row += [f"{mesh.areas[i]:.17g}"]
            row += [f"{c:.17g}" for c in mesh.normals[i]]
            writer.writerow(row)
    return path


def mesh_to_svg(mesh: SurfaceMesh, path) -> Path:
    """Render a planar mesh to an SVG polyline figure."""
    if mesh.dimension != 2:
        raise BadParamsError("SVG interchange is defined for planar meshes")
    if len(mesh) == 0:
        raise EmptyMeshError("cannot render an empty mesh")
    from ..figures import render_mesh_svg

    return render_mesh_svg(mesh, path)
