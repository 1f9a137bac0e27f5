"""Deterministic SVG figure rendering.

All figures go through one savefig wrapper that pins the SVG hash salt and
strips the creation date, so identical inputs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402

from .errors import BadParamsError  # noqa: E402

__all__ = [
    "save_svg",
    "render_mesh_svg",
    "render_heat_map",
    "render_phase_portrait",
    "render_convergence",
    "render_lhs_rhs",
]

plt.rcParams["svg.hashsalt"] = "fluxgauge"
plt.rcParams["svg.fonttype"] = "path"


def save_svg(fig, path) -> Path:
    """Write a figure as SVG with reproducible bytes."""
    path = Path(path)
    if path.suffix != ".svg":
        path = path.with_suffix(".svg")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _domain_contour(ax, domain, levels=(0.0,), color="tab:gray", resolution=256):
    lo, hi = domain.bounding_box
    xs = np.linspace(lo[0], hi[0], resolution)
    ys = np.linspace(lo[1], hi[1], resolution)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    phi = domain.phi(pts).reshape(gx.shape)
    ax.contour(gx, gy, phi, levels=list(levels), colors=[color], linewidths=0.8)


def render_mesh_svg(mesh, path, clip_domain=None, title=None) -> Path:
    """Planar mesh as segments; 3-d mesh as flat-projected triangles."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    if mesh.dimension == 2:
        segs = mesh.facet_vertices
        ax.add_collection(LineCollection(segs, colors="tab:blue", linewidths=0.7))
        if clip_domain is not None:
            _domain_contour(ax, clip_domain)
        flat = mesh.facet_vertices.reshape(-1, 2)
    elif mesh.dimension == 3:
        tris = mesh.facet_vertices[:, :, :2]
        depth = mesh.centroids[:, 2]
        order = np.argsort(depth, kind="stable")
        shade = 0.35 + 0.5 * (mesh.normals[order, 2] + 1.0) / 2.0
        coll = PolyCollection(
            tris[order], array=shade, cmap="Blues", edgecolors="none"
        )
        ax.add_collection(coll)
        flat = mesh.facet_vertices.reshape(-1, 3)[:, :2]
    else:
        raise BadParamsError("mesh rendering supports dimensions 2 and 3")
    pad = 0.05 * (flat.max(axis=0) - flat.min(axis=0) + 1e-9)
    ax.set_xlim(flat[:, 0].min() - pad[0], flat[:, 0].max() + pad[0])
    ax.set_ylim(flat[:, 1].min() - pad[1], flat[:, 1].max() + pad[1])
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return save_svg(fig, path)


def render_heat_map(centers, values, path, title=None, overlay=None) -> Path:
    """Scalar values on a grid of planar centers, square-marker heat map."""
    centers = np.asarray(centers, dtype=float)
    values = np.asarray(values, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != 2:
        raise BadParamsError("heat map centers must be planar")
    fig, ax = plt.subplots(figsize=(5.0, 4.6))
    sc = ax.scatter(
        centers[:, 0],
        centers[:, 1],
        c=values,
        cmap="viridis",
        s=900,
        marker="s",
        edgecolors="black",
        linewidths=0.4,
    )
    fig.colorbar(sc, ax=ax, shrink=0.85)
    if overlay is not None:
        _domain_contour(ax, overlay)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return save_svg(fig, path)


def render_phase_portrait(traj, path, regions=(), title=None) -> Path:
    """Planar trajectory with overlaid region boundaries."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    t = np.linspace(traj.t0, traj.t1, 4000)
    pts = traj.at(t)
    ax.plot(pts[:, 0], pts[:, 1], color="tab:blue", linewidth=0.8)
    ax.plot(pts[0, 0], pts[0, 1], marker="o", color="tab:green", markersize=4)
    palette = ["tab:red", "tab:orange", "tab:purple", "tab:brown"]
    for i, region in enumerate(regions):
        _domain_contour(ax, region, color=palette[i % len(palette)])
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return save_svg(fig, path)


def render_convergence(xs, series, path, title=None, xlabel="h", loglog=True) -> Path:
    """Decay curves: one line per named series over a shared abscissa."""
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    plot = ax.loglog if loglog else ax.plot
    for name, ys in sorted(series.items()):
        xs_arr = np.asarray(xs, dtype=float)
        ys_arr = np.asarray(ys, dtype=float)
        keep = ys_arr > 0 if loglog else np.ones(len(ys_arr), dtype=bool)
        plot(xs_arr[keep], ys_arr[keep], marker="o", markersize=3.5, label=name)
    ax.set_xlabel(xlabel)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    return save_svg(fig, path)


def render_lhs_rhs(reports, path, title=None) -> Path:
    """lhs vs rhs scatter for a batch of bound reports; y = x is the cliff."""
    lhs = np.asarray([r.lhs for r in reports], dtype=float)
    rhs = np.asarray([r.rhs for r in reports], dtype=float)
    verdicts = [r.verdict for r in reports]
    fig, ax = plt.subplots(figsize=(5.0, 4.6))
    colors = {"HOLDS": "tab:green", "VIOLATED": "tab:red", "INCONCLUSIVE": "tab:orange"}
    for verdict in ("HOLDS", "INCONCLUSIVE", "VIOLATED"):
        keep = [i for i, v in enumerate(verdicts) if v == verdict]
        if keep:
            ax.scatter(
                rhs[keep], lhs[keep], s=14, color=colors[verdict], label=verdict
            )
    top = max(float(rhs.max(initial=1.0)), float(lhs.max(initial=1.0))) * 1.05
    ax.plot([0, top], [0, top], color="black", linewidth=0.8, linestyle="--")
    ax.set_xlabel("bound (rhs)")
    ax.set_ylabel("measured (lhs)")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    return save_svg(fig, path)
