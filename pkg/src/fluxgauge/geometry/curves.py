"""Parametrised planar curves, including non-embedded multiple covers.

An m-fold cover traverses a base loop m times with a small radial
perturbation separating the sheets.  Such curves are immersed but are not the
boundary of any planar domain, which is exactly why they exist here: bounds
that hold for domain boundaries can fail on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import BadParamsError
from .meshing import SurfaceMesh

__all__ = ["ImmersedCurve", "circle_loop", "make_m_cover"]


@dataclass(frozen=True)
class ImmersedCurve:
    """Closed parametrised curve t in [0, period] -> R^2.

    ``point`` must be vectorised and satisfy point(0) == point(period) to
    within 1e-12.  ``winding`` records how many base loops the parametrisation
    traverses; ``is_embedded_hint`` is False for deliberately self-crossing
    curves.
    """

    point: Callable[[np.ndarray], np.ndarray]
    period: float
    winding: int = 1
    label: str = "curve"
    is_embedded_hint: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        gap = np.linalg.norm(self.points([0.0])[0] - self.points([self.period])[0])
        if gap > 1e-12:
            raise BadParamsError(f"curve does not close: endpoint gap {gap:g}")

    def points(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.asarray(self.point(t), dtype=float).reshape(len(t), 2)

    def to_mesh(self, samples_per_loop: int = 2048) -> SurfaceMesh:
        """Polyline mesh with right-hand normals (outward for CCW loops)."""
        n = int(samples_per_loop) * max(int(self.winding), 1)
        if n < 8:
            raise BadParamsError("need at least 8 samples per loop")
        t = np.linspace(0.0, self.period, n + 1)
        pts = self.points(t)
        verts = np.stack([pts[:-1], pts[1:]], axis=1)
        d = verts[:, 1] - verts[:, 0]
        lengths = np.linalg.norm(d, axis=1)
        keep = lengths > 0
        verts, d, lengths = verts[keep], d[keep], lengths[keep]
        normals = np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]
        return SurfaceMesh(
            dimension=2,
            facet_vertices=verts,
            areas=lengths,
            normals=normals,
            centroids=verts.mean(axis=1),
            source_label=self.label,
            resolution=float(np.max(lengths)),
            closed=True,
        )

    def length(self, samples_per_loop: int = 4096) -> float:
        mesh = self.to_mesh(samples_per_loop)
        return mesh.total_area


def circle_loop(center=(0.0, 0.0), radius: float = 1.0) -> ImmersedCurve:
    """Counterclockwise circle, the default base loop for covers."""
    c = np.asarray(center, dtype=float)
    r = float(radius)
    if r <= 0:
        raise BadParamsError("circle radius must be positive")

    def pt(t):
        return c + r * np.column_stack([np.cos(t), np.sin(t)])

    return ImmersedCurve(
        point=pt,
        period=2.0 * math.pi,
        winding=1,
        label=f"circle(r={r:g})",
        metadata={"center": tuple(c.tolist()), "radius": r},
    )


def make_m_cover(
    m: int,
    perturbation: float = 0.0,
    base: ImmersedCurve | None = None,
    frequency: float | None = None,
) -> ImmersedCurve:
    """Traverse ``base`` m times with radial perturbation eps*sin(freq*t).

    With perturbation 0 and m = 1 this reproduces the base loop exactly.  The
    default frequency 1/m closes after m loops while giving each sheet a
    different radius profile, so the sheets are geometrically distinguishable.
    """
    m = int(m)
    if m < 1:
        raise BadParamsError("cover multiplicity must be >= 1")
    eps = float(perturbation)
    if eps < 0:
        raise BadParamsError("perturbation must be nonnegative")
    loop = base if base is not None else circle_loop()
    freq = (1.0 / m) if frequency is None else float(frequency)
    period = loop.period * m
    if eps > 0 and abs(math.sin(freq * period)) > 1e-12:
        raise BadParamsError("perturbation frequency must close after m loops")
    center = np.asarray(loop.metadata.get("center", (0.0, 0.0)), dtype=float)

    def pt(t):
        t = np.asarray(t, dtype=float)
        basepts = loop.points(np.mod(t, loop.period))
        if eps == 0.0:
            return basepts
        return center + (basepts - center) * (1.0 + eps * np.sin(freq * t))[:, None]

    return ImmersedCurve(
        point=pt,
        period=period,
        winding=m * loop.winding,
        label=f"{loop.label}^cover({m})",
        is_embedded_hint=(m == 1 and loop.is_embedded_hint),
        metadata={"base": loop.label, "m": m, "perturbation": eps, "frequency": freq},
    )
