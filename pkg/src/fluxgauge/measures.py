"""Area-weighted (point, normal) measures of hypersurfaces and ball means.

A surface mesh induces a probability measure on position-normal pairs with
facet-area weights.  Averaging the normal over a ball of positions probes the
cancellation that closed surfaces force: the half-area bound on normal
integrals, divided by the source area, caps every ball mean, and the cap
tightens as the source area grows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BadParamsError, EmptyMeshError, PreconditionFailedError
from .geometry.implicit import ImplicitDomain
from .geometry.meshing import SurfaceMesh, mesh_boundary

__all__ = [
    "EmpiricalMeasure",
    "DisintegrationEstimate",
    "SurfaceLimitStudy",
    "empirical_measure",
    "ball_mean_normal",
    "ball_boundary_area",
    "grid_centers",
    "surface_limit_study",
]


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Atoms (x, n, w) with area-proportional weights summing to one."""

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    source_area: float
    source_label: str
    resolution: float

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights.tolist())

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def integrate(self, g: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
        """Weighted mean of a test function of (position, normal)."""
        vals = np.asarray(g(self.points, self.normals), dtype=float)
        return math.fsum((self.weights * vals).tolist())

    def product_mass(
        self,
        point_pred: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        normal_pred: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> float:
        """Mass of a product set {x in U} x {n in V} given indicator callables."""
        keep = np.ones(len(self.weights), dtype=bool)
        if point_pred is not None:
            keep &= np.asarray(point_pred(self.points), dtype=bool)
        if normal_pred is not None:
            keep &= np.asarray(normal_pred(self.normals), dtype=bool)
        return math.fsum(self.weights[keep].tolist())


def empirical_measure(mesh: SurfaceMesh) -> EmpiricalMeasure:
    """One atom per facet at its centroid and unit normal, area weights."""
    if len(mesh.areas) == 0 or mesh.total_area <= 0.0:
        raise EmptyMeshError("cannot build a measure from an empty mesh")
    area = mesh.total_area
    return EmpiricalMeasure(
        points=mesh.centroids.copy(),
        normals=mesh.normals.copy(),
        weights=mesh.areas / area,
        source_area=area,
        source_label=mesh.source_label,
        resolution=mesh.resolution,
    )


def ball_mean_normal(measure: EmpiricalMeasure, center, r: float) -> np.ndarray:
    """Un-normalized ball mean of the normal: sum of w*n over |x - c| <= r.

    Atoms exactly on the sphere count as inside (measure-zero choice).
    """
    if r <= 0:
        raise BadParamsError("ball radius must be positive")
    c = np.asarray(center, dtype=float).reshape(measure.dimension)
    keep = np.linalg.norm(measure.points - c, axis=1) <= r
    if not np.any(keep):
        return np.zeros(measure.dimension)
    contrib = measure.normals[keep] * measure.weights[keep, None]
    return np.array(
        [math.fsum(contrib[:, k].tolist()) for k in range(measure.dimension)]
    )


def _ball_membership_slack(measure: EmpiricalMeasure, center, r: float) -> float:
    """Mass of atoms within one mesh pitch of the ball's sphere.

    Facets are assigned to the ball wholesale by centroid, so only atoms in
    this shell can be misassigned; their total weight bounds the resulting
    error on the ball mean.
    """
    c = np.asarray(center, dtype=float).reshape(measure.dimension)
    dist = np.linalg.norm(measure.points - c, axis=1)
    band = np.abs(dist - r) <= measure.resolution
    return math.fsum(measure.weights[band].tolist())


def ball_boundary_area(dimension: int, r: float) -> float:
    """Surface area of the sphere bounding a ball of radius r."""
    if dimension == 2:
        return 2.0 * math.pi * r
    if dimension == 3:
        return 4.0 * math.pi * r**2
    k = dimension - 1
    return dimension * math.pi ** (dimension / 2.0) / math.gamma(
        dimension / 2.0 + 1.0
    ) * r**k


def grid_centers(lo, hi, counts) -> np.ndarray:
    """Even grid of ball centers over a box, midpoints per axis."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    counts = np.asarray(counts, dtype=int)
    axes = [
        lo[k] + (np.arange(counts[k]) + 0.5) / counts[k] * (hi[k] - lo[k])
        for k in range(len(lo))
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


@dataclass(frozen=True)
class DisintegrationEstimate:
    """Ball means of the normal over a grid of centers at one radius."""

    source_label: str
    source_area: float
    centers: np.ndarray
    radius: float
    means: np.ndarray
    masses: np.ndarray
    slacks: np.ndarray
    bound: float

    @property
    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.means, axis=1)

    @property
    def max_magnitude(self) -> float:
        return float(np.max(self.magnitudes, initial=0.0))

    def within_bound(self) -> bool:
        """Every ball mean under the half-sphere-area cap plus its slack."""
        return bool(np.all(self.magnitudes <= self.bound + self.slacks + 1e-12))

    def to_csv(self, path) -> Path:
        path = Path(path)
        d = self.centers.shape[1]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            header = [f"c{k}" for k in range(d)] + ["r"]
            header += [f"mean{k}" for k in range(d)]
            header += ["magnitude", "mass", "bound", "slack"]
            writer.writerow(header)
            mags = self.magnitudes
            for i in range(len(self.centers)):
                row = ["%.17g" % v for v in self.centers[i]]
                row.append("%.17g" % self.radius)
                row += ["%.17g" % v for v in self.means[i]]
                row += [
                    "%.17g" % mags[i],
                    "%.17g" % self.masses[i],
                    "%.17g" % self.bound,
                    "%.17g" % self.slacks[i],
                ]
                writer.writerow(row)
        return path


def disintegration_estimate(
    measure: EmpiricalMeasure, centers, r: float
) -> DisintegrationEstimate:
    """Ball means, masses, and misassignment slacks over a grid of centers."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    means = np.zeros_like(centers)
    masses = np.zeros(len(centers))
    slacks = np.zeros(len(centers))
    for i, c in enumerate(centers):
        means[i] = ball_mean_normal(measure, c, r)
        dist = np.linalg.norm(measure.points - c, axis=1)
        masses[i] = math.fsum(measure.weights[dist <= r].tolist())
        slacks[i] = _ball_membership_slack(measure, c, r)
    bound = ball_boundary_area(measure.dimension, r) / (2.0 * measure.source_area)
    return DisintegrationEstimate(
        source_label=measure.source_label,
        source_area=measure.source_area,
        centers=centers,
        radius=r,
        means=means,
        masses=masses,
        slacks=slacks,
        bound=bound,
    )


@dataclass(frozen=True)
class SurfaceLimitStudy:
    """Ball-mean decay along a sequence of growing surfaces."""

    estimates: tuple
    max_magnitudes: tuple
    bounds: tuple
    decay_factors: tuple
    all_bounded: bool


def surface_limit_study(
    domains: Sequence[ImplicitDomain],
    centers,
    r: float,
    resolution,
) -> SurfaceLimitStudy:
    """Ball means over a grid for each domain of a growing-area sequence.

    Requires the measured surface areas to be strictly increasing; reports the
    per-domain max ball-mean magnitude, the per-domain cap, and the decay
    factor between consecutive domains.  ``resolution`` is a mesh pitch,
    either shared or one per domain; finer members of the sequence usually
    need a finer pitch.
    """
    if np.isscalar(resolution):
        pitches = [float(resolution)] * len(domains)
    else:
        pitches = [float(p) for p in resolution]
        if len(pitches) != len(domains):
            raise PreconditionFailedError(
                "need one mesh pitch per domain, or a single shared pitch"
            )
    estimates = []
    areas = []
    for dom, pitch in zip(domains, pitches):
        mesh = mesh_boundary(dom, pitch)
        measure = empirical_measure(mesh)
        areas.append(measure.source_area)
        estimates.append(disintegration_estimate(measure, centers, r))
    if any(b <= a for a, b in zip(areas, areas[1:])):
        raise PreconditionFailedError(
            "surface areas must increase strictly along the sequence"
        )
    maxima = [e.max_magnitude for e in estimates]
    factors = tuple(
        float("inf") if b == 0.0 else a / b for a, b in zip(maxima, maxima[1:])
    )
    return SurfaceLimitStudy(
        estimates=tuple(estimates),
        max_magnitudes=tuple(maxima),
        bounds=tuple(e.bound for e in estimates),
        decay_factors=factors,
        all_bounded=all(e.within_bound() for e in estimates),
    )
