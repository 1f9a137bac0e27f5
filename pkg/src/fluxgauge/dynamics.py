"""Planar ODE trajectories and displacement masked to a region.

The displacement a trajectory accumulates while inside a region telescopes to
a sum of entry-to-exit chords, so locating the boundary crossings is the whole
computation.  Crossings are bracketed on a dense cubic interpolant and pinned
by root finding; chord sums then feed the half-perimeter bound for simple
closed curves and the bounded-displacement probe for recurrent orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq
from shapely.geometry import LineString

from .bounds import BoundReport, Ingredient, QuadOpts, _report
from .errors import (
    BadParamsError,
    CrossingUnresolvedError,
    NotSimpleError,
    PreconditionFailedError,
    StepUnderflowError,
)
from .fields import VectorField
from .geometry.curves import ImmersedCurve
from .geometry.implicit import ImplicitDomain
from .geometry.meshing import mesh_boundary

__all__ = [
    "Trajectory",
    "integrate",
    "trajectory_from_curve",
    "masked_intervals",
    "masked_displacement",
    "residence_time",
    "check_cor_2d",
    "ProbeRow",
    "ProbeReport",
    "minimal_set_probe",
]

_CROSSING_PHI_TOL = 1e-9
_MIN_STEP = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """Accepted integration nodes plus a cubic Hermite dense interpolant."""

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    step_tolerance: float
    label: str = "trajectory"

    def __post_init__(self):
        if len(self.times) < 2 or np.any(np.diff(self.times) <= 0):
            raise BadParamsError("trajectory needs strictly increasing times")

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    @property
    def spline(self) -> CubicHermiteSpline:
        # object.__setattr__ caching keeps the dataclass frozen
        cached = self.__dict__.get("_spline")
        if cached is None:
            cached = CubicHermiteSpline(self.times, self.states, self.derivs, axis=0)
            object.__setattr__(self, "_spline", cached)
        return cached

    def at(self, t) -> np.ndarray:
        """Dense state lookup (cubic in each accepted step)."""
        return self.spline(np.clip(t, self.t0, self.t1))

    @property
    def closure_gap(self) -> float:
        return float(np.linalg.norm(self.states[-1] - self.states[0]))

    def reversed(self) -> "Trajectory":
        """Time-reversed run of the same path."""
        t = self.t1 - self.times[::-1]
        return Trajectory(
            times=t,
            states=self.states[::-1].copy(),
            derivs=-self.derivs[::-1].copy(),
            step_tolerance=self.step_tolerance,
            label=f"{self.label}|reversed",
        )

    def to_csv(self, path) -> None:
        import csv
        from pathlib import Path

        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"x{k}" for k in range(self.states.shape[1])])
            for i in range(len(self.times)):
                writer.writerow(
                    ["%.17g" % self.times[i]] + ["%.17g" % v for v in self.states[i]]
                )


def integrate(
    field: VectorField,
    x0,
    T: float,
    tol: float = 1e-9,
    max_step: Optional[float] = None,
) -> Trajectory:
    """Adaptive Runge-Kutta integration of x' = f(x) on [0, T]."""
    if T <= 0:
        raise BadParamsError("horizon T must be positive")
    x0 = np.asarray(x0, dtype=float).reshape(field.dimension)

    def rhs(_t, y):
        return field(y)

    sol = solve_ivp(
        rhs,
        (0.0, float(T)),
        x0,
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
        max_step=max_step if max_step is not None else np.inf,
        dense_output=False,
    )
    if not sol.success:
        raise StepUnderflowError(f"integration failed: {sol.message}")
    if len(sol.t) > 1 and float(np.min(np.diff(sol.t))) < _MIN_STEP:
        raise StepUnderflowError("integrator step collapsed below 1e-12")
    states = sol.y.T.copy()
    return Trajectory(
        times=sol.t.copy(),
        states=states,
        derivs=field(states),
        step_tolerance=float(tol),
        label=f"flow({field.label})",
    )


def trajectory_from_curve(curve: ImmersedCurve, samples: int = 2048) -> Trajectory:
    """Parametrized closed curve packaged as a trajectory (t = parameter)."""
    n = int(samples)
    if n < 8:
        raise BadParamsError("need at least 8 samples")
    t = np.linspace(0.0, curve.period, n + 1)
    pts = curve.points(t)
    dt = curve.period * 1e-6
    tang = (curve.points(t + dt) - curve.points(t - dt)) / (2.0 * dt)
    return Trajectory(
        times=t,
        states=pts,
        derivs=tang,
        step_tolerance=1e-12,
        label=curve.label,
    )


# ---------------------------------------------------------------------------
# masked displacement
# ---------------------------------------------------------------------------


def _refine_crossing(traj: Trajectory, domain: ImplicitDomain, ta: float, tb: float) -> float:
    """Root of phi(x(t)) in [ta, tb], pinned to |phi| <= 1e-9."""

    def g(t):
        return float(domain.phi(traj.at(t)))

    root = brentq(g, ta, tb, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    if abs(g(root)) > _CROSSING_PHI_TOL * max(1.0, domain.lipschitz_hint):
        raise CrossingUnresolvedError(
            f"crossing near t={root:g} not resolved to the phi tolerance"
        )
    return float(root)


def masked_intervals(
    traj: Trajectory, domain: ImplicitDomain, samples_per_step: int = 8
) -> list:
    """Maximal parameter intervals the trajectory spends inside the region.

    Each accepted step is subsampled on the dense interpolant, sign changes
    of phi are bracketed, and each bracket is closed by root finding.  Entry
    and exit times are clipped to the trajectory span for arcs that start or
    end inside.
    """
    k = max(2, int(samples_per_step))
    segs = []
    for i in range(len(traj.times) - 1):
        a, b = traj.times[i], traj.times[i + 1]
        local = np.linspace(a, b, k + 1)
        segs.append(local[:-1] if i < len(traj.times) - 2 else local)
    t_grid = np.concatenate(segs)
    phi = domain.phi(traj.at(t_grid))
    inside = phi <= 0.0

    intervals = []
    t_in: Optional[float] = None
    if inside[0]:
        t_in = float(t_grid[0])
    flips = np.flatnonzero(inside[:-1] != inside[1:])
    for idx in flips:
        t_cross = _refine_crossing(traj, domain, float(t_grid[idx]), float(t_grid[idx + 1]))
        if inside[idx]:
            # leaving the region
            if t_in is not None:
                intervals.append((t_in, t_cross))
                t_in = None
        else:
            t_in = t_cross
    if t_in is not None:
        intervals.append((t_in, float(t_grid[-1])))
    return intervals


def masked_displacement(
    traj: Trajectory, domain: ImplicitDomain, samples_per_step: int = 8
) -> np.ndarray:
    """Displacement accumulated while inside the region: the chord sum.

    The masked velocity integral telescopes to sum(x(exit) - x(entry)) over
    the inside arcs, so only crossing times carry error.
    """
    intervals = masked_intervals(traj, domain, samples_per_step)
    if not intervals:
        return np.zeros(traj.states.shape[1])
    chords = [traj.at(t_out) - traj.at(t_in) for t_in, t_out in intervals]
    stacked = np.asarray(chords)
    return np.array(
        [math.fsum(stacked[:, k].tolist()) for k in range(stacked.shape[1])]
    )


def residence_time(
    traj: Trajectory, domain: ImplicitDomain, samples_per_step: int = 8
) -> float:
    """Lebesgue time the trajectory spends inside the region."""
    intervals = masked_intervals(traj, domain, samples_per_step)
    return math.fsum((b - a) for a, b in intervals)


# ---------------------------------------------------------------------------
# half-perimeter bound for simple closed curves
# ---------------------------------------------------------------------------


def _simplicity_points(traj: Trajectory, n: int = 2048) -> np.ndarray:
    t = np.linspace(traj.t0, traj.t1, n)
    return traj.at(t)


def is_simple_closed(traj: Trajectory, closure_tol: float = 1e-5) -> bool:
    """Segment-sweep simplicity of the (closed-up) polyline of the path."""
    pts = _simplicity_points(traj)
    if np.linalg.norm(pts[-1] - pts[0]) > closure_tol:
        return False
    ring = np.vstack([pts[:-1], pts[:1]])
    return bool(LineString(ring).is_simple)


def check_cor_2d(
    curve,
    d2: ImplicitDomain,
    opts: Optional[QuadOpts] = None,
    allow_non_simple: bool = False,
    samples_per_step: int = 8,
) -> BoundReport:
    """Masked displacement of a simple closed planar curve vs half perimeter.

    ``curve`` may be a Trajectory or a closed parametrized curve.  The chord
    sum telescopes only for Jordan curves, so non-simple inputs raise unless
    explicitly allowed, in which case the report is flagged.
    """
    if isinstance(curve, ImmersedCurve):
        traj = trajectory_from_curve(curve)
    else:
        traj = curve
    if d2.dimension != 2 or traj.states.shape[1] != 2:
        raise BadParamsError("the half-perimeter bound is planar")
    if traj.closure_gap > 1e-4 * (1.0 + float(np.max(np.abs(traj.states)))):
        raise PreconditionFailedError("curve is not closed")

    flags = ()
    if not is_simple_closed(traj):
        if not allow_non_simple:
            raise NotSimpleError(
                "curve self-intersects; the half-perimeter bound needs a Jordan curve"
            )
        flags = ("NOT_SIMPLE",)

    opts = opts or QuadOpts()
    disp = masked_displacement(traj, d2, samples_per_step)
    lhs = float(np.linalg.norm(disp))
    intervals = masked_intervals(traj, d2, samples_per_step)
    lhs_err = (
        2.0 * len(intervals) * _CROSSING_PHI_TOL
        + 10.0 * traj.step_tolerance * (traj.t1 - traj.t0)
    )

    if d2.exact_sdf and d2.surface_area_hint is not None:
        perim = Ingredient(d2.surface_area_hint, 0.0, "analytic")
    else:
        h = opts.pitch(2)
        fine = mesh_boundary(d2, h)
        coarse = mesh_boundary(d2, 2.0 * h)
        perim = Ingredient(
            fine.total_area,
            abs(fine.total_area - coarse.total_area) / 3.0 + 1e-12,
            f"mesh h={h:g}",
        )
    rhs = 0.5 * perim.value
    return _report(
        "COR3",
        lhs,
        rhs,
        lhs_err,
        0.5 * perim.error,
        {
            "masked_displacement": Ingredient(
                lhs, lhs_err, "chord sum over inside arcs", vector=tuple(disp.tolist())
            ),
            "perimeter_d2": perim,
            "inside_arcs": Ingredient(float(len(intervals)), 0.0, "count"),
        },
        flags=flags,
    )


# ---------------------------------------------------------------------------
# bounded-displacement probe near a recurrent orbit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeRow:
    horizon: float
    displacement: tuple
    displacement_magnitude: float
    chord_bound: float
    residence_time: float
    n_passes: int
    max_single_chord: float

    @property
    def within_bound(self) -> bool:
        return self.displacement_magnitude <= self.chord_bound + 1e-3


@dataclass(frozen=True)
class ProbeReport:
    """Per-horizon masked displacement into a small ball on an orbit.

    ``rows[i].displacement`` accumulates every chord up to the horizon; a
    recurrent orbit re-enters the ball indefinitely, so whether the
    accumulated sum stays near one chord's length is exactly what the probe
    measures.  ``max_single_chord`` never exceeds the ball diameter.
    """

    y0: tuple
    r0: float
    rows: tuple
    trajectory: Trajectory

    @property
    def residence_growth(self) -> float:
        first, last = self.rows[0].residence_time, self.rows[-1].residence_time
        return float("inf") if first == 0.0 else last / first


def minimal_set_probe(
    field: VectorField,
    x0,
    y0,
    r0: float,
    horizons: Sequence[float],
    tol: float = 1e-9,
    samples_per_step: int = 8,
) -> ProbeReport:
    """Masked displacement into B(y0, r0) at increasing horizons.

    The chord bound recorded per row is pi * r0 (half the perimeter of the
    ball).  Residence time growing while displacement stays bounded is the
    mechanism that forces time-averaged velocity inside the ball toward zero.
    """
    horizons = [float(T) for T in horizons]
    if not horizons or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise BadParamsError("horizons must be strictly increasing")
    if r0 <= 0:
        raise BadParamsError("ball radius must be positive")
    y0 = np.asarray(y0, dtype=float).reshape(field.dimension)
    from .geometry.zoo import ball

    region = ball(center=y0, radius=float(r0))
    traj = integrate(field, x0, horizons[-1], tol=tol)
    intervals = masked_intervals(traj, region, samples_per_step)

    rows = []
    for T in horizons:
        disp = np.zeros(field.dimension)
        res = 0.0
        passes = 0
        max_chord = 0.0
        for t_in, t_out in intervals:
            if t_in >= T:
                break
            t_stop = min(t_out, T)
            chord = traj.at(t_stop) - traj.at(t_in)
            disp += chord
            res += t_stop - t_in
            passes += 1
            max_chord = max(max_chord, float(np.linalg.norm(chord)))
        rows.append(
            ProbeRow(
                horizon=T,
                displacement=tuple(disp.tolist()),
                displacement_magnitude=float(np.linalg.norm(disp)),
                chord_bound=math.pi * float(r0),
                residence_time=res,
                n_passes=passes,
                max_single_chord=max_chord,
            )
        )
    return ProbeReport(y0=tuple(y0.tolist()), r0=float(r0), rows=tuple(rows), trajectory=traj)
