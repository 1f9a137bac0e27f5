"""Inequality checkers for flux integrals over partial boundaries.

Each checker measures the left side of one inequality with mesh quadrature,
assembles the right side from areas, volumes, sup norms, or diameters, and
renders a verdict with an explicit numeric tolerance.  Every ingredient is
recorded with its own error estimate and provenance so a report can be audited
line by line.

Checked inequalities, by id:

- THM1: |int_{bd D1 ∩ D2} f.n dA| <= Area(bd D2) sup|f| + Vol(D2) sup|div f|
- THM2: same lhs, rhs = (1/2) Area(bd D2) sup|f|, for divergence-free f
- COR3: |int_{bd D1 ∩ D2} n dA| <= (1/2) Area(bd D2)
- THM4_CLAIMED / THM4_PROOF_DERIVED: for convex D2 of diameter delta, the
  normal integral against (1/2)V / V where V = Vol(B^{d-1}(delta/2)); the
  stated factor-1/2 form fails on tight configurations, the form the
  derivation actually supports holds with equality there, so both are
  always computed and the claimed one never gates anything
- LEMMA_VDOTN_CLAIMED / LEMMA_VDOTN_PROOF_DERIVED: constant-field variant
  of the previous pair, lhs = |v . int n dA|, rhs scaled by |v|
- GENERAL_EQ5: rhs = (1/2)(Area sup|f| + |int_{bd D2} f.n| + Vol sup|div f|
  + |int_{D2} div f|)
- MEASURE_LEMMA: discrete split-integral bound, exact arithmetic
- DIV_THEOREM: |boundary flux - volume integral of divergence| within 1% of
  the problem scale at the working resolution
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import (
    BadParamsError,
    NotConvexError,
    NotDivergenceFreeError,
    PreconditionFailedError,
)
from .fields import VectorField, sup_norms
from .geometry.curves import ImmersedCurve
from .geometry.implicit import ImplicitDomain
from .geometry.meshing import SurfaceMesh, clip_mesh, mesh_boundary
from .quadrature import (
    cell_weights,
    divergence_volume_integral,
    normal_integral,
    surface_flux,
    volume,
)

__all__ = [
    "HOLDS",
    "VIOLATED",
    "INCONCLUSIVE",
    "INEQUALITY_IDS",
    "Ingredient",
    "BoundReport",
    "QuadOpts",
    "PairCache",
    "render_verdict",
    "unit_ball_volume",
    "estimate_diameter",
    "require_convex",
    "check_thm1",
    "check_thm2",
    "check_cor3",
    "check_thm4",
    "check_vdotn",
    "check_general",
    "DivTheoremHarness",
    "check_div_theorem",
    "check_measure_lemma",
    "GATING_IDS",
    "is_gating_violation",
    "OffsetRow",
    "OffsetStudy",
    "offset_convergence_study",
]

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"

INEQUALITY_IDS = (
    "THM1",
    "THM2",
    "COR3",
    "THM4_CLAIMED",
    "THM4_PROOF_DERIVED",
    "GENERAL_EQ5",
    "LEMMA_VDOTN_CLAIMED",
    "LEMMA_VDOTN_PROOF_DERIVED",
    "MEASURE_LEMMA",
    "DIV_THEOREM",
)

# Ids whose VIOLATED verdict indicates a real failure.  The *_CLAIMED pair is
# excluded by design: those record a stated factor that tight configurations
# genuinely exceed, and they must never gate an exit code.
GATING_IDS = frozenset(
    {"THM1", "THM2", "COR3", "THM4_PROOF_DERIVED", "GENERAL_EQ5",
     "LEMMA_VDOTN_PROOF_DERIVED", "MEASURE_LEMMA", "DIV_THEOREM"}
)

# A violated report on one of these sources does not indicate a broken
# theorem: the hypotheses were knowingly not met.
NON_GATING_FLAGS = frozenset(
    {"NOT_A_REGULAR_DOMAIN", "NOT_SIMPLE", "UNVERIFIED_BOUNDARY_SOURCE"}
)


def is_gating_violation(report: "BoundReport") -> bool:
    """True when a verdict should fail a run: a proven bound broke on a
    configuration that satisfied its hypotheses."""
    return (
        report.verdict == VIOLATED
        and report.inequality_id in GATING_IDS
        and not any(f in NON_GATING_FLAGS for f in report.flags)
    )

BoundarySource = Union[ImplicitDomain, ImmersedCurve, SurfaceMesh]


@dataclass(frozen=True)
class Ingredient:
    """One named sub-quantity of a bound, with error and provenance."""

    value: float
    error: float
    provenance: str
    vector: Optional[tuple] = None

    def to_dict(self) -> dict:
        out = {"value": self.value, "error": self.error, "provenance": self.provenance}
        if self.vector is not None:
            out["vector"] = list(self.vector)
        return out


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one inequality check."""

    inequality_id: str
    lhs: float
    rhs: float
    tolerance: float
    verdict: str
    ingredients: dict
    lhs_error: float = 0.0
    rhs_error: float = 0.0
    flags: tuple = ()

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "lhs_error": self.lhs_error,
            "rhs_error": self.rhs_error,
            "flags": list(self.flags),
            "ingredients": {k: v.to_dict() for k, v in self.ingredients.items()},
        }


def render_verdict(lhs: float, rhs: float, tolerance: float, combined_error: float) -> str:
    """HOLDS within tolerance; VIOLATED only when clear of the error budget."""
    if lhs <= rhs + tolerance:
        return HOLDS
    if lhs > rhs + 3.0 * combined_error:
        return VIOLATED
    return INCONCLUSIVE


def _tolerance(lhs_error: float, rhs_error: float, rhs: float) -> float:
    return 3.0 * (lhs_error + rhs_error) + 1e-9 * abs(rhs)


def _report(
    inequality_id: str,
    lhs: float,
    rhs: float,
    lhs_error: float,
    rhs_error: float,
    ingredients: dict,
    flags: tuple = (),
) -> BoundReport:
    tol = _tolerance(lhs_error, rhs_error, rhs)
    verdict = render_verdict(lhs, rhs, tol, lhs_error + rhs_error)
    return BoundReport(
        inequality_id=inequality_id,
        lhs=lhs,
        rhs=rhs,
        tolerance=tol,
        verdict=verdict,
        ingredients=ingredients,
        lhs_error=lhs_error,
        rhs_error=rhs_error,
        flags=flags,
    )


# ---------------------------------------------------------------------------
# quadrature options and shared per-pair work
# ---------------------------------------------------------------------------

_DEFAULT_PITCH = {2: 1.0 / 256.0, 3: 1.0 / 48.0}


@dataclass(frozen=True)
class QuadOpts:
    """Knobs shared by the inequality checkers.

    ``resolution`` is the surface-mesh pitch (defaults per dimension);
    coarse companions at twice the pitch drive the error estimates.
    """

    resolution: Optional[float] = None
    refine_depth: int = 8
    sup_samples: int = 4096
    seed: int = 0
    volume_subsample: Optional[int] = None
    curve_samples: int = 4096

    def pitch(self, dimension: int) -> float:
        if self.resolution is not None:
            return float(self.resolution)
        return _DEFAULT_PITCH[dimension]


class PairCache:
    """Memoizes meshes and quadratures shared by checks on one (D1, D2, f).

    ``d1`` may be an implicit domain, an immersed curve, or a ready-made
    surface mesh; the last two are flagged since nothing certifies they bound
    a regular domain.
    """

    def __init__(
        self,
        d1: BoundarySource,
        d2: ImplicitDomain,
        field: Optional[VectorField] = None,
        opts: Optional[QuadOpts] = None,
    ):
        self.d1 = d1
        self.d2 = d2
        self.field = field
        self.opts = opts or QuadOpts()
        self._memo: dict = {}

    def _get(self, key, builder):
        if key not in self._memo:
            self._memo[key] = builder()
        return self._memo[key]

    @property
    def dimension(self) -> int:
        return self.d2.dimension

    @property
    def pitch(self) -> float:
        return self.opts.pitch(self.dimension)

    @property
    def d1_flags(self) -> tuple:
        if isinstance(self.d1, ImplicitDomain):
            return ()
        if isinstance(self.d1, ImmersedCurve):
            if self.d1.winding != 1 or not self.d1.is_embedded_hint:
                return ("NOT_A_REGULAR_DOMAIN",)
            return ()
        return ("UNVERIFIED_BOUNDARY_SOURCE",)

    def _boundary1(self, pitch_scale: float) -> Optional[SurfaceMesh]:
        if isinstance(self.d1, ImplicitDomain):
            return mesh_boundary(self.d1, self.pitch * pitch_scale)
        if isinstance(self.d1, ImmersedCurve):
            n = max(64, int(self.opts.curve_samples / pitch_scale))
            return self.d1.to_mesh(samples_per_loop=n)
        return self.d1 if pitch_scale == 1.0 else None

    def mesh1(self) -> SurfaceMesh:
        return self._get("mesh1", lambda: self._boundary1(1.0))

    def mesh1_coarse(self) -> Optional[SurfaceMesh]:
        return self._get("mesh1_coarse", lambda: self._boundary1(2.0))

    def mesh2(self) -> SurfaceMesh:
        return self._get("mesh2", lambda: mesh_boundary(self.d2, self.pitch))

    def mesh2_coarse(self) -> SurfaceMesh:
        return self._get("mesh2c", lambda: mesh_boundary(self.d2, 2.0 * self.pitch))

    def clipped(self) -> SurfaceMesh:
        return self._get(
            "clipped", lambda: clip_mesh(self.mesh1(), self.d2, self.opts.refine_depth)
        )

    def clipped_coarse(self) -> Optional[SurfaceMesh]:
        def build():
            coarse = self.mesh1_coarse()
            if coarse is None:
                return None
            return clip_mesh(coarse, self.d2, self.opts.refine_depth)

        return self._get("clippedc", build)

    # -- ingredients -----------------------------------------------------

    def area2(self) -> Ingredient:
        def build():
            fine, coarse = self.mesh2(), self.mesh2_coarse()
            a = fine.total_area
            err = abs(a - coarse.total_area) / 3.0 + 1e-12 * a
            return Ingredient(a, err, f"mesh h={self.pitch:g}")

        return self._get("area2", build)

    def vol2(self) -> Ingredient:
        def build():
            q = volume(self.d2, self.pitch, self.opts.volume_subsample)
            return Ingredient(q.value, q.error_estimate, f"{q.method} h={q.resolution:g}")

        return self._get("vol2", build)

    def sups(self):
        def build():
            est = sup_norms(self.field, self.d2, self.opts.sup_samples, self.opts.seed)
            if est.exact_sup_f is not None:
                sup_f = Ingredient(
                    max(est.sup_f, est.exact_sup_f), 0.0, "analytic bound"
                )
            else:
                sup_f = Ingredient(
                    est.sup_f,
                    0.05 * est.sup_f + 1e-12,
                    f"sampled max over {est.samples_inside} points (heuristic error)",
                )
            if est.exact_sup_div is not None:
                sup_div = Ingredient(
                    max(est.sup_div, est.exact_sup_div), 0.0, "analytic bound"
                )
            else:
                sup_div = Ingredient(
                    est.sup_div,
                    0.05 * est.sup_div + 1e-12,
                    f"sampled max over {est.samples_inside} points (heuristic error)",
                )
            return sup_f, sup_div

        return self._get("sups", build)

    def flux_clipped(self) -> Ingredient:
        def build():
            mesh = self.clipped()
            if len(mesh.areas) == 0:
                return Ingredient(0.0, 0.0, "empty intersection")
            q = surface_flux(self.field, mesh, self.clipped_coarse())
            return Ingredient(q.value, q.error_estimate, f"{q.method} h={self.pitch:g}")

        return self._get("flux_clipped", build)

    def normal_clipped(self) -> Ingredient:
        def build():
            mesh = self.clipped()
            if len(mesh.areas) == 0:
                return Ingredient(
                    0.0, 0.0, "empty intersection", vector=(0.0,) * self.dimension
                )
            q = normal_integral(mesh, self.clipped_coarse())
            return Ingredient(
                q.value,
                q.error_estimate,
                f"{q.method} h={self.pitch:g}",
                vector=tuple(q.vector.tolist()),
            )

        return self._get("normal_clipped", build)

    def flux2_full(self) -> Ingredient:
        def build():
            q = surface_flux(self.field, self.mesh2(), self.mesh2_coarse())
            return Ingredient(q.value, q.error_estimate, f"{q.method} h={self.pitch:g}")

        return self._get("flux2_full", build)

    def divint2(self) -> Ingredient:
        def build():
            q = divergence_volume_integral(
                self.field, self.d2, self.pitch, self.opts.volume_subsample
            )
            return Ingredient(q.value, q.error_estimate, f"{q.method} h={q.resolution:g}")

        return self._get("divint2", build)


def _ensure_cache(
    d1: BoundarySource,
    d2: ImplicitDomain,
    field: Optional[VectorField],
    opts: Optional[QuadOpts],
    cache: Optional[PairCache],
) -> PairCache:
    if cache is not None:
        return cache
    return PairCache(d1, d2, field, opts)


# ---------------------------------------------------------------------------
# main inequality checkers
# ---------------------------------------------------------------------------


def check_thm1(
    d1: BoundarySource,
    d2: ImplicitDomain,
    field: VectorField,
    opts: Optional[QuadOpts] = None,
    cache: Optional[PairCache] = None,
) -> BoundReport:
    """Flux across the part of bd D1 inside D2 vs area/volume bound."""
    c = _ensure_cache(d1, d2, field, opts, cache)
    flux = c.flux_clipped()
    area2, vol2 = c.area2(), c.vol2()
    sup_f, sup_div = c.sups()
    lhs = abs(flux.value)
    rhs = area2.value * sup_f.value + vol2.value * sup_div.value
    rhs_err = (
        area2.error * sup_f.value
        + sup_f.error * area2.value
        + vol2.error * sup_div.value
        + sup_div.error * vol2.value
    )
    return _report(
        "THM1",
        lhs,
        rhs,
        flux.error,
        rhs_err,
        {
            "clipped_flux": flux,
            "area_bd_d2": area2,
            "vol_d2": vol2,
            "sup_f": sup_f,
            "sup_div": sup_div,
        },
        flags=c.d1_flags,
    )


def _require_divergence_free(c: PairCache) -> None:
    _, sup_div = c.sups()
    worst = sup_div.value
    mesh = c.clipped()
    if len(mesh.areas):
        worst = max(worst, float(np.max(np.abs(c.field.divergence(mesh.centroids)))))
    if worst > 1e-6:
        raise NotDivergenceFreeError(
            f"field {c.field.label!r} has sampled |div| up to {worst:g}"
        )


def check_thm2(
    d1: BoundarySource,
    d2: ImplicitDomain,
    field: VectorField,
    opts: Optional[QuadOpts] = None,
    cache: Optional[PairCache] = None,
) -> BoundReport:
    """Half-area bound on the clipped flux, valid for divergence-free fields."""
    c = _ensure_cache(d1, d2, field, opts, cache)
    _require_divergence_free(c)
    flux = c.flux_clipped()
    area2 = c.area2()
    sup_f, _ = c.sups()
    lhs = abs(flux.value)
    rhs = 0.5 * area2.value * sup_f.value
    rhs_err = 0.5 * (area2.error * sup_f.value + sup_f.error * area2.value)
    return _report(
        "THM2",
        lhs,
        rhs,
        flux.error,
        rhs_err,
        {"clipped_flux": flux, "area_bd_d2": area2, "sup_f": sup_f},
        flags=c.d1_flags,
    )


def check_cor3(
    d1: BoundarySource,
    d2: ImplicitDomain,
    opts: Optional[QuadOpts] = None,
    cache: Optional[PairCache] = None,
) -> BoundReport:
    """Normal-vector integral over the clipped boundary vs half the area."""
    c = _ensure_cache(d1, d2, None, opts, cache)
    nint = c.normal_clipped()
    area2 = c.area2()
    lhs = abs(nint.value)
    rhs = 0.5 * area2.value
    return _report(
        "COR3",
        lhs,
        rhs,
        nint.error,
        0.5 * area2.error,
        {"normal_integral": nint, "area_bd_d2": area2},
        flags=c.d1_flags,
    )


def check_general(
    d1: BoundarySource,
    d2: ImplicitDomain,
    field: VectorField,
    opts: Optional[QuadOpts] = None,
    cache: Optional[PairCache] = None,
) -> BoundReport:
    """Four-ingredient averaged bound on the clipped flux."""
    c = _ensure_cache(d1, d2, field, opts, cache)
    flux = c.flux_clipped()
    area2, vol2 = c.area2(), c.vol2()
    sup_f, sup_div = c.sups()
    flux2, divint2 = c.flux2_full(), c.divint2()
    lhs = abs(flux.value)
    rhs = 0.5 * (
        area2.value * sup_f.value
        + abs(flux2.value)
        + vol2.value * sup_div.value
        + abs(divint2.value)
    )
    rhs_err = 0.5 * (
        area2.error * sup_f.value
        + sup_f.error * area2.value
        + flux2.error
        + vol2.error * sup_div.value
        + sup_div.error * vol2.value
        + divint2.error
    )
    return _report(
        "GENERAL_EQ5",
        lhs,
        rhs,
        flux.error,
        rhs_err,
        {
            "clipped_flux": flux,
            "area_bd_d2": area2,
            "flux_bd_d2": flux2,
            "vol_d2": vol2,
            "divint_d2": divint2,
            "sup_f": sup_f,
            "sup_div": sup_div,
        },
        flags=c.d1_flags,
    )


# ---------------------------------------------------------------------------
# convex-diameter pair
# ---------------------------------------------------------------------------


def unit_ball_volume(k: int, radius: float = 1.0) -> float:
    """Volume of the k-dimensional ball of the given radius."""
    if k < 0:
        raise BadParamsError("ball dimension must be nonnegative")
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0) * radius**k


def require_convex(
    domain: ImplicitDomain, samples: int = 2048, seed: int = 0
) -> None:
    """Sampled convexity check: midpoints of inside pairs must be inside."""
    rng = np.random.default_rng(int(seed))
    lo, hi = domain.bounding_box
    pts = lo + rng.random((int(samples), domain.dimension)) * (hi - lo)
    inside = pts[domain.contains(pts)]
    if len(inside) < 2:
        return
    idx = rng.integers(0, len(inside), size=(min(4 * len(inside), 8192), 2))
    mids = 0.5 * (inside[idx[:, 0]] + inside[idx[:, 1]])
    slack = 1e-7 * domain.lipschitz_hint * (1.0 + np.linalg.norm(mids, axis=1))
    bad = domain.phi(mids) > domain.eps_band + slack
    if np.any(bad):
        raise NotConvexError(
            f"domain {domain.label!r}: midpoint of two inside points falls outside"
        )


def estimate_diameter(mesh: SurfaceMesh) -> Ingredient:
    """Diameter of the convex body bounded by ``mesh``.

    Seeds with the max pairwise distance over (a hull-reduced subset of) the
    mesh vertices, then runs two support-direction refinement rounds over all
    vertices; for a convex body the vertex maximum is exact up to mesh error.
    """
    verts = np.unique(mesh.facet_vertices.reshape(-1, mesh.dimension), axis=0)
    stride = max(1, len(verts) // 1200)
    sub = verts[::stride]
    try:
        hull = ConvexHull(sub)
        cand = sub[hull.vertices]
    except (QhullError, ValueError):
        cand = sub
    diff = cand[:, None, :] - cand[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    p, q = cand[i], cand[j]
    for _ in range(2):
        u = q - p
        norm = np.linalg.norm(u)
        if norm == 0.0:
            break
        u /= norm
        proj = verts @ u
        p = verts[int(np.argmin(proj))]
        q = verts[int(np.argmax(proj))]
    delta = float(np.linalg.norm(q - p))
    err = mesh.resolution**2 + 1e-12
    return Ingredient(delta, err, f"mesh vertices h={mesh.resolution:g} + support refinement")


def _convex_pair_reports(
    claimed_id: str,
    derived_id: str,
    lhs: float,
    lhs_err: float,
    scale: float,
    scale_err: float,
    delta: Ingredient,
    dimension: int,
    base_ingredients: dict,
    flags: tuple,
) -> tuple:
    k = dimension - 1
    vol_slice = unit_ball_volume(k, delta.value / 2.0)
    # d(vol)/d(delta) propagates the diameter error to the bound.
    dvol = 0.0 if delta.value == 0.0 else vol_slice * k / delta.value
    vol_err = dvol * delta.error
    slice_ing = Ingredient(
        vol_slice, vol_err, f"ball volume in dimension {k} at radius delta/2"
    )
    out = []
    for ineq_id, factor in ((claimed_id, 0.5), (derived_id, 1.0)):
        rhs = factor * vol_slice * scale
        rhs_err = factor * (vol_err * scale + scale_err * vol_slice)
        ing = dict(base_ingredients)
        ing["diameter"] = delta
        ing["cross_section_volume"] = slice_ing
        out.append(
            _report(ineq_id, lhs, rhs, lhs_err, rhs_err, ing, flags=flags)
        )
    return tuple(out)


def check_thm4(
    d1: BoundarySource,
    d2: ImplicitDomain,
    opts: Optional[QuadOpts] = None,
    cache: Optional[PairCache] = None,
) -> tuple:
    """Normal integral vs cross-section volume of convex D2, both variants.

    Returns (claimed, derived) reports; only the derived one is ever gating.
    """
    c = _ensure_cache(d1, d2, None, opts, cache)
    require_convex(d2, seed=c.opts.seed)
    nint = c.normal_clipped()
    delta = estimate_diameter(c.mesh2())
    return _convex_pair_reports(
        "THM4_CLAIMED",
        "THM4_PROOF_DERIVED",
        abs(nint.value),
        nint.error,
        1.0,
        0.0,
        delta,
        c.dimension,
        {"normal_integral": nint},
        c.d1_flags,
    )


def check_vdotn(
    d1: BoundarySource,
    d2: ImplicitDomain,
    v,
    opts: Optional[QuadOpts] = None,
    cache: Optional[PairCache] = None,
) -> tuple:
    """Constant-field flux vs cross-section volume of convex D2, both variants."""
    c = _ensure_cache(d1, d2, None, opts, cache)
    require_convex(d2, seed=c.opts.seed)
    vec = np.asarray(v, dtype=float).reshape(c.dimension)
    vmag = float(np.linalg.norm(vec))
    nint = c.normal_clipped()
    nvec = np.asarray(nint.vector if nint.vector is not None else np.zeros(c.dimension))
    lhs = abs(float(vec @ nvec))
    lhs_err = vmag * nint.error
    delta = estimate_diameter(c.mesh2())
    base = {
        "normal_integral": nint,
        "v_magnitude": Ingredient(vmag, 0.0, "given"),
    }
    return _convex_pair_reports(
        "LEMMA_VDOTN_CLAIMED",
        "LEMMA_VDOTN_PROOF_DERIVED",
        lhs,
        lhs_err,
        vmag,
        0.0,
        delta,
        c.dimension,
        base,
        c.d1_flags,
    )


# ---------------------------------------------------------------------------
# divergence-theorem residual
# ---------------------------------------------------------------------------


class DivTheoremHarness:
    """Caches one domain's meshes and volume grids across fields and pitches.

    The residual check meshes the boundary at four pitches and builds two
    cell-weight grids; reusing them across a catalog of fields turns the cost
    per extra field into two integrand sweeps.
    """

    def __init__(self, domain: ImplicitDomain, opts: Optional[QuadOpts] = None):
        self.domain = domain
        self.opts = opts or QuadOpts()
        self._meshes: dict = {}
        self._grids: dict = {}

    def mesh(self, pitch: float) -> SurfaceMesh:
        key = round(pitch, 15)
        if key not in self._meshes:
            self._meshes[key] = mesh_boundary(self.domain, pitch)
        return self._meshes[key]

    def grid(self, pitch: float):
        key = round(pitch, 15)
        if key not in self._grids:
            self._grids[key] = cell_weights(
                self.domain, pitch, self.opts.volume_subsample
            )
        return self._grids[key]

    def check(self, field: VectorField, rel_target: float = 0.01) -> BoundReport:
        """Residual |boundary flux - volume integral of div f| at the pitch.

        The right side is ``rel_target`` times the problem scale
        max(|volume integral|, sup|f| * boundary area).  The per-case order
        log2(residual at 2h / residual at h) is a diagnostic only: both
        quadrature errors carry grid-phase components with oscillating sign,
        so a residual near the cancellation floor can ratio arbitrarily.
        Judge convergence on an aggregate over many cases.
        """
        h = self.opts.pitch(self.domain.dimension)

        def residual_at(pitch: float) -> tuple:
            fl = surface_flux(field, self.mesh(pitch), self.mesh(2.0 * pitch))
            dv = divergence_volume_integral(
                field, self.domain, pitch, grid=self.grid(pitch)
            )
            return fl, dv, abs(fl.value - dv.value)

        fl, dv, res = residual_at(h)
        _, _, res_coarse = residual_at(2.0 * h)

        est = sup_norms(field, self.domain, self.opts.sup_samples, self.opts.seed)
        sup_f = est.bound_sup_f()
        area = self.mesh(h).total_area
        denom = max(abs(dv.value), sup_f * area, 1e-30)
        # below ~1e-9 of the problem scale only roundoff is left to measure
        if res < 1e-9 * denom:
            order = float("inf")
        elif res_coarse <= res:
            order = 0.0
        else:
            order = math.log2(res_coarse / res)

        ingredients = {
            "boundary_flux": Ingredient(
                fl.value, fl.error_estimate, f"{fl.method} h={h:g}"
            ),
            "divergence_integral": Ingredient(
                dv.value, dv.error_estimate, f"{dv.method} h={h:g}"
            ),
            "residual_coarse": Ingredient(res_coarse, 0.0, f"same pipeline at h={2*h:g}"),
            "scale": Ingredient(denom, 0.0, "max(|div integral|, sup|f| * area)"),
            "observed_order": Ingredient(
                order, 0.0, "log2(residual ratio) over one refinement; diagnostic"
            ),
        }
        lhs = res
        rhs = rel_target * denom
        combined = fl.error_estimate + dv.error_estimate
        tol = 1e-9 * denom
        verdict = render_verdict(lhs, rhs, tol, combined)
        return BoundReport(
            inequality_id="DIV_THEOREM",
            lhs=lhs,
            rhs=rhs,
            tolerance=tol,
            verdict=verdict,
            ingredients=ingredients,
            lhs_error=combined,
            rhs_error=0.0,
        )


def check_div_theorem(
    domain: ImplicitDomain,
    field: VectorField,
    opts: Optional[QuadOpts] = None,
    rel_target: float = 0.01,
) -> BoundReport:
    """One-off divergence-theorem residual check (see DivTheoremHarness)."""
    return DivTheoremHarness(domain, opts).check(field, rel_target)


# ---------------------------------------------------------------------------
# discrete split-integral bound
# ---------------------------------------------------------------------------


def check_measure_lemma(weights, values, in_u, in_v) -> BoundReport:
    """For a finite weighted point set: the integrals over U minus V and over
    U intersect V are each bounded by (mu(U) sup_U |f| + |int_U f|) / 2.

    Pure arithmetic with compensated sums; the verdict carries no tolerance.
    """
    w = np.asarray(weights, dtype=float)
    f = np.asarray(values, dtype=float)
    u = np.asarray(in_u, dtype=bool)
    v = np.asarray(in_v, dtype=bool)
    if not (w.shape == f.shape == u.shape == v.shape) or w.ndim != 1:
        raise BadParamsError("weights, values, and membership masks must be 1-d and equal length")
    if np.any(w < 0) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(f)):
        raise BadParamsError("weights must be finite and nonnegative, values finite")

    mu_u = math.fsum(w[u].tolist())
    int_u = math.fsum((w[u] * f[u]).tolist())
    support = u & (w > 0)
    sup_f = float(np.max(np.abs(f[support]), initial=0.0))
    lhs_minus = abs(math.fsum((w[u & ~v] * f[u & ~v]).tolist()))
    lhs_cap = abs(math.fsum((w[u & v] * f[u & v]).tolist()))
    lhs = max(lhs_minus, lhs_cap)
    rhs = 0.5 * (mu_u * sup_f + abs(int_u))
    verdict = HOLDS if lhs <= rhs else VIOLATED
    return BoundReport(
        inequality_id="MEASURE_LEMMA",
        lhs=lhs,
        rhs=rhs,
        tolerance=0.0,
        verdict=verdict,
        ingredients={
            "mu_u": Ingredient(mu_u, 0.0, "exact sum"),
            "int_u": Ingredient(int_u, 0.0, "exact sum"),
            "sup_f_on_u": Ingredient(sup_f, 0.0, "exact max over weighted support"),
            "int_u_minus_v": Ingredient(lhs_minus, 0.0, "exact sum"),
            "int_u_cap_v": Ingredient(lhs_cap, 0.0, "exact sum"),
        },
    )


# ---------------------------------------------------------------------------
# offset convergence study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OffsetRow:
    eta: float
    vol: float
    area: float
    flux: Optional[float] = None
    clipped_flux: Optional[float] = None


@dataclass(frozen=True)
class OffsetStudy:
    """Rows at eta = 0 and each requested offset, plus fitted decay rates."""

    rows: tuple
    cauchy: dict
    rates: dict
    monotone: dict

    def quantities(self) -> tuple:
        names = ["vol", "area"]
        if self.rows and self.rows[0].flux is not None:
            names.append("flux")
        if self.rows and self.rows[0].clipped_flux is not None:
            names.append("clipped_flux")
        return tuple(names)


def offset_convergence_study(
    d2: ImplicitDomain,
    etas: Sequence[float],
    field: Optional[VectorField] = None,
    d1: Optional[ImplicitDomain] = None,
    opts: Optional[QuadOpts] = None,
) -> OffsetStudy:
    """Vol, area, and flux of the outward offsets {phi <= eta} as eta drops.

    ``etas`` must be strictly decreasing and positive; a base row at eta = 0
    anchors the error fits.  Cauchy differences are taken between consecutive
    offset rows only, and the rate is the log-log slope of |q(eta) - q(0)|
    against eta.
    """
    etas = [float(e) for e in etas]
    if not etas or any(e <= 0 for e in etas):
        raise PreconditionFailedError("offsets must be positive")
    if any(b >= a for a, b in zip(etas, etas[1:])):
        raise PreconditionFailedError("offsets must be strictly decreasing")
    opts = opts or QuadOpts()
    h = opts.pitch(d2.dimension)

    mesh1 = mesh_boundary(d1, h) if d1 is not None else None

    rows = []
    for eta in etas + [0.0]:
        dom = d2 if eta == 0.0 else d2.offset(eta)
        fine = mesh_boundary(dom, h)
        vol_q = volume(dom, h, opts.volume_subsample)
        flux_val = None
        clip_val = None
        if field is not None:
            flux_val = surface_flux(field, fine).value
            if mesh1 is not None:
                clipped = clip_mesh(mesh1, dom, opts.refine_depth)
                clip_val = (
                    surface_flux(field, clipped).value if len(clipped.areas) else 0.0
                )
        rows.append(
            OffsetRow(
                eta=eta,
                vol=vol_q.value,
                area=fine.total_area,
                flux=flux_val,
                clipped_flux=clip_val,
            )
        )
    # keep decreasing-eta order with the base row last
    base = rows[-1]

    names = ["vol", "area"] + (["flux"] if field is not None else [])
    if field is not None and d1 is not None:
        names.append("clipped_flux")
    cauchy: dict = {}
    rates: dict = {}
    monotone: dict = {}
    log_eta = np.log(np.asarray(etas))
    for name in names:
        # Cauchy differences between consecutive offset rows; the base row
        # anchors the rate fit but is not part of the difference sequence
        # (for quantities linear in eta the final two gaps would tie).
        series = [getattr(r, name) for r in rows[:-1]]
        diffs = [abs(series[i] - series[i + 1]) for i in range(len(series) - 1)]
        cauchy[name] = diffs
        errs = np.asarray([abs(getattr(r, name) - getattr(base, name)) for r in rows[:-1]])
        good = errs > 0
        if good.sum() >= 2:
            slope = float(np.polyfit(log_eta[good], np.log(errs[good]), 1)[0])
        else:
            slope = float("inf")
        rates[name] = slope
        monotone[name] = all(b < a for a, b in zip(diffs, diffs[1:]))
    return OffsetStudy(rows=tuple(rows), cauchy=cauchy, rates=rates, monotone=monotone)
