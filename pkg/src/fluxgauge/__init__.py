"""Flux integrals over clipped boundaries of implicit domains, with checked caps.

The package measures the flux of a vector field across the portion of one
domain's boundary lying inside another domain, and verifies the geometric
inequalities that cap such integrals: area/volume caps, the half-area cap for
divergence-free fields, the normal-integral cap, cross-section caps for convex
windows, a planar chord-sum cap for closed orbits, and the decay of ball means
of the normal against area-normalized boundary measures.
"""

from . import errors
from .bounds import (
    GATING_IDS,
    HOLDS,
    INCONCLUSIVE,
    INEQUALITY_IDS,
    VIOLATED,
    BoundReport,
    DivTheoremHarness,
    Ingredient,
    OffsetStudy,
    PairCache,
    QuadOpts,
    check_cor3,
    check_div_theorem,
    check_general,
    check_measure_lemma,
    check_thm1,
    check_thm2,
    check_thm4,
    check_vdotn,
    estimate_diameter,
    is_gating_violation,
    offset_convergence_study,
    require_convex,
    unit_ball_volume,
)
from .config import CONFIG_SCHEMA, SCENARIO_NAMES, ExperimentConfig
from .dynamics import (
    ProbeReport,
    Trajectory,
    check_cor_2d,
    integrate,
    masked_displacement,
    masked_intervals,
    minimal_set_probe,
    residence_time,
    trajectory_from_curve,
)
from .fields import SupEstimate, VectorField, field_catalog, sup_norms
from .geometry import (
    ImmersedCurve,
    ImplicitDomain,
    SurfaceMesh,
    annulus,
    ball,
    circle_loop,
    clip_mesh,
    halfspace,
    make_comb,
    make_m_cover,
    make_zoo,
    mesh_boundary,
    rounded_box,
    rounded_polygon,
    torus,
)
from .measures import (
    DisintegrationEstimate,
    EmpiricalMeasure,
    ball_boundary_area,
    ball_mean_normal,
    disintegration_estimate,
    empirical_measure,
    grid_centers,
    surface_limit_study,
)
from .quadrature import (
    MCResult,
    QuadratureResult,
    VolumeGrid,
    cell_weights,
    clipped_boundary_mesh,
    divergence_volume_integral,
    mc_flux_oracle,
    mc_normal_oracle,
    normal_integral,
    surface_flux,
    volume,
)
from .reporting import CheckRecord, RunReport, config_hash

try:
    from importlib.metadata import version as _version

    __version__ = _version("fluxgauge")
except Exception:
    __version__ = "0.1.0"

_LAZY = {"run", "list_scenarios", "default_config", "SCENARIOS", "thread_count"}


def __getattr__(name):
    # Scenario runners pull in matplotlib; load them only when asked for.
    if name in _LAZY:
        from . import scenarios

        return getattr(scenarios, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
