"""Implicit domains, boundary meshes, and parametrised curves."""

from .curves import ImmersedCurve, circle_loop, make_m_cover
from .implicit import (
    ImplicitDomain,
    Membership,
    OffsetSpec,
    offset_domain,
    scale,
    translate,
    union_domains,
)
from .meshing import SurfaceMesh, clip_mesh, mesh_boundary, mesh_to_csv, mesh_to_svg
from .zoo import (
    annulus,
    ball,
    halfspace,
    make_comb,
    make_zoo,
    rounded_box,
    rounded_polygon,
    torus,
)

__all__ = [
    "ImplicitDomain",
    "Membership",
    "OffsetSpec",
    "offset_domain",
    "translate",
    "scale",
    "union_domains",
    "SurfaceMesh",
    "mesh_boundary",
    "clip_mesh",
    "mesh_to_csv",
    "mesh_to_svg",
    "ImmersedCurve",
    "circle_loop",
    "make_m_cover",
    "ball",
    "halfspace",
    "annulus",
    "torus",
    "rounded_box",
    "rounded_polygon",
    "make_comb",
    "make_zoo",
]
