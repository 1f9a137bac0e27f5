"""Implicit domains described by a level function phi.

A domain is the sublevel set ``{x : phi(x) <= 0}``; its boundary is the zero
level set and outward normals point toward ``{phi > 0}``.  Level functions are
vectorised: they accept ``(n, d)`` arrays and return ``(n,)`` values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..errors import BadParamsError, DimensionMismatchError

__all__ = [
    "Membership",
    "ImplicitDomain",
    "OffsetSpec",
    "offset_domain",
    "translate",
    "scale",
    "union_domains",
]

# Finite-difference step exponent: cube root of machine epsilon balances
# truncation against rounding for first derivatives.
_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


class Membership(enum.Enum):
    INSIDE = "INSIDE"
    OUTSIDE = "OUTSIDE"
    BOUNDARY = "BOUNDARY"


def _as_points(x, dimension: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dimension:
        raise DimensionMismatchError(
            f"expected points of dimension {dimension}, got shape {pts.shape}"
        )
    return pts, single


@dataclass(frozen=True)
class ImplicitDomain:
    """Sublevel-set domain ``{phi <= 0}`` with queryable membership.

    Parameters
    ----------
    level_fn : callable
        Vectorised level function, ``(n, d) -> (n,)``.
    dimension : int
        Ambient dimension (2 or 3 for everything shipped here).
    bounding_box : array, shape (2, d)
        ``[lo, hi]`` rows; guaranteed to contain the domain (or, for
        unbounded domains such as half-spaces, the region of interest).
    lipschitz_hint : float
        Upper bound on ``|grad phi|`` used to size membership bands.
    exact_sdf : bool
        True when ``phi`` is an exact signed-distance function.
    gradient_fn : callable, optional
        Analytic gradient ``(n, d) -> (n, d)``; central differences otherwise.
    kind, params : str, dict
        Catalog metadata (used e.g. for exact sup-norm shortcuts).
    surface_area_hint, volume_hint : float, optional
        Closed-form boundary measure / volume when known.
    """

    level_fn: Callable[[np.ndarray], np.ndarray]
    dimension: int
    bounding_box: np.ndarray
    lipschitz_hint: float = 1.0
    label: str = "domain"
    exact_sdf: bool = False
    gradient_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    surface_area_hint: Optional[float] = None
    volume_hint: Optional[float] = None

    def __post_init__(self):
        box = np.asarray(self.bounding_box, dtype=float).reshape(2, self.dimension)
        if not np.all(box[1] > box[0]):
            raise BadParamsError(f"degenerate bounding box {box.tolist()}")
        object.__setattr__(self, "bounding_box", box)

    # -- membership ----------------------------------------------------

    @property
    def eps_band(self) -> float:
        """Half-width of the BOUNDARY classification band."""
        return 1e-9 * self.lipschitz_hint

    def phi(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.dimension)
        val = np.asarray(self.level_fn(pts), dtype=float).reshape(len(pts))
        return val[0] if single else val

    def membership(self, x) -> Membership:
        v = float(self.phi(np.asarray(x, dtype=float)))
        if v < -self.eps_band:
            return Membership.INSIDE
        if v > self.eps_band:
            return Membership.OUTSIDE
        return Membership.BOUNDARY

    def contains(self, x) -> np.ndarray:
        """Closed-set membership: BOUNDARY counts as inside."""
        pts, single = _as_points(x, self.dimension)
        res = self.phi(pts) <= self.eps_band
        return bool(res[0]) if single else res

    def gradient(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.dimension)
        if self.gradient_fn is not None:
            g = np.asarray(self.gradient_fn(pts), dtype=float).reshape(pts.shape)
        else:
            g = np.empty_like(pts)
            step = _FD_STEP * (1.0 + np.linalg.norm(pts, axis=1))
            for k in range(self.dimension):
                e = np.zeros(self.dimension)
                e[k] = 1.0
                hi = self.phi(pts + step[:, None] * e)
                lo = self.phi(pts - step[:, None] * e)
                g[:, k] = (hi - lo) / (2.0 * step)
        return g[0] if single else g

    # -- derived domains -------------------------------------------------

    def offset(self, eta: float) -> "ImplicitDomain":
        """Sublevel set ``{phi <= eta}``: outward dilation for eta > 0."""
        eta = float(eta)
        base = self
        pad = max(eta, 0.0) / max(min(1.0, self.lipschitz_hint), 1e-12)
        box = np.array([self.bounding_box[0] - pad, self.bounding_box[1] + pad])
        grad = self.gradient_fn
        return replace(
            self,
            level_fn=lambda p: base.level_fn(p) - eta,
            bounding_box=box,
            label=f"{self.label}|offset({eta:g})",
            gradient_fn=grad,
            kind="offset",
            params={"base": self.kind, "eta": eta},
            surface_area_hint=None,
            volume_hint=None,
        )

    def translated(self, vec) -> "ImplicitDomain":
        v = np.asarray(vec, dtype=float).reshape(self.dimension)
        base = self
        grad = None
        if self.gradient_fn is not None:
            grad = lambda p: base.gradient_fn(p - v)  # noqa: E731
        prev = np.asarray(self.params.get("shift", np.zeros(self.dimension)))
        return replace(
            self,
            level_fn=lambda p: base.level_fn(p - v),
            bounding_box=self.bounding_box + v,
            label=f"{self.label}|shift",
            gradient_fn=grad,
            params=dict(self.params, shift=tuple((prev + v).tolist())),
        )

    def scaled(self, lam: float) -> "ImplicitDomain":
        """Similarity scaling about the origin (exact for distance fields)."""
        lam = float(lam)
        if lam <= 0:
            raise BadParamsError("scale factor must be positive")
        base = self
        grad = None
        if self.gradient_fn is not None:
            grad = lambda p: base.gradient_fn(p / lam)  # noqa: E731
        d = self.dimension
        return replace(
            self,
            level_fn=lambda p: lam * base.level_fn(p / lam),
            bounding_box=self.bounding_box * lam,
            label=f"{self.label}|x{lam:g}",
            gradient_fn=grad,
            kind="scaled",
            params={"base": self.kind, "factor": lam},
            surface_area_hint=None
            if self.surface_area_hint is None
            else self.surface_area_hint * lam ** (d - 1),
            volume_hint=None if self.volume_hint is None else self.volume_hint * lam**d,
        )


@dataclass(frozen=True)
class OffsetSpec:
    """Offset request: the sublevel set ``{phi <= eta}`` of ``base``."""

    base: ImplicitDomain
    eta: float


def offset_domain(spec: OffsetSpec) -> ImplicitDomain:
    return spec.base.offset(spec.eta)


def translate(domain: ImplicitDomain, vec) -> ImplicitDomain:
    return domain.translated(vec)


def scale(domain: ImplicitDomain, lam: float) -> ImplicitDomain:
    return domain.scaled(lam)


def union_domains(domains: list[ImplicitDomain], label: str | None = None) -> ImplicitDomain:
    """Min-combination of level functions (set union).

    The result is an exact distance field outside the union but only a lower
    bound inside overlaps, so ``exact_sdf`` is dropped.
    """
    if not domains:
        raise BadParamsError("union of zero domains")
    d = domains[0].dimension
    if any(dom.dimension != d for dom in domains):
        raise DimensionMismatchError("union operands must share a dimension")
    lo = np.min([dom.bounding_box[0] for dom in domains], axis=0)
    hi = np.max([dom.bounding_box[1] for dom in domains], axis=0)
    members = list(domains)

    def level(p):
        return np.min([dom.level_fn(p) for dom in members], axis=0)

    return ImplicitDomain(
        level_fn=level,
        dimension=d,
        bounding_box=np.array([lo, hi]),
        lipschitz_hint=max(dom.lipschitz_hint for dom in domains),
        label=label or f"union[{len(domains)}]",
        exact_sdf=False,
        kind="union",
        params={"members": [dom.label for dom in domains]},
    )
