"""Vector fields, divergence, and sup-norm estimation.

Fields are vectorised maps ``(n, d) -> (n, d)``.  Divergence is analytic when
the catalog provides it and central finite differences otherwise.  Sup norms
over a domain combine a quasi-random sampled maximum with an exact geometric
bound when the domain's shape permits one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .errors import BadParamsError, DimensionMismatchError
from .geometry.implicit import ImplicitDomain

__all__ = ["VectorField", "divergence", "field_catalog", "sup_norms", "SupEstimate"]

_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True)
class VectorField:
    """Vectorised vector field with optional analytic divergence.

    ``sup_over`` / ``div_sup_over`` return an exact upper bound for
    ``sup |f|`` / ``sup |div f|`` over a catalog domain, or None when the
    shape is not recognised.
    """

    eval_fn: Callable[[np.ndarray], np.ndarray]
    dimension: int
    label: str = "field"
    div_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    divergence_free: bool = False
    sup_over: Optional[Callable[[ImplicitDomain], Optional[float]]] = None
    div_sup_over: Optional[Callable[[ImplicitDomain], Optional[float]]] = None
    params: dict = field(default_factory=dict)

    @property
    def divergence_mode(self) -> str:
        return "analytic" if self.div_fn is not None else "finite_difference"

    def __call__(self, x) -> np.ndarray:
        pts, single = _pts(x, self.dimension)
        out = np.asarray(self.eval_fn(pts), dtype=float).reshape(pts.shape)
        return out[0] if single else out

    def divergence(self, x) -> np.ndarray:
        pts, single = _pts(x, self.dimension)
        if self.div_fn is not None:
            out = np.asarray(self.div_fn(pts), dtype=float).reshape(len(pts))
        else:
            out = np.zeros(len(pts))
            step = _FD_STEP * (1.0 + np.linalg.norm(pts, axis=1))
            for k in range(self.dimension):
                e = np.zeros(self.dimension)
                e[k] = 1.0
                hi = np.asarray(self.eval_fn(pts + step[:, None] * e))[:, k]
                lo = np.asarray(self.eval_fn(pts - step[:, None] * e))[:, k]
                out += (hi - lo) / (2.0 * step)
        return out[0] if single else out


def _pts(x, dimension: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dimension:
        raise DimensionMismatchError(
            f"expected points of dimension {dimension}, got shape {pts.shape}"
        )
    return pts, single


def divergence(fld: VectorField, x) -> np.ndarray:
    """Divergence of ``fld`` at ``x`` (analytic when available)."""
    return fld.divergence(x)


# ---------------------------------------------------------------------------
# exact coordinate bounds over catalog domains
# ---------------------------------------------------------------------------


def _shift_of(domain: ImplicitDomain) -> np.ndarray:
    return np.asarray(domain.params.get("shift", np.zeros(domain.dimension)))


def _coord_abs_max(domain: ImplicitDomain, k: int) -> Optional[float]:
    """Exact max of |x_k| over a catalog domain, None when unknown."""
    p = domain.params
    s = _shift_of(domain)
    if domain.kind == "ball":
        return abs(p["center"][k] + s[k]) + p["radius"]
    if domain.kind == "annulus":
        return abs(p["center"][k] + s[k]) + p["r_outer"]
    if domain.kind == "box":
        return abs(p["center"][k] + s[k]) + p["half_extents"][k]
    if domain.kind == "torus":
        c, reach = p["center"], p["major"] + p["minor"]
        return abs(c[k] + s[k]) + (reach if k < 2 else p["minor"])
    if domain.kind == "polygon":
        return max(abs(v[k] + s[k]) for v in p["vertices"]) + p["rounding"]
    if domain.kind == "comb":
        return max(abs(s[k]), abs(1.0 + s[k]))
    if domain.kind == "halfspace":
        # Bounded only through the region of interest.
        return float(np.max(np.abs(domain.bounding_box[:, k])))
    return None


def _radius_max(domain: ImplicitDomain) -> Optional[float]:
    """Exact max of |x| over a catalog domain, None when unknown."""
    p = domain.params
    s = _shift_of(domain)
    if domain.kind == "ball":
        return float(np.linalg.norm(np.add(p["center"], s))) + p["radius"]
    if domain.kind == "annulus":
        return float(np.linalg.norm(np.add(p["center"], s))) + p["r_outer"]
    if domain.kind == "torus":
        c = np.asarray(p["center"]) + s
        reach = math.hypot(math.hypot(c[0], c[1]) + p["major"] + p["minor"], abs(c[2]))
        return max(reach, float(np.linalg.norm(c)) + p["minor"])
    if domain.kind == "box":
        c = np.asarray(p["center"]) + s
        return float(np.linalg.norm(np.abs(c) + np.asarray(p["half_extents"])))
    if domain.kind == "polygon":
        return max(math.hypot(*(np.asarray(v) + s)) for v in p["vertices"]) + p["rounding"]
    if domain.kind == "comb":
        return math.hypot(
            max(abs(s[0]), abs(1.0 + s[0])), max(abs(s[1]), abs(1.0 + s[1]))
        )
    if domain.kind == "halfspace":
        corners = np.abs(domain.bounding_box)
        return float(np.linalg.norm(np.max(corners, axis=0)))
    return None


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _constant(v) -> VectorField:
    vec = np.asarray(v, dtype=float)
    mag = float(np.linalg.norm(vec))
    return VectorField(
        eval_fn=lambda p: np.broadcast_to(vec, p.shape).copy(),
        dimension=vec.size,
        label=f"constant{tuple(np.round(vec, 6).tolist())}",
        div_fn=lambda p: np.zeros(len(p)),
        divergence_free=True,
        sup_over=lambda dom: mag,
        div_sup_over=lambda dom: 0.0,
        params={"v": tuple(vec.tolist())},
    )


def _identity(dimension: int) -> VectorField:
    return VectorField(
        eval_fn=lambda p: p.copy(),
        dimension=dimension,
        label="identity",
        div_fn=lambda p: np.full(len(p), float(dimension)),
        sup_over=_radius_max,
        div_sup_over=lambda dom: float(dimension),
    )


def _rotation(dimension: int) -> VectorField:
    if dimension == 2:
        ev = lambda p: np.column_stack([-p[:, 1], p[:, 0]])  # noqa: E731
    else:
        ev = lambda p: np.column_stack(  # noqa: E731
            [-p[:, 1], p[:, 0], np.zeros(len(p))]
        )
    return VectorField(
        eval_fn=ev,
        dimension=dimension,
        label="rotation",
        div_fn=lambda p: np.zeros(len(p)),
        divergence_free=True,
        sup_over=_radius_max,  # |f| <= |x|, so the radius bound is safe
        div_sup_over=lambda dom: 0.0,
    )


def _shear(dimension: int, rate: float = 1.0) -> VectorField:
    rate = float(rate)

    def ev(p):
        out = np.zeros_like(p)
        out[:, 0] = rate * p[:, 1]
        return out

    def sup(dom):
        m = _coord_abs_max(dom, 1)
        return None if m is None else abs(rate) * m

    return VectorField(
        eval_fn=ev,
        dimension=dimension,
        label=f"shear({rate:g})",
        div_fn=lambda p: np.zeros(len(p)),
        divergence_free=True,
        sup_over=sup,
        div_sup_over=lambda dom: 0.0,
        params={"rate": rate},
    )


def _poly2() -> VectorField:
    def sup(dom):
        mx, r = _coord_abs_max(dom, 0), _radius_max(dom)
        return None if mx is None or r is None else mx * r  # |f| = |x1| |x|

    def div_sup(dom):
        mx = _coord_abs_max(dom, 0)
        return None if mx is None else 3.0 * mx

    return VectorField(
        eval_fn=lambda p: np.column_stack([p[:, 0] ** 2, p[:, 0] * p[:, 1]]),
        dimension=2,
        label="poly(x^2,xy)",
        div_fn=lambda p: 3.0 * p[:, 0],
        sup_over=sup,
        div_sup_over=div_sup,
    )


def _poly3() -> VectorField:
    def sup(dom):
        ms = [_coord_abs_max(dom, k) for k in range(3)]
        if any(m is None for m in ms):
            return None
        return math.sqrt(sum(m**4 for m in ms))

    def div_sup(dom):
        ms = [_coord_abs_max(dom, k) for k in range(3)]
        if any(m is None for m in ms):
            return None
        return 2.0 * sum(ms)

    return VectorField(
        eval_fn=lambda p: p**2,
        dimension=3,
        label="poly(x^2,y^2,z^2)",
        div_fn=lambda p: 2.0 * p.sum(axis=1),
        sup_over=sup,
        div_sup_over=div_sup,
    )


def _saddle3() -> VectorField:
    # curl of (0, 0, xy): divergence-free with nonconstant components
    def sup(dom):
        mx, my = _coord_abs_max(dom, 0), _coord_abs_max(dom, 1)
        return None if mx is None or my is None else math.hypot(mx, my)

    return VectorField(
        eval_fn=lambda p: np.column_stack([p[:, 0], -p[:, 1], np.zeros(len(p))]),
        dimension=3,
        label="saddle",
        div_fn=lambda p: np.zeros(len(p)),
        divergence_free=True,
        sup_over=sup,
        div_sup_over=lambda dom: 0.0,
    )


def _limit_cycle() -> VectorField:
    # Unit circle is an attracting periodic orbit; angular speed is 1 on it.
    def ev(p):
        r2 = (p**2).sum(axis=1)
        return np.column_stack(
            [p[:, 0] * (1.0 - r2) - p[:, 1], p[:, 1] * (1.0 - r2) + p[:, 0]]
        )

    return VectorField(
        eval_fn=ev,
        dimension=2,
        label="limit_cycle",
        div_fn=lambda p: 2.0 - 4.0 * (p**2).sum(axis=1),
        params={},
    )


def _sink(dimension: int) -> VectorField:
    return VectorField(
        eval_fn=lambda p: -p,
        dimension=dimension,
        label="sink",
        div_fn=lambda p: np.full(len(p), -float(dimension)),
        sup_over=_radius_max,
        div_sup_over=lambda dom: float(dimension),
    )


def field_catalog(name: str, dimension: int = 2, **params) -> VectorField:
    """Build a named catalog field; raises BAD_PARAMS for unknown names."""
    allowed = {"constant": {"v"}, "shear": {"rate"}}
    extra = set(params) - allowed.get(name, set())
    if extra:
        raise BadParamsError(f"field {name!r} does not take {sorted(extra)}")
    if name == "constant":
        v = params.get("v")
        if v is None:
            v = [0.0] * (dimension - 1) + [1.0]
        if len(v) != dimension:
            raise BadParamsError(
                f"constant field vector has length {len(v)}, expected {dimension}"
            )
        return _constant(v)
    if name == "identity":
        return _identity(dimension)
    if name == "rotation":
        return _rotation(dimension)
    if name == "shear":
        return _shear(dimension, params.get("rate", 1.0))
    if name == "poly":
        if dimension == 2:
            return _poly2()
        if dimension == 3:
            return _poly3()
        raise BadParamsError("poly field supports dimensions 2 and 3")
    if name == "saddle":
        if dimension != 3:
            raise BadParamsError("saddle field lives in dimension 3")
        return _saddle3()
    if name == "limit_cycle":
        if dimension != 2:
            raise BadParamsError("limit_cycle field lives in dimension 2")
        return _limit_cycle()
    if name == "sink":
        return _sink(dimension)
    raise BadParamsError(
        f"unknown field {name!r}; choices: constant, identity, rotation, shear, "
        "poly, saddle, limit_cycle, sink"
    )


# ---------------------------------------------------------------------------
# sup norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupEstimate:
    """Sampled sup norms inside a domain, plus any exact geometric bounds."""

    sup_f: float
    sup_div: float
    samples_inside: int
    exact_sup_f: Optional[float] = None
    exact_sup_div: Optional[float] = None

    def bound_sup_f(self) -> float:
        """Best available upper-bound-flavoured value for sup |f|."""
        return self.sup_f if self.exact_sup_f is None else max(self.sup_f, self.exact_sup_f)

    def bound_sup_div(self) -> float:
        return (
            self.sup_div if self.exact_sup_div is None else max(self.sup_div, self.exact_sup_div)
        )


def sup_norms(
    fld: VectorField, domain: ImplicitDomain, samples: int = 4096, seed: int = 0
) -> SupEstimate:
    """Estimate sup |f| and sup |div f| over ``domain``.

    Quasi-random (scrambled Halton) points are drawn in the bounding box and
    filtered by membership, so extending ``samples`` with the same seed only
    refines the same sequence and the estimates are monotone nondecreasing.
    """
    samples = int(samples)
    if samples < 16:
        raise BadParamsError("need at least 16 samples")
    if fld.dimension != domain.dimension:
        raise DimensionMismatchError("field and domain dimensions differ")
    eng = qmc.Halton(d=domain.dimension, scramble=True, seed=int(seed))
    u = eng.random(samples)
    lo, hi = domain.bounding_box
    pts = lo + u * (hi - lo)
    keep = domain.contains(pts)
    pts = pts[keep]
    if len(pts) == 0:
        sup_f = sup_div = 0.0
    else:
        sup_f = float(np.max(np.linalg.norm(fld(pts), axis=1)))
        sup_div = float(np.max(np.abs(fld.divergence(pts))))
    return SupEstimate(
        sup_f=sup_f,
        sup_div=sup_div,
        samples_inside=int(len(pts)),
        exact_sup_f=fld.sup_over(domain) if fld.sup_over else None,
        exact_sup_div=fld.div_sup_over(domain) if fld.div_sup_over else None,
    )
