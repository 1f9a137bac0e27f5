"""Named experiment scenarios: each turns a config into a RunReport.

Every runner is deterministic given (config, seed): randomized suites derive
per-item generators from ``numpy.random.SeedSequence`` so sharding work across
threads cannot change the numbers, only the wall clock.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bounds import (
    BoundReport,
    Ingredient,
    PairCache,
    QuadOpts,
    DivTheoremHarness,
    check_cor3,
    check_general,
    check_measure_lemma,
    check_thm1,
    check_thm2,
    check_thm4,
    check_vdotn,
    offset_convergence_study,
    render_verdict,
)
from .config import ExperimentConfig
from .dynamics import check_cor_2d, integrate, minimal_set_probe
from .errors import ConfigInvalidError, FluxgaugeError
from .fields import VectorField, field_catalog
from .figures import (
    render_convergence,
    render_heat_map,
    render_lhs_rhs,
    render_mesh_svg,
    render_phase_portrait,
)
from .geometry.curves import make_m_cover
from .geometry.zoo import annulus, ball, halfspace, make_comb, rounded_box, torus
from .measures import grid_centers, surface_limit_study
from .quadrature import mc_flux_oracle
from .reporting import RunReport

__all__ = ["SCENARIOS", "list_scenarios", "default_config", "run", "thread_count"]


def thread_count(config: ExperimentConfig | None = None) -> int:
    """Worker cap: config key first, then FLUXGAUGE_THREADS, default 1."""
    if config is not None and config.get("threads") is not None:
        return max(1, int(config.get("threads")))
    env = os.environ.get("FLUXGAUGE_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigInvalidError(f"FLUXGAUGE_THREADS must be an integer, got {env!r}")
    return 1


def _parallel_map(fn, items, workers: int) -> list:
    """Map preserving submission order, so reports merge deterministically."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# randomized proven-bound suite
# ---------------------------------------------------------------------------

_SUITE_PITCH = {2: 1.0 / 128.0, 3: 1.0 / 32.0}
_SUITE_MC_SAMPLES = {2: 2_000_000, 3: 2_000_000}
_SUITE_FIELDS = {
    2: ("constant", "identity", "rotation", "shear", "poly"),
    3: ("constant", "identity", "rotation", "shear", "poly", "saddle"),
}


def _unit_vector(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    norm = float(np.linalg.norm(v))
    return v / (norm if norm > 1e-12 else 1.0)


def _random_source_domain(rng, dim: int):
    """Random domain whose boundary carries the clipped flux."""
    draw = rng.random()
    if dim == 2:
        if draw < 0.18:
            return halfspace(
                _unit_vector(rng, 2), offset=float(rng.uniform(-0.3, 0.3)), extent=1.8
            )
        if draw < 0.45:
            return ball(center=rng.uniform(-0.5, 0.5, 2), radius=float(rng.uniform(0.4, 1.1)))
        if draw < 0.70:
            inner = float(rng.uniform(0.30, 0.50))
            return annulus(
                center=rng.uniform(-0.3, 0.3, 2),
                r_inner=inner,
                r_outer=inner + float(rng.uniform(0.35, 0.70)),
            )
        return rounded_box(
            center=rng.uniform(-0.4, 0.4, 2),
            half_extents=rng.uniform(0.35, 0.90, 2),
            rounding=float(rng.uniform(0.08, 0.20)),
        )
    if draw < 0.18:
        return halfspace(
            _unit_vector(rng, 3), offset=float(rng.uniform(-0.25, 0.25)), extent=1.6
        )
    if draw < 0.45:
        return ball(center=rng.uniform(-0.3, 0.3, 3), radius=float(rng.uniform(0.4, 0.9)))
    if draw < 0.70:
        return torus(
            center=rng.uniform(-0.15, 0.15, 3),
            major=float(rng.uniform(0.45, 0.62)),
            minor=float(rng.uniform(0.16, 0.26)),
        )
    return rounded_box(
        center=rng.uniform(-0.3, 0.3, 3),
        half_extents=rng.uniform(0.30, 0.60, 3),
        rounding=float(rng.uniform(0.08, 0.15)),
    )


def _random_clip_domain(rng, dim: int):
    """Random compact domain acting as the observation window."""
    draw = rng.random()
    if dim == 2:
        if draw < 0.45:
            return ball(center=rng.uniform(-0.4, 0.4, 2), radius=float(rng.uniform(0.5, 1.0)))
        if draw < 0.75:
            return rounded_box(
                center=rng.uniform(-0.3, 0.3, 2),
                half_extents=rng.uniform(0.40, 0.80, 2),
                rounding=float(rng.uniform(0.10, 0.20)),
            )
        inner = float(rng.uniform(0.30, 0.45))
        return annulus(
            center=rng.uniform(-0.2, 0.2, 2),
            r_inner=inner,
            r_outer=inner + float(rng.uniform(0.40, 0.60)),
        )
    if draw < 0.55:
        return ball(center=rng.uniform(-0.25, 0.25, 3), radius=float(rng.uniform(0.5, 0.9)))
    return rounded_box(
        center=rng.uniform(-0.25, 0.25, 3),
        half_extents=rng.uniform(0.35, 0.60, 3),
        rounding=float(rng.uniform(0.08, 0.15)),
    )


def _random_field(rng, dim: int) -> VectorField:
    names = _SUITE_FIELDS[dim]
    name = names[int(rng.integers(len(names)))]
    if name == "constant":
        vec = _unit_vector(rng, dim) * float(rng.uniform(0.5, 2.0))
        return field_catalog("constant", dim, v=vec.tolist())
    if name == "shear":
        return field_catalog("shear", dim, rate=float(rng.uniform(0.5, 2.0)))
    return field_catalog(name, dim)


def _config_field(cfg: ExperimentConfig, dim: int, default: str = "constant") -> VectorField:
    spec = cfg.get("field")
    if spec is None:
        return field_catalog(default, dim)
    try:
        return field_catalog(spec["name"], dim, **spec.get("params", {}))
    except FluxgaugeError as exc:
        raise ConfigInvalidError(f"field: {exc}") from exc


def _verify_one(task) -> dict:
    """One randomized configuration: four bound checks plus the MC oracle."""
    dim, index, cfg_seed, pitch, mc_samples = task
    rng = np.random.default_rng(np.random.SeedSequence((cfg_seed, dim, index)))
    d1 = _random_source_domain(rng, dim)
    d2 = _random_clip_domain(rng, dim)
    fld = _random_field(rng, dim)

    label_seed = cfg_seed + 1000 * dim + index
    opts = QuadOpts(resolution=pitch, seed=label_seed)
    cache = PairCache(d1, d2, fld, opts)
    reports = [("THM1", check_thm1(d1, d2, fld, opts, cache))]
    if fld.divergence_free:
        reports.append(("THM2", check_thm2(d1, d2, fld, opts, cache)))
    reports.append(("COR3", check_cor3(d1, d2, opts, cache)))
    reports.append(("GENERAL_EQ5", check_general(d1, d2, fld, opts, cache)))

    flux = cache.flux_clipped()
    mc = mc_flux_oracle(
        fld,
        d1,
        clip=d2,
        shell_width=pitch / 4.0,
        n_samples=mc_samples,
        seed=label_seed,
    )
    gap = abs(flux.value - mc.value)
    budget = 3.0 * (mc.std_error + flux.error)
    row = {
        "config": f"d{dim}-c{index:02d}",
        "d1": d1.label,
        "d2": d2.label,
        "field": fld.label,
        "flux_mesh": float(flux.value),
        "flux_mesh_error": float(flux.error),
        "flux_mc": float(mc.value),
        "mc_std_error": float(mc.std_error),
        "mc_hits": int(mc.n_hits),
        "oracle_gap": float(gap),
        "oracle_budget": float(budget),
        "oracle_agrees": bool(gap <= budget),
    }
    return {
        "dim": dim,
        "index": index,
        "seed": label_seed,
        "pitch": pitch,
        "reports": reports,
        "row": row,
    }


def _run_verify(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    if cfg.get("geometry") is not None:
        _run_verify_single(cfg, report, out)
        return

    dims = [cfg.get("dimension")] if cfg.get("dimension") else [2, 3]
    n_configs = int(cfg.get("n_configs", 50))
    rows = []
    all_reports = []
    tasks = []
    for dim in dims:
        pitch = cfg.resolution or _SUITE_PITCH[dim]
        mc_samples = int(cfg.get("mc_samples", _SUITE_MC_SAMPLES[dim]))
        for index in range(n_configs):
            tasks.append((dim, index, cfg.seed, pitch, mc_samples))

    for done in _parallel_map(_verify_one, tasks, thread_count(cfg)):
        for name, rep in done["reports"]:
            report.add(
                f"{done['row']['config']}-{name}", rep, done["seed"], done["pitch"]
            )
            all_reports.append(rep)
        rows.append(done["row"])

    report.extras["oracle_rows"] = rows
    report.extras["oracle_all_agree"] = bool(all(r["oracle_agrees"] for r in rows))
    report.extras["n_configurations"] = len(rows)
    fig = render_lhs_rhs(all_reports, out / "verify_lhs_rhs.svg", title="clipped-flux bounds")
    report.figures.append(fig.name)


def _run_verify_single(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    """Explicit-geometry variant: one (D1, D2, field) triple from the config."""
    d1 = cfg.build_domain("d1")
    d2 = cfg.build_domain("d2")
    dim = d2.dimension
    fld = _config_field(cfg, dim)
    pitch = cfg.resolution or _SUITE_PITCH[dim]
    opts = QuadOpts(resolution=pitch, seed=cfg.seed)
    cache = PairCache(d1, d2, fld, opts)

    report.add("pair-THM1", check_thm1(d1, d2, fld, opts, cache), cfg.seed, pitch)
    if fld.divergence_free:
        report.add("pair-THM2", check_thm2(d1, d2, fld, opts, cache), cfg.seed, pitch)
    report.add("pair-COR3", check_cor3(d1, d2, opts, cache), cfg.seed, pitch)
    report.add(
        "pair-GENERAL_EQ5", check_general(d1, d2, fld, opts, cache), cfg.seed, pitch
    )

    mc = mc_flux_oracle(
        fld,
        d1,
        clip=d2,
        shell_width=pitch / 4.0,
        n_samples=int(cfg.get("mc_samples", _SUITE_MC_SAMPLES[dim])),
        seed=cfg.seed,
    )
    flux = cache.flux_clipped()
    report.extras["oracle_rows"] = [
        {
            "config": "pair",
            "d1": d1.label,
            "d2": d2.label,
            "field": fld.label,
            "flux_mesh": float(flux.value),
            "flux_mesh_error": float(flux.error),
            "flux_mc": float(mc.value),
            "mc_std_error": float(mc.std_error),
            "mc_hits": int(mc.n_hits),
            "oracle_gap": float(abs(flux.value - mc.value)),
            "oracle_budget": float(3.0 * (mc.std_error + flux.error)),
            "oracle_agrees": bool(
                abs(flux.value - mc.value) <= 3.0 * (mc.std_error + flux.error)
            ),
        }
    ]
    clipped = cache.clipped()
    if len(clipped.areas):
        fig = render_mesh_svg(
            clipped, out / "verify_pair_clipped.svg", clip_domain=d2,
            title="portion of the source boundary inside the window",
        )
        report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# comb tightness study
# ---------------------------------------------------------------------------


def _run_comb_study(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    teeth = [int(n) for n in cfg.get("teeth", [4, 8, 16])]
    rows = []
    ratios = []
    for n in teeth:
        thickness = 1.0 / (n * n)
        pitch = cfg.resolution or min(1.0 / 512.0, thickness / 8.0)
        d1 = make_comb(n)
        # Shift by half a tooth so exactly one long edge per tooth lands
        # inside the copy: the per-tooth cancellation disappears and the
        # normal integral grows like the tooth count.
        shift = thickness / 2.0
        d2 = d1.translated((shift, shift))
        opts = QuadOpts(resolution=pitch, seed=cfg.seed)
        cache = PairCache(d1, d2, None, opts)
        rep = check_cor3(d1, d2, opts, cache)
        report.add(f"comb-n{n}-COR3", rep, cfg.seed, pitch)

        perimeter = rep.ingredients["area_bd_d2"].value
        ratio = rep.lhs / rep.rhs if rep.rhs > 0 else float("inf")
        ratios.append(ratio)
        rows.append(
            {
                "teeth": n,
                "pitch": pitch,
                "perimeter": float(perimeter),
                "perimeter_model": float(2 * n + 2),
                "normal_integral": float(rep.lhs),
                "normal_integral_model": float(n),
                "half_perimeter": float(rep.rhs),
                "ratio": float(ratio),
            }
        )
        if n == teeth[0]:
            fig = render_mesh_svg(
                cache.clipped(),
                out / f"comb_clipped_n{n}.svg",
                clip_domain=d2,
                title=f"comb boundary kept inside the shifted copy (n={n})",
            )
            report.figures.append(fig.name)

    report.extras["comb_rows"] = rows
    report.extras["ratio_strictly_increasing"] = bool(
        all(b > a for a, b in zip(ratios, ratios[1:]))
    )
    fig = render_convergence(
        teeth,
        {"lhs / (perimeter/2)": ratios},
        out / "comb_ratio.svg",
        title="how close the normal integral gets to half the perimeter",
        xlabel="teeth",
        loglog=False,
    )
    report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# immersed multi-cover counterexample
# ---------------------------------------------------------------------------


def _run_immersion(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    m = int(cfg.get("m_cover", 10))
    eps = float(cfg.get("perturbation", 0.05))
    d2 = (
        cfg.build_domain("d2")
        if cfg.get("geometry") is not None
        else ball(center=(0.0, 0.75), radius=1.25)
    )
    pitch = cfg.resolution or 1.0 / 256.0
    opts = QuadOpts(resolution=pitch, seed=cfg.seed)

    cover = make_m_cover(m, perturbation=eps)
    rep_cover = check_cor3(cover, d2, opts)
    report.add(f"cover-m{m}-COR3", rep_cover, cfg.seed, pitch)

    single = make_m_cover(1, perturbation=eps)
    rep_single = check_cor3(single, d2, opts)
    report.add("cover-m1-COR3", rep_single, cfg.seed, pitch)

    report.extras["immersion"] = {
        "m": m,
        "perturbation": eps,
        "normal_integral": float(rep_cover.lhs),
        "single_loop_model": 2.0,
        "multi_loop_model": float(2 * m),
        "half_area": float(rep_cover.rhs),
        "flags": list(rep_cover.flags),
        "single_cover_normal_integral": float(rep_single.lhs),
        "exceeds_half_area": bool(rep_cover.lhs > rep_cover.rhs),
    }
    fig = render_mesh_svg(
        cover.to_mesh(1024),
        out / "immersion_curve.svg",
        clip_domain=d2,
        title=f"{m}-fold cover of the circle against the window",
    )
    report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# convex cross-section probes
# ---------------------------------------------------------------------------


def _convex_case(report, out, cfg, case, d1, d2, v, pitch, fig_name=None):
    opts = QuadOpts(resolution=pitch, seed=cfg.seed)
    cache = PairCache(d1, d2, None, opts)
    claimed, derived = check_thm4(d1, d2, opts, cache)
    report.add(f"{case}-THM4_CLAIMED", claimed, cfg.seed, pitch)
    report.add(f"{case}-THM4_PROOF_DERIVED", derived, cfg.seed, pitch)
    row = {
        "case": case,
        "pitch": pitch,
        "lhs": float(derived.lhs),
        "claimed_rhs": float(claimed.rhs),
        "derived_rhs": float(derived.rhs),
        "derived_slack": float(derived.slack),
        "diameter": float(derived.ingredients["diameter"].value),
        "claimed_verdict": claimed.verdict,
        "derived_verdict": derived.verdict,
    }
    if v is not None:
        vc, vd = check_vdotn(d1, d2, v, opts, cache)
        report.add(f"{case}-LEMMA_VDOTN_CLAIMED", vc, cfg.seed, pitch)
        report.add(f"{case}-LEMMA_VDOTN_PROOF_DERIVED", vd, cfg.seed, pitch)
        row["vdotn_lhs"] = float(vd.lhs)
        row["vdotn_claimed_verdict"] = vc.verdict
        row["vdotn_derived_verdict"] = vd.verdict
    if fig_name:
        clipped = cache.clipped()
        if len(clipped.areas):
            fig = render_mesh_svg(
                clipped, out / fig_name, clip_domain=d2,
                title=f"{case}: boundary portion inside the convex window",
            )
            report.figures.append(fig.name)
    return row, [claimed, derived]


def _run_convex_probe(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    rows = []
    reports = []
    if cfg.get("geometry") is not None:
        d1 = cfg.build_domain("d1")
        d2 = cfg.build_domain("d2")
        pitch = cfg.resolution or QuadOpts().pitch(d2.dimension)
        row, reps = _convex_case(report, out, cfg, "custom", d1, d2, None, pitch)
        rows.append(row)
        reports.extend(reps)
    else:
        dims = [cfg.get("dimension")] if cfg.get("dimension") else [2, 3]
        if 2 in dims:
            row, reps = _convex_case(
                report,
                out,
                cfg,
                "chord",
                halfspace((0.0, -1.0), 0.0, extent=1.8),
                ball(center=(0.0, 0.0), radius=1.0),
                (0.0, 1.0),
                cfg.resolution or 1.0 / 256.0,
                fig_name="convex_chord.svg",
            )
            rows.append(row)
            reports.extend(reps)
            row, reps = _convex_case(
                report,
                out,
                cfg,
                "enclosed-ball",
                ball(center=(0.2, 0.1), radius=0.3),
                ball(center=(0.0, 0.0), radius=1.0),
                None,
                cfg.resolution or 1.0 / 256.0,
            )
            rows.append(row)
            reports.extend(reps)
        if 3 in dims:
            row, reps = _convex_case(
                report,
                out,
                cfg,
                "equator",
                halfspace((0.0, 0.0, -1.0), 0.0, extent=1.6),
                ball(center=(0.0, 0.0, 0.0), radius=1.0),
                (0.0, 0.0, 1.0),
                cfg.resolution or 1.0 / 48.0,
            )
            rows.append(row)
            reports.extend(reps)

    report.extras["convex_rows"] = rows
    fig = render_lhs_rhs(
        reports, out / "convex_lhs_rhs.svg", title="normal integral vs cross-section volume"
    )
    report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# offset convergence
# ---------------------------------------------------------------------------


def _run_offset_study(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    etas = [float(e) for e in cfg.get("etas", [0.02, 0.01, 0.005])]
    pitch = cfg.resolution or 1.0 / 512.0
    opts = QuadOpts(resolution=pitch, seed=cfg.seed)

    if cfg.get("geometry") is not None:
        targets = [("custom", cfg.build_domain("d2"), cfg.build_domain("d1"))]
    else:
        # The transversal slice y = 0.4 crosses the ball interior and the
        # comb spine, staying clear of every tooth edge for these offsets.
        slice_line = halfspace((0.0, -1.0), -0.4, extent=1.8)
        targets = [
            ("ball", ball(center=(0.0, 0.0), radius=1.0), slice_line),
            ("comb", make_comb(4), slice_line),
        ]

    all_tables = {}
    curves = {}
    for name, d2, d1 in targets:
        fld = _config_field(cfg, d2.dimension, default="identity")
        study = offset_convergence_study(d2, etas, field=fld, d1=d1, opts=opts)
        table = {
            "rows": [
                {
                    "eta": r.eta,
                    "vol": r.vol,
                    "area": r.area,
                    "flux": r.flux,
                    "clipped_flux": r.clipped_flux,
                }
                for r in study.rows
            ],
            "cauchy": study.cauchy,
            "rates": study.rates,
            "monotone": study.monotone,
            "field": fld.label,
        }
        all_tables[name] = table
        base = study.rows[-1]
        for quantity in study.quantities():
            errs = [
                abs(getattr(r, quantity) - getattr(base, quantity))
                for r in study.rows[:-1]
            ]
            curves[f"{name}:{quantity}"] = errs

    report.extras["offset_tables"] = all_tables
    fig = render_convergence(
        etas,
        curves,
        out / "offset_convergence.svg",
        title="distance to the base-domain values as the offset shrinks",
        xlabel="offset",
    )
    report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# surface-limit (ball means of the normal) study
# ---------------------------------------------------------------------------


def _cap_report(estimate) -> BoundReport:
    """Ball means vs the cap set by ball-boundary area over surface area.

    The lhs is the worst slack-adjusted magnitude: each center may discount
    the mass of atoms within one pitch of its ball sphere, which bounds how
    much mesh-membership misassignment can inflate the mean.
    """
    mags = estimate.magnitudes
    adjusted = [m - s for m, s in zip(mags, estimate.slacks)]
    worst = int(np.argmax(adjusted))
    lhs = max(0.0, float(adjusted[worst]))
    rhs = float(estimate.bound)
    verdict = render_verdict(lhs, rhs, 1e-12, 0.0)
    return BoundReport(
        inequality_id="MEASURE_LEMMA",
        lhs=lhs,
        rhs=rhs,
        tolerance=1e-12,
        verdict=verdict,
        ingredients={
            "max_ball_mean": Ingredient(
                float(max(mags)), 0.0, "max |mean normal| over the center grid"
            ),
            "membership_slack_at_worst": Ingredient(
                float(estimate.slacks[worst]), 0.0,
                "mass of atoms within one pitch of that ball sphere",
            ),
            "surface_area": Ingredient(float(estimate.source_area), 0.0, "mesh total"),
            "ball_radius": Ingredient(float(estimate.radius), 0.0, "given"),
        },
    )


def _run_measure_limit(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    teeth = [int(n) for n in cfg.get("teeth", [4, 8, 16])]
    r = float(cfg.get("ball_radius", 0.2))
    counts = [int(c) for c in cfg.get("grid", [3, 3])]
    centers = grid_centers((0.0, 0.0), (1.0, 1.0), counts)

    domains = [make_comb(n) for n in teeth]
    pitches = [
        cfg.resolution or min(1.0 / 512.0, 1.0 / (8.0 * n * n)) for n in teeth
    ]
    study = surface_limit_study(domains, centers, r, pitches)

    rows = []
    for n, pitch, dom, estimate in zip(teeth, pitches, domains, study.estimates):
        rep = _cap_report(estimate)
        report.add(f"ball-mean-cap-n{n}", rep, cfg.seed, pitch)
        rows.append(
            {
                "teeth": n,
                "pitch": pitch,
                "surface_area": float(estimate.source_area),
                "max_ball_mean": float(estimate.max_magnitude),
                "cap": float(estimate.bound),
                "within_cap": bool(estimate.within_bound()),
            }
        )
        csv_path = out / f"measure_means_n{n}.csv"
        estimate.to_csv(csv_path)
        fig = render_heat_map(
            estimate.centers,
            estimate.magnitudes,
            out / f"measure_heat_n{n}.svg",
            title=f"|mean normal| over ball centers (n={n})",
            overlay=dom,
        )
        report.figures.append(fig.name)

    # Exact discrete split-integral instances, including the tight two-point
    # configuration whose slack is exactly zero.
    tight = check_measure_lemma(
        weights=[1.0, 1.0], values=[1.0, -1.0], in_u=[True, True], in_v=[True, False]
    )
    report.add("split-integral-tight", tight, cfg.seed, 0.0)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 424242)))
    for k in range(32):
        size = int(rng.integers(1, 21))
        rep = check_measure_lemma(
            weights=rng.uniform(0.0, 2.0, size),
            values=rng.uniform(-3.0, 3.0, size),
            in_u=rng.random(size) < 0.7,
            in_v=rng.random(size) < 0.5,
        )
        report.add(f"split-integral-{k:02d}", rep, cfg.seed, 0.0)

    report.extras["ball_mean_rows"] = rows
    report.extras["decay_factors"] = [float(f) for f in study.decay_factors]
    report.extras["all_within_cap"] = bool(study.all_bounded)
    fig = render_convergence(
        [float(n) for n in teeth],
        {"max |ball mean|": list(study.max_magnitudes), "cap": list(study.bounds)},
        out / "measure_decay.svg",
        title="ball means of the normal flatten as the boundary grows",
        xlabel="teeth",
    )
    report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# closed-orbit displacement audit and recurrence probe
# ---------------------------------------------------------------------------


def _run_ode_audit(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    fld = field_catalog("limit_cycle", 2)
    x0 = (1.0, 0.0)
    period = 2.0 * math.pi
    tol = 1e-10
    traj = integrate(fld, x0, period, tol=tol)
    traj.spline  # build the dense interpolant before any worker threads share it

    example = ball(center=(1.0, 0.0), radius=0.5)
    rep = check_cor_2d(traj, example, allow_non_simple=bool(cfg.get("allow_non_simple")))
    report.add("orbit-example", rep, cfg.seed, tol)

    n_disks = int(cfg.get("n_disks", 100))
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 31337)))
    disks = [
        ball(center=rng.uniform(-1.5, 1.5, 2), radius=float(rng.uniform(0.1, 0.6)))
        for _ in range(n_disks)
    ]

    def check_disk(item):
        index, disk = item
        return index, disk, check_cor_2d(traj, disk)

    disk_rows = []
    for index, disk, disk_rep in _parallel_map(
        check_disk, enumerate(disks), thread_count(cfg)
    ):
        report.add(f"disk-{index:02d}", disk_rep, cfg.seed, tol)
        disk_rows.append(
            {
                "disk": disk.label,
                "displacement": float(disk_rep.lhs),
                "half_perimeter": float(disk_rep.rhs),
                "verdict": disk_rep.verdict,
            }
        )

    horizons = [float(t) for t in cfg.get("horizons", [10.0, 50.0, 100.0])]
    r0 = float(cfg.get("ball_radius", 0.1))
    probe = minimal_set_probe(fld, x0, (1.0, 0.0), r0, horizons, tol=1e-9)
    probe_rows = [
        {
            "horizon": row.horizon,
            "displacement": list(row.displacement),
            "displacement_magnitude": row.displacement_magnitude,
            "chord_bound": row.chord_bound,
            "within_bound": bool(row.within_bound),
            "residence_time": row.residence_time,
            "n_passes": row.n_passes,
            "max_single_chord": row.max_single_chord,
        }
        for row in probe.rows
    ]
    far = minimal_set_probe(fld, x0, (3.0, 3.0), r0, [horizons[0]], tol=1e-9)

    report.extras["disk_rows"] = disk_rows
    report.extras["probe"] = {
        "y0": list(probe.y0),
        "r0": probe.r0,
        "rows": probe_rows,
        "residence_growth": float(probe.residence_growth),
        "ball_diameter": 2.0 * probe.r0,
    }
    report.extras["far_ball_probe"] = {
        "y0": list(far.y0),
        "n_passes": far.rows[0].n_passes,
        "residence_time": far.rows[0].residence_time,
        "displacement_magnitude": far.rows[0].displacement_magnitude,
    }
    fig = render_phase_portrait(
        traj,
        out / "ode_orbit.svg",
        regions=(example, ball(center=(1.0, 0.0), radius=r0)),
        title="closed orbit with an audit disk and the probe ball",
    )
    report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# divergence-theorem residual sweep
# ---------------------------------------------------------------------------

_DIV_PITCH = {2: 1.0 / 256.0, 3: 1.0 / 64.0}
_DIV_FIELDS = ("constant", "identity", "rotation", "shear", "poly")


def _div_domains(dim: int):
    # Centers sit slightly off the origin so no flux or divergence integral
    # vanishes by symmetry; symmetric zeros would leave only cancellation
    # noise, whose refinement ratio measures nothing.
    if dim == 2:
        return [
            ("ball", ball(center=(0.05, -0.03), radius=0.9)),
            ("annulus", annulus(center=(0.07, 0.04), r_inner=0.35, r_outer=0.85)),
            ("box", rounded_box(center=(-0.04, 0.06), half_extents=(0.7, 0.5), rounding=0.12)),
        ]
    return [
        ("ball", ball(center=(0.05, -0.03, 0.02), radius=0.8)),
        ("torus", torus(center=(0.03, -0.05, 0.04), major=0.6, minor=0.25)),
        ("box", rounded_box(center=(-0.04, 0.03, 0.05), half_extents=(0.6, 0.5, 0.4), rounding=0.1)),
    ]


def _run_divergence_check(cfg: ExperimentConfig, report: RunReport, out: Path) -> None:
    dims = [cfg.get("dimension")] if cfg.get("dimension") else [2, 3]
    rows = []
    reports = []
    for dim in dims:
        pitch = cfg.resolution or _DIV_PITCH[dim]
        opts = QuadOpts(resolution=pitch, seed=cfg.seed)
        for dom_name, dom in _div_domains(dim):
            harness = DivTheoremHarness(dom, opts)
            for field_name in _DIV_FIELDS:
                fld = field_catalog(field_name, dim)
                rep = harness.check(fld)
                report.add(f"d{dim}-{dom_name}-{field_name}", rep, cfg.seed, pitch)
                reports.append(rep)
                scale = rep.ingredients["scale"].value
                rows.append(
                    {
                        "dim": dim,
                        "domain": dom.label,
                        "field": fld.label,
                        "pitch": pitch,
                        "residual": float(rep.lhs),
                        "relative_residual": float(rep.lhs / scale),
                        "relative_residual_coarse": float(
                            rep.ingredients["residual_coarse"].value / scale
                        ),
                        "order": float(rep.ingredients["observed_order"].value),
                    }
                )
    report.extras["residual_rows"] = rows
    # Aggregate convergence order over the sweep: per-case residual ratios
    # wander wherever the two quadrature errors nearly cancel, but the suite
    # total is carried by the cases with genuine signal.
    total_fine = math.fsum(r["relative_residual"] for r in rows)
    total_coarse = math.fsum(r["relative_residual_coarse"] for r in rows)
    report.extras["aggregate_order"] = (
        float("inf")
        if total_fine <= 0.0
        else float(math.log2(total_coarse / total_fine))
        if total_coarse > total_fine
        else 0.0
    )
    fig = render_lhs_rhs(
        reports,
        out / "divergence_residuals.svg",
        title="flux-vs-divergence residual against the 1% budget",
    )
    report.figures.append(fig.name)


# ---------------------------------------------------------------------------
# catalog and entry point
# ---------------------------------------------------------------------------

SCENARIOS = {
    "verify": {
        "runner": _run_verify,
        "description": "Randomized (source, window, field) triples; every proven "
        "clipped-flux bound must hold and the mesh flux must match a thin-shell "
        "Monte Carlo estimate.",
        "claim": "Flux across the part of a boundary inside a window is capped by "
        "window area times sup|f| plus window volume times sup|div f|; half of "
        "that area term suffices for divergence-free fields.",
    },
    "comb-study": {
        "runner": _run_comb_study,
        "description": "Comb domains against a half-tooth-shifted copy for "
        "n in {4, 8, 16} teeth.",
        "claim": "The half-perimeter cap on the normal integral is asymptotically "
        "tight: combs push the ratio toward 1 as teeth multiply.",
    },
    "immersion-counterexample": {
        "runner": _run_immersion,
        "description": "An m-fold cover of the circle clipped by a disk window, "
        "next to the honest single cover.",
        "claim": "The half-area cap needs a space-separating boundary: a curve "
        "traversed m times accumulates ~2m and sails past the cap, so the run "
        "is flagged, not failed.",
    },
    "convex-probe": {
        "runner": _run_convex_probe,
        "description": "Chord (d=2) and equatorial-disk (d=3) configurations "
        "against convex windows, reporting both rhs variants.",
        "claim": "For convex windows the normal integral is capped by the volume "
        "of a ball of half the window diameter in one lower dimension; the "
        "half-strength variant of that cap fails on these tight configurations.",
    },
    "offset-study": {
        "runner": _run_offset_study,
        "description": "Volume, area, and flux of outward level-set offsets of a "
        "ball and a comb as the offset shrinks.",
        "claim": "Offset domains converge to the base domain: successive "
        "differences shrink monotonically at first order in the offset.",
    },
    "measure-limit": {
        "runner": _run_measure_limit,
        "description": "Ball means of the boundary normal over a center grid for "
        "growing combs, plus exact discrete split-integral instances.",
        "claim": "Against area-normalized boundary measures the mean normal in "
        "any ball dies off like ball-boundary area over total surface area, so "
        "normals average out in the large-boundary limit.",
    },
    "ode-audit": {
        "runner": _run_ode_audit,
        "description": "A planar limit-cycle orbit audited against random disks, "
        "plus a displacement probe on a small ball straddling the cycle.",
        "claim": "A simple closed orbit's displacement accumulated inside any "
        "disk telescopes to entry-exit chords and stays below half the disk "
        "perimeter.",
    },
    "divergence-check": {
        "runner": _run_divergence_check,
        "description": "Boundary flux vs volume integral of the divergence over "
        "smooth and cornered domains in both dimensions.",
        "claim": "Mesh flux and cell-weighted divergence integrals agree within "
        "1% at working pitch and converge at first order or better.",
    },
}


def list_scenarios() -> list:
    """Stable-ordered catalog: name, one-line description, and the claim."""
    return [
        {"name": name, "description": entry["description"], "claim": entry["claim"]}
        for name, entry in SCENARIOS.items()
    ]


def default_config(name: str) -> dict:
    if name not in SCENARIOS:
        raise ConfigInvalidError(
            f"unknown scenario {name!r}; choices: {', '.join(SCENARIOS)}"
        )
    return {"scenario": name, "seed": 0}


def run(config: ExperimentConfig, out_dir=None) -> tuple:
    """Execute the configured scenario; returns (RunReport, output paths)."""
    name = config.scenario
    if name not in SCENARIOS:
        raise ConfigInvalidError(f"unknown scenario {name!r}")
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(scenario=name, config=config.to_dict())
    started = time.perf_counter()
    SCENARIOS[name]["runner"](config, report, out)
    report.wall_clock = time.perf_counter() - started
    paths = report.write(out)
    return report, paths
