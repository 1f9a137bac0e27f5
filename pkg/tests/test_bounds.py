"""Inequality checks on configurations with known exact answers.

The half-plane-vs-unit-disk chord configuration is the workhorse: every
integral in it has a closed form, so lhs and rhs values can be pinned hard.
"""

import math

import numpy as np
import pytest

from fluxgauge import (
    GATING_IDS,
    INEQUALITY_IDS,
    PairCache,
    QuadOpts,
    annulus,
    ball,
    check_cor3,
    check_div_theorem,
    check_general,
    check_measure_lemma,
    check_thm1,
    check_thm2,
    check_thm4,
    check_vdotn,
    field_catalog,
    halfspace,
    is_gating_violation,
    require_convex,
)
from fluxgauge.bounds import HOLDS, INCONCLUSIVE, VIOLATED, render_verdict
from fluxgauge.errors import (
    BadParamsError,
    NotConvexError,
    NotDivergenceFreeError,
)

CHORD_D1 = halfspace((0.0, -1.0), 0.0, extent=1.8)
CHORD_D2 = ball((0.0, 0.0), 1.0)
OPTS = QuadOpts(resolution=1.0 / 256.0)


def test_flux_bound_on_the_chord():
    f = field_catalog("constant", 2, v=[0.0, 1.0])
    rep = check_thm1(CHORD_D1, CHORD_D2, f, OPTS)
    assert rep.verdict == HOLDS
    assert rep.lhs == pytest.approx(2.0, abs=1e-3)
    # sup|f| = 1 and div f = 0, so the cap is the full window boundary length
    assert rep.rhs == pytest.approx(2 * math.pi, rel=1e-3)
    assert rep.slack > 0


def test_divergence_free_bound_halves_the_cap():
    f = field_catalog("constant", 2, v=[0.0, 1.0])
    rep1 = check_thm1(CHORD_D1, CHORD_D2, f, OPTS)
    rep2 = check_thm2(CHORD_D1, CHORD_D2, f, OPTS)
    assert rep2.verdict == HOLDS
    assert rep2.rhs == pytest.approx(rep1.rhs / 2.0, rel=1e-9)


def test_thm2_requires_divergence_free():
    with pytest.raises(NotDivergenceFreeError):
        check_thm2(CHORD_D1, CHORD_D2, field_catalog("identity", 2), OPTS)


def test_normal_bound_on_the_chord():
    rep = check_cor3(CHORD_D1, CHORD_D2, OPTS)
    assert rep.verdict == HOLDS
    assert rep.lhs == pytest.approx(2.0, abs=1e-3)
    assert rep.rhs == pytest.approx(math.pi, rel=1e-3)


def test_general_bound_on_the_chord():
    f = field_catalog("constant", 2, v=[0.0, 1.0])
    rep = check_general(CHORD_D1, CHORD_D2, f, OPTS)
    assert rep.verdict == HOLDS
    assert rep.lhs == pytest.approx(2.0, abs=1e-3)
    assert rep.rhs == pytest.approx(math.pi, rel=1e-3)


def test_normal_bound_scales_like_length():
    # both sides of the normal-integral cap are 1-homogeneous in d = 2
    base = check_cor3(CHORD_D1, CHORD_D2, OPTS)
    for lam in (0.5, 2.0):
        opts = QuadOpts(resolution=lam / 256.0)
        rep = check_cor3(CHORD_D1.scaled(lam), CHORD_D2.scaled(lam), opts)
        assert rep.lhs == pytest.approx(lam * base.lhs, rel=1e-3)
        assert rep.rhs == pytest.approx(lam * base.rhs, rel=1e-3)


def test_convex_window_cap_and_its_half_strength_variant():
    claimed, derived = check_thm4(CHORD_D1, CHORD_D2, OPTS)
    # window diameter is the chord length 2; one-lower-dimensional ball volume
    # of radius 1 is 2, and the half-strength variant asks for 1
    assert derived.inequality_id == "THM4_PROOF_DERIVED"
    assert derived.verdict == HOLDS
    assert derived.lhs == pytest.approx(2.0, abs=1e-3)
    assert derived.rhs == pytest.approx(2.0, rel=2e-3)
    assert claimed.inequality_id == "THM4_CLAIMED"
    assert claimed.verdict == VIOLATED
    assert claimed.rhs == pytest.approx(1.0, rel=2e-3)
    assert not is_gating_violation(claimed)
    assert is_gating_violation(derived) is False  # it holds


def test_directional_variant_matches_projection():
    claimed, derived = check_vdotn(CHORD_D1, CHORD_D2, (0.0, 1.0), OPTS)
    assert derived.lhs == pytest.approx(2.0, abs=1e-3)
    assert derived.verdict == HOLDS
    assert claimed.verdict == VIOLATED


def test_convexity_guard():
    with pytest.raises(NotConvexError):
        check_thm4(CHORD_D1, annulus((0.0, 0.0), 0.4, 0.9), OPTS)
    require_convex(ball((0.0, 0.0), 1.0))


def test_cache_makes_identical_reports():
    f = field_catalog("constant", 2, v=[0.0, 1.0])
    cache = PairCache(CHORD_D1, CHORD_D2, f, OPTS)
    a = check_thm1(CHORD_D1, CHORD_D2, f, OPTS, cache)
    b = check_cor3(CHORD_D1, CHORD_D2, OPTS, cache)
    a2 = check_thm1(CHORD_D1, CHORD_D2, f, OPTS)
    assert a.lhs == a2.lhs and a.rhs == a2.rhs
    assert b.lhs == pytest.approx(a.lhs, abs=1e-9)


def test_divergence_theorem_check_on_a_ball():
    rep = check_div_theorem(
        ball((0.05, -0.03), 0.9), field_catalog("identity", 2), QuadOpts(resolution=1.0 / 256.0)
    )
    assert rep.inequality_id == "DIV_THEOREM"
    assert rep.verdict == HOLDS
    assert rep.lhs <= 0.01 * rep.ingredients["scale"].value


def test_measure_lemma_tight_two_point_case():
    rep = check_measure_lemma([1.0, 1.0], [1.0, -1.0], [True, True], [True, False])
    assert rep.verdict == HOLDS
    assert rep.tolerance == 0.0
    assert rep.lhs == rep.rhs == 1.0
    assert rep.slack == 0.0


def test_measure_lemma_random_instances_hold_exactly():
    rng = np.random.default_rng(99)
    for _ in range(200):
        n = int(rng.integers(1, 20))
        w = rng.uniform(0.0, 2.0, n)
        f = rng.uniform(-3.0, 3.0, n)
        in_u = rng.random(n) < 0.7
        in_v = rng.random(n) < 0.5
        rep = check_measure_lemma(w, f, in_u, in_v)
        assert rep.verdict == HOLDS
        assert rep.lhs <= rep.rhs


def test_measure_lemma_rejects_bad_shapes():
    with pytest.raises(BadParamsError):
        check_measure_lemma([1.0], [1.0, 2.0], [True], [False])
    with pytest.raises(BadParamsError):
        check_measure_lemma([-1.0], [1.0], [True], [False])


def test_verdict_is_three_valued():
    assert render_verdict(1.0, 2.0, 0.0, 0.0) == HOLDS
    assert render_verdict(2.0 + 1e-9, 2.0, 1e-6, 0.0) == HOLDS
    assert render_verdict(2.1, 2.0, 1e-6, 0.01) == VIOLATED
    assert render_verdict(2.1, 2.0, 1e-6, 0.05) == INCONCLUSIVE


def test_gating_ids_exclude_the_half_strength_variants():
    assert "THM4_CLAIMED" not in GATING_IDS
    assert "LEMMA_VDOTN_CLAIMED" not in GATING_IDS
    assert GATING_IDS < set(INEQUALITY_IDS)
