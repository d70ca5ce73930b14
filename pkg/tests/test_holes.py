"""Certified decisions and the three hole-probability estimators.

The certification layer is exercised against planted-root polynomials
where ground truth is known exactly, and the estimators against the
determinantal closed form available for the flat model.  Monte Carlo
outputs are pinned to exact values at fixed seeds: every estimator is
a pure function of its arguments, so byte-stable results are part of
the contract, not an accident.
"""

import math

import numpy as np
import pytest

from gafholes import coeffs, gaf, holes
from gafholes.coeffs import constant_unit, explicit, hyperbolic
from gafholes.errors import (ComputeBudgetExceeded, DomainError,
                             IntensityOutOfRange, InvalidRadius)


def _poly_sample(c):
    c = np.asarray(c, dtype=complex)
    return gaf.GafSample(constant_unit(), len(c) - 1, c, 0, 0)


# ---------------------------------------------------------------------------
# certified minimum modulus and winding numbers
# ---------------------------------------------------------------------------

def test_min_modulus_constant():
    lb, gmin, K = holes.min_modulus_certified(_poly_sample([1.0]), 0.5)
    assert (lb, gmin, K) == (1.0, 1.0, 8)


def test_min_modulus_linear():
    # F = z on the circle of radius 1/2: true minimum 1/2, certified
    # bound one derivative step below it
    lb, gmin, K = holes.min_modulus_certified(_poly_sample([0.0, 1.0]), 0.5)
    assert gmin == 0.5
    assert K == 8
    assert lb == pytest.approx(0.30365045915063793, rel=1e-12)
    assert lb <= 0.5


def test_min_modulus_below_dense_sampling():
    for stream in (3, 4, 5):
        s = gaf.sample(hyperbolic(1.0), 5, stream, 30)
        lb, gmin, _ = holes.min_modulus_certified(s, 0.5)
        zs = 0.5 * np.exp(2j * np.pi * np.arange(100000) / 100000)
        dense = float(np.min(np.abs(gaf.evaluate_on_grid(s.coeffs[None, :], zs)[0])))
        assert lb <= dense + 1e-12
        assert gmin >= dense - 1e-12 or gmin == pytest.approx(dense, rel=1e-6)


def test_winding_counts_zeros():
    assert holes.winding_number_certified(_poly_sample([1.0]), 0.5) == 0
    assert holes.winding_number_certified(_poly_sample([-0.1, 1.0]), 0.5) == 1
    # 0.25 + z^2 has both roots at modulus 1/2, inside radius 0.7
    assert holes.winding_number_certified(_poly_sample([0.25, 0.0, 1.0]), 0.7) == 2


# ---------------------------------------------------------------------------
# hole decisions
# ---------------------------------------------------------------------------

def test_decision_constant_hole():
    d = holes.hole_decision(_poly_sample([1.0]), 0.5, 0.1)
    assert d.outcome == holes.OUTCOME_HOLE
    assert d.margin == pytest.approx(0.9, rel=1e-15)
    assert d.zero_count == 0


def test_decision_zero_inside():
    d = holes.hole_decision(_poly_sample([-0.1, 1.0]), 0.5, 0.01)
    assert d.outcome == holes.OUTCOME_ZERO
    assert d.zero_count == 1
    assert d.margin == pytest.approx(0.19365045915063794, rel=1e-12)
    assert d.grid_size_used == 8


def test_decision_near_circle_root_uses_refinement():
    # root a relative 1e-7 outside the circle: the uniform ladder cannot
    # separate this from zero, the adaptive stage must
    root = 0.5 * (1.0 + 1e-7)
    d = holes.hole_decision(_poly_sample([-root, 1.0]), 0.5, 1e-9)
    assert d.outcome == holes.OUTCOME_HOLE
    assert 0.0 < d.margin <= 5e-8
    assert d.grid_size_used > 1000


def test_decisions_sound_on_planted_roots():
    # ground truth by construction: polynomials with known zero counts
    # inside the circle; the decision may abstain but must never certify
    # the wrong side, and a certified count must be exact
    rng_local = np.random.default_rng(202)
    rho = 0.5
    decided = 0
    for _ in range(200):
        n_in = int(rng_local.integers(0, 4))
        n_out = int(rng_local.integers(1, 4))
        r_in = rng_local.uniform(0.05, 0.4 * rho, n_in)
        r_out = rng_local.uniform(1.4 * rho, 3.0 * rho, n_out)
        phases = np.exp(2j * np.pi * rng_local.uniform(size=n_in + n_out))
        roots = np.concatenate([r_in, r_out]) * phases
        c = np.poly(roots)[::-1].astype(complex)
        c *= rng_local.normal() + 1j * rng_local.normal()
        d = holes.hole_decision(_poly_sample(c), rho, 1e-12)
        if n_in == 0:
            assert d.outcome != holes.OUTCOME_ZERO
        else:
            assert d.outcome != holes.OUTCOME_HOLE
        if d.outcome == holes.OUTCOME_ZERO:
            assert d.zero_count == n_in
            decided += 1
        elif d.outcome == holes.OUTCOME_HOLE:
            assert n_in == 0
            decided += 1
    # abstentions are allowed in principle but must be rare at these margins
    assert decided >= 195


def test_decision_fixture_frozen():
    m = hyperbolic(1.0)
    N_t = gaf.truncation_degree(m, 0.5, gaf.DEFAULT_TAU_REL)
    assert N_t == 26
    tail, _ = gaf.tail_sup_bound(m, N_t, 0.5)
    assert tail == pytest.approx(8.427397834823821e-08, rel=1e-12)
    d = holes.hole_decision(gaf.sample(m, 7, 0, N_t), 0.5, tail)
    assert d.outcome == holes.OUTCOME_HOLE
    assert d.margin == pytest.approx(0.8775012880206593, rel=1e-12)
    assert d.grid_size_used == 16


# ---------------------------------------------------------------------------
# direct estimator
# ---------------------------------------------------------------------------

def test_wilson_interval_basics():
    lo, hi = holes.wilson_interval(50, 100, 0.95)
    assert 0.0 < lo < 0.5 < hi < 1.0
    assert hi - lo < 0.25
    assert holes.wilson_interval(0, 100, 0.99)[0] == 0.0
    assert holes.wilson_interval(100, 100, 0.99)[1] == 1.0
    # widening confidence widens the interval
    lo2, hi2 = holes.wilson_interval(50, 100, 0.99)
    assert lo2 < lo and hi2 > hi


def test_direct_estimate_frozen_and_contains_oracle():
    est = holes.estimate_hole_direct(hyperbolic(1.0), 0.5, 4096, 2)
    assert est.hits == 2806
    assert est.inconclusive == 0
    assert est.p_low == pytest.approx(0.6660774514664936, rel=1e-12)
    assert est.p_high == pytest.approx(0.7034411721029559, rel=1e-12)
    assert est.metadata["N_t"] == 26
    assert est.metadata["zeros_certified"] == 1290
    oracle = holes.determinantal_hole_probability(0.5)
    assert est.p_low <= oracle <= est.p_high


def test_direct_estimate_deterministic_across_workers():
    a = holes.estimate_hole_direct(hyperbolic(1.0), 0.5, 4096, 9, workers=1)
    b = holes.estimate_hole_direct(hyperbolic(1.0), 0.5, 4096, 9, workers=3)
    assert a.to_record() == b.to_record()


def test_direct_estimate_monotone_in_radius():
    ests = [holes.estimate_hole_direct(hyperbolic(1.0), r, 2000, 31)
            for r in (0.3, 0.5, 0.7)]
    ps = [e.hits / e.trials for e in ests]
    assert ps[0] > ps[1] + 0.05 > ps[2] + 0.1
    assert all(e.inconclusive == 0 for e in ests)


def test_direct_estimate_saturates_at_tiny_radius():
    est = holes.estimate_hole_direct(hyperbolic(1.0), 0.01, 2000, 41)
    assert est.hits == est.trials
    assert est.p_high == 1.0


def test_direct_estimate_decides_every_trial_at_moderate_radius():
    est = holes.estimate_hole_direct(hyperbolic(2.0), 0.8, 500, 51)
    assert est.inconclusive == 0


def test_inconclusive_trials_counted_pessimistically():
    # the interval endpoints must bracket whatever the undecided trials
    # turn out to be: hits count toward the upper end, misses toward the
    # lower end
    est = holes.estimate_hole_direct(hyperbolic(1.0), 0.5, 2048, 6)
    lo_all, _ = holes.wilson_interval(est.hits, est.trials, est.confidence)
    _, hi_all = holes.wilson_interval(est.hits + est.inconclusive,
                                      est.trials, est.confidence)
    assert est.p_low == pytest.approx(lo_all, rel=1e-12)
    assert est.p_high == pytest.approx(hi_all, rel=1e-12)


# ---------------------------------------------------------------------------
# threshold and tilted lower bounds
# ---------------------------------------------------------------------------

def test_threshold_estimate_frozen():
    est = holes.estimate_hole_lower_threshold(hyperbolic(1.0), 0.5, 4096, 12, M=2.0)
    assert est.hits == 4096
    assert est.p_high == 1.0
    assert est.p_low == pytest.approx(0.018286018322129758, rel=1e-12)
    assert est.metadata["q_low"] == pytest.approx(0.9983827718604651, rel=1e-12)
    # e^{-M^2} q_low is the certified bound
    assert est.p_low == pytest.approx(
        math.exp(-4.0) * est.metadata["q_low"], rel=1e-12)


def test_threshold_sits_below_oracle():
    est = holes.estimate_hole_lower_threshold(hyperbolic(1.0), 0.5, 4096, 12, M=2.0)
    assert est.p_low <= holes.determinantal_hole_probability(0.5)


def test_threshold_default_M_by_regime():
    assert holes.default_threshold(1.0, 0.96) == pytest.approx(15.0, rel=1e-12)
    assert holes.default_threshold(2.0, 0.99) == pytest.approx(
        31.43650547438603, rel=1e-12)
    assert holes.default_threshold(0.5, 0.99) == pytest.approx(
        4.425732882164286, rel=1e-12)
    # closed forms behind the two frozen non-flat values
    assert holes.default_threshold(2.0, 0.99) == pytest.approx(
        10.0 * math.log(100.0) ** 0.75, rel=1e-12)
    assert holes.default_threshold(0.5, 0.99) == pytest.approx(
        math.sqrt(0.6) * (1 - 0.99 ** 2) ** -0.25 * math.sqrt(math.log(100.0)),
        rel=1e-12)


def test_threshold_never_exceeds_direct_upper():
    # paired runs on disjoint seeds; a certified lower bound crossing an
    # independent 99% upper bound more than once in twenty pairs would
    # mean one of the two is wrong
    m = hyperbolic(1.0)
    violations = 0
    for s in range(20):
        thr = holes.estimate_hole_lower_threshold(m, 0.5, 256, 100 + s, M=2.0)
        direct = holes.estimate_hole_direct(m, 0.5, 256, 200 + s)
        violations += thr.p_low > direct.p_high
    assert violations <= 1


def test_tilt_profile_frozen():
    q, N, N1, M, r2, alpha1, log_Q2 = holes.tilt_profile(hyperbolic(2.0), 0.9)
    assert (N, N1) == (92, 11)
    assert M == pytest.approx(5.911010986140177, rel=1e-12)
    assert alpha1 == pytest.approx(0.3670965699997514, rel=1e-12)
    assert log_Q2 == pytest.approx(-244.02180837982087, rel=1e-10)
    assert len(q) == N
    assert np.all(q > 0.0) and np.all(q <= 1.0)


def test_tilted_estimate_frozen():
    est = holes.estimate_hole_lower_tilted(hyperbolic(2.0), 0.9, 512, 13)
    md = est.metadata
    assert (md["mid_hits"], md["tail_hits"]) == (264, 512)
    assert md["log10_p_low"] == pytest.approx(-121.50130464290325, rel=1e-10)
    assert est.p_low > 0.0
    assert est.p_low == pytest.approx(10.0 ** md["log10_p_low"], rel=1e-10)


def test_tilted_requires_growing_coefficients():
    with pytest.raises(IntensityOutOfRange):
        holes.estimate_hole_lower_tilted(hyperbolic(1.0), 0.9, 8, 0)


# ---------------------------------------------------------------------------
# determinantal closed form for the flat model
# ---------------------------------------------------------------------------

def test_determinantal_probability_against_partial_product():
    p = holes.determinantal_hole_probability(0.5)
    brute = 1.0
    for k in range(1, 200):
        brute *= 1.0 - 0.25 ** k
    assert p == pytest.approx(brute, rel=1e-12)
    assert p == pytest.approx(0.6885375371203398, rel=1e-12)


def test_determinantal_log_form_survives_underflow():
    lp = holes.log_determinantal_hole_probability(0.999)
    assert math.exp(lp) == 0.0 or math.exp(lp) < 1e-300
    # -(1-r) log p approaches pi^2/12
    val = -(1.0 - 0.999) * lp
    assert val == pytest.approx(0.8180296554809711, rel=1e-12)
    assert abs(val - math.pi ** 2 / 12.0) / (math.pi ** 2 / 12.0) < 0.02


def test_determinantal_monotone_decreasing():
    ps = [holes.determinantal_hole_probability(r) for r in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert all(a > b for a, b in zip(ps, ps[1:]))


# ---------------------------------------------------------------------------
# argument and budget guards
# ---------------------------------------------------------------------------

def test_estimator_argument_guards():
    m = hyperbolic(1.0)
    with pytest.raises(InvalidRadius):
        holes.estimate_hole_direct(m, 1.0, 8, 0)
    with pytest.raises(DomainError):
        holes.estimate_hole_direct(m, 0.5, 0, 0)
    with pytest.raises(DomainError):
        holes.estimate_hole_direct(m, 0.5, 8, 0, confidence=1.0)
    with pytest.raises(ComputeBudgetExceeded):
        holes.estimate_hole_direct(m, 0.9, 10 ** 7, 0, budget=1e3)
