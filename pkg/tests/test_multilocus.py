"""Ensemble aggregates, expectations, bounds, and sequence statistics."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from wfgraph.graph import AlleleGraph, SelectionSpec, gamma_from_fitness
from wfgraph import kernels, stationary
from wfgraph.multilocus import (
    BoundReport,
    LocusEnsemble,
    SelectionClass,
    bias_ratio,
    boundary_indicator,
    diversity_pi,
    eta_gamma_inversion,
    expectation,
    harmonic_number,
    interior_indicator,
    neutral_ensemble,
    neutral_statistics,
    omega_minus_one_over_gamma,
    pairwise_difference,
    r_positivity_gap,
    random_reversible_ensemble,
    sample_polymorphism,
    sandwich,
    segregating_sites,
    two_type_diversity,
    upper_bound,
)

mp.mp.dps = 40


def cycle_balanced_theta(n, seed, scale=1.0e-3):
    """theta[u, v] = s[u, v] r[v] with symmetric s: satisfies the cycle
    condition, so the embedded type chain is reversible for any
    potential selection."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.3, 1.0, (n, n))
    s = 0.5 * (s + s.T)
    r = rng.uniform(0.5, 2.0, n)
    theta = scale * s * r[None, :]
    np.fill_diagonal(theta, 0.0)
    return theta


def two_type_ensemble(theta_uv, theta_vu, gamma, big_n, num_loci):
    th = np.array([[0.0, theta_uv], [theta_vu, 0.0]])
    gm = np.array([[0.0, gamma], [-gamma, 0.0]])
    cls = SelectionClass(SelectionSpec(gm), int(num_loci))
    return LocusEnsemble(("u", "v"), th, big_n, (cls,))


# -- helper functions -------------------------------------------------


def test_omega_minus_one_over_gamma_matches_mpmath():
    def oracle(g):
        g = mp.mpf(g)
        if g == 0:
            return mp.mpf(1)
        w = 2 * g / (1 - mp.e ** (-2 * g))
        return (w - 1) / g

    worst = 0.0
    # the seam sits at |gamma| = 1e-2; cover both branches close to it
    for g in [-40.0, -3.0, -0.02, -1.0e-2, -1.0e-3, -1.0e-8, 0.0,
              1.0e-8, 1.0e-3, 9.9e-3, 0.00999999, 0.01000001,
              -0.00999999, -0.01000001, 1.1e-2, 0.5, 6.0, 40.0]:
        got = omega_minus_one_over_gamma(g)
        want = float(oracle(g))
        worst = max(worst, abs(got - want) / abs(want))
    assert worst < 3.0e-14


def test_omega_minus_one_over_gamma_positive():
    for g in np.linspace(-30.0, 30.0, 601):
        assert omega_minus_one_over_gamma(float(g)) > 0.0


def test_harmonic_number():
    assert harmonic_number(2) == 1.0
    assert harmonic_number(5) == pytest.approx(25.0 / 12.0, rel=1.0e-15)
    assert harmonic_number(1) == 0.0


@given(
    st.floats(-20.0, 20.0, allow_nan=False),
    st.floats(1.0e-6, 1.0 - 1.0e-6),
)
def test_r_positivity_gap_nonnegative(gamma, y):
    assert r_positivity_gap(gamma, y) >= 0.0


def test_r_positivity_gap_edge_values():
    assert r_positivity_gap(0.0, 0.3) == 0.0
    assert r_positivity_gap(2.0, 0.0) == 0.0
    # increasing in y for fixed gamma
    gaps = [r_positivity_gap(1.5, y) for y in np.linspace(0.01, 0.99, 50)]
    assert all(b >= a for a, b in zip(gaps, gaps[1:]))


# -- construction and aggregates --------------------------------------


def test_selection_class_validation():
    spec = SelectionSpec(np.zeros((2, 2)))
    assert SelectionClass(spec, 3).neutral
    gm = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert not SelectionClass(SelectionSpec(gm), 1).neutral
    with pytest.raises(ValueError, match="multiplicity"):
        SelectionClass(spec, 0)
    with pytest.raises(ValueError, match="multiplicity"):
        SelectionClass(spec, -2)


def test_two_type_neutral_aggregates_closed_form():
    a, b, big_n, L = 2.0e-3, 5.0e-4, 1.0e4, 100
    e = neutral_ensemble(("u", "v"), np.array([[0.0, a], [b, 0.0]]), big_n, L)
    # balance eta_u a = eta_v b gives eta = (b, a) / (a + b)
    assert e.class_eta(0) == pytest.approx(
        np.array([b, a]) / (a + b), rel=1.0e-14
    )
    # theta_hat is the harmonic-type mean 2ab/(a+b)
    want_hat = 2.0 * a * b / (a + b)
    assert e.theta_hat == pytest.approx(want_hat, rel=1.0e-14)
    want_omega = 1.0 + 2.0 * want_hat * (1.0 + math.log(big_n)) / L
    assert e.class_omega(0) == pytest.approx(want_omega, rel=1.0e-14)
    assert e.theta_hat_eff == pytest.approx(want_hat / want_omega, rel=1.0e-13)
    assert e.theta_min == pytest.approx(b)
    assert e.theta_max == pytest.approx(a)
    assert e.L == L and e.n == 2
    assert e.neutral and e.reversible


def test_multi_class_aggregates_are_multiplicity_weighted():
    th = cycle_balanced_theta(3, seed=7)
    g = AlleleGraph(("x", "y", "z"), th)
    c1 = SelectionClass(SelectionSpec(np.zeros((3, 3))), 30)
    c2 = SelectionClass(gamma_from_fitness((0.0, 0.8, -0.5), g), 70)
    e = LocusEnsemble(("x", "y", "z"), th, 5.0e3, (c1, c2))
    assert e.L == 100
    want = (30 * e.class_theta_hat(0) + 70 * e.class_theta_hat(1)) / 100
    assert e.theta_hat == pytest.approx(want, rel=1.0e-15)
    assert e.theta_hat_eff < e.theta_hat  # Omega^c > 1 always
    assert not e.neutral
    # mu_hat sums to the monomorphic fraction
    mono = expectation(e, boundary_indicator())
    assert e.mu_hat.sum() == pytest.approx(mono / e.L, rel=1.0e-13)
    assert np.all(e.mu_hat > 0.0)


def test_homogeneous_rates_pin_theta_hat():
    # every row of theta sums to the same theta_u, so theta_hat equals
    # that value no matter how selection is distributed over classes;
    # the star shape keeps the chain reversible despite unequal rates
    th = np.array(
        [
            [0.0, 0.0005, 0.0005],
            [0.001, 0.0, 0.0],
            [0.001, 0.0, 0.0],
        ]
    )
    g = AlleleGraph(("A", "B", "C"), th)
    classes = (
        SelectionClass(SelectionSpec(np.zeros((3, 3))), 11),
        SelectionClass(gamma_from_fitness((0.0, 2.0, -1.0), g), 5),
        SelectionClass(gamma_from_fitness((1.0, 0.0, 3.0), g), 84),
    )
    e = LocusEnsemble(("A", "B", "C"), th, 2.0e4, classes)
    assert abs(e.theta_hat - 0.001) < 1.0e-15
    # the effective value still responds to selection
    assert e.theta_hat_eff < 0.001


def test_ensemble_rejections():
    th = np.array([[0.0, 1.0e-3], [1.0e-3, 0.0]])
    cls = (SelectionClass(SelectionSpec(np.zeros((2, 2))), 1),)
    with pytest.raises(ValueError, match="population size"):
        LocusEnsemble(("u", "v"), th, 99.0, cls)
    with pytest.raises(ValueError, match="selection class"):
        LocusEnsemble(
            ("u", "v"), th, 1.0e4,
            (SelectionClass(SelectionSpec(np.zeros((3, 3))), 1),),
        )
    with pytest.raises(ValueError, match="at least one"):
        LocusEnsemble(("u", "v"), th, 1.0e4, ())
    # strong negative selection against a small population: the
    # occupation correction drives 1 + ln N + K below zero
    gm = np.array([[0.0, -80.0], [80.0, 0.0]])
    with pytest.raises(ValueError, match="increase N"):
        LocusEnsemble(
            ("u", "v"), th, 100.0, (SelectionClass(SelectionSpec(gm), 1),)
        )


def test_neutral_chain_can_still_be_non_reversible():
    # neutrality does not rescue a theta that breaks the cycle
    # condition: forward product 1e-3*1e-3*2e-3 != reverse product
    th = np.array(
        [
            [0.0, 1.0e-3, 2.0e-3],
            [1.5e-3, 0.0, 1.0e-3],
            [2.0e-3, 5.0e-4, 0.0],
        ]
    )
    with pytest.warns(stationary.NonReversibleWarning):
        e = neutral_ensemble(("a", "b", "c"), th, 1.0e4, 10)
    assert not e.reversible
    assert "pairwise balance" in e.warning


# -- expectations ------------------------------------------------------


def test_boundary_and_interior_counts_sum_to_loci():
    for seed in (0, 1, 2, 3):
        e = random_reversible_ensemble(seed)
        mono = expectation(e, boundary_indicator())
        poly = expectation(e, interior_indicator())
        assert mono + poly == pytest.approx(e.L, abs=1.0e-9)
        assert 0.0 < mono < e.L
        assert 0.0 < poly < e.L


def test_quadrature_route_matches_analytic_routes():
    e = random_reversible_ensemble(2)
    h = pairwise_difference()
    analytic = expectation(e, h)
    quad = expectation(e, h, method="quadrature")
    assert quad == pytest.approx(analytic, rel=1.0e-9)

    en = neutral_ensemble(
        ("u", "v"), np.array([[0.0, 2.0e-3], [1.0e-3, 0.0]]), 1.0e4, 50
    )
    g3 = sample_polymorphism(3)
    assert expectation(en, g3, method="quadrature") == pytest.approx(
        expectation(en, g3), rel=1.0e-9
    )


def test_selected_sample_polymorphism_falls_back_to_quadrature():
    # no closed form under selection, but g_m <= interior indicator
    e = two_type_ensemble(2.0e-3, 1.0e-3, 1.5, 1.0e4, 20)
    val = expectation(e, sample_polymorphism(5))
    assert 0.0 < val < expectation(e, interior_indicator())


def test_interior_indicator_has_no_quadrature_route():
    e = two_type_ensemble(1.0e-3, 1.0e-3, 0.0, 1.0e4, 5)
    with pytest.raises(ValueError, match="divergent"):
        expectation(e, interior_indicator(), method="quadrature")
    with pytest.raises(ValueError, match="unknown method"):
        expectation(e, interior_indicator(), method="series")


def test_sample_polymorphism_validation():
    with pytest.raises(ValueError, match="sample size"):
        sample_polymorphism(1)
    with pytest.raises(ValueError, match="sample size"):
        sample_polymorphism(10_001)


# -- neutral closed forms ---------------------------------------------


def test_neutral_statistics_match_expectations():
    th = cycle_balanced_theta(3, seed=5, scale=2.0e-3)
    e = neutral_ensemble(("a", "b", "c"), th, 1.0e5, 500)
    stats = neutral_statistics(e, m=2)
    assert stats.monomorphic == pytest.approx(
        expectation(e, boundary_indicator()), rel=1.0e-12
    )
    assert stats.polymorphic == pytest.approx(
        expectation(e, interior_indicator()), rel=1.0e-12
    )
    assert stats.segregating == pytest.approx(
        expectation(e, sample_polymorphism(2)), rel=1.0e-13
    )
    assert stats.diversity == pytest.approx(diversity_pi(e), rel=1.0e-13)
    assert stats.theta_hat_eff == pytest.approx(e.theta_hat_eff, rel=1.0e-13)
    assert stats.sample_size == 2
    # first-order forms drop the 1/Omega correction
    fo = stats.first_order
    assert fo["theta_hat"] == pytest.approx(e.theta_hat, rel=1.0e-15)
    assert fo["polymorphic"] > stats.polymorphic
    assert fo["diversity"] > stats.diversity


def test_neutral_statistics_sample_size_scaling():
    e = neutral_ensemble(
        ("u", "v"), np.array([[0.0, 1.0e-3], [1.0e-3, 0.0]]), 1.0e4, 100
    )
    s2 = neutral_statistics(e, m=2)
    s10 = neutral_statistics(e, m=10)
    assert s10.segregating == pytest.approx(
        s2.segregating * harmonic_number(10), rel=1.0e-14
    )
    # diversity is sample-size free
    assert s10.diversity == s2.diversity


def test_neutral_statistics_rejects_selected_ensembles():
    e = two_type_ensemble(1.0e-3, 1.0e-3, 0.7, 1.0e4, 5)
    with pytest.raises(ValueError, match="not neutral"):
        neutral_statistics(e)
    en = neutral_ensemble(
        ("u", "v"), np.array([[0.0, 1.0e-3], [1.0e-3, 0.0]]), 1.0e4, 5
    )
    with pytest.raises(ValueError, match="sample size"):
        neutral_statistics(en, m=1)


# -- bounds and the sandwich ------------------------------------------


def test_upper_bound_reports_on_random_ensembles():
    functionals = [
        interior_indicator(),
        sample_polymorphism(2),
        sample_polymorphism(10),
        pairwise_difference(),
    ]
    for seed in range(6):
        e = random_reversible_ensemble(seed)
        for f in functionals:
            rep = upper_bound(e, f)
            scale = max(1.0, abs(rep.bound_f0_integral))
            assert rep.slack >= -1.0e-9 * scale
            assert rep.value >= -1.0e-9 * scale
            if f.integrable:
                # the cutoff integral is dominated by the full one
                assert rep.bound_integrable >= rep.bound_f0_integral - 1.0e-9 * scale
            else:
                assert rep.bound_integrable is None


def test_upper_bound_value_convention_differs_by_layer_term():
    # the bound-side value collapses the entry layer to f(0+); for the
    # interior indicator that recovers the full count up to O(1/N)
    e = two_type_ensemble(2.0e-3, 1.0e-3, 1.0, 1.0e5, 100)
    rep = upper_bound(e, interior_indicator())
    full = expectation(e, interior_indicator())
    assert rep.value == pytest.approx(full, rel=1.0e-3)
    assert rep.value != full


def test_upper_bound_input_validation():
    e = two_type_ensemble(1.0e-3, 1.0e-3, 0.0, 1.0e4, 5)
    with pytest.raises(ValueError, match="monomorphic"):
        upper_bound(e, boundary_indicator())
    neg = pairwise_difference()
    bad = type(neg)(
        name="negative",
        fn=lambda y: -np.ones_like(np.asarray(y, dtype=float)),
        zero_limit=0.0,
        integrable=False,
    )
    with pytest.raises(ValueError, match="nonnegative"):
        upper_bound(e, bad)


def test_sandwich_ordering_and_lower_formula():
    for seed in range(8):
        e = random_reversible_ensemble(seed)
        lo, eff, hat, hi = sandwich(e)
        assert lo <= eff * (1.0 + 1.0e-12)
        assert eff <= hat
        assert hat <= hi * (1.0 + 1.0e-12)
        want_lo = e.theta_min / (
            1.0 + 2.0 * (1.0 + math.log(e.big_n)) * e.theta_min / e.L
        )
        assert lo == pytest.approx(want_lo, rel=1.0e-15)


# -- sequence statistics ----------------------------------------------


def test_segregating_sites_equals_polymorphic_count():
    for seed in (0, 2, 5):
        e = random_reversible_ensemble(seed)
        assert segregating_sites(e) == pytest.approx(
            expectation(e, interior_indicator()), rel=1.0e-12
        )


def test_segregating_sites_strong_selection_stays_finite():
    # the paired arrangement avoids exp(2 gamma) overflow
    e = two_type_ensemble(1.0e-3, 1.0e-3, 600.0, 1.0e9, 10)
    val = segregating_sites(e)
    assert math.isfinite(val)
    assert val > 0.0


def test_diversity_matches_pairwise_expectation():
    for seed in (0, 1, 3):
        e = random_reversible_ensemble(seed)
        via_edges = expectation(e, pairwise_difference()) / e.L
        assert diversity_pi(e) == pytest.approx(via_edges, rel=1.0e-12)


def test_diversity_respects_effective_rate_cap():
    for seed in range(6):
        e = random_reversible_ensemble(seed)
        assert diversity_pi(e) <= 2.0 * e.theta_hat_eff / e.L * (1.0 + 1.0e-9)


def test_two_type_diversity_closed_form():
    for gamma in (-2.0, 0.0, 0.5, 3.0):
        e = two_type_ensemble(3.0e-3, 1.0e-3, gamma, 1.0e4, 40)
        want = two_type_diversity(3.0e-3, 1.0e-3, gamma, 1.0e4, 40)
        assert diversity_pi(e) == pytest.approx(want, rel=1.0e-12)


def test_bias_ratio_regimes():
    # equal rates: no mutation bias to oppose, ratio is exactly 1
    eq = two_type_ensemble(1.5e-3, 1.5e-3, 1.0, 500.0, 10)
    ratio, regime = bias_ratio(eq, 1.0)
    assert ratio == 1.0 and regime == "balanced"
    # mutation prefers the selectively favored type: biases aligned
    into = two_type_ensemble(3.0e-3, 1.0e-3, 1.0, 500.0, 10)
    ratio, regime = bias_ratio(into, 1.0)
    assert ratio < 1.0 and regime == "aligned"
    # mutation pushes away from the favored type: biases opposed
    out = two_type_ensemble(1.0e-3, 3.0e-3, 1.0, 500.0, 10)
    ratio, regime = bias_ratio(out, 1.0)
    assert ratio > 1.0 and regime == "opposing"
    # no selection: nothing to bias
    ratio, regime = bias_ratio(out, 0.0)
    assert ratio == 1.0 and regime == "balanced"
    three = neutral_ensemble(
        ("a", "b", "c"), cycle_balanced_theta(3, seed=1), 1.0e4, 5
    )
    with pytest.raises(ValueError, match="two-type"):
        bias_ratio(three, 1.0)


def test_eta_gamma_inversion_round_trip():
    th = np.array(
        [
            [0.0, 2.0e-3, 5.0e-4],
            [1.0e-3, 0.0, 3.0e-3],
            [8.0e-4, 2.2e-3, 0.0],
        ]
    )
    target = np.array([0.5, 0.2, 0.3])
    spec = eta_gamma_inversion(target, th)
    assert np.max(np.abs(spec.gamma + spec.gamma.T)) == 0.0
    g = AlleleGraph(("t0", "t1", "t2"), th)
    bm = stationary.boundary_measure(g, spec, mode="scaled")
    assert bm.reversible
    assert np.max(np.abs(bm.weights - target)) < 1.0e-12
    # direct formula on one edge
    want_01 = 0.5 * math.log(target[1] * th[1, 0] / (target[0] * th[0, 1]))
    assert spec.gamma[0, 1] == pytest.approx(want_01, rel=1.0e-15)


def test_eta_gamma_inversion_validation():
    th = np.array([[0.0, 1.0e-3], [1.0e-3, 0.0]])
    with pytest.raises(ValueError, match="length"):
        eta_gamma_inversion([0.5, 0.3, 0.2], th)
    with pytest.raises(ValueError, match="positive"):
        eta_gamma_inversion([1.0, 0.0], th)
    with pytest.raises(ValueError, match="sum to 1"):
        eta_gamma_inversion([0.5, 0.6], th)


# -- randomized ensembles ---------------------------------------------


def test_random_reversible_ensemble_reproducible_and_reversible():
    a = random_reversible_ensemble(123)
    b = random_reversible_ensemble(123)
    assert np.array_equal(a.theta, b.theta)
    assert a.big_n == b.big_n
    assert a.L == b.L
    for ca, cb in zip(a.classes, b.classes):
        assert ca.multiplicity == cb.multiplicity
        assert np.array_equal(ca.selection.gamma, cb.selection.gamma)
    for seed in range(12):
        e = random_reversible_ensemble(seed)
        assert e.reversible
        assert e.warning is None


def test_random_reversible_ensemble_theta_cycle_condition():
    e = random_reversible_ensemble(0)
    th = e.theta
    n = e.n
    assert n >= 3
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                fwd = th[i, j] * th[j, k] * th[k, i]
                rev = th[j, i] * th[k, j] * th[i, k]
                assert fwd == pytest.approx(rev, rel=1.0e-12)
