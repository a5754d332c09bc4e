"""Contour-sum engine against the generator oracle and its own identities.

The heavy sweeps live in test_acceptance; these cases are the small
fast ones that pin each code path.
"""

import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from asep_exact import (
    ContourSpec,
    RateParams,
    delta_recovery,
    distribution_over_window,
    inversion_class_sum,
    master_equation_residual,
    oracle_distribution,
    sigma_summand,
    single_particle_series,
    single_species_probability,
    transition_probabilities,
    transition_probability,
)
from asep_exact.permutations import all_permutations, inversion_classes
from asep_exact.transition_prob import _evaluate

R07 = RateParams.from_p(0.7)
R05 = RateParams.from_p(0.5)
TASEP = RateParams.from_p(1.0)


def test_single_particle_matches_series():
    for x in (-3, 0, 2):
        value = transition_probability((0,), (1,), (x,), (1,), R07, 1.0)
        assert value == pytest.approx(
            single_particle_series(x, R07, 1.0), abs=1e-12
        )


def test_two_particle_matches_oracle_frozen():
    rates = RateParams.from_p(F(7, 10))
    # frozen from the finite-window generator oracle at leak 1e-10
    cases = {
        ((0, 1), (2, 1)): 0.4616951307536925,
        ((1, 2), (1, 2)): 0.006553123112566022,
        ((-1, 1), (1, 2)): 0.011933660079470852,
        ((0, 2), (2, 1)): 0.14760094526670547,
    }
    targets = list(cases)
    values = transition_probabilities((0, 1), (2, 1), targets, rates, 0.5)
    for tv, (key, expect) in zip(values, cases.items()):
        assert (tv.sites, tv.species) == key
        assert tv.value == pytest.approx(expect, abs=5e-11)
        assert abs(tv.imag) < 1e-15


def test_delta_recovery_small():
    rep = delta_recovery((0, 2, 5), (1, 2, 1), R07)
    assert rep.passed
    assert rep.max_residual <= 1e-10


def test_delta_recovery_single_species_tasep():
    rep = delta_recovery((0, 1), (1, 1), TASEP)
    assert rep.passed


def test_distribution_window_mass_and_agreement():
    report = distribution_over_window((0, 1), (2, 1), R05, 0.4)
    assert report.total_mass == pytest.approx(1.0, abs=1e-9)
    # one shared contour serves the whole window, so deep-tail targets
    # (mass ~ 1e-29) sit at the extended-precision roundoff floor, around
    # 1e-8 absolute; mass-bearing targets are far inside 1e-9
    assert report.max_imag < 1e-6
    oracle, _, _ = oracle_distribution((0, 1), (2, 1), R05, 0.4)
    for tv in report.values:
        expect = oracle.get((tv.sites, tv.species), 0.0)
        if expect >= 1e-8:
            assert tv.value == pytest.approx(expect, abs=1e-9)
        else:
            assert abs(tv.value - expect) < 1e-6


def test_orbit_mismatch_is_structural_zero():
    # a labeling outside the rearrangements of nu carries no amplitude
    values = transition_probabilities(
        (0, 1), (1, 2), [((0, 1), (1, 1)), ((0, 1), (2, 1))], R07, 0.3
    )
    assert values[0].value == 0.0
    assert values[0].imag == 0.0
    assert values[1].value > 0


def test_species_multiset_must_match():
    # label multiset {1, 2}: asking for {3, 1} is a structural zero too
    values = transition_probabilities((0, 1), (1, 2), [((0, 1), (3, 1))], R07, 0.3)
    assert values[0].value == 0.0


def test_single_species_wrapper():
    a = single_species_probability((0, 1), (0, 2), R07, 0.7)
    b = transition_probability((0, 1), (1, 1), (0, 2), (1, 1), R07, 0.7)
    assert a == pytest.approx(b, rel=1e-14)


def test_trivial_table_shortcut_is_exact():
    # single species label table is {nu: 1}; the shortcut must agree with
    # the full recursion bit for bit
    y, nu = (0, 1, 3), (1, 1, 1)
    targets = [((0, 1, 3), (1, 1, 1)), ((1, 2, 4), (1, 1, 1))]
    fast = _evaluate(y, nu, targets, R07, 0.6)
    slow = _evaluate(y, nu, targets, R07, 0.6, force_table_recursion=True)
    assert fast == slow


def test_radius_invariance():
    # two admissible radii must agree; disagreement means poles inside or
    # aliasing, the two failure modes of a bad contour
    y, nu, x, pi = (0, 1), (2, 1), (1, 3), (1, 2)
    values = []
    for radius in (0.18, 0.30):
        spec = ContourSpec(nodes=128, radius=radius, dimension=2)
        values.append(transition_probability(y, nu, x, pi, R05, 0.8, spec))
    assert values[0] == pytest.approx(values[1], rel=1e-9)


def test_conjugate_symmetry_real_output():
    # integrand values at conjugate node tuples pair up, so the assembled
    # probability has vanishing imaginary part at machine scale
    values = transition_probabilities(
        (0, 2), (1, 2), [((1, 2), (2, 1)), ((-2, 0), (1, 2))], R07, 1.0
    )
    for tv in values:
        assert abs(tv.imag) <= 1e-12 * max(1.0, abs(tv.value))


def test_starved_quadrature_does_not_crash():
    # conjugate node symmetry keeps even an aliased contour nearly real,
    # so a starved spec may or may not trip the imaginary-residue alarm;
    # it must never raise
    spec = ContourSpec(nodes=8, radius=0.05, dimension=2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        transition_probability((0, 1), (1, 2), (4, 7), (2, 1), R05, 0.2, spec)
    assert all(issubclass(w.category, (UserWarning, RuntimeWarning)) for w in caught)


def test_b_class_sums_vanish_n3():
    y, x = (0, 1, 2), (1, 2, 4)
    for entries, members in inversion_classes(3).items():
        total = inversion_class_sum(y, x, entries, R07)
        assert abs(total) <= 1e-12
        if len(members) == 1:
            assert abs(sigma_summand(y, x, members[0], R07)) <= 1e-12


def test_sigma_summands_sum_to_delta():
    # at t = 0 the full permutation sum collapses to the indicator of
    # X = Y; individual summands need not vanish for sigma fixing N
    y = (0, 1, 2)
    for x in ((0, 1, 2), (0, 1, 3), (1, 2, 3)):
        total = sum(
            sigma_summand(y, x, sigma, R05) for sigma in all_permutations(3)
        )
        expect = 1.0 if x == y else 0.0
        assert abs(total - expect) <= 1e-10


def test_inversion_class_sum_rejects_unknown_class():
    with pytest.raises(ValueError):
        inversion_class_sum((0, 1, 2), (1, 2, 4), frozenset({9}), R07)


def test_master_equation_residual_small_cases():
    for y, nu in (((0,), (1,)), ((0, 1), (1, 2))):
        x, pi = y, nu
        rep = master_equation_residual(y, nu, x, pi, R07, 0.5)
        assert rep.residual <= 1e-6
        assert rep.dt == 1e-3


def test_time_zero_probability_is_delta():
    assert transition_probability((0, 3), (1, 2), (0, 3), (1, 2), R07, 0.0) == (
        pytest.approx(1.0, abs=1e-12)
    )
    assert transition_probability((0, 3), (1, 2), (0, 4), (1, 2), R07, 0.0) == (
        pytest.approx(0.0, abs=1e-12)
    )


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        transition_probability((0,), (1,), (1,), (1,), R07, -0.5)
