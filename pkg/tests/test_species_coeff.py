"""Species-coefficient tables: recursion, word expansion, closed forms.

Everything here runs on exact rationals; assertions are equalities, not
tolerances.  The xi values are chosen away from the scattering poles
(for p = a/b the pole pairs solve v = a/(b - (b-a) u), so reusing a
point set after changing p needs a fresh pole check).
"""

from fractions import Fraction as F

import pytest

from asep_exact import (
    RateParams,
    check_braid_relations,
    coefficient_by_expansion,
    coefficient_table,
    second_class_coefficient,
    species_coefficient,
)
from asep_exact.permutations import (
    all_permutations,
    canonical_word,
    inverse,
    inversions_below,
    reduced_words,
)
from asep_exact.species_coeff import expansion_summands, species_orbit

XI5 = (F(3, 7), F(2, 9), F(5, 11), F(1, 4), F(4, 19))
RATES = RateParams.from_p(F(2, 5))


def test_orbit_is_all_rearrangements():
    assert sorted(species_orbit((1, 2, 2))) == [(1, 2, 2), (2, 1, 2), (2, 2, 1)]
    assert len(species_orbit((1, 2, 3))) == 6
    assert species_orbit((2, 2)) == [(2, 2)]


def test_identity_table_is_point_mass():
    for nu in ((1, 2, 2), (1, 2, 3), (2, 1, 1)):
        table = species_coefficient((1, 2, 3), nu, XI5[:3], RATES)
        assert table == {nu: 1}


def test_single_species_tables_trivial():
    # equal labels leave every exchange step inert, so each sigma keeps
    # the point mass with coefficient exactly 1
    nu = (1, 1, 1)
    for sigma, table in coefficient_table(nu, XI5[:3], RATES).items():
        assert table == {nu: 1}


def test_table_support_inside_orbit():
    nu = (2, 1, 2)
    orbit = set(species_orbit(nu))
    for table in coefficient_table(nu, XI5[:3], RATES).values():
        assert set(table) <= orbit


def test_column_sums_partition_unity():
    # summing the table over its orbit reproduces the single-species
    # coefficient 1 for every sigma: priorities shuffle labels around
    # but conserve the sigma summand in aggregate
    for nu in ((1, 2, 2), (2, 1, 2), (1, 2, 3)):
        for sigma, table in coefficient_table(nu, XI5[:3], RATES).items():
            assert sum(table.values()) == 1, (sigma, nu)


def test_expansion_matches_recursion_any_reduced_word():
    nu = (2, 1, 2)
    for sigma in all_permutations(3):
        expect = species_coefficient(sigma, nu, XI5[:3], RATES)
        for word in reduced_words(sigma):
            assert coefficient_by_expansion(sigma, word, nu, XI5[:3], RATES) == expect


def test_expansion_rejects_wrong_word():
    with pytest.raises(ValueError):
        expansion_summands((3, 2, 1), (1,), (1, 2, 2), XI5[:3], RATES)


def test_braid_relations_small():
    report = check_braid_relations(3, XI5[:3], RATES)
    assert report.passed
    assert report.counterexample is None
    assert report.checks > 0


def test_second_class_start_slot_one_zero_region():
    # the closed form is 0 exactly when sigma places the tagged particle
    # left of the destination slot
    for sigma in all_permutations(4):
        for j in range(1, 5):
            value = second_class_coefficient(sigma, 1, j, XI5[:4], RATES)
            if inverse(sigma)[0] < j:
                assert value == 0


def test_second_class_matches_recursion_both_starts():
    for n in (3, 4):
        xi = XI5[:n]
        for nu_pos in (1, 2):
            nu = tuple(1 if k == nu_pos else 2 for k in range(1, n + 1))
            for sigma in all_permutations(n):
                table = species_coefficient(sigma, nu, xi, RATES)
                for j in range(1, n + 1):
                    pi = tuple(1 if k == j else 2 for k in range(1, n + 1))
                    try:
                        closed = second_class_coefficient(sigma, nu_pos, j, xi, RATES)
                    except ValueError:
                        continue  # outside the proven region for nu_pos=2
                    assert table.get(pi, 0) == closed, (sigma, nu_pos, j)


def test_second_class_validity_region_raises():
    sigma = (1, 2, 3)
    # tagged particle in slot 2 but asked to end at slot 3: outside region
    assert inverse(sigma)[0] < 3
    with pytest.raises(ValueError):
        second_class_coefficient(sigma, 2, 3, XI5[:3], RATES)


def test_reversal_word_counts():
    # the canonical word for the full reversal spawns five surviving
    # branches at pi = nu, an alternate word only two; both words sum to
    # the same table
    sigma = (4, 3, 2, 1)
    assert canonical_word(sigma) == (3, 2, 1, 3, 2, 3)
    alternate = (1, 2, 1, 3, 2, 1)
    nu = (2, 2, 1, 2)
    lengths = {}
    for word in (canonical_word(sigma), alternate):
        summands = expansion_summands(sigma, word, nu, XI5[:4], RATES)
        lengths[word] = len(summands.get(nu, []))
        assert coefficient_by_expansion(
            sigma, word, nu, XI5[:4], RATES
        ) == species_coefficient(sigma, nu, XI5[:4], RATES)
    assert lengths[(3, 2, 1, 3, 2, 3)] == 5
    assert lengths[(1, 2, 1, 3, 2, 1)] == 2


def test_inversions_below_used_by_validity_region():
    assert inversions_below((4, 3, 2, 1), 2) == 1
