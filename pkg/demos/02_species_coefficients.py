"""How the per-permutation species coefficients are built and what pins them.

The transition formula for several species weighs every lattice permutation
sigma by a table of coefficients indexed by orderings of the species labels.
This script builds those tables two ways (the exchange recursion, operator
products over explicit reduced words) and shows the invariants that make
them trustworthy: column sums, orbit support, and exactness of the
word-independence claim.
"""

from fractions import Fraction

from asep_exact import (
    RateParams,
    canonical_word,
    check_braid_relations,
    coefficient_by_expansion,
    coefficient_table,
    inversions,
    reduced_words,
    species_coefficient,
    species_orbit,
)

# Rational rates and rational contour points keep every identity exact:
# equality below is ==, not approximately-equal.
rates = RateParams.from_p(Fraction(2, 5))
xi = (Fraction(3, 7), Fraction(2, 9), Fraction(5, 11), Fraction(1, 4))

nu = (2, 1, 2)
print(f"initial species ordering nu = {nu}")
print(f"reachable orderings: {sorted(species_orbit(nu))}")

print("\n== coefficient tables for every sigma in S_3 ==")
for sigma, table in sorted(coefficient_table(nu, xi[:3], rates).items()):
    total = sum(table.values())
    print(f"  sigma = {sigma}, {len(inversions(sigma))} inversions")
    for pi, value in sorted(table.items()):
        print(f"    pi = {pi}: {value}")
    print(f"    column sum = {total}  (always exactly 1)")

print("\n== word independence, checked exactly ==")
sigma = (3, 2, 1)
print(f"  sigma = {sigma}, canonical word {canonical_word(sigma)}")
expect = species_coefficient(sigma, nu, xi[:3], rates)
for word in sorted(reduced_words(sigma)):
    assert coefficient_by_expansion(sigma, word, nu, xi[:3], rates) == expect
    print(f"  word {word}: every table entry identical")

print("\n== the braid relations that guarantee it ==")
report = check_braid_relations(3, xi[:3], rates)
print(f"  {report.checks} operator identities checked, passed = {report.passed}")
report4 = check_braid_relations(4, xi, rates)
print(f"  n = 4: {report4.checks} identities checked, passed = {report4.passed}")
