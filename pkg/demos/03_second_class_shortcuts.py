"""Closed forms for one second-class particle among first-class ones.

A single lower-species particle among identical higher-species ones admits
short product formulas for the coefficient at each final slot, bypassing
the exchange recursion entirely. This script evaluates those shortcuts
against the recursion, shows the vanishing region, and maps where the
start-in-second-slot shortcut stops being proven.
"""

from fractions import Fraction
from itertools import permutations

from asep_exact import (
    RateParams,
    inverse,
    second_class_coefficient,
    species_coefficient,
)

rates = RateParams.from_p(Fraction(2, 5))
xi = (Fraction(3, 7), Fraction(2, 9), Fraction(5, 11), Fraction(1, 4))
n = 4


def slot_labeling(slot: int) -> tuple[int, ...]:
    """Species pattern with the tagged (lower) particle in the given slot."""
    return tuple(1 if k == slot else 2 for k in range(1, n + 1))


print("== tagged particle starts in the first slot ==")
nu = slot_labeling(1)
j = 2
print(f"  nu = {nu}, asking for the coefficient at pi = {slot_labeling(j)}")
for sigma in permutations(range(1, n + 1)):
    closed = second_class_coefficient(sigma, 1, j, xi, rates)
    table = species_coefficient(sigma, nu, xi, rates)
    assert closed == table.get(slot_labeling(j), 0)
    mark = "0" if closed == 0 else f"{closed}"
    print(f"  sigma = {sigma}: {mark}")

print("\n== the vanishing condition, explicitly ==")
j = 3
print(f"  the closed form is 0 exactly when sigma parks the tagged")
print(f"  particle left of the destination slot j = {j}:")
for sigma in ((1, 2, 3, 4), (2, 1, 3, 4), (4, 1, 2, 3), (2, 3, 1, 4), (4, 2, 3, 1)):
    closed = second_class_coefficient(sigma, 1, j, xi, rates)
    slot = inverse(sigma)[0]
    print(f"    sigma = {sigma}, tagged slot {slot}: "
          f"{'zero' if closed == 0 else 'nonzero'}")

print("\n== starting in the second slot instead ==")
nu = slot_labeling(2)
valid = outside = 0
for sigma in permutations(range(1, n + 1)):
    table = species_coefficient(sigma, nu, xi, rates)
    for j in range(1, n + 1):
        try:
            closed = second_class_coefficient(sigma, 2, j, xi, rates)
        except ValueError:
            outside += 1
            continue
        assert closed == table.get(slot_labeling(j), 0), (sigma, j)
        valid += 1
print(f"  {valid} (sigma, j) pairs inside the proven region, all exactly equal")
print(f"  {outside} pairs outside it, each rejected with ValueError")
