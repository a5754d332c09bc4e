"""Species-order coefficients for the multispecies transition formula.

With several species the amplitude attached to a permutation sigma gets
multiplied by a coefficient that depends on the initial species labeling
``nu`` and the final labeling ``pi`` (both tuples: slot -> species, higher
number = higher priority).  The coefficients live in sparse tables
``dict[SpeciesMap, scalar]`` supported on the rearrangements of nu, and are
built by walking any word for sigma with one exchange operator per letter:

    new_h(pi) = h(pi) + (1 + S) * (alpha(pi) * h(swap_i(pi)) - beta(pi) * h(pi))

where S is the scattering factor at the bond, alpha is 0 / p / q as the
two labels at the bond are equal / ascending / descending, and beta the
same with p and q interchanged.  The walk starts from the point mass at nu
above the identity.  Words compose associatively and satisfy the braid
relations, so the result is word-independent; ``check_braid_relations``
verifies that exactly on rational inputs.

``coefficient_by_expansion`` evaluates the same coefficient as an explicit
sum over subsets of the word's letters (one branch per choice of the
alpha-term or the beta-term at each letter), and the second-class particle
closed forms (one species-1 particle among species 2) are in
``second_class_coefficient``.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Rational

import numpy as np

from .bethe_algebra import RateParams, amplitude, s_factor
from .permutations import (
    Permutation,
    Word,
    adjacent_swap,
    all_permutations,
    canonical_word,
    identity,
    inverse,
    inversions_below,
    word_to_permutation,
)

SpeciesMap = tuple[int, ...]
CoeffTable = dict[SpeciesMap, object]


def species_orbit(nu: SpeciesMap) -> list[SpeciesMap]:
    """All distinct rearrangements of nu, lexicographically sorted."""
    import itertools

    return sorted(set(itertools.permutations(nu)))


def label_swap(pi: SpeciesMap, i: int) -> SpeciesMap:
    """Interchange the labels in slots i and i+1 (1-based)."""
    s = list(pi)
    s[i - 1], s[i] = s[i], s[i - 1]
    return tuple(s)


def swap_rates(i: int, pi: SpeciesMap, rates: RateParams):
    """(alpha, beta) at bond i: (0, 0), (p, q) or (q, p) as the labels in
    slots i, i+1 are equal, ascending or descending."""
    a, b = pi[i - 1], pi[i]
    if a == b:
        return 0, 0
    if a < b:
        return rates.p, rates.q
    return rates.q, rates.p


def _is_zero_scalar(v) -> bool:
    return not isinstance(v, np.ndarray) and v == 0


def _cleaned(table: CoeffTable) -> CoeffTable:
    return {pi: v for pi, v in table.items() if not _is_zero_scalar(v)}


def exchange_update(i: int, sigma: Permutation, h: CoeffTable, xi, rates: RateParams) -> CoeffTable:
    """Apply the exchange operator at bond i to a coefficient table sitting
    above sigma.  The scattering factor is evaluated at the entries sigma
    currently holds in slots i and i+1; the returned table sits above
    adjacent_swap(sigma, i)."""
    s = s_factor(xi[sigma[i - 1] - 1], xi[sigma[i] - 1], rates)
    c = 1 + s
    support = set(h)
    support.update(label_swap(pi, i) for pi in h)
    out: CoeffTable = {}
    for pi in support:
        alpha, beta = swap_rates(i, pi, rates)
        value = h.get(pi, 0)
        if alpha != 0 or beta != 0:
            value = value + c * (alpha * h.get(label_swap(pi, i), 0) - beta * value)
        if not _is_zero_scalar(value):
            out[pi] = value
    return out


def braid_apply(word: Word, sigma: Permutation, h: CoeffTable, xi, rates: RateParams):
    """Apply a word of exchange operators (rightmost letter first) to the
    pair (sigma, h); returns the new pair."""
    for i in reversed(word):
        h = exchange_update(i, sigma, h, xi, rates)
        sigma = adjacent_swap(sigma, i)
    return sigma, h


def species_coefficient(
    sigma: Permutation, nu: SpeciesMap, xi, rates: RateParams, word: Word | None = None
) -> CoeffTable:
    """Coefficient table above sigma for initial labeling nu.

    Walks ``word`` (default: the canonical sorting word) from the point
    mass at nu above the identity.  A supplied word must evaluate to sigma.
    """
    n = len(sigma)
    if len(nu) != n:
        raise ValueError("nu and sigma must have the same length")
    if word is None:
        word = canonical_word(sigma)
    elif word_to_permutation(word, n) != sigma:
        raise ValueError(f"word {word} does not evaluate to {sigma}")
    end, h = braid_apply(word, identity(n), {nu: 1}, xi, rates)
    assert end == sigma
    return h


def coefficient_table(nu: SpeciesMap, xi, rates: RateParams) -> dict[Permutation, CoeffTable]:
    """Coefficient tables for every sigma at once, sharing work along a
    breadth-first sweep: each permutation is reached once, through any
    shortest ascent (word independence makes the choice immaterial)."""
    n = len(nu)
    table = {identity(n): {nu: 1}}
    level = [identity(n)]
    while level:
        next_level = []
        for sigma in sorted(level):
            for i in range(1, n):
                if sigma[i - 1] < sigma[i]:
                    tau = adjacent_swap(sigma, i)
                    if tau not in table:
                        table[tau] = exchange_update(i, sigma, table[sigma], xi, rates)
                        next_level.append(tau)
        level = next_level
    return table


def multispecies_amplitude(
    sigma: Permutation, pi: SpeciesMap, nu: SpeciesMap, xi, rates: RateParams
):
    """Amplitude times the (sigma, pi) coefficient; 0 when pi is outside
    the table's support."""
    h = species_coefficient(sigma, nu, xi, rates).get(pi, 0)
    if _is_zero_scalar(h):
        return 0
    return h * amplitude(sigma, xi, rates)


# --- word-expansion form -------------------------------------------------


def expansion_summands(
    sigma: Permutation, word: Word, nu: SpeciesMap, xi, rates: RateParams
) -> dict[SpeciesMap, list]:
    """The coefficient table as one explicit product per surviving branch.

    Each subset of the word's letters is a branch: selected letters take
    their alpha-term (composing the label map with the bond swap), the
    rest take 1 minus their beta-term.  Branches whose alpha vanishes
    (equal labels at the bond) are pruned.  Returns, per final labeling,
    the list of branch products; summing each list gives the coefficient.
    """
    n = len(sigma)
    if word_to_permutation(word, n) != sigma:
        raise ValueError(f"word {word} does not evaluate to {sigma}")
    m = len(word)
    # permutation in force when letter l is applied (letters right of l done)
    perm_before = [identity(n)] * m
    for l in range(m - 2, -1, -1):
        perm_before[l] = adjacent_swap(perm_before[l + 1], word[l + 1])
    c_at = []
    for l in range(m):
        rho = perm_before[l]
        c_at.append(1 + s_factor(xi[rho[word[l] - 1] - 1], xi[rho[word[l]] - 1], rates))

    out: dict[SpeciesMap, list] = {}
    for mask in range(1 << m):
        selected = [l for l in range(m) if mask >> l & 1]
        target = nu
        for l in reversed(selected):
            target = label_swap(target, word[l])
        value = 1
        alive = True
        for l in range(m):
            point = target
            for lp in selected:
                if lp >= l:
                    break
                point = label_swap(point, word[lp])
            alpha, beta = swap_rates(word[l], point, rates)
            if mask >> l & 1:
                if alpha == 0:
                    alive = False
                    break
                value = value * (c_at[l] * alpha)
            else:
                value = value * (1 - c_at[l] * beta)
        if alive:
            out.setdefault(target, []).append(value)
    return out


def coefficient_by_expansion(
    sigma: Permutation, word: Word, nu: SpeciesMap, xi, rates: RateParams
) -> CoeffTable:
    """Sum of expansion_summands; equals species_coefficient on any word
    for sigma."""
    sums: CoeffTable = {}
    for pi, values in expansion_summands(sigma, word, nu, xi, rates).items():
        total = values[0]
        for v in values[1:]:
            total = total + v
        sums[pi] = total
    return _cleaned(sums)


# --- second-class particle closed forms ----------------------------------


def second_class_coefficient(
    sigma: Permutation, nu_pos: int, j: int, xi, rates: RateParams
):
    """Closed form for one species-1 particle among species 2: the
    coefficient above sigma at the labeling with the 1 in slot j, when the
    1 starts in slot nu_pos (1 or 2).

    nu_pos=1 covers every sigma and j (value 0 when the 1's slot in sigma
    is left of j).  nu_pos=2 is only proved on the region
    inverse(sigma)[0] >= j and inverse(sigma)[1] + inversions_below(sigma, 2) >= j;
    outside it the closed form is unproven and this raises ValueError.
    """
    n = len(sigma)
    if not 1 <= j <= n:
        raise ValueError(f"slot j={j} out of range for N={n}")
    p, q = rates.p, rates.q
    inv = inverse(sigma)

    def s1(k):
        return s_factor(xi[0], xi[sigma[k - 1] - 1], rates)

    def s2(k):
        return s_factor(xi[1], xi[sigma[k - 1] - 1], rates)

    if nu_pos == 1:
        if inv[0] < j:
            return 0
        value = p - q * s1(j)
        for k in range(j - 1, 0, -1):
            value = value * (q * (1 + s1(k)))
        return value

    if nu_pos == 2:
        if inv[0] < j or inv[1] + inversions_below(sigma, 2) < j:
            raise ValueError(
                "closed form for nu_pos=2 only holds when the 1 and the 2 "
                f"in sigma={sigma} both sit at or right of slot j={j}"
            )
        total = 0
        for i in range(1, j):
            term = 1
            for k in range(1, i):
                term = term * (q * (1 + s2(k)))
            term = term * (p - q * s2(i)) * (q - p * s1(i))
            for k in range(i + 1, j):
                term = term * (q * (1 + s1(k)))
            term = term * (p - q * s1(j))
            total = total + term
        tail = 1
        for k in range(1, j):
            tail = tail * (q * (1 + s2(k)))
        tail = tail * (p - q * s2(j)) * (p * (1 + s1(j)))
        return total + tail

    raise ValueError(f"nu_pos must be 1 or 2, got {nu_pos}")


# --- braid relation verification ------------------------------------------


@dataclass
class BraidReport:
    passed: bool
    checks: int
    counterexample: dict | None = None


def _default_labelings(n: int) -> list[SpeciesMap]:
    two = tuple([1] + [2] * (n - 1))
    mixed = tuple([2, 1] + [2] * (n - 2))
    three = tuple(min(k, 3) for k in range(1, n + 1))
    return [two, mixed, three]


def check_braid_relations(
    n: int, xi, rates: RateParams, labelings: list[SpeciesMap] | None = None
) -> BraidReport:
    """Exhaustively check, above every sigma and every point-mass table on
    the given labelings' rearrangements, that the exchange operators square
    to the identity, commute at distance, and satisfy the braid relation.

    Exact equality (use rational xi and rates); the first violated pair is
    returned as a counterexample.
    """
    if labelings is None:
        labelings = _default_labelings(n)
    relations: list[tuple[Word, Word]] = []
    for i in range(1, n):
        relations.append(((i, i), ()))
        for jj in range(i + 2, n):
            relations.append(((i, jj), (jj, i)))
        if i + 1 < n:
            relations.append(((i, i + 1, i), (i + 1, i, i + 1)))
    checks = 0
    for nu in labelings:
        for pi in species_orbit(nu):
            for sigma in all_permutations(n):
                base = {pi: 1}
                for left, right in relations:
                    got_l = braid_apply(left, sigma, base, xi, rates)
                    got_r = braid_apply(right, sigma, base, xi, rates)
                    checks += 1
                    if got_l[0] != got_r[0] or _cleaned(got_l[1]) != _cleaned(got_r[1]):
                        return BraidReport(
                            passed=False,
                            checks=checks,
                            counterexample={
                                "sigma": sigma,
                                "pi": pi,
                                "left": left,
                                "right": right,
                            },
                        )
    return BraidReport(passed=True, checks=checks)
