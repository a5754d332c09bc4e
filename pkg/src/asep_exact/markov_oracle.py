"""Brute-force finite-window Markov oracle.

Ground truth for small systems: enumerate every configuration of N
labeled-by-species particles inside a window of sites, build the sparse
jump-rate generator, and propagate the initial point mass by
uniformization.  Dynamics (rightward rate p, leftward rate q per particle):
a move onto an empty site always happens; a move onto an occupied site
swaps the two labels when the mover has the strictly larger species
number and is blocked otherwise.  Moves that would leave the window are
dropped, so probability mass is conserved exactly and the truncation bias
is bounded by the leakage of the free dynamics, estimated by a rate-1
Poisson tail per particle (a particle's own attempts are the only way the
occupied region's hull can grow).

Everything here is deliberately independent of the contour-integral
machinery: plain state enumeration, scipy sparse matrices, Poisson tails.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from .bethe_algebra import RateParams

Config = tuple[tuple[int, ...], tuple[int, ...]]  # (sites, species), both tuples

UNIFORMIZATION_TAIL = 1e-12


def check_config(sites: tuple[int, ...], species: tuple[int, ...]) -> None:
    if len(sites) != len(species):
        raise ValueError("sites and species lengths differ")
    if any(a >= b for a, b in zip(sites, sites[1:])):
        raise ValueError(f"sites must be strictly increasing, got {sites}")
    if any(s < 1 for s in species):
        raise ValueError("species labels must be positive integers")


def single_step_moves(config: Config, rates: RateParams) -> dict[Config, float]:
    """All one-jump successors with their rates (rates merged when a swap
    is reachable from both sides of the pair)."""
    sites, species = config
    check_config(sites, species)
    n = len(sites)
    occupied = {x: i for i, x in enumerate(sites)}
    out: dict[Config, float] = {}

    def add(new_sites, new_species, rate):
        key = (tuple(new_sites), tuple(new_species))
        out[key] = out.get(key, 0.0) + rate

    p, q = float(rates.p), float(rates.q)
    for i, x in enumerate(sites):
        for step, rate in ((1, p), (-1, q)):
            if rate == 0:
                continue
            target = x + step
            if target not in occupied:
                new_sites = list(sites)
                new_sites[i] = target
                add(sorted(new_sites), species, rate)
            else:
                j = occupied[target]
                if species[i] > species[j]:
                    new_species = list(species)
                    new_species[i], new_species[j] = new_species[j], new_species[i]
                    add(sites, new_species, rate)
    return out


def exit_rate(config: Config, rates: RateParams) -> float:
    return sum(single_step_moves(config, rates).values())


def predecessor_flows(config: Config, rates: RateParams) -> dict[Config, float]:
    """States with a one-jump move into ``config``, with that move's rate."""
    sites, species = config
    n = len(sites)
    candidates: set[Config] = set()
    for i in range(n):
        for step in (-1, 1):
            new_sites = list(sites)
            new_sites[i] = sites[i] + step
            if len(set(new_sites)) == n:
                candidates.add((tuple(sorted(new_sites)), species))
    for i in range(n - 1):
        if sites[i + 1] == sites[i] + 1 and species[i] != species[i + 1]:
            new_species = list(species)
            new_species[i], new_species[i + 1] = new_species[i + 1], new_species[i]
            candidates.add((sites, tuple(new_species)))
    flows: dict[Config, float] = {}
    for cand in candidates:
        rate = single_step_moves(cand, rates).get(config)
        if rate:
            flows[cand] = rate
    return flows


@dataclass(frozen=True)
class StateSpace:
    """All placements of the species multiset inside a site window, in a
    fixed (sites-then-species lexicographic) order."""

    window: tuple[int, int]
    states: tuple[Config, ...]
    index: dict[Config, int]

    @classmethod
    def build(cls, window: tuple[int, int], n: int, nu: tuple[int, ...]) -> "StateSpace":
        lo, hi = window
        if hi - lo + 1 < n:
            raise ValueError("window too small for the particle count")
        orbit = sorted(set(itertools.permutations(nu)))
        states = tuple(
            (sites, spc)
            for sites in itertools.combinations(range(lo, hi + 1), n)
            for spc in orbit
        )
        return cls(window=window, states=states, index={s: k for k, s in enumerate(states)})


def build_generator(space: StateSpace, rates: RateParams) -> sparse.csr_matrix:
    """Sparse jump-rate matrix Q with rows indexed by the from-state;
    off-diagonal entries are move rates into the window, the diagonal the
    negated row sum (window-exiting moves dropped)."""
    lo, hi = space.window
    rows, cols, vals = [], [], []
    for k, (sites, species) in enumerate(space.states):
        total = 0.0
        for (new_sites, new_species), rate in single_step_moves((sites, species), rates).items():
            if new_sites[0] < lo or new_sites[-1] > hi:
                continue
            rows.append(k)
            cols.append(space.index[(new_sites, new_species)])
            vals.append(rate)
            total += rate
        rows.append(k)
        cols.append(k)
        vals.append(-total)
    m = len(space.states)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))


def expm_action(generator: sparse.csr_matrix, t: float, start_index: int) -> np.ndarray:
    """Distribution row delta_start * exp(t Q) by uniformization, accurate
    to the UNIFORMIZATION_TAIL Poisson truncation."""
    m = generator.shape[0]
    v = np.zeros(m)
    v[start_index] = 1.0
    if t == 0:
        return v
    lam = float(-generator.diagonal().min())
    if lam == 0:
        return v
    transition = sparse.eye(m, format="csr") + generator.transpose().tocsr() / lam
    mu = lam * t
    weight = np.exp(-mu)
    cumulative = weight
    out = weight * v
    w = v
    k = 0
    while cumulative < 1 - UNIFORMIZATION_TAIL:
        k += 1
        w = transition @ w
        weight *= mu / k
        cumulative += weight
        out += weight * w
        if k > 1000 + 10 * mu:
            raise RuntimeError("uniformization failed to converge")
    return out


def single_particle_series(displacement: int, rates: RateParams, t: float) -> float:
    """One particle's transition probability as its explicit jump series:
    condition on k left jumps and k + d right jumps.

    P(d) = exp(-t) * sum_k p^(k+d) q^k t^(2k+d) / (k! (k+d)!),  k >= max(0, -d).

    Terms are built by the ratio recursion term *= p q t^2 / (k (k+d)) so
    nothing ever overflows; the leading term uses logs for the same reason.
    """
    import math

    p, q = float(rates.p), float(rates.q)
    d = int(displacement)
    if t == 0:
        return 1.0 if d == 0 else 0.0
    if (d > 0 and p == 0) or (d < 0 and q == 0):
        return 0.0
    k0 = max(0, -d)
    log_lead = -t + (k0 + d) * math.log(p) if p > 0 else -t
    if k0 > 0:
        log_lead += k0 * math.log(q)
    log_lead += (2 * k0 + d) * math.log(t)
    log_lead -= math.lgamma(k0 + 1) + math.lgamma(k0 + d + 1)
    term = math.exp(log_lead)
    total = term
    k = k0
    while term > 1e-25 * max(total, 1e-300) or k < k0 + 8:
        k += 1
        term *= p * q * t * t / (k * (k + d))
        total += term
        if k > k0 + 100000:
            raise RuntimeError("series failed to converge")
    return total


def poisson_tail(t: float, delta: int) -> float:
    """P(Poisson(t) >= delta)."""
    if delta <= 0:
        return 1.0
    return float(poisson.sf(delta - 1, t))


def leakage_bound(n: int, t: float, delta: int) -> float:
    """Bound on the probability any of n particles strays delta or more
    sites beyond its start by time t."""
    return min(1.0, n * poisson_tail(t, delta))


def window_for(y: tuple[int, ...], t: float, leak_tol: float = 1e-10) -> tuple[int, int]:
    """Smallest symmetric window around the initial sites whose leakage
    bound is at most leak_tol."""
    n = len(y)
    delta = 1
    while leakage_bound(n, t, delta) > leak_tol:
        delta += 1
        if delta > 10000:
            raise RuntimeError("no window satisfies the leakage tolerance")
    return (min(y) - delta, max(y) + delta)


def oracle_distribution(
    y: tuple[int, ...],
    nu: tuple[int, ...],
    rates: RateParams,
    t: float,
    leak_tol: float = 1e-10,
    window: tuple[int, int] | None = None,
):
    """Point-mass evolution as a dict Config -> probability, plus the
    window used and its leakage bound.  Total mass is 1 up to roundoff
    because exiting moves are suppressed, but states near the boundary
    carry truncation bias up to the leakage bound."""
    check_config(y, nu)
    if window is None:
        window = window_for(y, t, leak_tol)
    space = StateSpace.build(window, len(y), nu)
    gen = build_generator(space, rates)
    dist = expm_action(gen, t, space.index[(tuple(y), tuple(nu))])
    delta = min(min(y) - window[0], window[1] - max(y))
    return (
        {cfg: float(pr) for cfg, pr in zip(space.states, dist)},
        window,
        leakage_bound(len(y), t, delta),
    )
