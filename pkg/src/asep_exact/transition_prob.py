"""Exact transition probabilities from the contour-integral sum.

The probability of finding the particles at sites ``x`` with species
labeling ``pi``, having started at ``y`` with labeling ``nu``, is a sum
over permutations of an N-fold contour integral.  Each summand couples a
pairwise scattering amplitude, a species reordering coefficient, and a
product of per-variable kernels carrying the site exponents and the time
evolution factor.

The quadrature turns each contour into K equispaced nodes on a circle of
small admissible radius.  The integrand is then separable except for the
scattering pair factors and the species coefficients, so the engine
evaluates, per permutation and labeling, a tensor of moments

    V[s_1 .. s_N] = mean over node tuples of
                    (pair factors) * (species coeff) * prod_v kernel_v * z_v^{site s_v}

and reads every requested target off the same tensors.  Intermediate sums
cancel violently for targets far to the left of the start (the summands
reach 1e10 while the answer sits near 1e-8), so all node arithmetic and
all accumulation is done in extended precision; see the compensation in
the slab loop.

Everything is streamed over the first node axis: the full node grid for
N particles has K^N points, but one slab (one node fixed on the first
contour) is a K^{N-1} grid, which keeps memory flat in K for N <= 4.
"""

from __future__ import annotations

import numbers
import warnings
from dataclasses import dataclass

import numpy as np

from .bethe_algebra import RateParams, amplitude, dispersion, s_factor
from .contour_quadrature import (
    MAX_NODES,
    ContourSpec,
    assert_admissible,
    axis_view,
    balanced_radius,
    node_points,
)
from .markov_oracle import (
    check_config,
    exit_rate,
    leakage_bound,
    predecessor_flows,
    single_step_moves,
    window_for,
)
from .permutations import all_permutations, inverse, inversion_classes, inversions
from .species_coeff import coefficient_table, species_orbit

# Relative size of an imaginary residue worth surfacing.  The exact value
# is real; the quadrature leaves a rounding-level imaginary part.
IMAG_REL_TOL = 1e-9

# Cap on one slab's node-grid size, K^(N-1) points of extended-precision
# complex.  64^3 fits comfortably; one more axis would not.
MAX_SLAB_POINTS = 1 << 21


def _longdouble(value) -> np.longdouble:
    # Rationals deserve better than a float round-trip
    if isinstance(value, numbers.Rational) and not isinstance(value, float):
        return np.longdouble(int(value.numerator)) / np.longdouble(int(value.denominator))
    return np.longdouble(value)


def _extended_rates(rates: RateParams) -> RateParams:
    return RateParams(_longdouble(rates.p), _longdouble(rates.q))


@dataclass(frozen=True)
class TargetValue:
    """One target's probability with its leftover imaginary residue."""

    sites: tuple[int, ...]
    species: tuple[int, ...]
    value: float
    imag: float

    @property
    def imag_excessive(self) -> bool:
        return abs(self.imag) > IMAG_REL_TOL * max(1.0, abs(self.value))


@dataclass(frozen=True)
class DistributionReport:
    initial_sites: tuple[int, ...]
    initial_species: tuple[int, ...]
    p: float
    time: float
    radius: float
    nodes: int
    window: tuple[int, int]
    leakage: float
    values: tuple[TargetValue, ...]

    @property
    def total_mass(self) -> float:
        return sum(v.value for v in self.values)

    @property
    def max_imag(self) -> float:
        return max((abs(v.imag) for v in self.values), default=0.0)

    def as_dict(self) -> dict[tuple[tuple[int, ...], tuple[int, ...]], float]:
        return {(v.sites, v.species): v.value for v in self.values}


@dataclass(frozen=True)
class DeltaReport:
    max_residual: float
    nodes: int
    radius: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


@dataclass(frozen=True)
class MasterEquationReport:
    time_derivative: float
    flow_balance: float
    residual: float
    dt: float


def _resolve_radius(spec: ContourSpec, rates, t, min_exponent, n) -> np.longdouble:
    if spec.radius is not None:
        radius = np.longdouble(spec.radius)
    else:
        radius = balanced_radius(
            rates, t, min_exponent, n * (n - 1) // 2, n, nodes=spec.nodes
        )
    assert_admissible(float(radius), rates)
    return radius


def _axis_kernels(z, y, rates, t, nodes):
    """Per-variable node vectors: z^{-y_v} * exp(dispersion * t) / K.

    The -1 in the pole order and the dz = z * (node spacing) weight cancel
    to a single z^{-y_v} here.
    """
    growth = np.exp(dispersion(z, rates) * np.longdouble(t)) if t else 1
    return [z ** (-int(yv)) * growth / np.longdouble(nodes) for yv in y]


def _moment_matrix(z, site_powers):
    exps = np.array(site_powers, dtype=np.int64)
    return z[:, None] ** exps[None, :]


def _rest_einsum(n_rest):
    grid = "abcdef"[:n_rest]
    outs = "uvwxyz"[:n_rest]
    pairs = ",".join(g + o for g, o in zip(grid, outs))
    return f"{grid},{pairs}->{outs}"


def _compensated_add(total, comp, term):
    s = total + term
    big = np.abs(total) >= np.abs(term)
    comp += np.where(big, (total - s) + term, (term - s) + total)
    return s, comp


def _evaluate(
    y: tuple[int, ...],
    nu: tuple[int, ...],
    targets: list[tuple[tuple[int, ...], tuple[int, ...]]],
    rates: RateParams,
    t: float,
    spec: ContourSpec | None = None,
    force_table_recursion: bool = False,
) -> list[complex]:
    """Values for a batch of (sites, species) targets sharing one start.

    Targets whose species multiset differs from nu's get an exact 0.
    """
    check_config(tuple(y), tuple(nu))
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    n = len(y)
    spec = spec if spec is not None else ContourSpec(dimension=n)
    for x, pi in targets:
        check_config(tuple(x), tuple(pi))
        if len(x) != n:
            raise ValueError("target size differs from initial size")

    orbit = species_orbit(tuple(nu))
    live = [k for k, (x, pi) in enumerate(targets) if tuple(pi) in orbit]
    out: list[complex] = [0j] * len(targets)
    if not live:
        return out

    ext = _extended_rates(rates)
    min_exponent = min(sum(targets[k][0]) - sum(y) for k in live)
    radius = _resolve_radius(spec, ext, t, min_exponent, n)
    nodes = spec.nodes
    z = node_points(radius, nodes)
    kernels = _axis_kernels(z, y, ext, t, nodes)

    site_powers = sorted({s for k in live for s in targets[k][0]})
    site_index = {s: i for i, s in enumerate(site_powers)}
    moments = _moment_matrix(z, site_powers)

    sigmas = all_permutations(n)
    needed_pis = sorted({tuple(targets[k][1]) for k in live})

    if n == 1:
        v = moments.T @ kernels[0]
        for k in live:
            out[k] = complex(v[site_index[targets[k][0][0]]])
        return out

    n_rest = n - 1
    if nodes**n_rest > MAX_SLAB_POINTS:
        raise ValueError(
            f"node grid K^(N-1) = {nodes}^{n_rest} exceeds the slab budget; "
            "lower the node count or the particle count"
        )

    trivial_table = len(orbit) == 1 and not force_table_recursion
    rest_views = [axis_view(z, a, n_rest) for a in range(n_rest)]

    # Scattering factors: pairs entirely in the rest grid are slab
    # independent; pairs with the first variable are rows of a (K, K)
    # matrix sliced per slab.
    pair_rest = {}
    for a in range(2, n + 1):
        for b in range(2, a):
            pair_rest[(a, b)] = s_factor(rest_views[a - 2], rest_views[b - 2], ext)
    pair_first = s_factor(z[:, None], z[None, :], ext)  # [k_a, k_1]

    rest_kernel = axis_view(kernels[1], 0, n_rest)
    for a in range(3, n + 1):
        rest_kernel = rest_kernel * axis_view(kernels[a - 1], a - 2, n_rest)

    einsum_sub = _rest_einsum(n_rest)
    rest_shape = (len(site_powers),) * n_rest
    tensors = {
        (sigma, pi): (
            np.zeros((len(site_powers),) + rest_shape, dtype=np.clongdouble),
            np.zeros((len(site_powers),) + rest_shape, dtype=np.clongdouble),
        )
        for sigma in sigmas
        for pi in needed_pis
    }
    inv_lists = {sigma: sorted(inversions(sigma)) for sigma in sigmas}

    for k in range(nodes):
        xi_slab = (z[k],) + tuple(rest_views)
        if trivial_table:
            tables = {sigma: {tuple(nu): 1} for sigma in sigmas}
        else:
            tables = coefficient_table(tuple(nu), xi_slab, ext)
        first_column = kernels[0][k] * moments[k, :]
        for sigma in sigmas:
            amp = rest_kernel
            for a, b in inv_lists[sigma]:
                if b == 1:
                    amp = amp * axis_view(pair_first[:, k], a - 2, n_rest)
                else:
                    amp = amp * pair_rest[(a, b)]
            table = tables[sigma]
            for pi in needed_pis:
                coeff = table.get(pi)
                if coeff is None:
                    continue
                integrand = amp * coeff if not (trivial_table and coeff == 1) else amp
                rest_tensor = np.einsum(
                    einsum_sub, integrand, *([moments] * n_rest), optimize=True
                )
                term = first_column.reshape((-1,) + (1,) * n_rest) * rest_tensor
                total, comp = tensors[(sigma, pi)]
                total, comp = _compensated_add(total, comp, term)
                tensors[(sigma, pi)] = (total, comp)

    for k in live:
        x, pi = targets[k]
        pi = tuple(pi)
        acc = np.clongdouble(0)
        for sigma in sigmas:
            total, comp = tensors[(sigma, pi)]
            tensor = total + comp
            sigma_inv = inverse(sigma)
            idx = tuple(site_index[x[sigma_inv[v - 1] - 1]] for v in range(1, n + 1))
            acc = acc + tensor[idx]
        out[k] = complex(acc)
    return out


def _as_float(value: complex, context: str) -> float:
    if abs(value.imag) > IMAG_REL_TOL * max(1.0, abs(value.real)):
        warnings.warn(
            f"{context}: imaginary residue {value.imag:.3e} exceeds "
            f"{IMAG_REL_TOL:g} of the value {value.real:.6e}",
            stacklevel=3,
        )
    return value.real


def transition_probability(
    y: tuple[int, ...],
    nu: tuple[int, ...],
    x: tuple[int, ...],
    pi: tuple[int, ...],
    rates: RateParams,
    t: float,
    spec: ContourSpec | None = None,
) -> float:
    """P(particles at x with labeling pi at time t | started at y with nu)."""
    value = _evaluate(tuple(y), tuple(nu), [(tuple(x), tuple(pi))], rates, t, spec)[0]
    return _as_float(value, f"P({x}, {pi})")


def single_species_probability(
    y: tuple[int, ...],
    x: tuple[int, ...],
    rates: RateParams,
    t: float,
    spec: ContourSpec | None = None,
) -> float:
    """All particles identical: the labeling collapses and only the site
    process remains."""
    ones = (1,) * len(y)
    return transition_probability(y, ones, x, ones, rates, t, spec)


def transition_probabilities(
    y: tuple[int, ...],
    nu: tuple[int, ...],
    targets: list[tuple[tuple[int, ...], tuple[int, ...]]],
    rates: RateParams,
    t: float,
    spec: ContourSpec | None = None,
) -> list[TargetValue]:
    values = _evaluate(tuple(y), tuple(nu), targets, rates, t, spec)
    return [
        TargetValue(sites=tuple(x), species=tuple(pi), value=v.real, imag=v.imag)
        for (x, pi), v in zip(targets, values)
    ]


def _window_targets(window: tuple[int, int], n: int, orbit) -> list:
    import itertools

    lo, hi = window
    return [
        (sites, pi)
        for sites in itertools.combinations(range(lo, hi + 1), n)
        for pi in orbit
    ]


def distribution_over_window(
    y: tuple[int, ...],
    nu: tuple[int, ...],
    rates: RateParams,
    t: float,
    window: tuple[int, int] | None = None,
    leak_tol: float = 1e-10,
    spec: ContourSpec | None = None,
) -> DistributionReport:
    """Every target inside a window, heavy enough that the mass outside is
    below leak_tol (or inside an explicit window)."""
    y = tuple(y)
    nu = tuple(nu)
    if window is None:
        window = window_for(y, t, leak_tol)
    delta = min(min(y) - window[0], window[1] - max(y))
    orbit = species_orbit(nu)
    targets = _window_targets(window, len(y), orbit)
    spec = spec if spec is not None else ContourSpec(dimension=len(y))
    values = transition_probabilities(y, nu, targets, rates, t, spec)
    ext = _extended_rates(rates)
    min_exponent = min(sum(x) for x, _ in targets) - sum(y)
    radius = _resolve_radius(spec, ext, t, min_exponent, len(y))
    return DistributionReport(
        initial_sites=y,
        initial_species=nu,
        p=float(rates.p),
        time=float(t),
        radius=float(radius),
        nodes=spec.nodes,
        window=window,
        leakage=leakage_bound(len(y), t, max(delta, 0)),
        values=tuple(values),
    )


def delta_recovery(
    y: tuple[int, ...],
    nu: tuple[int, ...],
    rates: RateParams,
    margin: int = 2,
    tol: float = 1e-8,
    spec: ContourSpec | None = None,
) -> DeltaReport:
    """At t = 0 the distribution must be a point mass at the start.  Runs
    the full integral over a window around the start and doubles the node
    count until the worst deviation from the Kronecker delta passes tol
    (or the node cap is hit)."""
    y = tuple(y)
    nu = tuple(nu)
    n = len(y)
    window = (min(y) - margin, max(y) + margin)
    targets = _window_targets(window, n, species_orbit(nu))
    nodes = spec.nodes if spec is not None else ContourSpec(dimension=n).nodes
    radius = spec.radius if spec is not None else None
    while True:
        run_spec = ContourSpec(nodes=nodes, radius=radius, dimension=n)
        values = _evaluate(y, nu, targets, rates, 0.0, run_spec)
        worst = 0.0
        for (x, pi), v in zip(targets, values):
            want = 1.0 if (x == y and pi == nu) else 0.0
            worst = max(worst, abs(v.real - want), abs(v.imag))
        ext = _extended_rates(rates)
        used_radius = float(
            _resolve_radius(run_spec, ext, 0.0, min(sum(x) for x, _ in targets) - sum(y), n)
        )
        if worst <= tol or nodes >= MAX_NODES:
            return DeltaReport(
                max_residual=worst, nodes=nodes, radius=used_radius, tolerance=tol
            )
        nodes *= 2


def sigma_summand(
    y: tuple[int, ...],
    x: tuple[int, ...],
    sigma: tuple[int, ...],
    rates: RateParams,
    t: float = 0.0,
    spec: ContourSpec | None = None,
) -> complex:
    """A single permutation's contribution to the identical-species
    integral: scattering amplitude times kernels, no species coefficient."""
    y = tuple(y)
    x = tuple(x)
    n = len(y)
    spec = spec if spec is not None else ContourSpec(dimension=n)
    ext = _extended_rates(rates)
    radius = _resolve_radius(spec, ext, t, sum(x) - sum(y), n)
    nodes = spec.nodes
    z = node_points(radius, nodes)
    kernels = _axis_kernels(z, y, ext, t, nodes)
    sigma_inv = inverse(sigma)
    # fold the site exponent of each variable into its kernel
    folded = [
        kernels[v - 1] * z ** int(x[sigma_inv[v - 1] - 1]) for v in range(1, n + 1)
    ]
    if n == 1:
        return complex(np.sum(folded[0]))
    views = [axis_view(folded[v], v, n) for v in range(n)]
    xi = tuple(axis_view(z, v, n) for v in range(n))
    total = np.clongdouble(0)
    comp = np.clongdouble(0)
    for k in range(nodes):
        grid = views[0][k]
        for v in range(1, n):
            grid = grid * views[v]
        xi_slab = (z[k],) + xi[1:]
        for a, b in sorted(inversions(sigma)):
            grid = grid * s_factor(xi_slab[a - 1], xi_slab[b - 1], ext)
        term = np.sum(grid)
        s = total + term
        comp += (total - s) + term if abs(total) >= abs(term) else (term - s) + total
        total = s
    return complex(total + comp)


def inversion_class_sum(
    y: tuple[int, ...],
    x: tuple[int, ...],
    entries: frozenset[int],
    rates: RateParams,
    spec: ContourSpec | None = None,
) -> complex:
    """Sum of t = 0 summands over the permutations whose inversions with
    the largest entry hit exactly this entry set.  Cancels identically;
    the return value is the quadrature residual of that cancellation."""
    n = len(y)
    classes = inversion_classes(n)
    if frozenset(entries) not in classes:
        raise ValueError(f"no inversion class {set(entries)} for n = {n}")
    members = classes[frozenset(entries)]
    return sum(
        (sigma_summand(y, x, sigma, rates, 0.0, spec) for sigma in members),
        start=0j,
    )


def master_equation_residual(
    y: tuple[int, ...],
    nu: tuple[int, ...],
    x: tuple[int, ...],
    pi: tuple[int, ...],
    rates: RateParams,
    t: float,
    dt: float = 1e-3,
    spec: ContourSpec | None = None,
) -> MasterEquationReport:
    """Central-difference time derivative of one probability against the
    in/out flow balance of the jump rates.  Independent of the Markov
    oracle's matrix exponential: rates come from the single-step move
    enumeration, probabilities from the contour integral."""
    y, nu, x, pi = tuple(y), tuple(nu), tuple(x), tuple(pi)
    target = (x, pi)
    flows = predecessor_flows(target, rates)
    sources = sorted(flows)
    batch = sources + [target]
    here = _evaluate(y, nu, batch, rates, t, spec)
    plus = _evaluate(y, nu, [target], rates, t + dt, spec)[0]
    minus = _evaluate(y, nu, [target], rates, t - dt, spec)[0]
    lhs = (plus.real - minus.real) / (2 * dt)
    rhs = sum(flows[s] * v.real for s, v in zip(sources, here))
    rhs -= exit_rate(target, rates) * here[-1].real
    return MasterEquationReport(
        time_derivative=lhs, flow_balance=rhs, residual=abs(lhs - rhs), dt=dt
    )
