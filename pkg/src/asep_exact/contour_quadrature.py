"""Tensor-product contour quadrature on a common circle.

All integrals in this package are over N copies of a circle |xi| = r
centered at the origin, with r small enough that every scattering
denominator p + q*u*v - v stays away from zero on and inside the torus:
that needs q*r^2 + r < p, i.e. r below the positive root

    r_star = (sqrt(1 + 4 p q) - 1) / (2 q)      (r_star = p when q = 0).

``choose_radius`` returns safety * r_star (default safety 1/2);
``balanced_radius`` instead minimizes a magnitude bound over admissible
radii, which matters when targets sit far to the left of the initial
configuration and the integrand grows like r**(negative exponent).

Discretization: K equispaced nodes per circle turn each contour integral
(2*pi*i)^-1 * closed integral f dxi into the exact mean over nodes of
f(node) * node; the tensor version multiplies one node factor per axis.
For integrands analytic in an annulus around the circle the error decays
geometrically in K (aliasing onto exponents shifted by multiples of K).
Everything is evaluated in extended precision (clongdouble): the sums
cancel down many orders from the individual terms, and float64 roundoff
would dominate the tolerances this package promises.  Node order is fixed
and accumulation compensated, so results are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bethe_algebra import RateParams

LONG_PI = np.longdouble("3.141592653589793238462643383279502884")

DEFAULT_NODES = 64
MAX_NODES = 1024


def admissible_radius_bound(rates: RateParams) -> float:
    """Largest radius with all scattering denominators bounded away from
    zero on the closed polydisk: the positive root of q r^2 + r = p."""
    p, q = float(rates.p), float(rates.q)
    if q == 0:
        return p
    return (math.sqrt(1 + 4 * p * q) - 1) / (2 * q)


def choose_radius(rates: RateParams, safety: float = 0.5) -> float:
    """safety * admissible bound; the default contour when nothing is
    known about the targets."""
    if not 0 < safety < 1:
        raise ValueError("safety must be in (0, 1)")
    return safety * admissible_radius_bound(rates)


def balanced_radius(
    rates: RateParams,
    t: float,
    min_exponent: int,
    max_inversions: int,
    n_axes: int,
    nodes: int = DEFAULT_NODES,
) -> float:
    """Admissible radius minimizing a crude quadrature error bound.

    The error has two parts, both proportional to the summand magnitude
    scale M(r) = r**min_exponent (worst total power of the target
    monomials against the initial-position factors) times the time factor
    exp((p/r + q r - 1) * n * t) times a per-inversion scattering ratio
    f_max/f_min:

      * roundoff, eps * M(r): pushes r toward the magnitude minimum;
      * trapezoid aliasing, decaying like (r / rho)**nodes with rho the
        distance to the nearest scattering pole, plus the inward tail of
        the essential singularity of the time factor at 0: pushes r away
        from the pole circle (and, for small t, away from 0).

    Minimizing the sum keeps the cancellation as small as the admissible
    contour family allows without letting truncation leak in.
    """
    p, q = float(rates.p), float(rates.q)
    r_star = admissible_radius_bound(rates)
    grid = np.linspace(0.05, 0.97, 185) * r_star
    f_lo = p - grid - q * grid**2
    f_hi = p + grid + q * grid**2
    log_scale = (
        min_exponent * np.log(grid)
        + (p / grid + q * grid - 1) * n_axes * max(t, 0.0)
        + max_inversions * np.log(f_hi / f_lo)
    )
    # nearest scattering pole over both arguments of the pair factor
    rho = p / (1 + q * grid)
    if q > 0:
        with np.errstate(divide="ignore"):
            rho = np.minimum(rho, np.where(grid < p, (p - grid) / (q * grid), np.inf))
    eps = float(np.finfo(np.longdouble).eps)
    log_alias = nodes * np.log(grid / rho)
    tails = np.exp(log_alias)
    if t > 0:
        log_inward = nodes * np.log(p * t / grid) - math.lgamma(nodes + 1)
        with np.errstate(over="ignore"):
            tails = tails + np.exp(np.minimum(log_inward, 700.0))
    log_bound = log_scale + np.log(eps + tails)
    return float(grid[int(np.argmin(log_bound))])


@dataclass(frozen=True)
class ContourSpec:
    """Quadrature settings: nodes per axis, common radius, axis count.

    radius=None means the caller picks (choose_radius or balanced_radius)
    once the rates and targets are known.
    """

    nodes: int = DEFAULT_NODES
    radius: float | None = None
    dimension: int = 1

    def __post_init__(self):
        if self.nodes < 8 or self.nodes % 2:
            raise ValueError("nodes must be even and at least 8")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")


def assert_admissible(radius: float, rates: RateParams) -> None:
    if not 0 < radius < admissible_radius_bound(rates):
        raise ValueError(
            f"radius {radius} is not strictly inside the pole bound "
            f"{admissible_radius_bound(rates)} for p={rates.p}"
        )


def node_points(radius: float, nodes: int) -> np.ndarray:
    """The K quadrature nodes radius * exp(2 pi i k / K), extended
    precision."""
    k = np.arange(nodes, dtype=np.longdouble)
    theta = 2 * LONG_PI * k / np.longdouble(nodes)
    return np.asarray(radius, dtype=np.longdouble) * (
        np.cos(theta) + 1j * np.sin(theta)
    )


def axis_view(values: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    """Reshape a 1-D node array so it broadcasts along one tensor axis."""
    shape = [1] * ndim
    shape[axis] = values.size
    return values.reshape(shape)


def compensated_total(parts) -> complex:
    """Neumaier-compensated sum of already-reduced partial values, in the
    order given."""
    total = np.clongdouble(0)
    comp = np.clongdouble(0)
    for x in parts:
        s = total + x
        if abs(total) >= abs(x):
            comp += (total - s) + x
        else:
            comp += (x - s) + total
        total = s
    return complex(total + comp)


def integrate_tensor(f, spec: ContourSpec, rates: RateParams | None = None) -> complex:
    """Mean over all node tuples of f(xi_1, ..., xi_N) times the product
    of the nodes.

    ``f`` must accept N broadcastable arrays and vectorize over them.  The
    first axis is streamed so the materialized grid stays N-1 dimensional.
    Returns the approximation to the iterated (2 pi i)^-N contour integral.
    """
    if spec.radius is None:
        if rates is None:
            raise ValueError("radius unset and no rates given to derive one")
        radius = choose_radius(rates)
    else:
        radius = spec.radius
    if rates is not None:
        assert_admissible(radius, rates)
    n = spec.dimension
    z = node_points(radius, spec.nodes)
    weight = z / np.clongdouble(spec.nodes)
    if n == 1:
        vals = f(z) * weight
        return complex(vals.sum())
    rest = [axis_view(z, a, n - 1) for a in range(n - 1)]
    rest_weight = np.ones((1,) * (n - 1), dtype=np.clongdouble)
    for a in range(n - 1):
        rest_weight = rest_weight * axis_view(weight, a, n - 1)
    parts = []
    for k in range(spec.nodes):
        vals = f(z[k], *rest) * rest_weight
        parts.append(vals.sum() * weight[k])
    return compensated_total(parts)
