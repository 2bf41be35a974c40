"""Randomness driving the recursive split construction.

This module collects the probabilistic side of the machinery: the exact
law of the three branch sizes created by splitting a uniform leaf-labeled
tree at the branchpoint of two random leaves, its Dirichlet(1/2,1/2,1/2)
limit, the two-tree mass fragmentation process and its associated
martingale, hypergeometric overlap counts, the integer size chain followed
by a tagged leaf through the construction, and the two exponent equations
whose roots set the achievable common-subtree size.

Conventions:

* every sampler takes a ``numpy.random.Generator`` and draws from nothing
  else, so results are reproducible given a seed;
* exact probabilities are ``fractions.Fraction`` values, with floats
  appearing only at sampling and root-finding boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .trees import count_trees

__all__ = [
    "BETA_RANDOM",
    "Simplex3",
    "SplitVector",
    "ChainState",
    "branch_size_pmf",
    "sample_branch_sizes",
    "sample_dirichlet_half",
    "dirichlet_moment",
    "solve_beta_random",
    "beta_random_residual",
    "fragmentation_step",
    "martingale_check",
    "hypergeometric_pmf",
    "hypergeometric_mean",
    "hypergeometric_variance",
    "sample_hypergeometric",
    "chain_step",
    "run_size_chain",
    "estimate_q",
    "centroid_rank_moments",
    "centroid_residual",
    "solve_beta_centroid",
]

#: Root of 3 / (1 + 2*beta)**2 = 1, the growth exponent for random splits:
#: a common subtree of size about n**BETA_RANDOM survives the cascade.
BETA_RANDOM = (math.sqrt(3.0) - 1.0) / 2.0


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Simplex3:
    """A point of the 2-simplex: three nonnegative coordinates summing to 1."""

    y1: float
    y2: float
    y3: float

    def __post_init__(self) -> None:
        if min(self.y1, self.y2, self.y3) < 0.0:
            raise ValueError("simplex coordinates must be nonnegative")
        if abs(self.y1 + self.y2 + self.y3 - 1.0) > 1e-12:
            raise ValueError("simplex coordinates must sum to 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.y1, self.y2, self.y3)


@dataclass(frozen=True, slots=True)
class SplitVector:
    """Mass split produced by a pair of simplex points.

    ``l1, l2, l3`` are the products of matching coordinates of the two
    generators and ``l0`` is the leftover mass, so the four parts sum to 1.
    """

    l1: float
    l2: float
    l3: float
    l0: float

    def __post_init__(self) -> None:
        parts = (self.l1, self.l2, self.l3, self.l0)
        if min(parts) < -1e-15:
            raise ValueError("split masses must be nonnegative")
        if abs(sum(parts) - 1.0) > 1e-12:
            raise ValueError("split masses must sum to 1")

    @classmethod
    def from_pair(cls, y: Simplex3, y_prime: Simplex3) -> "SplitVector":
        l1 = y.y1 * y_prime.y1
        l2 = y.y2 * y_prime.y2
        l3 = y.y3 * y_prime.y3
        return cls(l1, l2, l3, 1.0 - l1 - l2 - l3)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.l1, self.l2, self.l3, self.l0)


@dataclass(frozen=True, slots=True)
class ChainState:
    """Terminal state of one tagged-leaf size chain trajectory.

    ``x`` is the final chain value, ``t`` the number of transitions taken.
    Exactly one of ``absorbed_zero`` (the tagged leaf fell out of every
    surviving piece) and ``entered_window`` (the chain landed in
    ``{1, ..., K-1}`` from above) is set.
    """

    x: int
    t: int
    absorbed_zero: bool
    entered_window: bool

    def __post_init__(self) -> None:
        if self.x < 0 or self.t < 0:
            raise ValueError("chain state fields must be nonnegative")
        if (self.x == 0) != self.absorbed_zero:
            raise ValueError("absorbed_zero must mirror x == 0")
        if self.entered_window == self.absorbed_zero:
            raise ValueError("exactly one absorption flag must be set")


# --------------------------------------------------------------------------
# branch sizes of a random split
# --------------------------------------------------------------------------

# Central-binomial weights C(2k, k) / 4**k.  The joint law of the three
# branch sizes is proportional to the product of these weights, which is
# what makes O(m) hierarchical sampling possible (see sample_branch_sizes).
_central: np.ndarray = np.ones(1)


def _central_weights(upto: int) -> np.ndarray:
    """First ``upto + 1`` values of C(2k, k) / 4**k, grown on demand."""
    global _central
    if _central.size <= upto:
        old = _central.size
        grown = np.empty(upto + 1)
        grown[:old] = _central
        k = np.arange(old - 1, upto, dtype=np.float64)
        grown[old:] = grown[old - 1] * np.cumprod((2.0 * k + 1.0) / (2.0 * k + 2.0))
        _central = grown
    return _central[: upto + 1]


def branch_size_pmf(m: int, m1: int, m2: int, m3: int) -> Fraction:
    """Exact probability that a split of ``m`` labels puts ``m1, m2, m3``
    of them (minus the one relabeled) in the three branches.

    Splitting a uniform leaf-labeled tree on ``m + 1`` leaves at the
    branchpoint of the special leaf and a freshly relabeled one scatters
    the remaining ``m - 1`` labels over three branches.  The chance of the
    ordered outcome ``(m1, m2, m3)`` is::

        m! / (m1! m2! m3!) * c(m1+2) c(m2+2) c(m3+2) / (m * c(m+2))

    where ``c`` counts leaf-labeled trees.  Everything is exact rational
    arithmetic; use :func:`sample_branch_sizes` for simulation.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if min(m1, m2, m3) < 0:
        raise ValueError(f"branch sizes must be nonnegative, got {(m1, m2, m3)}")
    if m1 + m2 + m3 != m - 1:
        raise ValueError(f"branch sizes {(m1, m2, m3)} must sum to m - 1 = {m - 1}")
    num = (
        math.factorial(m)
        * count_trees(m1 + 2)
        * count_trees(m2 + 2)
        * count_trees(m3 + 2)
    )
    den = (
        math.factorial(m1)
        * math.factorial(m2)
        * math.factorial(m3)
        * m
        * count_trees(m + 2)
    )
    return Fraction(num, den)


def sample_branch_sizes(m: int, rng: np.random.Generator) -> tuple[int, int, int]:
    """Draw ``(m1, m2, m3)`` from :func:`branch_size_pmf` in O(m) time.

    The joint pmf is proportional to ``w(m1) w(m2) w(m3)`` with
    ``w(k) = C(2k, k) / 4**k``, and the Vandermonde-type identity
    ``sum_{a+b=s} C(2a,a) C(2b,b) = 4**s`` collapses the first marginal to
    ``P(m1 = k) ∝ w(k)``.  We draw ``m1`` from that marginal and ``m2``
    from the conditional pair law by inverse CDF, instead of tabulating
    the O(m^2) joint support.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    w = _central_weights(m - 1)
    cdf = np.cumsum(w[:m])
    k1 = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    s = m - 1 - k1
    pair = w[: s + 1] * w[s::-1]
    cdf2 = np.cumsum(pair)
    k2 = int(np.searchsorted(cdf2, rng.random() * cdf2[-1], side="right"))
    return (k1, k2, s - k2)


# --------------------------------------------------------------------------
# Dirichlet(1/2, 1/2, 1/2) limit of the branch sizes
# --------------------------------------------------------------------------


def sample_dirichlet_half(rng: np.random.Generator) -> Simplex3:
    """One Dirichlet(1/2, 1/2, 1/2) draw on the 2-simplex.

    Uses the identity that a squared standard normal is Gamma(1/2)
    distributed up to scale, so normalizing three of them gives the target
    law with no special-function machinery.
    """
    while True:
        g = rng.standard_normal(3)
        g *= g
        total = g.sum()
        if total > 0.0:  # zero only on a null event / total underflow
            return Simplex3(g[0] / total, g[1] / total, g[2] / total)


def dirichlet_moment(beta: float) -> float:
    """E Y^beta for one coordinate Y of a Dirichlet(1/2,1/2,1/2) triple.

    Closed form 1 / (1 + 2*beta), valid for beta > -1/2.
    """
    if beta <= -0.5:
        raise ValueError(f"moment diverges for beta <= -1/2, got {beta}")
    return 1.0 / (1.0 + 2.0 * beta)


def solve_beta_random() -> float:
    """Exponent for random splits: the root of 3 * (E Y^beta)^2 = 1.

    The equation is quadratic in beta, so the root is returned in closed
    form as (sqrt(3) - 1) / 2; :func:`beta_random_residual` exposes the
    defining residual for cross-checks with numeric root-finders.
    """
    return BETA_RANDOM


def beta_random_residual(beta: float) -> float:
    """Residual 3 * (E Y^beta)^2 - 1 whose root is :data:`BETA_RANDOM`."""
    return 3.0 * dirichlet_moment(beta) ** 2 - 1.0


# --------------------------------------------------------------------------
# fragmentation of mass by paired splits
# --------------------------------------------------------------------------


def fragmentation_step(mass: float, rng: np.random.Generator) -> float:
    """Push a mass through one paired-split fragmentation step.

    Two independent simplex points are drawn, their coordinate products
    form the split ``(l1, l2, l3, l0)``, and the mass follows piece ``i``
    with probability ``li`` (returning ``mass * li``) or is discarded with
    probability ``l0`` (returning 0).
    """
    if mass <= 0.0:
        raise ValueError(f"need positive mass, got {mass}")
    split = SplitVector.from_pair(
        sample_dirichlet_half(rng), sample_dirichlet_half(rng)
    )
    u = rng.random()
    acc = 0.0
    for piece in (split.l1, split.l2, split.l3):
        acc += piece
        if u < acc:
            return mass * piece
    return 0.0


def martingale_check(
    t_max: int, n_samples: int, rng: np.random.Generator
) -> list[tuple[int, float, float]]:
    """Monte Carlo check that Z(t)^(beta0 - 1) 1{Z(t) > 0} has mean 1.

    Runs ``n_samples`` independent fragmentation trajectories from
    Z(0) = 1 and returns ``(t, estimate, standard_error)`` for
    t = 1..t_max.  Survival thins by roughly a factor 3 per step, so
    callers should scale ``n_samples`` like 3**t_max * 10**4; ``t_max``
    is capped at 5 because beyond that the surviving-sample count makes
    the estimates meaningless at any sane sample size.
    """
    if not 1 <= t_max <= 5:
        raise ValueError(f"t_max must be in 1..5, got {t_max}")
    if n_samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {n_samples}")
    power = BETA_RANDOM - 1.0
    z = np.ones(n_samples)
    alive = np.ones(n_samples, dtype=bool)
    results: list[tuple[int, float, float]] = []
    for t in range(1, t_max + 1):
        count = int(alive.sum())
        if count:
            g = rng.standard_normal((count, 3))
            g *= g
            y = g / g.sum(axis=1, keepdims=True)
            g = rng.standard_normal((count, 3))
            g *= g
            y *= g / g.sum(axis=1, keepdims=True)  # now the split masses l_i
            edges = np.cumsum(y, axis=1)
            u = rng.random(count)
            take = u[:, None] < edges
            first = np.argmax(take, axis=1)
            factor = np.where(
                take.any(axis=1), y[np.arange(count), first], 0.0
            )
            z[alive] *= factor
            alive[alive] = factor > 0.0
        values = np.zeros(n_samples)
        values[alive] = z[alive] ** power
        estimate = float(values.mean())
        std_error = float(values.std(ddof=1) / math.sqrt(n_samples))
        results.append((t, estimate, std_error))
    return results


# --------------------------------------------------------------------------
# hypergeometric overlaps
# --------------------------------------------------------------------------


def _check_hyper_args(a: int, a_prime: int, m: int) -> None:
    if m < 0:
        raise ValueError(f"population size must be nonnegative, got {m}")
    if not (0 <= a <= m and 0 <= a_prime <= m):
        raise ValueError(f"need 0 <= a, a' <= m, got a={a}, a'={a_prime}, m={m}")


def hypergeometric_pmf(a: int, a_prime: int, m: int, j: int) -> Fraction:
    """P(overlap = j) for independent uniform a- and a'-subsets of [m].

    Equals C(a, j) C(m - a, a' - j) / C(m, a') inside the support
    max(0, a + a' - m) <= j <= min(a, a'), and 0 outside it.
    """
    _check_hyper_args(a, a_prime, m)
    if j < max(0, a + a_prime - m) or j > min(a, a_prime):
        return Fraction(0)
    return Fraction(
        math.comb(a, j) * math.comb(m - a, a_prime - j), math.comb(m, a_prime)
    )


def hypergeometric_mean(a: int, a_prime: int, m: int) -> Fraction:
    """Exact mean a*a'/m of the overlap count (0 for an empty population)."""
    _check_hyper_args(a, a_prime, m)
    if m == 0:
        return Fraction(0)
    return Fraction(a * a_prime, m)


def hypergeometric_variance(a: int, a_prime: int, m: int) -> Fraction:
    """Exact variance a*a'*(m-a)*(m-a')/(m^2*(m-1)) of the overlap count."""
    _check_hyper_args(a, a_prime, m)
    if m <= 1:
        return Fraction(0)
    return Fraction(a * a_prime * (m - a) * (m - a_prime), m * m * (m - 1))


def sample_hypergeometric(a: int, a_prime: int, m: int, rng: np.random.Generator) -> int:
    """Draw the overlap of independent uniform a- and a'-subsets of [m]."""
    _check_hyper_args(a, a_prime, m)
    if a == 0 or a_prime == 0:
        return 0
    return int(rng.hypergeometric(a, m - a, a_prime))


# --------------------------------------------------------------------------
# the tagged-leaf size chain
# --------------------------------------------------------------------------


def chain_step(m: int, rng: np.random.Generator) -> int:
    """One transition of the tagged-leaf size chain from value ``m``.

    The chain tracks how many common labels share a piece with one tagged
    label when a pair of trees is split step by step.  A step from ``m``
    mirrors the two-sided split mechanics exactly:

    * each side relabels one uniform label, killing the tagged one with
      probability 1/m per side;
    * each side scatters its remaining ``m - 1`` labels into three
      branches with sizes drawn from :func:`branch_size_pmf`, and the
      tagged label lands in branch ``i`` with probability ``a_i/(m-1)``;
      it survives only if both sides put it in the same-numbered branch;
    * the surviving common count is 1 plus a hypergeometric overlap of
      the two branches' other labels over the pool that excludes the
      relabeled ones.  The two sides relabel the same companion with
      probability 1/(m-1) (pool m-2); otherwise each side's branch may
      contain the label the *other* side relabeled, which must be
      discounted before intersecting over the m-3 remaining labels.

    The last discount matters: folding the relabeling loss into a single
    up-front factor double-counts it and visibly skews the law.  This
    form reproduces the exact transition law of the construction (the
    agreement is pinned down by a chi-square test against
    ``track_leaf_sizes``).
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if rng.random() < 1.0 / m:  # this side relabeled the tagged leaf
        return 0
    if rng.random() < 1.0 / m:  # the other side did
        return 0
    # m == 1 never reaches here: the relabel probability above is 1.
    a = sample_branch_sizes(m, rng)
    a_prime = sample_branch_sizes(m, rng)
    i = _pick_branch(a, m - 1, rng)
    j = _pick_branch(a_prime, m - 1, rng)
    if i != j:
        return 0
    ai, ai_prime = a[i], a_prime[i]
    if m == 2 or rng.random() < 1.0 / (m - 1):
        # both sides relabeled the same companion label
        return 1 + sample_hypergeometric(ai - 1, ai_prime - 1, m - 2, rng)
    drop = 1 if rng.random() < (ai - 1) / (m - 2) else 0
    drop_prime = 1 if rng.random() < (ai_prime - 1) / (m - 2) else 0
    return 1 + sample_hypergeometric(
        ai - 1 - drop, ai_prime - 1 - drop_prime, m - 3, rng
    )


def _pick_branch(sizes: tuple[int, int, int], total: int, rng: np.random.Generator) -> int:
    """Index of the branch holding the tagged label: P(i) = sizes[i]/total."""
    u = rng.random() * total
    if u < sizes[0]:
        return 0
    if u < sizes[0] + sizes[1]:
        return 1
    return 2


def _stage_zero_size(n: int, rng: np.random.Generator) -> int:
    """Common-label count surviving the initial paired relabeling.

    Each side independently relabels an ordered pair of distinct leaves,
    so a tagged leaf survives with probability ((n-2)/n)**2.  Conditioned
    on survival the two kept sets are independent uniform (n-3)-subsets
    of the other n-1 labels around the tagged one, making the surviving
    common count 1 plus a hypergeometric overlap.
    """
    if rng.random() < 2.0 / n:
        return 0
    if rng.random() < 2.0 / n:
        return 0
    return 1 + sample_hypergeometric(n - 3, n - 3, n - 1, rng)


def run_size_chain(n: int, cutoff: int, rng: np.random.Generator) -> ChainState:
    """Run the tagged-leaf chain from ``n`` until it leaves ``>= cutoff``.

    The first transition is the paired relabeling of the initial trees
    (slightly different from the generic step); afterwards the chain
    applies :func:`chain_step` while the value is at least ``cutoff``.
    The result records whether the chain was absorbed at 0 or entered
    the window ``{1, ..., cutoff - 1}``.
    """
    if cutoff < 2:
        raise ValueError(f"need cutoff >= 2, got {cutoff}")
    if n < cutoff:
        raise ValueError(f"need n >= cutoff, got n={n}, cutoff={cutoff}")
    x = _stage_zero_size(n, rng)
    t = 1
    while x >= cutoff:
        x = chain_step(x, rng)
        t += 1
    return ChainState(
        x=x, t=t, absorbed_zero=(x == 0), entered_window=(x > 0)
    )


def estimate_q(
    n: int, cutoff: int, n_runs: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo estimate of the window-entry probability of the chain.

    Returns ``(q_hat, standard_error)`` where ``q_hat`` is the fraction
    of ``n_runs`` independent chains from ``n`` that enter
    ``{1, ..., cutoff - 1}`` rather than dying at 0 from above.
    """
    if n_runs < 1:
        raise ValueError(f"need at least one run, got {n_runs}")
    hits = 0
    for _ in range(n_runs):
        if run_size_chain(n, cutoff, rng).entered_window:
            hits += 1
    q_hat = hits / n_runs
    std_error = math.sqrt(q_hat * (1.0 - q_hat) / n_runs)
    return q_hat, std_error


# --------------------------------------------------------------------------
# exponent equation for centroid splits
# --------------------------------------------------------------------------
#
# For splits taken at the true centroid of a large uniform tree, the
# normalized branch sizes (largest, middle, smallest) have the density
# phi(x) = (1/(12*pi)) * (x1*x2*x3)**(-3/2) on the part of the simplex
# where every coordinate is below 1/2.  The growth exponent solves
#
#     mu1(beta)^2 + mu2(beta)^2 + mu3(beta)^2 = 1,
#
# where mu_i(beta) is the beta-moment of the i-th ranked coordinate.  The
# integrals below restrict to the ordered wedge x1 >= x2 >= x3 (times 6
# for the orderings of the symmetric density), substitute away the
# x**(-3/2) endpoint singularities, and do the inner x3 integral as an
# exact closed form plus a smooth Gauss-Legendre remainder.  That keeps
# 200-node tensor quadrature accurate to ~1e-10, which a direct masked
# grid over the constrained simplex cannot reach.


@lru_cache(maxsize=8)
def _leggauss(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def centroid_rank_moments(beta: float, nodes: int = 200) -> tuple[float, float, float]:
    """Moments E X_(i)^beta of the ranked centroid branch-size density.

    At ``beta = 0`` each value is the total mass of the density, so all
    three should be 1; that is the standard quadrature sanity check.
    """
    xi, wref = _leggauss(nodes)
    # Outer variable: x1 = (1 - w^2)/2 for w in (0, 1/sqrt(3)) covers
    # x1 in (1/3, 1/2) and absorbs the x3**(-1/2)-type blowup at x1 -> 1/2.
    half = 0.5 / math.sqrt(3.0)
    wn = half * (xi + 1.0)
    ww = half * wref
    x1 = 0.5 * (1.0 - wn * wn)
    s = 1.0 - x1  # x2 + x3 for fixed x1
    a = wn * wn  # lower end of x3: x2 <= x1 forces x3 >= 1 - 2*x1
    b3 = 0.5 * s  # upper end of x3: the wedge edge x2 = x3
    prefactor = ww * wn * x1**-1.5 / (2.0 * math.pi)

    # J1: integral of x2^(-3/2) x3^(-3/2) dx3 over [a, b3], in closed form
    # via the antiderivative (2/s^2) (2*x - s) / sqrt(x*(s - x)).
    j1 = (2.0 / (s * s)) * (s - 2.0 * a) / np.sqrt(a * (s - a))

    # Shared inner grid for the smooth remainders, on sigma = sqrt(x3).
    lo = wn
    hi = np.sqrt(b3)
    mid = 0.5 * (hi + lo)
    rad = 0.5 * (hi - lo)
    sigma = mid[:, None] + rad[:, None] * xi[None, :]
    wsig = rad[:, None] * wref[None, :]
    x3 = sigma * sigma
    ratio = x3 / s[:, None]

    # J2: weight x3^(-3/2) against g(x3) = (s - x3)^(beta - 3/2).  Split
    # off g(0) times the exact integral of the weight; the remainder
    # (g(x3) - g(0))/x3 stays bounded and is written via expm1/log1p so
    # nothing cancels as x3 -> 0.
    c2 = beta - 1.5
    g2_zero = s**c2
    r2 = g2_zero[:, None] * np.expm1(c2 * np.log1p(-ratio)) / x3
    j2 = g2_zero * 2.0 * (1.0 / wn - 1.0 / np.sqrt(b3)) + 2.0 * np.sum(
        r2 * wsig, axis=1
    )

    # J3: weight x3^(beta - 3/2) against g(x3) = (s - x3)^(-3/2); same
    # split.  The head integral is (b3^e - a^e)/e with e = beta - 1/2,
    # which degenerates to log(b3/a) at beta = 1/2.
    e = beta - 0.5
    g3_zero = s**-1.5
    if abs(e) < 1e-9:
        head = g3_zero * np.log(b3 / a)
    else:
        head = g3_zero * (b3**e - a**e) / e
    r3 = g3_zero[:, None] * np.expm1(-1.5 * np.log1p(-ratio)) / x3
    j3 = head + 2.0 * np.sum(sigma ** (2.0 * beta) * r3 * wsig, axis=1)

    mu1 = float(np.sum(prefactor * x1**beta * j1))
    mu2 = float(np.sum(prefactor * j2))
    mu3 = float(np.sum(prefactor * j3))
    return (mu1, mu2, mu3)


def centroid_residual(beta: float, nodes: int = 200) -> float:
    """Residual sum_i mu_i(beta)^2 - 1 whose root is the centroid exponent."""
    mu1, mu2, mu3 = centroid_rank_moments(beta, nodes)
    return mu1 * mu1 + mu2 * mu2 + mu3 * mu3 - 1.0


def solve_beta_centroid(tolerance: float = 1e-6, nodes: int = 200) -> float:
    """Exponent for centroid splits: root of the rank-moment equation.

    Bisects :func:`centroid_residual` over [0.3, 0.5] until the bracket
    is narrower than ``tolerance``.  Raises ``ArithmeticError`` with the
    bracketing residuals if the root is not bracketed or the final
    residual has not converged below 1e-5.
    """
    if tolerance < 1e-6:
        raise ValueError(f"tolerance below 1e-6 is not supported, got {tolerance}")
    lo, hi = 0.3, 0.5
    r_lo = centroid_residual(lo, nodes)
    r_hi = centroid_residual(hi, nodes)
    if not (r_lo > 0.0 > r_hi):
        raise ArithmeticError(
            f"root not bracketed on [{lo}, {hi}]: residuals {r_lo:.6e}, {r_hi:.6e}"
        )
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if centroid_residual(mid, nodes) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    final = centroid_residual(root, nodes)
    if abs(final) >= 1e-5:
        raise ArithmeticError(
            f"bisection did not converge: residual {final:.6e} at {root:.8f}, "
            f"bracket residuals {r_lo:.6e}, {r_hi:.6e}"
        )
    return root
