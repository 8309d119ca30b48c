"""Exact quantities for best-response dynamics on random games.

The hazard and survival formulas describe potential games (p = 1) only; for
0 < p < 1 there is no closed form and nothing here extrapolates to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .brd import max_tau_ne, r_formula
from .game import ParameterError

FACTORIAL_TERMS = 170


def _check_k(*ks):
    for k in ks:
        if int(k) != k or k < 1:
            raise ParameterError(f"action counts must be positive integers, got {k}")


@dataclass
class HazardTable:
    k_a: int
    k_b: int
    q: list

    @property
    def t_max(self) -> int:
        return len(self.q) - 1


@dataclass
class TauDistribution:
    k_a: int
    k_b: int
    survival: list
    pmf: list
    mean: float | Fraction
    variance: float | Fraction


def hazard(k_a: int, k_b: int, exact: bool = False) -> HazardTable:
    """q[t] = P(tau_NE = t | tau_NE >= t) at p = 1, for t = 0 .. max_tau_ne."""
    _check_k(k_a, k_b)
    frac = Fraction if exact else (lambda n, d: n / d)
    if k_a == k_b == 1:
        return HazardTable(1, 1, [frac(1, 1)])
    q = [frac(1, k_a + k_b - 1), frac(k_a - 1, k_a + k_b - 2)]
    for t in range(2, max_tau_ne(k_a, k_b) + 1):
        q.append(frac(r_formula(t - 1, k_a, k_b), r_formula(t, k_a, k_b)))
    return HazardTable(k_a, k_b, q)


def tau_distribution(k_a: int, k_b: int, exact: bool = False) -> TauDistribution:
    table = hazard(k_a, k_b, exact)
    one = Fraction(1) if exact else 1.0
    survival, pmf = [], []
    prev = one
    for q in table.q:
        s = prev * (1 - q)
        survival.append(s)
        pmf.append(prev - s)
        prev = s
    mean = sum(survival[:-1], 0 * one)
    second = sum((t * t * m for t, m in enumerate(pmf)), 0 * one)
    return TauDistribution(k_a, k_b, survival, pmf, mean, second - mean * mean)


def _inv_factorials(n_terms):
    """1/(n+1)! for n = 0 .. n_terms-1, built by division (no overflow)."""
    out, x = [], 1.0
    for n in range(n_terms):
        x /= n + 1
        out.append(x)
    return out


def limit_constants(n_terms: int = FACTORIAL_TERMS) -> dict:
    """Limits of E[tau_NE] and Var[tau_NE] for square potential games.

    In the limit P(tau_NE > s) = 1/(floor(s)+1)!.  The variance is split at the
    mean mu = e - 1 into 2 * int_0^mu Phi and 2 * int_mu^inf int_t^inf of that
    tail, with Phi(t) = int_0^t of the CDF.  Both integrands are constant on
    unit intervals, so each integral is a finite sum over those intervals.
    """
    mu = math.e - 1
    tail = _inv_factorials(n_terms)  # tail[n] on [n, n+1)
    below, above = [], []
    for n, g in enumerate(tail):
        lo, hi = n, n + 1
        if lo < mu:
            # int_lo^min(hi,mu) (mu - s) * (1 - g) ds
            top = min(hi, mu)
            below.append((1 - g) * ((mu - lo) ** 2 - (mu - top) ** 2) / 2)
        if hi > mu:
            # int_max(lo,mu)^hi (s - mu) * g ds
            bot = max(lo, mu)
            above.append(g * ((hi - mu) ** 2 - (bot - mu) ** 2) / 2)
    part_below = 2 * math.fsum(below)
    part_above = 2 * math.fsum(above)
    # dropped intervals n >= N contribute < 2 * sum_{m >= N} 1/m! <= 4/N!
    remainder = 4 * tail[-1]
    return {
        "mean_limit": mu,
        "variance_limit": part_below + part_above,
        "variance_below_mean": part_below,
        "variance_above_mean": part_above,
        "remainder_bound": remainder,
    }


# -- i.i.d. payoffs (p = 0) --------------------------------------------------

def iid_c0(k_a: int, k_b: int) -> Fraction:
    """P(BRD(0) is an equilibrium) with i.i.d. payoffs."""
    _check_k(k_a, k_b)
    return Fraction(1, k_a * k_b)


def iid_c1(k_a: int, k_b: int) -> Fraction:
    """P(BRD(1) is an equilibrium) with i.i.d. payoffs."""
    _check_k(k_a, k_b)
    return Fraction(1, k_b)


def iid_convergence_bound(k_a: int, k_b: int, t: int) -> float:
    """Upper bound on P(BRD(t) is an equilibrium) for odd ``t`` at p = 0."""
    _check_k(k_a, k_b)
    if t < 1 or t % 2 == 0:
        raise ParameterError(f"bound holds for odd t >= 1, got {t}")
    k = min(k_a, k_b)
    s = math.fsum(math.exp(-j * j / (4 * k)) for j in range(1, t - 2, 2))
    return 1 / k + 2 / k * s


# -- order statistics of uniforms --------------------------------------------

def _check_unit(x):
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"x must lie in [0, 1], got {x}")


def beta_max_cdf(k: int, x: float) -> float:
    """CDF of the maximum of ``k`` i.i.d. uniforms, i.e. Beta(k, 1)."""
    _check_k(k)
    _check_unit(x)
    return x**k


def beta_compare(a: int, b: int) -> float:
    """P(Beta(a, 1) > Beta(b, 1)) for independent variables."""
    _check_k(a, b)
    return a / (a + b)


def dominance_cdf(k: int, x: float) -> float:
    """P(X_1 <= x | X_1 is not the largest of k i.i.d. uniforms).

    For k = 1 the conditioning event is empty; the unconditional CDF is returned.
    """
    _check_k(k)
    _check_unit(x)
    if k == 1:
        return x
    p_max = 1 / k
    return (x - x**k * p_max) / (1 - p_max)
