"""Pure Nash equilibria of dense games and the exact expected count."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import DenseGame, GameParams, LazyGame, ParameterError, densify


@dataclass
class PneReport:
    equilibria: list[tuple[int, int]]
    params: GameParams

    @property
    def count(self) -> int:
        return len(self.equilibria)

    def to_dict(self) -> dict:
        return {"count": self.count, "equilibria": [list(e) for e in self.equilibria]}


def is_pne(game: DenseGame, profile: tuple[int, int]) -> bool:
    a, b = profile
    u_a, u_b = game.payoff(a, b)
    return bool(np.all(game.column_a(b) <= u_a) and np.all(game.row_b(a) <= u_b))


def enumerate_pne_scan(game: DenseGame) -> list[tuple[int, int]]:
    """Exhaustive check of every profile against every unilateral deviation."""
    k_a, k_b = game.shape
    return [(a, b) for a in range(1, k_a + 1) for b in range(1, k_b + 1) if is_pne(game, (a, b))]


def enumerate_pne_markers(game: DenseGame) -> list[tuple[int, int]]:
    """Intersection of A's column-best markers with B's row-best markers."""
    best_a = game.pay_a == game.pay_a.max(axis=0, keepdims=True)
    best_b = game.pay_b == game.pay_b.max(axis=1, keepdims=True)
    a, b = np.nonzero(best_a & best_b)
    return [(int(i) + 1, int(j) + 1) for i, j in zip(a, b)]


def enumerate_pne(game: DenseGame | LazyGame) -> PneReport:
    if isinstance(game, LazyGame):
        game = densify(game)
    return PneReport(enumerate_pne_markers(game), game.params)


def _check(params: GameParams) -> None:
    if not isinstance(params, GameParams):
        raise ParameterError("expected GameParams")


def pne_probability_at_profile(params: GameParams, exact: bool = False):
    """P(a fixed profile is a PNE) = p/(K^A+K^B-1) + (1-p)/(K^A K^B)."""
    _check(params)
    p = Fraction(params.p) if exact else params.p
    k_a, k_b = params.k_a, params.k_b
    if exact:
        return p * Fraction(1, k_a + k_b - 1) + (1 - p) * Fraction(1, k_a * k_b)
    return p / (k_a + k_b - 1) + (1 - p) / (k_a * k_b)


def expected_pne(params: GameParams, exact: bool = False):
    """E[W] = p K^A K^B / (K^A+K^B-1) + (1-p).

    With ``exact=True`` the result is a Fraction (``p`` taken at its binary value).
    """
    _check(params)
    k_a, k_b = params.k_a, params.k_b
    if exact:
        p = Fraction(params.p)
        value = p * Fraction(k_a * k_b, k_a + k_b - 1) + (1 - p)
        assert value == k_a * k_b * pne_probability_at_profile(params, exact=True)
        return value
    p = params.p
    return p * k_a * k_b / (k_a + k_b - 1) + (1 - p)
