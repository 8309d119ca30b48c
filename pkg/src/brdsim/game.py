"""Random two-player games with correlation parameter ``p``.

Payoffs are Uniform[0, 1].  For each profile, with probability ``p`` player B's
payoff is overwritten by player A's, otherwise the two are independent.  At
``p = 0`` the game has i.i.d. payoffs; at ``p = 1`` it is a common-interest
(hence potential) game.

Actions are 1-based throughout.
"""

from __future__ import annotations

import csv
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng

MAX_DENSE_ENTRIES = 10**8
MAX_SEED = rng.MASK64


class ParameterError(ValueError):
    """Invalid game parameters, profiles or sizes."""


@dataclass(frozen=True)
class GameParams:
    k_a: int
    k_b: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if int(self.k_a) != self.k_a or int(self.k_b) != self.k_b:
            raise ParameterError("action counts must be integers")
        if self.k_a < 1 or self.k_b < 1:
            raise ParameterError(f"action counts must be >= 1, got ({self.k_a}, {self.k_b})")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ParameterError("seed must be a 64-bit unsigned integer")

    @property
    def k_min(self) -> int:
        return min(self.k_a, self.k_b)

    def to_dict(self) -> dict:
        return {"k_a": self.k_a, "k_b": self.k_b, "p": self.p, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "GameParams":
        return cls(int(d["k_a"]), int(d["k_b"]), float(d["p"]), int(d["seed"]))


def check_memory(params: GameParams, limit: int = MAX_DENSE_ENTRIES) -> None:
    if params.k_a * params.k_b > limit:
        raise ParameterError(
            f"dense game of {params.k_a}x{params.k_b} exceeds the {limit}-entry memory guard"
        )


@dataclass(eq=False)
class DenseGame:
    """Materialized payoff bimatrix; ``pay_a[a-1, b-1]`` is U^A(a, b)."""

    params: GameParams
    pay_a: np.ndarray
    pay_b: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.pay_a.shape

    def payoff(self, a: int, b: int) -> tuple[float, float]:
        _check_profile(self.params, a, b)
        return float(self.pay_a[a - 1, b - 1]), float(self.pay_b[a - 1, b - 1])

    def column_a(self, b: int) -> np.ndarray:
        """Player A's payoffs against action ``b``."""
        return self.pay_a[:, b - 1]

    def row_b(self, a: int) -> np.ndarray:
        """Player B's payoffs against action ``a``."""
        return self.pay_b[a - 1, :]

    def __eq__(self, other):
        if not isinstance(other, DenseGame):
            return NotImplemented
        return (
            self.params == other.params
            and np.array_equal(self.pay_a, other.pay_a)
            and np.array_equal(self.pay_b, other.pay_b)
        )


def _check_profile(params: GameParams, a: int, b: int) -> None:
    if not (1 <= a <= params.k_a and 1 <= b <= params.k_b):
        raise ParameterError(
            f"profile ({a}, {b}) outside [1, {params.k_a}] x [1, {params.k_b}]"
        )


def _profile_values(params: GameParams, a, b, with_coupling=False):
    """Vectorized payoff pair for index arrays ``a``, ``b`` (1-based)."""
    key = rng.derive_key_np(params.seed, a, b)
    u_a = rng.to_unit_np(rng.stream_bits_np(key, rng.STREAM_UA))
    coin = rng.to_unit_np(rng.stream_bits_np(key, rng.STREAM_COIN))
    u_b = rng.to_unit_np(rng.stream_bits_np(key, rng.STREAM_UB))
    coupled = coin < params.p
    if with_coupling:
        return u_a, np.where(coupled, u_a, u_b), coupled
    return u_a, np.where(coupled, u_a, u_b)


def profile_value(params: GameParams, a: int, b: int) -> tuple[float, float]:
    key = rng.derive_key(params.seed, a, b)
    u_a = rng.to_unit(rng.stream_bits(key, rng.STREAM_UA))
    coin = rng.to_unit(rng.stream_bits(key, rng.STREAM_COIN))
    if coin < params.p:
        return u_a, u_a
    return u_a, rng.to_unit(rng.stream_bits(key, rng.STREAM_UB))


def _raw_dense(params: GameParams, with_coupling=False):
    a = np.arange(1, params.k_a + 1, dtype=np.uint64)[:, None]
    b = np.arange(1, params.k_b + 1, dtype=np.uint64)[None, :]
    return _profile_values(params, a, b, with_coupling)


def _resolve_ties(params, pay_a, pay_b, coupled) -> None:
    """Redraw tied entries in place until every player's comparison set is distinct.

    A compares within columns of ``pay_a`` and B within rows of ``pay_b``; the
    later entry of a tied pair gets a value from a fresh redraw stream.  A
    coupled profile (u_a == u_b by the coin toss) keeps both payoffs equal.
    """
    for j in range(64):
        dirty = False
        for mat, axis, stream in ((pay_a, 0, rng.STREAM_REDRAW + 2 * j),
                                  (pay_b, 1, rng.STREAM_REDRAW + 2 * j + 1)):
            lines = mat if axis == 1 else mat.T
            order = np.argsort(lines, axis=1, kind="stable")
            srt = np.take_along_axis(lines, order, axis=1)
            tied = np.zeros_like(lines, dtype=bool)
            np.put_along_axis(tied, order[:, 1:], srt[:, 1:] == srt[:, :-1], axis=1)
            if not tied.any():
                continue
            dirty = True
            li, pos = np.nonzero(tied)
            for i, k in zip(li.tolist(), pos.tolist()):
                a, b = (i + 1, k + 1) if axis == 1 else (k + 1, i + 1)
                v = rng.draw(params.seed, a, b, stream)
                mat[a - 1, b - 1] = v
                if coupled[a - 1, b - 1]:
                    pay_a[a - 1, b - 1] = pay_b[a - 1, b - 1] = v
        if not dirty:
            return
    raise RuntimeError("could not resolve payoff ties")  # pragma: no cover


def generate_dense(params: GameParams) -> DenseGame:
    """Materialize the whole bimatrix for ``params``.

    Within-player ties (probability ~2^-53 per pair) are removed by redrawing.
    """
    check_memory(params)
    pay_a, pay_b, coupled = _raw_dense(params, with_coupling=True)
    pay_a = np.ascontiguousarray(pay_a)
    pay_b = np.ascontiguousarray(pay_b)
    _resolve_ties(params, pay_a, pay_b, coupled)
    return DenseGame(params, pay_a, pay_b)


@dataclass(eq=False)
class LazyGame:
    """Payoff oracle that draws a profile only when it is first revealed.

    Values are a pure function of ``(params, profile)`` so the reveal order never
    matters.  ``revealed`` keeps every pair handed out so far.
    """

    params: GameParams
    revealed: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def reveal(self, a: int, b: int) -> tuple[float, float]:
        _check_profile(self.params, a, b)
        hit = self.revealed.get((a, b))
        if hit is not None:
            return hit
        pair = profile_value(self.params, a, b)
        with self._lock:
            # deterministic values: a concurrent writer stores the same pair
            self.revealed[(a, b)] = pair
        return pair

    def reveal_column_a(self, b: int) -> np.ndarray:
        """Reveal column ``b`` and return player A's payoffs along it."""
        _check_profile(self.params, 1, b)
        a = np.arange(1, self.params.k_a + 1, dtype=np.uint64)
        u_a, u_b = _profile_values(self.params, a, np.uint64(b))
        self._store(((i, b) for i in range(1, self.params.k_a + 1)), u_a, u_b)
        return u_a

    def reveal_row_b(self, a: int) -> np.ndarray:
        """Reveal row ``a`` and return player B's payoffs along it."""
        _check_profile(self.params, a, 1)
        b = np.arange(1, self.params.k_b + 1, dtype=np.uint64)
        u_a, u_b = _profile_values(self.params, np.uint64(a), b)
        self._store(((a, j) for j in range(1, self.params.k_b + 1)), u_a, u_b)
        return u_b

    def _store(self, profiles, u_a, u_b):
        with self._lock:
            for prof, x, y in zip(profiles, u_a.tolist(), u_b.tolist()):
                self.revealed.setdefault(prof, (x, y))

    @property
    def n_revealed(self) -> int:
        return len(self.revealed)


def reveal(game: LazyGame, profile: tuple[int, int]) -> tuple[float, float]:
    return game.reveal(*profile)


def densify(game: LazyGame) -> DenseGame:
    """Reveal every profile of ``game`` and return the materialized bimatrix."""
    check_memory(game.params)
    pay_a, pay_b = _raw_dense(game.params)
    for (a, b), (x, y) in list(game.revealed.items()):
        pay_a[a - 1, b - 1] = x
        pay_b[a - 1, b - 1] = y
    with game._lock:
        for a in range(1, game.params.k_a + 1):
            for b in range(1, game.params.k_b + 1):
                game.revealed.setdefault(
                    (a, b), (float(pay_a[a - 1, b - 1]), float(pay_b[a - 1, b - 1]))
                )
    return DenseGame(game.params, np.ascontiguousarray(pay_a), np.ascontiguousarray(pay_b))


# -- serialization ------------------------------------------------------------

def save_params(params: GameParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict()) + "\n")


def load_params(path) -> GameParams:
    return GameParams.from_dict(json.loads(Path(path).read_text()))


def write_dense_csv(game: DenseGame, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["a", "b", "u_a", "u_b"])
    k_a, k_b = game.shape
    for a in range(k_a):
        for b in range(k_b):
            w.writerow([a + 1, b + 1, repr(float(game.pay_a[a, b])), repr(float(game.pay_b[a, b]))])


def save_dense(game: DenseGame, stem) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (payoffs, row-major) and ``<stem>.json`` (params)."""
    stem = Path(stem)
    if stem.suffix in (".csv", ".json"):
        stem = stem.with_suffix("")
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    with open(csv_path, "w", newline="") as fh:
        write_dense_csv(game, fh)
    save_params(game.params, json_path)
    return csv_path, json_path


def game_to_json(game: DenseGame) -> dict:
    return {"params": game.params.to_dict(), "pay_a": game.pay_a.tolist(), "pay_b": game.pay_b.tolist()}


def load_dense(stem) -> DenseGame:
    """Read a game saved by ``save_dense`` or a single JSON from ``game_to_json``."""
    stem = Path(stem)
    if stem.suffix in (".csv", ".json"):
        stem = stem.with_suffix("")
    meta = json.loads(stem.with_suffix(".json").read_text())
    if "pay_a" in meta:
        params = GameParams.from_dict(meta["params"])
        pay_a, pay_b = np.array(meta["pay_a"], dtype=float), np.array(meta["pay_b"], dtype=float)
        if pay_a.shape != (params.k_a, params.k_b) or pay_b.shape != pay_a.shape:
            raise ParameterError(f"{stem}.json payoff shape does not match its parameters")
        return DenseGame(params, pay_a, pay_b)
    params = GameParams.from_dict(meta)
    pay_a = np.full((params.k_a, params.k_b), np.nan)
    pay_b = np.full((params.k_a, params.k_b), np.nan)
    with open(stem.with_suffix(".csv"), newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            a, b = int(row["a"]), int(row["b"])
            _check_profile(params, a, b)
            pay_a[a - 1, b - 1] = float(row["u_a"])
            pay_b[a - 1, b - 1] = float(row["u_b"])
    if np.isnan(pay_a).any() or np.isnan(pay_b).any():
        raise ParameterError(f"{stem}.csv does not cover every profile")
    return DenseGame(params, pay_a, pay_b)
