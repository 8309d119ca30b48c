"""Best-response dynamics from the profile (1, 1).

Player A moves at even times along the current column, player B at odd times
along the current row.  The run stops at the first revisit of a profile: a
repeat of the previous profile is a pure Nash equilibrium, any other repeat
closes a trap cycle.  The only exception is t = 1, where A staying put at
(1, 1) says nothing about B yet.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .game import DenseGame, LazyGame, ParameterError

INF = math.inf


class Mover(str, Enum):
    NONE = "None"
    A = "A"
    B = "B"


@dataclass(frozen=True)
class BrdStep:
    t: int
    profile: tuple[int, int]
    mover: Mover
    moved: bool


@dataclass(frozen=True)
class ConvergedToPne:
    profile: tuple[int, int]
    tau_ne: int


@dataclass(frozen=True)
class Trapped:
    cycle: tuple[tuple[int, int], ...]
    tau_cycle: int


@dataclass
class BrdTrace:
    k_a: int
    k_b: int
    steps: list[BrdStep]
    outcome: ConvergedToPne | Trapped
    revealed_counts: list[int] = field(default_factory=list)
    reveals_total: int = 0

    @property
    def profiles(self) -> list[tuple[int, int]]:
        return [s.profile for s in self.steps]

    @property
    def final_t(self) -> int:
        return self.steps[-1].t

    @property
    def converged(self) -> bool:
        return isinstance(self.outcome, ConvergedToPne)


def max_tau_ne(k_a: int, k_b: int) -> int:
    """Latest time at which BRD can first sit on an equilibrium.

    Columns are explored first, so rows run out one step later than columns
    when ``k_a < k_b``.
    """
    if k_a == k_b == 1:
        return 0
    return 2 * k_b - 1 if k_a >= k_b else 2 * k_a


def max_final_t(k_a: int, k_b: int) -> int:
    return max_tau_ne(k_a, k_b) + 2


def r_formula(t: int, k_a: int, k_b: int) -> int:
    """Size of the revealed set at time ``t`` while no row or column repeats."""
    if t < 1:
        raise ParameterError(f"r_formula needs t >= 1, got {t}")
    cols = (t + 2) // 2  # ceil((t + 1) / 2)
    rows = (t + 1) // 2
    return cols * k_a + rows * k_b - rows * cols


def _argmax_first(values) -> int:
    return int(np.argmax(values)) + 1


def run_brd(game: DenseGame | LazyGame) -> BrdTrace:
    lazy = isinstance(game, LazyGame)
    k_a, k_b = game.params.k_a, game.params.k_b
    if lazy:
        column, row = game.reveal_column_a, game.reveal_row_b
    else:
        column, row = game.column_a, game.row_b

    steps = [BrdStep(0, (1, 1), Mover.NONE, False)]
    first_visit = {(1, 1): 0}
    counts = []
    rows_seen, cols_seen = set(), set()
    t = 0
    while True:
        a, b = steps[t].profile
        if t % 2 == 0:
            cols_seen.add(b)
            nxt, mover = (_argmax_first(column(b)), b), Mover.A
        else:
            rows_seen.add(a)
            nxt, mover = (a, _argmax_first(row(a))), Mover.B
        counts.append(len(cols_seen) * k_a + len(rows_seen) * k_b - len(cols_seen) * len(rows_seen))
        moved = nxt != (a, b)
        t += 1
        steps.append(BrdStep(t, nxt, mover, moved))
        if not moved:
            if t == 1:
                continue
            outcome = ConvergedToPne(nxt, first_visit[nxt])
            break
        if nxt in first_visit:
            start = first_visit[nxt]
            if start == 0 and steps[1].profile == (1, 1):
                start = 1
            cycle = tuple(s.profile for s in steps[start:t])
            outcome = Trapped(cycle, _tau_cycle([s.profile for s in steps]))
            break
        first_visit[nxt] = t

    return BrdTrace(k_a, k_b, steps, outcome, counts, counts[-1])


def _revealed_lines(profiles, t):
    """Rows and columns making up R(t)."""
    if t == 0:
        return set(), {1}
    rows = {p[0] for p in profiles[1:t + 1]}
    cols = {p[1] for p in profiles[1:t + 1]}
    return rows, cols


def _in_revealed(profiles, t, prof) -> bool:
    rows, cols = _revealed_lines(profiles, t)
    return prof[0] in rows or prof[1] in cols


def _tau_r(profiles) -> int | float:
    for t in range(2, len(profiles)):
        if _in_revealed(profiles, t - 2, profiles[t]):
            return t
    return INF


def _tau_cycle(profiles) -> int | float:
    for t in range(4, len(profiles)):
        if profiles[t] != profiles[t - 1] and _in_revealed(profiles, t - 2, profiles[t]):
            return t
    return INF


def revealed_set_size(trace: BrdTrace, t: int) -> int:
    """|R(t)|, counted from the rows and columns the trajectory occupied."""
    if not 0 <= t <= trace.final_t:
        raise ParameterError(f"t={t} outside the trace (0..{trace.final_t})")
    rows, cols = _revealed_lines(trace.profiles, t)
    return len(rows) * trace.k_b + len(cols) * trace.k_a - len(rows) * len(cols)


@dataclass(frozen=True)
class StoppingTimes:
    tau_ne: int | float
    tau_r: int | float
    tau_cycle: int | float


def classify_outcome(trace: BrdTrace) -> StoppingTimes:
    profiles = trace.profiles
    tau_r = _tau_r(profiles)
    tau_cycle = _tau_cycle(profiles)
    if isinstance(trace.outcome, ConvergedToPne):
        tau_ne = trace.outcome.tau_ne
        # tau_r == 2 leaves tau_ne at 0 or 1 depending on whether A stayed at t = 1
        assert tau_ne == tau_r - 1 if tau_r > 2 else tau_ne in (0, 1)
        assert tau_cycle == INF
        return StoppingTimes(tau_ne, tau_r, INF)
    assert tau_cycle == tau_r < INF
    return StoppingTimes(INF, tau_r, tau_cycle)


# -- export -------------------------------------------------------------------

def _json_time(x):
    return None if x == INF else int(x)


def outcome_summary(trace: BrdTrace) -> dict:
    st = classify_outcome(trace)
    out = {
        "outcome": "ConvergedToPne" if trace.converged else "Trapped",
        "tau_ne": _json_time(st.tau_ne),
        "tau_r": _json_time(st.tau_r),
        "tau_cycle": _json_time(st.tau_cycle),
        "reveals_total": trace.reveals_total,
    }
    if trace.converged:
        out["profile"] = list(trace.outcome.profile)
    else:
        out["cycle"] = [list(p) for p in trace.outcome.cycle]
    return out


def trace_jsonl(trace: BrdTrace) -> str:
    lines = [
        json.dumps({"t": s.t, "a": s.profile[0], "b": s.profile[1],
                    "mover": s.mover.value, "moved": s.moved})
        for s in trace.steps
    ]
    return "\n".join(lines) + "\n"
