"""Monte Carlo experiments over grids of (k_a, k_b, p).

Trial ``i`` at grid point ``g`` uses the seed ``derive_key(base_seed, g, i)``,
so results do not depend on chunking or on how many worker threads run.
Per-point statistics are integer counters merged by addition; the merge is
associative and commutative.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import _backend
from .exact import tau_distribution
from .game import GameParams, ParameterError, check_memory

log = logging.getLogger(__name__)

METRICS = frozenset({"pne_count", "tau_ne", "converged", "tau_cycle", "reveals_total"})
BRD_METRICS = METRICS - {"pne_count"}
CHUNK = 4096
Z = 3.0  # every confidence radius is 3 sigma


@dataclass
class ExperimentSpec:
    grid: list[tuple[int, int, float]]
    trials: int
    base_seed: int = 0
    metrics: frozenset = frozenset({"converged", "tau_ne"})
    retain_traces: bool = False

    def __post_init__(self):
        self.grid = [(int(k_a), int(k_b), float(p)) for k_a, k_b, p in self.grid]
        self.metrics = frozenset(self.metrics)
        if not self.grid:
            raise ParameterError("experiment grid is empty")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials}")
        unknown = self.metrics - METRICS
        if unknown or not self.metrics:
            raise ParameterError(f"metrics must be a non-empty subset of {sorted(METRICS)}")
        for k_a, k_b, p in self.grid:
            GameParams(k_a, k_b, p, self.base_seed)  # validates ranges

    @property
    def dense(self) -> bool:
        return "pne_count" in self.metrics

    @property
    def runs_brd(self) -> bool:
        return bool(self.metrics & BRD_METRICS)

    def to_dict(self) -> dict:
        return {
            "grid": [list(g) for g in self.grid],
            "trials": self.trials,
            "base_seed": self.base_seed,
            "metrics": sorted(self.metrics),
            "retain_traces": self.retain_traces,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        grid = []
        for g in d["grid"]:
            if isinstance(g, dict):
                grid.append((g["k_a"], g["k_b"], g["p"]))
            else:
                grid.append(tuple(g))
        return cls(
            grid=grid,
            trials=int(d["trials"]),
            base_seed=int(d.get("base_seed", 0)),
            metrics=frozenset(d.get("metrics", ("converged", "tau_ne"))),
            retain_traces=bool(d.get("retain_traces", False)),
        )


def load_spec(path) -> ExperimentSpec:
    """Read an ExperimentSpec from a ``.json`` or ``.toml`` file."""
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    elif path.suffix == ".json":
        data = json.loads(path.read_text())
    else:
        raise ParameterError(f"spec file must be .json or .toml, got {path.name}")
    return ExperimentSpec.from_dict(data)


def _hist_add(a: dict, b: dict) -> dict:
    out = Counter(a)
    out.update(b)
    return dict(sorted(out.items()))


@dataclass
class PointStats:
    """Counters for one grid point; every estimate is derived from them."""

    k_a: int
    k_b: int
    p: float
    n_trials: int = 0
    n_converged: int = 0
    n_trapped: int = 0
    tau_ne_hist: dict = field(default_factory=dict)
    tau_cycle_hist: dict = field(default_factory=dict)
    w_hist: dict = field(default_factory=dict)
    reveals_sum: int = 0
    reveals_max: int = 0
    brd: bool = False
    dense: bool = False
    records: dict | None = None
    runtime: float = field(default=0.0, compare=False)

    def merge(self, other: "PointStats") -> "PointStats":
        if (self.k_a, self.k_b, self.p) != (other.k_a, other.k_b, other.p):
            raise ParameterError("cannot merge statistics of different grid points")
        records = None
        if self.records is not None or other.records is not None:
            mine, theirs = self.records or {}, other.records or {}
            keys = set(mine) | set(theirs)
            records = {k: np.concatenate([mine.get(k, []), theirs.get(k, [])]).astype(np.int64) for k in keys}
        return PointStats(
            self.k_a, self.k_b, self.p,
            n_trials=self.n_trials + other.n_trials,
            n_converged=self.n_converged + other.n_converged,
            n_trapped=self.n_trapped + other.n_trapped,
            tau_ne_hist=_hist_add(self.tau_ne_hist, other.tau_ne_hist),
            tau_cycle_hist=_hist_add(self.tau_cycle_hist, other.tau_cycle_hist),
            w_hist=_hist_add(self.w_hist, other.w_hist),
            reveals_sum=self.reveals_sum + other.reveals_sum,
            reveals_max=max(self.reveals_max, other.reveals_max),
            brd=self.brd or other.brd,
            dense=self.dense or other.dense,
            records=records,
            runtime=self.runtime + other.runtime,
        )

    @property
    def k_min(self) -> int:
        return min(self.k_a, self.k_b)

    # -- BRD estimates --

    @property
    def converged_fraction(self) -> float | None:
        return self.n_converged / self.n_trials if self.brd else None

    @property
    def trapped_fraction(self) -> float | None:
        return self.n_trapped / self.n_trials if self.brd else None

    @property
    def converged_ci(self) -> float | None:
        f = self.converged_fraction
        return None if f is None else Z * math.sqrt(f * (1 - f) / self.n_trials)

    def _moments(self, hist):
        n = sum(hist.values())
        if n == 0:
            return None, None
        s1 = sum(t * c for t, c in hist.items())
        s2 = sum(t * t * c for t, c in hist.items())
        mean = s1 / n
        var = (s2 - s1 * s1 / n) / (n - 1) if n > 1 else 0.0
        return mean, var

    @property
    def tau_ne_mean(self):
        return self._moments(self.tau_ne_hist)[0]

    @property
    def tau_ne_var(self):
        return self._moments(self.tau_ne_hist)[1]

    def tail(self, ell: float) -> float:
        """Empirical P(tau_NE > ell); traps count as tau_NE = infinity."""
        at_most = sum(c for t, c in self.tau_ne_hist.items() if t <= ell)
        return (self.n_trials - at_most) / self.n_trials

    @property
    def reveals_mean(self) -> float | None:
        return self.reveals_sum / self.n_trials if self.brd else None

    # -- equilibrium-count estimates --

    @property
    def w_mean(self) -> float | None:
        if not self.dense:
            return None
        return sum(w * c for w, c in self.w_hist.items()) / self.n_trials

    @property
    def w_var(self) -> float | None:
        return self._moments(self.w_hist)[1] if self.dense else None

    @property
    def w_ci(self) -> float | None:
        v = self.w_var
        return None if v is None else Z * math.sqrt(v / self.n_trials)

    @property
    def w_median_over_kmin(self) -> float | None:
        if not self.dense:
            return None
        n = self.n_trials
        lo_rank, hi_rank = (n - 1) // 2, n // 2
        lo = hi = None
        seen = 0
        for w, c in sorted(self.w_hist.items()):
            if lo is None and seen + c > lo_rank:
                lo = w
            if seen + c > hi_rank:
                hi = w
                break
            seen += c
        return (lo + hi) / 2 / self.k_min

    def to_dict(self) -> dict:
        out = {
            "k_a": self.k_a, "k_b": self.k_b, "p": self.p,
            "n_trials": self.n_trials,
            "runtime_s": round(self.runtime, 6),
        }
        if self.brd:
            out.update({
                "converged_fraction": self.converged_fraction,
                "converged_ci": self.converged_ci,
                "trapped_fraction": self.trapped_fraction,
                "tau_ne_mean": self.tau_ne_mean,
                "tau_ne_var": self.tau_ne_var,
                "tau_ne_hist": {str(k): v for k, v in self.tau_ne_hist.items()},
                "tau_cycle_hist": {str(k): v for k, v in self.tau_cycle_hist.items()},
                "reveals_mean": self.reveals_mean,
                "reveals_max": self.reveals_max,
            })
        if self.dense:
            out.update({
                "w_mean": self.w_mean,
                "w_ci": self.w_ci,
                "w_median_over_kmin": self.w_median_over_kmin,
                "w_hist": {str(k): v for k, v in self.w_hist.items()},
            })
        return out


@dataclass
class SummaryStats:
    spec: ExperimentSpec
    points: list[PointStats]
    backend: str = field(default=_backend.NAME, compare=False)
    runtime: float = field(default=0.0, compare=False)

    def __getitem__(self, i: int) -> PointStats:
        return self.points[i]

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "backend": self.backend,
            "runtime_s": round(self.runtime, 6),
            "points": [pt.to_dict() for pt in self.points],
        }

    def csv_rows(self) -> list[dict]:
        """One row per grid point per metric."""
        rows = []
        for g, pt in enumerate(self.points):
            base = {"grid_index": g, "k_a": pt.k_a, "k_b": pt.k_b, "p": pt.p, "n_trials": pt.n_trials}
            values = []
            if pt.brd:
                values += [
                    ("converged_fraction", pt.converged_fraction, pt.converged_ci),
                    ("trapped_fraction", pt.trapped_fraction, pt.converged_ci),
                    ("tau_ne_mean", pt.tau_ne_mean, None),
                    ("tau_ne_var", pt.tau_ne_var, None),
                    ("reveals_mean", pt.reveals_mean, None),
                ]
            if pt.dense:
                values += [
                    ("w_mean", pt.w_mean, pt.w_ci),
                    ("w_median_over_kmin", pt.w_median_over_kmin, None),
                ]
            for name, est, ci in values:
                rows.append({**base, "metric": name, "estimate": est, "ci_radius": ci})
        return rows

    def write(self, stem) -> tuple[Path, Path]:
        """Write ``<stem>.csv`` and ``<stem>.json``."""
        stem = Path(stem)
        if stem.suffix in (".csv", ".json"):
            stem = stem.with_suffix("")
        stem.parent.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
        fields = ["grid_index", "k_a", "k_b", "p", "n_trials", "metric", "estimate", "ci_radius"]
        with open(csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for row in self.csv_rows():
                w.writerow({k: ("" if v is None else v) for k, v in row.items()})
        json_path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return csv_path, json_path


# -- running ------------------------------------------------------------------

def _r_formula_vec(t, k_a, k_b):
    cols = (t + 2) // 2
    rows = (t + 1) // 2
    return cols * k_a + rows * k_b - rows * cols


def _run_chunk(spec: ExperimentSpec, g: int, start: int, n: int) -> PointStats:
    k_a, k_b, p = spec.grid[g]
    t0 = time.perf_counter()
    seeds = _backend.derive_seeds(spec.base_seed, g, start, n)
    pt = PointStats(k_a, k_b, p, n_trials=n, brd=spec.runs_brd, dense=spec.dense)
    records = {} if spec.retain_traces else None
    if spec.dense:
        w = _backend.pne_count_batch(seeds, k_a, k_b, p)
        pt.w_hist = dict(sorted(Counter(w.tolist()).items()))
        if records is not None:
            records["pne_count"] = w
    if spec.runs_brd:
        tau_ne, tau_r, tau_c, clen, final_t, reveals = _backend.brd_batch(seeds, k_a, k_b, p)
        conv = tau_ne >= 0
        pt.n_converged = int(conv.sum())
        pt.n_trapped = n - pt.n_converged
        if pt.n_converged + pt.n_trapped != n:
            raise AssertionError("every run must end converged or trapped")
        if (tau_r < 0).any():
            raise AssertionError("every run must re-enter its revealed set")
        over = reveals > _r_formula_vec(tau_r, k_a, k_b)
        if over.any():
            raise AssertionError(f"revealed store exceeded r(tau_R) in {int(over.sum())} runs")
        pt.tau_ne_hist = dict(sorted(Counter(tau_ne[conv].tolist()).items()))
        pt.tau_cycle_hist = dict(sorted(Counter(tau_c[~conv].tolist()).items()))
        pt.reveals_sum = int(reveals.sum())
        pt.reveals_max = int(reveals.max())
        if records is not None:
            records.update(tau_ne=tau_ne, tau_r=tau_r, tau_cycle=tau_c,
                           cycle_len=clen, final_t=final_t, reveals_total=reveals)
    pt.records = records
    pt.runtime = time.perf_counter() - t0
    return pt


def run_experiment(spec: ExperimentSpec, threads: int = 1, chunk: int = CHUNK) -> SummaryStats:
    """Run every grid point of ``spec``; output does not depend on ``threads``."""
    if not spec.grid:
        raise ParameterError("experiment grid is empty")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    if spec.dense:
        for k_a, k_b, p in spec.grid:
            check_memory(GameParams(k_a, k_b, p))
    t0 = time.perf_counter()
    jobs = [(g, s, min(chunk, spec.trials - s))
            for g in range(len(spec.grid)) for s in range(0, spec.trials, chunk)]
    if threads == 1:
        parts = [_run_chunk(spec, *job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: _run_chunk(spec, *job), jobs))
    points = []
    for g, (k_a, k_b, p) in enumerate(spec.grid):
        acc = PointStats(k_a, k_b, p, brd=spec.runs_brd, dense=spec.dense,
                         records={} if spec.retain_traces else None)
        for (jg, _, _), part in zip(jobs, parts):
            if jg == g:
                acc = acc.merge(part)
        points.append(acc)
    out = SummaryStats(spec, points, runtime=time.perf_counter() - t0)
    log.info("ran %d grid points x %d trials in %.2fs (%s kernels, base_seed=%d)",
             len(points), spec.trials, out.runtime, out.backend, spec.base_seed)
    return out


# -- derived experiments --------------------------------------------------------

@dataclass(frozen=True)
class PhaseRow:
    p: float
    ell_name: str
    ell: float
    estimate: float
    ci: float


def default_ells(k: int) -> dict:
    return {"log K": math.log(k), "sqrt K": math.sqrt(k), "2K-1": 2 * k - 1}


def phase_sweep(k: int, p_values, trials: int, ells: dict | None = None,
                base_seed: int = 0, threads: int = 1) -> list[PhaseRow]:
    """Estimate P(tau_NE > ell) on K x K games for each p and each horizon ell."""
    if k < 2:
        raise ParameterError(f"phase_sweep needs k >= 2, got {k}")
    ells = default_ells(k) if ells is None else ells
    spec = ExperimentSpec([(k, k, p) for p in p_values], trials, base_seed,
                          frozenset({"converged", "tau_ne"}))
    summary = run_experiment(spec, threads=threads)
    rows = []
    for pt in summary.points:
        for name, ell in ells.items():
            est = pt.tail(ell)
            rows.append(PhaseRow(pt.p, name, ell, est, Z * math.sqrt(est * (1 - est) / trials)))
    return rows


@dataclass
class GofReport:
    k: int
    n: int
    statistic: float
    dof: int
    p_value: float
    bins: list[tuple[int, int]]
    observed: list[int]
    expected: list[float]
    p_tau0: float
    p_tau0_exact: float
    q1: float
    q1_ci: float

    def passes(self, level: float = 0.01) -> bool:
        return self.p_value > level


def pool_bins(expected, observed, min_expected: float = 5.0):
    """Merge adjacent bins left to right until each expected count reaches the minimum."""
    bins, exp_out, obs_out = [], [], []
    lo, e_acc, o_acc = 0, 0.0, 0
    for t, (e, o) in enumerate(zip(expected, observed)):
        e_acc += e
        o_acc += o
        if e_acc >= min_expected:
            bins.append((lo, t))
            exp_out.append(e_acc)
            obs_out.append(o_acc)
            lo, e_acc, o_acc = t + 1, 0.0, 0
    if e_acc > 0 or o_acc > 0:
        if bins:
            bins[-1] = (bins[-1][0], len(expected) - 1)
            exp_out[-1] += e_acc
            obs_out[-1] += o_acc
        else:
            bins.append((0, len(expected) - 1))
            exp_out.append(e_acc)
            obs_out.append(o_acc)
    return bins, exp_out, obs_out


def compare_empirical_exact(k: int, trials: int, base_seed: int = 0, threads: int = 1) -> GofReport:
    """Chi-square of simulated tau_NE on K x K potential games against the exact pmf."""
    if k < 2:
        raise ParameterError(f"compare_empirical_exact needs k >= 2, got {k}")
    spec = ExperimentSpec([(k, k, 1.0)], trials, base_seed, frozenset({"tau_ne", "converged"}))
    pt = run_experiment(spec, threads=threads).points[0]
    if pt.n_trapped:
        raise AssertionError("a potential game produced a trap")
    pmf = tau_distribution(k, k).pmf
    observed = [pt.tau_ne_hist.get(t, 0) for t in range(len(pmf))]
    if sum(observed) != trials:
        raise AssertionError("tau_NE exceeded its deterministic maximum")
    expected = [trials * m for m in pmf]
    bins, exp_p, obs_p = pool_bins(expected, observed)
    # rescale so totals agree exactly despite float rounding in the pmf
    exp_p = list(np.asarray(exp_p) * trials / sum(exp_p))
    if len(bins) > 1:
        res = stats.chisquare(obs_p, exp_p)
        statistic, p_value = float(res.statistic), float(res.pvalue)
    else:
        statistic, p_value = 0.0, 1.0
    n0 = observed[0]
    survivors = trials - n0
    q1 = observed[1] / survivors if survivors else float("nan")
    # radius taken at the hypothesised value q1 = 1/2
    q1_ci = Z * math.sqrt(0.25 / survivors) if survivors else float("nan")
    return GofReport(
        k=k, n=trials, statistic=statistic, dof=len(bins) - 1, p_value=p_value,
        bins=bins, observed=obs_p, expected=exp_p,
        p_tau0=n0 / trials, p_tau0_exact=1 / (2 * k - 1),
        q1=q1, q1_ci=q1_ci,
    )
