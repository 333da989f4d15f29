"""Accuracy and latency evaluation against a Monte Carlo reference."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .checker import CheckerConfig, check_pair
from .errors import ColprobError

RECORD_COLUMNS = (
    "scenario_id", "scheme", "sigma_max", "w_min", "d_max",
    "p_est", "p_gt", "abs_error", "runtime_s", "samples",
)
GRID_COLUMNS = (
    "sigma_max", "w_min", "d_max",
    "runtime_mean_s", "runtime_median_s", "runtime_p95_s", "runtime_p99_s",
    "error_mean", "error_median", "error_p95", "error_p99",
    "n_records", "n_error_records", "pareto",
)
DEFAULT_GT_N = 100_000


class GroundTruth(NamedTuple):
    p: float
    stderr: float


@dataclass
class EvalRecord:
    scenario_id: str
    scheme: str
    sigma_max: float
    w_min: float
    d_max: float
    p_est: float
    p_gt: float
    abs_error: float
    runtime: float
    samples: int

    def row(self) -> list:
        return [
            self.scenario_id, self.scheme, self.sigma_max, self.w_min, self.d_max,
            f"{self.p_est:.10f}", f"{self.p_gt:.10f}", f"{self.abs_error:.10f}",
            f"{self.runtime:.9f}", self.samples,
        ]


def percentile(values, q: float) -> float:
    """Nearest-rank percentile (``q`` in percent)."""
    s = sorted(values)
    if not s:
        return math.nan
    rank = max(1, math.ceil(q / 100.0 * len(s)))
    return float(s[rank - 1])


def summarize(values) -> dict[str, float]:
    values = list(values)
    if not values:
        return {"mean": math.nan, "median": math.nan, "p95": math.nan, "p99": math.nan}
    return {
        "mean": float(np.mean(values)),
        "median": percentile(values, 50),
        "p95": percentile(values, 95),
        "p99": percentile(values, 99),
    }


def _pair_ids(scenario) -> list[str]:
    others = scenario.others
    if len(others) == 1:
        return [scenario.name]
    return [f"{scenario.name}/{o.name}" for o in others]


def ground_truth(scenario, n: int = DEFAULT_GT_N, seed: int = 0) -> list[GroundTruth]:
    """Monte Carlo collision probability per ego-other pair, with binomial error."""
    cfg = CheckerConfig(scheme="monte_carlo", mc_n=n, mc_seed=seed)
    out = []
    for other in scenario.others:
        p = check_pair(scenario.ego, other, cfg).p_collision_final
        out.append(GroundTruth(p, math.sqrt(max(p * (1.0 - p), 0.0) / n)))
    return out


@dataclass
class EvalReport:
    records: list[EvalRecord]
    failures: list[tuple[str, str]] = field(default_factory=list)

    def runtime_summary(self) -> dict[str, float]:
        return summarize(r.runtime for r in self.records)

    def error_summary(self) -> dict[str, float]:
        # zero-probability references carry no accuracy information
        return summarize(r.abs_error for r in self.records if r.p_gt > 0.0)

    @property
    def n_error_records(self) -> int:
        return sum(1 for r in self.records if r.p_gt > 0.0)


def _timed(ego, other, cfg, repeats):
    result = check_pair(ego, other, cfg)
    times = [result.elapsed]
    for _ in range(repeats - 1):
        times.append(check_pair(ego, other, cfg).elapsed)
    return result, float(np.median(times))


def evaluate(
    scenarios,
    cfg: CheckerConfig | None = None,
    gt_n: int = DEFAULT_GT_N,
    seed: int = 0,
    repeats: int = 1,
    truths: dict | None = None,
) -> EvalReport:
    """One record per scenario pair; failing scenarios are recorded, not raised.

    ``truths`` maps scenario name to a list of :class:`GroundTruth` and is
    filled in as a cache when given.
    """
    cfg = cfg or CheckerConfig()
    scenarios = list(scenarios)
    if not scenarios:
        raise ColprobError("evaluate needs at least one scenario")
    truths = {} if truths is None else truths
    report = EvalReport([])
    warm = False
    for sc in scenarios:
        try:
            if sc.name not in truths:
                truths[sc.name] = ground_truth(sc, gt_n, seed)
            if not warm:
                check_pair(sc.ego, sc.others[0], cfg)
                warm = True
            for pid, other, gt in zip(_pair_ids(sc), sc.others, truths[sc.name]):
                result, runtime = _timed(sc.ego, other, cfg, repeats)
                p = result.p_collision_final
                report.records.append(
                    EvalRecord(
                        pid, cfg.label(), cfg.sigma_max, cfg.w_min, cfg.d_max,
                        p, gt.p, abs(p - gt.p), runtime, result.samples_evaluated,
                    )
                )
        except ColprobError as exc:
            report.failures.append((sc.name, str(exc)))
    return report


@dataclass(frozen=True)
class GridSpec:
    sigma_max: tuple[float, ...] = (3.0, 3.4, 3.8, 4.2)
    w_min: tuple[float, ...] = (0.001, 0.005, 0.01, 0.02)
    d_max: tuple[float, ...] = (0.8, 1.2, 1.625, 2.4)
    repeats: int = 3

    def __post_init__(self):
        if not (self.sigma_max and self.w_min and self.d_max):
            raise ColprobError("grid axes must be non-empty")
        if self.repeats < 1:
            raise ColprobError("repeats must be at least 1")

    def cells(self):
        return itertools.product(self.sigma_max, self.w_min, self.d_max)


@dataclass
class GridRow:
    sigma_max: float
    w_min: float
    d_max: float
    runtime: dict[str, float]
    error: dict[str, float]
    n_records: int
    n_error_records: int
    pareto: bool = False

    def row(self) -> list:
        return [
            self.sigma_max, self.w_min, self.d_max,
            *(f"{self.runtime[k]:.9f}" for k in ("mean", "median", "p95", "p99")),
            *(f"{self.error[k]:.10f}" for k in ("mean", "median", "p95", "p99")),
            self.n_records, self.n_error_records, int(self.pareto),
        ]


def mark_pareto(rows: list[GridRow]) -> list[GridRow]:
    """Flag rows not dominated in (P95 runtime, median error)."""
    for r in rows:
        r.pareto = not any(
            o.runtime["p95"] <= r.runtime["p95"]
            and o.error["median"] <= r.error["median"]
            and (o.runtime["p95"] < r.runtime["p95"] or o.error["median"] < r.error["median"])
            for o in rows
        )
    return rows


def grid_search(
    scenarios,
    grid: GridSpec,
    gt_n: int = DEFAULT_GT_N,
    seed: int = 0,
    base: CheckerConfig | None = None,
) -> list[GridRow]:
    """Evaluate every grid cell; rows sorted by P95 runtime, Pareto set flagged."""
    base = base or CheckerConfig()
    scenarios = list(scenarios)
    truths: dict = {}
    rows = []
    for sigma_max, w_min, d_max in grid.cells():
        cfg = replace(base, sigma_max=sigma_max, w_min=w_min, d_max=d_max)
        report = evaluate(scenarios, cfg, gt_n, seed, grid.repeats, truths)
        rows.append(
            GridRow(
                sigma_max, w_min, d_max, report.runtime_summary(), report.error_summary(),
                len(report.records), report.n_error_records,
            )
        )
    mark_pareto(rows)
    rows.sort(key=lambda r: (r.runtime["p95"], r.error["median"]))
    return rows


def paired_gap(scenarios, cfg: CheckerConfig, other_cfg: CheckerConfig | None = None, swap: bool = False):
    """Per-pair ``(id, p, p_alt, |diff|)`` for a tracked comparison.

    ``other_cfg`` compares two configurations (e.g. dense initial orders);
    ``swap`` instead re-runs with the roles of the agents exchanged, which
    moves the indicator anchor from the other agent to the ego.
    """
    out = []
    alt_cfg = other_cfg or cfg
    for sc in scenarios:
        for pid, other in zip(_pair_ids(sc), sc.others):
            p = check_pair(sc.ego, other, cfg).p_collision_final
            if swap:
                q = check_pair(other, sc.ego, alt_cfg).p_collision_final
            else:
                q = check_pair(sc.ego, other, alt_cfg).p_collision_final
            out.append((pid, p, q, abs(p - q)))
    return out


def write_records_csv(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow(r.row())


def write_summary_csv(report: EvalReport, fh) -> None:
    """One row per statistic (mean, median, p95, p99, count)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["stat", "runtime_ms", "abs_error"])
    rt, err = report.runtime_summary(), report.error_summary()
    for k in ("mean", "median", "p95", "p99"):
        w.writerow([k, f"{rt[k] * 1e3:.6f}", f"{err[k]:.6f}"])
    w.writerow(["count", len(report.records), report.n_error_records])


def write_grid_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(GRID_COLUMNS)
    for r in rows:
        w.writerow(r.row())
