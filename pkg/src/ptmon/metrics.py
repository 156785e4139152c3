"""Certification quality metrics and report assembly.

All rate metrics pool the valid times (``t = k_max .. T``) of every test
episode:

* certified-safe rate — share of points the monitor labels safe;
* precision — share of safe labels where the formula really held
  (blank when nothing was labeled safe);
* false-positive rate — share of truly violating points labeled safe
  (blank when the ground truth never violates);
* ground-truth safe rate — share of points where the formula held;
* coverage — how often the certified lower bound really was a lower bound:
  per episode at one sampled time for level-2 monitors, as an
  all-times-per-episode event for level-1.

The CSV report rounds percentages to one decimal; a JSON sidecar keeps full
precision. A separate sweep file tabulates the radius of ``G[0,K]`` window
formulas against ``K`` for each monitor, recomputed from the score caches.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .conformal import CalibratedMonitor, sample_level2_time
from .logic import Always, Formula, Predicate, TimeInterval, format_formula
from .monitors import run_episode
from .robustness import Episode


@dataclass(frozen=True)
class ReportRow:
    formula: str
    monitor: str
    kind: str
    level: int
    q_phi: float
    csr: float
    prec: float | None
    fpr: float | None
    gt_safe: float
    coverage: float


@dataclass(frozen=True)
class SweepRow:
    k: int
    monitor: str
    kind: str
    level: int
    q_phi: float


def compute_metrics(
    lower_bounds: Sequence[np.ndarray],
    truths: Sequence[np.ndarray],
    level: int,
    k_max: int,
    coverage_seed: int = 0,
) -> dict:
    """Pool per-episode valid-time lower bounds against ground truth.

    ``lower_bounds[i]`` and ``truths[i]`` must align to ``t = k_max .. T_i``
    for episode ``i``. Returns percentages in [0, 100]; ``prec`` and ``fpr``
    are ``None`` exactly when their denominators are empty.
    """
    if len(lower_bounds) != len(truths):
        raise ValueError("lower_bounds and truths must pair up per episode")
    if not lower_bounds:
        raise ValueError("need at least one episode")
    n_valid = n_safe = n_true_safe = n_safe_correct = n_unsafe = n_safe_wrong = 0
    covered = 0
    for i, (lb, rho) in enumerate(zip(lower_bounds, truths)):
        lb = np.asarray(lb, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if lb.shape != rho.shape:
            raise ValueError(f"episode {i}: bounds shape {lb.shape} vs truth {rho.shape}")
        safe = lb >= 0.0
        true_safe = rho >= 0.0
        n_valid += lb.size
        n_safe += int(safe.sum())
        n_true_safe += int(true_safe.sum())
        n_safe_correct += int((safe & true_safe).sum())
        n_unsafe += int((~true_safe).sum())
        n_safe_wrong += int((safe & ~true_safe).sum())
        if level == 1:
            covered += int(bool((lb <= rho).all()))
        else:
            T = k_max + lb.size - 1
            tau = sample_level2_time(coverage_seed, i, k_max, T)
            covered += int(lb[tau - k_max] <= rho[tau - k_max])
    return {
        "csr": 100.0 * n_safe / n_valid,
        "prec": 100.0 * n_safe_correct / n_safe if n_safe else None,
        "fpr": 100.0 * n_safe_wrong / n_unsafe if n_unsafe else None,
        "gt_safe": 100.0 * n_true_safe / n_valid,
        "coverage": 100.0 * covered / len(lower_bounds),
    }


def evaluate_monitor(
    name: str,
    mon: CalibratedMonitor,
    predictor,
    episodes: Sequence[Episode],
    formulas: Sequence[Formula],
    coverage_seed: int = 0,
) -> tuple[list[ReportRow], dict[str, str]]:
    """Certify every episode for every formula and summarize per formula."""
    per_formula_lbs: dict[str, list[np.ndarray]] = {}
    per_formula_truths: dict[str, list[np.ndarray]] = {}
    errors: dict[str, str] = {}
    for ep in episodes:
        result = run_episode(ep, predictor, mon, formulas)
        errors.update(result.errors)
        for fname, rho in result.truth.items():
            per_formula_lbs.setdefault(fname, []).append(result.lower_bounds(fname))
            per_formula_truths.setdefault(fname, []).append(rho)

    rows: list[ReportRow] = []
    for f in formulas:
        fname = format_formula(f)
        if fname not in per_formula_lbs:
            continue
        if mon.support is None and mon.kind != "observer":
            q_phi = mon.radius
        elif mon.kind == "observer" and mon.formula == fname:
            q_phi = mon.radius
        else:
            q_phi = mon.for_formula(f).radius
        summary = compute_metrics(
            per_formula_lbs[fname],
            per_formula_truths[fname],
            mon.level,
            mon.k_max,
            coverage_seed,
        )
        rows.append(
            ReportRow(
                formula=fname,
                monitor=name,
                kind=mon.kind,
                level=mon.level,
                q_phi=q_phi,
                **summary,
            )
        )
    return rows, errors


def horizon_sweep(
    monitors: dict[str, CalibratedMonitor],
    ks: Sequence[int],
    predicate: Predicate,
) -> list[SweepRow]:
    """Radius of ``G[0,K] predicate`` against ``K``, straight from the caches.

    No episodes are touched: each monitor's stored score matrix yields the
    support-restricted radius for every requested window length. Monitors
    that cannot express a window (a missing dictionary atom, or a horizon
    past their history depth) simply contribute no row for that ``K``.
    """
    rows: list[SweepRow] = []
    for k in ks:
        f = Always(TimeInterval(0, int(k)), predicate)
        for name, mon in monitors.items():
            try:
                q = mon.radius_for_formula(f)
            except ValueError:
                continue
            rows.append(SweepRow(int(k), name, mon.kind, mon.level, q))
    return rows


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

_PERCENT_FIELDS = ("csr", "prec", "fpr", "gt_safe", "coverage")


def _fmt_percent(value: float | None) -> str:
    return "" if value is None else f"{value:.1f}"


def write_report_csv(rows: Sequence[ReportRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["formula", "monitor", "kind", "level", "q_phi", *_PERCENT_FIELDS])
        for row in rows:
            writer.writerow(
                [
                    row.formula,
                    row.monitor,
                    row.kind,
                    row.level,
                    f"{row.q_phi:.6g}",
                    *(_fmt_percent(getattr(row, f)) for f in _PERCENT_FIELDS),
                ]
            )


def write_report_json(rows: Sequence[ReportRow], path: str | Path) -> None:
    Path(path).write_text(json.dumps([asdict(r) for r in rows], indent=2))


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "monitor", "kind", "level", "q_phi"])
        for row in rows:
            writer.writerow([row.k, row.monitor, row.kind, row.level, f"{row.q_phi:.6g}"])
