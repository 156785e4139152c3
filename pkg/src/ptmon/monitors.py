"""Online per-timestep certification and verdict streams.

A monitor session consumes one prediction per step and, once past warm-up,
emits a verdict per formula per step: ``safe`` when the certified lower bound
clears zero (ties count as safe), ``uncertain`` otherwise, and
``warming_up`` while the monitor does not yet have the history its
calibration assumed (the first ``k_max`` steps, or after a dropped
prediction empties the buffer).

Verdict streams serialize as line-delimited JSON ``{t, formula, lb, label}``
and as CSV with the same columns.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

from .conformal import CalibratedMonitor, certified_lower_bound
from .fragment import (
    Decoder,
    HorizonExceededError,
    compile_history_decoder,
    compile_semantic_decoder,
)
from .logic import Formula, NotInFragmentError, format_formula, horizon
from .robustness import BasisKind, BasisVector, Episode, robustness_series


class Label(str, Enum):
    SAFE = "safe"
    UNCERTAIN = "uncertain"
    WARMING_UP = "warming_up"


@dataclass(frozen=True)
class MonitorVerdict:
    t: int
    formula: str
    lower_bound: float | None
    label: Label


def _verdict(t: int, formula: str, lb: float) -> MonitorVerdict:
    return MonitorVerdict(t, formula, lb, Label.SAFE if lb >= 0.0 else Label.UNCERTAIN)


def _warming(t: int, formula: str) -> MonitorVerdict:
    return MonitorVerdict(t, formula, None, Label.WARMING_UP)


class RollingBuffer:
    """Strict FIFO of the last ``k_max + 1`` per-step prediction vectors.

    ``push`` advances time by one step and evicts the oldest entry once full.
    There is no interpolation: when a step's prediction is missing, call
    :meth:`mark_dropped`, which empties the buffer so certification reports
    warm-up until enough fresh steps have arrived again.
    """

    def __init__(self, m: int, k_max: int):
        if m < 1 or k_max < 0:
            raise ValueError(f"need m >= 1 and k_max >= 0, got m={m}, k_max={k_max}")
        self.m = m
        self.k_max = k_max
        self.capacity = k_max + 1
        self._entries: deque[np.ndarray] = deque(maxlen=self.capacity)
        self.t = -1

    @property
    def fill(self) -> int:
        return len(self._entries)

    def push(self, mu_hat: Sequence[float] | np.ndarray) -> None:
        values = np.asarray(mu_hat, dtype=float)
        if values.shape != (self.m,):
            raise ValueError(f"expected {self.m} predicate values, got shape {values.shape}")
        self._entries.append(values)
        self.t += 1

    def mark_dropped(self) -> None:
        """A step arrived with no prediction: time advances, history resets."""
        self._entries.clear()
        self.t += 1

    def history_vector(self, t: int | None = None) -> np.ndarray:
        """Current predicate-history vector, zero-filled beyond the fill.

        Coordinate ``k*(k_max+1) + j`` is predicate ``k`` at lag ``j``; lags
        older than the buffer holds read as zero, so callers must only decode
        supports within the filled depth.
        """
        width = self.k_max + 1
        out = np.zeros(self.m * width, dtype=float)
        for j, values in enumerate(reversed(self._entries)):
            if j >= width:
                break
            out[j::width] = values
        return out


def rolling_step(buf: RollingBuffer, mu_hat: Sequence[float] | np.ndarray | None) -> None:
    """Feed one step into the buffer; ``None`` records a dropped prediction."""
    if mu_hat is None:
        buf.mark_dropped()
    else:
        buf.push(mu_hat)


def rolling_certify(
    buf: RollingBuffer,
    mon: CalibratedMonitor,
    f: Formula,
    decoder: Decoder | None = None,
) -> MonitorVerdict:
    """Certify ``f`` from buffered per-step predictions at the buffer's time.

    Warm-up applies until the monitor's full history depth has streamed past
    (``t >= k_max``) and the buffer holds at least ``horizon(f)+1`` fresh
    steps. ``decoder`` may be passed to reuse a compiled tree.
    """
    name = format_formula(f)
    if decoder is None:
        decoder = compile_history_decoder(f, mon.m, mon.k_max)
    if buf.t < mon.k_max or buf.fill < horizon(f) + 1:
        return _warming(buf.t, name)
    basis = BasisVector(BasisKind.PREDICATE_HISTORY, buf.history_vector(), buf.t)
    lb = certified_lower_bound(mon, basis, decoder)
    return _verdict(buf.t, name, lb)


def semantic_certify(
    basis_hat: BasisVector,
    mon: CalibratedMonitor,
    f: Formula,
    decoder: Decoder | None = None,
) -> MonitorVerdict:
    """Certify ``f`` from a predicted dictionary-atom basis snapshot."""
    name = format_formula(f)
    if decoder is None:
        decoder = compile_semantic_decoder(f, mon.dictionary)
    if basis_hat.t < mon.k_max:
        return _warming(basis_hat.t, name)
    lb = certified_lower_bound(mon, basis_hat, decoder)
    return _verdict(basis_hat.t, name, lb)


def observer_certify(
    buf: RollingBuffer,
    mon: CalibratedMonitor,
    f: Formula,
) -> MonitorVerdict:
    """Certify ``f`` through per-coordinate intervals around buffered steps."""
    from .conformal import interval_propagate  # local to avoid import cycle noise

    name = format_formula(f)
    if mon.formula is not None and mon.formula != name:
        raise ValueError(
            f"observer monitor was calibrated for {mon.formula!r}, asked to certify {name!r}"
        )
    if buf.t < mon.k_max or buf.fill < horizon(f) + 1:
        return _warming(buf.t, name)
    center = buf.history_vector()
    spread = mon.coord_radii * mon.sigma
    lo, _hi = interval_propagate(f, center - spread, center + spread, mon.m, mon.k_max)
    return MonitorVerdict(buf.t, name, lo, Label.SAFE if lo >= 0.0 else Label.UNCERTAIN)


# ---------------------------------------------------------------------------
# Whole-episode runs
# ---------------------------------------------------------------------------


@dataclass
class EpisodeResult:
    """Verdicts for one episode, with ground truth for scoring.

    ``verdicts`` is time-major (all formulas at t, then t+1, ...).
    ``truth[name]`` holds the exact robustness of that formula at
    ``t = k_max .. T``. Formulas the monitor cannot certify (outside the
    dictionary span, or deeper than the history) land in ``errors`` with the
    reason, and the run continues without them.
    """

    verdicts: list[MonitorVerdict]
    truth: dict[str, np.ndarray]
    errors: dict[str, str]
    k_max: int

    def by_formula(self, name: str) -> list[MonitorVerdict]:
        return [v for v in self.verdicts if v.formula == name]

    def lower_bounds(self, name: str) -> np.ndarray:
        """Valid-time lower bounds for one formula, aligned to ``t = k_max..T``."""
        out = [v.lower_bound for v in self.verdicts if v.formula == name and v.label is not Label.WARMING_UP]
        return np.asarray(out, dtype=float)


def run_episode(
    ep: Episode,
    predictor,
    mon: CalibratedMonitor,
    formulas: Sequence[Formula],
) -> EpisodeResult:
    """Stream one episode through a monitor for several formulas at once.

    Predictions are generated once (they are per-step vectors for rolling and
    observer monitors, per-valid-time basis columns for semantic ones) and
    consumed in time order. Fragment-wide monitors share their single radius
    across all formulas; support-restricted monitors are specialized per
    formula from the score cache.
    """
    k_max = mon.k_max
    if ep.T < k_max:
        raise ValueError(f"episode too short: T={ep.T} < k_max={k_max}")

    prepared: list[tuple[Formula, str, Decoder, CalibratedMonitor]] = []
    errors: dict[str, str] = {}
    for f in formulas:
        name = format_formula(f)
        try:
            if mon.kind == "semantic":
                decoder = compile_semantic_decoder(f, mon.dictionary)
            else:
                decoder = compile_history_decoder(f, mon.m, mon.k_max)
            if mon.support is None and mon.kind != "observer":
                mon_f = mon
            elif mon.formula == name:
                mon_f = mon
            else:
                mon_f = mon.for_formula(f)
        except (NotInFragmentError, HorizonExceededError, ValueError) as exc:
            errors[name] = str(exc)
            continue
        prepared.append((f, name, decoder, mon_f))

    truth = {
        name: robustness_series(f, ep)[k_max - horizon(f) :] if horizon(f) < k_max else robustness_series(f, ep)
        for f, name, _, _ in prepared
    }

    verdicts: list[MonitorVerdict] = []
    predictions = np.asarray(predictor.predict(ep), dtype=float)

    if mon.kind == "semantic":
        expected = (mon.dim, ep.T - k_max + 1)
        if predictions.shape != expected:
            raise ValueError(f"predictor/basis mismatch: {predictions.shape} vs {expected}")
        for t in range(0, k_max):
            verdicts.extend(_warming(t, name) for _, name, _, _ in prepared)
        for t in range(k_max, ep.T + 1):
            basis = BasisVector(BasisKind.SEMANTIC, predictions[:, t - k_max], t)
            for f, name, decoder, mon_f in prepared:
                verdicts.append(semantic_certify(basis, mon_f, f, decoder))
        return EpisodeResult(verdicts, truth, errors, k_max)

    if predictions.shape != ep.mu.shape:
        raise ValueError(f"predictor/basis mismatch: {predictions.shape} vs {ep.mu.shape}")
    buf = RollingBuffer(mon.m, k_max)
    for t in range(0, ep.T + 1):
        rolling_step(buf, predictions[:, t])
        for f, name, decoder, mon_f in prepared:
            if t < k_max:
                verdicts.append(_warming(t, name))
            elif mon.kind == "observer":
                verdicts.append(observer_certify(buf, mon_f, f))
            else:
                verdicts.append(rolling_certify(buf, mon_f, f, decoder))
    return EpisodeResult(verdicts, truth, errors, k_max)


# ---------------------------------------------------------------------------
# Verdict stream IO
# ---------------------------------------------------------------------------


def verdict_to_json(v: MonitorVerdict, **extra) -> dict:
    obj = {"t": v.t, "formula": v.formula, "lb": v.lower_bound, "label": v.label.value}
    obj.update(extra)
    return obj


def write_verdicts_jsonl(verdicts: Iterable[MonitorVerdict], stream: IO[str], **extra) -> None:
    for v in verdicts:
        stream.write(json.dumps(verdict_to_json(v, **extra)) + "\n")


def write_verdicts_csv(
    verdicts: Iterable[MonitorVerdict], stream: IO[str], *, header: bool = True, **extra
) -> None:
    writer = csv.writer(stream)
    keys = sorted(extra)
    if header:
        writer.writerow(["t", "formula", "lb", "label", *keys])
    for v in verdicts:
        row = [v.t, v.formula, "" if v.lower_bound is None else repr(v.lower_bound), v.label.value]
        row += [extra[k] for k in keys]
        writer.writerow(row)
