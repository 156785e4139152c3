"""Split-conformal calibration of basis predictions and certified lower bounds.

The contract: a predictor emits basis estimates for each episode; calibration
turns held-out episodes into normalized one-sided error scores, takes the
finite-sample quantile, and stores that radius. At run time, subtracting
``radius * sigma`` from every predicted coordinate and decoding yields a
number that lower-bounds the true robustness with the calibrated probability
— simultaneously for every formula the decoder construction covers, because
one basis-wide event implies them all.

Two aggregation levels are supported: per-episode worst time (level 1) and a
single uniformly sampled time per episode (level 2). The raw per-coordinate
score matrix is cached so the radius for any new formula's support can be
recomputed later without touching data or predictor again.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fragment import (
    AtomicDictionary,
    BasisMismatchError,
    Decoder,
    HorizonExceededError,
    compile_history_decoder,
    decode_values,
    dictionary_from_json,
    dictionary_to_json,
)
from .logic import Formula, atom_support, format_formula, horizon, predicate_lag_support
from .robustness import (
    BasisKind,
    BasisVector,
    Episode,
    predicate_history_series,
    semantic_basis_series,
)

SCORE_CACHE_VERSION = 1
MONITOR_VERSION = 1


class SupportMismatchError(ValueError):
    """Decoder reads coordinates outside the monitor's calibrated support."""


@dataclass(frozen=True, eq=False)
class ScoreConfig:
    """How per-timestep scores are formed and aggregated.

    ``sigma`` holds one positive scale per basis coordinate. ``support`` of
    ``None`` means the score maxes over all coordinates; otherwise only over
    the given set. ``level`` 1 aggregates each calibration episode by its
    worst time, level 2 by one uniformly sampled time.
    """

    sigma: np.ndarray
    alpha: float
    level: int
    support: frozenset[int] | None = None

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim != 1 or sigma.size == 0:
            raise ValueError("sigma must be a nonempty vector")
        if not (sigma > 0).all():
            raise ValueError("sigma must be strictly positive")
        object.__setattr__(self, "sigma", sigma)
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.level not in (1, 2):
            raise ValueError(f"level must be 1 or 2, got {self.level}")
        if self.support is not None:
            support = frozenset(int(i) for i in self.support)
            if not support:
                raise ValueError("support must be nonempty when given")
            if min(support) < 0 or max(support) >= sigma.size:
                raise ValueError("support indices out of range")
            object.__setattr__(self, "support", support)


def one_sided_errors(predicted, truth) -> np.ndarray:
    """Overestimation ``max(0, predicted - truth)``, elementwise.

    Accepts vectors, matrices, or :class:`BasisVector` snapshots (whose kinds
    must match). Underestimation never counts: a conservative prediction has
    error zero.
    """
    if isinstance(predicted, BasisVector) and isinstance(truth, BasisVector):
        if predicted.kind is not truth.kind:
            raise BasisMismatchError(
                f"mixed basis kinds: {predicted.kind.value} vs {truth.kind.value}"
            )
        predicted, truth = predicted.values, truth.values
    p = np.asarray(predicted, dtype=float)
    g = np.asarray(truth, dtype=float)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    return np.maximum(0.0, p - g)


def score(errors: np.ndarray, cfg: ScoreConfig) -> float:
    """Worst normalized error over the configured coordinate set."""
    e = np.asarray(errors, dtype=float)
    if e.shape != cfg.sigma.shape:
        raise ValueError(f"errors shape {e.shape} does not match sigma {cfg.sigma.shape}")
    normalized = e / cfg.sigma
    if cfg.support is not None:
        normalized = normalized[sorted(cfg.support)]
    return float(normalized.max())


def split_quantile(scores: Sequence[float] | np.ndarray, alpha: float) -> float:
    """Finite-sample upper quantile: the ``min(n, ceil((n+1)(1-alpha)))``-th
    smallest of ``n`` scores (1-based)."""
    s = np.sort(np.asarray(scores, dtype=float))
    n = s.size
    if n == 0:
        raise ValueError("cannot take a quantile of an empty score list")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    rank = min(n, math.ceil((n + 1) * (1.0 - alpha)))
    return float(s[rank - 1])


# ---------------------------------------------------------------------------
# Score caches and calibrated monitors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScoreCache:
    """Per-episode aggregated normalized errors, one row per episode.

    ``matrix[i, c]`` is episode ``i``'s aggregated (level-1: worst-time,
    level-2: sampled-time) error at coordinate ``c``, already divided by
    ``sigma[c]``. Because max commutes with max, the radius for any
    coordinate subset is the split quantile of row-wise maxima over that
    subset — no data or predictor involved.
    """

    matrix: np.ndarray
    level: int
    seed: int
    symmetric: bool = False
    version: int = SCORE_CACHE_VERSION

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError(f"cache matrix must be 2-D, got shape {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_episodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def save_score_cache(cache: ScoreCache, path: str | Path) -> None:
    np.savez(
        path,
        matrix=cache.matrix,
        level=np.int64(cache.level),
        seed=np.int64(cache.seed),
        symmetric=np.bool_(cache.symmetric),
        version=np.int64(cache.version),
    )


def load_score_cache(path: str | Path) -> ScoreCache:
    with np.load(path) as data:
        version = int(data["version"])
        if version != SCORE_CACHE_VERSION:
            raise ValueError(f"unsupported score cache version {version}")
        return ScoreCache(
            matrix=data["matrix"],
            level=int(data["level"]),
            seed=int(data["seed"]),
            symmetric=bool(data["symmetric"]),
        )


@dataclass(eq=False)
class CalibratedMonitor:
    """Everything needed to certify at run time, plus the score cache.

    ``kind`` is ``"semantic"`` (decode a dictionary-atom basis),
    ``"rolling"`` (decode raw predicate history), or ``"observer"``
    (per-coordinate symmetric intervals pushed through the formula).
    ``support`` of ``None`` means the radius protects the whole basis;
    otherwise only decoders reading within ``support`` may use it.
    """

    kind: str
    level: int
    alpha: float
    radius: float
    sigma: np.ndarray
    n_calibration: int
    seed: int
    dictionary: AtomicDictionary | None = None
    m: int | None = None
    k_max: int | None = None
    support: frozenset[int] | None = None
    cache: ScoreCache | None = None
    formula: str | None = None
    coord_radii: np.ndarray | None = None
    predictor_config: dict | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("semantic", "rolling", "observer"):
            raise ValueError(f"unknown monitor kind {self.kind!r}")
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.kind == "semantic":
            if self.dictionary is None:
                raise ValueError("semantic monitor needs a dictionary")
            self.m = self.dictionary.m
            self.k_max = self.dictionary.K_max
        else:
            if self.m is None or self.k_max is None:
                raise ValueError(f"{self.kind} monitor needs m and k_max")

    @property
    def dim(self) -> int:
        return int(self.sigma.size)

    @property
    def basis_kind(self) -> BasisKind:
        return BasisKind.SEMANTIC if self.kind == "semantic" else BasisKind.PREDICATE_HISTORY

    def support_of(self, f: Formula) -> frozenset[int]:
        """Basis coordinates formula ``f`` reads under this monitor's layout."""
        if self.kind == "semantic":
            return frozenset(atom_support(f, self.dictionary))
        return history_support_indices(f, self.k_max)

    def radius_for_formula(self, f: Formula) -> float:
        """Radius for ``f``'s own support, recomputed from the cached scores.

        Requires the cache; no episodes are re-read and no predictor re-run.
        For observer monitors this applies the per-coordinate level split
        ``alpha / |support|`` and returns the worst per-coordinate quantile.
        """
        if self.cache is None:
            raise ValueError("monitor carries no score cache; recalibrate with caching enabled")
        support = self.support_of(f)
        if self.kind == "observer":
            return max(self._observer_coord_radii(support).values())
        return radius_for_support(self.cache, support, self.alpha)

    def _observer_coord_radii(self, support: frozenset[int]) -> dict[int, float]:
        alpha_c = self.alpha / len(support)
        return {c: split_quantile(self.cache.matrix[:, c], alpha_c) for c in sorted(support)}

    def for_formula(self, f: Formula) -> "CalibratedMonitor":
        """A copy specialized to ``f``: support narrowed, radius recomputed."""
        support = self.support_of(f)
        mon = replace_monitor(self, support=support, formula=format_formula(f))
        if self.kind == "observer":
            coord = self._observer_coord_radii(support)
            radii = np.zeros(self.dim)
            for c, q in coord.items():
                radii[c] = q
            mon.coord_radii = radii
            mon.radius = max(coord.values())
        else:
            mon.radius = self.radius_for_formula(f)
        return mon


def replace_monitor(mon: CalibratedMonitor, **changes) -> CalibratedMonitor:
    fields = dict(
        kind=mon.kind,
        level=mon.level,
        alpha=mon.alpha,
        radius=mon.radius,
        sigma=mon.sigma,
        n_calibration=mon.n_calibration,
        seed=mon.seed,
        dictionary=mon.dictionary,
        m=mon.m,
        k_max=mon.k_max,
        support=mon.support,
        cache=mon.cache,
        formula=mon.formula,
        coord_radii=mon.coord_radii,
        predictor_config=mon.predictor_config,
    )
    fields.update(changes)
    return CalibratedMonitor(**fields)


def history_support_indices(f: Formula, k_max: int) -> frozenset[int]:
    """Flat predicate-history coordinates read by ``f`` (depth-checked)."""
    h = horizon(f)
    if h > k_max:
        raise HorizonExceededError(
            f"formula horizon {h} exceeds history depth {k_max}: {format_formula(f)}"
        )
    width = k_max + 1
    return frozenset(c.pred * width + c.lag for c in predicate_lag_support(f))


def radius_for_support(cache: ScoreCache, support: Iterable[int], alpha: float) -> float:
    """Split quantile of row-wise maxima over a coordinate subset."""
    idx = sorted(int(i) for i in support)
    if not idx:
        raise ValueError("support must be nonempty")
    if idx[0] < 0 or idx[-1] >= cache.dim:
        raise ValueError("support indices out of range for the cache")
    scores = cache.matrix[:, idx].max(axis=1)
    return split_quantile(scores, alpha)


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


def sample_level2_time(seed: int, episode_index: int, k_max: int, T: int) -> int:
    rng = np.random.default_rng([seed, episode_index])
    return int(rng.integers(k_max, T + 1))


def _normalized_error_matrix(ep: Episode, predictor, basis_spec, sigma: np.ndarray) -> np.ndarray:
    """Per-coordinate normalized one-sided errors at every valid time."""
    if isinstance(basis_spec, AtomicDictionary):
        truth = semantic_basis_series(ep, basis_spec)
        predicted = np.asarray(predictor.predict(ep), dtype=float)
        if predicted.shape != truth.shape:
            raise ValueError(
                f"predictor/basis mismatch: predictor gave {predicted.shape}, "
                f"semantic basis needs {truth.shape}"
            )
        return one_sided_errors(predicted, truth) / sigma[:, None]
    m, k_max = basis_spec
    predicted = np.asarray(predictor.predict(ep), dtype=float)
    if predicted.shape != ep.mu.shape:
        raise ValueError(
            f"predictor/basis mismatch: predictor gave {predicted.shape}, "
            f"per-step predicates need {ep.mu.shape}"
        )
    if ep.m != m:
        raise ValueError(f"episode has {ep.m} predicates, monitor expects {m}")
    step_errors = one_sided_errors(predicted, ep.mu)
    return _stack_lags(step_errors, k_max) / sigma[:, None]


def _stack_lags(step_values: np.ndarray, k_max: int) -> np.ndarray:
    """Arrange per-step values as history coordinates over valid times."""
    m, n = step_values.shape
    T = n - 1
    if T < k_max:
        raise ValueError(f"episode too short: T={T} < k_max={k_max}")
    width = k_max + 1
    out = np.empty((m * width, T - k_max + 1), dtype=float)
    for k in range(m):
        for j in range(width):
            out[k * width + j] = step_values[k, k_max - j : T + 1 - j]
    return out


def score_matrix(
    episodes: Sequence[Episode],
    predictor,
    basis_spec,
    sigma: np.ndarray,
    level: int,
    tau_seed: int = 0,
) -> np.ndarray:
    """Aggregated per-coordinate scores, one row per episode.

    Row ``i`` holds, per basis coordinate, the normalized overestimation of
    episode ``i`` — maximized over all valid times for level 1, or taken at
    one sampled time for level 2 (that episode's time is drawn from
    ``tau_seed`` and its position ``i``, so a fixed seed makes the sampling
    reproducible while staying independent across episodes). The row maximum
    over any coordinate subset is the episode's score for that subset, which
    is what makes one matrix reusable for every formula support.
    """
    if isinstance(basis_spec, AtomicDictionary):
        k_max, dim = basis_spec.K_max, basis_spec.r
    else:
        m, k_max = basis_spec
        dim = m * (k_max + 1)
    rows = np.empty((len(episodes), dim), dtype=float)
    for i, ep in enumerate(episodes):
        errs = _normalized_error_matrix(ep, predictor, basis_spec, sigma)
        if level == 1:
            rows[i] = errs.max(axis=1)
        else:
            tau = sample_level2_time(tau_seed, i, k_max, ep.T)
            rows[i] = errs[:, tau - k_max]
    return rows


def calibrate(
    episodes: Sequence[Episode],
    predictor,
    cfg: ScoreConfig,
    basis_spec,
    *,
    tau_seed: int = 0,
    keep_cache: bool = True,
) -> CalibratedMonitor:
    """Calibrate a semantic or rolling monitor on held-out episodes.

    ``basis_spec`` is an :class:`AtomicDictionary` for the semantic basis or
    a ``(m, k_max)`` pair for raw predicate history. Scores are computed for
    every valid time ``t = k_max .. T`` per episode, aggregated per
    ``cfg.level`` (level 2 samples one time per episode using ``tau_seed``),
    and the radius is their split quantile over ``cfg.support`` (all
    coordinates when ``None``). The per-coordinate score matrix is retained
    on the monitor unless ``keep_cache`` is false.
    """
    if isinstance(basis_spec, AtomicDictionary):
        kind = "semantic"
        k_max = basis_spec.K_max
        dim = basis_spec.r
    else:
        kind = "rolling"
        m, k_max = basis_spec
        dim = m * (k_max + 1)
    if cfg.sigma.size != dim:
        raise ValueError(f"sigma has {cfg.sigma.size} entries, basis needs {dim}")
    if not episodes:
        raise ValueError("calibration needs at least one episode")

    rows = score_matrix(episodes, predictor, basis_spec, cfg.sigma, cfg.level, tau_seed)
    cache = ScoreCache(rows, cfg.level, tau_seed)
    support = range(dim) if cfg.support is None else cfg.support
    radius = radius_for_support(cache, support, cfg.alpha)
    return CalibratedMonitor(
        kind=kind,
        level=cfg.level,
        alpha=cfg.alpha,
        radius=radius,
        sigma=cfg.sigma,
        n_calibration=len(episodes),
        seed=tau_seed,
        dictionary=basis_spec if kind == "semantic" else None,
        m=None if kind == "semantic" else basis_spec[0],
        k_max=None if kind == "semantic" else basis_spec[1],
        support=cfg.support,
        cache=cache if keep_cache else None,
    )


def estimate_sigma(
    episodes: Sequence[Episode],
    predictor,
    basis_spec,
    *,
    floor: float = 1e-6,
) -> np.ndarray:
    """Per-coordinate median absolute prediction error on a held-out slice.

    Pools all valid times of the given episodes; coordinates whose median is
    below ``floor`` are floored so downstream divisions stay finite. The
    scale is deliberately symmetric even though calibration scores are
    one-sided: the median of one-sided errors is zero for any predictor that
    overestimates at most half the time, which would collapse every
    coordinate to the floor and defeat the normalization.
    """
    pooled: list[np.ndarray] = []
    for ep in episodes:
        if isinstance(basis_spec, AtomicDictionary):
            truth = semantic_basis_series(ep, basis_spec)
            predicted = np.asarray(predictor.predict(ep), dtype=float)
            diff = predicted - truth
        else:
            _, k_max = basis_spec
            predicted = np.asarray(predictor.predict(ep), dtype=float)
            diff = _stack_lags(predicted - ep.mu, k_max)
        pooled.append(np.abs(diff))
    stacked = np.concatenate(pooled, axis=1)
    sigma = np.median(stacked, axis=1)
    return np.maximum(sigma, floor)


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------


def certified_lower_bound(mon: CalibratedMonitor, predicted: BasisVector, d: Decoder) -> float:
    """Decode the uniformly shrunk prediction: a calibrated-probability lower
    bound on the decoded true value.

    Requires matching basis kind and dimension, and — when the monitor was
    calibrated on a restricted support — that the decoder reads only inside
    that support.
    """
    if d.basis_kind is not mon.basis_kind:
        raise BasisMismatchError(
            f"{mon.kind} monitor certifies {mon.basis_kind.value} decoders, got {d.basis_kind.value}"
        )
    if predicted.kind is not d.basis_kind:
        raise BasisMismatchError(
            f"decoder reads {d.basis_kind.value}, basis is {predicted.kind.value}"
        )
    if predicted.values.shape != (mon.dim,) or d.dim != mon.dim:
        raise BasisMismatchError(
            f"monitor dimension {mon.dim} vs decoder {d.dim} vs basis {predicted.values.shape}"
        )
    if mon.support is not None and not d.support <= mon.support:
        extra = sorted(d.support - mon.support)
        raise SupportMismatchError(
            f"decoder reads coordinates {extra} outside the calibrated support"
        )
    lowered = predicted.values - mon.radius * mon.sigma
    return decode_values(d, lowered)


# ---------------------------------------------------------------------------
# Per-coordinate observer baseline
# ---------------------------------------------------------------------------


def observer_calibrate(
    episodes: Sequence[Episode],
    predictor,
    f: Formula,
    alpha: float,
    *,
    sigma_predicates: np.ndarray | None = None,
    k_max: int | None = None,
    tau_seed: int = 0,
) -> CalibratedMonitor:
    """Calibrate the coordinatewise baseline for one formula.

    Each history coordinate in ``f``'s support gets a symmetric
    ``|predicted - truth| / sigma_k`` score at the evenly split level
    ``1 - alpha/|support|``; sampling one time per episode matches level 2.
    The monitor's radius is the worst per-coordinate quantile (the number
    reported alongside other monitors); the per-coordinate radii are kept for
    interval construction. The full symmetric score matrix is cached, so
    radii for other formulas remain recomputable.
    """
    if not episodes:
        raise ValueError("calibration needs at least one episode")
    m = episodes[0].m
    h = horizon(f)
    k_max = max(h, k_max if k_max is not None else 0)
    width = k_max + 1
    dim = m * width
    if sigma_predicates is None:
        sigma_predicates = np.ones(m)
    sigma_predicates = np.asarray(sigma_predicates, dtype=float)
    if sigma_predicates.shape != (m,):
        raise ValueError(f"sigma_predicates must have shape ({m},)")
    if not (sigma_predicates > 0).all():
        raise ValueError("sigma_predicates must be strictly positive")
    sigma = np.repeat(sigma_predicates, width)

    rows = np.empty((len(episodes), dim), dtype=float)
    for i, ep in enumerate(episodes):
        if ep.m != m:
            raise ValueError("episodes disagree on predicate count")
        predicted = np.asarray(predictor.predict(ep), dtype=float)
        if predicted.shape != ep.mu.shape:
            raise ValueError(
                f"predictor/basis mismatch: predictor gave {predicted.shape}, "
                f"per-step predicates need {ep.mu.shape}"
            )
        step_scores = np.abs(predicted - ep.mu)
        tau = sample_level2_time(tau_seed, i, k_max, ep.T)
        stacked = _stack_lags(step_scores, k_max)
        rows[i] = stacked[:, tau - k_max] / sigma

    cache = ScoreCache(rows, 2, tau_seed, symmetric=True)
    support = history_support_indices(f, k_max)
    alpha_c = alpha / len(support)
    coord = {c: split_quantile(rows[:, c], alpha_c) for c in sorted(support)}
    radii = np.zeros(dim)
    for c, q in coord.items():
        radii[c] = q
    return CalibratedMonitor(
        kind="observer",
        level=2,
        alpha=alpha,
        radius=max(coord.values()),
        sigma=sigma,
        n_calibration=len(episodes),
        seed=tau_seed,
        m=m,
        k_max=k_max,
        support=support,
        cache=cache,
        formula=format_formula(f),
        coord_radii=radii,
    )


def interval_propagate(
    f: Formula,
    lower: np.ndarray,
    upper: np.ndarray,
    m: int,
    k_max: int,
) -> tuple[float, float]:
    """Push per-coordinate history intervals through a formula.

    ``lower`` and ``upper`` bracket each predicate-history coordinate. Since
    every operator is a monotone min/max, interval arithmetic reduces to
    decoding each endpoint vector; the result brackets the true robustness
    whenever the inputs bracket the true history.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if lo.shape != hi.shape:
        raise ValueError(f"bound shapes differ: {lo.shape} vs {hi.shape}")
    if (lo > hi).any():
        bad = int(np.argmax(lo > hi))
        raise ValueError(f"crossed bounds at coordinate {bad}: {lo[bad]} > {hi[bad]}")
    d = compile_history_decoder(f, m, k_max)
    return decode_values(d, lo), decode_values(d, hi)


# ---------------------------------------------------------------------------
# Monitor persistence
# ---------------------------------------------------------------------------


def save_monitor(mon: CalibratedMonitor, path: str | Path, cache_path: str | Path | None = None) -> None:
    """Write a monitor as JSON, with its score cache in a sibling ``.npz``.

    ``score_cache_path`` inside the JSON is stored relative to the JSON file
    so the pair can be moved together.
    """
    path = Path(path)
    obj: dict = {
        "version": MONITOR_VERSION,
        "kind": mon.kind,
        "level": mon.level,
        "alpha": mon.alpha,
        "radius": mon.radius,
        "sigma": mon.sigma.tolist(),
        "n": mon.n_calibration,
        "seed": mon.seed,
        "support": sorted(mon.support) if mon.support is not None else None,
        "formula": mon.formula,
        "coord_radii": mon.coord_radii.tolist() if mon.coord_radii is not None else None,
        "predictor": mon.predictor_config,
    }
    if mon.kind == "semantic":
        obj["dictionary"] = dictionary_to_json(mon.dictionary)
    else:
        obj["m"] = mon.m
        obj["k_max"] = mon.k_max
    if mon.cache is not None:
        if cache_path is None:
            cache_path = path.with_suffix(".scores.npz")
        cache_path = Path(cache_path)
        save_score_cache(mon.cache, cache_path)
        try:
            obj["score_cache_path"] = str(cache_path.relative_to(path.parent))
        except ValueError:
            obj["score_cache_path"] = str(cache_path)
    else:
        obj["score_cache_path"] = None
    path.write_text(json.dumps(obj, indent=2))


def load_monitor(path: str | Path) -> CalibratedMonitor:
    path = Path(path)
    obj = json.loads(path.read_text())
    version = int(obj.get("version", 0))
    if version != MONITOR_VERSION:
        raise ValueError(f"unsupported monitor version {version}")
    cache = None
    if obj.get("score_cache_path"):
        cache_path = Path(obj["score_cache_path"])
        if not cache_path.is_absolute():
            cache_path = path.parent / cache_path
        cache = load_score_cache(cache_path)
    dictionary = dictionary_from_json(obj["dictionary"]) if "dictionary" in obj else None
    support = obj.get("support")
    coord_radii = obj.get("coord_radii")
    return CalibratedMonitor(
        kind=obj["kind"],
        level=int(obj["level"]),
        alpha=float(obj["alpha"]),
        radius=float(obj["radius"]),
        sigma=np.asarray(obj["sigma"], dtype=float),
        n_calibration=int(obj["n"]),
        seed=int(obj["seed"]),
        dictionary=dictionary,
        m=obj.get("m"),
        k_max=obj.get("k_max"),
        support=frozenset(support) if support is not None else None,
        cache=cache,
        formula=obj.get("formula"),
        coord_radii=np.asarray(coord_radii, dtype=float) if coord_radii is not None else None,
        predictor_config=obj.get("predictor"),
    )
