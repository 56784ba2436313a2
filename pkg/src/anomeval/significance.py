"""Permutation null distributions and Monte Carlo significance.

Both true-positive counts are simulated under the hypothesis that events
are independent of the predictions: the event flags are permuted uniformly
at random (event count preserved) and the counts recomputed at fixed
predictions and tolerance. Each replicate draws its generator from
(seed, replicate index), so results are reproducible and independent of
how the replicates are split across workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import AlignmentError, ConfigError, DegenerateDataError, DomainError
from .scoring import ScoreSeries
from .seqdata import EventSeries
from .toleval import (
    GROUND_TOLERANT,
    PREDICTION_TOLERANT,
    PredictionSeries,
    _dilated,
    _require_same_grid,
    prediction_matrix,
)


@dataclass(frozen=True)
class PermutationPlan:
    """How many replicates to run, from which seed, in how many chunks."""

    replicates: int = 10_000
    seed: int = 0
    parallel_chunks: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.parallel_chunks < 1:
            raise ConfigError(f"parallel_chunks must be >= 1, got {self.parallel_chunks}")


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """Simulated true-positive counts for one matrix side, sorted ascending.

    n_trials is the natural maximum of the statistic (number of predictions
    for the ground-tolerant side, number of events for the prediction-
    tolerant side); p_hat is the moment-matched binomial success
    probability mean(samples) / n_trials.
    """

    statistic: str
    samples: np.ndarray
    n_trials: int
    p_hat: float

    @classmethod
    def from_samples(cls, statistic: str, samples, n_trials: int) -> "NullDistribution":
        if statistic not in (GROUND_TOLERANT, PREDICTION_TOLERANT):
            raise ConfigError(f"unknown statistic {statistic!r}")
        samples = np.sort(np.asarray(samples, dtype=np.int64))
        if samples.size < 1:
            raise ConfigError("a null distribution needs at least one sample")
        if n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if samples[0] < 0 or samples[-1] > n_trials:
            raise ConfigError("samples must lie in [0, n_trials]")
        samples.setflags(write=False)
        p_hat = float(samples.mean() / n_trials)
        return cls(statistic=statistic, samples=samples, n_trials=n_trials, p_hat=p_hat)

    @property
    def replicates(self) -> int:
        return int(self.samples.size)


class NullPair(NamedTuple):
    ground: NullDistribution
    prediction: NullDistribution


class FitDiagnostics(NamedTuple):
    ks_distance: float
    dispersion_ratio: float


def _replicate_rng(seed: int, index: int) -> np.random.Generator:
    # one generator per replicate keeps the simulation chunk-invariant
    return np.random.default_rng([seed, index])


def permute_events(events: EventSeries, rng: np.random.Generator) -> EventSeries:
    """Uniformly random rearrangement of the event flags; count preserved."""
    return EventSeries(events.grid, rng.permutation(events.flags))


def _run_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    """Replicates [start, stop): permute events, record both tp counts."""
    seed, start, stop, event_flags, pred_flags, dilated_preds, lo, hi = args
    n = stop - start
    tp_ground = np.empty(n, dtype=np.int64)
    tp_pred = np.empty(n, dtype=np.int64)
    counts = np.zeros(event_flags.size + 1, dtype=np.int64)
    for i in range(n):
        rng = _replicate_rng(seed, start + i)
        permuted = rng.permutation(event_flags)
        np.cumsum(permuted, out=counts[1:])
        dilated_events = counts[hi] - counts[lo] > 0
        tp_ground[i] = np.count_nonzero(dilated_events & pred_flags)
        tp_pred[i] = np.count_nonzero(permuted & dilated_preds)
    return tp_ground, tp_pred


def simulate_null(
    events: EventSeries,
    preds: PredictionSeries,
    delta: int,
    plan: PermutationPlan,
) -> NullPair:
    """Null distributions of both true-positive counts under permuted events.

    Deterministic given plan.seed, with identical samples for any
    parallel_chunks setting. Raises DegenerateDataError when there are no
    events or no predictions, since both statistics would be constant 0.
    """
    _require_same_grid(events, preds)
    if delta < 0:
        raise ConfigError(f"tolerance must be >= 0, got {delta}")
    if events.n_events == 0:
        raise DegenerateDataError("no events: true-positive counts are degenerately 0")
    if preds.n_predictions == 0:
        raise DegenerateDataError(
            "no predictions: true-positive counts are degenerately 0"
        )

    n = events.grid.length
    steps = np.arange(n)
    lo = np.maximum(steps - delta, 0) if delta else steps
    hi = np.minimum(steps + delta + 1, n) if delta else steps + 1
    dilated_preds = _dilated(preds.flags, delta)
    pred_bool = preds.flags.astype(bool)

    chunks = min(plan.parallel_chunks, plan.replicates)
    edges = [plan.replicates * c // chunks for c in range(chunks + 1)]
    args = [
        (plan.seed, edges[c], edges[c + 1], events.flags, pred_bool, dilated_preds, lo, hi)
        for c in range(chunks)
    ]
    if chunks == 1:
        parts = [_run_chunk(args[0])]
    else:
        workers = min(chunks, os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, args))

    tp_ground = np.concatenate([part[0] for part in parts])
    tp_pred = np.concatenate([part[1] for part in parts])
    return NullPair(
        ground=NullDistribution.from_samples(
            GROUND_TOLERANT, tp_ground, preds.n_predictions
        ),
        prediction=NullDistribution.from_samples(
            PREDICTION_TOLERANT, tp_pred, events.n_events
        ),
    )


def mc_pvalue(null: NullDistribution, observed: int) -> float:
    """Upper-tail Monte Carlo p-value with the add-one convention.

    p = (1 + #{samples >= observed}) / (1 + replicates), so the smallest
    reportable value is 1/(replicates+1), never exactly 0.
    """
    n = null.replicates
    at_least = n - int(np.searchsorted(null.samples, observed, side="left"))
    return (1 + at_least) / (1 + n)


def binomial_cdf(n: int, p: float, k: int) -> float:
    """P(X <= k) for X ~ Binomial(n, p), via the regularized incomplete beta.

    Absolute error stays below 1e-12 for n up to 1e6.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"success probability must be in [0, 1], got {p}")
    if n < 0:
        raise DomainError(f"trial count must be >= 0, got {n}")
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    return float(special.betainc(n - k, k + 1, 1.0 - p))


def ecdf(null: NullDistribution, k: int) -> float:
    """Fraction of samples <= k (right-continuous step function)."""
    return int(np.searchsorted(null.samples, k, side="right")) / null.replicates


def binomial_fit_diagnostics(null: NullDistribution) -> FitDiagnostics:
    """How far the simulated null is from its moment-matched binomial.

    ks_distance is the largest CDF gap over the integer support of the
    samples. dispersion_ratio is sample variance over binomial variance
    n_trials * p_hat * (1 - p_hat); values above 1 signal overdispersion.
    The ratio is UNDEFINED (NaN) when p_hat is 0 or 1.
    """
    if null.replicates < 2:
        raise ConfigError("fit diagnostics need at least 2 replicates")
    support = np.arange(null.samples[0], null.samples[-1] + 1)
    empirical = np.searchsorted(null.samples, support, side="right") / null.replicates
    fitted = np.array([binomial_cdf(null.n_trials, null.p_hat, int(k)) for k in support])
    ks_distance = float(np.max(np.abs(empirical - fitted)))
    binomial_variance = null.n_trials * null.p_hat * (1.0 - null.p_hat)
    if binomial_variance == 0.0:
        dispersion = float("nan")
    else:
        dispersion = float(null.samples.var(ddof=1) / binomial_variance)
    return FitDiagnostics(ks_distance=ks_distance, dispersion_ratio=dispersion)


@dataclass(frozen=True, eq=False)
class SimulatedMeasures:
    """Per-replicate tolerant measures on permuted events.

    recall[j, i, r] and precision[j, i, r] hold the measure for
    deltas[j], quantiles[i], replicate r; undefined measures are NaN.
    """

    quantiles: tuple[float, ...]
    deltas: tuple[int, ...]
    thresholds: np.ndarray
    recall: np.ndarray
    precision: np.ndarray


def simulate_measures(
    events: EventSeries,
    scores: ScoreSeries,
    quantiles,
    deltas,
    plan: PermutationPlan,
    curves: int = 100,
) -> SimulatedMeasures:
    """Tolerant precision and recall curves for permuted event series.

    Evaluates the first min(curves, plan.replicates) replicates of the
    permutation stream defined by plan.seed; the same replicate index
    yields the same permutation as simulate_null, so overlay curves and
    null distributions describe the same simulated worlds.
    """
    if events.grid != scores.grid:
        raise AlignmentError("events and scores are on different grids")
    if curves < 1:
        raise ConfigError(f"curves must be >= 1, got {curves}")
    if events.n_events == 0:
        raise DegenerateDataError("no events: recall is undefined everywhere")
    quantiles = tuple(float(q) for q in quantiles)
    deltas = tuple(int(d) for d in deltas)
    if not quantiles or not deltas:
        raise ConfigError("quantile and delta lists must be non-empty")

    taus, pred_flags = prediction_matrix(scores, quantiles)
    preds_int = pred_flags.astype(np.int64)
    n_preds = preds_int.sum(axis=1)
    n_replicates = min(curves, plan.replicates)
    n_q, n_d = len(quantiles), len(deltas)

    recall = np.empty((n_d, n_q, n_replicates))
    precision = np.full((n_d, n_q, n_replicates), np.nan)
    dilated_preds = [_dilated(pred_flags, d).astype(np.int64) for d in deltas]
    defined = n_preds > 0
    for r in range(n_replicates):
        rng = _replicate_rng(plan.seed, r)
        permuted = rng.permutation(events.flags)
        permuted_int = permuted.astype(np.int64)
        for j, d in enumerate(deltas):
            recall[j, :, r] = (dilated_preds[j] @ permuted_int) / events.n_events
            dilated_events = _dilated(permuted, d).astype(np.int64)
            tp_ground = preds_int @ dilated_events
            precision[j, defined, r] = tp_ground[defined] / n_preds[defined]
    return SimulatedMeasures(
        quantiles=quantiles,
        deltas=deltas,
        thresholds=taus,
        recall=recall,
        precision=precision,
    )
