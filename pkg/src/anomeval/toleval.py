"""Time-tolerant evaluation of point predictions against point events.

Precision and recall with temporal tolerance come from two distinct
confusion matrices: one dilates the ground-truth events by the tolerance
window (used for precision), the other dilates the predictions (used for
recall). Each matrix partitions all T time steps, but only the measure
named above is interpretable for each side, so the measure functions
refuse matrices of the wrong side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AlignmentError, ConfigError, MatrixSideError
from .scoring import ScoreSeries
from .seqdata import EventSeries, TimeGrid

GROUND_TOLERANT = "ground_tolerant"
PREDICTION_TOLERANT = "prediction_tolerant"

#: Returned by precision/recall when the normalizing marginal is zero.
#: Serialized as "nan" in all output files; test with math.isnan.
UNDEFINED = math.nan


@dataclass(frozen=True)
class Threshold:
    """A detection threshold, given either directly or as a quantile level."""

    kind: str  # "absolute" or "quantile"
    value: float

    def __post_init__(self):
        if self.kind not in ("absolute", "quantile"):
            raise ConfigError(f"unknown threshold kind {self.kind!r}")
        if self.kind == "quantile" and not 0.0 <= self.value <= 1.0:
            raise ConfigError(f"quantile level must be in [0, 1], got {self.value}")

    @classmethod
    def absolute(cls, value: float) -> "Threshold":
        return cls("absolute", float(value))

    @classmethod
    def quantile(cls, level: float) -> "Threshold":
        return cls("quantile", float(level))


@dataclass(frozen=True, eq=False)
class PredictionSeries:
    """A binary prediction per grid step: score at or above the threshold."""

    grid: TimeGrid
    flags: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.flags)
        if flags.ndim != 1 or flags.size != self.grid.length:
            raise ConfigError(
                f"prediction series has {flags.size} flags for a grid of length "
                f"{self.grid.length}"
            )
        if not np.isin(flags, (0, 1)).all():
            raise ConfigError("prediction flags must be 0 or 1")
        flags = flags.astype(np.uint8)
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)

    @property
    def n_predictions(self) -> int:
        return int(self.flags.sum())


@dataclass(frozen=True)
class TolerantConfusionMatrix:
    """Counts of a relaxed confusion matrix over all T time steps.

    `side` records which side of the comparison was dilated by the
    tolerance window: the ground-truth events (the matrix behind tolerant
    precision) or the predictions (the matrix behind tolerant recall).
    """

    side: str
    delta: int
    tp: int
    fp: int
    fn: int
    tn: int
    total: int

    def __post_init__(self):
        if self.side not in (GROUND_TOLERANT, PREDICTION_TOLERANT):
            raise ConfigError(f"unknown matrix side {self.side!r}")
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ConfigError("confusion matrix cells must be non-negative")
        if self.tp + self.fp + self.fn + self.tn != self.total:
            raise ConfigError("confusion matrix cells must sum to the total")

    @property
    def predicted_positive(self) -> int:
        """Row marginal: steps predicted positive (dilated for the prediction side)."""
        return self.tp + self.fp

    @property
    def actual_positive(self) -> int:
        """Column marginal: actual-anomaly steps (dilated for the ground side)."""
        return self.tp + self.fn


def resolve_threshold(scores: ScoreSeries, threshold: Threshold) -> float:
    """Turn a threshold spec into an absolute score value.

    Quantile thresholds use the nearest-rank estimator: the k-th smallest
    score with k = ceil(q * T), and the minimum score for q = 0.
    """
    if threshold.kind == "absolute":
        return float(threshold.value)
    return _nearest_rank(np.sort(scores.scores), threshold.value)


def _nearest_rank(sorted_scores: np.ndarray, level: float) -> float:
    if not 0.0 <= level <= 1.0:
        raise ConfigError(f"quantile level must be in [0, 1], got {level}")
    n = sorted_scores.size
    k = math.ceil(level * n)
    return float(sorted_scores[max(k, 1) - 1])


def predict(scores: ScoreSeries, tau: float) -> PredictionSeries:
    """Flag every step whose score is >= tau (ties are predictions)."""
    return PredictionSeries(scores.grid, scores.scores >= tau)


def dilate(flags, delta: int) -> np.ndarray:
    """Windowed OR of a binary sequence over [t-delta, t+delta].

    Indices outside the sequence contribute 0 (zero-padding at the
    boundaries). delta=0 returns a copy of the input.
    """
    if delta < 0:
        raise ConfigError(f"tolerance must be >= 0, got {delta}")
    flags = np.asarray(flags)
    if not np.isin(flags, (0, 1)).all():
        raise ConfigError("flags must be 0 or 1")
    return _dilated(flags.astype(np.uint8), delta)


def _dilated(flags: np.ndarray, delta: int) -> np.ndarray:
    """dilate() without validation, for 1-D or row-wise 2-D uint8 input."""
    if delta == 0:
        return flags.copy()
    n = flags.shape[-1]
    counts = np.zeros(flags.shape[:-1] + (n + 1,), dtype=np.int64)
    np.cumsum(flags, axis=-1, out=counts[..., 1:])
    lo = np.maximum(np.arange(n) - delta, 0)
    hi = np.minimum(np.arange(n) + delta + 1, n)
    return (counts[..., hi] - counts[..., lo] > 0).astype(np.uint8)


def _require_same_grid(events: EventSeries, preds: PredictionSeries) -> None:
    if events.grid != preds.grid:
        raise AlignmentError("events and predictions are on different grids")


def _counts(base_positive: np.ndarray, dilated_positive: np.ndarray, total: int):
    """Cells from the two indicator vectors; exact integer arithmetic."""
    tp = int(np.count_nonzero(base_positive & dilated_positive))
    n_base = int(np.count_nonzero(base_positive))
    n_dilated = int(np.count_nonzero(dilated_positive))
    return tp, n_base, n_dilated, total - n_base - n_dilated + tp


def confusion_ground_tolerant(
    events: EventSeries, preds: PredictionSeries, delta: int
) -> TolerantConfusionMatrix:
    """Relaxed confusion matrix with tolerance applied to the ground truth.

    A predicted step counts as a true positive when an actual anomaly lies
    within delta steps of it. The row marginal tp+fp equals the number of
    predictions; the column marginal tp+fn equals the number of steps with
    an event within delta.
    """
    _require_same_grid(events, preds)
    dilated_events = _dilated(events.flags, delta)
    tp, n_preds, n_dilated, tn = _counts(preds.flags, dilated_events, events.grid.length)
    return TolerantConfusionMatrix(
        side=GROUND_TOLERANT,
        delta=delta,
        tp=tp,
        fp=n_preds - tp,
        fn=n_dilated - tp,
        tn=tn,
        total=events.grid.length,
    )


def confusion_prediction_tolerant(
    events: EventSeries, preds: PredictionSeries, delta: int
) -> TolerantConfusionMatrix:
    """Relaxed confusion matrix with tolerance applied to the predictions.

    An actual-anomaly step counts as a true positive when a prediction lies
    within delta steps of it. The column marginal tp+fn equals the number
    of events; the row marginal tp+fp equals the number of steps with a
    prediction within delta.
    """
    _require_same_grid(events, preds)
    dilated_preds = _dilated(preds.flags, delta)
    tp, n_events, n_dilated, tn = _counts(events.flags, dilated_preds, events.grid.length)
    return TolerantConfusionMatrix(
        side=PREDICTION_TOLERANT,
        delta=delta,
        tp=tp,
        fp=n_dilated - tp,
        fn=n_events - tp,
        tn=tn,
        total=events.grid.length,
    )


def precision_tolerant(matrix: TolerantConfusionMatrix) -> float:
    """tp / (tp + fp) of the ground-tolerant matrix; UNDEFINED when tp+fp = 0.

    Only the ground-tolerant matrix yields an interpretable precision, so
    any other side raises MatrixSideError.
    """
    if matrix.side != GROUND_TOLERANT:
        raise MatrixSideError(
            "tolerant precision requires the ground-tolerant matrix, "
            f"got {matrix.side!r}"
        )
    denominator = matrix.tp + matrix.fp
    return matrix.tp / denominator if denominator else UNDEFINED


def recall_tolerant(matrix: TolerantConfusionMatrix) -> float:
    """tp / (tp + fn) of the prediction-tolerant matrix; UNDEFINED when tp+fn = 0.

    Only the prediction-tolerant matrix yields an interpretable recall, so
    any other side raises MatrixSideError.
    """
    if matrix.side != PREDICTION_TOLERANT:
        raise MatrixSideError(
            "tolerant recall requires the prediction-tolerant matrix, "
            f"got {matrix.side!r}"
        )
    denominator = matrix.tp + matrix.fn
    return matrix.tp / denominator if denominator else UNDEFINED


def prediction_matrix(
    scores: ScoreSeries, quantiles
) -> tuple[np.ndarray, np.ndarray]:
    """Resolved thresholds and the (len(quantiles), T) prediction-flag matrix."""
    sorted_scores = np.sort(scores.scores)
    taus = np.array([_nearest_rank(sorted_scores, q) for q in quantiles])
    flags = (scores.scores[None, :] >= taus[:, None]).astype(np.uint8)
    return taus, flags


class SweepCell(NamedTuple):
    quantile: float
    tau: float
    delta: int
    ground: TolerantConfusionMatrix
    prediction: TolerantConfusionMatrix
    precision: float
    recall: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Both matrices and both measures for every (quantile, delta) pair.

    precision[i, j] and recall[i, j] belong to quantiles[i] and deltas[j];
    undefined measures are NaN.
    """

    quantiles: tuple[float, ...]
    deltas: tuple[int, ...]
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    ground: tuple[tuple[TolerantConfusionMatrix, ...], ...]
    prediction: tuple[tuple[TolerantConfusionMatrix, ...], ...]

    def cell(self, i: int, j: int) -> SweepCell:
        return SweepCell(
            quantile=self.quantiles[i],
            tau=float(self.thresholds[i]),
            delta=self.deltas[j],
            ground=self.ground[i][j],
            prediction=self.prediction[i][j],
            precision=float(self.precision[i, j]),
            recall=float(self.recall[i, j]),
        )


def sweep(events: EventSeries, scores: ScoreSeries, quantiles, deltas) -> SweepResult:
    """Evaluate every (quantile threshold, tolerance) combination.

    Cells are independent; the computation batches them through integer
    matrix products, so results are bit-identical to cell-by-cell
    evaluation with confusion_ground_tolerant / confusion_prediction_tolerant.
    """
    if events.grid != scores.grid:
        raise AlignmentError("events and scores are on different grids")
    quantiles = tuple(float(q) for q in quantiles)
    deltas = tuple(int(d) for d in deltas)
    if not quantiles or not deltas:
        raise ConfigError("quantile and delta lists must be non-empty")
    for d in deltas:
        if d < 0:
            raise ConfigError(f"tolerance must be >= 0, got {d}")

    total = events.grid.length
    taus, pred_flags = prediction_matrix(scores, quantiles)
    preds_int = pred_flags.astype(np.int64)
    n_preds = preds_int.sum(axis=1)  # per quantile
    event_int = events.flags.astype(np.int64)
    n_events = events.n_events

    n_q, n_d = len(quantiles), len(deltas)
    tp_ground = np.empty((n_q, n_d), dtype=np.int64)
    tp_pred = np.empty((n_q, n_d), dtype=np.int64)
    n_dilated_events = np.empty(n_d, dtype=np.int64)
    n_dilated_preds = np.empty((n_q, n_d), dtype=np.int64)
    for j, d in enumerate(deltas):
        dilated_events = _dilated(events.flags, d).astype(np.int64)
        n_dilated_events[j] = dilated_events.sum()
        tp_ground[:, j] = preds_int @ dilated_events
        dilated_preds = _dilated(pred_flags, d).astype(np.int64)
        n_dilated_preds[:, j] = dilated_preds.sum(axis=1)
        tp_pred[:, j] = dilated_preds @ event_int

    precision = np.full((n_q, n_d), np.nan)
    defined = n_preds > 0
    precision[defined] = tp_ground[defined] / n_preds[defined, None]
    if n_events > 0:
        recall = tp_pred / float(n_events)
    else:
        recall = np.full((n_q, n_d), np.nan)

    ground_rows = []
    pred_rows = []
    for i in range(n_q):
        g_row = []
        p_row = []
        for j, d in enumerate(deltas):
            tp = int(tp_ground[i, j])
            g_row.append(
                TolerantConfusionMatrix(
                    side=GROUND_TOLERANT,
                    delta=d,
                    tp=tp,
                    fp=int(n_preds[i]) - tp,
                    fn=int(n_dilated_events[j]) - tp,
                    tn=total - int(n_preds[i]) - int(n_dilated_events[j]) + tp,
                    total=total,
                )
            )
            tp = int(tp_pred[i, j])
            p_row.append(
                TolerantConfusionMatrix(
                    side=PREDICTION_TOLERANT,
                    delta=d,
                    tp=tp,
                    fp=int(n_dilated_preds[i, j]) - tp,
                    fn=n_events - tp,
                    tn=total - int(n_dilated_preds[i, j]) - n_events + tp,
                    total=total,
                )
            )
        ground_rows.append(tuple(g_row))
        pred_rows.append(tuple(p_row))

    return SweepResult(
        quantiles=quantiles,
        deltas=deltas,
        thresholds=taus,
        precision=precision,
        recall=recall,
        ground=tuple(ground_rows),
        prediction=tuple(pred_rows),
    )
