"""Anomaly scores computed from input series.

The built-in detector is the ratio of a short-term trailing average to a
long-term trailing average, an energy transient score that reacts to
drastic changes in the level of the series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .seqdata import InputSeries, TimeGrid


@dataclass(frozen=True)
class StaLtaConfig:
    """Window lengths, in steps, for the short- and long-term averages."""

    sta_window: int = 3
    lta_window: int = 14

    def __post_init__(self):
        if self.sta_window < 1 or self.lta_window < 1:
            raise ConfigError("window lengths must be positive")
        if self.sta_window > self.lta_window:
            raise ConfigError(
                f"sta_window ({self.sta_window}) must not exceed "
                f"lta_window ({self.lta_window})"
            )


@dataclass(frozen=True, eq=False)
class ScoreSeries:
    """An anomaly score per grid step; high scores mark likely anomalies."""

    grid: TimeGrid
    scores: np.ndarray

    def __post_init__(self):
        # copy so freezing never touches a caller-owned buffer
        scores = np.array(self.scores, dtype=np.float64)
        if scores.ndim != 1 or scores.size != self.grid.length:
            raise ConfigError(
                f"score series has {scores.size} scores for a grid of length "
                f"{self.grid.length}"
            )
        if not np.all(np.isfinite(scores)):
            raise ConfigError("scores must all be finite")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)


def sliding_mean(values, window: int) -> np.ndarray:
    """Trailing mean over the last `window` entries, including the current one.

    At the start of the sequence, where fewer than `window` entries exist,
    the mean is taken over the available prefix, so every position gets a
    value. Runs in O(T) using a compensated running sum, which keeps the
    result within ~1e-9 of exact per-window re-summation even for long
    inputs.
    """
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    values = np.asarray(values, dtype=np.float64)
    data = values.tolist()
    n = len(data)
    out = np.empty(n, dtype=np.float64)
    total = 0.0
    comp = 0.0  # Neumaier correction term
    for t in range(n):
        terms = (data[t],) if t < window else (data[t], -data[t - window])
        for term in terms:
            s = total + term
            if abs(total) >= abs(term):
                comp += (total - s) + term
            else:
                comp += (term - s) + total
            total = s
        width = t + 1 if t < window else window
        out[t] = (total + comp) / width
    return out


def sta_lta_score(series: InputSeries, config: StaLtaConfig | None = None) -> ScoreSeries:
    """Short-term over long-term trailing average of the series.

    The score at step t is STA_t / (LTA_t + 1); the +1 in the denominator
    keeps the score finite even when the long-term average is zero.
    """
    if config is None:
        config = StaLtaConfig()
    sta = sliding_mean(series.values, config.sta_window)
    lta = sliding_mean(series.values, config.lta_window)
    return ScoreSeries(series.grid, sta / (lta + 1.0))
