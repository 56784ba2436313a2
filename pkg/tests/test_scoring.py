import math

import numpy as np
import pytest

from anomeval.errors import ConfigError
from anomeval.scoring import ScoreSeries, StaLtaConfig, sliding_mean, sta_lta_score
from anomeval.seqdata import InputSeries, TimeGrid


def brute_sliding_mean(values, window):
    """Independent oracle: re-sum every window with exact accumulation."""
    out = []
    for t in range(len(values)):
        chunk = values[max(0, t - window + 1) : t + 1]
        out.append(math.fsum(chunk) / len(chunk))
    return np.array(out)


class TestSlidingMean:
    def test_window_one_is_identity(self):
        assert np.array_equal(sliding_mean([1, 2, 3], 1), [1, 2, 3])

    def test_hand_example(self):
        assert np.array_equal(sliding_mean([1, 2, 3, 4], 2), [1.0, 1.5, 2.5, 3.5])

    def test_window_longer_than_input(self):
        assert np.array_equal(sliding_mean([5], 10), [5.0])

    def test_zero_window_rejected(self):
        with pytest.raises(ConfigError):
            sliding_mean([1.0], 0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            length = int(rng.integers(1, 400))
            values = rng.normal(scale=1e3, size=length)
            window = int(rng.integers(1, 40))
            got = sliding_mean(values, window)
            want = brute_sliding_mean(values, window)
            assert np.max(np.abs(got - want)) <= 1e-9

    def test_long_series_accumulation(self):
        # large offset plus noise stresses the running-sum error growth
        rng = np.random.default_rng(5)
        values = 1e6 + rng.normal(size=50_000)
        got = sliding_mean(values, 14)
        want = brute_sliding_mean(values, 14)
        assert np.max(np.abs(got - want)) <= 1e-9


class TestStaLta:
    def _series(self, values):
        return InputSeries(TimeGrid(0, len(values)), values)

    def test_zero_input(self):
        scores = sta_lta_score(self._series([0, 0, 0, 0]), StaLtaConfig(2, 3))
        assert np.array_equal(scores.scores, [0, 0, 0, 0])

    def test_constant_input(self):
        c = 5.0
        scores = sta_lta_score(self._series([c] * 12), StaLtaConfig(4, 4))
        assert np.allclose(scores.scores, c / (c + 1), atol=1e-12)

    def test_impulse_after_quiet(self):
        scores = sta_lta_score(self._series([0, 0, 0, 0, 0, 0, 12]), StaLtaConfig(3, 6))
        assert scores.scores[6] == pytest.approx(4 / 3, abs=1e-12)
        assert np.array_equal(scores.scores[:6], np.zeros(6))

    def test_matches_sliding_mean_definition(self):
        rng = np.random.default_rng(11)
        values = rng.random(100) * 10
        config = StaLtaConfig(3, 14)
        scores = sta_lta_score(self._series(values), config)
        sta = brute_sliding_mean(values, 3)
        lta = brute_sliding_mean(values, 14)
        assert np.allclose(scores.scores, sta / (lta + 1), atol=1e-12)

    def test_non_negative_for_non_negative_input(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            values = rng.random(int(rng.integers(1, 80))) * 100
            scores = sta_lta_score(self._series(values))
            assert (scores.scores >= 0).all()

    def test_default_windows(self):
        config = StaLtaConfig()
        assert (config.sta_window, config.lta_window) == (3, 14)

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            StaLtaConfig(0, 5)
        with pytest.raises(ConfigError):
            StaLtaConfig(6, 5)


class TestScoreSeries:
    def test_rejects_non_finite(self):
        with pytest.raises(ConfigError):
            ScoreSeries(TimeGrid(0, 2), [1.0, np.inf])

    def test_does_not_freeze_caller_array(self):
        values = np.array([1.0, 2.0, 3.0])
        ScoreSeries(TimeGrid(0, 3), values)
        values[0] = 9.0  # caller's buffer must stay writable
