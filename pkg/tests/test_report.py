import numpy as np
import pytest

from anomeval.errors import ParseError
from anomeval.report import (
    fmt,
    format_pvalue,
    read_measure_table,
    read_null_distribution,
    read_simulated_table,
    write_null_distribution,
    write_simulated_table,
    write_sweep_tables,
)
from anomeval.scoring import ScoreSeries
from anomeval.seqdata import EventSeries, TimeGrid
from anomeval.significance import GROUND_TOLERANT, NullDistribution
from anomeval.toleval import sweep


def _sweep_result(seed=50, n=80):
    rng = np.random.default_rng(seed)
    grid = TimeGrid(0, n)
    events = EventSeries(grid, (rng.random(n) < 0.1).astype(int))
    scores = ScoreSeries(grid, rng.random(n))
    return sweep(events, scores, np.linspace(0, 1, 12), [0, 1, 2, 4])


class TestFormatting:
    def test_six_significant_digits(self):
        assert fmt(0.5598455598455598) == "0.559846"
        assert fmt(1.0) == "1"
        assert fmt(float("nan")) == "nan"
        assert fmt(9.999e-05) == "9.999e-05"

    def test_pvalue_floor_prints_as_bound(self):
        assert format_pvalue(1 / 10_001, 10_000) == "< 9.999e-05"
        assert format_pvalue(0.75, 3) == "0.75"


class TestSweepTables:
    def test_round_trip(self, tmp_path):
        result = _sweep_result()
        recall_path = tmp_path / "recall.tsv"
        precision_path = tmp_path / "precision.tsv"
        write_sweep_tables(result, recall_path, precision_path)

        quantiles, deltas, recall = read_measure_table(recall_path)
        assert deltas == [0, 1, 2, 4]
        assert np.allclose(quantiles, result.quantiles, atol=1e-6)
        assert np.allclose(recall, result.recall, atol=1e-6, equal_nan=True)

        _, _, precision = read_measure_table(precision_path)
        assert np.allclose(precision, result.precision, atol=1e-6, equal_nan=True)

    def test_layout(self, tmp_path):
        result = _sweep_result()
        write_sweep_tables(result, tmp_path / "r.tsv", tmp_path / "p.tsv")
        lines = (tmp_path / "r.tsv").read_text().splitlines()
        assert lines[0] == "# quantile\tdelta=0\tdelta=1\tdelta=2\tdelta=4"
        assert len(lines) == 1 + 12
        assert all(len(line.split("\t")) == 5 for line in lines[1:])


class TestSimulatedTables:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(51)
        quantiles = np.linspace(0, 1, 7)
        simulated = rng.random((7, 9))
        simulated[2, 3] = np.nan
        observed = rng.random(7)
        path = tmp_path / "sim.tsv"
        write_simulated_table(path, quantiles, simulated, observed)
        q2, sim2, obs2 = read_simulated_table(path)
        assert np.allclose(q2, quantiles, atol=1e-6)
        assert np.allclose(sim2, simulated, atol=1e-6, equal_nan=True)
        assert np.allclose(obs2, observed, atol=1e-6)
        header = path.read_text().splitlines()[0].split("\t")
        assert header[0] == "# quantile"
        assert header[-1] == "observed"
        assert len(header) == 1 + 9 + 1


class TestNullDistributionFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(52)
        null = NullDistribution.from_samples(
            GROUND_TOLERANT, rng.binomial(40, 0.35, size=500), 40
        )
        path = tmp_path / "null.tsv"
        write_null_distribution(path, null)
        support, empirical, fitted = read_null_distribution(path)
        assert support[0] == null.samples[0]
        assert support[-1] == null.samples[-1]
        assert np.all(np.diff(support) == 1)
        assert empirical[-1] == 1.0
        assert np.all(np.diff(empirical) >= 0)
        assert np.all(np.diff(fitted) >= -1e-12)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "x.tsv"
        path.write_text("# a\tb\n1\t2\n")
        with pytest.raises(ParseError):
            read_null_distribution(path)
