import numpy as np
import pytest

from anomeval.cli import main
from anomeval.report import read_measure_table, read_simulated_table
from anomeval.seqdata import load_series


@pytest.fixture
def dataset(tmp_path):
    """A small synthetic series with events planted near its bursts."""
    rng = np.random.default_rng(1234)
    n = 400
    values = rng.poisson(3.0, size=n).astype(float)
    bursts = [60, 130, 200, 260, 330]
    for b in bursts:
        values[b : b + 3] += 40
    series_path = tmp_path / "series.tsv"
    series_path.write_text(
        "".join(f"{t}\t{values[t]}\n" for t in range(n))
    )
    events_path = tmp_path / "events.tsv"
    events_path.write_text("".join(f"{b + 1}\n" for b in bursts))
    return series_path, events_path, n


def _read_bytes(path):
    return path.read_bytes()


class TestScoreCommand:
    def test_writes_one_row_per_step(self, dataset, tmp_path):
        series_path, _, n = dataset
        out = tmp_path / "out"
        rc = main(["score", "--series", str(series_path), "--out", str(out)])
        assert rc == 0
        scores, _ = load_series(out / "scores.tsv")
        assert scores.grid.length == n

    def test_constant_input_constant_scores_after_warmup(self, tmp_path):
        series_path = tmp_path / "c.tsv"
        series_path.write_text("".join(f"{t}\t4.0\n" for t in range(30)))
        out = tmp_path / "out"
        rc = main(["score", "--series", str(series_path), "--out", str(out)])
        assert rc == 0
        scores, _ = load_series(out / "scores.tsv")
        assert np.allclose(scores.values[13:], 4.0 / 5.0, atol=1e-12)

    def test_missing_file_exit_code_and_message(self, tmp_path, capsys):
        rc = main(["score", "--series", str(tmp_path / "nope.tsv"),
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "nope.tsv" in capsys.readouterr().err

    def test_score_then_eval_matches_series_eval(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        out1 = tmp_path / "direct"
        assert main(["eval", "--series", str(series_path), "--events", str(events_path),
                     "--quantiles", "grid:20", "--deltas", "0,2",
                     "--out", str(out1)]) == 0
        out_s = tmp_path / "scored"
        assert main(["score", "--series", str(series_path), "--out", str(out_s)]) == 0
        out2 = tmp_path / "via-scores"
        assert main(["eval", "--scores", str(out_s / "scores.tsv"),
                     "--events", str(events_path),
                     "--quantiles", "grid:20", "--deltas", "0,2",
                     "--out", str(out2)]) == 0
        assert _read_bytes(out1 / "recall.tsv") == _read_bytes(out2 / "recall.tsv")
        assert _read_bytes(out1 / "precision.tsv") == _read_bytes(out2 / "precision.tsv")


class TestEvalCommand:
    def test_table_shapes_and_monotonicity(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        out = tmp_path / "out"
        rc = main(["eval", "--series", str(series_path), "--events", str(events_path),
                   "--quantiles", "grid:50", "--deltas", "0,1,2,4",
                   "--out", str(out)])
        assert rc == 0
        quantiles, deltas, recall = read_measure_table(out / "recall.tsv")
        assert recall.shape == (50, 4)
        assert deltas == [0, 1, 2, 4]
        # recall never increases with the threshold
        assert (np.diff(recall, axis=0) <= 1e-12).all()
        # both measures never decrease with the tolerance
        assert (np.diff(recall, axis=1) >= -1e-12).all()
        _, _, precision = read_measure_table(out / "precision.tsv")
        diffs = np.diff(precision, axis=1)
        assert np.all((diffs >= -1e-12) | np.isnan(diffs))

    def test_requires_exactly_one_scoring_input(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        rc = main(["eval", "--series", str(series_path), "--scores", str(series_path),
                   "--events", str(events_path), "--quantiles", "0.5",
                   "--deltas", "0", "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_warmup_mask_trims_grid(self, dataset, tmp_path):
        series_path, events_path, n = dataset
        out = tmp_path / "masked"
        rc = main(["eval", "--series", str(series_path), "--events", str(events_path),
                   "--quantiles", "0,1", "--deltas", "0", "--warmup-mask",
                   "--out", str(out)])
        assert rc == 0
        # quantile 0 predicts everywhere on the trimmed grid
        _, _, recall = read_measure_table(out / "recall.tsv")
        assert recall[0, 0] == 1.0

    def test_plot_renders_deterministic_figures(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        args = ["eval", "--series", str(series_path), "--events", str(events_path),
                "--quantiles", "grid:10", "--deltas", "0,2", "--plot"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        for name in ("recall.png", "precision.png"):
            data = _read_bytes(out1 / name)
            assert data[:8] == b"\x89PNG\r\n\x1a\n"
            assert data == _read_bytes(out2 / name)

    def test_bad_quantile_list(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        rc = main(["eval", "--series", str(series_path), "--events", str(events_path),
                   "--quantiles", "0.1,abc", "--deltas", "0",
                   "--out", str(tmp_path / "o")])
        assert rc == 2


class TestSimulateCommand:
    def test_file_count_and_layout(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        out = tmp_path / "out"
        rc = main(["simulate", "--series", str(series_path), "--events", str(events_path),
                   "--quantiles", "grid:10", "--deltas", "0,1,2,4",
                   "--replicates", "25", "--seed", "5", "--out", str(out)])
        assert rc == 0
        files = sorted(p.name for p in out.glob("simul-*.tsv"))
        assert len(files) == 8
        quantiles, simulated, observed = read_simulated_table(out / "simul-recall-d2.tsv")
        assert simulated.shape == (10, 25)
        assert observed.shape == (10,)

    def test_single_replicate(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        out = tmp_path / "out"
        rc = main(["simulate", "--series", str(series_path), "--events", str(events_path),
                   "--quantiles", "0.5,0.9", "--deltas", "1",
                   "--replicates", "1", "--out", str(out)])
        assert rc == 0
        _, simulated, _ = read_simulated_table(out / "simul-recall-d1.tsv")
        assert simulated.shape == (2, 1)

    def test_byte_identical_given_seed(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        args = ["simulate", "--series", str(series_path), "--events", str(events_path),
                "--quantiles", "grid:8", "--deltas", "0,2",
                "--replicates", "30", "--seed", "9"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        for name in ("simul-recall-d0.tsv", "simul-precision-d2.tsv"):
            assert _read_bytes(out1 / name) == _read_bytes(out2 / name)


class TestNulldistCommand:
    def test_report_and_distributions(self, dataset, tmp_path, capsys):
        series_path, events_path, _ = dataset
        out = tmp_path / "out"
        rc = main(["nulldist", "--series", str(series_path), "--events", str(events_path),
                   "--delta", "2", "--quantile", "0.9",
                   "--replicates", "2000", "--seed", "3", "--out", str(out)])
        assert rc == 0
        text = (out / "report-d2.txt").read_text()
        for key in (
            "steps:", "events:", "predictions:", "delta: 2", "quantile: 0.9",
            "threshold:", "recall_true_positives:", "recall:", "recall_p_value:",
            "recall_ks_distance:", "recall_dispersion_ratio:",
            "precision_true_positives:", "precision:", "precision_p_value:",
            "precision_ks_distance:", "precision_dispersion_ratio:",
        ):
            assert key in text
        assert (out / "nulldist-recall-d2.tsv").exists()
        assert (out / "nulldist-precision-d2.tsv").exists()
        assert "recall_true_positives:" in capsys.readouterr().out

    def test_informative_scores_give_pvalue_bound(self, dataset, tmp_path):
        # events sit on the bursts, so observed counts beat every replicate
        series_path, events_path, _ = dataset
        out = tmp_path / "out"
        rc = main(["nulldist", "--series", str(series_path), "--events", str(events_path),
                   "--delta", "2", "--quantile", "0.95",
                   "--replicates", "1000", "--seed", "4", "--out", str(out)])
        assert rc == 0
        text = (out / "report-d2.txt").read_text()
        assert "recall_p_value: < " in text
        assert "precision_p_value: < " in text

    def test_small_replicates_warns(self, dataset, tmp_path, capsys):
        series_path, events_path, _ = dataset
        rc = main(["nulldist", "--series", str(series_path), "--events", str(events_path),
                   "--delta", "1", "--quantile", "0.5", "--replicates", "50",
                   "--out", str(tmp_path / "o")])
        assert rc == 0
        assert "warning" in capsys.readouterr().err

    def test_degenerate_events_exit_one(self, dataset, tmp_path, capsys):
        series_path, _, _ = dataset
        empty = tmp_path / "none.tsv"
        empty.write_text("")
        rc = main(["nulldist", "--series", str(series_path), "--events", str(empty),
                   "--delta", "1", "--quantile", "0.5", "--replicates", "1000",
                   "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_byte_identical_across_runs_and_chunks(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        base = ["nulldist", "--series", str(series_path), "--events", str(events_path),
                "--delta", "2", "--quantile", "0.9", "--replicates", "600",
                "--seed", "21"]
        outs = []
        for name, chunks in (("a", "1"), ("b", "1"), ("c", "4")):
            out = tmp_path / name
            assert main(base + ["--chunks", chunks, "--out", str(out)]) == 0
            outs.append(out)
        for name in ("nulldist-recall-d2.tsv", "nulldist-precision-d2.tsv",
                     "report-d2.txt"):
            blobs = {_read_bytes(out / name) for out in outs}
            assert len(blobs) == 1

    def test_plot_renders_figures(self, dataset, tmp_path):
        series_path, events_path, _ = dataset
        out = tmp_path / "out"
        rc = main(["nulldist", "--series", str(series_path), "--events", str(events_path),
                   "--delta", "2", "--quantile", "0.9", "--replicates", "1000",
                   "--seed", "6", "--plot", "--out", str(out)])
        assert rc == 0
        for name in ("nulldist-recall-d2.png", "nulldist-precision-d2.png"):
            assert _read_bytes(out / name)[:8] == b"\x89PNG\r\n\x1a\n"
