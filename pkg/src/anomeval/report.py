"""Tab-separated output files and the null-distribution text report.

All files are gnuplot-friendly: a single '#' header line naming the
columns, then tab-separated rows. Measures and probabilities are printed
with 6 significant digits, counts as plain integers, undefined cells as
"nan".
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .significance import FitDiagnostics, NullDistribution, binomial_cdf
from .toleval import SweepResult


def fmt(value: float) -> str:
    """6-significant-digit rendering; NaN becomes 'nan'."""
    return f"{float(value):.6g}"


def write_sweep_tables(sweep: SweepResult, recall_path, precision_path) -> None:
    """One file per measure: rows are quantiles, one column per tolerance."""
    _write_measure_table(recall_path, sweep.quantiles, sweep.deltas, sweep.recall)
    _write_measure_table(precision_path, sweep.quantiles, sweep.deltas, sweep.precision)


def _write_measure_table(path, quantiles, deltas, values: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# quantile\t" + "\t".join(f"delta={d}" for d in deltas) + "\n")
        for i, q in enumerate(quantiles):
            row = "\t".join(fmt(values[i, j]) for j in range(len(deltas)))
            fh.write(f"{fmt(q)}\t{row}\n")


def read_measure_table(path) -> tuple[np.ndarray, list[int], np.ndarray]:
    """Parse a sweep table back into (quantiles, deltas, values)."""
    header, rows = _read_table(path)
    if not header or header[0] != "quantile":
        raise ParseError("missing '# quantile ...' header", path)
    try:
        deltas = [int(name.removeprefix("delta=")) for name in header[1:]]
    except ValueError:
        raise ParseError("malformed delta column names", path) from None
    data = np.array(rows, dtype=np.float64)
    if data.shape[1] != len(deltas) + 1:
        raise ParseError("row width does not match header", path)
    return data[:, 0], deltas, data[:, 1:]


def write_simulated_table(path, quantiles, simulated: np.ndarray, observed) -> None:
    """Rows are quantiles: level, one column per replicate, observed last."""
    n_replicates = simulated.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        sim_names = "\t".join(f"sim{r + 1}" for r in range(n_replicates))
        fh.write(f"# quantile\t{sim_names}\tobserved\n")
        for i, q in enumerate(quantiles):
            sims = "\t".join(fmt(simulated[i, r]) for r in range(n_replicates))
            fh.write(f"{fmt(q)}\t{sims}\t{fmt(observed[i])}\n")


def read_simulated_table(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a simulated-measure table into (quantiles, simulated, observed)."""
    header, rows = _read_table(path)
    if len(header) < 3 or header[0] != "quantile" or header[-1] != "observed":
        raise ParseError("missing '# quantile sim... observed' header", path)
    data = np.array(rows, dtype=np.float64)
    if data.shape[1] != len(header):
        raise ParseError("row width does not match header", path)
    return data[:, 0], data[:, 1:-1], data[:, -1]


def write_null_distribution(path, null: NullDistribution) -> None:
    """Paired columns (k, ecdf) and (k, fitted binomial cdf) over the support."""
    support = np.arange(null.samples[0], null.samples[-1] + 1)
    empirical = np.searchsorted(null.samples, support, side="right") / null.replicates
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# k\tecdf\tk\tbinomial_cdf\n")
        for k, emp in zip(support, empirical):
            fitted = binomial_cdf(null.n_trials, null.p_hat, int(k))
            fh.write(f"{int(k)}\t{fmt(emp)}\t{int(k)}\t{fmt(fitted)}\n")


def read_null_distribution(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse a null-distribution file into (support, ecdf, binomial cdf)."""
    header, rows = _read_table(path)
    if header != ["k", "ecdf", "k", "binomial_cdf"]:
        raise ParseError("missing '# k ecdf k binomial_cdf' header", path)
    data = np.array(rows, dtype=np.float64)
    if data.shape[1] != 4 or not np.array_equal(data[:, 0], data[:, 2]):
        raise ParseError("malformed null-distribution rows", path)
    return data[:, 0].astype(np.int64), data[:, 1], data[:, 3]


def format_pvalue(p: float, replicates: int) -> str:
    """Monte Carlo p-value; the smallest attainable value prints as a bound."""
    if p <= 1.0 / (replicates + 1):
        return f"< {fmt(1.0 / (replicates + 1))}"
    return fmt(p)


def format_null_report(
    *,
    total: int,
    n_events: int,
    n_predictions: int,
    delta: int,
    quantile: float | None,
    tau: float,
    recall_tp: int,
    recall: float,
    recall_pvalue: float,
    recall_diag: FitDiagnostics,
    precision_tp: int,
    precision: float,
    precision_pvalue: float,
    precision_diag: FitDiagnostics,
    replicates: int,
    seed: int,
) -> str:
    """Human-readable significance report for one (delta, threshold) cell."""
    lines = [
        f"steps: {total}",
        f"events: {n_events}",
        f"predictions: {n_predictions}",
        f"delta: {delta}",
        f"quantile: {'-' if quantile is None else fmt(quantile)}",
        f"threshold: {fmt(tau)}",
        f"replicates: {replicates}",
        f"seed: {seed}",
        "",
        f"recall_true_positives: {recall_tp}",
        f"recall: {fmt(recall)}",
        f"recall_p_value: {format_pvalue(recall_pvalue, replicates)}",
        f"recall_ks_distance: {fmt(recall_diag.ks_distance)}",
        f"recall_dispersion_ratio: {_dispersion_line(recall_diag.dispersion_ratio)}",
        "",
        f"precision_true_positives: {precision_tp}",
        f"precision: {fmt(precision)}",
        f"precision_p_value: {format_pvalue(precision_pvalue, replicates)}",
        f"precision_ks_distance: {fmt(precision_diag.ks_distance)}",
        f"precision_dispersion_ratio: {_dispersion_line(precision_diag.dispersion_ratio)}",
    ]
    return "\n".join(lines) + "\n"


def _dispersion_line(ratio: float) -> str:
    if not math.isnan(ratio) and ratio > 1.0:
        return f"{fmt(ratio)} (overdispersed)"
    return fmt(ratio)


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    header: list[str] = []
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if not rows and not header:
                    header = line.lstrip("#").split()
                continue
            rows.append(line.split("\t"))
    if not rows:
        raise ParseError("no data rows", path)
    return header, rows
