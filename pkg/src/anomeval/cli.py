"""Command-line frontend.

Subcommands:
  score     compute the short/long-average score for a series file
  eval      precision/recall tables over a threshold-quantile x tolerance grid
  simulate  per-replicate measure curves under permuted events, plus observed
  nulldist  null distributions, p-values and binomial-fit diagnostics for one cell

Exit codes: 0 success, 1 degenerate data (no events or no predictions),
2 I/O or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import figures, report
from .errors import AnomevalError, ConfigError, DegenerateDataError
from .scoring import ScoreSeries, StaLtaConfig, sta_lta_score
from .seqdata import EventSeries, TimeGrid, load_events, load_series, write_series
from .significance import (
    PermutationPlan,
    binomial_fit_diagnostics,
    mc_pvalue,
    simulate_measures,
    simulate_null,
)
from .toleval import (
    Threshold,
    confusion_ground_tolerant,
    confusion_prediction_tolerant,
    precision_tolerant,
    predict,
    recall_tolerant,
    resolve_threshold,
    sweep,
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; built from parsed CLI arguments."""

    out: Path
    series: Path | None = None
    events: Path | None = None
    scores: Path | None = None
    sta: int = 3
    lta: int = 14
    quantiles: tuple[float, ...] = ()
    deltas: tuple[int, ...] = ()
    replicates: int = 10_000
    seed: int = 0
    chunks: int = 1
    curves: int = 100
    delta: int | None = None
    quantile: float | None = None
    warmup_mask: bool = False
    plot: bool = False


def _parse_quantiles(text: str) -> tuple[float, ...]:
    """Comma-separated levels, or 'grid:N' for N evenly spaced levels in [0, 1]."""
    text = text.strip()
    if text.startswith("grid:"):
        try:
            n = int(text.removeprefix("grid:"))
        except ValueError:
            raise ConfigError(f"invalid quantile grid spec {text!r}") from None
        if n < 1:
            raise ConfigError("quantile grid size must be >= 1")
        if n == 1:
            return (0.0,)
        return tuple(float(q) for q in np.linspace(0.0, 1.0, n))
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"invalid quantile list {text!r}") from None


def _parse_deltas(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"invalid delta list {text!r}") from None


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _note(message: str) -> None:
    print(message)


def _load_score_series(cfg: RunConfig) -> ScoreSeries:
    """Scores from --scores directly, or computed from --series."""
    if (cfg.series is None) == (cfg.scores is None):
        raise ConfigError("provide exactly one of --series and --scores")
    if cfg.scores is not None:
        series, ingest = load_series(cfg.scores)
        for note in ingest.warnings():
            _warn(f"{cfg.scores}: {note}")
        return ScoreSeries(series.grid, series.values)
    series, ingest = load_series(cfg.series)
    for note in ingest.warnings():
        _warn(f"{cfg.series}: {note}")
    return sta_lta_score(series, StaLtaConfig(cfg.sta, cfg.lta))


def _load_eval_inputs(cfg: RunConfig) -> tuple[EventSeries, ScoreSeries]:
    scores = _load_score_series(cfg)
    if cfg.events is None:
        raise ConfigError("--events is required")
    events, ingest = load_events(cfg.events, scores.grid)
    for note in ingest.warnings():
        _warn(f"{cfg.events}: {note}")
    if cfg.warmup_mask:
        events, scores = _trim_warmup(events, scores, cfg.lta)
    return events, scores


def _trim_warmup(
    events: EventSeries, scores: ScoreSeries, lta_window: int
) -> tuple[EventSeries, ScoreSeries]:
    """Drop the first lta_window - 1 steps from the evaluation."""
    skip = lta_window - 1
    if skip <= 0:
        return events, scores
    if skip >= scores.grid.length:
        raise ConfigError("warmup mask would remove the entire series")
    grid = TimeGrid(scores.grid.timestamp(skip), scores.grid.length - skip)
    return (
        EventSeries(grid, events.flags[skip:]),
        ScoreSeries(grid, scores.scores[skip:]),
    )


def _outdir(cfg: RunConfig) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg.out


def cmd_score(cfg: RunConfig) -> None:
    if cfg.series is None:
        raise ConfigError("--series is required for scoring")
    if cfg.scores is not None:
        raise ConfigError("--scores makes no sense for the score command")
    scores = _load_score_series(cfg)
    out = _outdir(cfg) / "scores.tsv"
    write_series(out, scores.grid, scores.scores, value_column="score")
    _note(f"wrote {out}")


def cmd_eval(cfg: RunConfig) -> None:
    if not cfg.quantiles or not cfg.deltas:
        raise ConfigError("--quantiles and --deltas are required")
    events, scores = _load_eval_inputs(cfg)
    result = sweep(events, scores, cfg.quantiles, cfg.deltas)
    outdir = _outdir(cfg)
    recall_path = outdir / "recall.tsv"
    precision_path = outdir / "precision.tsv"
    report.write_sweep_tables(result, recall_path, precision_path)
    _note(f"wrote {recall_path}")
    _note(f"wrote {precision_path}")
    if cfg.plot:
        figures.plot_sweep(result, outdir / "recall.png", outdir / "precision.png")
        _note(f"wrote {outdir / 'recall.png'}")
        _note(f"wrote {outdir / 'precision.png'}")


def cmd_simulate(cfg: RunConfig) -> None:
    if not cfg.quantiles or not cfg.deltas:
        raise ConfigError("--quantiles and --deltas are required")
    events, scores = _load_eval_inputs(cfg)
    plan = PermutationPlan(cfg.replicates, cfg.seed, cfg.chunks)
    simulated = simulate_measures(
        events, scores, cfg.quantiles, cfg.deltas, plan, curves=cfg.curves
    )
    observed = sweep(events, scores, cfg.quantiles, cfg.deltas)
    outdir = _outdir(cfg)
    for j, d in enumerate(cfg.deltas):
        for measure, sim, obs in (
            ("recall", simulated.recall[j], observed.recall[:, j]),
            ("precision", simulated.precision[j], observed.precision[:, j]),
        ):
            path = outdir / f"simul-{measure}-d{d}.tsv"
            report.write_simulated_table(path, cfg.quantiles, sim, obs)
            _note(f"wrote {path}")
            if cfg.plot:
                png = outdir / f"simul-{measure}-d{d}.png"
                figures.plot_simulated(cfg.quantiles, sim, obs, measure, d, png)
                _note(f"wrote {png}")


def cmd_nulldist(cfg: RunConfig) -> None:
    if cfg.delta is None or cfg.quantile is None:
        raise ConfigError("--delta and --quantile are required")
    if cfg.replicates < 1000:
        _warn(f"only {cfg.replicates} replicates; p-values are coarse below 1000")
    events, scores = _load_eval_inputs(cfg)
    tau = resolve_threshold(scores, Threshold.quantile(cfg.quantile))
    preds = predict(scores, tau)
    ground = confusion_ground_tolerant(events, preds, cfg.delta)
    prediction = confusion_prediction_tolerant(events, preds, cfg.delta)
    plan = PermutationPlan(cfg.replicates, cfg.seed, cfg.chunks)
    null = simulate_null(events, preds, cfg.delta, plan)

    outdir = _outdir(cfg)
    recall_path = outdir / f"nulldist-recall-d{cfg.delta}.tsv"
    precision_path = outdir / f"nulldist-precision-d{cfg.delta}.tsv"
    report.write_null_distribution(recall_path, null.prediction)
    report.write_null_distribution(precision_path, null.ground)

    text = report.format_null_report(
        total=events.grid.length,
        n_events=events.n_events,
        n_predictions=preds.n_predictions,
        delta=cfg.delta,
        quantile=cfg.quantile,
        tau=tau,
        recall_tp=prediction.tp,
        recall=recall_tolerant(prediction),
        recall_pvalue=mc_pvalue(null.prediction, prediction.tp),
        recall_diag=binomial_fit_diagnostics(null.prediction),
        precision_tp=ground.tp,
        precision=precision_tolerant(ground),
        precision_pvalue=mc_pvalue(null.ground, ground.tp),
        precision_diag=binomial_fit_diagnostics(null.ground),
        replicates=plan.replicates,
        seed=plan.seed,
    )
    report_path = outdir / f"report-d{cfg.delta}.txt"
    report_path.write_text(text, encoding="utf-8")
    print(text, end="")
    _note(f"wrote {recall_path}")
    _note(f"wrote {precision_path}")
    _note(f"wrote {report_path}")
    if cfg.plot:
        recall_png = outdir / f"nulldist-recall-d{cfg.delta}.png"
        precision_png = outdir / f"nulldist-precision-d{cfg.delta}.png"
        figures.plot_null_distribution(
            null.prediction, "true positives (prediction tolerant)", recall_png
        )
        figures.plot_null_distribution(
            null.ground, "true positives (ground tolerant)", precision_png
        )
        _note(f"wrote {recall_png}")
        _note(f"wrote {precision_png}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anomeval",
        description="Time-tolerant evaluation of point anomaly detectors "
        "with Monte Carlo significance tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, events_required: bool):
        p.add_argument("--series", type=Path, help="input series file (timestamp, value)")
        p.add_argument("--scores", type=Path, help="precomputed score file")
        if events_required:
            p.add_argument("--events", type=Path, required=True,
                           help="event timestamp file")
        p.add_argument("--sta", type=int, default=3, help="short-term window (steps)")
        p.add_argument("--lta", type=int, default=14, help="long-term window (steps)")
        p.add_argument("--out", type=Path, required=True, help="output directory")

    def add_eval(p):
        p.add_argument("--quantiles", type=str, required=True,
                       help="comma-separated levels in [0,1], or grid:N")
        p.add_argument("--deltas", type=str, required=True,
                       help="comma-separated tolerances (steps)")
        p.add_argument("--warmup-mask", action="store_true",
                       help="exclude the first lta-1 steps from evaluation")
        p.add_argument("--plot", action="store_true",
                       help="also render PNG figures next to the tables")

    def add_mc(p):
        p.add_argument("--replicates", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--chunks", type=int, default=1,
                       help="parallel chunks (results do not depend on this)")

    p_score = sub.add_parser("score", help="compute anomaly scores")
    add_io(p_score, events_required=False)

    p_eval = sub.add_parser("eval", help="precision/recall tables")
    add_io(p_eval, events_required=True)
    add_eval(p_eval)

    p_sim = sub.add_parser("simulate", help="simulated measure curves")
    add_io(p_sim, events_required=True)
    add_eval(p_sim)
    add_mc(p_sim)
    p_sim.add_argument("--curves", type=int, default=100,
                       help="number of replicate curves to write")

    p_null = sub.add_parser("nulldist", help="null distributions and p-values")
    add_io(p_null, events_required=True)
    p_null.add_argument("--delta", type=int, required=True, help="tolerance (steps)")
    p_null.add_argument("--quantile", type=float, required=True,
                        help="threshold quantile level")
    p_null.add_argument("--warmup-mask", action="store_true",
                        help="exclude the first lta-1 steps from evaluation")
    p_null.add_argument("--plot", action="store_true",
                        help="also render PNG figures next to the tables")
    add_mc(p_null)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        out=args.out,
        series=args.series,
        events=getattr(args, "events", None),
        scores=args.scores,
        sta=args.sta,
        lta=args.lta,
        quantiles=_parse_quantiles(args.quantiles) if hasattr(args, "quantiles") else (),
        deltas=_parse_deltas(args.deltas) if hasattr(args, "deltas") else (),
        replicates=getattr(args, "replicates", 10_000),
        seed=getattr(args, "seed", 0),
        chunks=getattr(args, "chunks", 1),
        curves=getattr(args, "curves", 100),
        delta=getattr(args, "delta", None),
        quantile=getattr(args, "quantile", None),
        warmup_mask=getattr(args, "warmup_mask", False),
        plot=getattr(args, "plot", False),
    )


_COMMANDS = {
    "score": cmd_score,
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "nulldist": cmd_nulldist,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        _COMMANDS[args.command](cfg)
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AnomevalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
