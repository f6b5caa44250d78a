"""Command-line entry point: ``qbn <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import io as qio
from .bayesnet import forward_sample
from .detector import DetectorConfig, repair_loop
from .evaluation import REPORT_FIELDS, EvalReport, detection_rate, retention_rate
from .experiments import AGGREGATE_COLUMNS, format_float, quality_bound, run_experiment, verify_bound
from .priors import PriorClass, PriorSet, classify_prior
from .scoring import ScoreCache, bic_total
from .search import ConstraintSet, SearchConfig, hill_climb

log = logging.getLogger("qbn")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class MissingInput(Exception):
    def __init__(self, path: str):
        super().__init__(f"no such file: {path}")
        self.path = path


def _require(path: str | None) -> str | None:
    if path is not None and not Path(path).is_file():
        raise MissingInput(path)
    return path


def _configure_logging() -> None:
    level = os.environ.get("QBN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


# --- output helpers -----------------------------------------------------------


def _write_rows(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_float(row.get(c)) for c in columns])


def _emit(out_dir: Path, stem: str, fmt: str, report: dict, columns: Sequence[str], rows: Sequence[dict]) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / f"{stem}.json"
        qio.write_report(report, path)
    else:
        path = out_dir / f"{stem}.csv"
        _write_rows(path, columns, rows)
    return path


# --- learn / detect -----------------------------------------------------------


def _load_inputs(args):
    _require(args.data)
    _require(args.priors)
    truth = None
    if args.network:
        if args.network.lower() not in qio.BUILTIN_NETWORKS:
            _require(args.network)
        truth = qio.resolve_network(args.network)
        variables = list(truth.variables)
    else:
        variables = qio.infer_variables(args.data)
    ds = qio.read_dataset_csv(args.data, variables)
    names = [v.name for v in variables]
    priors = qio.read_priors(args.priors, names) if args.priors else PriorSet()
    return ds, names, priors, truth


def _search_cfg(args) -> SearchConfig:
    return SearchConfig(max_parents=args.max_parents, rng_seed=args.seed or 0)


def cmd_learn(args) -> int:
    ds, names, priors, truth = _load_inputs(args)
    cache = ScoreCache(ds)
    g = hill_climb(ds, ConstraintSet.of(priors), _search_cfg(args), cache)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    qio.write_graph(g, names, out / "graph.json")
    evaluation = EvalReport.build(g, truth.dag) if truth is not None else None
    report = {
        "command": "learn",
        "seed": args.seed or 0,
        "n_rows": ds.n_rows,
        "priors": qio.priors_to_list(priors, names),
        "score": bic_total(g, ds, cache),
        "graph": qio.graph_to_dict(g, names),
        "eval": evaluation.to_dict() if evaluation else None,
    }
    row = {"score": report["score"], "n_edges": len(g.edges), **(evaluation.to_dict() if evaluation else {})}
    _emit(out, "report", args.format, report, ("score", "n_edges") + REPORT_FIELDS, [row])
    return EXIT_OK


def cmd_detect(args) -> int:
    ds, names, priors, truth = _load_inputs(args)
    det_cfg = DetectorConfig(args.iteration_limit, args.threshold)
    result = repair_loop(ds, priors, det_cfg, _search_cfg(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    qio.write_graph(result.dag, names, out / "graph.json")
    qio.write_priors(result.priors, names, out / "priors.json")
    qio.write_report(result.log.to_dict(names), out / "repair_log.json")
    evaluation = None
    if truth is not None:
        correct = [e for e in priors if classify_prior(truth.dag, e) is PriorClass.CORRECT]
        wrong = [e for e in priors if e not in correct]
        evaluation = EvalReport.build(
            result.dag,
            truth.dag,
            retained_rate=retention_rate(correct, result.priors),
            detected_rate=detection_rate(wrong, result.log),
        )
    report = {
        "command": "detect",
        "seed": args.seed or 0,
        "n_rows": ds.n_rows,
        "detector": {"iteration_limit": det_cfg.iteration_limit, "suspicion_threshold": det_cfg.suspicion_threshold},
        "initial_priors": qio.priors_to_list(priors, names),
        "final_priors": qio.priors_to_list(result.priors, names),
        "rounds": result.log.rounds,
        "graph": qio.graph_to_dict(result.dag, names),
        "eval": evaluation.to_dict() if evaluation else None,
    }
    row = {"rounds": result.log.rounds, "n_edges": len(result.dag.edges), **(evaluation.to_dict() if evaluation else {})}
    _emit(out, "report", args.format, report, ("rounds", "n_edges") + REPORT_FIELDS, [row])
    return EXIT_OK


# --- experiment-style commands --------------------------------------------------


def _load_config(args) -> qio.ExperimentConfig:
    _require(args.config)
    cfg = qio.parse_experiment_config(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        cfg = qio.ExperimentConfig(**{**cfg.__dict__, "seed": args.seed})
    if "bif" in cfg.network and cfg.network["bif"].lower() not in qio.BUILTIN_NETWORKS:
        bif = Path(cfg.network["bif"])
        if not bif.is_absolute():
            bif = Path(args.config).parent / bif
        _require(str(bif))
        cfg = qio.ExperimentConfig(**{**cfg.__dict__, "network": {"bif": str(bif)}})
    return cfg


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    report = run_experiment(cfg, args.threads)
    out = Path(args.out_dir)
    _emit(out, "experiment", args.format, report, AGGREGATE_COLUMNS, report["aggregates"])
    if args.format == "csv":
        run_cols = ("repetition", "prior_index", "n_correct", "n_wrong", "wrong_type", "method", "skipped") + REPORT_FIELDS
        _write_rows(out / "experiment_runs.csv", run_cols, report["runs"])
    return EXIT_OK


QUALITY_COLUMNS = (
    "method", "n_wrong", "wrong_type", "mean_required_correct", "std_required_correct",
    "prior_quality", "feasible", "infeasible", "status",
)


def cmd_quality_bound(args) -> int:
    cfg = _load_config(args)
    report = quality_bound(cfg, args.threads)
    _emit(Path(args.out_dir), "quality_bound", args.format, report, QUALITY_COLUMNS, report["rows"])
    return EXIT_OK


VERIFY_COLUMNS = ("n", "m", "analytic_bound", "estimate", "standard_error", "violation")


def cmd_verify_bound(args) -> int:
    if len(args.n) != len(args.m):
        raise ValueError("--n and --m need the same number of values")
    report = verify_bound(list(zip(args.n, args.m)), args.trials, args.seed or 0)
    _emit(Path(args.out_dir), "verify_bound", args.format, report, VERIFY_COLUMNS, report["rows"])
    return EXIT_FAILURE if any(r["violation"] for r in report["rows"]) else EXIT_OK


def cmd_sample(args) -> int:
    if args.network.lower() not in qio.BUILTIN_NETWORKS:
        _require(args.network)
    bn = qio.resolve_network(args.network)
    ds = forward_sample(bn, args.rows, args.seed or 0)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    qio.write_dataset_csv(ds, out / "data.csv")
    qio.write_graph(bn.dag, bn.names, out / "truth.json")
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base random seed (overrides the config)")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--threads", type=int, default=1, help="worker processes for repetitions")
    common.add_argument("--format", choices=("csv", "json"), default="json", help="report format")
    common.add_argument("--config", help="experiment configuration (JSON)")

    parser = argparse.ArgumentParser(prog="qbn", description="Structure learning with quasi-circle prior checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def learning(name, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--data", required=True, help="CSV dataset (header of variable names, state-name cells)")
        p.add_argument("--priors", help="JSON list of {tail_name, head_name}")
        p.add_argument("--network", help="bundled network name or BIF path; supplies variables and the truth")
        p.add_argument("--max-parents", type=int, default=None)
        return p

    learning("learn", "hill-climb with priors as hard constraints").set_defaults(func=cmd_learn)
    detect = learning("detect", "learn, then detect and repair suspicious priors")
    detect.add_argument("--iteration-limit", type=int, default=10)
    detect.add_argument("--threshold", type=int, default=0)
    detect.set_defaults(func=cmd_detect)

    for name, func, help_ in (
        ("experiment", cmd_experiment, "repeated HC vs Quasi-HC benchmark"),
        ("quality-bound", cmd_quality_bound, "correct priors needed to offset erroneous ones"),
    ):
        sub.add_parser(name, parents=[common], help=help_).set_defaults(func=func, needs_config=True)

    vb = sub.add_parser("verify-bound", parents=[common], help="analytic vs Monte-Carlo probability of event A")
    vb.add_argument("--n", type=int, nargs="+", default=[10, 10, 20, 20, 30, 30])
    vb.add_argument("--m", type=int, nargs="+", default=[10, 15, 20, 30, 30, 45])
    vb.add_argument("--trials", type=int, default=100_000)
    vb.set_defaults(func=cmd_verify_bound)

    sp = sub.add_parser("sample", parents=[common], help="draw a CSV dataset from a network")
    sp.add_argument("--network", required=True)
    sp.add_argument("--rows", type=int, required=True)
    sp.set_defaults(func=cmd_sample)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "needs_config", False) and not args.config:
        parser.error(f"{args.command} requires --config")
    try:
        return args.func(args)
    except MissingInput as exc:
        print(f"qbn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"qbn: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
