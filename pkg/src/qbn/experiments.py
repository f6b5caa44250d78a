"""Repeated benchmark runs: prior injection, HC vs Quasi-HC, aggregation.

Every repetition ``r`` derives its randomness from ``seed + r``, so runs are
independent and may be farmed out to worker processes without changing any
number in the output.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .bayesnet import BayesNet, Dataset, forward_sample, random_parameterize
from .detector import DetectorConfig, repair_loop
from .evaluation import REPORT_FIELDS, EvalReport, detection_rate, retention_rate, shd_decompose
from .graph import Dag, DirectedEdge, analytic_bound_pa, binomial_se, monte_carlo_event_a, random_er_dag
from .io import ExperimentConfig, PriorSpec, resolve_network
from .priors import PriorClass, PriorPoolExhausted, PriorSet, classify_prior, extend_priors, sample_priors
from .scoring import ScoreCache
from .search import ConstraintSet, SearchConfig, hill_climb

log = logging.getLogger(__name__)

METHODS = ("hc", "quasi-hc")
AGGREGATE_COLUMNS = ("metric", "prior_type", "n_correct", "n_wrong", "method", "mean", "std", "count")


@dataclass(frozen=True)
class Instance:
    """One repetition's ground truth and data."""

    truth: BayesNet
    data: Dataset


def build_instance(cfg: ExperimentConfig, rep: int) -> Instance:
    seed_r = cfg.seed + rep
    if "bif" in cfg.network:
        bn = resolve_network(cfg.network["bif"])
    else:
        spec = cfg.network["random"]
        dag = random_er_dag(spec["nodes"], spec["edges"], seed_r)
        cards = [spec["cardinality"]] * spec["nodes"]
        bn = random_parameterize(dag, cards, spec["concentration"], rng_seed=[seed_r, 1])
    data = forward_sample(bn, cfg.effective_sample_size(), rng_seed=[seed_r, 2])
    return Instance(bn, data)


def search_config(cfg: ExperimentConfig) -> SearchConfig:
    return SearchConfig(max_iterations=cfg.max_iterations, max_parents=cfg.max_parents)


def detector_config(cfg: ExperimentConfig) -> DetectorConfig:
    return DetectorConfig(cfg.iteration_limit, cfg.suspicion_threshold)


def _split_priors(truth: Dag, priors: PriorSet) -> tuple[list[DirectedEdge], list[DirectedEdge]]:
    correct, wrong = [], []
    for e in priors:
        (correct if classify_prior(truth, e) is PriorClass.CORRECT else wrong).append(e)
    return correct, wrong


def run_priors(
    inst: Instance,
    priors: PriorSet,
    methods: Sequence[str],
    det_cfg: DetectorConfig,
    search_cfg: SearchConfig,
    cache: ScoreCache,
) -> dict[str, EvalReport]:
    """Evaluate each requested method on one prior set."""
    truth = inst.truth.dag
    correct, wrong = _split_priors(truth, priors)
    out: dict[str, EvalReport] = {}
    if "quasi-hc" in methods:
        result = repair_loop(inst.data, priors, det_cfg, search_cfg, cache)
        if "hc" in methods:
            # the first learning round of the repair loop is plain HC with the priors pinned
            out["hc"] = EvalReport.build(result.log.initial_graph, truth)
        out["quasi-hc"] = EvalReport.build(
            result.dag,
            truth,
            retained_rate=retention_rate(correct, result.priors),
            detected_rate=detection_rate(wrong, result.log),
        )
    elif "hc" in methods:
        g = hill_climb(inst.data, ConstraintSet.of(priors), search_cfg, cache)
        out["hc"] = EvalReport.build(g, truth)
    return {m: out[m] for m in methods}


def run_repetition(cfg: ExperimentConfig, rep: int) -> list[dict]:
    """Per-run records for every prior spec and method of one repetition."""
    inst = build_instance(cfg, rep)
    cache = ScoreCache(inst.data)
    det_cfg, search_cfg = detector_config(cfg), search_config(cfg)
    records = []
    for k, spec in enumerate(cfg.priors):
        base = {"repetition": rep, "prior_index": k, **spec.to_dict()}
        try:
            priors = sample_priors(inst.truth.dag, spec.n_correct, spec.n_wrong, spec.wrong_type, [cfg.seed + rep, k])
        except PriorPoolExhausted as exc:
            log.warning("repetition %d, prior spec %s skipped: %s", rep, spec.label, exc)
            records.append({**base, "method": None, "skipped": True})
            continue
        names = inst.truth.names
        reports = run_priors(inst, priors, cfg.methods, det_cfg, search_cfg, cache)
        for method, report in reports.items():
            records.append(
                {
                    **base,
                    "method": method,
                    "skipped": False,
                    "priors": [[names[t], names[h]] for t, h in priors],
                    **report.to_dict(),
                }
            )
    return records


def _run_one(args) -> list[dict]:
    cfg, rep = args
    return run_repetition(cfg, rep)


def _map_reps(fn: Callable, cfg: ExperimentConfig, threads: int) -> list:
    jobs = [(cfg, rep) for rep in range(cfg.repetitions)]
    if threads <= 1 or cfg.repetitions == 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))  # map preserves repetition order


def mean_std(values: Sequence[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def aggregate(runs: Iterable[dict], specs: Sequence[PriorSpec], methods: Sequence[str]) -> list[dict]:
    """Long-format rows: one per (prior spec, method, metric)."""
    runs = [r for r in runs if not r["skipped"]]
    rows = []
    for k, spec in enumerate(specs):
        prior_type = spec.wrong_type.short if spec.wrong_type else ("any" if spec.n_wrong else "none")
        for method in methods:
            mine = [r for r in runs if r["prior_index"] == k and r["method"] == method]
            for metric in REPORT_FIELDS:
                values = [r[metric] for r in mine if r[metric] is not None]
                mean, std = mean_std(values)
                rows.append(
                    {
                        "metric": metric,
                        "prior_type": prior_type,
                        "n_correct": spec.n_correct,
                        "n_wrong": spec.n_wrong,
                        "method": method,
                        "mean": mean,
                        "std": std,
                        "count": len(values),
                    }
                )
    return rows


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> dict:
    per_rep = _map_reps(_run_one, cfg, threads)
    runs = [r for rep_runs in per_rep for r in rep_runs]
    return {
        "command": "experiment",
        "config": cfg.to_dict(),
        "network": cfg.network_label,
        "runs": runs,
        "aggregates": aggregate(runs, cfg.priors, cfg.methods),
    }


def find_aggregate(report: dict, metric: str, method: str, n_correct: int, n_wrong: int, prior_type: str) -> dict:
    for row in report["aggregates"]:
        if (row["metric"], row["method"], row["n_correct"], row["n_wrong"], row["prior_type"]) == (
            metric, method, n_correct, n_wrong, prior_type,
        ):
            return row
    raise KeyError((metric, method, n_correct, n_wrong, prior_type))


# --- prior-quality lower bound ----------------------------------------------


def _learn(inst: Instance, method: str, priors: Sequence[DirectedEdge], det_cfg, search_cfg, cache) -> Dag:
    if method == "hc":
        return hill_climb(inst.data, ConstraintSet.of(priors), search_cfg, cache)
    return repair_loop(inst.data, PriorSet(tuple(priors)), det_cfg, search_cfg, cache).dag


def quality_bound_repetition(cfg: ExperimentConfig, rep: int) -> list[dict]:
    """How many correct priors each method needs to get back to its prior-free SHD.

    Starting from ``n_wrong`` erroneous priors, true edges are appended one at a
    time in a random compatible order until the SHD is no worse than without
    priors. The order is drawn once per spec so all methods see the same
    sequence.
    """
    inst = build_instance(cfg, rep)
    truth = inst.truth.dag
    cache = ScoreCache(inst.data)
    det_cfg, search_cfg = detector_config(cfg), search_config(cfg)
    baseline = {m: shd_decompose(_learn(inst, m, [], det_cfg, search_cfg, cache), truth).shd for m in cfg.methods}
    out = []
    for k, spec in enumerate(cfg.priors):
        seed = [cfg.seed + rep, k]
        try:
            wrong = sample_priors(truth, 0, spec.n_wrong, spec.wrong_type, seed)
        except PriorPoolExhausted as exc:
            log.warning("repetition %d, %d wrong priors unavailable: %s", rep, spec.n_wrong, exc)
            for m in cfg.methods:
                out.append({"repetition": rep, "prior_index": k, "method": m, "required_correct": None})
            continue
        rng = np.random.default_rng(seed + [1])
        sequence = list(wrong.edges)
        extend_priors(sequence, truth.sorted_edges(), truth.node_count ** 2, rng, truth.node_count)
        extra = sequence[len(wrong) :]
        for m in cfg.methods:
            required = None
            for used in range(len(extra) + 1):
                priors = list(wrong.edges) + extra[:used]
                if shd_decompose(_learn(inst, m, priors, det_cfg, search_cfg, cache), truth).shd <= baseline[m]:
                    required = used
                    break
            out.append(
                {
                    "repetition": rep,
                    "prior_index": k,
                    "method": m,
                    "baseline_shd": baseline[m],
                    "required_correct": required,
                }
            )
    return out


def _qb_one(args) -> list[dict]:
    cfg, rep = args
    return quality_bound_repetition(cfg, rep)


def quality_bound(cfg: ExperimentConfig, threads: int = 1) -> dict:
    per_rep = _map_reps(_qb_one, cfg, threads)
    runs = [r for rep_runs in per_rep for r in rep_runs]
    rows = []
    for k, spec in enumerate(cfg.priors):
        for m in cfg.methods:
            mine = [r for r in runs if r["prior_index"] == k and r["method"] == m]
            counts = [r["required_correct"] for r in mine if r["required_correct"] is not None]
            mean, std = mean_std(counts)
            if mean is None:
                quality = None
            elif spec.n_wrong == 0:
                quality = 1.0
            else:
                # ratio of the mean counts, not a mean of per-run ratios
                quality = mean / (mean + spec.n_wrong)
            rows.append(
                {
                    "method": m,
                    "n_wrong": spec.n_wrong,
                    "wrong_type": spec.wrong_type.value if spec.wrong_type else None,
                    "mean_required_correct": mean,
                    "std_required_correct": std,
                    "prior_quality": quality,
                    "feasible": len(counts),
                    "infeasible": len(mine) - len(counts),
                    "status": "ok" if counts else "infeasible",
                }
            )
    return {
        "command": "quality-bound",
        "config": cfg.to_dict(),
        "network": cfg.network_label,
        "runs": runs,
        "rows": rows,
    }


# --- event A bound -------------------------------------------------------------


def verify_bound(pairs: Sequence[tuple[int, int]], trials: int, seed: int = 0) -> dict:
    """Compare the analytic lower bound of event A with a Monte-Carlo estimate."""
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    rows = []
    for k, (n, m) in enumerate(pairs):
        bound = analytic_bound_pa(n, m) if 0 < m < n * (n - 1) else None
        estimate = monte_carlo_event_a(n, m, trials, [seed, k])
        se = binomial_se(estimate, trials)
        violation = bound is not None and estimate < bound - 3 * max(se, 1.0 / trials)
        rows.append(
            {
                "n": n,
                "m": m,
                "analytic_bound": bound,
                "estimate": estimate,
                "standard_error": se,
                "violation": bool(violation),
            }
        )
    return {"command": "verify-bound", "trials": trials, "seed": seed, "rows": rows}


def format_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(round(x, 12))
    return str(x)
