"""End-to-end acceptance checks.

Each test records one PASS/FAIL line (with the measured numbers) that is
printed in the terminal summary, then asserts. Thresholds and sizes are the
fixed contract of the project and must not be tuned.
"""

import itertools
import json
import time
from importlib import resources
from pathlib import Path

import numpy as np

from qbn import io as qio
from qbn.bayesnet import forward_sample, random_parameterize
from qbn.cli import main
from qbn.experiments import find_aggregate, run_experiment
from qbn.graph import (
    Dag,
    all_dags,
    analytic_bound_pa,
    binomial_se,
    count_qc3,
    enumerate_quasi_circles,
    markov_equivalent,
    monte_carlo_event_a,
    random_er_dag,
)
from qbn.priors import PriorClass, PriorPoolExhausted, sample_priors
from qbn.scoring import bic_total
from qbn.search import ConstraintSet, hill_climb

from .oracles import brute_qc3, naive_bic_local

RESULTS: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str, elapsed: float, limit: float) -> None:
    in_time = elapsed < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    timing = f"{elapsed:.1f}s / limit {limit:.0f}s" + ("" if in_time else " (too slow)")
    RESULTS[number] = f"criterion {number:2d} {verdict}  {title}: {detail} [{timing}]"
    assert ok, RESULTS[number]
    assert in_time, RESULTS[number]


# 1 -------------------------------------------------------------------------


def _brute_triangles(dag: Dag) -> set[tuple[int, int, int]]:
    """(source, middle, sink) for every three-node quasi-circle."""
    out = set()
    for a, b, c in itertools.permutations(range(dag.node_count), 3):
        if {(a, b), (b, c), (a, c)} <= dag.edges:
            out.add((a, b, c))
    return out


def test_criterion_01_quasi_circle_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for k in range(500):
        n = int(rng.integers(2, 13))
        g = random_er_dag(n, int(rng.integers(0, n * (n - 1) // 2 + 1)), [2024, k])
        expected = _brute_triangles(g)
        found = {max(qc.path_a, qc.path_b, key=len) for qc in enumerate_quasi_circles(g, 3)}
        if count_qc3(g) != len(expected) or brute_qc3(g) != len(expected) or found != expected:
            mismatches += 1
    record(1, "quasi-circle oracle", mismatches == 0, f"{mismatches} mismatches on 500 dags",
           time.perf_counter() - start, 10)


# 2 -------------------------------------------------------------------------


def test_criterion_02_reversed_prior_on_chain():
    start = time.perf_counter()
    X, Y, Z = 0, 1, 2
    truth = Dag.from_edges(3, [(Z, X), (X, Y)])
    hits = 0
    for seed in range(50):
        bn = random_parameterize(truth, [2, 2, 2], rng_seed=[seed, 1])
        ds = forward_sample(bn, 50_000, [seed, 2])
        g = hill_climb(ds, ConstraintSet.of([(Y, X)]))
        hits += count_qc3(g) == 1
    record(2, "triangle on Z->X->Y with prior (Y,X)", hits >= 45, f"{hits}/50 seeds (need >= 45)",
           time.perf_counter() - start, 60)


# 3 -------------------------------------------------------------------------


def test_criterion_03_prior_type_trends():
    start = time.perf_counter()
    types = ["RD", "RI", "Ind", "Irr"]
    cfg = qio.config_from_dict(
        {
            "network": {"random": {"nodes": 20, "edges": 20}},
            "sample_size": 5000,
            "priors": [{}] + [{"n_wrong": 6, "wrong_type": t} for t in types],
            "repetitions": 100,
            "methods": ["hc"],
        }
    )
    report = run_experiment(cfg)
    mean = lambda metric, n_wrong, kind: find_aggregate(report, metric, "hc", 0, n_wrong, kind)["mean"]
    qc_none, qc_rd = mean("qc3", 0, "none"), mean("qc3", 6, "RD")
    shd_none, shd_rd = mean("shd", 0, "none"), mean("shd", 6, "RD")
    rev_none, rev_ind = mean("reversed", 0, "none"), mean("reversed", 6, "Ind")
    missing = {"none": mean("missing", 0, "none"), **{t: mean("missing", 6, t) for t in types}}
    spread = max(missing.values()) - min(missing.values())
    parts = {
        "a": qc_rd >= 2 * qc_none,
        "b": shd_rd >= 1.5 * shd_none,
        "c": rev_ind <= rev_none + 0.5,
        "d": spread <= 1.0,
    }
    detail = (
        f"(a) qc3 {qc_none:.2f}->{qc_rd:.2f} {'ok' if parts['a'] else 'no'}; "
        f"(b) shd {shd_none:.2f}->{shd_rd:.2f} {'ok' if parts['b'] else 'no'}; "
        f"(c) reversed {rev_none:.2f}->{rev_ind:.2f} {'ok' if parts['c'] else 'no'}; "
        f"(d) missing {', '.join(f'{k} {v:.2f}' for k, v in missing.items())} spread {spread:.2f} "
        f"{'ok' if parts['d'] else 'no'}"
    )
    record(3, "prior-type trends on random 20/20", all(parts.values()), detail, time.perf_counter() - start, 20 * 60)


# 4 -------------------------------------------------------------------------


def test_criterion_04_asia_retention_detection():
    start = time.perf_counter()
    cfg = qio.config_from_dict(
        {"network": {"bif": "asia"}, "sample_size": 1000, "priors": [{"n_correct": 2, "n_wrong": 2}],
         "repetitions": 100, "methods": ["quasi-hc"]}
    )
    report = run_experiment(cfg)
    retained = find_aggregate(report, "retained_rate", "quasi-hc", 2, 2, "any")["mean"]
    detected = find_aggregate(report, "detected_rate", "quasi-hc", 2, 2, "any")["mean"]
    ok = retained >= 0.85 and detected >= 0.35
    record(4, "Asia (2,2) retention/detection", ok,
           f"retained {retained:.3f} (need >= 0.85), detected {detected:.3f} (need >= 0.35)",
           time.perf_counter() - start, 10 * 60)


# 5 -------------------------------------------------------------------------


def test_criterion_05_child_quasi_beats_hc():
    start = time.perf_counter()
    cfg = qio.config_from_dict(
        {"network": {"bif": "child"}, "sample_size": 2000, "priors": [{"n_correct": 0, "n_wrong": 4}],
         "repetitions": 100}
    )
    report = run_experiment(cfg)
    hc = find_aggregate(report, "shd", "hc", 0, 4, "any")["mean"]
    quasi = find_aggregate(report, "shd", "quasi-hc", 0, 4, "any")["mean"]
    record(5, "Child (0,4) SHD", quasi < hc, f"HC {hc:.2f} vs Quasi-HC {quasi:.2f} ({(quasi - hc) / hc:+.1%})",
           time.perf_counter() - start, 20 * 60)


# 6 -------------------------------------------------------------------------


def test_criterion_06_event_a_bound():
    start = time.perf_counter()
    b1, b2 = analytic_bound_pa(1000, 1000), analytic_bound_pa(1000, 1500)
    ok = 0.748 <= b1 <= 0.752 and 0.886 <= b2 <= 0.891
    rows = []
    for n in (10, 20, 30):
        for m in (n, (3 * n) // 2):
            est = monte_carlo_event_a(n, m, 100_000, [6, n, m])
            bound = analytic_bound_pa(n, m)
            fine = est >= bound - 3 * binomial_se(est, 100_000)
            ok &= fine
            rows.append(f"({n},{m}) {est:.4f}>={bound:.4f}" if fine else f"({n},{m}) {est:.4f}<{bound:.4f}!")
    record(6, "event A lower bound", ok, f"bounds {b1:.4f}, {b2:.4f}; " + "; ".join(rows),
           time.perf_counter() - start, 120)


# 7 -------------------------------------------------------------------------


def _equivalence_hits(kind: PriorClass) -> int:
    hits = tried = 0
    seed = 0
    while tried < 50:
        truth = random_er_dag(5, 5, [7, seed])
        try:
            prior = sample_priors(truth, 0, 1, kind, [7, seed, 1])
        except PriorPoolExhausted:
            seed += 1
            continue
        bn = random_parameterize(truth, [2] * 5, rng_seed=[7, seed, 2])
        ds = forward_sample(bn, 50_000, [7, seed, 3])
        g = hill_climb(ds, ConstraintSet.of(prior))
        hits += markov_equivalent(g, truth.union(prior))
        tried += 1
        seed += 1
    return hits


def test_criterion_07_irrelevant_indirect_equivalence():
    start = time.perf_counter()
    irr = _equivalence_hits(PriorClass.IRRELEVANT)
    ind = _equivalence_hits(PriorClass.INDIRECT)
    record(7, "truth plus Irr/Ind prior equivalence", irr >= 40 and ind >= 40,
           f"Irrelevant {irr}/50, Indirect {ind}/50 (need >= 40 each)", time.perf_counter() - start, 300)


# 8 -------------------------------------------------------------------------


def test_criterion_08_parser_counts():
    start = time.perf_counter()
    expected = {"asia": (8, 8), "child": (20, 25), "alarm": (37, 46), "insurance": (27, 52)}
    got = {}
    for name in expected:
        text = resources.files("qbn").joinpath("data").joinpath(f"{name}.bif").read_text()
        bn = qio.parse_bif(text)
        got[name] = (bn.dag.node_count, len(bn.dag.edges))
    record(8, "BIF node/arc counts", got == expected,
           ", ".join(f"{k} {v[0]}/{v[1]}" for k, v in got.items()), time.perf_counter() - start, 1)


# 9 -------------------------------------------------------------------------


def _cli_outputs(workdir: Path, inputs: Path) -> dict[str, bytes]:
    data, priors, config = inputs / "data.csv", inputs / "priors.json", inputs / "config.json"
    commands = {
        "learn": ["learn", "--data", data, "--priors", priors, "--network", "asia"],
        "detect": ["detect", "--data", data, "--priors", priors, "--network", "asia"],
        "experiment": ["experiment", "--config", config],
        "quality-bound": ["quality-bound", "--config", config],
        "verify-bound": ["verify-bound", "--trials", "20000"],
        "sample": ["sample", "--network", "asia", "--rows", "300"],
    }
    out = {}
    for fmt in ("json", "csv"):
        for name, argv in commands.items():
            target = workdir / fmt / name
            code = main([str(a) for a in argv] + ["--seed", "11", "--format", fmt, "--out-dir", str(target)])
            assert code == 0, (name, fmt, code)
            for f in sorted(target.iterdir()):
                out[f"{fmt}/{name}/{f.name}"] = f.read_bytes()
    return out


def test_criterion_09_cli_determinism(tmp_path):
    start = time.perf_counter()
    inputs = tmp_path / "inputs"
    inputs.mkdir()
    bn = qio.load_network("asia")
    qio.write_dataset_csv(forward_sample(bn, 1000, 5), inputs / "data.csv")
    (inputs / "priors.json").write_text(json.dumps(
        [{"tail_name": "smoke", "head_name": "lung"}, {"tail_name": "dysp", "head_name": "bronc"}]))
    (inputs / "config.json").write_text(json.dumps(
        {"network": {"random": {"nodes": 10, "edges": 12}}, "sample_size": 800,
         "priors": [{"n_wrong": 1}, {"n_correct": 2, "n_wrong": 2}], "repetitions": 3}))
    first = _cli_outputs(tmp_path / "a", inputs)
    second = _cli_outputs(tmp_path / "b", inputs)
    differing = sorted(k for k in first if first[k] != second.get(k))
    ok = not differing and first.keys() == second.keys()
    record(9, "CLI determinism", ok,
           f"{len(first)} files compared, {len(differing)} differ" + (f": {differing}" if differing else ""),
           time.perf_counter() - start, 60)


# 10 ------------------------------------------------------------------------


def test_criterion_10_search_oracle():
    start = time.perf_counter()
    dags = all_dags(3)
    families = {(j, d.parents(j)) for d in dags for j in range(3)}
    hits = 0
    for seed in range(50):
        rng = np.random.default_rng([10, seed])
        truth = dags[int(rng.integers(len(dags)))]
        bn = random_parameterize(truth, [2, 2, 2], rng_seed=[10, seed, 1])
        ds = forward_sample(bn, 20_000, [10, seed, 2])
        local = {f: naive_bic_local(f[0], f[1], ds.rows, ds.cardinalities) for f in families}
        best = max(sum(local[j, d.parents(j)] for j in range(3)) for d in dags)
        hits += abs(bic_total(hill_climb(ds), ds) - best) <= 1e-9 * max(1.0, abs(best))
    record(10, "hill-climb vs exhaustive 3-node optimum", hits >= 45, f"{hits}/50 seeds (need >= 45)",
           time.perf_counter() - start, 120)
