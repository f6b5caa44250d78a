"""Quasi-circle based detection and repair of erroneous priors.

A prior is suspicious when it sits on at least one three-node quasi-circle
(a skeleton triangle) of the learned graph. The repair loop reverses a
suspicious prior the first time, and drops the pair for good once both
orientations have been suspected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .bayesnet import Dataset
from .graph import Dag, DirectedEdge, is_acyclic, qc3_partners
from .priors import PriorSet, reverse
from .scoring import ScoreCache
from .search import ConstraintSet, SearchConfig, hill_climb, hill_climb_trace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorConfig:
    iteration_limit: int = 10
    suspicion_threshold: int = 0

    def __post_init__(self) -> None:
        if self.iteration_limit < 1:
            raise ValueError("iteration_limit must be at least 1")
        if self.suspicion_threshold < 0:
            raise ValueError("suspicion_threshold must be non-negative")


def qc3_counts(g: Dag, priors: Iterable[tuple[int, int]]) -> dict[DirectedEdge, int]:
    """Number of three-node quasi-circles through each prior edge."""
    out = {}
    for e in priors:
        e = DirectedEdge(*e)
        if e not in g.edges:
            raise ValueError(f"prior {tuple(e)} is not an edge of the learned graph")
        out[e] = len(qc3_partners(g, e))
    return out


def find_suspicious(g: Dag, priors: Iterable[tuple[int, int]], threshold: int = 0) -> set[DirectedEdge]:
    return {e for e, n_e in qc3_counts(g, priors).items() if n_e > threshold}


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    suspected: tuple[DirectedEdge, ...]
    reversed: tuple[DirectedEdge, ...]
    removed: tuple[DirectedEdge, ...]
    forced_removed: tuple[DirectedEdge, ...]
    priors: tuple[DirectedEdge, ...]
    graph: Dag

    def to_dict(self, names: list[str] | None = None) -> dict:
        def edges(seq):
            if names is None:
                return [[int(t), int(h)] for t, h in seq]
            return [[names[t], names[h]] for t, h in seq]

        return {
            "iteration": self.iteration,
            "suspected": edges(self.suspected),
            "reversed": edges(self.reversed),
            "removed": edges(self.removed),
            "forced_removed": edges(self.forced_removed),
            "priors": edges(self.priors),
            "graph_edges": edges(self.graph.sorted_edges()),
        }


@dataclass
class RepairLog:
    records: list[IterationRecord] = field(default_factory=list)
    forbidden_pairs: set[frozenset[int]] = field(default_factory=set)

    @property
    def rounds(self) -> int:
        """Modification rounds performed (record 0 is the initial learning)."""
        return max(len(self.records) - 1, 0)

    def ever_suspected(self) -> set[DirectedEdge]:
        out: set[DirectedEdge] = set()
        for rec in self.records:
            out.update(rec.suspected)
        return out

    @property
    def initial_graph(self) -> Dag:
        return self.records[0].graph

    def to_dict(self, names: list[str] | None = None) -> dict:
        pairs = sorted(tuple(sorted(p)) for p in self.forbidden_pairs)
        if names is not None:
            pairs = [[names[a], names[b]] for a, b in pairs]
        else:
            pairs = [list(p) for p in pairs]
        return {
            "rounds": self.rounds,
            "forbidden_pairs": pairs,
            "records": [r.to_dict(names) for r in self.records],
        }


class RepairResult(NamedTuple):
    dag: Dag
    priors: PriorSet
    log: RepairLog


def _modify(
    priors: tuple[DirectedEdge, ...],
    suspected: set[DirectedEdge],
    suspected_ever: set[DirectedEdge],
    node_count: int,
):
    to_reverse = [e for e in priors if e in suspected and reverse(e) not in suspected_ever]
    to_remove = [e for e in priors if e in suspected and reverse(e) in suspected_ever]
    kept = [e for e in priors if e not in suspected]
    reversed_ok, forced = [], []
    # kept edges are already acyclic; add reversals in prior order, dropping any that close a cycle
    current = list(kept)
    for e in to_reverse:
        candidate = current + [reverse(e)]
        if is_acyclic(candidate, node_count):
            current = candidate
            reversed_ok.append(e)
        else:
            forced.append(e)
    # keep the original list order, with each reversal taking the slot of its source
    new_priors = []
    for e in priors:
        if e in suspected:
            if e in reversed_ok:
                new_priors.append(reverse(e))
        else:
            new_priors.append(e)
    return tuple(new_priors), tuple(reversed_ok), tuple(to_remove), tuple(forced)


def repair_loop(
    ds: Dataset,
    priors: PriorSet,
    det_cfg: DetectorConfig | None = None,
    search_cfg: SearchConfig | None = None,
    cache: ScoreCache | None = None,
) -> RepairResult:
    """Learn with priors pinned, then iteratively reverse or drop suspicious ones.

    Stops when a round finds no suspect outside the ones already recorded, or
    after ``iteration_limit`` modification rounds. Dropping a prior also
    forbids its node pair in every later search.
    """
    det_cfg = det_cfg or DetectorConfig()
    search_cfg = search_cfg or SearchConfig()
    cache = cache if cache is not None else ScoreCache(ds)
    n = ds.n_vars
    current = tuple(priors.edges)
    forbidden: set[frozenset[int]] = set()

    def learn(edges):
        return hill_climb(ds, ConstraintSet.of(edges, forbidden), search_cfg, cache)

    g = learn(current)
    suspected = find_suspicious(g, current, det_cfg.suspicion_threshold)
    suspected_ever = set(suspected)
    log_ = RepairLog(forbidden_pairs=forbidden)
    log_.records.append(IterationRecord(0, tuple(sorted(suspected)), (), (), (), current, g))
    has_new = bool(suspected)
    iteration = 0
    while has_new and iteration < det_cfg.iteration_limit:
        iteration += 1
        current, rev, rem, forced = _modify(current, suspected, suspected_ever, n)
        for e in rem:
            forbidden.add(frozenset(e))
        if forced:
            log.debug("round %d: reversal would close a cycle, dropped %s", iteration, forced)
        g = learn(current)
        suspected = find_suspicious(g, current, det_cfg.suspicion_threshold)
        has_new = not suspected <= suspected_ever
        suspected_ever |= suspected
        log_.records.append(IterationRecord(iteration, tuple(sorted(suspected)), rev, rem, forced, current, g))
    return RepairResult(g, PriorSet(current), log_)


def bootstrap_self_priors(
    ds: Dataset,
    k: int,
    det_cfg: DetectorConfig | None = None,
    search_cfg: SearchConfig | None = None,
    cache: ScoreCache | None = None,
) -> tuple[Dag, RepairLog]:
    """Treat the first ``k`` edges added by a prior-free search as priors and repair them."""
    if k < 1:
        raise ValueError("k must be at least 1")
    cache = cache if cache is not None else ScoreCache(ds)
    trace = hill_climb_trace(ds, None, search_cfg, cache)
    chosen: list[DirectedEdge] = []
    for move in trace.moves:
        if len(chosen) == k:
            break
        if move.kind != "add":
            continue
        e = DirectedEdge(move.tail, move.head)
        if e in chosen or e.reversed() in chosen or not is_acyclic(chosen + [e], ds.n_vars):
            continue
        chosen.append(e)
    if len(chosen) < k:
        log.info("trace offered only %d of %d requested self-priors", len(chosen), k)
    result = repair_loop(ds, PriorSet(tuple(chosen)), det_cfg, search_cfg, cache)
    return result.dag, result.log
