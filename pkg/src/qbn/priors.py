"""Edge-level priors: classification against a true DAG and sequential sampling."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Dag, DirectedEdge, _check_index, is_acyclic, transitive_closure


class PriorClass(str, enum.Enum):
    CORRECT = "correct"
    REVERSED_DIRECT = "reversed_direct"
    REVERSED_INDIRECT = "reversed_indirect"
    INDIRECT = "indirect"
    IRRELEVANT = "irrelevant"

    @property
    def short(self) -> str:
        return _SHORT[self]

    @classmethod
    def parse(cls, text: str) -> "PriorClass":
        key = text.strip().lower()
        for member in cls:
            if key in (member.value, member.short.lower(), member.name.lower()):
                return member
        raise ValueError(f"unknown prior class {text!r}")


_SHORT = {
    PriorClass.CORRECT: "C",
    PriorClass.REVERSED_DIRECT: "RD",
    PriorClass.REVERSED_INDIRECT: "RI",
    PriorClass.INDIRECT: "Ind",
    PriorClass.IRRELEVANT: "Irr",
}

ORDER_REVERSED = frozenset({PriorClass.REVERSED_DIRECT, PriorClass.REVERSED_INDIRECT})


def reverse(edge: tuple[int, int]) -> DirectedEdge:
    return DirectedEdge(edge[1], edge[0])


@dataclass(frozen=True)
class PriorSet:
    """Ordered, duplicate-free, acyclic list of asserted edges."""

    edges: tuple[DirectedEdge, ...] = ()

    def __post_init__(self) -> None:
        edges = tuple(DirectedEdge(int(t), int(h)) for t, h in self.edges)
        seen = set()
        for e in edges:
            if e.tail == e.head:
                raise ValueError(f"prior {tuple(e)} is a self-loop")
            if e in seen:
                raise ValueError(f"duplicate prior {tuple(e)}")
            if e.reversed() in seen:
                raise ValueError(f"prior {tuple(e)} contradicts an earlier prior")
            seen.add(e)
        size = 1 + max((max(e) for e in edges), default=-1)
        if not is_acyclic(edges, size):
            raise ValueError("priors form a directed cycle")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def of(cls, edges: Iterable[tuple[int, int]]) -> "PriorSet":
        return cls(tuple(DirectedEdge(*e) for e in edges))

    def __iter__(self):
        return iter(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, edge: object) -> bool:
        return edge in self.edges

    def as_set(self) -> frozenset[DirectedEdge]:
        return frozenset(self.edges)


def classify_prior(truth: Dag, edge: tuple[int, int]) -> PriorClass:
    """Place an edge in the five-way taxonomy.

    Membership is tested before paths, so a true edge with a parallel longer
    path is CORRECT and its reverse REVERSED_DIRECT.
    """
    reach = transitive_closure(truth.adjacency_matrix())
    return _classify(truth, reach, edge)


def _classify(truth: Dag, reach: np.ndarray, edge: tuple[int, int]) -> PriorClass:
    tail, head = edge
    _check_index(tail, truth.node_count)
    _check_index(head, truth.node_count)
    if tail == head:
        raise ValueError("a prior cannot be a self-loop")
    if (tail, head) in truth.edges:
        return PriorClass.CORRECT
    if (head, tail) in truth.edges:
        return PriorClass.REVERSED_DIRECT
    if reach[tail, head]:
        return PriorClass.INDIRECT
    if reach[head, tail]:
        return PriorClass.REVERSED_INDIRECT
    return PriorClass.IRRELEVANT


def candidate_pool(truth: Dag, wrong_filter: PriorClass | None) -> list[DirectedEdge]:
    """Every ordered pair of the requested erroneous class, sorted."""
    if wrong_filter is PriorClass.CORRECT:
        raise ValueError("the wrong-prior filter cannot be CORRECT")
    reach = transitive_closure(truth.adjacency_matrix())
    pool = []
    n = truth.node_count
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            cls = _classify(truth, reach, (a, b))
            if cls is PriorClass.CORRECT:
                continue
            if wrong_filter is None or cls is wrong_filter:
                pool.append(DirectedEdge(a, b))
    return pool


class PriorPoolExhausted(ValueError):
    def __init__(self, message: str, achieved_correct: int, achieved_wrong: int, partial: Sequence[DirectedEdge]):
        super().__init__(message)
        self.achieved_correct = achieved_correct
        self.achieved_wrong = achieved_wrong
        self.partial = tuple(partial)


def _compatible(chosen: list[DirectedEdge], chosen_set: set, edge: DirectedEdge, n: int) -> bool:
    if edge in chosen_set or edge.reversed() in chosen_set:
        return False
    return is_acyclic(chosen + [edge], n)


def extend_priors(
    chosen: list[DirectedEdge],
    pool: Sequence[DirectedEdge],
    count: int,
    rng: np.random.Generator,
    node_count: int,
) -> int:
    """Append up to ``count`` draws from ``pool`` to ``chosen`` in place.

    Each draw is uniform over the pool members still compatible with the
    current picks (no duplicate, no reversal, no cycle). Returns how many
    were added.
    """
    added = 0
    chosen_set = set(chosen)
    while added < count:
        valid = [e for e in pool if _compatible(chosen, chosen_set, e, node_count)]
        if not valid:
            break
        edge = valid[int(rng.integers(len(valid)))]
        chosen.append(edge)
        chosen_set.add(edge)
        added += 1
    return added


def sample_priors(
    truth: Dag,
    n_correct: int,
    n_wrong: int,
    wrong_filter: PriorClass | None = None,
    rng_seed=0,
) -> PriorSet:
    """Draw correct priors from the true edges, then erroneous ones.

    ``wrong_filter`` restricts erroneous draws to one class; ``None`` allows
    every non-correct class.
    """
    if n_correct < 0 or n_wrong < 0:
        raise ValueError("prior counts must be non-negative")
    rng = np.random.default_rng(rng_seed)
    n = truth.node_count
    chosen: list[DirectedEdge] = []
    got_correct = extend_priors(chosen, truth.sorted_edges(), n_correct, rng, n)
    got_wrong = 0
    if got_correct == n_correct:
        got_wrong = extend_priors(chosen, candidate_pool(truth, wrong_filter), n_wrong, rng, n)
    if got_correct < n_correct or got_wrong < n_wrong:
        label = wrong_filter.value if wrong_filter else "any erroneous"
        raise PriorPoolExhausted(
            f"requested {n_correct} correct and {n_wrong} {label} priors; "
            f"only {got_correct} correct and {got_wrong} erroneous were available",
            got_correct,
            got_wrong,
            chosen,
        )
    return PriorSet(tuple(chosen))
