"""Hill-climbing structure search under hard edge constraints."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .bayesnet import Dataset
from .graph import Dag, DirectedEdge, is_acyclic, transitive_closure
from .scoring import ScoreCache

MOVE_TYPES = ("add", "delete", "reverse")


@dataclass(frozen=True)
class SearchConfig:
    max_iterations: int = 10_000
    max_parents: int | None = None
    rng_seed: int = 0
    tie_break: str = "lexicographic"
    tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.max_parents is not None and self.max_parents < 0:
            raise ValueError("max_parents must be non-negative")
        if self.tie_break != "lexicographic":
            raise ValueError("only the lexicographic tie-break is supported")


def _pair(a: int, b: int) -> frozenset[int]:
    return frozenset((a, b))


@dataclass(frozen=True)
class ConstraintSet:
    """Pinned edges (the priors) and unordered pairs that may never be joined."""

    pinned_edges: frozenset[DirectedEdge] = field(default_factory=frozenset)
    forbidden_pairs: frozenset[frozenset[int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        pinned = frozenset(DirectedEdge(int(t), int(h)) for t, h in self.pinned_edges)
        forbidden = frozenset(frozenset(int(x) for x in p) for p in self.forbidden_pairs)
        for p in forbidden:
            if len(p) != 2:
                raise ValueError(f"forbidden pair {sorted(p)} must name two distinct nodes")
        for t, h in pinned:
            if _pair(t, h) in forbidden:
                raise ValueError(f"pinned edge ({t}, {h}) lies on a forbidden pair")
            if (h, t) in pinned:
                raise ValueError(f"pinned edges contain both orientations of ({t}, {h})")
        nodes = 1 + max((max(e) for e in pinned), default=-1)
        if not is_acyclic(pinned, nodes):
            raise ValueError("pinned edges contain a directed cycle")
        object.__setattr__(self, "pinned_edges", pinned)
        object.__setattr__(self, "forbidden_pairs", forbidden)

    @classmethod
    def of(
        cls,
        pinned: Iterable[tuple[int, int]] = (),
        forbidden: Iterable[Iterable[int]] = (),
    ) -> "ConstraintSet":
        return cls(frozenset(DirectedEdge(*e) for e in pinned), frozenset(frozenset(p) for p in forbidden))


class Move(NamedTuple):
    kind: str
    tail: int
    head: int
    delta: float

    def apply(self, dag: Dag) -> Dag:
        if self.kind == "add":
            return dag.with_edge(self.tail, self.head)
        if self.kind == "delete":
            return dag.without_edge(self.tail, self.head)
        return Dag(dag.node_count, (dag.edges - {(self.tail, self.head)}) | {DirectedEdge(self.head, self.tail)})


class SearchResult(NamedTuple):
    dag: Dag
    moves: list[Move]


class _Climber:
    """Mutable search state; gains are refreshed only for nodes whose parents changed."""

    def __init__(self, ds: Dataset, constraints: ConstraintSet, cfg: SearchConfig, cache: ScoreCache):
        n = ds.n_vars
        for e in constraints.pinned_edges:
            if max(e) >= n:
                raise ValueError(f"pinned edge {tuple(e)} refers to a node outside the dataset")
        for p in constraints.forbidden_pairs:
            if max(p) >= n:
                raise ValueError(f"forbidden pair {sorted(p)} refers to a node outside the dataset")
        self.n = n
        self.cfg = cfg
        self.cache = cache
        self.adj = np.zeros((n, n), dtype=bool)
        self.pinned = np.zeros((n, n), dtype=bool)
        self.forbidden = np.zeros((n, n), dtype=bool)
        for t, h in constraints.pinned_edges:
            self.adj[t, h] = True
            self.pinned[t, h] = True
        for p in constraints.forbidden_pairs:
            a, b = sorted(p)
            self.forbidden[a, b] = self.forbidden[b, a] = True
        self.parents: list[set[int]] = [set(np.flatnonzero(self.adj[:, j]).tolist()) for j in range(n)]
        self.local = np.zeros(n)
        # add_gain[i, j]: score change from adding i -> j; del_gain[i, j]: from deleting i -> j
        self.add_gain = np.full((n, n), -np.inf)
        self.del_gain = np.full((n, n), -np.inf)
        for j in range(n):
            self._refresh(j)

    def _refresh(self, j: int) -> None:
        pa = self.parents[j]
        base = self.cache.local(j, pa)
        self.local[j] = base
        self.add_gain[:, j] = -np.inf
        self.del_gain[:, j] = -np.inf
        for i in range(self.n):
            if i == j:
                continue
            if i in pa:
                self.del_gain[i, j] = self.cache.local(j, pa - {i}) - base
            elif not self.forbidden[i, j]:
                self.add_gain[i, j] = self.cache.local(j, pa | {i}) - base

    def total(self) -> float:
        return float(self.local.sum())

    def best_move(self) -> Move | None:
        adj = self.adj
        reach = transitive_closure(adj)
        n_parents = adj.sum(axis=0)
        cap = self.cfg.max_parents

        add_ok = ~adj & ~adj.T & ~self.forbidden & ~reach.T
        np.fill_diagonal(add_ok, False)
        if cap is not None:
            add_ok &= (n_parents < cap)[None, :]
        del_ok = adj & ~self.pinned
        # i -> j can be reversed unless another directed path i ~> j exists
        other_path = (adj.astype(np.int64) @ reach.astype(np.int64) > 0)
        rev_ok = adj & ~self.pinned & ~other_path
        if cap is not None:
            rev_ok &= (n_parents < cap)[:, None]

        candidates = (
            ("add", np.where(add_ok, self.add_gain, -np.inf)),
            ("delete", np.where(del_ok, self.del_gain, -np.inf)),
            ("reverse", np.where(rev_ok, self.del_gain + self.add_gain.T, -np.inf)),
        )
        best: Move | None = None
        for kind, gains in candidates:
            flat = int(np.argmax(gains))
            value = float(gains.flat[flat])
            if value == -np.inf:
                continue
            if best is None or value > best.delta:
                best = Move(kind, *divmod(flat, self.n), value)
        if best is None or best.delta <= self.cfg.tolerance:
            return None
        return best

    def apply(self, move: Move) -> None:
        t, h = move.tail, move.head
        if move.kind == "add":
            self.adj[t, h] = True
            self.parents[h].add(t)
            self._refresh(h)
        elif move.kind == "delete":
            self.adj[t, h] = False
            self.parents[h].discard(t)
            self._refresh(h)
        else:
            self.adj[t, h] = False
            self.adj[h, t] = True
            self.parents[h].discard(t)
            self.parents[t].add(h)
            self._refresh(h)
            self._refresh(t)

    def dag(self) -> Dag:
        rows, cols = np.nonzero(self.adj)
        return Dag.from_edges(self.n, zip(rows.tolist(), cols.tolist()))


def hill_climb_trace(
    ds: Dataset,
    constraints: ConstraintSet | None = None,
    cfg: SearchConfig | None = None,
    cache: ScoreCache | None = None,
) -> SearchResult:
    """Greedy best-improvement search over add / delete / reverse moves.

    Starts from the pinned edges, never deletes or reverses them, never joins
    a forbidden pair and keeps the graph acyclic. Exact ties go to the first
    move in the order add < delete < reverse, then by ``(tail, head)``.
    Returns the final DAG and the accepted moves in order.
    """
    constraints = constraints or ConstraintSet()
    cfg = cfg or SearchConfig()
    if cache is None:
        cache = ScoreCache(ds)
    elif cache.ds is not ds:
        raise ValueError("score cache belongs to a different dataset")
    climber = _Climber(ds, constraints, cfg, cache)
    moves: list[Move] = []
    for _ in range(cfg.max_iterations):
        move = climber.best_move()
        if move is None:
            break
        climber.apply(move)
        moves.append(move)
    return SearchResult(climber.dag(), moves)


def hill_climb(
    ds: Dataset,
    constraints: ConstraintSet | None = None,
    cfg: SearchConfig | None = None,
    cache: ScoreCache | None = None,
) -> Dag:
    return hill_climb_trace(ds, constraints, cfg, cache).dag


def replay(start: Dag, moves: Iterable[Move]) -> Dag:
    dag = start
    for move in moves:
        dag = move.apply(dag)
    return dag
