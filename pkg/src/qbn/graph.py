"""Directed acyclic graphs, quasi-circles and random DAG generation."""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class DirectedEdge(NamedTuple):
    tail: int
    head: int

    def reversed(self) -> "DirectedEdge":
        return DirectedEdge(self.head, self.tail)


def _check_index(index: int, node_count: int) -> None:
    if not 0 <= index < node_count:
        raise IndexError(f"node index {index} out of range for {node_count} nodes")


def is_acyclic(edges: Iterable[tuple[int, int]], node_count: int) -> bool:
    """Return True if the directed graph on ``node_count`` nodes has no cycle."""
    indegree = [0] * node_count
    children: list[list[int]] = [[] for _ in range(node_count)]
    for tail, head in edges:
        _check_index(tail, node_count)
        _check_index(head, node_count)
        children[tail].append(head)
        indegree[head] += 1
    queue = deque(i for i in range(node_count) if indegree[i] == 0)
    seen = 0
    while queue:
        node = queue.popleft()
        seen += 1
        for child in children[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    return seen == node_count


@dataclass(frozen=True)
class Dag:
    """Immutable DAG over nodes ``0 .. node_count-1``.

    Edges are stored as ``(tail, head)`` pairs meaning ``tail -> head``.
    Construction validates that the edge set is simple and acyclic.
    """

    node_count: int
    edges: frozenset[DirectedEdge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        edges = frozenset(DirectedEdge(int(t), int(h)) for t, h in self.edges)
        for tail, head in edges:
            _check_index(tail, self.node_count)
            _check_index(head, self.node_count)
            if tail == head:
                raise ValueError(f"self-loop on node {tail}")
            if (head, tail) in edges:
                raise ValueError(f"both orientations of pair ({tail}, {head}) present")
        if not is_acyclic(edges, self.node_count):
            raise ValueError("edge set contains a directed cycle")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]]) -> "Dag":
        return cls(node_count, frozenset(edges))

    def __contains__(self, edge: object) -> bool:
        return edge in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[DirectedEdge]:
        return sorted(self.edges)

    def parents(self, node: int) -> frozenset[int]:
        return frozenset(t for t, h in self.edges if h == node)

    def children(self, node: int) -> frozenset[int]:
        return frozenset(h for t, h in self.edges if t == node)

    def parent_sets(self) -> list[set[int]]:
        pa: list[set[int]] = [set() for _ in range(self.node_count)]
        for t, h in self.edges:
            pa[h].add(t)
        return pa

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def skeleton(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(e) for e in self.edges)

    def adjacency_matrix(self) -> np.ndarray:
        mat = np.zeros((self.node_count, self.node_count), dtype=bool)
        for t, h in self.edges:
            mat[t, h] = True
        return mat

    def topological_order(self) -> list[int]:
        """Kahn order; ties resolved by smallest index first."""
        import heapq

        pa_count = [0] * self.node_count
        children: list[list[int]] = [[] for _ in range(self.node_count)]
        for t, h in self.edges:
            pa_count[h] += 1
            children[t].append(h)
        heap = [i for i in range(self.node_count) if pa_count[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            node = heapq.heappop(heap)
            order.append(node)
            for c in children[node]:
                pa_count[c] -= 1
                if pa_count[c] == 0:
                    heapq.heappush(heap, c)
        return order

    def with_edge(self, tail: int, head: int) -> "Dag":
        return Dag(self.node_count, self.edges | {DirectedEdge(tail, head)})

    def without_edge(self, tail: int, head: int) -> "Dag":
        return Dag(self.node_count, self.edges - {DirectedEdge(tail, head)})

    def union(self, edges: Iterable[tuple[int, int]]) -> "Dag":
        return Dag(self.node_count, self.edges | {DirectedEdge(*e) for e in edges})


def transitive_closure(adjacency: np.ndarray) -> np.ndarray:
    """Boolean reachability by paths of length >= 1 (Warshall)."""
    reach = np.array(adjacency, dtype=bool, copy=True)
    for k in range(reach.shape[0]):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def has_path(dag: Dag, source: int, target: int) -> bool:
    """True iff a directed path of length >= 1 leads from ``source`` to ``target``."""
    _check_index(source, dag.node_count)
    _check_index(target, dag.node_count)
    children: list[list[int]] = [[] for _ in range(dag.node_count)]
    for t, h in dag.edges:
        children[t].append(h)
    stack = list(children[source])
    seen = set(stack)
    while stack:
        node = stack.pop()
        if node == target:
            return True
        for c in children[node]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


# --- quasi-circles ---------------------------------------------------------


@dataclass(frozen=True, order=True)
class QuasiCircle:
    """Two directed paths with common endpoints and disjoint interiors.

    Stored canonically with ``path_a < path_b`` lexicographically.
    """

    path_a: tuple[int, ...]
    path_b: tuple[int, ...]

    def __post_init__(self) -> None:
        a, b = tuple(self.path_a), tuple(self.path_b)
        if len(a) < 2 or len(b) < 2:
            raise ValueError("each path needs at least one edge")
        if a[0] != b[0] or a[-1] != b[-1]:
            raise ValueError("paths must share first and last node")
        if set(a[1:-1]) & set(b[1:-1]):
            raise ValueError("path interiors must be disjoint")
        if len(set(a) | set(b)) < 3:
            raise ValueError("a quasi-circle spans at least three nodes")
        if b < a:
            a, b = b, a
        object.__setattr__(self, "path_a", a)
        object.__setattr__(self, "path_b", b)

    @property
    def length(self) -> int:
        """Total number of edges over both paths."""
        return len(self.path_a) + len(self.path_b) - 2

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(self.path_a) | frozenset(self.path_b)

    def edges(self) -> set[DirectedEdge]:
        out = set()
        for path in (self.path_a, self.path_b):
            out.update(DirectedEdge(a, b) for a, b in zip(path, path[1:]))
        return out


def _undirected_neighbours(dag: Dag) -> list[set[int]]:
    nb: list[set[int]] = [set() for _ in range(dag.node_count)]
    for t, h in dag.edges:
        nb[t].add(h)
        nb[h].add(t)
    return nb


def count_qc3(dag: Dag) -> int:
    """Number of three-node quasi-circles.

    In a DAG every skeleton triangle is a transitive tournament (one source,
    one sink), so this is the triangle count of the skeleton.
    """
    nb = _undirected_neighbours(dag)
    total = 0
    for a, b in (tuple(sorted(e)) for e in dag.skeleton()):
        total += sum(1 for c in nb[a] & nb[b] if c > b)
    return total


def qc3_partners(dag: Dag, edge: tuple[int, int]) -> set[int]:
    """Nodes ``k`` closing a three-node quasi-circle with ``edge``.

    Empty when ``edge`` is not an edge of ``dag`` (its reverse does not count).
    """
    tail, head = edge
    _check_index(tail, dag.node_count)
    _check_index(head, dag.node_count)
    if (tail, head) not in dag.edges:
        return set()
    nb = _undirected_neighbours(dag)
    return (nb[tail] & nb[head]) - {tail, head}


def _simple_paths(children: list[list[int]], source: int, max_edges: int):
    """Yield every directed path from ``source`` with 1..max_edges edges."""
    stack = [(source,)]
    while stack:
        path = stack.pop()
        if len(path) > 1:
            yield path
        if len(path) - 1 < max_edges:
            for c in children[path[-1]]:
                stack.append(path + (c,))


def enumerate_quasi_circles(dag: Dag, max_total_length: int = 3) -> list[QuasiCircle]:
    """All quasi-circles whose two paths have at most ``max_total_length`` edges in total.

    Cost grows as ``O(n ** (max_total_length - 2))``; detection only needs 3.
    """
    if max_total_length < 3:
        raise ValueError("max_total_length must be at least 3")
    children: list[list[int]] = [[] for _ in range(dag.node_count)]
    for t, h in sorted(dag.edges):
        children[t].append(h)
    found: set[QuasiCircle] = set()
    for source in range(dag.node_count):
        by_target: dict[int, list[tuple[int, ...]]] = {}
        for path in _simple_paths(children, source, max_total_length - 1):
            by_target.setdefault(path[-1], []).append(path)
        for paths in by_target.values():
            for p, q in itertools.combinations(sorted(paths), 2):
                if len(p) + len(q) - 2 > max_total_length:
                    continue
                if set(p[1:-1]) & set(q[1:-1]):
                    continue
                found.add(QuasiCircle(p, q))
    return sorted(found)


# --- Markov equivalence ----------------------------------------------------


def v_structures(dag: Dag) -> frozenset[tuple[int, int, int]]:
    """Colliders ``a -> c <- b`` with ``a < b`` non-adjacent, as ``(a, c, b)``."""
    out = set()
    pa = dag.parent_sets()
    for c in range(dag.node_count):
        for a, b in itertools.combinations(sorted(pa[c]), 2):
            if not dag.adjacent(a, b):
                out.add((a, c, b))
    return frozenset(out)


def markov_equivalent(g1: Dag, g2: Dag) -> bool:
    """Same skeleton and same v-structures (Verma and Pearl)."""
    if g1.node_count != g2.node_count:
        raise ValueError(
            f"node count mismatch: {g1.node_count} vs {g2.node_count}"
        )
    return g1.skeleton() == g2.skeleton() and v_structures(g1) == v_structures(g2)


# --- random graphs ---------------------------------------------------------


def random_er_dag(node_count: int, edge_count: int, rng_seed=0) -> Dag:
    """Uniform random DAG with exactly ``edge_count`` edges.

    A random permutation fixes the topological order; ``edge_count`` distinct
    unordered pairs are drawn uniformly and oriented along that order.
    """
    max_edges = node_count * (node_count - 1) // 2
    if not 0 <= edge_count <= max_edges:
        raise ValueError(
            f"edge_count must lie in [0, {max_edges}] for {node_count} nodes, got {edge_count}"
        )
    rng = np.random.default_rng(rng_seed)
    order = rng.permutation(node_count)
    rows, cols = np.triu_indices(node_count, k=1)
    picked = rng.choice(len(rows), size=edge_count, replace=False)
    edges = {DirectedEdge(int(order[rows[k]]), int(order[cols[k]])) for k in picked}
    return Dag(node_count, frozenset(edges))


def analytic_bound_pa(node_count: int, edge_count: int) -> float:
    """Lower bound on P(a random true edge has an endpoint with another parent).

    ``1 - n^2 (n-1)^2 / (4 |E|^2 [n(n-1) - |E|])``, clipped at zero.
    """
    n, m = node_count, edge_count
    if n < 2:
        raise ValueError("node_count must be at least 2")
    denom = 4.0 * m * m * (n * (n - 1) - m)
    if denom <= 0:
        raise ValueError(f"bound undefined for n={n}, |E|={m}")
    return max(0.0, 1.0 - (n * n * (n - 1) ** 2) / denom)


def monte_carlo_event_a(
    node_count: int,
    edge_count: int,
    trials: int,
    rng_seed=0,
    chunk: int = 4096,
) -> float:
    """Monte-Carlo frequency of event A on fixed-edge-count random DAGs.

    Each trial draws a graph as in :func:`random_er_dag` and one of its edges
    uniformly; the event holds when the tail has any parent or the head has
    a parent besides the tail. Node labels do not affect the event, so the
    draw is done directly in topological-position space, in vectorised chunks.
    """
    if edge_count < 1:
        raise ValueError("edge_count must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    n = node_count
    max_edges = n * (n - 1) // 2
    if edge_count > max_edges:
        raise ValueError(f"edge_count must be at most {max_edges}")
    rng = np.random.default_rng(rng_seed)
    rows, cols = np.triu_indices(n, k=1)
    hits = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        keys = rng.random((size, max_edges))
        picked = np.argpartition(keys, edge_count - 1, axis=1)[:, :edge_count]
        which = rng.integers(0, edge_count, size=size)
        chosen = picked[np.arange(size), which]
        tail, head = rows[chosen], cols[chosen]
        heads_all = cols[picked]
        tails_all = rows[picked]
        tail_has_parent = (heads_all == tail[:, None]).any(axis=1)
        head_other_parent = (
            (heads_all == head[:, None]) & (tails_all != tail[:, None])
        ).any(axis=1)
        hits += int(np.count_nonzero(tail_has_parent | head_other_parent))
        done += size
    return hits / trials


def binomial_se(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def all_dags(node_count: int) -> list[Dag]:
    """Every labelled DAG on ``node_count`` nodes (small n only)."""
    pairs = list(itertools.combinations(range(node_count), 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), s in zip(pairs, states):
            if s == 1:
                edges.append((a, b))
            elif s == 2:
                edges.append((b, a))
        if is_acyclic(edges, node_count):
            out.append(Dag.from_edges(node_count, edges))
    return out


def edges_from_pairs(pairs: Sequence[Sequence[int]]) -> frozenset[DirectedEdge]:
    return frozenset(DirectedEdge(int(a), int(b)) for a, b in pairs)
