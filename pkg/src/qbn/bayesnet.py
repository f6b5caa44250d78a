"""Discrete Bayesian networks: CPT storage, ancestral sampling, random parameters.

Parent configurations are indexed in mixed radix over ``parent_order`` with the
first parent as the most significant digit. The BIF reader and the scorer
rely on the same convention.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import Dag


@dataclass(frozen=True)
class VariableSpec:
    name: str
    cardinality: int
    state_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.cardinality < 2:
            raise ValueError(f"variable {self.name!r}: cardinality must be >= 2")
        states = tuple(self.state_names) or tuple(str(i) for i in range(self.cardinality))
        if len(states) != self.cardinality:
            raise ValueError(
                f"variable {self.name!r}: {len(states)} state names for cardinality {self.cardinality}"
            )
        if len(set(states)) != len(states):
            raise ValueError(f"variable {self.name!r}: duplicate state names")
        object.__setattr__(self, "state_names", states)

    def state_index(self, state: str) -> int:
        try:
            return self.state_names.index(state)
        except ValueError:
            raise KeyError(f"unknown state {state!r} for variable {self.name!r}") from None


def binary_variables(count: int, prefix: str = "X") -> list[VariableSpec]:
    return [VariableSpec(f"{prefix}{i}", 2) for i in range(count)]


def config_strides(cardinalities: Sequence[int]) -> np.ndarray:
    """Mixed-radix place values, first entry most significant."""
    strides = np.ones(len(cardinalities), dtype=np.int64)
    for k in range(len(cardinalities) - 2, -1, -1):
        strides[k] = strides[k + 1] * cardinalities[k + 1]
    return strides


@dataclass(frozen=True)
class Cpt:
    child: int
    parent_order: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise ValueError("CPT table must be two-dimensional")
        if np.any(table < 0) or np.any(table > 1):
            raise ValueError(f"CPT of node {self.child}: entries outside [0, 1]")
        if not np.allclose(table.sum(axis=1), 1.0, atol=1e-9, rtol=0):
            raise ValueError(f"CPT of node {self.child}: rows must sum to 1")
        table.setflags(write=False)
        object.__setattr__(self, "parent_order", tuple(int(p) for p in self.parent_order))
        object.__setattr__(self, "table", table)


@dataclass(frozen=True)
class BayesNet:
    dag: Dag
    variables: tuple[VariableSpec, ...]
    cpts: tuple[Cpt, ...]
    name: str = ""
    renormalized: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        cpts = tuple(self.cpts)
        n = self.dag.node_count
        if len(variables) != n or len(cpts) != n:
            raise ValueError("need one variable and one CPT per node")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        for node, cpt in enumerate(cpts):
            if cpt.child != node:
                raise ValueError(f"CPT at position {node} describes node {cpt.child}")
            if set(cpt.parent_order) != self.dag.parents(node) or len(set(cpt.parent_order)) != len(cpt.parent_order):
                raise ValueError(f"CPT parents of node {node} disagree with the DAG")
            rows = int(np.prod([variables[p].cardinality for p in cpt.parent_order]))
            if cpt.table.shape != (rows, variables[node].cardinality):
                raise ValueError(
                    f"CPT of node {node} has shape {cpt.table.shape}, expected {(rows, variables[node].cardinality)}"
                )
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "cpts", cpts)

    @property
    def node_count(self) -> int:
        return self.dag.node_count

    @property
    def cardinalities(self) -> list[int]:
        return [v.cardinality for v in self.variables]

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def index_of(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(f"unknown variable {name!r}")

    def parameter_count(self) -> int:
        return sum(c.table.shape[0] * (c.table.shape[1] - 1) for c in self.cpts)

    def relabel(self, permutation: Sequence[int]) -> "BayesNet":
        """Move node ``i`` to position ``permutation[i]``."""
        perm = list(permutation)
        n = self.node_count
        inv = [0] * n
        for old, new in enumerate(perm):
            inv[new] = old
        dag = Dag.from_edges(n, [(perm[t], perm[h]) for t, h in self.dag.edges])
        variables = [self.variables[inv[i]] for i in range(n)]
        cpts = []
        for new in range(n):
            old = self.cpts[inv[new]]
            cpts.append(Cpt(new, tuple(perm[p] for p in old.parent_order), old.table))
        return BayesNet(dag, tuple(variables), tuple(cpts), self.name)


@dataclass(frozen=True)
class Dataset:
    """Complete discrete data; ``rows[i, j]`` is the state index of variable ``j``."""

    variables: tuple[VariableSpec, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        variables = tuple(self.variables)
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != len(variables):
            raise ValueError(f"rows must have shape (N, {len(variables)})")
        if rows.size:
            card = np.array([v.cardinality for v in variables])
            if rows.min() < 0 or np.any(rows.max(axis=0) >= card):
                raise ValueError("state index out of range for its variable")
        rows = np.ascontiguousarray(rows)
        rows.setflags(write=False)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "rows", rows)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_vars(self) -> int:
        return self.rows.shape[1]

    @property
    def cardinalities(self) -> list[int]:
        return [v.cardinality for v in self.variables]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.variables == other.variables and np.array_equal(self.rows, other.rows)

    __hash__ = None  # type: ignore[assignment]


def _variable_stream(seed, name: str) -> np.random.Generator:
    # keyed by name so relabelling nodes permutes columns without changing draws
    base = list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]
    return np.random.default_rng(base + [zlib.crc32(name.encode("utf-8"))])


def forward_sample(bn: BayesNet, n_rows: int, rng_seed=0) -> Dataset:
    """Draw ``n_rows`` i.i.d. samples ancestrally."""
    if n_rows < 0:
        raise ValueError("n_rows must be non-negative")
    data = np.zeros((n_rows, bn.node_count), dtype=np.int64)
    card = bn.cardinalities
    for node in bn.dag.topological_order():
        cpt = bn.cpts[node]
        rng = _variable_stream(rng_seed, bn.variables[node].name)
        u = rng.random(n_rows)
        if cpt.parent_order:
            strides = config_strides([card[p] for p in cpt.parent_order])
            config = data[:, list(cpt.parent_order)] @ strides
        else:
            config = np.zeros(n_rows, dtype=np.int64)
        cum = np.cumsum(cpt.table, axis=1)[config]
        states = (u[:, None] >= cum[:, :-1]).sum(axis=1)
        data[:, node] = states
    return Dataset(bn.variables, data)


def random_parameterize(
    dag: Dag,
    cardinalities: Sequence[int],
    concentration: float = 1.0,
    rng_seed=0,
    names: Sequence[str] | None = None,
) -> BayesNet:
    """Attach CPTs whose rows are drawn from a symmetric Dirichlet."""
    if len(cardinalities) != dag.node_count:
        raise ValueError("need one cardinality per node")
    if concentration <= 0:
        raise ValueError("concentration must be positive")
    rng = np.random.default_rng(rng_seed)
    names = list(names) if names is not None else [f"X{i}" for i in range(dag.node_count)]
    variables = tuple(VariableSpec(nm, int(c)) for nm, c in zip(names, cardinalities))
    cpts = []
    for node in range(dag.node_count):
        parents = tuple(sorted(dag.parents(node)))
        q = int(np.prod([cardinalities[p] for p in parents]))
        table = rng.dirichlet(np.full(cardinalities[node], concentration), size=q)
        # dirichlet output can miss unit row sums by a few ulps
        table = table / table.sum(axis=1, keepdims=True)
        cpts.append(Cpt(node, parents, table))
    return BayesNet(dag, variables, tuple(cpts))


def joint_probability(bn: BayesNet, assignment: Sequence[int]) -> float:
    if len(assignment) != bn.node_count:
        raise ValueError("assignment length must equal node count")
    for i, (s, v) in enumerate(zip(assignment, bn.variables)):
        if not 0 <= s < v.cardinality:
            raise ValueError(f"state {s} out of range for variable {v.name!r} (node {i})")
    card = bn.cardinalities
    prob = 1.0
    for node, cpt in enumerate(bn.cpts):
        row = 0
        for p in cpt.parent_order:
            row = row * card[p] + assignment[p]
        prob *= cpt.table[row, assignment[node]]
    return float(prob)
