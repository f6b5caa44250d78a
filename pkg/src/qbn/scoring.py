"""Decomposable BIC score with a per-(child, parent set) cache."""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

from .bayesnet import Dataset, config_strides
from .graph import Dag


class LocalScoreKey(NamedTuple):
    child: int
    parents: tuple[int, ...]

    @classmethod
    def of(cls, child: int, parents: Iterable[int]) -> "LocalScoreKey":
        parents = tuple(sorted(parents))
        if child in parents:
            raise ValueError(f"node {child} cannot be its own parent")
        return cls(child, parents)


def _counts(child: int, parents: tuple[int, ...], ds: Dataset) -> np.ndarray:
    card = ds.cardinalities
    r = card[child]
    if parents:
        strides = config_strides([card[p] for p in parents])
        config = ds.rows[:, list(parents)] @ strides
        q = int(strides[0] * card[parents[0]])
    else:
        config = np.zeros(ds.n_rows, dtype=np.int64)
        q = 1
    if q * r > 4 * ds.n_rows + 1024:
        # only observed parent configurations contribute to the likelihood
        _, config = np.unique(config, return_inverse=True)
        q = int(config.max()) + 1
    joint = config * r + ds.rows[:, child]
    return np.bincount(joint, minlength=q * r).reshape(q, r)


def bic_local(child: int, parents: Iterable[int], ds: Dataset) -> float:
    """BIC contribution of ``child`` given ``parents``.

    ``sum_jk N_ijk ln(N_ijk / N_ij) - (ln N / 2) q_i (r_i - 1)`` with
    ``0 ln 0 = 0``. ``q_i`` uses declared cardinalities, not observed ones.
    """
    key = LocalScoreKey.of(child, parents)
    if ds.n_rows == 0:
        raise ValueError("cannot score an empty dataset")
    card = ds.cardinalities
    counts = _counts(key.child, key.parents, ds).astype(float)
    totals = counts.sum(axis=1, keepdims=True)
    nz = counts > 0
    loglik = float(np.sum(counts[nz] * np.log((counts / np.where(totals > 0, totals, 1))[nz])))
    q = 1
    for p in key.parents:
        q *= card[p]
    penalty = 0.5 * np.log(ds.n_rows) * q * (card[key.child] - 1)
    return loglik - float(penalty)


class ScoreCache:
    """Memoised :func:`bic_local` for one dataset.

    Not shared between concurrent searches.
    """

    def __init__(self, ds: Dataset):
        self.ds = ds
        self._scores: dict[LocalScoreKey, float] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._scores)

    def local(self, child: int, parents: Iterable[int]) -> float:
        key = LocalScoreKey.of(child, parents)
        value = self._scores.get(key)
        if value is None:
            self.misses += 1
            value = bic_local(key.child, key.parents, self.ds)
            self._scores[key] = value
        else:
            self.hits += 1
        return value


def bic_total(dag: Dag, ds: Dataset, cache: ScoreCache | None = None) -> float:
    if dag.node_count != ds.n_vars:
        raise ValueError(
            f"DAG has {dag.node_count} nodes but dataset has {ds.n_vars} columns"
        )
    if cache is not None and cache.ds is not ds:
        raise ValueError("score cache belongs to a different dataset")
    pa = dag.parent_sets()
    if cache is None:
        return sum(bic_local(i, pa[i], ds) for i in range(dag.node_count))
    return sum(cache.local(i, pa[i]) for i in range(dag.node_count))
