import numpy as np
import pytest

from qbn.bayesnet import Dataset, binary_variables, forward_sample, random_parameterize
from qbn.detector import (
    DetectorConfig,
    RepairLog,
    bootstrap_self_priors,
    find_suspicious,
    qc3_counts,
    repair_loop,
)
from qbn.evaluation import shd_decompose
from qbn.graph import Dag, count_qc3, markov_equivalent, random_er_dag
from qbn.priors import PriorClass, PriorSet, sample_priors
from qbn.scoring import ScoreCache
from qbn.search import ConstraintSet, hill_climb, hill_climb_trace

from .oracles import brute_partners, noisy_binary_net

X, Y, Z = 0, 1, 2


def test_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(iteration_limit=0)
    with pytest.raises(ValueError):
        DetectorConfig(suspicion_threshold=-1)


def test_triangle_prior_is_suspected():
    g = Dag.from_edges(3, [(0, 1), (0, 2), (1, 2)])
    assert find_suspicious(g, [(0, 2)]) == {(0, 2)}


def test_chain_prior_not_suspected():
    g = Dag.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    for e in g.edges:
        assert find_suspicious(g, [e]) == set()


def test_two_triangles_on_one_prior():
    g = Dag.from_edges(4, [(0, 2), (0, 1), (1, 2), (0, 3), (3, 2)])
    assert qc3_counts(g, [(0, 2)]) == {(0, 2): 2} == {(0, 2): len(brute_partners(g, (0, 2)))}
    assert find_suspicious(g, [(0, 2)]) == {(0, 2)}
    assert find_suspicious(g, [(0, 2)], threshold=2) == set()


def test_suspects_are_subset_and_order_free():
    g = random_er_dag(10, 25, 3)
    priors = g.sorted_edges()[:8]
    sus = find_suspicious(g, priors)
    assert sus <= set(priors)
    assert find_suspicious(g, list(reversed(priors))) == sus
    with pytest.raises(ValueError):
        find_suspicious(g, [(9, 0)] if (9, 0) not in g.edges else [(0, 9)])


def test_no_priors_equals_plain_hill_climb():
    bn = random_parameterize(random_er_dag(8, 9, 1), [2] * 8, rng_seed=1)
    ds = forward_sample(bn, 2000, 1)
    result = repair_loop(ds, PriorSet())
    assert result.dag == hill_climb(ds)
    assert len(result.log.records) == 1 and result.log.records[0].suspected == ()
    assert result.log.rounds == 0 and len(result.priors) == 0


def collider_data(seed, n=50_000):
    truth = Dag.from_edges(3, [(X, Y), (Z, Y)])
    return truth, forward_sample(noisy_binary_net(truth, seed), n, seed)


def test_reversed_prior_on_collider_is_fixed():
    # Y -> X pinned against the collider X -> Y <- Z forces a triangle
    hits = 0
    for seed in range(50):
        truth, ds = collider_data(seed)
        result = repair_loop(ds, PriorSet.of([(Y, X)]))
        first = result.log.records[0]
        ok = (
            first.suspected == ((Y, X),)
            and (X, Y) in result.priors
            and shd_decompose(result.dag, truth).shd == 0
        )
        hits += ok
    assert hits >= 45


def test_chain_with_reversed_prior_needs_no_triangle():
    # Y -> X -> Z contains the prior and is Markov equivalent to Z -> X -> Y
    truth = Dag.from_edges(3, [(Z, X), (X, Y)])
    for seed in range(10):
        ds = forward_sample(noisy_binary_net(truth, seed), 50_000, seed)
        g = hill_climb(ds, ConstraintSet.of([(Y, X)]))
        assert count_qc3(g) == 0
        assert markov_equivalent(g, truth)


def test_reverse_then_remove_forbids_pair():
    # with Y -> X and Z -> X pinned there is no way to express X _|_ Z, so
    # the search closes a triangle whichever way the X, Y prior points
    truth, ds = collider_data(0)
    result = repair_loop(ds, PriorSet.of([(Y, X), (X, Z)]))
    log = result.log
    suspected = log.ever_suspected()
    both = {(Y, X), (X, Y)} <= suspected
    assert both, log.to_dict()
    assert (Y, X) not in result.priors and (X, Y) not in result.priors
    assert frozenset((X, Y)) in log.forbidden_pairs
    removal_round = next(r.iteration for r in log.records if (X, Y) in r.removed)
    for rec in log.records[removal_round:]:
        assert not rec.graph.adjacent(X, Y)


def test_iteration_limit_bounds_rounds():
    truth = random_er_dag(12, 14, 5)
    ds = forward_sample(random_parameterize(truth, [2] * 12, rng_seed=5), 3000, 5)
    priors = sample_priors(truth, 0, 5, PriorClass.REVERSED_DIRECT, 5)
    for il in (1, 2, 10):
        result = repair_loop(ds, priors, DetectorConfig(iteration_limit=il))
        assert result.log.rounds <= il
    assert repair_loop(ds, priors, DetectorConfig(iteration_limit=1)).log.rounds == 1


def test_forbidden_pairs_never_reappear():
    for seed in range(10):
        truth = random_er_dag(12, 14, seed)
        ds = forward_sample(random_parameterize(truth, [2] * 12, rng_seed=seed), 3000, seed)
        priors = sample_priors(truth, 2, 4, None, seed)
        log = repair_loop(ds, priors).log
        forbidden_since = {}
        for rec in log.records:
            for e in rec.removed:
                forbidden_since.setdefault(frozenset(e), rec.iteration)
        for rec in log.records:
            for pair, since in forbidden_since.items():
                if rec.iteration >= since:
                    assert not rec.graph.adjacent(*sorted(pair))


def test_shared_cache_gives_same_result():
    truth = random_er_dag(10, 12, 2)
    ds = forward_sample(random_parameterize(truth, [2] * 10, rng_seed=2), 2000, 2)
    priors = sample_priors(truth, 2, 2, None, 2)
    a = repair_loop(ds, priors)
    b = repair_loop(ds, priors, cache=ScoreCache(ds))
    assert a.dag == b.dag and a.priors == b.priors


def test_log_serialises_with_names():
    truth, ds = collider_data(1, 5000)
    log = repair_loop(ds, PriorSet.of([(Y, X)])).log
    d = log.to_dict(["X", "Y", "Z"])
    assert d["records"][0]["priors"] == [["Y", "X"]]
    assert d["rounds"] == log.rounds
    assert isinstance(RepairLog().to_dict()["records"], list)


def test_retention_without_true_triangles():
    full = 0
    seed = 0
    runs = 0
    while runs < 50:
        truth = random_er_dag(12, 12, seed)
        seed += 1
        if count_qc3(truth):
            continue
        bn = random_parameterize(truth, [2] * 12, rng_seed=seed)
        ds = forward_sample(bn, 50_000, seed)
        priors = sample_priors(truth, 3, 0, None, seed)
        result = repair_loop(ds, priors)
        full += result.priors.as_set() == priors.as_set()
        runs += 1
    assert full >= 45


def test_reversed_prior_raises_triangle_count_on_average():
    with_prior, without = [], []
    for seed in range(100):
        truth = random_er_dag(20, 20, seed)
        bn = random_parameterize(truth, [2] * 20, rng_seed=[seed, 1])
        ds = forward_sample(bn, 5000, [seed, 2])
        cache = ScoreCache(ds)
        prior = sample_priors(truth, 0, 1, PriorClass.REVERSED_DIRECT, seed)
        without.append(count_qc3(hill_climb(ds, cache=cache)))
        with_prior.append(count_qc3(hill_climb(ds, ConstraintSet.of(prior), cache=cache)))
    assert np.mean(with_prior) > np.mean(without)


def test_bootstrap_deterministic_and_trivial_on_independent_data():
    rng = np.random.default_rng(0)
    ds = Dataset(tuple(binary_variables(4)), rng.integers(0, 2, size=(20_000, 4)))
    g, log = bootstrap_self_priors(ds, 3)
    assert g == hill_climb(ds)
    truth = random_er_dag(8, 9, 3)
    ds = forward_sample(random_parameterize(truth, [2] * 8, rng_seed=3), 2000, 3)
    a, la = bootstrap_self_priors(ds, 4)
    b, lb = bootstrap_self_priors(ds, 4)
    assert a == b and la.to_dict() == lb.to_dict()
    with pytest.raises(ValueError):
        bootstrap_self_priors(ds, 0)


def test_pinning_early_adds_reproduces_plain_search():
    # when no early edge is touched again, pinning them changes nothing
    checked = 0
    for seed in range(20):
        truth = random_er_dag(10, 11, seed)
        ds = forward_sample(random_parameterize(truth, [2] * 10, rng_seed=seed), 3000, seed)
        trace = hill_climb_trace(ds)
        k = 3
        early = [(m.tail, m.head) for m in trace.moves[:k]]
        if len(early) < k or any(m.kind != "add" for m in trace.moves[:k]):
            continue
        later = {(m.tail, m.head) for m in trace.moves[k:]}
        if later & set(early):
            continue
        assert hill_climb(ds, ConstraintSet.of(early)) == trace.dag
        checked += 1
    assert checked >= 5


def _bootstrap_vs_plain(k):
    boot, plain = [], []
    for seed in range(50):
        truth = random_er_dag(20, 20, seed)
        bn = random_parameterize(truth, [2] * 20, rng_seed=[seed, 1])
        ds = forward_sample(bn, 5000, [seed, 2])
        cache = ScoreCache(ds)
        plain.append(shd_decompose(hill_climb(ds, cache=cache), truth).shd)
        g, _ = bootstrap_self_priors(ds, k, cache=cache)
        boot.append(shd_decompose(g, truth).shd)
    return np.mean(boot), np.mean(plain)


BOOTSTRAP_XFAIL = pytest.mark.xfail(
    strict=True,
    reason="early adds carry arbitrary orientations under a score-equivalent BIC; "
    "pinning several of them costs more SHD than the repair loop wins back",
)


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, pytest.param(3, marks=BOOTSTRAP_XFAIL), pytest.param(5, marks=BOOTSTRAP_XFAIL)])
def test_bootstrap_not_worse_than_plain_hill_climb(k):
    boot, plain = _bootstrap_vs_plain(k)
    assert boot <= plain + 0.5
