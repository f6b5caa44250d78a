import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbn.detector import IterationRecord, RepairLog
from qbn.evaluation import REPORT_FIELDS, EvalReport, detection_rate, retention_rate, shd_decompose
from qbn.graph import Dag, DirectedEdge, random_er_dag

from .oracles import brute_shd


def test_shd_examples():
    g = random_er_dag(6, 7, 0)
    assert shd_decompose(g, g) == (0, 0, 0, 0)
    assert shd_decompose(Dag.from_edges(2, [(1, 0)]), Dag.from_edges(2, [(0, 1)])) == (0, 0, 1, 1)
    assert shd_decompose(Dag.from_edges(3, [(0, 2)]), Dag.from_edges(3, [(0, 1)])) == (1, 1, 0, 2)
    with pytest.raises(ValueError):
        shd_decompose(Dag(2, frozenset()), Dag(3, frozenset()))


@settings(max_examples=500, deadline=None)
@given(st.integers(2, 10), st.data())
def test_shd_matches_pairwise_oracle(n, data):
    top = n * (n - 1) // 2
    a = random_er_dag(n, data.draw(st.integers(0, top)), data.draw(st.integers(0, 10**6)))
    b = random_er_dag(n, data.draw(st.integers(0, top)), data.draw(st.integers(0, 10**6)))
    assert tuple(shd_decompose(a, b)) == brute_shd(a, b)
    swapped = shd_decompose(b, a)
    ab = shd_decompose(a, b)
    assert (swapped.missing, swapped.extra, swapped.reversed) == (ab.extra, ab.missing, ab.reversed)


def test_retention_examples():
    correct = [(0, 1), (2, 3)]
    assert retention_rate(correct, correct) == 1.0
    assert retention_rate(correct, [(0, 1), (3, 2)]) == 0.5
    assert retention_rate([], [(0, 1)]) is None


def _log(*suspected_rounds):
    g = Dag(4, frozenset())
    records = [
        IterationRecord(i, tuple(DirectedEdge(*e) for e in sus), (), (), (), (), g)
        for i, sus in enumerate(suspected_rounds)
    ]
    return RepairLog(records)


def test_detection_examples():
    wrong = [(1, 0), (3, 2), (2, 0), (3, 1)]
    assert detection_rate(wrong, _log(wrong)) == 1.0
    assert detection_rate(wrong, _log([], [])) == 0.0
    assert detection_rate(wrong, _log([(1, 0)], [(3, 2), (0, 1)])) == 0.5
    assert detection_rate([], _log([(1, 0)])) is None


def test_eval_report_invariants():
    r = EvalReport.build(Dag.from_edges(3, [(0, 1), (1, 2), (0, 2)]), Dag.from_edges(3, [(0, 1)]), 0.5, None)
    assert (r.missing, r.extra, r.reversed, r.shd, r.qc3) == (0, 2, 0, 2, 1)
    assert tuple(r.to_dict()) == REPORT_FIELDS
    with pytest.raises(ValueError):
        EvalReport(1, 1, 1, 4, 0)
    with pytest.raises(ValueError):
        EvalReport(0, 0, 0, 0, 0, retained_rate=1.5)
