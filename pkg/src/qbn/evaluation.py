"""Structure-recovery metrics: SHD decomposition, retention and detection rates."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple

from .detector import RepairLog
from .graph import Dag, DirectedEdge, count_qc3


class ShdCounts(NamedTuple):
    missing: int
    extra: int
    reversed: int
    shd: int


def shd_decompose(learned: Dag, truth: Dag) -> ShdCounts:
    """Split SHD into missing, extra and reversed edges.

    A misoriented edge counts once, as reversed, and never as missing or extra.
    """
    if learned.node_count != truth.node_count:
        raise ValueError(
            f"node count mismatch: {learned.node_count} vs {truth.node_count}"
        )
    reversed_ = sum(1 for t, h in learned.edges if (h, t) in truth.edges)
    extra = sum(1 for t, h in learned.edges if (t, h) not in truth.edges and (h, t) not in truth.edges)
    missing = sum(1 for t, h in truth.edges if (t, h) not in learned.edges and (h, t) not in learned.edges)
    return ShdCounts(missing, extra, reversed_, missing + extra + reversed_)


def retention_rate(initial_correct: Iterable[tuple[int, int]], final: Iterable[tuple[int, int]]) -> float | None:
    """Share of the initially correct priors still present with the same orientation."""
    initial = {DirectedEdge(*e) for e in initial_correct}
    if not initial:
        return None
    final_set = {DirectedEdge(*e) for e in final}
    return len(initial & final_set) / len(initial)


def detection_rate(initial_wrong: Iterable[tuple[int, int]], log: RepairLog) -> float | None:
    """Share of the initially wrong priors suspected in any round."""
    wrong = {DirectedEdge(*e) for e in initial_wrong}
    if not wrong:
        return None
    return len(wrong & log.ever_suspected()) / len(wrong)


@dataclass(frozen=True)
class EvalReport:
    missing: int
    extra: int
    reversed: int
    shd: int
    qc3: int
    retained_rate: float | None = None
    detected_rate: float | None = None

    def __post_init__(self) -> None:
        if self.shd != self.missing + self.extra + self.reversed:
            raise ValueError("shd must equal missing + extra + reversed")
        for rate in (self.retained_rate, self.detected_rate):
            if rate is not None and not 0.0 <= rate <= 1.0:
                raise ValueError(f"rate {rate} outside [0, 1]")

    @classmethod
    def build(
        cls,
        learned: Dag,
        truth: Dag,
        retained_rate: float | None = None,
        detected_rate: float | None = None,
    ) -> "EvalReport":
        counts = shd_decompose(learned, truth)
        return cls(*counts, qc3=count_qc3(learned), retained_rate=retained_rate, detected_rate=detected_rate)

    def to_dict(self) -> dict:
        return asdict(self)


REPORT_FIELDS = ("missing", "extra", "reversed", "shd", "qc3", "retained_rate", "detected_rate")
