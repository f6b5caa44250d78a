"""Bayesian network structure learning with quasi-circle checks on edge priors."""

from .bayesnet import BayesNet, Cpt, Dataset, VariableSpec, forward_sample, random_parameterize
from .detector import DetectorConfig, RepairLog, RepairResult, bootstrap_self_priors, find_suspicious, repair_loop
from .evaluation import EvalReport, shd_decompose
from .graph import Dag, DirectedEdge, QuasiCircle, count_qc3, markov_equivalent, random_er_dag
from .priors import PriorClass, PriorSet, classify_prior, sample_priors
from .scoring import ScoreCache, bic_local, bic_total
from .search import ConstraintSet, SearchConfig, hill_climb, hill_climb_trace

__version__ = "0.1.0"

__all__ = [
    "BayesNet", "Cpt", "Dataset", "VariableSpec", "forward_sample", "random_parameterize",
    "DetectorConfig", "RepairLog", "RepairResult", "bootstrap_self_priors", "find_suspicious", "repair_loop",
    "EvalReport", "shd_decompose",
    "Dag", "DirectedEdge", "QuasiCircle", "count_qc3", "markov_equivalent", "random_er_dag",
    "PriorClass", "PriorSet", "classify_prior", "sample_priors",
    "ScoreCache", "bic_local", "bic_total",
    "ConstraintSet", "SearchConfig", "hill_climb", "hill_climb_trace",
]
