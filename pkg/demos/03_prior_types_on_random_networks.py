"""
Which wrong priors create triangles?
====================================

Random 20-node, 20-edge networks with binary variables. For each type of
erroneous prior we pin six of them and count three-node quasi-circles and
SHD in the learned graph. Order-reversing priors are the ones that leave a
visible trace.
"""

from qbn.experiments import find_aggregate, run_experiment
from qbn.io import config_from_dict

REPS = 20
kinds = ["RD", "RI", "Ind", "Irr"]
cfg = config_from_dict({
    "network": {"random": {"nodes": 20, "edges": 20}},
    "sample_size": 5000,
    "priors": [{}] + [{"n_wrong": 6, "wrong_type": k} for k in kinds],
    "repetitions": REPS,
    "methods": ["hc"],
})
report = run_experiment(cfg)

print(f"{'priors':<10}{'qc3':>8}{'SHD':>8}{'missing':>9}{'extra':>8}{'reversed':>10}")
for n_wrong, kind in [(0, "none")] + [(6, k) for k in kinds]:
    row = {m: find_aggregate(report, m, "hc", 0, n_wrong, kind)["mean"]
           for m in ("qc3", "shd", "missing", "extra", "reversed")}
    label = "none" if n_wrong == 0 else f"6 {kind}"
    print(f"{label:<10}{row['qc3']:>8.2f}{row['shd']:>8.2f}{row['missing']:>9.2f}"
          f"{row['extra']:>8.2f}{row['reversed']:>10.2f}")
