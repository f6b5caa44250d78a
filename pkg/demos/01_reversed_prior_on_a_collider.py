"""
A reversed prior on a collider
==============================

Three binary variables with ``X -> Y <- Z``. X and Z are independent until
Y is observed. We pin the wrong edge ``Y -> X`` and watch what the search
does with it.
"""

import numpy as np

from qbn import (
    BayesNet, ConstraintSet, Cpt, Dag, PriorSet, VariableSpec,
    count_qc3, forward_sample, hill_climb, repair_loop, shd_decompose,
)

X, Y, Z = 0, 1, 2
names = ["X", "Y", "Z"]
truth = Dag.from_edges(3, [(X, Y), (Z, Y)])

# P(Y = 1 | X, Z) rises by about 0.3 for each active parent
cpts = (
    Cpt(X, (), np.array([[0.5, 0.5]])),
    Cpt(Y, (X, Z), np.array([[0.9, 0.1], [0.6, 0.4], [0.6, 0.4], [0.3, 0.7]])),
    Cpt(Z, (), np.array([[0.4, 0.6]])),
)
bn = BayesNet(truth, tuple(VariableSpec(n, 2) for n in names), cpts)
data = forward_sample(bn, 20_000, rng_seed=0)


def show(label, g):
    edges = ", ".join(f"{names[t]}->{names[h]}" for t, h in g.sorted_edges())
    print(f"{label:<22} {edges:<24} triangles={count_qc3(g)}  SHD={shd_decompose(g, truth).shd}")


# %%
# Without priors the search finds the collider.
show("no prior", hill_climb(data))

# %%
# With ``Y -> X`` pinned the collider can no longer be drawn. To keep X and Z
# dependent given Y, the search has to join X and Z directly, closing a
# triangle around the prior.
show("prior Y->X pinned", hill_climb(data, ConstraintSet.of([(Y, X)])))

# %%
# The repair loop flags every prior that sits on a triangle, reverses it,
# and learns again.
result = repair_loop(data, PriorSet.of([(Y, X)]))
for rec in result.log.records:
    sus = [f"{names[t]}->{names[h]}" for t, h in rec.suspected]
    stage = "initial learn" if rec.iteration == 0 else f"round {rec.iteration}"
    print(f"{stage}: suspected {sus or 'nothing'}")
show("after repair", result.dag)
print("final priors:", [f"{names[t]}->{names[h]}" for t, h in result.priors])
