"""
Mixed priors on the Asia network
================================

Draw a handful of correct and erroneous priors for the bundled Asia network
and compare plain hill climbing (priors as hard constraints) with the
repair loop.
"""

from qbn import (
    ConstraintSet, DetectorConfig, EvalReport, PriorClass, classify_prior,
    forward_sample, hill_climb, repair_loop, sample_priors,
)
from qbn.io import load_network

bn = load_network("asia")
names = bn.names
truth = bn.dag
data = forward_sample(bn, 1000, rng_seed=0)

priors = sample_priors(truth, n_correct=2, n_wrong=2, rng_seed=0)
for t, h in priors:
    print(f"prior {names[t]:>6} -> {names[h]:<6} {classify_prior(truth, (t, h)).value}")

# %%
# Plain search keeps every prior, right or wrong.
hc = hill_climb(data, ConstraintSet.of(priors))
print("HC      ", EvalReport.build(hc, truth))

# %%
# The repair loop reverses or drops priors that close triangles.
result = repair_loop(data, priors, DetectorConfig(iteration_limit=10))
print("Quasi-HC", EvalReport.build(result.dag, truth))
for rec in result.log.records[1:]:
    for label, edges in (("reversed", rec.reversed), ("removed", rec.removed)):
        for t, h in edges:
            print(f"  round {rec.iteration}: {label} {names[t]} -> {names[h]}")
kept = [(t, h) for t, h in priors if (t, h) in result.priors]
print("priors kept unchanged:", [f"{names[t]}->{names[h]}" for t, h in kept])
print("wrong priors ever suspected:",
      [f"{names[t]}->{names[h]}" for t, h in priors
       if classify_prior(truth, (t, h)) is not PriorClass.CORRECT and (t, h) in result.log.ever_suspected()])

# %%
# One draw says little. Across draws the outcome swings both ways: a wrong
# prior that shares a triangle with a correct one can drag the correct one
# into the suspect list too.
for seed in range(1, 8):
    d = forward_sample(bn, 1000, rng_seed=seed)
    p = sample_priors(truth, n_correct=2, n_wrong=2, rng_seed=seed)
    plain = EvalReport.build(hill_climb(d, ConstraintSet.of(p)), truth).shd
    fixed = EvalReport.build(repair_loop(d, p).dag, truth).shd
    kinds = " ".join(classify_prior(truth, e).short for e in p)
    print(f"seed {seed}: priors {kinds:<14} SHD HC {plain:>2}  Quasi-HC {fixed:>2}")
