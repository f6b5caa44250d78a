"""
How often does a true edge touch another parent?
================================================

Triangles only appear around a reversed prior when one of its endpoints has
another parent. For random DAGs with n nodes and |E| edges this happens with
probability bounded below by a closed form; here it is checked by simulation.
"""

from qbn.graph import analytic_bound_pa, binomial_se, monte_carlo_event_a

print(f"{'n':>5}{'|E|':>6}{'bound':>9}{'simulated':>11}{'+-3se':>8}")
for n in (10, 20, 30, 100):
    for m in (n, (3 * n) // 2):
        est = monte_carlo_event_a(n, m, 50_000, rng_seed=[n, m])
        print(f"{n:>5}{m:>6}{analytic_bound_pa(n, m):>9.4f}{est:>11.4f}{3 * binomial_se(est, 50_000):>8.4f}")

# %%
# For large graphs the bound approaches 0.75 at |E| = n and about 0.89 at
# |E| = 1.5 n.
print(f"n=1000: {analytic_bound_pa(1000, 1000):.4f} (|E|=n), {analytic_bound_pa(1000, 1500):.4f} (|E|=1.5n)")
