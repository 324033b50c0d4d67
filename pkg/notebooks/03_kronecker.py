"""
Simultaneous approximation
==========================

For rationally independent reals the multiples ``k·θ_i`` come arbitrarily
close to integers together.  The search here is a brute-force scan.
"""
# %%
import numpy as np

from saari import kronecker

# %%
sqrt2 = np.sqrt(2)
hits = kronecker.simultaneous_approx(kronecker.KroneckerQuery((sqrt2,), epsilon=0.01, k_max=200))
print("√2, ε = 0.01:", [(h.k, round(h.deviations[0], 6)) for h in hits])
print("convergent denominators:", kronecker.convergent_denominators(sqrt2, 200))

# %%
phi = (1 + np.sqrt(5)) / 2
hits = kronecker.simultaneous_approx(kronecker.KroneckerQuery((phi,), 0.01, 100))
print("golden ratio:", [h.k for h in hits])

# %%
# Two numbers at once needs larger k.
hit = kronecker.first_hit((sqrt2, np.sqrt(3)), epsilon=0.01, k_max=10**6)
print("(√2, √3):", hit.k, np.round(hit.deviations, 6))

# %%
# Smaller windows, first hits.
for eps in (0.1, 0.03, 0.01, 0.003):
    hit = kronecker.first_hit((sqrt2, np.sqrt(3)), epsilon=eps, k_max=10**6)
    print(f"ε = {eps:<6} k = {hit.k if hit else None}")

# %%
# Denseness: the orbit of k·θ also visits any target box.
k = kronecker.denseness_witness((sqrt2, np.sqrt(3)), (0.5, 0.25), 0.01, 10**6)
print("first k with ({k√2}, {k√3}) near (0.5, 0.25):", k)

# %%
# The quarter window used for phase alignment: every multiple within 1/4 of an integer.
hit = kronecker.first_hit((0.3, 0.7), k_max=100, window=kronecker.Window.QUARTER)
print("(0.3, 0.7) quarter window:", hit.k, hit.deviations)
