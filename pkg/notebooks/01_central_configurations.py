"""
Central configurations from IU² minimization
============================================

Central configurations are the critical points of ``I·U²``.  This script
minimizes that function for a few mass vectors, on the line and in the
plane, and checks the results against closed forms.
"""
# %%
import numpy as np

from saari import central_config, mechanics

# %%
# Two bodies: every configuration is central, and with unit masses at unit
# separation I = 1/2 and U = 1.
res = central_config.minimize_iu2([1, 1], d=2)
print(f"N=2     IU² = {res.value:.12f}  residual {res.residual:.1e}")

# %%
# Three equal masses: the planar minimum is the equilateral triangle (IU² = 9),
# the collinear one is the Euler configuration with the middle body at the
# center (IU² = 12.5).
for d in (1, 2):
    res = central_config.minimize_iu2([1, 1, 1], d=d)
    print(f"N=3 d={d} IU² = {res.value:.10f}  lambda {res.lam:.6f}")
    print("   distances", np.round(mechanics.pairwise_distances(res.q), 8))

# %%
# Four equal masses.  The planar minimum is the square, 2(4 + √2)².
cmp = central_config.compare_dimensions([1, 1, 1, 1])
print(f"N=4 collinear {cmp['inf_d1']:.8f}, planar {cmp['inf_d2']:.8f} ({cmp['relation']})")
print(f"    square value {2 * (4 + np.sqrt(2)) ** 2:.8f}")

# %%
# Unequal masses.  The minimizer is still a triangle with equal sides (the
# Lagrange configuration), now with the center of mass off the centroid.
res = central_config.minimize_iu2([1, 2, 3])
print("masses (1,2,3) distances", np.round(mechanics.pairwise_distances(res.q), 10))
print("central-configuration residual", f"{mechanics.central_config_residual(res.masses, res.q):.1e}")
