"""
Action minimization over zero-mean loops
========================================

Among periodic loops with zero time average, the action is bounded below by
``3 (inf IU² π²/2)^{1/3} T^{1/3}``, with equality only at relative
equilibria through a minimizer of IU².  We minimize the action numerically
and watch the bound become tight.
"""
# %%
import numpy as np

from saari import central_config, mechanics, variational

T = 2 * np.pi

# %%
for masses in ([1, 1], [1, 1, 1], [1, 2, 3]):
    central = central_config.minimize_iu2(masses)
    loop, rep = variational.minimize_action(masses, T, order=4, central=central)
    print(f"masses {masses}: action {rep.action:.10f}, bound {rep.lower_bound:.10f}, gap {rep.gap:.1e}")
    print(f"   (i) {rep.condition_i:.12f}  (ii) {rep.condition_ii:.1e}  (iii) {rep.condition_iii:.1e}  {rep.verdict}")

# %%
# The links of the chain for a random loop.
rng = np.random.default_rng(1)
loop = variational.FourierLoop([1, 1, 1], T, 0.6 * rng.normal(size=(3, 3, 2)), 0.6 * rng.normal(size=(3, 3, 2)))
t = loop.sample_times(1024)
q = loop.positions(t)
I, U = mechanics.moment_of_inertia(loop.masses, q), mechanics.potential(loop.masses, q)
print("action", variational.action_functional(loop))
print("  after Wirtinger ", T * np.mean(0.5 * loop.omega**2 * I + U))
print("  after AM-GM     ", T * np.mean(3 * np.cbrt(0.125 * loop.omega**2 * I * U * U)))
print("  lower bound     ", variational.action_lower_bound(T, 9.0))

# %%
# The minimizer is a classical solution: sampled as a trajectory it
# satisfies Newton's equations.
loop, rep = variational.minimize_action([1, 1, 1], T, order=4)
t = loop.sample_times(64)
q, acc = loop.positions(t), loop.accelerations(t)
print("max Newton residual", max(mechanics.newton_residual(loop.masses, q[k], acc[k]) for k in range(64)))

# %%
# Four equal masses: a single start can stop at a local minimum above the
# bound, so the verdict depends on the starts.
loop, rep = variational.minimize_action([1, 1, 1, 1], T, order=2, starts=4)
print(f"N=4: action {rep.action:.6f}, bound {rep.lower_bound:.6f}, {rep.verdict}")
