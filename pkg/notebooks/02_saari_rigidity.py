"""
Rigidity of trigonometric loops
===============================

Along a loop ``q_i(t) = a_i cos(ωt) + b_i sin(ωt)`` each squared distance is
``A + B cos(2ωt + θ)``.  The potential is constant exactly when every B
vanishes, which makes the motion a rigid rotation.  Here we build a rotating
equilateral triangle, deform it, and compare the series and quadrature
spectra of U.
"""
# %%
import numpy as np

from saari import mechanics, trig_harmonics, variational
from saari.central_config import CentralConfigResult

# %%
side = 1.0
ang = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
q0 = side / np.sqrt(3) * np.column_stack([np.cos(ang), np.sin(ang)])
central = CentralConfigResult.from_configuration([1, 1, 1], q0, normalize=False)
loop = variational.build_relative_equilibrium(central)
print(f"period {loop.T:.12f} (2π/√3 = {2 * np.pi / np.sqrt(3):.12f})")

rep = trig_harmonics.rigidity_check(loop)
print("rigid:", rep.rigid, " max C:", f"{rep.max_C:.1e}")

t = loop.sample_times(256)
q, acc = loop.positions(t), loop.accelerations(t)
res = max(mechanics.newton_residual(loop.masses, q[k], acc[k]) for k in range(len(t)))
print(f"max Newton residual {res:.1e}")

# %%
# Shrink the relative sine vector of bodies 1 and 2 so that pair gets
# a modulation ratio of about 0.27.
b = loop.b.copy()
d = b[1] - b[0]
b[0] += 0.24 * d / 2
b[1] -= 0.24 * d / 2
bent = trig_harmonics.TrigLoop(loop.masses, loop.a, b, loop.T)
for ph in trig_harmonics.pair_harmonics(bent):
    print(f"pair ({ph.j},{ph.k})  A {ph.A:.5f}  B {ph.B:.5f}  C {ph.C:.5f}  θ {ph.theta:.4f}")
U = mechanics.potential(bent.masses, bent.positions(t))
print(f"std(U)/mean(U) = {np.std(U) / np.mean(U):.3e}")

# %%
# Spectrum of U: the pair series and the discrete Fourier transform agree.
print(" n  |quadrature|        |series|")
for n, re, im, series_value, quad_value in trig_harmonics.spectrum_table(bent, 6, 1024):
    print(f"{n:2d}  {quad_value:.12e}  {series_value:.12e}")

# %%
# Odd multiples of the base frequency vanish because U has half the period.
even, odd = trig_harmonics.potential_spectrum_quadrature(bent, 4, 256, odd=True)
print("largest odd coefficient", f"{np.abs(odd).max():.1e}")

# %%
# The certificate: a harmonic index n that aligns all phases makes the
# real part of the n-th coefficient a sum of positive terms.  With the
# hypothesis check switched off this shows the non-zero coefficient.
cert = trig_harmonics.constant_potential_certificate(bent, check_hypothesis=False)
print(f"n = {cert.n}, real part {cert.real_sum:.4e}, concluded rigid: {cert.concluded_rigid}")

# %%
# Full modulation (C = 1) is a collision orbit.  The coefficient series
# diverges there, like log(number of terms).  Sums shown without the
# mass and amplitude prefactor.
sums = trig_harmonics.series_partial_sums(1.0, 1, 10**6)
for L in (10, 10**2, 10**3, 10**4, 10**5, 10**6):
    print(f"L = {L:>7d}  partial sum {sums[L - 1]:.5f}")
