"""
A lossy dielectric and its polaritons
=====================================

The medium is a continuum of polarization oscillators (frequency Omega,
light coupling g) that leak energy into an environment through a coupling
G. With G constant, the environment can be eliminated exactly and the
medium looks like a damped Lorentz oscillator.

Run:  python3 demos/polaritons_and_loss.py
"""

import numpy as np

from dissipative_hopfield import (
    MediumParams,
    band_frequencies,
    band_gap,
    damping_info,
    hopfield_diagonalize,
    permittivity,
)

# A medium with g = 3 Omega / 2 has static refractive index n = sqrt(1 + g^2/Omega^2).
medium = MediumParams(omega=1.0, g=1.5)
print(f"n = {medium.n:.6f}, eps(0) = {permittivity(medium, 0.5, 0.0).real}")

# %%
# Absorption sits at the bare resonance. G = sqrt(Omega)/2 is well inside the
# underdamped regime (G^2 < 4 Omega), so Im eps has a single sharp peak.
w = np.linspace(0.005, 3.0, 600)
im = permittivity(medium, 0.5, w).imag
print(f"Im eps is largest at omega = {w[np.argmax(im)]:.3f}")

# The oscillator itself decays at Gamma = G^2/4; at low frequency the wave
# damping Im sqrt(eps) grows linearly with a slope fixed by Gamma and n.
d = damping_info(medium, 0.5)
print(f"Gamma = {d.gamma}, low-frequency slope of Im sqrt(eps) = {d.im_sqrt_eps_slope:.7f}")

# %%
# Without loss the field and the oscillators hybridize into two polariton
# bands separated by a gap of (n - 1) Omega.
medium = MediumParams(omega=1.0, g=5.0 / 6.0)
for k in (0.0, 0.5, 1.0, 2.0, 50.0):
    lo, hi = band_frequencies(medium, k)
    print(f"k = {k:5.1f}:  omega- = {lo:.6f}   omega+ = {hi:.6f}")
print(f"gap = {band_gap(medium):.6f}  (sqrt(61)/6 - 1 = {np.sqrt(61) / 6 - 1:.6f})")

# %%
# The same frequencies come out of a symplectic diagonalization of the
# quadratic Hamiltonian, which also gives the mode vectors used downstream.
basis = hopfield_diagonalize(medium, 1.0)
print(f"frequencies at k = 1: {basis.frequencies}, symplectic defect {basis.symplectic_defect():.1e}")
