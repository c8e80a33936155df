"""
Photons from a pulsed coupling
==============================

Switching the medium-environment coupling G(t) on and off squeezes the
polariton vacuum and creates pairs: a polariton in the medium and a partner
quantum in the environment. To first order in G, the amplitude for a pair
(k, kappa) is set by the Fourier transform of G at the sum of the two
frequencies.

Run:  python3 demos/radiation_from_a_pulse.py
"""

import numpy as np

from dissipative_hopfield import (
    Lorentzian,
    MediumParams,
    Step,
    extract_bogoliubov,
    first_order_coeffs,
    lorentzian_yield_closed_form,
    spectrum_first_order,
    sudden_switch_cutoff_scan,
    total_yield,
    unitarity_defect,
)

medium = MediumParams(omega=1.0, g=1.5)

# %%
# A Lorentzian pulse G(t) = G0 / (1 + t^2/tau^2). Its transform decays like
# exp(-tau |omega|), so slow pulses barely radiate at all.
pulse = Lorentzian(G0=0.5, tau=10.0)
spectrum = spectrum_first_order(medium, pulse, [0.1, 0.3, 0.6, 1.0])
for k, n in zip(spectrum.k, spectrum.n_minus):
    print(f"lower-band occupation at k = {k:.1f}: {n:.3e}")

# Integrating over k gives the number of particles per unit length. The
# slow-pulse closed form scales as G0^2 / tau^2; the direct double quadrature
# reproduces it up to one global constant (here 1/2).
num = total_yield(medium, pulse).N_over_l
closed = lorentzian_yield_closed_form(medium, 0.5, 10.0).N_over_l
print(f"N/l: double quadrature {num:.5e}, closed form {closed:.5e}, ratio {num / closed:.4f}")

# %%
# The exact (all orders in G) solution of one k mode. For a weak pulse its
# |beta| agrees with first order; the Bogoliubov relations hold throughout.
weak = Lorentzian(G0=0.1, tau=2.0)
exact = extract_bogoliubov(medium, weak, 0.5)
first = first_order_coeffs(medium, weak, 0.5, exact.kappa, "-")
dev = np.linalg.norm(np.abs(exact.beta_env[0]) - np.abs(first.beta)) / np.linalg.norm(np.abs(first.beta))
print(f"exact vs first-order |beta|: relative deviation {dev:.2e}; unitarity defect {unitarity_defect(exact):.1e}")

# %%
# A sudden switch-off, G(t) = G0 for t < 0, has a transform falling only like
# 1/omega. The occupation keeps growing with the environment cutoff Lambda,
# logarithmically, so the answer depends on how the switch is regularized.
L = np.geomspace(10.0, 1000.0, 5)
scan = sudden_switch_cutoff_scan(medium, 0.1, 1.0, "-", L)
for lam, n in zip(L, scan.n):
    print(f"step: Lambda = {lam:7.1f}  n = {n:.4e}")
smooth = sudden_switch_cutoff_scan(medium, 0.1, 1.0, "-", L, profile=Lorentzian(0.1, 2.0))
print(f"smooth pulse over the same cutoffs: n spread {np.ptp(smooth.n):.1e}")
