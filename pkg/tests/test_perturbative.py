import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipative_hopfield import (
    DeltaNPulse,
    Gaussian,
    Lorentzian,
    MediumParams,
    Step,
    ZeroProfile,
    band_frequencies,
    band_weight,
    convention_constant,
    delta_n_yield_closed_form,
    first_order_coeffs,
    lorentzian_yield_closed_form,
    spectrum_first_order,
    sudden_switch_cutoff_scan,
    total_yield,
)
from dissipative_hopfield.errors import DivergentYield, QuadratureNotConverged, ZeroFrequencyMode
from dissipative_hopfield.perturbative import (
    lorentzian_yield_gamma_form,
    occupation_first_order,
    step_occupation_closed_form,
)

P = MediumParams(1.0, 1.5)

# ---------------------------------------------------------------- coefficients


def test_zero_profile_gives_zero_coefficients():
    c = first_order_coeffs(P, ZeroProfile(), 0.5, np.array([0.3, 2.0]), "-")
    assert np.all(c.alpha == 0) and np.all(c.beta == 0)


def test_zero_frequency_mode_rejected():
    with pytest.raises(ZeroFrequencyMode):
        first_order_coeffs(P, Lorentzian(0.1, 1.0), 0.0, [1.0], "-")


@given(st.floats(0.01, 8), st.floats(-30, 30).filter(lambda x: abs(x) > 1e-6), st.sampled_from("-+"),
       st.floats(0.01, 2), st.floats(0.2, 20))
@settings(max_examples=80)
def test_beta_modulus_identity(k, kappa, band, G0, tau):
    G = Lorentzian(G0, tau)
    c = first_order_coeffs(P, G, k, np.array([kappa]), band)
    w = band_frequencies(P, k)[0 if band == "-" else 1]
    rho, sigma = P.rho(k), P.sigma(k)
    # Psi content of the band: (rho + sigma) for the lower band, (rho - sigma) for the upper
    num = rho + sigma if band == "-" else rho - sigma
    expected = num / (8 * rho * w) * abs(kappa) * abs(G.fourier(w + abs(kappa))) ** 2
    assert abs(c.beta[0]) ** 2 == pytest.approx(expected, rel=1e-12, abs=1e-300)
    alpha_expected = num / (8 * rho * w) * abs(kappa) * abs(G.fourier(w - abs(kappa))) ** 2
    assert abs(c.alpha[0]) ** 2 == pytest.approx(alpha_expected, rel=1e-12, abs=1e-300)


def test_lorentzian_beta_decays_exponentially_in_tau():
    tau = 4.0
    kap = np.array([0.5, 1.0, 1.5])
    c = first_order_coeffs(P, Lorentzian(0.1, tau), 0.6, kap, "-")
    ratio = np.abs(c.beta) ** 2 / kap
    slope = np.diff(np.log(ratio)) / np.diff(kap)
    assert np.allclose(slope, -2 * tau, rtol=1e-12)


@given(st.floats(0, 10))
def test_coefficients_linear_in_G(c):
    k, kap = 0.8, np.array([0.1, 0.7, 3.0])
    a = first_order_coeffs(P, Gaussian(0.3, 2.0), k, kap, "+")
    b = first_order_coeffs(P, Gaussian(0.3, 2.0).scaled(c), k, kap, "+")
    assert np.allclose(b.beta, c * a.beta, rtol=1e-14, atol=0)
    assert np.allclose(b.alpha, c * a.alpha, rtol=1e-14, atol=0)


# ---------------------------------------------------------------- spectra


@pytest.mark.parametrize("k", [0.2, 0.9, 3.0])
@pytest.mark.parametrize("band", "-+")
def test_kappa_integral_closed_form_for_lorentzian(k, band):
    G0, tau = 0.1, 3.0
    w = band_frequencies(P, k)[0 if band == "-" else 1]
    # int_R |kappa| e^{-2 tau (w + |kappa|)} = e^{-2 tau w} / (2 tau^2)
    expected = band_weight(P, k, band) * (G0 * tau) ** 2 * (math.pi / 2) * math.exp(-2 * tau * w) / (2 * tau**2)
    n, _ = occupation_first_order(P, Lorentzian(G0, tau), k, band)
    assert n == pytest.approx(expected, rel=1e-8)


def test_upper_band_negligible_for_slow_pulse():
    G = Lorentzian(0.1, 10.0)
    k = np.linspace(0.05, 3.0, 12)
    s = spectrum_first_order(P, G, k)
    assert s.all_converged
    # matched density: compare at equal k
    assert np.all(s.n_plus < 1e-10 * s.n_minus)
    bound = s.n_minus * math.exp(-2 * 10.0 * (P.n - 1)) * 10
    assert np.all(s.n_plus <= bound)


def test_zero_profile_spectrum():
    s = spectrum_first_order(P, ZeroProfile(), [0.5, 1.0])
    assert np.all(s.n_minus == 0) and np.all(s.n_plus == 0)


def test_spectrum_values_nonnegative():
    s = spectrum_first_order(P, Gaussian(0.2, 1.0), np.linspace(0.0, 4, 9))
    assert np.all(s.n_minus >= 0) and np.all(s.n_plus >= 0)
    assert s.n_minus[0] == 0


def test_step_spectrum_is_flagged():
    with pytest.warns(RuntimeWarning, match="not converged"):
        s = spectrum_first_order(P, Step(0.1), [1.0], kappa_cutoff=100.0)
    assert not s.all_converged and s.kappa_cutoff == 100.0
    with pytest.raises(QuadratureNotConverged):
        spectrum_first_order(P, Step(0.1), [1.0], kappa_cutoff=100.0, raise_on_divergence=True)


# ---------------------------------------------------------------- yields


def test_lorentzian_yield_reference_point():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        y = lorentzian_yield_closed_form(P, 0.5, 10.0)
    assert y.N_over_l == pytest.approx(9.7506e-5, abs=5e-10)
    assert y.N_over_l == pytest.approx(lorentzian_yield_gamma_form(P, 0.5, 10.0), rel=1e-12)


def test_lorentzian_yield_vanishes_without_coupling():
    assert lorentzian_yield_closed_form(MediumParams(1.0, 0.0), 0.5, 10.0).N_over_l == 0


def test_lorentzian_closed_form_warns_for_short_pulse():
    with pytest.warns(RuntimeWarning):
        lorentzian_yield_closed_form(P, 0.5, 2.0)


def test_yield_requires_linearization_or_cutoff():
    with pytest.raises(DivergentYield):
        total_yield(P, Lorentzian(0.5, 10.0), linearize_lower_band=False)
    y = total_yield(P, Lorentzian(0.5, 10.0), linearize_lower_band=False, k_cutoff=5.0)
    assert y.N_over_l > 0 and y.k_cutoff == 5.0


def test_yield_scales_as_inverse_tau_squared():
    y1 = total_yield(P, Lorentzian(0.5, 10.0)).N_over_l
    y2 = total_yield(P, Lorentzian(0.5, 20.0)).N_over_l
    assert y1 / y2 == pytest.approx(4.0, rel=5e-3)


def test_convention_constant_is_one_half():
    # the double quadrature equals the closed form times C0 = 1/2 (measured, not absorbed)
    assert convention_constant(P, 0.5, 10.0) == pytest.approx(0.5, rel=2e-3)


def test_delta_n_closed_form():
    y = delta_n_yield_closed_form(DeltaNPulse(0.01, 10.0, 1.802776))
    assert y.N_over_l == pytest.approx(1.0892e-6, abs=5e-11)
    assert y.N_over_l == pytest.approx(math.pi / 16 * 1e-4 / 18.02776, rel=1e-15)
    y2 = delta_n_yield_closed_form(DeltaNPulse(0.02, 10.0, 1.802776))
    assert y2.N_over_l == 4 * y.N_over_l
    assert delta_n_yield_closed_form(DeltaNPulse(0.0, 10.0, 1.802776)).N_over_l == 0


# ---------------------------------------------------------------- sudden switching


def test_step_scan_grows_without_plateau():
    L = np.geomspace(10.0, 1000.0, 9)
    scan = sudden_switch_cutoff_scan(P, 0.1, 1.0, "-", L)
    assert scan.monotone
    assert np.all(scan.n[4:] > scan.n[:-4])  # n(10 Lambda) > n(Lambda)
    assert scan.relative_increase_per_doubling.min() > 0.1
    # logarithmic growth with slope w G0^2 / pi
    assert scan.log_slope == pytest.approx(band_weight(P, 1.0, "-") * 0.01 / math.pi, rel=0.05)


def test_step_scan_matches_closed_form():
    L = np.geomspace(5.0, 500.0, 7)
    scan = sudden_switch_cutoff_scan(P, 0.2, 0.7, "+", L)
    assert np.allclose(scan.n, step_occupation_closed_form(P, 0.2, 0.7, "+", L), rtol=1e-8)


def test_lorentzian_scan_converges():
    L = np.geomspace(10.0, 1000.0, 9)
    scan = sudden_switch_cutoff_scan(P, 0.1, 1.0, "-", L, profile=Lorentzian(0.1, 2.0))
    assert np.all(np.abs(scan.relative_increase_per_doubling) < 1e-4)


def test_scan_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        sudden_switch_cutoff_scan(P, 0.1, 1.0, "-", [10.0, 5.0])


def test_single_point_scan():
    scan = sudden_switch_cutoff_scan(P, 0.1, 1.0, "-", [10.0])
    assert scan.n.size == 1 and math.isnan(scan.growth_exponent)
