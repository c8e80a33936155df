import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipative_hopfield import (
    ConstantOnWindow,
    DeltaNPulse,
    Gaussian,
    Lorentzian,
    MediumParams,
    Sampled,
    Step,
    ZeroProfile,
    profile_fourier,
    profile_from_dict,
    profile_value,
    validate_params,
)
from dissipative_hopfield.errors import (
    InvalidParameter,
    NegativeCoupling,
    NonFinite,
    NonPositiveOmega,
    UnresolvedFrequency,
)

# ---------------------------------------------------------------- parameters


def test_refractive_index_of_reference_medium():
    assert validate_params((1.0, 1.5)).n == pytest.approx(1.802776, abs=1e-6)


def test_vacuum_index_without_coupling():
    assert validate_params({"omega": 1.0, "g": 0.0}).n == 1.0


@pytest.mark.parametrize(
    "args, err",
    [((0.0, 1.0), NonPositiveOmega), ((-1.0, 1.0), NonPositiveOmega), ((1.0, -0.1), NegativeCoupling),
     ((math.nan, 1.0), NonFinite), ((1.0, math.inf), NonFinite)],
)
def test_invalid_medium_rejected(args, err):
    with pytest.raises(err):
        validate_params(args)


def test_band_helpers():
    p = MediumParams(1.0, 1.5)
    assert p.sigma(2.0) == pytest.approx(4 - 2.25 - 1)
    assert p.rho(2.0) == pytest.approx(math.sqrt(16 * 2.25 + 0.75**2))


def test_delta_n_pulse_validation():
    with pytest.raises(InvalidParameter):
        DeltaNPulse(0.01, 0.0, 1.5)
    with pytest.raises(InvalidParameter):
        DeltaNPulse(0.01, 1.0, 0.5)


# ---------------------------------------------------------------- profile values


def test_lorentzian_values():
    G = Lorentzian(1.0, 2.0)
    assert profile_value(G, 0.0) == 1.0
    assert profile_value(G, 2.0) == pytest.approx(0.5, rel=1e-15)


def test_step_values():
    G = Step(0.5)
    assert profile_value(G, -1.0) == 0.5
    assert profile_value(G, 1.0) == 0.0
    assert G.jumps() == [(0.0, 0.5, 0.0)]


def test_window_is_flat_inside_and_zero_outside():
    G = ConstantOnWindow(0.3, -5.0, 5.0, ramp=1.0)
    assert profile_value(G, 0.0) == pytest.approx(0.3)
    assert profile_value(G, -20.0) == 0.0
    assert profile_value(G, 20.0) == 0.0


def test_negative_amplitude_rejected():
    with pytest.raises(NegativeCoupling):
        Lorentzian(-1.0, 1.0)
    with pytest.raises(InvalidParameter):
        Gaussian(1.0, 0.0)


# ---------------------------------------------------------------- Fourier transforms


def test_lorentzian_fourier_reference_values():
    G = Lorentzian(1.0, 2.0)
    assert profile_fourier(G, 0.0).value == pytest.approx(2.506628, abs=1e-6)
    # 2.506628 e^{-2}; the six-digit rounding of this product is 0.339235
    assert profile_fourier(G, 1.0).value == pytest.approx(0.3392352, abs=1e-6)


def _numeric_fourier(G, w):
    """Independent transform by adaptive quadrature: even pulses on [0, inf), the window on its support."""
    from scipy.integrate import quad

    if isinstance(G, Gaussian):
        return 2 * quad(G.value, 0, 40 * G.tau, weight="cos", wvar=w, epsabs=1e-14, limit=500)[0] / math.sqrt(2 * math.pi)
    if isinstance(G, Lorentzian):
        if w == 0:
            return 2 * quad(G.value, 0, np.inf, epsabs=1e-14)[0] / math.sqrt(2 * math.pi)
        return 2 * quad(G.value, 0, np.inf, weight="cos", wvar=abs(w), epsabs=1e-14)[0] / math.sqrt(2 * math.pi)
    lo, hi = G.support()
    re = quad(lambda t: G.value(t) * math.cos(w * t), lo, hi, epsabs=1e-14, limit=500, points=[G.t_on, G.t_off])[0]
    im = quad(lambda t: G.value(t) * math.sin(w * t), lo, hi, epsabs=1e-14, limit=500, points=[G.t_on, G.t_off])[0]
    return (re + 1j * im) / math.sqrt(2 * math.pi)


@pytest.mark.parametrize("G", [Lorentzian(0.7, 1.3), Gaussian(0.7, 1.3), ConstantOnWindow(0.7, -3.0, 4.0, ramp=1.0)])
@pytest.mark.parametrize("w", [0.0, 0.4, 1.7])
def test_closed_form_fourier_matches_direct_quadrature(G, w):
    num = _numeric_fourier(G, w)
    assert abs(G.fourier(w) - num) < 1e-8


def test_step_fourier_is_principal_value_part():
    G = Step(0.5)
    w = np.array([0.5, 2.0])
    assert np.allclose(G.fourier(w), -0.5j / (math.sqrt(2 * math.pi) * w), rtol=1e-14)


def test_sampled_lorentzian_matches_closed_form():
    G = Lorentzian(1.0, 2.0)
    t = np.linspace(-2000.0, 2000.0, 400_001)
    S = Sampled(t, G.value(t))
    assert abs(S.fourier(1.0) - G.fourier(1.0)) < 1e-6 * abs(G.fourier(1.0)) + 1e-6


def test_sampled_interpolates_and_vanishes_outside():
    t = np.linspace(-1, 1, 41)
    S = Sampled(t, np.cos(t))
    assert profile_value(S, 0.33) == pytest.approx(math.cos(0.33), abs=1e-6)
    assert profile_value(S, 2.0) == 0.0


def test_sampled_unresolved_frequency():
    t = np.linspace(-10, 10, 21)
    with pytest.raises(UnresolvedFrequency):
        Sampled(t, np.exp(-t * t)).fourier(5.0)


def test_sampled_rejects_unsorted_grid():
    with pytest.raises(InvalidParameter):
        Sampled([0.0, 2.0, 1.0], [1.0, 1.0, 1.0])


def test_sampled_from_csv(tmp_path):
    f = tmp_path / "g.csv"
    f.write_text("time,value\n-2,0\n-1,0.5\n0,1\n1,0.5\n2,0\n", encoding="utf-8")
    S = Sampled.from_csv(f)
    assert profile_value(S, 0.0) == pytest.approx(1.0)
    f2 = tmp_path / "g2.csv"
    f2.write_text("-2,0\n-1,0.5\n0,1\n1,0.5\n2,0\n", encoding="utf-8")
    assert Sampled.from_csv(f2) == S


def test_parseval_lorentzian_and_gaussian():
    from scipy.integrate import quad

    for G, time_norm in [(Lorentzian(0.8, 1.5), 0.8**2 * math.pi * 1.5 / 2), (Gaussian(0.8, 1.5), None)]:
        if time_norm is None:
            time_norm = quad(lambda t: G.value(t) ** 2, -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
        freq = 2 * quad(lambda w: abs(G.fourier(w)) ** 2, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
        assert freq == pytest.approx(time_norm, rel=1e-6)


def test_zero_profile():
    Z = ZeroProfile()
    assert profile_value(Z, 1.0) == 0.0
    assert np.all(profile_fourier(Z, [0.0, 1.0]).value == 0)


# ---------------------------------------------------------------- tail transforms


def _lorentzian_tail_reference(G0, tau, t, side, nu):
    import mpmath as mp

    mp.mp.dps = 25
    f = lambda s: G0 * tau**2 / (tau**2 + s**2) * mp.exp(1j * nu * s)
    rng = [t, mp.inf] if side > 0 else [-mp.inf, t]
    return complex(mp.quadosc(f, rng, omega=abs(nu)))


@pytest.mark.parametrize("t", [-3.0, 0.0, 2.5])
@pytest.mark.parametrize("side", [1, -1])
@pytest.mark.parametrize("nu", [0.3, -1.7, 1.7])
def test_lorentzian_tail_transform_matches_reference(t, side, nu):
    G = Lorentzian(0.6, 2.0)
    ref = _lorentzian_tail_reference(0.6, 2.0, t, side, nu)
    assert abs(G.tail_fourier(t, side, nu) - ref) < 1e-12


@pytest.mark.parametrize("t", [-3.0, 0.0, 2.5])
@pytest.mark.parametrize("side", [1, -1])
@pytest.mark.parametrize("nu", [0.0, 0.3, -1.7])
def test_generic_tail_transform_on_gaussian(t, side, nu):
    from scipy.special import erfc

    G0, tau = 0.6, 2.0
    a = 1 / (2 * tau**2)
    total = G0 * math.sqrt(math.pi / a) * math.exp(-nu * nu / (4 * a))
    upper = 0.5 * total * erfc(math.sqrt(a) * t - 1j * nu / (2 * math.sqrt(a)))
    ref = upper if side > 0 else total - upper
    assert abs(Gaussian(G0, tau).tail_fourier(t, side, nu) - ref) < 1e-9


def test_tails_add_up_to_full_transform():
    G = Lorentzian(0.6, 2.0)
    for t in (-1.0, 0.7):
        tot = G.tail_fourier(t, 1, 0.9) + G.tail_fourier(t, -1, 0.9)
        assert tot == pytest.approx(math.sqrt(2 * math.pi) * G.fourier(0.9), rel=1e-10)


# ---------------------------------------------------------------- config round trip


@pytest.mark.parametrize(
    "d",
    [{"type": "lorentzian", "G0": 0.5, "tau": 10.0}, {"type": "gaussian", "G0": 0.2, "tau": 3.0},
     {"type": "step", "G0": 0.1}, {"type": "window", "G0": 0.1, "t_on": -1.0, "t_off": 2.0, "ramp": 0.5},
     {"type": "zero"}],
)
def test_profile_dict_round_trip(d):
    G = profile_from_dict(d)
    assert profile_from_dict(G.to_dict()) == G


# ---------------------------------------------------------------- properties


finite_w = st.floats(-20, 20, allow_nan=False)
profiles = st.one_of(
    st.builds(Lorentzian, st.floats(0, 3), st.floats(0.1, 10)),
    st.builds(Gaussian, st.floats(0, 3), st.floats(0.1, 10)),
    st.builds(lambda a, w: ConstantOnWindow(a, -w, w, ramp=0.5), st.floats(0, 3), st.floats(0.6, 5)),
)


@given(profiles, finite_w)
@settings(max_examples=60, deadline=None)
def test_fourier_reality(G, w):
    assert np.isclose(G.fourier(-w), np.conj(G.fourier(w)), rtol=1e-12, atol=1e-300)


@given(profiles, finite_w, st.floats(0, 5))
@settings(max_examples=60, deadline=None)
def test_fourier_scaling_is_exact(G, w, c):
    assert G.scaled(c).fourier(w) == pytest.approx(c * G.fourier(w), rel=1e-14, abs=1e-300)


@given(st.floats(0.01, 5), st.floats(0.01, 5))
def test_medium_index_at_least_one(omega, g):
    assert MediumParams(omega, g).n >= 1.0
