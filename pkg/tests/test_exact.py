import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dissipative_hopfield import (
    ConstantOnWindow,
    DriveMode,
    ExactBogoliubov,
    Gaussian,
    Lorentzian,
    MediumParams,
    ModeState,
    Step,
    ZeroProfile,
    extract_bogoliubov,
    first_order_coeffs,
    hopfield_diagonalize,
    integrate_mode,
    occupation_exact,
    unitarity_defect,
)
from dissipative_hopfield.errors import InvalidParameter, UnconvergedKappaGrid
from dissipative_hopfield.exact import extract_many, kick_matrix, memory_row
from dissipative_hopfield.perturbative import occupation_first_order, step_occupation_closed_form

P = MediumParams(1.0, 1.5)


@pytest.fixture(scope="module")
def lorentzian_run():
    return extract_bogoliubov(P, Lorentzian(0.1, 2.0), 0.5)


# ---------------------------------------------------------------- forward integration


@pytest.mark.parametrize("band", "-+")
def test_free_evolution_is_a_phase(band):
    k = 0.8
    s0 = ModeState.from_polariton(P, k, band, t=0.0)
    tr = integrate_mode(P, ZeroProfile(), k, s0, t_span=(0.0, 37.0), tol=1e-12)
    w = hopfield_diagonalize(P, k).frequencies[0 if band == "-" else 1]
    expected = s0.as_array() * np.exp(-1j * w * 37.0)
    assert np.max(np.abs(tr.final.as_array() - expected)) < 1e-9


def test_energy_conserved_without_coupling():
    s0 = ModeState(1.3, 0.4, -0.2j, 1.0, 0.3, 0.0)
    tr = integrate_mode(P, ZeroProfile(), 1.3, s0, t_span=(0.0, 50.0), tol=1e-12)
    e = [tr.state(i).energy(P) for i in range(len(tr.t))]
    assert np.ptp(e) < 1e-9 * e[0]


@pytest.mark.parametrize("G0", [0.2, 0.35, 0.5])
def test_constant_coupling_damps_at_quarter_G_squared(G0):
    """g = 0, Psi(0) = 1: the oscillator envelope decays at Gamma = G0^2 / 4."""
    p = MediumParams(1.0, 0.0)
    G = ConstantOnWindow(G0, -1.0, 1e4)
    ts = np.linspace(0.0, 60.0, 2001)
    tr = integrate_mode(p, G, 1.0, ModeState(1.0, 0, 0, 1.0, 0.0, 0.0), t_span=(0, 60), tol=1e-11, t_eval=ts)
    x = tr.x[np.isin(tr.t, ts)]
    energy = np.abs(x[:, 3]) ** 2 + np.abs(x[:, 2]) ** 2
    rate = -np.polyfit(ts, np.log(energy), 1)[0] / 2
    assert rate == pytest.approx(G0**2 / 4, rel=0.01)


@pytest.mark.parametrize("kappa", [0.2, 0.7, 1.6])
def test_driven_steady_state_matches_permittivity_transfer(kappa):
    """A_ss = w^2 g G Phi0 / (D (k^2 - w^2 eps(w))), D = Omega^2 - i w G^2/2 - w^2, Phi0 = e^{-iwt}/sqrt(4 pi kappa)."""
    G0, k = 0.8, 0.5
    G = ConstantOnWindow(G0, 0.0, 2000.0, ramp=20.0)
    ts = np.linspace(1500, 1600, 11)
    tr = integrate_mode(P, G, k, ModeState(k, 0, 0, 0, 0, -20.0), DriveMode(kappa), (-20, 1600), 1e-10, t_eval=ts)
    sel = np.isin(tr.t, ts)
    w = kappa
    D = P.omega**2 - 1j * w * G0**2 / 2 - w * w
    eps = 1 + P.g**2 / D
    A_ss = w * w * P.g * G0 / (D * (k * k - w * w * eps)) * np.exp(-1j * w * tr.t[sel]) / math.sqrt(4 * math.pi * kappa)
    assert np.max(np.abs(tr.A[sel] - A_ss)) < 0.01 * np.max(np.abs(A_ss))


def test_response_is_linear_in_the_drive():
    G, k, span = Lorentzian(0.3, 2.0), 0.6, (-40.0, 40.0)
    rest = ModeState(k, 0, 0, 0, 0, span[0])
    a = integrate_mode(P, G, k, rest, DriveMode(0.5, amplitude=1.0), span, 1e-12).final.as_array()
    b = integrate_mode(P, G, k, rest, DriveMode(0.5, amplitude=2.5 - 1j), span, 1e-12).final.as_array()
    assert np.max(np.abs(b - (2.5 - 1j) * a)) < 1e-9 * np.max(np.abs(b))


def test_superposition_of_initial_state_and_drive():
    G, k, span = Lorentzian(0.3, 2.0), 0.6, (-40.0, 40.0)
    s0 = ModeState(k, 0.3, 0.1j, -0.2, 0.5, span[0])
    rest = ModeState(k, 0, 0, 0, 0, span[0])
    both = integrate_mode(P, G, k, s0, DriveMode(0.9), span, 1e-12).final.as_array()
    free = integrate_mode(P, G, k, s0, None, span, 1e-12).final.as_array()
    drv = integrate_mode(P, G, k, rest, DriveMode(0.9), span, 1e-12).final.as_array()
    assert np.max(np.abs(both - free - drv)) < 1e-8


def test_drive_response_halves_with_coupling():
    k, kap, span = 0.6, 0.8, (-60.0, 60.0)
    rest = ModeState(k, 0, 0, 0, 0, span[0])
    r1 = integrate_mode(P, Lorentzian(0.05, 2.0), k, rest, DriveMode(kap), span, 1e-12).final.as_array()
    r2 = integrate_mode(P, Lorentzian(0.025, 2.0), k, rest, DriveMode(kap), span, 1e-12).final.as_array()
    dev = np.max(np.abs(r1 - 2 * r2)) / np.max(np.abs(r1))
    assert dev < 0.05**2


def test_tighter_tolerance_reduces_error():
    G, k, span = Lorentzian(0.3, 2.0), 0.6, (-40.0, 40.0)
    s0 = ModeState.from_polariton(P, k, "-", t=span[0])
    ref = integrate_mode(P, G, k, s0, None, span, 1e-12).final.as_array()
    errs = [np.max(np.abs(integrate_mode(P, G, k, s0, None, span, tol).final.as_array() - ref)) for tol in (1e-6, 1e-8, 1e-10)]
    assert errs[0] > errs[1] > errs[2]


def test_tolerance_range_enforced():
    s0 = ModeState(1.0, 1, 0, 0, 0, 0.0)
    for tol in (1e-3, 1e-14):
        with pytest.raises(InvalidParameter):
            integrate_mode(P, ZeroProfile(), 1.0, s0, t_span=(0, 1), tol=tol)


def test_drive_mode_validation():
    with pytest.raises(InvalidParameter):
        DriveMode(0.0)
    with pytest.raises(InvalidParameter):
        DriveMode(1.0, kind="sideways")


def test_jump_kick_and_memory_signs():
    v = memory_row(Lorentzian(1.0, 1.0), 0.5)
    assert v[3] == pytest.approx(-0.5 * 0.8**2)
    assert kick_matrix(1.0, 0.0)[3, 2] == pytest.approx(0.25)
    assert np.allclose(kick_matrix(1.0, 0.0, "advanced") @ kick_matrix(1.0, 0.0), np.eye(4))


# ---------------------------------------------------------------- Bogoliubov extraction


def test_identity_scattering():
    b = extract_bogoliubov(P, ZeroProfile(), 0.5, n_kappa=51)
    assert np.allclose(b.alpha_self, np.eye(2)) and np.all(b.beta_self == 0)
    assert np.all(b.alpha_env == 0) and np.all(b.beta_env == 0)
    assert unitarity_defect(b) < 1e-12
    assert occupation_exact(P, ZeroProfile(), 0.5, n_kappa=51) == (0.0, 0.0)


def test_unitarity_of_converged_lorentzian_run(lorentzian_run):
    assert unitarity_defect(lorentzian_run) < 1e-3


def test_small_coupling_matches_first_order(lorentzian_run):
    b = lorentzian_run
    fo = first_order_coeffs(P, Lorentzian(0.1, 2.0), 0.5, b.kappa, "-")
    dev = np.linalg.norm(np.abs(b.beta_env[0]) - np.abs(fo.beta)) / np.linalg.norm(np.abs(fo.beta))
    assert dev < 0.01
    n_fo = occupation_first_order(P, Lorentzian(0.1, 2.0), 0.5, "-")[0]
    assert b.occupations()[0] == pytest.approx(n_fo, rel=5e-3)


def test_strong_pulse_falls_below_first_order():
    G = Lorentzian(1.0, 2.0)
    n_ex = occupation_exact(P, G, 0.5)[0]
    n_fo = occupation_first_order(P, G, 0.5, "-")[0]
    assert n_ex < n_fo


def test_forward_and_adjoint_agree():
    """Same ODE window: the two extraction routes agree; the adjoint's analytic tails close the window gap."""
    G = Lorentzian(0.2, 1.5)
    kap = np.geomspace(0.01, 8.0, 9)
    a = extract_bogoliubov(P, G, 0.7, kap, method="adjoint", tol=1e-11, include_tails=False)
    f = extract_bogoliubov(P, G, 0.7, kap, method="forward", tol=1e-11)
    assert np.max(np.abs(a.beta_env - f.beta_env)) < 1e-8
    assert np.max(np.abs(a.alpha_env - f.alpha_env)) < 1e-8
    assert np.max(np.abs(a.alpha_self - f.alpha_self)) < 1e-8
    tails = extract_bogoliubov(P, G, 0.7, kap, method="adjoint", tol=1e-11)
    wide = extract_bogoliubov(P, G, 0.7, kap, method="forward", tol=1e-11, eps_window=1e-6)
    assert np.max(np.abs(tails.beta_env - wide.beta_env)) < 0.1 * np.max(np.abs(tails.beta_env - f.beta_env))


def test_forward_and_adjoint_agree_across_jumps():
    G = ConstantOnWindow(0.3, -3.0, 3.0)
    kap = np.geomspace(0.05, 6.0, 15)
    a = extract_bogoliubov(P, G, 0.7, kap, method="adjoint", tol=1e-11)
    f = extract_bogoliubov(P, G, 0.7, kap, method="forward", tol=1e-11)
    assert np.max(np.abs(a.beta_env - f.beta_env)) < 1e-8


def test_gaussian_run_is_unitary():
    b = extract_bogoliubov(P, Gaussian(0.2, 2.0), 0.5, n_kappa=601)
    assert unitarity_defect(b) < 1e-3


def test_defect_grows_as_the_cutoff_shrinks():
    G = Lorentzian(0.3, 2.0)
    full = extract_bogoliubov(P, G, 0.5, n_kappa=801)
    defects = []
    for frac in (1.0, 0.1, 0.05, 0.02):
        keep = full.kappa <= frac * full.kappa_cutoff
        cut = ExactBogoliubov(full.k, full.frequencies, full.alpha_self, full.beta_self, full.kappa[keep],
                              full.alpha_env[:, keep], full.beta_env[:, keep], frac * full.kappa_cutoff,
                              tuple(b for b in full.breakpoints if b <= frac * full.kappa_cutoff))
        defects.append(unitarity_defect(cut))
    assert defects[0] < 1e-3
    assert np.all(np.diff(defects) > 0)


def test_coarse_grid_is_reported():
    with pytest.raises(UnconvergedKappaGrid):
        extract_bogoliubov(P, Lorentzian(0.3, 2.0), 0.5, n_kappa=15, grid_rtol=1e-4)


def test_step_extraction_tracks_closed_form():
    G0, k = 0.05, 1.0
    for lam in (20.0, 200.0):
        n = occupation_exact(P, Step(G0), k, kappa_cutoff=lam, n_kappa=2001)[0]
        ref = step_occupation_closed_form(P, G0, k, "-", lam)
        assert n == pytest.approx(ref, rel=0.02)


def test_json_round_trip(lorentzian_run):
    again = ExactBogoliubov.from_json(lorentzian_run.to_json())
    assert np.array_equal(again.beta_env, lorentzian_run.beta_env)
    assert np.array_equal(again.alpha_self, lorentzian_run.alpha_self)
    assert again.breakpoints == lorentzian_run.breakpoints
    assert again.to_json(sort_keys=True) == lorentzian_run.to_json(sort_keys=True)


def test_threaded_fan_out_is_deterministic():
    G, ks = Lorentzian(0.2, 2.0), [0.4, 0.9, 1.7]
    serial = extract_many(P, G, ks, threads=1, n_kappa=101)
    threaded = extract_many(P, G, ks, threads=3, n_kappa=101)
    for a, b in zip(serial, threaded):
        assert a.to_json(sort_keys=True) == b.to_json(sort_keys=True)


@given(st.floats(0.2, 3.0))
@settings(max_examples=5, deadline=None)
def test_self_block_unitary_without_coupling(k):
    b = extract_bogoliubov(P, ZeroProfile(), k, n_kappa=11)
    assert np.allclose(np.abs(b.alpha_self), np.eye(2))
