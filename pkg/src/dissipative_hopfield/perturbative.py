"""
First-order (in G) particle creation.

Switching the medium-environment coupling mixes each polariton band with the
environment continuum. To first order the out-operators are::

    a_b^out(k) = a_b^in(k) + int dkappa [alpha_b(k, kappa) b_{k kappa} + beta_b(k, kappa) b^dagger_{-k kappa}]

    beta_b  = -i |u_b| sqrt(|kappa| / 2) G~(w_b(k) + |kappa|)
    alpha_b = +i |u_b| sqrt(|kappa| / 2) G~(w_b(k) - |kappa|)

where |u_b|^2 = (rho -+ sigma) / (4 rho w_b) is the squared pi_Psi component of
the band's annihilation row (see ``linear_response.HopfieldBasis``). kappa runs
over the whole real line; the integrands are even in kappa.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DivergentYield, QuadratureNotConverged, ZeroFrequencyMode
from .linear_response import _band_index, band_frequencies, band_weight
from .model import DeltaNPulse, Lorentzian, MediumParams, Step, SwitchingProfile


@dataclass(frozen=True)
class FirstOrderCoeffs:
    k: float
    kappa: np.ndarray
    band: str
    alpha: np.ndarray
    beta: np.ndarray


def psi_amplitude(p: MediumParams, k, band):
    """|u_b(k)|: modulus of the pi_Psi component of the band's annihilation row."""
    return np.sqrt(2.0 * band_weight(p, k, band))


def first_order_coeffs(p: MediumParams, G: SwitchingProfile, k, kappa, band) -> FirstOrderCoeffs:
    """Bogoliubov coefficients alpha, beta of band ``band`` at (k, kappa), first order in G."""
    b = _band_index(band)
    w = float(band_frequencies(p, k)[b])
    if w <= 0:
        raise ZeroFrequencyMode(f"band {band!r} has zero frequency at k={k}")
    kappa = np.asarray(kappa, dtype=float)
    ak = np.abs(kappa)
    pref = float(psi_amplitude(p, k, band)) * np.sqrt(ak / 2)
    beta = -1j * pref * G.fourier(w + ak)
    with np.errstate(invalid="ignore"):
        alpha = 1j * pref * G.fourier(w - ak)
    return FirstOrderCoeffs(float(k), kappa, "-+"[b], alpha, beta)


def beta_sq_integrand(p: MediumParams, G: SwitchingProfile, k, band, omega=None):
    """kappa -> |beta_b(k, kappa)|^2 as a closed expression.

    ``omega`` overrides the band frequency (used for the linearized lower band).
    """
    b = _band_index(band)
    w = float(band_frequencies(p, k)[b]) if omega is None else float(omega)
    rho, sigma = float(p.rho(k)), float(p.sigma(k))
    weight = (rho + sigma if b == 0 else rho - sigma) / (8 * rho * w)

    def f(kappa):
        ak = np.abs(kappa)
        return weight * ak * np.abs(G.fourier(w + ak)) ** 2

    return f


def _dyadic_quad(f, upper, scale, rtol):
    """int_0^upper f on dyadic pieces [0, s], [s, 2s], ...; returns (value, abs error)."""
    total, err = 0.0, 0.0
    lo, hi = 0.0, min(scale, upper)
    while lo < upper:
        v, e = quad(f, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
        total += v
        err += e
        lo, hi = hi, min(2 * hi, upper)
    return total, err


def _spectral_scale(G: SwitchingProfile, w):
    tau = G.characteristic_time
    return tau if tau is not None else 1.0 / max(w, 1e-12)


def default_kappa_cutoff(G: SwitchingProfile, w=1.0):
    """40/tau for profiles with a time scale, 1e3 * max(w, 1) otherwise."""
    tau = G.characteristic_time
    return 40.0 / tau if tau is not None else 1e3 * max(w, 1.0)


def occupation_first_order(p, G, k, band, kappa_cutoff=None, rtol=1e-11, omega=None):
    """n_b(k) = int_R dkappa |beta|^2 restricted to |kappa| < cutoff; returns (value, error)."""
    f = beta_sq_integrand(p, G, k, band, omega)
    w = float(band_frequencies(p, k)[_band_index(band)]) if omega is None else omega
    cut = default_kappa_cutoff(G, w) if kappa_cutoff is None else kappa_cutoff
    scale = min(1.0 / _spectral_scale(G, w), cut)
    v, e = _dyadic_quad(f, cut, scale, rtol)
    return 2 * v, 2 * e


@dataclass
class SpectrumResult:
    k: np.ndarray
    n_minus: np.ndarray
    n_plus: np.ndarray
    kappa_cutoff: float
    error_minus: np.ndarray
    error_plus: np.ndarray
    converged: np.ndarray
    max_change: float = field(default=np.nan)

    @property
    def all_converged(self):
        return bool(np.all(self.converged))


def spectrum_first_order(
    p: MediumParams,
    G: SwitchingProfile,
    k,
    kappa_cutoff=None,
    rtol=1e-10,
    convergence_rtol=1e-3,
    raise_on_divergence=False,
) -> SpectrumResult:
    """Created-particle spectra n_-(k), n_+(k) to first order in G.

    Each point is re-evaluated with the cutoff doubled and the quadrature
    tolerance tightened by 100x; a point is flagged converged when both
    changes stay below ``convergence_rtol``. Unconverged points (fat spectral
    tails such as the step profile) are returned tagged with the cutoff used,
    or raise :class:`QuadratureNotConverged` when ``raise_on_divergence``.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = {b: np.zeros(k.shape) for b in "-+"}
    err = {b: np.zeros(k.shape) for b in "-+"}
    conv = np.ones(k.shape, dtype=bool)
    worst = 0.0
    cut_used = None
    for i, kk in enumerate(k):
        for b in "-+":
            w = float(band_frequencies(p, kk)[_band_index(b)])
            if w == 0:
                continue  # k = 0 lower band: no particles
            cut = default_kappa_cutoff(G, w) if kappa_cutoff is None else kappa_cutoff
            cut_used = cut if cut_used is None else max(cut_used, cut)
            v, e = occupation_first_order(p, G, kk, b, cut, rtol)
            v2, _ = occupation_first_order(p, G, kk, b, 2 * cut, rtol * 1e-2)
            out[b][i], err[b][i] = v, e
            change = abs(v2 - v) / abs(v2) if v2 != 0 else 0.0
            worst = max(worst, change)
            if change > convergence_rtol:
                conv[i] = False
    if not conv.all():
        msg = f"kappa integral not converged at cutoff {cut_used:g} (max relative change {worst:.3g})"
        if raise_on_divergence:
            raise QuadratureNotConverged(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return SpectrumResult(k, out["-"], out["+"], cut_used, err["-"], err["+"], conv, worst)


# ---------------------------------------------------------------------------
# yields


@dataclass(frozen=True)
class YieldResult:
    """Created particles per unit length."""

    N_over_l: float
    k_cutoff: float | None = None
    linearized: bool = False
    method: str = "closed-form"
    error: float = 0.0


def lorentzian_yield_closed_form(p: MediumParams, G0, tau) -> YieldResult:
    """N/l = (1/32) g^2 / sqrt(Omega^2 + g^2) * G0^2 / (Omega^3 tau^2) for a slow Lorentzian pulse."""
    if p.omega * tau < 5:
        warnings.warn(f"Omega*tau = {p.omega * tau:g} is not >> 1; closed form is unreliable", RuntimeWarning)
    val = p.g**2 / math.sqrt(p.omega**2 + p.g**2) * G0**2 / (32 * p.omega**3 * tau**2)
    return YieldResult(val, None, True, "closed-form")


def lorentzian_yield_gamma_form(p: MediumParams, G0, tau):
    """The same yield written as Gamma0 / (Omega tau)^2 * (n^2 - 1) / (8 n)."""
    gamma0 = G0**2 / 4
    return gamma0 / (p.omega * tau) ** 2 * (p.n**2 - 1) / (8 * p.n)


def delta_n_yield_closed_form(pulse: DeltaNPulse) -> YieldResult:
    """Yield of a Lorentzian refractive-index pulse: (pi/16) dn^2 / (n tau)."""
    val = math.pi / 16 * pulse.delta_n**2 / (pulse.n * pulse.tau)
    return YieldResult(val, None, False, "closed-form")


def total_yield(
    p: MediumParams,
    G: SwitchingProfile,
    linearize_lower_band=True,
    k_cutoff=None,
    kappa_cutoff=None,
    rtol=1e-10,
) -> YieldResult:
    """Lower-band particles per unit length, N/l = int_R dk/(2 pi) n_-(k), by double quadrature.

    With ``linearize_lower_band`` the lower band is replaced by |k|/n in the
    spectral argument and the 1/w factor (the band weight keeps its exact k
    dependence). Without it the integrand tends to a constant at large k and a
    finite ``k_cutoff`` is mandatory.
    """
    if not linearize_lower_band and k_cutoff is None:
        raise DivergentYield("un-linearized lower-band yield diverges without a k cutoff")

    def n_of_k(kk):
        if kk == 0:
            return 0.0
        w = kk / p.n if linearize_lower_band else None
        return occupation_first_order(p, G, kk, "-", kappa_cutoff, rtol, omega=w)[0]

    tau = G.characteristic_time or 1.0 / p.omega
    scale = p.n / (2 * tau) if linearize_lower_band else p.omega
    if k_cutoff is not None:
        v, e = _dyadic_quad(n_of_k, k_cutoff, min(scale, k_cutoff), rtol)
    else:
        # the linearized spectrum decays like exp(-2 tau k / n)
        upper = 80 * p.n * tau
        v, e = _dyadic_quad(n_of_k, upper, scale, rtol)
    return YieldResult(v / math.pi, k_cutoff, linearize_lower_band, "double-quadrature", e / math.pi)


def convention_constant(p: MediumParams, G0, tau, **kwargs):
    """C0 = (double-quadrature yield) / (closed form) for a Lorentzian pulse."""
    num = total_yield(p, Lorentzian(G0, tau), **kwargs).N_over_l
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        den = lorentzian_yield_closed_form(p, G0, tau).N_over_l
    return num / den


# ---------------------------------------------------------------------------
# sudden switching


@dataclass(frozen=True)
class CutoffScan:
    """n(k; Lambda) for a kappa-cutoff sweep."""

    k: float
    band: str
    Lambda: np.ndarray
    n: np.ndarray
    growth_exponent: float
    log_slope: float
    monotone: bool

    @property
    def relative_increase_per_doubling(self):
        """Relative growth of n per doubling of Lambda, interval by interval."""
        ratio = np.log2(self.Lambda[1:] / self.Lambda[:-1])
        return (self.n[1:] / self.n[:-1] - 1.0) / ratio


def sudden_switch_cutoff_scan(p: MediumParams, G0, k, band, Lambda, profile=None, rtol=1e-11) -> CutoffScan:
    """Occupation n_b(k; Lambda) with the kappa integral cut at each Lambda.

    ``profile`` defaults to the step G0 Theta(-t). Reported alongside the table:
    ``growth_exponent`` is the log-log slope of n over the top decade of Lambda
    and ``log_slope`` the slope dn / d ln Lambda there. For the step the
    integrand falls off as 1/kappa, so n grows like ln Lambda without bound.
    """
    Lambda = np.asarray(Lambda, dtype=float)
    if np.any(np.diff(Lambda) <= 0):
        raise ValueError("Lambda grid must be increasing")
    G = Step(G0) if profile is None else profile
    f = beta_sq_integrand(p, G, k, band)
    w = float(band_frequencies(p, k)[_band_index(band)])
    scale = min(1.0 / _spectral_scale(G, w), Lambda[0])
    n = np.empty_like(Lambda)
    acc, lo = 0.0, 0.0
    first, _ = _dyadic_quad(f, Lambda[0], scale, rtol)
    acc, lo = first, Lambda[0]
    n[0] = 2 * acc
    for i in range(1, Lambda.size):
        piece, _ = _dyadic_quad(lambda x: f(x + lo), Lambda[i] - lo, max(lo, scale), rtol)
        acc += piece
        lo = Lambda[i]
        n[i] = 2 * acc
    if Lambda.size < 2:
        expo = log_slope = float("nan")
    else:
        top = Lambda >= Lambda[-1] / 10
        if top.sum() < 2:
            top = slice(-2, None)
        lnL = np.log(Lambda[top])
        expo = float(np.polyfit(lnL, np.log(n[top]), 1)[0])
        log_slope = float(np.polyfit(lnL, n[top], 1)[0])
    return CutoffScan(float(k), "-+"[_band_index(band)], Lambda, n, expo, log_slope, bool(np.all(np.diff(n) > 0)))


def step_occupation_closed_form(p: MediumParams, G0, k, band, Lambda):
    """Analytic n_b(k; Lambda) for the step: (w_k G0^2 / pi) [ln((w+L)/w) + w/(w+L) - 1]."""
    b = _band_index(band)
    w = float(band_frequencies(p, k)[b])
    weight = float(band_weight(p, k, band))
    L = np.asarray(Lambda, dtype=float)
    return weight * G0**2 / math.pi * (np.log((w + L) / w) + w / (w + L) - 1.0)
