"""
Static-medium response: permittivity, damping, polariton bands and the
symplectic (Hopfield) normal-mode basis.

Per wavenumber k the undamped A-Psi system has canonical coordinates
``x = (A, pi_A, Psi, pi_Psi)`` with ``pi_A = dA/dt - g Psi`` and
``pi_Psi = dPsi/dt``, and Hamiltonian ``H = x^T M x / 2`` with::

    H = (pi_A + g Psi)^2 / 2 + k^2 A^2 / 2 + pi_Psi^2 / 2 + Omega^2 Psi^2 / 2
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateMode, PoleAtResonance
from .model import MediumParams

#: canonical symplectic form for the ordering (q1, p1, q2, p2)
J4 = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)

BANDS = ("-", "+")


def _band_index(band):
    if band in ("-", -1, "minus", "lower"):
        return 0
    if band in ("+", 1, "plus", "upper"):
        return 1
    raise ValueError(f"unknown band {band!r}")


# ---------------------------------------------------------------------------
# permittivity and damping


def permittivity(p: MediumParams, G0, omega, on_pole="raise"):
    """eps(w) = 1 + g^2 / (Omega^2 - i w G0^2/2 - w^2).

    At the lossless pole (G0 = 0, w = +-Omega) raise :class:`PoleAtResonance`,
    or return ``inf`` there when ``on_pole="inf"``.
    """
    w = np.asarray(omega, dtype=float)
    denom = p.omega**2 - 1j * w * G0**2 / 2 - w * w
    pole = denom == 0
    if np.any(pole):
        if on_pole == "raise":
            raise PoleAtResonance(f"eps(omega) has a real pole at omega = +-{p.omega}")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 1.0 + p.g**2 / np.where(pole, 1.0, denom)
        return np.where(pole, complex(np.inf, 0.0), out)
    return 1.0 + p.g**2 / denom


@dataclass(frozen=True)
class DampingInfo:
    gamma: float
    im_sqrt_eps_slope: float


def damping_info(p: MediumParams, G0) -> DampingInfo:
    """Oscillator damping Gamma = G0^2/4 and the low-frequency slope of Im sqrt(eps)."""
    gamma = G0**2 / 4
    slope = gamma * (p.n**2 - 1) / (p.n * p.omega**2)
    return DampingInfo(gamma, slope)


def complex_wavenumber(p: MediumParams, G0, omega):
    """k(w) = w sqrt(eps(w)) on the decaying branch, Im sqrt(eps) >= 0."""
    w = np.asarray(omega, dtype=float)
    root = np.sqrt(permittivity(p, G0, w))
    root = np.where(root.imag < 0, -root, root)
    return w * root


def kramers_kronig_real(omega_grid, im_eps, omega_eval):
    """Reconstruct Re eps - 1 from Im eps sampled on a positive frequency grid.

    Uses Re eps(w) - 1 = (2/pi) P int_0^inf w' Im eps(w') / (w'^2 - w^2) dw'.
    The principal value is handled by subtracting the integrand's singular part
    w Im eps(w) / (w'^2 - w^2) and adding its closed-form PV integral over the
    grid interval.
    """
    wg = np.asarray(omega_grid, dtype=float)
    f = np.asarray(im_eps, dtype=float)
    a, b = wg[0], wg[-1]
    out = []
    for w in np.atleast_1d(omega_eval):
        fw = np.interp(w, wg, f)
        with np.errstate(divide="ignore", invalid="ignore"):
            integrand = (wg * f - w * fw) / (wg**2 - w**2)
        hit = np.isclose(wg, w, rtol=0, atol=1e-14)
        if np.any(hit):
            # removable singularity: limit is d/dw'(w' f)/(2w) at w' = w
            dfw = np.gradient(wg * f, wg)
            integrand[hit] = np.interp(w, wg, dfw) / (2 * w)
        reg = np.trapz(integrand, wg)
        # PV int_a^b dw' / (w'^2 - w^2) = ln|(b-w)(a+w)/((b+w)(a-w))| / (2w)
        pv = np.log(abs((b - w) * (a + w) / ((b + w) * (a - w)))) / (2 * w)
        out.append(2 / np.pi * (reg + w * fw * pv))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# bands


def band_frequencies(p: MediumParams, k):
    """Polariton bands (omega_minus, omega_plus) at wavenumber(s) k.

    The lower band is computed from omega_- omega_+ = |k| Omega to avoid
    cancellation at large |k|.
    """
    k = np.asarray(k, dtype=float)
    s = k * k + p.omega**2 + p.g**2
    wp = np.sqrt((s + p.rho(k)) / 2)
    wm = np.minimum(np.abs(k) * p.omega / wp, wp)  # the product form can overshoot by an ulp at a crossing
    return wm, wp


@dataclass(frozen=True)
class BandDispersion:
    k: np.ndarray
    omega_minus: np.ndarray
    omega_plus: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray

    @property
    def gap(self):
        """inf(omega_+) - sup(omega_-) on this grid."""
        return float(self.omega_plus.min() - self.omega_minus.max())


def band_dispersion(p: MediumParams, k) -> BandDispersion:
    k = np.asarray(k, dtype=float)
    wm, wp = band_frequencies(p, k)
    return BandDispersion(k, wm, wp, p.rho(k), p.sigma(k))


def band_gap(p: MediumParams):
    """Width of the gap between the bands: omega_+(0) - lim omega_-(k -> inf) = (n - 1) Omega."""
    return band_frequencies(p, 0.0)[1] - p.omega


def band_weight(p: MediumParams, k, band):
    """(rho -+ sigma) / (8 rho omega_+-): the Psi-content factor of the first-order spectrum."""
    b = _band_index(band)
    k = np.asarray(k, dtype=float)
    w = band_frequencies(p, k)[b]
    rho, sigma = p.rho(k), p.sigma(k)
    num = rho + sigma if b == 0 else rho - sigma
    return num / (8 * rho * w)


def quartic_band_roots(p: MediumParams, k):
    """Independent check of the bands: non-negative roots of (w^2 - k^2)(w^2 - Omega^2) = g^2 w^2."""
    coeffs = [1.0, 0.0, -(k * k + p.omega**2 + p.g**2), 0.0, (k * p.omega) ** 2]
    r = np.sort(np.abs(np.roots(coeffs)))
    return r[[0, 2]]


# ---------------------------------------------------------------------------
# symplectic normal-mode basis


def hopfield_matrix(p: MediumParams, k):
    """Quadratic-form matrix M of the lossless Hamiltonian in (A, pi_A, Psi, pi_Psi)."""
    g, W = p.g, p.omega
    return np.array(
        [
            [k * k, 0.0, 0.0, 0.0],
            [0.0, 1.0, g, 0.0],
            [0.0, g, g * g + W * W, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


@dataclass(frozen=True)
class HopfieldBasis:
    """Symplectic normal-mode basis of the lossless A-Psi system at one k.

    ``S`` maps canonical quadratures x to normal-mode quadratures
    ``xi = (q_-, p_-, q_+, p_+) = S x`` with ``H = sum_b w_b (q_b^2 + p_b^2) / 2``.
    The annihilation operator of band b is ``a_b = u[b] @ x`` and
    ``x = sum_b X[:, b] a_b + conj(X[:, b]) a_b^dagger``.
    Phases are fixed so that the pi_Psi component of ``u[b]`` is real and
    positive (the A component when the band carries no Psi content, g = 0).
    """

    k: float
    S: np.ndarray
    frequencies: np.ndarray
    M: np.ndarray

    @cached_property
    def T(self):
        return np.linalg.inv(self.S)

    @cached_property
    def u(self):
        """2x4 complex rows: annihilation operators as functions of x."""
        S = self.S
        return np.array([S[0] + 1j * S[1], S[2] + 1j * S[3]]) / np.sqrt(2)

    @cached_property
    def X(self):
        """4x2 complex columns: positive-frequency mode vectors."""
        T = self.T
        return np.stack([T[:, 0] - 1j * T[:, 1], T[:, 2] - 1j * T[:, 3]], axis=1) / np.sqrt(2)

    def free_propagator(self, s):
        """exp(J M s): lossless evolution of x over a time s."""
        R = np.zeros((4, 4))
        for b, w in enumerate(self.frequencies):
            c, sn = np.cos(w * s), np.sin(w * s)
            R[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = [[c, sn], [-sn, c]]
        return self.T @ R @ self.S

    def free_propagators(self, s):
        """Vectorized :meth:`free_propagator` over an array of times, shape (len(s), 4, 4)."""
        s = np.asarray(s, dtype=float)
        R = np.zeros(s.shape + (4, 4))
        for b, w in enumerate(self.frequencies):
            c, sn = np.cos(w * s), np.sin(w * s)
            i = 2 * b
            R[..., i, i] = c
            R[..., i, i + 1] = sn
            R[..., i + 1, i] = -sn
            R[..., i + 1, i + 1] = c
        return self.T @ R @ self.S

    def diagonal_hamiltonian(self):
        """S^-T M S^-1; diagonal with entries (w_-, w_-, w_+, w_+)."""
        T = self.T
        return T.T @ self.M @ T

    def symplectic_defect(self):
        return float(np.max(np.abs(self.S @ J4 @ self.S.T - J4)))


def _fix_gauge(S):
    """Rotate each (q, p) row pair so the annihilation row has a real, positive lead component."""
    S = S.copy()
    for b in range(2):
        u = S[2 * b] + 1j * S[2 * b + 1]
        lead = 3 if abs(u[3]) > 1e-12 * np.linalg.norm(u) else 0
        theta = np.angle(u[lead])
        c, s = np.cos(theta), np.sin(theta)
        q, pr = S[2 * b].copy(), S[2 * b + 1].copy()
        S[2 * b] = c * q + s * pr
        S[2 * b + 1] = -s * q + c * pr
    return S


def hopfield_diagonalize(p: MediumParams, k) -> HopfieldBasis:
    """Symplectic diagonalization of the lossless A-Psi Hamiltonian at wavenumber k.

    Eigenvectors of J M with eigenvalue -i w (w > 0) give, after symplectic
    normalization, the columns of S^-1. For g = 0 the decoupled oscillators
    are written down directly (their frequencies may coincide at |k| = Omega).
    """
    k = float(k)
    if k == 0.0:
        raise DegenerateMode("k = 0: the lower band has zero frequency")
    M = hopfield_matrix(p, k)
    wm, wp = (float(x) for x in band_frequencies(p, k))

    if p.g == 0.0:
        ak, W = abs(k), p.omega
        # rows: (q, p) of the A oscillator and of the Psi oscillator
        A_rows = np.array([[np.sqrt(ak), 0, 0, 0], [0, 1 / np.sqrt(ak), 0, 0]])
        P_rows = np.array([[0, 0, np.sqrt(W), 0], [0, 0, 0, 1 / np.sqrt(W)]])
        S = np.vstack([A_rows, P_rows]) if ak <= W else np.vstack([P_rows, A_rows])
        return HopfieldBasis(k, _fix_gauge(S), np.array([wm, wp]), M)

    vals, vecs = np.linalg.eig(J4 @ M)
    T = np.zeros((4, 4))
    for b, target in enumerate((wm, wp)):
        # eigenvalue -i w_b
        j = int(np.argmin(np.abs(vals + 1j * target)))
        v = vecs[:, j]
        r, s = v.real, v.imag
        norm = s @ J4 @ r
        if norm < 0:
            s = -s
            norm = -norm
        c = 1.0 / np.sqrt(norm)
        T[:, 2 * b] = c * s
        T[:, 2 * b + 1] = c * r
    S = np.linalg.inv(T)
    return HopfieldBasis(k, _fix_gauge(S), np.array([wm, wp]), M)
