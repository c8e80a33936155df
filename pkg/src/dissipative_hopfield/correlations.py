"""
First-order equal-time two-point functions at late times.

Fields are expanded over the in-operators: polaritons a_b(k) and environment
quanta b(k, kappa). With X_b(k) the band mode vectors (A component f^A_b,
Psi component f^Psi_b) and the first-order coefficients alpha_b, beta_b, the
connected O(G) cross-correlator is::

    <Phi(t,x,y) A(t,x')> = int dk dkappa / (2 pi)^2  e^{i k dx + i kappa y} e^{-i|kappa| t} / sqrt(2|kappa|)
                             sum_b [f^A_b e^{-i w_b t} beta_b + conj(f^A_b) e^{i w_b t} conj(alpha_b)]
                         + G(t - |y|)/2  sum_b int dk / (2 pi) f^Psi_b conj(f^A_b) e^{i k dx + i w_b |y|}

(the second line is the radiated field G Psi / 2 at the retarded time). All
mode functions are even in k and kappa, so dx = x - x' and the integrals run
over symmetric grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoPeaksFound, QuadratureNotConverged
from .linear_response import hopfield_diagonalize
from .model import MediumParams, SwitchingProfile
from .perturbative import psi_amplitude


@dataclass
class CorrelationMap:
    t: float
    dx: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(dx), len(y))
    kind: str = "<Phi A>"
    cutoffs: dict = field(default_factory=dict)

    @property
    def magnitude(self):
        return np.abs(self.values)

    def to_rows(self):
        """(dx, y, re, im, abs) rows in dx-major order."""
        DX, Y = np.meshgrid(self.dx, self.y, indexing="ij")
        v = self.values
        return np.column_stack([DX.ravel(), Y.ravel(), v.real.ravel(), v.imag.ravel(), np.abs(v).ravel()])


@dataclass(frozen=True)
class ModeTables:
    """Band quantities on a symmetric k grid (half-offset, so k = 0 is never sampled)."""

    k: np.ndarray
    w: np.ndarray  # (2, Nk)
    fA: np.ndarray  # (2, Nk)
    fPsi: np.ndarray  # (2, Nk)
    u4: np.ndarray  # (2, Nk) |pi_Psi component| of the annihilation rows


def mode_tables(p: MediumParams, k_max, dk) -> ModeTables:
    n = int(math.ceil(k_max / dk))
    kpos = dk * (np.arange(n) + 0.5)
    w = np.zeros((2, n))
    fA = np.zeros((2, n), dtype=complex)
    fP = np.zeros((2, n), dtype=complex)
    for i, kk in enumerate(kpos):
        basis = hopfield_diagonalize(p, kk)
        w[:, i] = basis.frequencies
        fA[:, i] = basis.X[0]
        fP[:, i] = basis.X[2]
    u4 = np.vstack([psi_amplitude(p, kpos, "-"), psi_amplitude(p, kpos, "+")])
    # mirror to negative k (all quantities are even in k)
    k = np.concatenate([-kpos[::-1], kpos])
    mirror = lambda a: np.concatenate([a[:, ::-1], a], axis=1)
    return ModeTables(k, mirror(w), mirror(fA), mirror(fP), mirror(u4))


def _default_cutoffs(p, G, t, dx, y, k_max, kappa_max, dk, dkappa):
    tau = G.characteristic_time or 1.0
    span_x = float(np.max(np.abs(dx)))
    span_y = float(np.max(np.abs(y)))
    if dk is None:
        # no aliasing within twice the x extent of the features
        dk = 2 * math.pi / (4 * (span_x + t / p.n + 10 * tau))
    if dkappa is None:
        dkappa = 2 * math.pi / (4 * (t + span_y + 10 * tau))
    if k_max is None:
        k_max = max(4.0 * p.omega, 40.0 / tau)
    if kappa_max is None:
        wmax = math.sqrt(k_max**2 + p.omega**2 + p.g**2)
        kappa_max = wmax + 40.0 / tau
    return k_max, kappa_max, dk, dkappa


def _cross_terms(p, G, t, dx, y, tables: ModeTables, kappa_max, dkappa, swapped):
    m = int(math.ceil(kappa_max / dkappa))
    kap_pos = dkappa * (np.arange(m) + 0.5)
    kap = np.concatenate([-kap_pos[::-1], kap_pos])
    ak = np.abs(kap)
    dk = tables.k[1] - tables.k[0]
    amp = np.zeros((tables.k.size, kap.size), dtype=complex)
    for b in range(2):
        w = tables.w[b][:, None]
        pref = tables.u4[b][:, None] * np.sqrt(ak / 2)[None, :]
        beta = -1j * pref * G.fourier(w + ak[None, :])
        alpha = 1j * pref * G.fourier(w - ak[None, :])
        f = tables.fA[b][:, None]
        if not swapped:
            amp += f * np.exp(-1j * w * t) * beta + np.conj(f) * np.exp(1j * w * t) * np.conj(alpha)
        else:
            amp += f * np.exp(-1j * w * t) * alpha + np.conj(f) * np.exp(1j * w * t) * np.conj(beta)
    s = 1.0 if swapped else -1.0
    amp *= (np.exp(s * 1j * ak * t) / np.sqrt(2 * ak))[None, :]
    sx = -1.0 if swapped else 1.0
    Ex = np.exp(sx * 1j * np.outer(dx, tables.k)) * dk
    Ey = np.exp(sx * 1j * np.outer(y, kap)) * dkappa
    term1 = Ex @ amp @ Ey.T / (2 * math.pi) ** 2

    # radiated part G(t - |y|) Psi(t - |y|) / 2 correlated with A(t)
    ay = np.abs(y)
    term2 = np.zeros_like(term1)
    for b in range(2):
        prod = tables.fPsi[b] * np.conj(tables.fA[b])
        phase = np.exp(1j * np.outer(tables.w[b], ay))  # (Nk, Ny)
        if swapped:
            term2 += np.conj(Ex) @ (np.conj(prod)[:, None] * np.conj(phase)) * 1.0
        else:
            term2 += Ex @ (prod[:, None] * phase)
    term2 *= 0.5 * G.value(t - ay)[None, :] / (2 * math.pi)
    return term1 + term2


def cross_correlation_map(
    p: MediumParams,
    G: SwitchingProfile,
    t,
    dx,
    y,
    *,
    k_max=None,
    kappa_max=None,
    dk=None,
    dkappa=None,
    swapped=False,
    check_convergence=False,
    rtol=1e-2,
) -> CorrelationMap:
    """O(G) connected <Phi(t, x, y) A(t, x')> on the (dx, y) grid.

    ``swapped=True`` computes the opposite ordering <A(t, x') Phi(t, x, y)>
    independently; it equals the complex conjugate of the direct order.
    ``check_convergence`` repeats the evaluation with 1.5x larger cutoffs and
    raises :class:`QuadratureNotConverged` if the map's peak changes by more
    than ``rtol`` relative.
    """
    dx = np.asarray(dx, dtype=float)
    y = np.asarray(y, dtype=float)
    k_max, kappa_max, dk, dkappa = _default_cutoffs(p, G, t, dx, y, k_max, kappa_max, dk, dkappa)
    cut = {"k_max": k_max, "kappa_max": kappa_max, "dk": dk, "dkappa": dkappa}
    if G.peak == 0:
        return CorrelationMap(float(t), dx, y, np.zeros((dx.size, y.size), dtype=complex),
                              "<A Phi>" if swapped else "<Phi A>", cut)
    tables = mode_tables(p, k_max, dk)
    vals = _cross_terms(p, G, t, dx, y, tables, kappa_max, dkappa, swapped)
    if check_convergence:
        t2 = mode_tables(p, 1.5 * k_max, dk)
        v2 = _cross_terms(p, G, t, dx, y, t2, 1.5 * kappa_max, dkappa, swapped)
        change = np.max(np.abs(v2 - vals)) / np.max(np.abs(v2))
        if change > rtol:
            raise QuadratureNotConverged(f"correlation map changes by {change:.3g} under 1.5x cutoffs")
    return CorrelationMap(float(t), dx, y, vals, "<A Phi>" if swapped else "<Phi A>", cut)


# ---------------------------------------------------------------------------
# first-order auto-correlations via in-operator coefficient vectors


def _vacuum_contraction(c_left, c_right):
    """<L R> for L = sum c_left[0] o + c_left[1] o^+, R likewise, over channels o with <o o^+> = 1."""
    return np.sum(c_left[0] * c_right[1], axis=-1)


def auto_correlation_first_order(
    p: MediumParams, G: SwitchingProfile, t, dx, y=None, *, k_max=None, kappa_max=None, dk=None, dkappa=None
):
    """O(G) parts of <A(t,x) A(t,x')> (over dx) and <Phi(t,x,y) Phi(t,x',0)> (over dx, y).

    Each field at wavenumber k is written as coefficient vectors over the
    joint channel set (2 polariton channels, then the kappa channels), split
    into its O(1) and O(G) parts; the O(G) correlator is the vacuum contraction
    of the O(1) part of one field with the O(G) part of the other, in both
    orders. Returns (map_AA, map_PhiPhi).
    """
    dx = np.asarray(dx, dtype=float)
    y = np.array([0.0]) if y is None else np.asarray(y, dtype=float)
    k_max, kappa_max, dk, dkappa = _default_cutoffs(p, G, t, dx, y, k_max, kappa_max, dk, dkappa)
    tables = mode_tables(p, k_max, dk)
    m = int(math.ceil(kappa_max / dkappa))
    kap_pos = dkappa * (np.arange(m) + 0.5)
    kap = np.concatenate([-kap_pos[::-1], kap_pos])
    ak = np.abs(kap)
    nk, nc = tables.k.size, 2 + kap.size
    wq = np.sqrt(dkappa / (2 * math.pi))  # channel normalization on the kappa grid

    # A_k(t): [annihilation coefficients, creation coefficients], each (Nk, Nc)
    A0 = np.zeros((2, nk, nc), dtype=complex)
    A1 = np.zeros((2, nk, nc), dtype=complex)
    for b in range(2):
        w = tables.w[b]
        f = tables.fA[b]
        A0[0, :, b] = f * np.exp(-1j * w * t)
        A0[1, :, b] = np.conj(f) * np.exp(1j * w * t)
        pref = tables.u4[b][:, None] * np.sqrt(ak / 2)[None, :]
        alpha = 1j * pref * G.fourier(w[:, None] - ak[None, :])
        beta = -1j * pref * G.fourier(w[:, None] + ak[None, :])
        e = np.exp(-1j * w * t)[:, None]
        A1[0, :, 2:] += f[:, None] * e * alpha * wq + np.conj(f[:, None] * e * beta) * wq
        A1[1, :, 2:] += f[:, None] * e * beta * wq + np.conj(f[:, None] * e * alpha) * wq
    aa_k = _vacuum_contraction(A0, A1) + _vacuum_contraction(A1, A0)
    Ex = np.exp(1j * np.outer(dx, tables.k)) * dk / (2 * math.pi)
    map_aa = CorrelationMap(float(t), dx, np.array([0.0]), (Ex @ aa_k)[:, None], "<A A> O(G)")

    # Phi_k(t, y): O(1) free environment on kappa channels, O(G) radiated G Psi / 2 on polariton channels
    ay = np.abs(y)
    vals = np.zeros((dx.size, y.size), dtype=complex)
    phi0_ref = np.zeros((2, nk, nc), dtype=complex)
    phi0_ref[0, :, 2:] = (np.exp(-1j * ak * t) / np.sqrt(2 * ak) * wq)[None, :]
    phi0_ref[1, :, 2:] = (np.exp(1j * ak * t) / np.sqrt(2 * ak) * wq)[None, :]
    phi1_ref = np.zeros((2, nk, nc), dtype=complex)
    for b in range(2):
        phi1_ref[0, :, b] = 0.5 * G.value(t) * tables.fPsi[b] * np.exp(-1j * tables.w[b] * t)
        phi1_ref[1, :, b] = np.conj(phi1_ref[0, :, b])
    for j, yy in enumerate(y):
        ph = np.exp(1j * kap * yy)[None, :]
        phi0 = phi0_ref.copy()
        phi0[0, :, 2:] *= ph
        phi0[1, :, 2:] *= np.conj(ph)
        phi1 = np.zeros_like(phi0)
        for b in range(2):
            tr = t - ay[j]
            phi1[0, :, b] = 0.5 * G.value(tr) * tables.fPsi[b] * np.exp(-1j * tables.w[b] * tr)
            phi1[1, :, b] = np.conj(phi1[0, :, b])
        pp_k = (
            _vacuum_contraction(phi0, phi1_ref)
            + _vacuum_contraction(phi1, phi0_ref)
            + _vacuum_contraction(phi1_ref, phi0)
            + _vacuum_contraction(phi0_ref, phi1)
        ) / 2
        vals[:, j] = Ex @ pp_k
    map_pp = CorrelationMap(float(t), dx, y, vals, "<Phi Phi> O(G)")
    return map_aa, map_pp


# ---------------------------------------------------------------------------
# peaks


@dataclass(frozen=True)
class Peak:
    dx: float
    y: float
    magnitude: float


def _refine(f_m, f_0, f_p):
    den = f_m - 2 * f_0 + f_p
    if den >= 0:
        return 0.0
    return float(np.clip(0.5 * (f_m - f_p) / den, -0.5, 0.5))


def locate_peaks(m: CorrelationMap, threshold=5.0, min_separation=3, data=None):
    """Local maxima of |values| above ``threshold`` x the median magnitude.

    Positions are refined with a separable quadratic fit through the 3x3
    neighbourhood; maxima closer than ``min_separation`` cells to a stronger
    one are suppressed. Returns peaks sorted by magnitude, strongest first.
    """
    a = np.abs(m.values) if data is None else np.asarray(data)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise NoPeaksFound("map too small for peak search")
    med = float(np.median(a))
    core = a[1:-1, 1:-1]
    is_max = np.ones(core.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = a[1 + di : a.shape[0] - 1 + di, 1 + dj : a.shape[1] - 1 + dj]
            is_max &= core > nb
    is_max &= core > threshold * med
    idx = np.argwhere(is_max) + 1
    if idx.size == 0:
        raise NoPeaksFound("no local maximum above threshold")
    order = np.argsort(-a[idx[:, 0], idx[:, 1]], kind="stable")
    kept = []
    for i, j in idx[order]:
        if any(max(abs(i - i2), abs(j - j2)) < min_separation for i2, j2 in kept):
            continue
        kept.append((i, j))
    dxs, ys = m.dx, m.y
    out = []
    for i, j in kept:
        si = _refine(a[i - 1, j], a[i, j], a[i + 1, j])
        sj = _refine(a[i, j - 1], a[i, j], a[i, j + 1])
        px = dxs[i] + si * (dxs[i + 1] - dxs[i - 1]) / 2
        py = ys[j] + sj * (ys[j + 1] - ys[j - 1]) / 2
        out.append(Peak(float(px), float(py), float(a[i, j])))
    return out
