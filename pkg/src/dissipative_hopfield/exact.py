"""
Non-perturbative per-k mode solver.

Eliminating the environment with its retarded solution leaves, per
wavenumber k, a local linear system in x = (A, pi_A, Psi, pi_Psi)::

    dx/dt = J M x + e_4 (v(t) . x) + e_4 f(t)
    v(t)  = -(G/2) (dG/dt e_3 + G e_4)        (memory term -(G/2) d/dt[G Psi])
    f(t)  = -G(t) dPhi_0(t, y=0)/dt           (input noise of the environment)

A jump of G from G_a to G_b kicks pi_Psi by -(G_b^2 - G_a^2) Psi / 4.
``elimination="advanced"`` flips the sign of the memory term; it is the
falsifiability control for the elimination and is physically wrong.

The environment mode b_kappa enters as f = i G sqrt(|kappa| / 4 pi) e^{-i|kappa|t},
from Phi_0(t, 0) = int dkappa [b_kappa e^{-i|kappa|t} + h.c.] / sqrt(4 pi |kappa|).
Modes kappa and -kappa couple identically, so kappa integrals over the real
line are twice the integral over kappa > 0.

Out-operators are expanded as::

    a_b^out = sum_c [alpha_self[b,c] a_c^in + beta_self[b,c] a_c^in+]
            + int dkappa [alpha_env[b](kappa) b_kappa + beta_env[b](kappa) b_kappa^+]

with in/out polariton operators in the interaction picture (free phases removed).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, solve_ivp

from .errors import (
    HopfieldError,
    InvalidParameter,
    NonFiniteState,
    StepSizeUnderflow,
    UnconvergedKappaGrid,
)
from .linear_response import J4, HopfieldBasis, hopfield_diagonalize, hopfield_matrix
from .model import MediumParams, Step, SwitchingProfile, ZeroProfile

_SIGN = {"retarded": 1.0, "advanced": -1.0}


def _elim_sign(elimination):
    try:
        return _SIGN[elimination]
    except KeyError:
        raise ValueError(f"elimination must be 'retarded' or 'advanced', got {elimination!r}") from None


def memory_row(G: SwitchingProfile, t, elimination="retarded"):
    """Row v(t) of the memory term: d pi_Psi/dt gains v . x."""
    s = _elim_sign(elimination)
    g, dg = float(G.value(t)), float(G.derivative(t))
    return s * np.array([0.0, 0.0, -0.5 * g * dg, -0.5 * g * g])


def kick_matrix(G_before, G_after, elimination="retarded"):
    """Linear map x(t+) = K x(t-) across a jump of G."""
    K = np.eye(4)
    K[3, 2] = -_elim_sign(elimination) * 0.25 * (G_after**2 - G_before**2)
    return K


def _check_tol(tol):
    if not (1e-12 <= tol <= 1e-6):
        raise InvalidParameter(f"tol must lie in [1e-12, 1e-6], got {tol!r}")


def _window(G: SwitchingProfile, eps, pad):
    lo, hi = G.support(eps)
    jumps = [j for j in G.jumps() if math.isfinite(j[0])]
    for t, _, _ in jumps:
        lo, hi = min(lo, t), max(hi, t)
    return lo - pad, hi + pad


def _raise_for_status(sol, where):
    if sol.status < 0:
        if "step size" in sol.message.lower():
            raise StepSizeUnderflow(f"{where}: {sol.message}")
        raise HopfieldError(f"{where}: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise NonFiniteState(f"{where}: non-finite state")


# ---------------------------------------------------------------------------
# forward integration


@dataclass(frozen=True)
class ModeState:
    """Complex amplitudes of one k-mode at time t."""

    k: float
    A: complex
    A_dot: complex
    Psi: complex
    Psi_dot: complex
    t: float = 0.0

    def canonical(self, g):
        """x = (A, pi_A, Psi, pi_Psi) with pi_A = dA/dt - g Psi."""
        return np.array([self.A, self.A_dot - g * self.Psi, self.Psi, self.Psi_dot], dtype=complex)

    @classmethod
    def from_canonical(cls, k, x, g, t=0.0):
        x = np.asarray(x, dtype=complex)
        return cls(float(k), x[0], x[1] + g * x[2], x[2], x[3], float(t))

    @classmethod
    def from_polariton(cls, p: MediumParams, k, band, t=0.0, conjugate=False, basis=None):
        """Free in-mode solution X_b e^{-i w_b t} (or its conjugate) evaluated at time t."""
        basis = hopfield_diagonalize(p, k) if basis is None else basis
        b = 0 if band in ("-", 0, -1, "lower") else 1
        w = basis.frequencies[b]
        x = basis.X[:, b] * np.exp(-1j * w * t)
        if conjugate:
            x = np.conj(x)
        return cls.from_canonical(k, x, p.g, t)

    def energy(self, p: MediumParams):
        """Energy of the medium-photon mode (conserved while G = 0)."""
        return 0.5 * (
            abs(self.A_dot) ** 2
            + self.k**2 * abs(self.A) ** 2
            + abs(self.Psi_dot) ** 2
            + p.omega**2 * abs(self.Psi) ** 2
        )

    def as_array(self):
        return np.array([self.A, self.A_dot, self.Psi, self.Psi_dot], dtype=complex)


@dataclass(frozen=True)
class DriveMode:
    """One environment mode b_kappa (``kind="positive"``) or b_kappa^+ (``"negative"``)."""

    kappa: float
    kind: str = "positive"
    amplitude: complex = 1.0

    def __post_init__(self):
        if not abs(self.kappa) > 0:
            raise InvalidParameter("drive needs |kappa| > 0")
        if self.kind not in ("positive", "negative"):
            raise InvalidParameter("kind must be 'positive' or 'negative'")

    def forcing(self, G: SwitchingProfile, t):
        """Source term f(t) added to d pi_Psi / dt."""
        ak = abs(self.kappa)
        s = 1.0 if self.kind == "positive" else -1.0
        return self.amplitude * s * 1j * G.value(t) * math.sqrt(ak / (4 * math.pi)) * np.exp(-s * 1j * ak * t)


@dataclass(frozen=True)
class Trajectory:
    k: float
    g: float
    t: np.ndarray
    x: np.ndarray  # shape (len(t), 4), canonical coordinates

    def state(self, i=-1) -> ModeState:
        return ModeState.from_canonical(self.k, self.x[i], self.g, self.t[i])

    @property
    def final(self) -> ModeState:
        return self.state(-1)

    @property
    def Psi(self):
        return self.x[:, 2]

    @property
    def A(self):
        return self.x[:, 0]


def integrate_mode(
    p: MediumParams,
    G: SwitchingProfile,
    k,
    initial: ModeState,
    drive: DriveMode | None = None,
    t_span=None,
    tol=1e-10,
    elimination="retarded",
    t_eval=None,
    max_step=np.inf,
) -> Trajectory:
    """Integrate the memory-eliminated mode equations with adaptive DOP853.

    ``t_span`` defaults to ``(initial.t, end of G's support)``. Jumps of G
    inside the span are applied as kicks. Returns the trajectory at
    ``t_eval`` (default: solver steps) including both endpoints.
    """
    _check_tol(tol)
    _elim_sign(elimination)
    if t_span is None:
        hi = G.support(1e-6)[1]
        if not math.isfinite(hi):
            raise InvalidParameter("t_span is required for profiles with unbounded support")
        t_span = (initial.t, max(hi, initial.t))
    t0, t1 = map(float, t_span)
    K0 = J4 @ hopfield_matrix(p, k)
    x0 = initial.canonical(p.g)
    scale = max(float(np.max(np.abs(x0))), 1.0)
    if drive is not None:
        scale = max(scale, abs(drive.amplitude) * G.peak)

    def rhs(t, x):
        dx = K0 @ x
        dx[3] += memory_row(G, t, elimination) @ x
        if drive is not None:
            dx[3] += drive.forcing(G, t)
        return dx

    direction = 1.0 if t1 >= t0 else -1.0
    kicks = sorted(
        (j for j in G.jumps() if min(t0, t1) < j[0] < max(t0, t1)), key=lambda j: direction * j[0]
    )
    edges = [t0] + [j[0] for j in kicks] + [t1]
    ts, xs = [], []
    x = x0
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        te = None
        if t_eval is not None:
            te = np.asarray(t_eval, dtype=float)
            te = te[(direction * (te - a) >= 0) & (direction * (b - te) >= 0)]
            te = np.unique(np.concatenate([[a], te, [b]]))[:: int(direction)]
        sol = solve_ivp(rhs, (a, b), x, method="DOP853", rtol=tol, atol=tol * scale, t_eval=te, max_step=max_step)
        _raise_for_status(sol, "integrate_mode")
        ts.append(sol.t)
        xs.append(sol.y.T)
        x = sol.y[:, -1].copy()
        if i < len(kicks):
            _, gb, ga = kicks[i]
            if direction > 0:
                x = kick_matrix(gb, ga, elimination) @ x
            else:
                x = np.linalg.solve(kick_matrix(gb, ga, elimination), x)
    return Trajectory(float(k), p.g, np.concatenate(ts), np.concatenate(xs))


# ---------------------------------------------------------------------------
# Bogoliubov expansion


def _c(z):
    return [float(np.real(z)), float(np.imag(z))]


def _c_array(a):
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _from_pairs(a):
    a = np.asarray(a, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def kappa_integral(values, kappa, breakpoints=()):
    """Integral over kappa > 0 of sampled values (last axis), Simpson piecewise between breakpoints.

    Breakpoints must be grid nodes; integrands are only piecewise smooth there.
    """
    kappa = np.asarray(kappa, dtype=float)
    values = np.asarray(values)
    cuts = [0]
    for bp in sorted(breakpoints):
        i = int(np.searchsorted(kappa, bp))
        if 0 < i < kappa.size - 1 and kappa[i] == bp:
            cuts.append(i)
    cuts.append(kappa.size - 1)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            total = total + simpson(values[..., a : b + 1], x=kappa[a : b + 1], axis=-1)
    return total


@dataclass
class ExactBogoliubov:
    """Out-operator expansion of both bands at one k (rows: out band -, +)."""

    k: float
    frequencies: np.ndarray
    alpha_self: np.ndarray  # (2, 2)
    beta_self: np.ndarray  # (2, 2)
    kappa: np.ndarray  # (N,), kappa > 0
    alpha_env: np.ndarray  # (2, N)
    beta_env: np.ndarray  # (2, N)
    kappa_cutoff: float
    breakpoints: tuple = ()
    meta: dict = field(default_factory=dict)

    def env_integral(self, values):
        """Integral over all kappa in R of an even function sampled on kappa > 0."""
        return 2.0 * kappa_integral(values, self.kappa, self.breakpoints)

    def occupations(self):
        """Created quanta per out-band in the in-vacuum: sum of |beta|^2 over all in-channels."""
        n = np.sum(np.abs(self.beta_self) ** 2, axis=1) + self.env_integral(np.abs(self.beta_env) ** 2)
        return np.asarray(n, dtype=float)

    def unitarity_lhs(self):
        """sum(|alpha|^2 - |beta|^2) over all in-channels, per out-band; 1 for exact evolution."""
        self_part = np.sum(np.abs(self.alpha_self) ** 2 - np.abs(self.beta_self) ** 2, axis=1)
        env = self.env_integral(np.abs(self.alpha_env) ** 2 - np.abs(self.beta_env) ** 2)
        return np.asarray(self_part + env, dtype=float)

    def to_dict(self):
        return {
            "k": self.k,
            "frequencies": [float(w) for w in self.frequencies],
            "alpha_self": _c_array(self.alpha_self),
            "beta_self": _c_array(self.beta_self),
            "kappa": [float(x) for x in self.kappa],
            "alpha_env": _c_array(self.alpha_env),
            "beta_env": _c_array(self.beta_env),
            "kappa_cutoff": float(self.kappa_cutoff),
            "breakpoints": [float(b) for b in self.breakpoints],
            "meta": self.meta,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d):
        return cls(
            k=float(d["k"]),
            frequencies=np.asarray(d["frequencies"], dtype=float),
            alpha_self=_from_pairs(d["alpha_self"]),
            beta_self=_from_pairs(d["beta_self"]),
            kappa=np.asarray(d["kappa"], dtype=float),
            alpha_env=_from_pairs(d["alpha_env"]),
            beta_env=_from_pairs(d["beta_env"]),
            kappa_cutoff=float(d["kappa_cutoff"]),
            breakpoints=tuple(d.get("breakpoints", ())),
            meta=dict(d.get("meta", {})),
        )

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def default_kappa_grid(G: SwitchingProfile, frequencies, n_kappa=801, kappa_cutoff=None, kappa_min=None):
    """Geometric kappa grid with the band frequencies inserted as nodes.

    The default range is [1e-3 / tau, w_+ + 40 / tau]: it reaches 40/tau beyond
    the upper band so the resonant alpha peaks at kappa = w_b are inside.
    Profiles without a time scale use tau = 1 / w_+ and a cutoff 200 w_+.
    """
    wmax = float(np.max(frequencies))
    tau = G.characteristic_time
    if tau is None:
        tau = 1.0 / wmax
        default_cut = 200.0 * wmax
    else:
        default_cut = wmax + 40.0 / tau
    cut = default_cut if kappa_cutoff is None else float(kappa_cutoff)
    kmin = 1e-3 / tau if kappa_min is None else float(kappa_min)
    if not cut > kmin:
        raise InvalidParameter("kappa cutoff must exceed kappa_min")
    grid = np.geomspace(kmin, cut, n_kappa)
    breaks = tuple(float(w) for w in frequencies if kmin < w < cut)
    grid = np.unique(np.concatenate([grid, breaks]))
    return grid, breaks, cut


def _gl_nodes(a, b, h, order=8):
    """Composite Gauss-Legendre nodes and weights on [a, b] with panels no wider than h."""
    n = max(1, int(math.ceil((b - a) / h)))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _adjoint_rows(basis: HopfieldBasis, G, t0, t1, tol, elimination):
    """Backward-propagate the out-rows u_b from t1 to t0 in the interaction picture.

    lambda_b(s) = u_b U(t1, s) = mu_b(s) E(t1 - s), d mu/ds = -mu E dK E^-1.
    Returns mu(t0) and the list of (lo, hi, dense solution) segments.
    """
    mu = basis.u.astype(complex)

    def rhs(s, y):
        m = y.reshape(2, 4)
        E = basis.free_propagator(t1 - s)
        Einv = basis.free_propagator(s - t1)
        v = memory_row(G, s, elimination)
        return (-(m @ E[:, 3])[:, None] * (v @ Einv)[None, :]).ravel()

    kicks = sorted((j for j in G.jumps() if t0 < j[0] < t1), key=lambda j: -j[0])
    edges = [t1] + [j[0] for j in kicks] + [t0]
    segments = []
    for i in range(len(edges) - 1):
        hi, lo = edges[i], edges[i + 1]
        sol = solve_ivp(
            rhs, (hi, lo), mu.ravel(), method="DOP853", rtol=tol, atol=tol * 1e-2, dense_output=True
        )
        _raise_for_status(sol, "adjoint integration")
        segments.append((lo, hi, sol.sol))
        mu = sol.y[:, -1].reshape(2, 4)
        if i < len(kicks):
            tj, gb, ga = kicks[i]
            E = basis.free_propagator(t1 - tj)
            mu = mu @ E @ kick_matrix(gb, ga, elimination) @ np.linalg.inv(E)
    return mu, segments


def _env_phases(kappa, nodes, sign):
    return np.exp(sign * 1j * np.outer(kappa, nodes))


def _extract_adjoint(p, G, k, basis, kappa, tol, eps_window, elimination, include_tails, chunk=64):
    w = basis.frequencies
    t0, t1 = _window(G, eps_window, pad=1.0 / float(w.max()))
    mu0, segments = _adjoint_rows(basis, G, t0, t1, tol, elimination)
    lam0 = mu0 @ basis.free_propagator(t1 - t0)
    X = basis.X
    ph1 = np.exp(1j * w * t1)[:, None]
    alpha_self = ph1 * (lam0 @ X) * np.exp(-1j * w * t0)[None, :]
    beta_self = ph1 * (lam0 @ np.conj(X)) * np.exp(1j * w * t0)[None, :]

    # environment: l_b(s) = e^{i w_b t1} lambda_b(s)[3] on Gauss-Legendre panels
    numax = float(kappa.max()) + float(w.max())
    tau = G.characteristic_time
    if tau is not None:
        numax += 4.0 / tau
    h = math.pi / numax
    alpha_env = np.zeros((2, kappa.size), dtype=complex)
    beta_env = np.zeros((2, kappa.size), dtype=complex)
    for lo, hi, dense in segments:
        nodes, weights = _gl_nodes(lo, hi, h)
        mu = dense(nodes).reshape(2, 4, -1)
        Ecol = basis.free_propagators(t1 - nodes)[:, :, 3]  # (N, 4)
        ell = np.einsum("bin,ni->bn", mu, Ecol) * ph1
        f = ell * (weights * G.value(nodes))[None, :]
        for a in range(0, kappa.size, chunk):
            kk = kappa[a : a + chunk]
            alpha_env[:, a : a + chunk] += f @ _env_phases(nodes, kk, -1)
            beta_env[:, a : a + chunk] += f @ _env_phases(nodes, kk, +1)

    if include_tails:
        u3 = basis.u[:, 3]
        for sgn, target in ((-1.0, alpha_env), (1.0, beta_env)):
            nu_k = sgn * kappa
            up = np.array([u3[b] * G.tail_fourier(t1, +1, w[b] + nu_k) for b in range(2)])
            low_pos = np.array([G.tail_fourier(t0, -1, w[c] + nu_k) for c in range(2)])
            low_neg = np.array([G.tail_fourier(t0, -1, -w[c] + nu_k) for c in range(2)])
            low = (alpha_self * u3[None, :]) @ low_pos + (beta_self * np.conj(u3)[None, :]) @ low_neg
            target += up + low

    pref = np.sqrt(kappa / (4 * math.pi))[None, :]
    alpha_env *= 1j * pref
    beta_env *= -1j * pref
    return alpha_self, beta_self, alpha_env, beta_env, (t0, t1)


def _extract_step(p, G: Step, k, basis, kappa, elimination):
    """Closed-form expansion for G0 Theta(-t): constant damped dynamics for t < 0, a kick at 0."""
    if elimination != "retarded":
        raise ValueError("the advanced elimination has growing modes under constant coupling")
    K = J4 @ basis.M
    K[3, 3] -= 0.5 * G.G0**2
    lam = basis.u @ kick_matrix(G.G0, 0.0, elimination)
    nu, V = np.linalg.eig(K)
    Vinv = np.linalg.inv(V)
    c = (lam @ V) * Vinv[:, 3][None, :]  # l_b(s) = sum_j c_bj e^{-nu_j s}, s < 0
    pref = G.G0 * np.sqrt(kappa / (4 * math.pi))
    alpha_env = 1j * pref * np.sum(c[:, :, None] / (-nu[None, :, None] - 1j * kappa[None, None, :]), axis=1)
    beta_env = -1j * pref * np.sum(c[:, :, None] / (-nu[None, :, None] + 1j * kappa[None, None, :]), axis=1)
    zero = np.zeros((2, 2), dtype=complex)
    return zero, zero.copy(), alpha_env, beta_env, (-math.inf, 0.0)


def extract_bogoliubov(
    p: MediumParams,
    G: SwitchingProfile,
    k,
    kappa=None,
    *,
    n_kappa=801,
    kappa_cutoff=None,
    tol=1e-10,
    eps_window=1e-4,
    method="adjoint",
    elimination="retarded",
    include_tails=True,
    grid_rtol=None,
) -> ExactBogoliubov:
    """Full Bogoliubov expansion of the out-polaritons at wavenumber k.

    ``method="adjoint"`` propagates the two out-rows backward once and
    obtains every environment channel by quadrature; ``"forward"`` evolves
    each in-solution (4 polariton solutions and one driven solution per kappa,
    the negative-frequency drive being the complex conjugate) and projects at
    the out-time. The ODE window is where |G| > eps_window * peak; outside it
    the medium evolves freely and the drive is integrated analytically
    (``include_tails``). Step profiles use their closed-form solution.

    With ``grid_rtol`` set, the occupations are recomputed on every other
    kappa node and :class:`UnconvergedKappaGrid` is raised if they change by
    more than ``grid_rtol``.
    """
    _check_tol(tol)
    basis = hopfield_diagonalize(p, k)
    w = basis.frequencies
    if kappa is None:
        kappa, breaks, cut = default_kappa_grid(G, w, n_kappa, kappa_cutoff)
    else:
        kappa = np.asarray(kappa, dtype=float)
        if np.any(kappa <= 0) or np.any(np.diff(kappa) <= 0):
            raise InvalidParameter("kappa grid must be positive and increasing")
        breaks = tuple(float(x) for x in w if np.any(kappa == x))
        cut = float(kappa[-1])

    if isinstance(G, ZeroProfile) or G.peak == 0:
        n = kappa.size
        res = (np.eye(2, dtype=complex), np.zeros((2, 2), complex), np.zeros((2, n), complex),
               np.zeros((2, n), complex), (0.0, 0.0))
    elif isinstance(G, Step):
        res = _extract_step(p, G, k, basis, kappa, elimination)
    elif method == "adjoint":
        res = _extract_adjoint(p, G, k, basis, kappa, tol, eps_window, elimination, include_tails)
    elif method == "forward":
        res = _extract_forward(p, G, k, basis, kappa, tol, eps_window, elimination)
    else:
        raise ValueError(f"unknown method {method!r}")
    a_s, b_s, a_e, b_e, (t0, t1) = res
    out = ExactBogoliubov(
        float(k), w.copy(), a_s, b_s, kappa, a_e, b_e, cut, breaks,
        meta={"method": method, "tol": tol, "t_in": t0, "t_out": t1, "elimination": elimination,
              "profile": G.to_dict()},
    )
    if grid_rtol is not None:
        _check_grid(out, grid_rtol)
    return out


def _check_grid(b: ExactBogoliubov, rtol):
    fine = b.occupations()
    keep = np.zeros(b.kappa.size, dtype=bool)
    keep[::2] = True
    keep[-1] = True
    for bp in b.breakpoints:
        keep[b.kappa == bp] = True
    coarse_vals = np.abs(b.beta_env[:, keep]) ** 2
    coarse = np.sum(np.abs(b.beta_self) ** 2, axis=1) + 2 * kappa_integral(coarse_vals, b.kappa[keep], b.breakpoints)
    change = np.max(np.abs(coarse - fine) / np.maximum(np.abs(fine), 1e-300))
    if change > rtol:
        raise UnconvergedKappaGrid(f"occupations change by {change:.3g} under grid coarsening (> {rtol:g})")


def _extract_forward(p, G, k, basis, kappa, tol, eps_window, elimination):
    w = basis.frequencies
    t0, t1 = _window(G, eps_window, pad=1.0 / float(w.max()))
    u, X = basis.u, basis.X
    ph1 = np.exp(1j * w * t1)
    alpha_self = np.zeros((2, 2), complex)
    beta_self = np.zeros((2, 2), complex)
    for c in range(2):
        for conj, target in ((False, alpha_self), (True, beta_self)):
            x0 = X[:, c] * np.exp(-1j * w[c] * t0)
            x0 = np.conj(x0) if conj else x0
            init = ModeState.from_canonical(k, x0, p.g, t0)
            tr = integrate_mode(p, G, k, init, None, (t0, t1), tol, elimination)
            target[:, c] = ph1 * (u @ tr.x[-1])
    alpha_env = np.zeros((2, kappa.size), complex)
    beta_env = np.zeros((2, kappa.size), complex)
    rest = ModeState(float(k), 0, 0, 0, 0, t0)
    for i, kk in enumerate(kappa):
        tr = integrate_mode(p, G, k, rest, DriveMode(kk), (t0, t1), tol, elimination)
        xf = tr.x[-1]
        alpha_env[:, i] = ph1 * (u @ xf)
        beta_env[:, i] = ph1 * (u @ np.conj(xf))
    return alpha_self, beta_self, alpha_env, beta_env, (t0, t1)


def extract_many(p, G, ks, threads=1, **kwargs):
    """extract_bogoliubov over several k, optionally on a thread pool; results keep the order of ks."""
    if threads <= 1:
        return [extract_bogoliubov(p, G, k, **kwargs) for k in ks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda k: extract_bogoliubov(p, G, k, **kwargs), ks))


def occupation_exact(p: MediumParams, G: SwitchingProfile, k, **kwargs):
    """(n_minus, n_plus) at k to all orders in G."""
    n = extract_bogoliubov(p, G, k, **kwargs).occupations()
    return float(n[0]), float(n[1])


def unitarity_defect(b: ExactBogoliubov) -> float:
    """max over out-bands of |sum(|alpha|^2 - |beta|^2) - 1|."""
    return float(np.max(np.abs(b.unitarity_lhs() - 1.0)))
