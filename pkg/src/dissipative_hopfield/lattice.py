"""
y-resolved environment oracle.

For one wavenumber k the environment field Phi(t, y) is kept on a lattice in y
instead of being eliminated. With V = dPhi/dt the evolved system is::

    dPhi/dt = V
    dV/dt   = d^2 Phi / dy^2 + delta(y) d/dt[G Psi]
    Psi''   = -Omega^2 Psi - g A' - G V(y=0)
    A''     = -k^2 A + g Psi'

delta(y) is one cell of weight 1/dy at y = 0. The source is even in y, so only
y >= 0 is stored (mirror condition at y = 0). Time stepping is classical RK4
on the method-of-lines system.

When G is constant the total energy::

    E = A'^2/2 + k^2 A^2/2 + Psi'^2/2 + Omega^2 Psi^2/2 + int dy [V^2/2 + (dPhi/dy)^2/2]

is conserved by the semi-discrete system.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import CFLViolation, InvalidParameter, ReflectionDetected
from .exact import ModeState, integrate_mode
from .model import MediumParams, SwitchingProfile

BOUNDARIES = ("large-domain", "outgoing-absorbing")


@dataclass(frozen=True)
class LatticeConfig:
    """y_extent: half-length of the lattice; dt defaults to dy / 2.

    dt / dy may go up to 0.9, but at dy / 2 the RK4 time error stays below the
    O(dy^2) lattice error, so refining dy shows clean second-order convergence.
    """

    y_extent: float
    dy: float
    dt: float | None = None
    boundary: str = "large-domain"

    def __post_init__(self):
        if not (self.dy > 0 and self.y_extent > self.dy):
            raise InvalidParameter("need 0 < dy < y_extent")
        if self.boundary not in BOUNDARIES:
            raise InvalidParameter(f"boundary must be one of {BOUNDARIES}")
        if self.step / self.dy > 0.9 + 1e-12:
            raise CFLViolation(f"dt/dy = {self.step / self.dy:.3g} exceeds 0.9")

    @property
    def step(self):
        return 0.5 * self.dy if self.dt is None else float(self.dt)

    @property
    def n_cells(self):
        return int(round(self.y_extent / self.dy))

    @property
    def y(self):
        return self.dy * np.arange(self.n_cells + 1)


@dataclass
class LatticeState:
    t: float
    Phi: np.ndarray
    Phi_dot: np.ndarray
    mode: ModeState


@dataclass
class LatticeTrajectory:
    k: float
    t: np.ndarray
    A: np.ndarray
    A_dot: np.ndarray
    Psi: np.ndarray
    Psi_dot: np.ndarray
    Phi0: np.ndarray
    energy: np.ndarray
    flux: np.ndarray  # outgoing energy flux through both probes |y| = probe
    probe: float
    snapshots: dict
    final: LatticeState
    config: LatticeConfig

    def to_csv(self, path):
        """Columns: t, Re Psi, Im Psi, Re A, Im A, Phi(y=0)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "re_psi", "im_psi", "re_a", "im_a", "phi0"])
            for row in zip(self.t, self.Psi.real, self.Psi.imag, self.A.real, self.A.imag, self.Phi0.real):
                w.writerow([f"{v:.17g}" for v in row])


def _laplacian(phi, dy, out):
    out[1:-1] = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / dy**2
    out[0] = 2 * (phi[1] - phi[0]) / dy**2
    out[-1] = 0.0
    return out


def evolve_lattice_mode(
    p: MediumParams,
    G: SwitchingProfile,
    k,
    cfg: LatticeConfig,
    initial: ModeState,
    t_end,
    drive=None,
    snapshot_times=(),
    probe=None,
    reflection_threshold=1e-3,
) -> LatticeTrajectory:
    """Evolve (A, Psi) coupled to the lattice field from rest (Phi = V = 0) at initial.t.

    ``drive`` is an optional callable t -> incoming field Phi_0(t, y=0) added to
    the value seen by the medium (a free wave arriving at the medium line).
    ``probe`` (default: half the extent) is where the outgoing flux
    -V dPhi/dy is recorded, summed over both sides.

    Raises :class:`ReflectionDetected` when the large domain is too short for
    the run (an echo could return to y = 0) or, with the absorbing boundary,
    when the peak incoming characteristic at the probe carries more than
    ``reflection_threshold`` times the energy density of the outgoing one.
    """
    t0 = float(initial.t)
    T = float(t_end) - t0
    if T <= 0:
        raise InvalidParameter("t_end must be after initial.t")
    if cfg.boundary == "large-domain" and cfg.y_extent < T:
        raise ReflectionDetected(f"y_extent {cfg.y_extent:g} < run length {T:g}: boundary echo would return")
    n_steps = int(math.ceil(T / cfg.step))
    dt = T / n_steps
    dy, N = cfg.dy, cfg.n_cells
    y = cfg.y
    ip = int(round((0.5 * cfg.y_extent if probe is None else probe) / dy))
    ip = min(max(ip, 1), N - 2)
    absorbing = cfg.boundary == "outgoing-absorbing"
    wts = np.full(N + 1, 2 * dy)
    wts[0] = dy
    Om2, g, k2 = p.omega**2, p.g, float(k) ** 2
    lap = np.zeros(N + 1, dtype=complex)

    def rhs(t, phi, v, m):
        A, Ad, P, Pd = m
        Gt, dGt = float(G.value(t)), float(G.derivative(t))
        v0 = v[0]
        if drive is not None:
            v0 = v0 + _time_derivative(drive, t)
        dphi = v.copy()
        dv = _laplacian(phi, dy, lap).copy()
        dv[0] += (dGt * P + Gt * Pd) / dy
        if absorbing:
            dphi[-1] = -(phi[-1] - phi[-2]) / dy
            dv[-1] = 0.0
        else:
            dphi[-1] = 0.0
            dv[-1] = 0.0
        dm = np.array([Ad, -k2 * A + g * Pd, Pd, -Om2 * P - g * Ad - Gt * v0])
        return dphi, dv, dm

    phi = np.zeros(N + 1, dtype=complex)
    v = np.zeros(N + 1, dtype=complex)
    m = np.array([initial.A, initial.A_dot, initial.Psi, initial.Psi_dot], dtype=complex)
    snaps = sorted(float(s) for s in snapshot_times)
    snapshots = {}
    ts = t0 + dt * np.arange(n_steps + 1)
    rec = np.zeros((n_steps + 1, 4), dtype=complex)
    phi0 = np.zeros(n_steps + 1, dtype=complex)
    energy = np.zeros(n_steps + 1)
    flux = np.zeros(n_steps + 1)
    inc_max, out_max = 0.0, 0.0

    def record(i):
        rec[i] = m
        phi0[i] = phi[0]
        grad = np.diff(phi) / dy
        e_field = 0.5 * np.sum(wts * np.abs(v) ** 2) + np.sum(np.abs(grad) ** 2) * dy
        A, Ad, P, Pd = m
        energy[i] = e_field + 0.5 * (abs(Ad) ** 2 + k2 * abs(A) ** 2 + abs(Pd) ** 2 + Om2 * abs(P) ** 2)
        vp = 0.5 * (v[ip] + v[ip + 1])
        flux[i] = -2.0 * float(np.real(np.conj(vp) * grad[ip]))
        return vp, grad[ip]

    record(0)
    for i in range(n_steps):
        t = ts[i]
        k1 = rhs(t, phi, v, m)
        k2_ = rhs(t + dt / 2, phi + dt / 2 * k1[0], v + dt / 2 * k1[1], m + dt / 2 * k1[2])
        k3 = rhs(t + dt / 2, phi + dt / 2 * k2_[0], v + dt / 2 * k2_[1], m + dt / 2 * k2_[2])
        k4 = rhs(t + dt, phi + dt * k3[0], v + dt * k3[1], m + dt * k3[2])
        phi = phi + dt / 6 * (k1[0] + 2 * k2_[0] + 2 * k3[0] + k4[0])
        v = v + dt / 6 * (k1[1] + 2 * k2_[1] + 2 * k3[1] + k4[1])
        m = m + dt / 6 * (k1[2] + 2 * k2_[2] + 2 * k3[2] + k4[2])
        if absorbing:
            v[-1] = -(phi[-1] - phi[-2]) / dy
        vp, gp = record(i + 1)
        if absorbing:
            inc_max = max(inc_max, abs(vp + gp))
            out_max = max(out_max, abs(vp - gp))
        while snaps and snaps[0] <= ts[i + 1] + 1e-12:
            snapshots[snaps.pop(0)] = phi.copy()
    if absorbing and out_max > 0 and (inc_max / out_max) ** 2 > reflection_threshold:
        raise ReflectionDetected(f"incoming/outgoing energy ratio at probe = {(inc_max / out_max) ** 2:.3g}")
    final = LatticeState(ts[-1], phi, v, ModeState(float(k), *m, t=ts[-1]))
    return LatticeTrajectory(
        float(k), ts, rec[:, 0], rec[:, 1], rec[:, 2], rec[:, 3], phi0, energy, flux, y[ip] + dy / 2,
        snapshots, final, cfg,
    )


def _time_derivative(f, t, h=1e-6):
    return (f(t + h) - f(t - h)) / (2 * h)


def wavefront_position(phi, y, threshold=1e-3):
    """Largest y where |Phi| exceeds threshold * max |Phi|."""
    a = np.abs(phi)
    if a.max() == 0:
        return 0.0
    idx = np.nonzero(a > threshold * a.max())[0]
    return float(y[idx[-1]])


@dataclass(frozen=True)
class EliminationReport:
    dy: np.ndarray
    distance: np.ndarray  # relative L2 of Psi(t), lattice vs eliminated ODE
    distance_A: np.ndarray
    observed_order: np.ndarray
    tol: float
    elimination: str

    @property
    def finest(self):
        return float(self.distance[-1])

    @property
    def passed(self):
        return bool(self.finest < self.tol)


def relative_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def compare_elimination(
    p: MediumParams,
    G: SwitchingProfile,
    k,
    t_span,
    dy_ladder,
    tol=1e-4,
    elimination="retarded",
    initial=None,
    ode_tol=1e-12,
) -> EliminationReport:
    """Distance between lattice and memory-eliminated ODE trajectories on a ladder of dy.

    Both start from the same medium state with the environment at rest;
    default A = 1, everything else 0, so G Psi switches on smoothly. The
    observed order is log2 of successive distance ratios for a halving ladder.
    """
    t0, t1 = map(float, t_span)
    initial = ModeState(float(k), 1.0, 0.0, 0.0, 0.0, t0) if initial is None else initial
    d_psi, d_a = [], []
    for dy in dy_ladder:
        cfg = LatticeConfig(y_extent=(t1 - t0) + 4 * dy, dy=dy)
        lat = evolve_lattice_mode(p, G, k, cfg, initial, t1)
        ode = integrate_mode(p, G, k, initial, None, (t0, t1), ode_tol, elimination, t_eval=lat.t)
        d_psi.append(relative_l2(lat.Psi, ode.Psi))
        d_a.append(relative_l2(lat.A, ode.A))
    d_psi = np.array(d_psi)
    dys = np.asarray(dy_ladder, dtype=float)
    order = np.log(d_psi[:-1] / d_psi[1:]) / np.log(dys[:-1] / dys[1:]) if len(d_psi) > 1 else np.array([])
    return EliminationReport(dys, d_psi, np.array(d_a), order, tol, elimination)
