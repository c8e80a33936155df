"""
Model constants and switching profiles.

Units: c = hbar = 1, frequencies and wavenumbers share one unit.

Fourier convention used everywhere in the package::

    G~(w) = (2 pi)^(-1/2) * integral dt G(t) exp(+i w t)

With this choice the Lorentzian pulse G0 tau^2 / (tau^2 + t^2) transforms to
G0 tau sqrt(pi/2) exp(-tau |w|).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import exp1

from .errors import InvalidParameter, NegativeCoupling, NonFinite, NonPositiveOmega, UnresolvedFrequency

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class MediumParams:
    """Static medium constants.

    Parameters
    ----------
    omega : float
        Resonance frequency of the polarization oscillators (> 0).
    g : float
        Coupling between the EM field and the medium (>= 0).
    """

    omega: float
    g: float
    n: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("omega", "g"):
            if not math.isfinite(getattr(self, name)):
                raise NonFinite(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.omega <= 0:
            raise NonPositiveOmega(f"omega must be > 0, got {self.omega!r}")
        if self.g < 0:
            raise NegativeCoupling(f"g must be >= 0, got {self.g!r}")
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "n", math.sqrt(1.0 + (self.g / self.omega) ** 2))

    def sigma(self, k):
        """sigma(k) = k^2 - g^2 - Omega^2."""
        k = np.asarray(k, dtype=float)
        return k * k - self.g**2 - self.omega**2

    def rho(self, k):
        """rho(k) = sqrt(4 k^2 g^2 + sigma(k)^2)."""
        k = np.asarray(k, dtype=float)
        return np.hypot(2.0 * k * self.g, self.sigma(k))


def validate_params(p) -> MediumParams:
    """Return a validated :class:`MediumParams`.

    Accepts an existing instance, a mapping with ``omega`` and ``g`` keys, or an
    ``(omega, g)`` pair.
    """
    if isinstance(p, MediumParams):
        return MediumParams(p.omega, p.g)
    if isinstance(p, dict):
        return MediumParams(float(p["omega"]), float(p["g"]))
    omega, g = p
    return MediumParams(float(omega), float(g))


@dataclass(frozen=True)
class DeltaNPulse:
    """Lorentzian refractive-index pulse of amplitude ``delta_n`` on background ``n``."""

    delta_n: float
    tau: float
    n: float

    def __post_init__(self):
        if not (self.tau > 0):
            raise InvalidParameter("tau must be > 0")
        if not (self.n >= 1):
            raise InvalidParameter("background index must be >= 1")
        if not math.isfinite(self.delta_n):
            raise NonFinite("delta_n must be finite")


class SpectralAmplitude(NamedTuple):
    omega: np.ndarray
    value: np.ndarray


# ---------------------------------------------------------------------------
# switching profiles


def _check_amplitude(G0):
    if not math.isfinite(G0):
        raise NonFinite("G0 must be finite")
    if G0 < 0:
        raise NegativeCoupling(f"G0 must be >= 0, got {G0!r}")


class SwitchingProfile:
    """Base class for the time-dependent medium-environment coupling G(t).

    Subclasses are immutable. ``jumps`` lists discontinuities of G as
    ``(t, G_before, G_after)``; the ODE solvers apply them as impulses.
    """

    kind = "abstract"

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        """dG/dt away from the listed jumps."""
        raise NotImplementedError

    def fourier(self, omega):
        raise NotImplementedError

    def support(self, eps=1e-6):
        """Interval outside which |G| < eps * peak."""
        raise NotImplementedError

    def scaled(self, c):
        raise NotImplementedError

    def jumps(self):
        return []

    def tail_fourier(self, t, side, nu):
        """One-sided transform integral over the tail beyond t.

        ``side=+1`` gives int_t^inf G(s) e^{i nu s} ds, ``side=-1`` gives
        int_-inf^t G(s) e^{i nu s} ds (no 1/sqrt(2 pi) factor). Generic
        profiles integrate the effective support (|G| > 1e-17 peak) with
        QUADPACK's oscillatory weights; tails beyond a finite support vanish.
        """
        nu = np.asarray(nu, dtype=float)
        lo, hi = self.support(1e-300)
        if (side > 0 and t >= hi) or (side < 0 and t <= lo):
            return np.zeros(nu.shape, dtype=complex)
        # beyond |G| < 1e-17 peak the tail is negligible; integrate the finite
        # remainder with oscillatory weights (QUADPACK QAWO), in chunks
        elo, ehi = self.support(1e-17)
        end = ehi if side > 0 else elo
        finite = math.isfinite(end)
        length = abs(end - t) if finite else math.inf
        out = np.empty(nu.size, dtype=complex)
        f = lambda r: float(self.value(t + side * r))
        for i, w in enumerate(nu.ravel()):
            w_eff = side * w
            if not finite and w_eff == 0:
                val = quad(f, 0, math.inf, epsabs=1e-15, limit=500)[0]
            elif not finite:
                re = quad(f, 0, math.inf, weight="cos", wvar=abs(w_eff), epsabs=1e-15, limlst=100)[0]
                im = quad(f, 0, math.inf, weight="sin", wvar=abs(w_eff), epsabs=1e-15, limlst=100)[0]
                val = re + 1j * math.copysign(1.0, w_eff) * im
            else:
                n_chunks = max(1, int(math.ceil(length * abs(w_eff) / (40 * math.pi))))
                edges = np.linspace(0.0, length, n_chunks + 1)
                val = 0j
                for a, b in zip(edges[:-1], edges[1:]):
                    if w_eff == 0:
                        val += quad(f, a, b, epsabs=1e-15, epsrel=1e-12, limit=500)[0]
                    else:
                        re = quad(f, a, b, weight="cos", wvar=abs(w_eff), epsabs=1e-15, epsrel=1e-12, limit=500)[0]
                        im = quad(f, a, b, weight="sin", wvar=abs(w_eff), epsabs=1e-15, epsrel=1e-12, limit=500)[0]
                        val += re + 1j * math.copysign(1.0, w_eff) * im
            out[i] = np.exp(1j * w * t) * val
        return out.reshape(nu.shape)

    @property
    def peak(self):
        return self.G0

    @property
    def characteristic_time(self):
        """Time scale that sets the spectral width, or None."""
        return None

    def to_dict(self):
        raise NotImplementedError

    def __call__(self, t):
        return self.value(t)


@dataclass(frozen=True)
class Lorentzian(SwitchingProfile):
    """G(t) = G0 tau^2 / (tau^2 + t^2)."""

    G0: float
    tau: float
    kind = "lorentzian"

    def __post_init__(self):
        _check_amplitude(self.G0)
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidParameter("tau must be > 0")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.G0 * self.tau**2 / (self.tau**2 + t * t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return -2.0 * self.G0 * self.tau**2 * t / (self.tau**2 + t * t) ** 2

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = self.G0 * self.tau * math.sqrt(math.pi / 2) * np.exp(-self.tau * np.abs(omega))
        return out.astype(complex)

    def support(self, eps=1e-6):
        half = self.tau * math.sqrt(1.0 / eps - 1.0)
        return -half, half

    def tail_fourier(self, t, side, nu):
        """Closed form via partial fractions and the exponential integral E1."""
        nu = np.asarray(nu, dtype=float)
        t = float(t) + 0.0  # no signed zero: it would select the wrong side of E1's branch cut
        if side < 0:
            # the pulse is even: int_-inf^t G e^{i nu s} = int_-t^inf G e^{-i nu s}
            return Lorentzian.tail_fourier(self, -t, +1, -nu)
        if t < 0:
            # E1 is used on its principal branch only for t >= 0
            return SQRT_2PI * self.fourier(nu) - Lorentzian.tail_fourier(self, -t, +1, -nu)
        tau = self.tau
        out = np.empty(nu.shape, dtype=complex)
        zero = nu == 0
        out[zero] = self.G0 * tau * (0.5 * math.pi - math.atan(t / tau))
        w = nu[~zero]

        def one_pole(a):
            return np.exp(1j * w * a) * exp1(-1j * w * (t - a))

        out[~zero] = self.G0 * tau / 2j * (one_pole(1j * tau) - one_pole(-1j * tau))
        return out

    def scaled(self, c):
        return replace(self, G0=self.G0 * c)

    @property
    def characteristic_time(self):
        return self.tau

    def to_dict(self):
        return {"type": self.kind, "G0": self.G0, "tau": self.tau}


@dataclass(frozen=True)
class Gaussian(SwitchingProfile):
    """G(t) = G0 exp(-t^2 / (2 tau^2))."""

    G0: float
    tau: float
    kind = "gaussian"

    def __post_init__(self):
        _check_amplitude(self.G0)
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise InvalidParameter("tau must be > 0")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.G0 * np.exp(-0.5 * (t / self.tau) ** 2)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return -t / self.tau**2 * self.value(t)

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        return (self.G0 * self.tau * np.exp(-0.5 * (omega * self.tau) ** 2)).astype(complex)

    def support(self, eps=1e-6):
        half = self.tau * math.sqrt(2.0 * math.log(1.0 / eps))
        return -half, half

    def scaled(self, c):
        return replace(self, G0=self.G0 * c)

    @property
    def characteristic_time(self):
        return self.tau

    def to_dict(self):
        return {"type": self.kind, "G0": self.G0, "tau": self.tau}


@dataclass(frozen=True)
class Step(SwitchingProfile):
    """Sudden switch-off, G(t) = G0 for t < 0 and 0 for t > 0 (G0/2 at t = 0).

    The transform keeps only the principal-value part -i G0 / (sqrt(2 pi) w);
    the delta(w) piece is dropped and w = 0 maps to nan.
    """

    G0: float
    kind = "step"

    def __post_init__(self):
        _check_amplitude(self.G0)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.G0 * np.where(t < 0, 1.0, np.where(t > 0, 0.0, 0.5))

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -1j * self.G0 / (SQRT_2PI * omega)
        return np.where(omega == 0, complex(np.nan, np.nan), out)

    def support(self, eps=1e-6):
        return -math.inf, 0.0

    def scaled(self, c):
        return replace(self, G0=self.G0 * c)

    def jumps(self):
        return [(0.0, self.G0, 0.0)]

    def to_dict(self):
        return {"type": self.kind, "G0": self.G0}


@dataclass(frozen=True)
class ConstantOnWindow(SwitchingProfile):
    """G0 on [t_on, t_off] with sin^2 ramps of length ``ramp`` outside that window.

    ``ramp = 0`` gives a box with jumps at both edges.
    """

    G0: float
    t_on: float
    t_off: float
    ramp: float = 0.0
    kind = "window"

    def __post_init__(self):
        _check_amplitude(self.G0)
        if not self.t_off > self.t_on:
            raise InvalidParameter("t_off must exceed t_on")
        if self.ramp < 0:
            raise InvalidParameter("ramp must be >= 0")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where((t >= self.t_on) & (t <= self.t_off), 1.0, 0.0)
        if self.ramp > 0:
            r = self.ramp
            up = (t > self.t_on - r) & (t < self.t_on)
            down = (t > self.t_off) & (t < self.t_off + r)
            out = np.where(up, np.sin(0.5 * np.pi * (t - self.t_on + r) / r) ** 2, out)
            out = np.where(down, np.cos(0.5 * np.pi * (t - self.t_off) / r) ** 2, out)
        return self.G0 * out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.ramp == 0:
            return np.zeros_like(t)
        r = self.ramp
        c = 0.5 * np.pi / r
        up = (t > self.t_on - r) & (t < self.t_on)
        down = (t > self.t_off) & (t < self.t_off + r)
        d = np.where(up, c * np.sin(2 * c * (t - self.t_on + r)), 0.0)
        d = np.where(down, -c * np.sin(2 * c * (t - self.t_off)), d)
        return self.G0 * d

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        vals = [self._fourier_scalar(w) for w in omega.ravel()]
        return np.array(vals, dtype=complex).reshape(omega.shape)

    def _fourier_scalar(self, w):
        a, b = self.t_on, self.t_off
        # (e^{iwb} - e^{iwa}) / (iw) written stably for small |w|
        flat = (b - a) * np.exp(0.5j * w * (a + b)) * np.sinc(w * (b - a) / (2 * np.pi))
        total = self.G0 * flat
        if self.ramp > 0:
            r = self.ramp
            for lo, hi in ((a - r, a), (b, b + r)):
                f = lambda t: float(self.value(t))
                if abs(w) * r < 1e-3:
                    total += quad(lambda t: f(t) * np.cos(w * t), lo, hi, epsabs=0, epsrel=1e-12)[0]
                    total += 1j * quad(lambda t: f(t) * np.sin(w * t), lo, hi, epsabs=0, epsrel=1e-12)[0]
                else:
                    re = quad(f, lo, hi, weight="cos", wvar=w, epsabs=1e-15, epsrel=1e-12)[0]
                    im = quad(f, lo, hi, weight="sin", wvar=w, epsabs=1e-15, epsrel=1e-12)[0]
                    total += re + 1j * im
        return total / SQRT_2PI

    def support(self, eps=1e-6):
        return self.t_on - self.ramp, self.t_off + self.ramp

    def scaled(self, c):
        return replace(self, G0=self.G0 * c)

    def jumps(self):
        if self.ramp > 0:
            return []
        return [(self.t_on, 0.0, self.G0), (self.t_off, self.G0, 0.0)]

    @property
    def characteristic_time(self):
        return self.ramp if self.ramp > 0 else None

    def to_dict(self):
        return {"type": self.kind, "G0": self.G0, "t_on": self.t_on, "t_off": self.t_off, "ramp": self.ramp}


# 5-point Gauss-Legendre on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class Sampled(SwitchingProfile):
    """Tabulated G(t): cubic-spline interpolation inside the grid, zero outside."""

    kind = "sampled"

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 4:
            raise InvalidParameter("need matching 1-D time/value arrays with >= 4 samples")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise NonFinite("sampled profile contains non-finite entries")
        if np.any(np.diff(times) <= 0):
            raise InvalidParameter("time grid must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        self.times = times
        self.values = values
        self._spline = CubicSpline(times, values)

    @classmethod
    def from_csv(cls, path):
        """Read a two-column ``time,value`` CSV (header line optional)."""
        ts, vs = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    t, v = float(row[0]), float(row[1])
                except ValueError:
                    if i == 0:
                        continue
                    raise
                ts.append(t)
                vs.append(v)
        return cls(ts, vs)

    @property
    def G0(self):
        return float(np.max(np.abs(self.values)))

    def value(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.times[0]) & (t <= self.times[-1])
        return np.where(inside, self._spline(np.clip(t, self.times[0], self.times[-1])), 0.0)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t > self.times[0]) & (t < self.times[-1])
        return np.where(inside, self._spline(np.clip(t, self.times[0], self.times[-1]), 1), 0.0)

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        h = np.diff(self.times)
        wmax = float(np.max(np.abs(omega))) if omega.size else 0.0
        if wmax > 0 and h.max() > 2 * np.pi / (8 * wmax):
            raise UnresolvedFrequency(
                f"grid spacing {h.max():.3g} gives fewer than 8 samples per period at omega={wmax:.3g}"
            )
        nodes = (self.times[:-1, None] + h[:, None] * _GL_X[None, :]).ravel()
        weights = (h[:, None] * _GL_W[None, :]).ravel()
        fv = self._spline(nodes) * weights
        flat = omega.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i, w in enumerate(flat):
            out[i] = np.dot(fv, np.exp(1j * w * nodes))
        return (out / SQRT_2PI).reshape(omega.shape)

    def support(self, eps=1e-6):
        return float(self.times[0]), float(self.times[-1])

    def scaled(self, c):
        return Sampled(self.times, self.values * c)

    def jumps(self):
        out = []
        if self.values[0] != 0:
            out.append((float(self.times[0]), 0.0, float(self.values[0])))
        if self.values[-1] != 0:
            out.append((float(self.times[-1]), float(self.values[-1]), 0.0))
        return out

    def to_dict(self):
        return {"type": self.kind, "times": self.times.tolist(), "values": self.values.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, Sampled)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.times.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return f"Sampled(n={self.times.size}, t=[{self.times[0]:g}, {self.times[-1]:g}])"


@dataclass(frozen=True)
class ZeroProfile(SwitchingProfile):
    """G(t) = 0; the no-switching reference."""

    kind = "zero"

    @property
    def G0(self):
        return 0.0

    def value(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    derivative = value

    def fourier(self, omega):
        return np.zeros_like(np.asarray(omega, dtype=float), dtype=complex)

    def support(self, eps=1e-6):
        return 0.0, 0.0

    def scaled(self, c):
        return self

    def to_dict(self):
        return {"type": self.kind}


def profile_from_dict(d) -> SwitchingProfile:
    kind = d["type"]
    if kind == "lorentzian":
        return Lorentzian(float(d["G0"]), float(d["tau"]))
    if kind == "gaussian":
        return Gaussian(float(d["G0"]), float(d["tau"]))
    if kind == "step":
        return Step(float(d["G0"]))
    if kind == "window":
        return ConstantOnWindow(float(d["G0"]), float(d["t_on"]), float(d["t_off"]), float(d.get("ramp", 0.0)))
    if kind == "sampled":
        if "csv" in d:
            return Sampled.from_csv(d["csv"])
        return Sampled(d["times"], d["values"])
    if kind == "zero":
        return ZeroProfile()
    raise InvalidParameter(f"unknown profile type {kind!r}")


def profile_value(G: SwitchingProfile, t):
    """G(t) for any profile."""
    return G.value(t)


def profile_fourier(G: SwitchingProfile, omega) -> SpectralAmplitude:
    """Fourier amplitude G~(omega) in the symmetric convention of this module."""
    omega = np.asarray(omega, dtype=float)
    return SpectralAmplitude(omega, G.fourier(omega))
