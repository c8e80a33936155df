"""
Scenario runner.

    dissipative-hopfield <scenario> --config cfg.json --out results/ [--threads N] [--strict | --lax] [--seedless]
    dissipative-hopfield run --config cfg.json --out results/
    dissipative-hopfield validate --config cfg.json
    dissipative-hopfield schema

Each scenario writes CSV data files with '#key=value' headers, a copy of the
validated config, and report.json. Exit codes: 0 success, 2 numerics not
converged, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .config import SCENARIOS, SCHEMA, RunConfig, parse_config
from .correlations import cross_correlation_map, locate_peaks
from .errors import HopfieldError, NoPeaksFound, SchemaViolation
from .exact import extract_bogoliubov, occupation_exact, unitarity_defect
from .io import dumps, write_csv, write_json
from .lattice import compare_elimination
from .linear_response import band_frequencies, band_gap, band_weight, damping_info, permittivity
from .model import Lorentzian, Step
from .perturbative import (
    first_order_coeffs,
    lorentzian_yield_closed_form,
    occupation_first_order,
    spectrum_first_order,
    step_occupation_closed_form,
    sudden_switch_cutoff_scan,
    total_yield,
)


@dataclass
class RunReport:
    scenario: str
    config: dict
    headline: dict = field(default_factory=dict)
    converged: bool = True
    files: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    error: dict | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "scenario": self.scenario,
            "config": self.config,
            "headline": self.headline,
            "converged": self.converged,
            "files": sorted(self.files),
            "warnings": self.warnings,
            "metadata": self.metadata,
        }
        if self.error is not None:
            d["error"] = self.error
        return d


class _Ctx:
    def __init__(self, cfg: RunConfig, out, threads):
        self.cfg, self.out, self.threads = cfg, out, max(1, int(threads))
        self.files = []
        self.base_meta = {"scenario": cfg.scenario, "config": cfg.raw, "version": __version__}

    def csv(self, name, columns, rows, **meta):
        path = os.path.join(self.out, name)
        write_csv(path, columns, rows, {**self.base_meta, **meta})
        self.files.append(name)

    def json(self, name, obj):
        write_json(os.path.join(self.out, name), obj)
        self.files.append(name)

    def map(self, fn, items):
        items = list(items)
        if self.threads == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.threads) as ex:
            return list(ex.map(fn, items))


def _num(cfg, key, default):
    return cfg.numerics.get(key, default)


# ---------------------------------------------------------------------------
# scenarios; each returns (headline, converged)


def _dispersion(ctx: _Ctx):
    cfg, p = ctx.cfg, ctx.cfg.medium
    d = _num(cfg, "d_omega", 0.005 * p.omega)
    lo = _num(cfg, "omega_min", d)
    hi = _num(cfg, "omega_max", 3.0 * p.omega)
    w = lo + d * np.arange(int(math.floor((hi - lo) / d + 1e-9)) + 1)
    eps = permittivity(p, cfg.G0, w, on_pole="inf")
    root = np.sqrt(eps)
    root = np.where(root.imag < 0, -root, root)
    ctx.csv("dispersion.csv", ["omega", "re_eps", "im_eps", "re_sqrt_eps", "im_sqrt_eps"],
            zip(w, eps.real, eps.imag, root.real, root.imag), d_omega=d)
    info = damping_info(p, cfg.G0)
    peak = float(w[int(np.argmax(eps.imag))])
    return {
        "omega_at_max_im_eps": peak,
        "grid_spacing": d,
        "eps_static": float(permittivity(p, cfg.G0, 0.0).real),
        "n": p.n,
        "gamma": info.gamma,
        "im_sqrt_eps_slope": info.im_sqrt_eps_slope,
    }, True


def _bands(ctx: _Ctx):
    cfg, p = ctx.cfg, ctx.cfg.medium
    k = np.asarray(_num(cfg, "k_grid", list(np.linspace(0.0, _num(cfg, "k_max", 5.0 * p.omega), _num(cfg, "n_k", 501)))))
    wm, wp = band_frequencies(p, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        bm, bp = band_weight(p, k, "-"), band_weight(p, k, "+")
    ctx.csv("bands.csv", ["k", "omega_minus", "omega_plus", "weight_minus", "weight_plus"], zip(k, wm, wp, bm, bp))
    return {"omega_plus_at_0": float(band_frequencies(p, 0.0)[1]), "gap": float(band_gap(p)), "n": p.n}, True


def _k_grid(cfg, default_max):
    if "k_grid" in cfg.numerics:
        return np.asarray(cfg.numerics["k_grid"], dtype=float)
    kmax = _num(cfg, "k_max", default_max)
    n = _num(cfg, "n_k", 50)
    return kmax * np.arange(1, n + 1) / n


def _spectrum(ctx: _Ctx):
    cfg, p, G = ctx.cfg, ctx.cfg.medium, ctx.cfg.profile
    k = _k_grid(cfg, 3.0 * p.omega)
    cut = _num(cfg, "kappa_cutoff", None)
    res = ctx.map(lambda kk: spectrum_first_order(p, G, [kk], cut), k)
    nm = np.array([r.n_minus[0] for r in res])
    npl = np.array([r.n_plus[0] for r in res])
    conv = np.array([r.converged[0] for r in res])
    em = np.array([r.error_minus[0] for r in res])
    ep = np.array([r.error_plus[0] for r in res])
    cut_used = max(r.kappa_cutoff for r in res)
    ctx.csv("spectrum.csv", ["k", "n_minus", "n_plus", "err_minus", "err_plus", "converged"],
            zip(k, nm, npl, em, ep, conv), kappa_cutoff=cut_used, all_converged=bool(conv.all()))
    return {"kappa_cutoff": cut_used, "max_n_minus": float(nm.max()), "max_n_plus": float(npl.max()),
            "all_converged": bool(conv.all())}, bool(conv.all())


def _with(profile, G0=None, tau=None):
    kw = {}
    if G0 is not None:
        kw["G0"] = G0
    if tau is not None:
        kw["tau"] = tau
    return replace(profile, **kw)


def _fit_slope(x, y):
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if np.unique(x).size < 2:
        return None
    return float(np.polyfit(x, y, 1)[0])


def _yield_sweep(ctx: _Ctx):
    cfg, p, G = ctx.cfg, ctx.cfg.medium, ctx.cfg.profile
    lin = _num(cfg, "linearize_lower_band", True)
    kcut = _num(cfg, "k_max", None)
    pts = cfg.sweep_points

    def one(pt):
        g0, tau = pt
        prof = _with(G, g0, tau)
        num = total_yield(p, prof, linearize_lower_band=lin, k_cutoff=kcut)
        closed = float("nan")
        if isinstance(prof, Lorentzian):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                closed = lorentzian_yield_closed_form(p, prof.G0, prof.tau).N_over_l
        return g0, prof.characteristic_time, num.N_over_l, closed

    rows = ctx.map(one, pts)
    rows = [(g, t, n, c, n / c if c else float("nan")) for g, t, n, c in rows]
    ctx.csv("yield_sweep.csv", ["G0", "tau", "N_over_l", "N_over_l_closed_form", "C0"], rows,
            linearize_lower_band=lin)
    c0 = np.array([r[4] for r in rows])
    head = {"C0_mean": float(np.mean(c0)), "C0_spread": float((c0.max() - c0.min()) / np.mean(c0)),
            "points": len(rows)}
    taus = sorted({r[1] for r in rows})
    g0s = sorted({r[0] for r in rows})
    head["exponent_G0"] = _fit_slope([r[0] for r in rows if r[1] == taus[0]],
                                     [r[2] for r in rows if r[1] == taus[0]])
    head["exponent_tau"] = _fit_slope([r[1] for r in rows if r[0] == g0s[0]],
                                      [r[2] for r in rows if r[0] == g0s[0]])
    return head, True


def beta_deviation(b, fo, band_index):
    """Relative L2 distance between exact and first-order |beta| over the kappa grid."""
    be = np.abs(b.beta_env[band_index])
    bf = np.abs(fo.beta)
    return float(np.linalg.norm(be - bf) / np.linalg.norm(bf))


def _exact_vs_pert(ctx: _Ctx):
    cfg, p, G = ctx.cfg, ctx.cfg.medium, ctx.cfg.profile
    k = float(_num(cfg, "k", 0.5 * p.omega))
    band = _num(cfg, "band", "-")
    bi = 0 if band == "-" else 1
    g0s = cfg.sweep.get("G0") or [G.peak]
    tol = _num(cfg, "tol", 1e-10)
    nk = _num(cfg, "n_kappa", 801)

    def one(g0):
        prof = _with(G, g0)
        b = extract_bogoliubov(p, prof, k, tol=tol, n_kappa=nk)
        fo = first_order_coeffs(p, prof, k, b.kappa, band)
        return g0, b, fo

    results = ctx.map(one, g0s)
    rows = []
    for g0, b, fo in results:
        dev = beta_deviation(b, fo, bi)
        n_ex = b.occupations()[bi]
        n_fo = occupation_first_order(p, _with(G, g0), k, band)[0]
        rows.append((g0, dev, unitarity_defect(b), n_ex, n_fo))
        ctx.csv(f"beta_G0_{g0:.6g}.csv", ["kappa", "abs_beta_exact", "abs_beta_first_order"],
                zip(b.kappa, np.abs(b.beta_env[bi]), np.abs(fo.beta)), G0=g0, k=k, band=band)
    ctx.csv("exact_vs_perturbative.csv", ["G0", "beta_rel_deviation", "unitarity_defect", "n_exact", "n_first_order"],
            rows, k=k, band=band)
    head = {"k": k, "band": band, "deviation": {f"{r[0]:.6g}": r[1] for r in rows},
            "max_unitarity_defect": max(r[2] for r in rows)}
    if len(rows) > 1:
        head["deviation_exponent"] = _fit_slope([r[0] for r in rows], [r[1] for r in rows])
    return head, head["max_unitarity_defect"] < 1e-3


def _correlation_map(ctx: _Ctx):
    cfg, p, G = ctx.cfg, ctx.cfg.medium, ctx.cfg.profile
    t = float(_num(cfg, "t", 100.0 / p.omega))
    tau = G.characteristic_time or 1.0
    hx = _num(cfg, "dx_step", tau / 8)
    hy = _num(cfg, "y_step", tau / 8)
    xm, ym = 1.5 * t / p.n, 1.5 * t
    dx = hx * np.arange(-int(xm / hx), int(xm / hx) + 1)
    y = hy * np.arange(-int(ym / hy), int(ym / hy) + 1)
    m = cross_correlation_map(p, G, t, dx, y)
    ctx.csv("correlation_map.csv", ["dx", "y", "re", "im", "abs"], m.to_rows(), t=t,
            **{f"cutoff_{k}": v for k, v in m.cutoffs.items()})
    try:
        peaks = locate_peaks(m)
    except NoPeaksFound:
        peaks = []
    top = [{"dx": q.dx, "y": q.y, "magnitude": q.magnitude} for q in peaks[:4]]
    ctx.json("peaks.json", {"t": t, "expected": {"dx": t / p.n, "y": t}, "peaks": top})
    return {"t": t, "expected_dx": t / p.n, "expected_y": t, "peaks": top}, bool(peaks)


def _sudden_switch(ctx: _Ctx):
    cfg, p = ctx.cfg, ctx.cfg.medium
    k = float(_num(cfg, "k", p.omega))
    band = _num(cfg, "band", "-")
    L = np.asarray(_num(cfg, "Lambda", list(np.geomspace(10.0, 1000.0, 9) * p.omega)), dtype=float)
    scan = sudden_switch_cutoff_scan(p, cfg.G0, k, band, L)
    closed = step_occupation_closed_form(p, cfg.G0, k, band, L)
    cols = ["Lambda", "n_first_order", "n_closed_form"]
    data = [scan.Lambda, scan.n, closed]
    if _num(cfg, "exact", False):
        bi = 0 if band == "-" else 1
        ex = ctx.map(lambda lam: occupation_exact(p, Step(cfg.G0), k, kappa_cutoff=lam, n_kappa=2001)[bi], L)
        cols.append("n_exact")
        data.append(np.array(ex))
    ctx.csv("sudden_switch.csv", cols, zip(*data), G0=cfg.G0, k=k, band=band)
    inc = scan.relative_increase_per_doubling
    return {"growth_exponent_top_decade": scan.growth_exponent, "dn_dlnLambda": scan.log_slope,
            "monotone": scan.monotone, "min_relative_increase_per_doubling": float(inc.min()),
            "asymptotic_dn_dlnLambda": float(band_weight(p, k, band) * cfg.G0**2 / math.pi)}, True


def _oracle_compare(ctx: _Ctx):
    cfg, p, G = ctx.cfg, ctx.cfg.medium, ctx.cfg.profile
    k = float(_num(cfg, "k", p.omega))
    tau = G.characteristic_time or 10.0
    span = _num(cfg, "t_span", [-6 * tau, 6 * tau])
    ladder = _num(cfg, "dy", [tau / 50, tau / 100, tau / 200])
    rep = compare_elimination(p, G, k, span, ladder)
    ctrl = compare_elimination(p, G, k, span, ladder[:1], elimination="advanced")
    order = list(rep.observed_order) + [float("nan")]
    ctx.csv("oracle_compare.csv", ["dy", "distance_psi", "distance_A", "observed_order"],
            zip(rep.dy, rep.distance, rep.distance_A, order), k=k, t_span=list(span))
    return {"finest_distance": rep.finest, "passed": rep.passed, "observed_orders": list(rep.observed_order),
            "advanced_control_distance": float(ctrl.distance[0])}, rep.passed


RUNNERS = {
    "dispersion": _dispersion,
    "bands": _bands,
    "spectrum": _spectrum,
    "yield-sweep": _yield_sweep,
    "exact-vs-perturbative": _exact_vs_pert,
    "correlation-map": _correlation_map,
    "sudden-switch": _sudden_switch,
    "oracle-compare": _oracle_compare,
}


def run_scenario(cfg: RunConfig, out_dir=None, threads=1) -> RunReport:
    """Run one scenario, write its data files and report.json into ``out_dir``."""
    out = out_dir or cfg.output.get("directory") or "results"
    os.makedirs(out, exist_ok=True)
    ctx = _Ctx(cfg, out, threads)
    report = RunReport(cfg.scenario, cfg.raw)
    start = time.perf_counter()
    with open(os.path.join(out, "config.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(cfg.raw))
    ctx.files.append("config.json")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            head, ok = RUNNERS[cfg.scenario](ctx)
            report.headline, report.converged = head, bool(ok)
        except HopfieldError as exc:
            report.error = {"type": type(exc).__name__, "message": str(exc)}
            report.converged = False
    report.warnings = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    report.files = ctx.files + ["report.json"]
    report.metadata = {"wall_time_s": time.perf_counter() - start, "threads": ctx.threads,
                       "version": __version__, "rng": "none (all computations deterministic)"}
    write_json(os.path.join(out, "report.json"), report.to_dict())
    return report


def exit_code(report: RunReport):
    if report.error is not None:
        return 1
    return 0 if report.converged else 2


def build_parser():
    ap = argparse.ArgumentParser(prog="dissipative-hopfield", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, needs_out=True):
        sp.add_argument("--config", required=True, help="UTF-8 JSON run configuration")
        mode = sp.add_mutually_exclusive_group()
        mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                          help="reject unknown config keys (default)")
        mode.add_argument("--lax", dest="strict", action="store_false", help="warn about unknown keys and drop them")
        if needs_out:
            sp.add_argument("--out", default=None, help="output directory (default: config output.directory or ./results)")
            sp.add_argument("--threads", type=int, default=1, help="worker threads for sweep points and k fan-out")
            sp.add_argument("--seedless", action="store_true",
                            help="no-op: documents that no random numbers are used")

    for name in SCENARIOS:
        common(sub.add_parser(name, help=f"run the {name} scenario"))
    common(sub.add_parser("run", help="run the scenario named in the config"))
    common(sub.add_parser("validate", help="validate a config and exit"), needs_out=False)
    sub.add_parser("schema", help="print the config JSON schema")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        sys.stdout.write(json.dumps(SCHEMA, indent=2, sort_keys=True) + "\n")
        return 0
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = parse_config(args.config, strict=args.strict)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except SchemaViolation as exc:
        print(f"config error at {exc.pointer or '/'}: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    if args.command == "validate":
        print(f"ok: scenario {cfg.scenario}")
        return 0
    if args.command != "run" and args.command != cfg.scenario:
        print(f"config scenario {cfg.scenario!r} does not match subcommand {args.command!r}", file=sys.stderr)
        return 1
    report = run_scenario(cfg, args.out, args.threads)
    code = exit_code(report)
    summary = {"scenario": report.scenario, "converged": report.converged, "headline": report.headline}
    if report.error:
        summary["error"] = report.error
    print(dumps(summary), end="")
    return code


if __name__ == "__main__":
    sys.exit(main())
