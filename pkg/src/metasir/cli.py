"""Command-line interface.

Every subcommand writes CSV or JSON to stdout (or ``--out FILE``).  JSON
carries ``schema: 1``, the package version and an echo of all parameters;
CSV files start with ``#``-prefixed metadata lines followed by a header row.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from typing import Sequence

import numpy as np

from . import __version__
from . import beta_approx as beta_mod
from . import bipolar_model as bipolar, cellular_model as cellular, gil_pelaez
from . import mc_simulator as simulate, moment_bounds as bounds
from .errors import (ConfigError, DomainError, InfeasibleMoments, MetaSirError, MissingMoment,
                     UndefinedError)

SCHEMA = 1
_ARG_ERRORS = (DomainError, ConfigError, UndefinedError, MissingMoment, InfeasibleMoments)
_NUM = re.compile(r"^-\d*\.?\d+(e[-+]?\d+)?(db)?(:[-+]?\d*\.?\d+(e[-+]?\d+)?(db)?(:\d+)?)?$", re.IGNORECASE)


class CliError(Exception):
    pass


def parse_value(text: str) -> float:
    """Float, or a value in dB when suffixed 'dB' (10^(v/10))."""
    t = text.strip()
    try:
        if t.lower().endswith("db"):
            return 10.0 ** (float(t[:-2]) / 10.0)
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_grid(text: str, log: bool = False) -> np.ndarray:
    """'lo:hi:n' inclusive; log spacing when ``log``."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([parse_value(parts[0])])
    if len(parts) != 3:
        raise CliError(f"grid must be lo:hi:n, got {text!r}")
    lo, hi = parse_value(parts[0]), parse_value(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise CliError(f"grid count must be an integer, got {parts[2]!r}") from None
    if n < 1:
        raise CliError("grid needs at least one point")
    if log:
        if lo <= 0 or hi <= 0:
            raise CliError("log grid needs positive end points")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _levels(text: str) -> list[float]:
    return [parse_value(v) for v in text.split(",") if v.strip()]


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    # let "--theta -10dB" through argparse by rewriting to "--theta=-10dB"
    out: list[str] = []
    i = 0
    argv = list(argv)
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and _NUM.match(argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


# ---------------------------------------------------------------- parsing

def _model_args(p: argparse.ArgumentParser, theta_required: bool = True):
    p.add_argument("--model", choices=("bipolar", "cellular"), default="bipolar")
    p.add_argument("--lambda", dest="lam", type=parse_value, default=1.0,
                   help="node intensity (bipolar)")
    p.add_argument("--r", type=parse_value, default=0.5, help="link distance (bipolar)")
    p.add_argument("--p", type=parse_value, default=None,
                   help="ALOHA probability (bipolar, default 1) or BS activity (cellular, default 1)")
    p.add_argument("--alpha", type=parse_value, default=4.0)
    if theta_required:
        p.add_argument("--theta", type=parse_value, required=True, help="SIR threshold (accepts dB)")


def _out_args(p: argparse.ArgumentParser, default_fmt: str):
    p.add_argument("--format", choices=("csv", "json"), default=default_fmt)
    p.add_argument("--out", default=None, help="write to FILE instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="metasir", description="Meta distribution of the SIR")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("moments", help="complex moment M_b")
    _model_args(p)
    p.add_argument("--b-re", type=float, default=1.0)
    p.add_argument("--b-im", type=float, default=0.0)
    _out_args(p, "json")

    p = sub.add_parser("metadist", help="exact ccdf by Gil-Pelaez inversion")
    _model_args(p)
    p.add_argument("--x-grid", default="0.01:0.99:99")
    p.add_argument("--log", action="store_true")
    _out_args(p, "csv")

    p = sub.add_parser("bounds", help="classical and four-moment bounds")
    _model_args(p)
    p.add_argument("--x-grid", default="0.01:0.99:99")
    p.add_argument("--log", action="store_true")
    p.add_argument("--exact", action="store_true", help="add the exact ccdf column")
    _out_args(p, "csv")

    p = sub.add_parser("beta", help="beta approximation and moment table")
    _model_args(p)
    p.add_argument("--x-grid", default="0.01:0.99:99")
    p.add_argument("--orders", default="-1,3,4,5,6,7,8")
    _out_args(p, "json")

    p = sub.add_parser("simulate", help="Monte Carlo oracle")
    _model_args(p)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=parse_value, default=None)
    p.add_argument("--bs-density", type=parse_value, default=1.0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--x-grid", default="0.01:0.99:99")
    p.add_argument("--samples-out", default=None, help="write raw samples to FILE")
    p.add_argument("--samples-format", choices=("bin", "csv"), default="bin")
    _out_args(p, "json")

    p = sub.add_parser("contour", help="contours of the meta distribution or of p_s(theta, p)")
    _model_args(p, theta_required=False)
    p.add_argument("--theta", default=None, help="theta value or grid lo:hi:n (accepts dB)")
    p.add_argument("--log", action="store_true", help="log-spaced theta / p grid")
    p.add_argument("--levels", required=True, help="comma-separated levels u (or p_t)")
    p.add_argument("--over-p", default=None, metavar="GRID",
                   help="cellular only: grid of activity p; solve p_s(theta, p) = level for theta")
    p.add_argument("--xtol", type=float, default=1e-4)
    _out_args(p, "csv")

    p = sub.add_parser("local-delay", help="mean local delay M_{-1}")
    _model_args(p)
    _out_args(p, "json")

    p = sub.add_parser("critical-p", help="critical BS activity for finite local delay")
    _model_args(p)
    _out_args(p, "json")

    p = sub.add_parser("asymptotics", help="small-p limits for the cellular model")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=parse_value, help="t = p theta^delta")
    g.add_argument("--pt", type=parse_value, help="target success probability")
    p.add_argument("--delta", type=parse_value, default=None)
    p.add_argument("--alpha", type=parse_value, default=4.0)
    _out_args(p, "json")
    return ap


# ---------------------------------------------------------------- helpers

def _params(a):
    if a.model == "bipolar":
        return bipolar.BipolarParams(a.lam, a.r, 1.0 if a.p is None else a.p, a.alpha)
    return cellular.CellularParams(a.alpha, 1.0 if a.p is None else a.p)


def _echo(a) -> dict:
    d = {k: v for k, v in vars(a).items() if k not in ("out", "format")}
    return {k: (float(v) if isinstance(v, np.floating) else v) for k, v in d.items()}


def _moment_fn(a, params, theta):
    if a.model == "bipolar":
        def fn(b):
            if b == -1:
                return bipolar.mean_local_delay(params, theta)
            return bipolar.moment(params, theta, b)
    else:
        def fn(b):
            if b == -1:
                return cellular.mean_local_delay(params, theta)
            return cellular.moment_with_activity(params, theta, b)
    return fn


def _provider(a, params, theta):
    if a.model == "bipolar":
        return gil_pelaez.bipolar_provider(params, theta)
    return gil_pelaez.cellular_provider(params, theta)


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": _jsonable(v.real), "im": _jsonable(v.imag)}
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    return v


def _flatten(payload: dict, prefix: str = "") -> dict:
    # one CSV row for scalar results: complex -> _re/_im, nested dicts joined by "_"
    out = {}
    for k, v in payload.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "_"))
        elif isinstance(v, complex):
            out[key + "_re"], out[key + "_im"] = [v.real], [v.imag]
        else:
            out[key] = [v]
    return out


def _emit(a, payload: dict, columns: dict | None = None):
    meta = {"schema": SCHEMA, "version": __version__, "command": a.cmd, "params": _echo(a)}
    if a.format == "csv" and columns is None:
        columns, payload = _flatten(payload), {}
    if a.format == "json":
        body = {**meta, **payload}
        if columns is not None:
            body["columns"] = {k: list(v) for k, v in columns.items()}
        text = json.dumps(_jsonable(body), indent=2, allow_nan=False) + "\n"
    else:
        buf = io.StringIO()
        for k, v in {**meta, **payload}.items():
            buf.write(f"# {k}: {json.dumps(_jsonable(v), allow_nan=False)}\n")
        w = csv.writer(buf, lineterminator="\n")
        names = list(columns)
        w.writerow(names)
        for row in zip(*(columns[n] for n in names)):
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating))
                                            else v) for v in row])
        text = buf.getvalue()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _x_grid(a) -> np.ndarray:
    xs = parse_grid(a.x_grid, getattr(a, "log", False))
    if np.any((xs <= 0) | (xs >= 1)):
        raise CliError("x grid must lie inside (0, 1)")
    return xs


# ---------------------------------------------------------------- commands

def cmd_moments(a):
    params = _params(a)
    b = complex(a.b_re, a.b_im)
    if a.b_im == 0:
        m = _moment_fn(a, params, a.theta)(a.b_re)
        m = complex(m)
    elif a.model == "bipolar":
        m = bipolar.moment(params, a.theta, b)
    else:
        m = cellular.moment_with_activity(params, a.theta, b)
    _emit(a, {"b": b, "M": m, "infinite": not math.isfinite(abs(m))})


def cmd_metadist(a):
    params = _params(a)
    xs = _x_grid(a)
    cv = gil_pelaez.curve(_provider(a, params, a.theta), xs, theta=a.theta)
    _emit(a, {"theta": a.theta}, {"x": cv.x, "ccdf": cv.values,
                                  "residual": [r.clamp_residual for r in cv.details]})


def cmd_bounds(a):
    params = _params(a)
    xs = _x_grid(a)
    ms = bounds.MomentSet.from_function(_moment_fn(a, params, a.theta))
    rows = [bounds.bound_set(ms, float(x)) for x in xs]
    cols: dict = {"x": xs}
    for i, b in enumerate(rows[0].orders):
        cols[f"markov_upper_{b}"] = [r.markov_upper[i] for r in rows]
        cols[f"markov_lower_{b}"] = [r.markov_lower[i] for r in rows]
    cols["markov_lower_neg1"] = [r.markov_lower_neg1 for r in rows]
    cols["chebyshev_lower"] = [r.chebyshev_lower for r in rows]
    cols["chebyshev_upper"] = [r.chebyshev_upper for r in rows]
    cols["cantelli_lower"] = [r.paley_zygmund for r in rows]
    cols["best_lower"] = [r.best_lower for r in rows]
    cols["best_upper"] = [r.best_upper for r in rows]
    if a.exact:
        cols["exact"] = gil_pelaez.curve(_provider(a, params, a.theta), xs).values
    _emit(a, {"theta": a.theta, "moments": {str(k): v for k, v in ms.M.items()}}, cols)


def cmd_beta(a):
    params = _params(a)
    fn = _moment_fn(a, params, a.theta)
    m1, m2 = fn(1.0), fn(2.0)
    f = beta_mod.fit(m1, m2)
    table = []
    for k in _levels(a.orders):
        try:
            mk = fn(k)
        except MetaSirError:
            mk = math.inf
        try:
            ek = beta_mod.moment_of_fit(f, k)
        except MetaSirError:
            ek = math.inf
        ratio = mk / ek if math.isfinite(mk) and math.isfinite(ek) else None
        table.append({"k": k, "M_k": mk, "beta_E": ek, "ratio": ratio})
    xs = _x_grid(a)
    payload = {"mu": f.mu, "beta": f.beta_param, "a": f.a, "variance": f.variance, "table": table}
    _emit(a, payload, {"x": xs, "beta_ccdf": beta_mod.ccdf(f, xs)})


def cmd_simulate(a):
    params = _params(a)
    cfg = simulate.SimConfig(a.model, params, a.theta, a.n, window_radius=a.window,
                             master_seed=a.seed, bs_density=a.bs_density, threads=a.threads)
    meta = simulate.simulate(cfg)
    if a.samples_out:
        simulate.write_samples(meta, a.samples_out, a.samples_format)
    moments = {}
    for b in (-1.0, 1.0, 2.0, 3.0, 4.0):
        try:
            est, se = simulate.empirical_moment(meta, b)
        except DomainError:
            est, se = math.nan, math.nan
        moments[str(b)] = {"estimate": est, "std_error": se}
    var, vse = simulate.empirical_variance(meta)
    xs = _x_grid(a)
    cc = simulate.empirical_ccdf(meta, xs)
    payload = {"seed": a.seed, "window": meta.window, "rejected": meta.rejected,
               "moments": moments, "variance": {"estimate": var, "std_error": vse}}
    _emit(a, payload, {"x": xs, "ccdf": cc.values})


def _solve_x(provider, u: float, xtol: float) -> float:
    # F(theta, x) is nonincreasing in x; bisect for F = u
    cp = gil_pelaez.CachedProvider(provider)
    lo, hi = 1e-6, 1.0 - 1e-6
    f_lo = gil_pelaez.invert(cp, lo)
    f_hi = gil_pelaez.invert(cp, hi)
    if f_lo < u:
        return 0.0
    if f_hi > u:
        return 1.0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if gil_pelaez.invert(cp, mid) > u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_theta(params: cellular.CellularParams, pt: float) -> float:
    # p_s(theta, p) decreases in theta; bisect on log theta
    from scipy.optimize import brentq

    def g(lt):
        return cellular.success_probability(params, math.exp(lt)) - pt

    lo, hi = -40.0, 1.0
    while g(hi) > 0:
        hi += 5.0
        if hi > 400:
            raise CliError("p_s does not reach the target level")
    return math.exp(brentq(g, lo, hi, xtol=1e-12))


def cmd_contour(a):
    levels = _levels(a.levels)
    if a.over_p is not None:
        if a.model != "cellular":
            raise CliError("--over-p needs --model cellular")
        ps = parse_grid(a.over_p, a.log)
        rows = [(u, float(p), _solve_theta(cellular.CellularParams(a.alpha, float(p)), u))
                for u in levels for p in ps]
        _emit(a, {}, {"level": [r[0] for r in rows], "p": [r[1] for r in rows],
                      "theta": [r[2] for r in rows]})
        return
    if a.theta is None:
        raise CliError("contour needs --theta (value or grid)")
    params = _params(a)
    thetas = parse_grid(a.theta, a.log)
    rows = []
    for th in thetas:
        prov = _provider(a, params, float(th))
        for u in levels:
            rows.append((u, float(th), _solve_x(prov, u, a.xtol)))
    _emit(a, {}, {"level": [r[0] for r in rows], "theta": [r[1] for r in rows],
                  "x": [r[2] for r in rows]})


def cmd_local_delay(a):
    params = _params(a)
    if a.model == "bipolar":
        v = bipolar.mean_local_delay(params, a.theta)
    else:
        v = cellular.mean_local_delay(params, a.theta)
    _emit(a, {"theta": a.theta, "mean_local_delay": v, "infinite": math.isinf(v)})


def cmd_critical_p(a):
    if a.model != "cellular":
        raise CliError("critical-p is defined for --model cellular")
    params = cellular.CellularParams(a.alpha, 1.0)
    pc = cellular.critical_activity(params, a.theta)
    lo, hi = cellular.pc_conjectured_bracket(params, a.theta)
    _emit(a, {"theta": a.theta, "p_c": pc,
              "conjectured_bracket": {"lower": lo, "upper": hi, "note": "conjectured, not proven"}})


def cmd_asymptotics(a):
    delta = a.delta if a.delta is not None else 2.0 / a.alpha
    if a.t is not None:
        _emit(a, {"delta": delta, "t": a.t,
                  "success_probability": cellular.asymptotic_success(delta, a.t)})
    else:
        from .special_functions import sinc
        t = (1.0 / a.pt - 1.0) * sinc(delta)
        _emit(a, {"delta": delta, "p_target": a.pt, "t": t,
                  "variance_limit": cellular.asymptotic_variance(a.pt)})


COMMANDS = {"moments": cmd_moments, "metadist": cmd_metadist, "bounds": cmd_bounds,
            "beta": cmd_beta, "simulate": cmd_simulate, "contour": cmd_contour,
            "local-delay": cmd_local_delay, "critical-p": cmd_critical_p,
            "asymptotics": cmd_asymptotics}


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as e:
        return int(e.code or 0)
    try:
        COMMANDS[args.cmd](args)
    except (CliError, *_ARG_ERRORS) as e:
        parser.print_usage(sys.stderr)
        print(f"metasir {args.cmd}: error: {e}", file=sys.stderr)
        return 2
    except (MetaSirError, ArithmeticError) as e:
        print(f"metasir {args.cmd}: numerical failure in {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    return 0


def run(argv: Sequence[str]) -> int:
    """Run one command and return its exit code."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
