"""Command line entry point.

Six subcommands wire the computational modules into reproducible
experiments: dispersion (critical-point constants), wave (profile tables),
simulate (lattice front runs), solvable (reach-time runs), fit (position
series fits), and check (inter-level spacing and profile-deformation
checks).  Every file-producing invocation writes a JSON manifest next to
its primary output recording parameters, tool version, runtime, and sha256
digests, so a run can be reproduced byte for byte from the manifest alone.
"""

import argparse
import difflib
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import DataError, DomainError, FrontLabError
from .dispersion import DispersionModel, critical_point, expansion_coefficients
from .numerics import interp_uniform
from .wave import level_position, phi, solve_wave, wave_slope
from .lattice_sim import LevelTrace, SimParams, eta_estimate, run, run_with_snapshots
from .asymptotics import conjecture1_check, delta_series, fit as series_fit, theorem2_check
from .solvable import SolvableIC, fit_tx_expansion, ode_front


class _UsageError(Exception):
    """Bad command line; carries the parser whose usage should be shown."""

    def __init__(self, message, parser=None):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    # raise instead of sys.exit so main() can return a status code
    def error(self, message):
        raise _UsageError(message, self)


# ---------------------------------------------------------------------------
# small shared helpers


def _parse_floats(text, what):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise DomainError(f"could not parse {what} list {text!r}")
    if not vals:
        raise DomainError(f"empty {what} list")
    return vals


def _parse_window(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise DomainError(f"window {text!r} must be lo:hi")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise DomainError(f"window {text!r} must be lo:hi")
    return lo, hi


def _fmt(v):
    return "%.12g" % v


def _print_pairs(pairs):
    width = max(len(k) for k, _ in pairs)
    for k, v in pairs:
        print(f"{k:<{width}}  {v}")


def _json_default(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def _emit_json(obj):
    print(json.dumps(obj, indent=2, default=_json_default))


def _write_csv(path, header, cols):
    cols = [np.asarray(c, dtype=float) for c in cols]
    n = cols[0].size if cols else 0
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join("%.17g" % c[i] for c in cols) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(primary, subcommand, params, t0, inputs=(), outputs=()):
    manifest = {
        "subcommand": subcommand,
        "parameters": params,
        "tool_version": __version__,
        "runtime_seconds": round(time.perf_counter() - t0, 3),
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": {p: _sha256(p) for p in outputs},
    }
    path = primary + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
        fh.write("\n")
    return path


def _worker_cap():
    raw = os.environ.get("FRONTLAB_WORKERS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"FRONTLAB_WORKERS={raw!r} is not an integer")
    if n < 1:
        raise DomainError("FRONTLAB_WORKERS must be >= 1")
    return n


def _alpha_name(alpha):
    return "%g" % alpha


def _read_traces(path):
    """Traces from a simulate CSV: columns t, mu_<alpha>..., eta_<alpha>...."""
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            rows = [line for line in fh if line.strip()]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    names = header.split(",")
    if not names or names[0] != "t" or len(names) < 2:
        raise DataError(f"{path} lacks a t,mu_*,eta_* header row")
    data = (
        np.array([r.split(",") for r in rows], dtype=float)
        if rows
        else np.zeros((0, len(names)))
    )
    if data.shape[1] != len(names):
        raise DataError(f"{path}: row width disagrees with header")
    mu_cols = {n[3:]: k for k, n in enumerate(names) if n.startswith("mu_")}
    eta_cols = {n[4:]: k for k, n in enumerate(names) if n.startswith("eta_")}
    if not mu_cols:
        raise DataError(f"{path} has no mu_* columns")
    traces = {}
    for tag, k in mu_cols.items():
        ek = eta_cols.get(tag)
        traces[tag] = LevelTrace(
            alpha=float(tag),
            times=data[:, 0].copy(),
            mu=data[:, k].copy(),
            eta=data[:, ek].copy() if ek is not None else None,
        )
    return traces


def _pick_trace(traces, alpha):
    tag = _alpha_name(alpha)
    if tag not in traces:
        have = ", ".join(sorted(traces))
        raise DataError(f"no trace for alpha={tag}; file has alpha in {{{have}}}")
    return traces[tag]


def _lattice_constants(a, b):
    cp = critical_point(DispersionModel.lattice(a, b))
    return cp, expansion_coefficients(cp)


def _params_from_manifest(in_path):
    """(a, b) recovered from the manifest written next to a simulate CSV."""
    man_path = in_path + ".manifest.json"
    if not os.path.exists(man_path):
        raise DataError(
            f"lattice parameters unknown: pass --a/--b or keep {man_path} next to the traces"
        )
    try:
        with open(man_path) as fh:
            manifest = json.load(fh)
        pars = manifest["parameters"]
        a, b = pars["a"], pars["b"]
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot recover a, b from {man_path}: {exc}")
    if isinstance(a, list) or isinstance(b, list):
        raise DataError(f"{man_path} records a parameter sweep: pass --a/--b explicitly")
    return float(a), float(b)


# ---------------------------------------------------------------------------
# dispersion


def _cmd_dispersion(ns, parser):
    model_name = ns.model
    if model_name == "continuum":
        if ns.a is not None or ns.b is not None:
            parser.error("--a/--b are meaningless for the continuum model")
        model = DispersionModel.continuum()
    elif model_name == "lattice":
        if ns.a is None or ns.b is None:
            parser.error("lattice model needs --a and --b")
        model = DispersionModel.lattice(ns.a, ns.b)
    else:
        if ns.a is None:
            parser.error("solvable model needs --a")
        if ns.b is not None:
            parser.error("--b is meaningless for the solvable model")
        model = DispersionModel.solvable(ns.a)
    cp = critical_point(model)
    ec = expansion_coefficients(cp)
    values = [
        ("gamma_c", cp.gamma_c),
        ("v_c", cp.v_c),
        ("v2", cp.v2),
        ("v3", cp.v3),
        ("d", ec.d),
        ("d_prime", ec.d_prime),
        ("f_prime", ec.f_prime),
        ("g", ec.g_fkpp),
    ]
    if ns.json:
        _emit_json({k: v for k, v in values})
    else:
        _print_pairs([(k, _fmt(v)) for k, v in values])
    return 0


# ---------------------------------------------------------------------------
# wave


def _cmd_wave(ns, parser):
    t0 = time.perf_counter()
    x_lo, x_hi, h = -25.0, 25.0, 0.005
    if ns.grid:
        parts = ns.grid.split(":")
        if len(parts) != 3:
            parser.error("--grid must be x_lo:x_hi:h")
        try:
            x_lo, x_hi, h = (float(p) for p in parts)
        except ValueError:
            parser.error("--grid must be x_lo:x_hi:h")
    alphas = _parse_floats(ns.alpha, "alpha") if ns.alpha else [0.01, 0.3, 0.5, 0.7, 0.99]
    wp = solve_wave(x_lo=x_lo, x_hi=x_hi, h=h)
    pt = phi(wp)
    block = {}
    for al in alphas:
        w = level_position(wp, al)
        kappa = interp_uniform(pt.x_lo, pt.h, pt.phi, w) / wave_slope(wp, w)
        block[_alpha_name(al)] = {"W": w, "phi_over_omega_prime": kappa}
    outputs = []
    if ns.out:
        _write_csv(ns.out, ["x", "omega", "omega_prime", "phi"], [wp.x, wp.omega, wp.omega_p, pt.phi])
        outputs.append(ns.out)
        params = {"grid": f"{x_lo:g}:{x_hi:g}:{h:g}", "alpha": alphas, "out": ns.out}
        _write_manifest(ns.out, "wave", params, t0, outputs=outputs)
    _emit_json(block)
    return 0


# ---------------------------------------------------------------------------
# simulate


def _sim_csv_path(out, a, b, sweep):
    if not sweep:
        return out
    stem, ext = os.path.splitext(out)
    return f"{stem}_a{a:g}_b{b:g}{ext or '.csv'}"


def _run_one_front(a, b, ns):
    params = SimParams(
        a=a, b=b, t_max=ns.tmax, alphas=tuple(ns.alphas), sample_stride=ns.stride
    )
    traces = run(params)
    v_ref = params.reference_speed()
    done = []
    for tr in traces:
        if tr.times.size >= 3:
            done.append(eta_estimate(tr, v_ref))
        else:
            done.append(LevelTrace(tr.alpha, tr.times, tr.mu, np.full(tr.times.size, np.nan)))
    return done


def _emit_gap_script(path, csv_paths, alphas):
    """Gnuplot script: level gaps mu_ref - mu_alpha against 1/t."""
    ref = 0.5 if 0.5 in alphas else alphas[len(alphas) // 2]
    ref_col = 2 + alphas.index(ref)
    lines = [
        "# Level gaps mu^(%g)(t) - mu^(alpha)(t), an arbitrary constant apart," % ref,
        "# plotted against 1/t; the intercepts at 1/t -> 0 are the wave gaps.",
        "# Needs gnuplot >= 5 (the 'skip' keyword).",
        "set datafile separator ','",
        "set xlabel '1/t'",
        "set ylabel 'mu^(%g) - mu^(alpha) + Cste'" % ref,
        "set key left top",
    ]
    curves = []
    for csv_path in csv_paths:
        for k, al in enumerate(alphas):
            if al == ref:
                continue
            col = 2 + k
            curves.append(
                f"  '{csv_path}' skip 1 using (1.0/$1):(${ref_col}-${col}) "
                f"with lines title 'alpha={al:g}'"
            )
    lines.append("plot \\")
    lines.append(", \\\n".join(curves))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_simulate(ns, parser):
    t0 = time.perf_counter()
    a_list = _parse_floats(ns.a, "a")
    b_list = _parse_floats(ns.b, "b")
    ns.alphas = _parse_floats(ns.alphas, "alpha")
    if len(set(ns.alphas)) != len(ns.alphas):
        parser.error("duplicate alphas would collide in the CSV header")
    cap = _worker_cap()
    combos = [(a, b) for a in a_list for b in b_list]
    sweep = len(combos) > 1

    results = {}
    if sweep:
        with ThreadPoolExecutor(max_workers=min(cap, len(combos))) as pool:
            futs = {combo: pool.submit(_run_one_front, *combo, ns) for combo in combos}
        results = {combo: fut.result() for combo, fut in futs.items()}
    else:
        results[combos[0]] = _run_one_front(*combos[0], ns)

    outputs = []
    for a, b in combos:
        traces = results[(a, b)]
        csv_path = _sim_csv_path(ns.out, a, b, sweep)
        header = (
            ["t"]
            + [f"mu_{_alpha_name(al)}" for al in ns.alphas]
            + [f"eta_{_alpha_name(al)}" for al in ns.alphas]
        )
        cols = [traces[0].times] + [tr.mu for tr in traces] + [tr.eta for tr in traces]
        _write_csv(csv_path, header, cols)
        outputs.append(csv_path)

    if ns.gnuplot:
        if len(ns.alphas) < 2:
            parser.error("--gnuplot needs at least two alphas to form a gap")
        _emit_gap_script(ns.gnuplot, outputs, ns.alphas)
        outputs.append(ns.gnuplot)

    params = {
        "a": a_list[0] if len(a_list) == 1 else a_list,
        "b": b_list[0] if len(b_list) == 1 else b_list,
        "tmax": ns.tmax,
        "alphas": ns.alphas,
        "stride": ns.stride,
        "out": ns.out,
        "gnuplot": ns.gnuplot,
        "workers": min(cap, len(combos)),
    }
    man = _write_manifest(ns.out, "simulate", params, t0, outputs=outputs)
    for p in outputs + [man]:
        print(p)
    return 0


# ---------------------------------------------------------------------------
# solvable


def _cmd_solvable(ns, parser):
    t0 = time.perf_counter()
    rt = ode_front(SolvableIC.zero(), a=ns.a, x_max=ns.xmax, dt=ns.dt)
    outputs = []
    if ns.out:
        _write_csv(ns.out, ["x", "t_x"], [rt.x, rt.t])
        outputs.append(ns.out)
        params = {"a": ns.a, "xmax": ns.xmax, "dt": ns.dt, "out": ns.out, "fit": ns.fit}
        _write_manifest(ns.out, "solvable", params, t0, outputs=outputs)
        if not ns.json:
            print(ns.out)
    if ns.fit:
        lo, hi = _parse_window(ns.fit)
        cp = critical_point(DispersionModel.solvable(ns.a))
        ec = expansion_coefficients(cp)
        tx = fit_tx_expansion(rt, cp, (lo, hi), free_log=ns.free_log)
        rows = [
            ("", "fitted", "predicted"),
            ("ln_x", _fmt(tx.log_coeff) + ("" if ns.free_log else " (held)"), _fmt(1.5)),
            ("c", _fmt(tx.c), "-"),
            ("d", _fmt(tx.d), _fmt(ec.d)),
            ("f", _fmt(tx.f), _fmt(ec.f)),
            ("e", _fmt(tx.e), "-"),
        ]
        if ns.json:
            _emit_json(
                {
                    "window": [lo, hi],
                    "n": tx.n,
                    "log_coeff": tx.log_coeff,
                    "c": tx.c,
                    "d": tx.d,
                    "f": tx.f,
                    "e": tx.e,
                    "rms": tx.rms,
                    "cond": tx.cond,
                    "predicted": {"log_coeff": 1.5, "d": ec.d, "f": ec.f},
                }
            )
        else:
            w0 = max(len(r[0]) for r in rows)
            w1 = max(len(r[1]) for r in rows)
            for r in rows:
                print(f"{r[0]:<{w0}}  {r[1]:<{w1}}  {r[2]}")
            print(f"window=[{lo:g}, {hi:g}] n={tx.n} rms={tx.rms:.3e} cond={tx.cond:.3e}")
    return 0


# ---------------------------------------------------------------------------
# fit


def _emit_residual_script(path, curves, model_kind):
    """Gnuplot script: t*(delta_t - C) against t, log-lin, with the
    slope-0.946 logarithm for reference; data inlined so the script is
    self-contained."""
    lines = [
        "# Position residual times t against t (log-lin).  A curve tracking the",
        "# reference line has a log(t)/t term of the predicted size in delta_t.",
        "set logscale x",
        "set xlabel 't'",
        "set ylabel 't (delta_t - C)'",
        "set key left top",
    ]
    plot_items = []
    cste = None
    for k, (alpha, t, y) in enumerate(curves):
        name = f"$resid{k}"
        lines.append(f"{name} << EOD")
        lines.extend("%.17g %.17g" % (ti, yi) for ti, yi in zip(t, y))
        lines.append("EOD")
        plot_items.append(f"  {name} using 1:2 with lines title 'alpha={alpha:g} ({model_kind})'")
        if cste is None and t.size:
            cste = y[-1] - 0.946 * math.log(t[-1])
    if cste is not None:
        plot_items.append(
            "  0.946*log(x) + %.17g with lines dashtype 2 title '0.946 ln t + Cste'" % cste
        )
    lines.append("plot \\")
    lines.append(", \\\n".join(plot_items))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_fit(ns, parser):
    t0 = time.perf_counter()
    traces = _read_traces(ns.infile)
    if ns.a is None or ns.b is None:
        a, b = _params_from_manifest(ns.infile)
    else:
        a, b = ns.a, ns.b
    alphas = (
        _parse_floats(ns.alphas, "alpha")
        if ns.alphas
        else sorted(float(tag) for tag in traces)
    )
    cp, ec = _lattice_constants(a, b)
    reports = []
    curves = []
    for al in alphas:
        tr = _pick_trace(traces, al)
        ds = delta_series(tr, cp, ec)
        window = _parse_window(ns.window) if ns.window else (ds.times[0], ds.times[-1])
        res = series_fit(ds, ns.model, window)
        reports.append((al, ds, res))
        if ns.gnuplot:
            m = (ds.times >= res.window[0]) & (ds.times <= res.window[1])
            const = res.coeffs[0]
            curves.append((al, ds.times[m], ds.times[m] * (ds.delta[m] - const)))
    outputs = []
    if ns.gnuplot:
        _emit_residual_script(ns.gnuplot, curves, ns.model)
        outputs.append(ns.gnuplot)
        params = {
            "in": ns.infile,
            "a": a,
            "b": b,
            "model": ns.model,
            "window": ns.window,
            "alphas": alphas,
            "gnuplot": ns.gnuplot,
        }
        _write_manifest(ns.gnuplot, "fit", params, t0, inputs=[ns.infile], outputs=outputs)
    if ns.json:
        _emit_json(
            [
                {
                    "alpha": al,
                    "model": res.kind,
                    "window": list(res.window),
                    "n": int(
                        np.count_nonzero(
                            (ds.times >= res.window[0]) & (ds.times <= res.window[1])
                        )
                    ),
                    "coefficients": res.as_dict,
                    "rms": res.rms,
                    "cond": res.cond,
                }
                for al, ds, res in reports
            ]
        )
    else:
        for al, ds, res in reports:
            print(
                f"alpha={al:g} model={res.kind} window=[{res.window[0]:g}, {res.window[1]:g}] "
                f"rms={res.rms:.3e} cond={res.cond:.3e}"
            )
            _print_pairs([(k, _fmt(v)) for k, v in res.as_dict.items()])
    return 0


# ---------------------------------------------------------------------------
# check


def _cmd_check_conj1(ns, parser):
    alphas = _parse_floats(ns.alphas, "alpha")
    if len(alphas) != 2:
        parser.error("conj1 needs exactly two alphas")
    traces = _read_traces(ns.infile)
    tr_a = _pick_trace(traces, alphas[0])
    tr_b = _pick_trace(traces, alphas[1])
    wp = solve_wave()
    window = _parse_window(ns.window) if ns.window else None
    rep = conjecture1_check(tr_a, tr_b, wp, window=window)
    payload = {
        "alpha": rep.alpha,
        "beta": rep.beta,
        "wave_spacing": rep.wave_spacing,
        "fit_window": list(rep.fit_window),
        "c0": rep.c0,
        "c1": rep.c1,
        "r_squared": rep.r_squared,
        "n": int(rep.times.size),
    }
    if ns.json:
        _emit_json(payload)
    else:
        _print_pairs([(k, v if isinstance(v, (int, list)) else _fmt(v)) for k, v in payload.items()])
    return 0


def _cmd_check_thm2(ns, parser):
    times = sorted(_parse_floats(ns.times, "time"))
    params0 = SimParams(a=ns.a, b=ns.b, t_max=0.0, alphas=(ns.alpha,), sample_stride=ns.stride)
    dt = params0.sample_stride * params0.b
    snapped = []
    for ts in times:
        s = round(ts / dt) * dt
        if s <= 0:
            parser.error("snapshot times must be positive")
        if s not in snapped:
            snapped.append(s)
    t_last = snapped[-1]
    tmax = ns.tmax if ns.tmax is not None else t_last + max(1.0, t_last / 100.0) + 5 * dt
    params = SimParams(
        a=ns.a, b=ns.b, t_max=tmax, alphas=(ns.alpha,), sample_stride=ns.stride
    )
    traces, states = run_with_snapshots(params, snapped)
    trace = eta_estimate(traces[0], params.reference_speed())
    wp = solve_wave()
    pt = phi(wp)
    rows = []
    for st in states:
        rep = theorem2_check(st, trace, wp, pt, x0=ns.x0)
        rows.append(rep)
    dists = [r.distance for r in rows]
    payload = {
        "alpha": ns.alpha,
        "x0": ns.x0,
        "snapshots": [
            {
                "t": r.t,
                "eta": r.eta,
                "distance": r.distance,
                "scaled_distance": r.scaled_distance,
                "value_at_zero": r.value_at_zero,
            }
            for r in rows
        ],
        "distances_nonincreasing": bool(
            all(b <= a * (1 + 1e-6) for a, b in zip(dists, dists[1:]))
        ),
    }
    if ns.json:
        _emit_json(payload)
    else:
        print(f"alpha={ns.alpha:g} x0={ns.x0:g}")
        print(f"{'t':>10}  {'eta':>12}  {'distance':>12}  {'scaled':>12}  {'at_zero':>12}")
        for r in rows:
            print(
                f"{r.t:>10g}  {r.eta:>12.5e}  {r.distance:>12.5e}  "
                f"{r.scaled_distance:>12.5e}  {r.value_at_zero:>12.5e}"
            )
        print(f"distances non-increasing: {payload['distances_nonincreasing']}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def _build_parser():
    top = _Parser(prog="frontlab", allow_abbrev=False, description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=f"frontlab {__version__}")
    sub = top.add_subparsers(dest="cmd", required=True, metavar="subcommand")
    leaves = {}

    p = sub.add_parser("dispersion", allow_abbrev=False, help="critical-point constants")
    p.add_argument("--model", required=True, choices=["lattice", "continuum", "solvable"])
    p.add_argument("--a", type=float, default=None, help="lattice spacing (lattice, solvable)")
    p.add_argument("--b", type=float, default=None, help="time step (lattice only)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_dispersion)
    leaves["dispersion"] = p

    p = sub.add_parser("wave", allow_abbrev=False, help="travelling-wave tables")
    p.add_argument("--grid", default=None, help="x_lo:x_hi:h (default -25:25:0.005)")
    p.add_argument("--alpha", default=None, help="comma list of levels for W and Phi/omega'")
    p.add_argument("--out", default=None, help="CSV of x, omega, omega_prime, phi")
    p.set_defaults(handler=_cmd_wave)
    leaves["wave"] = p

    p = sub.add_parser("simulate", allow_abbrev=False, help="lattice front run")
    p.add_argument("--a", required=True, help="lattice spacing, or comma list to sweep")
    p.add_argument("--b", required=True, help="time step, or comma list to sweep")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--alphas", default="0.01,0.3,0.5,0.7,0.99")
    p.add_argument("--stride", type=int, default=50, help="steps between samples")
    p.add_argument("--out", required=True, help="trace CSV (sweeps suffix _a<a>_b<b>)")
    p.add_argument("--gnuplot", default=None, help="also emit a level-gap plot script")
    p.set_defaults(handler=_cmd_simulate)
    leaves["simulate"] = p

    p = sub.add_parser("solvable", allow_abbrev=False, help="reach-time run")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--dt", type=float, default=5e-4)
    p.add_argument("--out", default=None, help="CSV of x, t_x")
    p.add_argument("--fit", default=None, help="lo:hi window for the reach-time series fit")
    p.add_argument("--free-log", action="store_true", help="fit the ln x coefficient too")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_solvable)
    leaves["solvable"] = p

    p = sub.add_parser("fit", allow_abbrev=False, help="position series fit")
    p.add_argument("--in", dest="infile", required=True, help="trace CSV from simulate")
    p.add_argument("--model", default="c", choices=["a", "b", "c"])
    p.add_argument("--window", default=None, help="lo:hi in t (default: full trace)")
    p.add_argument("--alphas", default=None, help="levels to fit (default: all in file)")
    p.add_argument("--a", type=float, default=None, help="override manifest lattice spacing")
    p.add_argument("--b", type=float, default=None, help="override manifest time step")
    p.add_argument("--gnuplot", default=None, help="emit the residual-vs-t plot script")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_fit)
    leaves["fit"] = p

    p = sub.add_parser("check", allow_abbrev=False, help="spacing and profile checks")
    csub = p.add_subparsers(dest="what", required=True, metavar="what")
    q = csub.add_parser("conj1", allow_abbrev=False, help="inter-level spacing vs wave gap")
    q.add_argument("--in", dest="infile", required=True, help="trace CSV from simulate")
    q.add_argument("--alphas", default="0.3,0.7", help="the two levels")
    q.add_argument("--window", default=None, help="lo:hi in t")
    q.add_argument("--json", action="store_true")
    q.set_defaults(handler=_cmd_check_conj1)
    leaves["check conj1"] = q
    q = csub.add_parser("thm2", allow_abbrev=False, help="first-order profile deformation")
    q.add_argument("--a", type=float, required=True)
    q.add_argument("--b", type=float, required=True)
    q.add_argument("--alpha", type=float, default=0.5)
    q.add_argument("--x0", type=float, default=3.0)
    q.add_argument("--times", required=True, help="comma list of snapshot times")
    q.add_argument("--tmax", type=float, default=None, help="run horizon (default: past last time)")
    q.add_argument("--stride", type=int, default=50)
    q.add_argument("--json", action="store_true")
    q.set_defaults(handler=_cmd_check_thm2)
    leaves["check thm2"] = q

    return top, leaves


def _leaf_for(ns, leaves):
    key = ns.cmd if ns.cmd != "check" else f"check {getattr(ns, 'what', '')}"
    return leaves.get(key)


def _suggestion(extras, parser):
    options = [s for s in parser._option_string_actions if s.startswith("--")]
    for tok in extras:
        if tok.startswith("-"):
            close = difflib.get_close_matches(tok, options, n=1, cutoff=0.5)
            if close:
                return f" (did you mean {close[0]!r}?)"
    return ""


def main(argv=None):
    """Parse argv and dispatch; returns the process exit code."""
    top, leaves = _build_parser()
    try:
        ns, extras = top.parse_known_args(argv)
        if extras:
            leaf = _leaf_for(ns, leaves) or top
            raise _UsageError(
                "unrecognized arguments: %s%s" % (" ".join(extras), _suggestion(extras, leaf)),
                leaf,
            )
        leaf = _leaf_for(ns, leaves) or top
        return ns.handler(ns, leaf)
    except SystemExit as exc:  # --help / --version
        code = exc.code
        return int(code) if code else 0
    except _UsageError as exc:
        parser = exc.parser or top
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except FrontLabError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
