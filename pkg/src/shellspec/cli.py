"""Command line front end: bands, scan, certify, nonrel, selfcheck.

Exit codes: 0 ok, 1 selfcheck failure, 2 bad config, 3 numerical failure.
"""

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

from .dirac_core import InteractionParams

COMMANDS = ("bands", "scan", "certify", "nonrel", "selfcheck")

EXIT_OK, EXIT_SELFCHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# -- config ------------------------------------------------------------------------

DEFAULT_NUMERICS = {"nodes_per_unit": 6.0, "tol": 1e-8, "steps": 80}


def _positive(d, key):
    v = d.get(key)
    if v is None:
        return
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
        raise ConfigError(f"numerics.{key} must be a positive number, got {v!r}")


def load_config(path=None, command=None, overrides=None):
    cfg = {}
    if path:
        try:
            cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    if command:
        cfg["command"] = command
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {cmd!r}")
    num = dict(DEFAULT_NUMERICS)
    num.update(cfg.get("numerics") or {})
    for k, v in (overrides or {}).get("numerics", {}).items():
        if v is not None:
            num[k] = v
    for k in ("nodes_per_unit", "tol", "steps", "L", "threads"):
        _positive(num, k)
    cfg["numerics"] = num
    p = dict(cfg.get("params") or {})
    for k, v in (overrides or {}).get("params", {}).items():
        if v is not None:
            p[k] = v
    if cmd in ("bands", "scan") and not p:
        raise ConfigError(f"{cmd} needs params")
    try:
        cfg["params"] = InteractionParams.from_dict(p) if p else None
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad params: {e}") from e
    if cmd == "scan":
        if "curve" not in cfg:
            raise ConfigError("scan needs a curve")
        from .curve_geometry import curve_from_dict
        try:
            cfg["curve_spec"] = curve_from_dict(cfg["curve"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad curve: {e}") from e
        w = num.get("window")
        if w is not None and (len(w) != 2 or not w[0] < w[1]):
            raise ConfigError("numerics.window must be [lo, hi] with lo < hi")
    if cmd == "certify":
        c = cfg.get("certificate") or {}
        if "tau" not in c and cfg["params"] is None:
            raise ConfigError("certify needs certificate.tau or params.tau")
    if cmd == "nonrel":
        nr = cfg.get("nonrel") or {}
        cg = nr.get("c_grid", [4, 8, 16, 32])
        if any(not (isinstance(x, (int, float)) and x > 0) for x in cg):
            raise ConfigError("nonrel.c_grid must hold positive numbers")
        if "curve" in cfg:
            from .curve_geometry import curve_from_dict
            try:
                cfg["curve_spec"] = curve_from_dict(cfg["curve"])
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"bad curve: {e}") from e
    return cfg


def threads_from(args_threads):
    if args_threads:
        return int(args_threads)
    env = os.environ.get("SHELLSPEC_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"SHELLSPEC_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise ConfigError("SHELLSPEC_THREADS must be >= 1")
        return n
    return 1


# -- commands ------------------------------------------------------------------------

def run_bands(cfg, out):
    from .band_structure import essential_spectrum
    rep = essential_spectrum(cfg["params"])
    return {"bands.json": rep.to_json()}, rep.to_dict()


def run_scan(cfg, out, workers):
    from .boundary_integral import bs_eigenvalue_scan, default_curve_for
    from .band_structure import essential_spectrum
    p, num = cfg["params"], cfg["numerics"]
    w = num.get("window")
    if w is None:
        e = p.gap_edge
        gaps = essential_spectrum(p).gap_complement
        if not gaps:
            raise ConfigError("no gap to scan")
        a, b = max(gaps, key=lambda g: g[1] - g[0])
        pad = 1e-3 * e
        w = (a + pad, b - pad)
    curve = default_curve_for(cfg["curve_spec"], p, w, num["nodes_per_unit"], num["tol"], num.get("L"))
    res = bs_eigenvalue_scan(curve, p, w, steps=int(num["steps"]), tol=num["tol"], workers=workers)
    return {"scan.json": res.to_json(), "scan.csv": res.to_csv()}, res.to_dict()


def run_certify(cfg, out):
    from .bound_state_certifier import (CertificateInput, CertificateResult, bracket,
                                        find_omega_star, gap_edge)
    c = dict(cfg.get("certificate") or {})
    p = cfg["params"]
    tau = c.get("tau", p.tau if p else None)
    m = c.get("m", p.mass if p else 1.0)
    cc = c.get("c", p.c if p else 1.0)
    N = int(c.get("N", 1))
    L0 = float(c.get("L0", 2.0))
    try:
        L_star, w_star = find_omega_star(tau, m, cc, N, L0=L0)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    L = c.get("L", L_star)
    omega = c.get("omega", w_star)
    if omega is None:
        raise RuntimeError("no certifiable angle found")
    inp = CertificateInput(tau, m, cc, N, L, omega, L0)
    b = bracket(inp)
    res = CertificateResult(b, b < 0, gap_edge(tau, m, cc), w_star, L)
    d = res.to_dict()
    d["omega"] = omega
    return {"certify.json": json.dumps(d)}, d


def run_nonrel(cfg, out):
    from .curve_geometry import build_curve, sample_curve, smoothed_corner
    from .schrodinger_reference import nonrel_limit_experiment
    nr = cfg.get("nonrel") or {}
    p = cfg["params"]
    m = p.mass if p else 1.0
    eta = nr.get("eta", 2 * p.eta if p else -1.0)
    spec = cfg.get("curve_spec") or build_curve(smoothed_corner(math.pi / 6, 1.0))
    num = cfg["numerics"]
    cv = sample_curve(spec, num["nodes_per_unit"], num.get("L", 25.0))
    br = nr.get("bracket")
    fit = nonrel_limit_experiment(cv, m, eta, nr.get("c_grid", [4, 8, 16, 32]),
                                  tuple(br) if br else None)
    return {"nonrel.json": fit.to_json()}, fit.to_dict()


def run_selfcheck(cfg, out):
    rows = selfcheck_rows()
    d = {"checks": [{"name": n, "ok": ok, "detail": det} for n, ok, det in rows],
         "passed": all(ok for _, ok, _ in rows)}
    return {"selfcheck.json": json.dumps(d)}, d


def selfcheck_rows():
    """Quick invariant checks, one per module; each returns (name, ok, detail)."""
    import numpy as np
    rows = []

    def check(name, fn):
        t = time.time()
        try:
            ok, det = fn()
        except Exception as e:                            # report, never crash
            ok, det = False, f"{type(e).__name__}: {e}"
        rows.append((name, bool(ok), f"{det} ({time.time() - t:.1f}s)"))

    def sf():
        from .special_functions import bessel_k, bessel_k_integral
        err = max(abs(bessel_k(n, x) - bessel_k_integral(n, x)) / abs(bessel_k_integral(n, x))
                  for n in (0, 1) for x in (1e-3, 0.5, 3.0, 20.0))
        return err < 1e-10, f"max rel err {err:.1e}"

    def geom():
        from .curve_geometry import build_curve, sample_curve, smoothed_corner
        cv = sample_curve(build_curve(smoothed_corner(math.pi / 6)), 4, 6)
        err = float(np.max(np.abs(np.linalg.norm(cv.tangents, axis=1) - 1)))
        return err < 1e-12, f"unit tangent err {err:.1e}"

    def dirac():
        from .dirac_core import green_kernel
        p = InteractionParams(1.0, 0.5, 0.2, 1.0, 2.0)
        x = np.array([0.3, -0.7])
        G1 = green_kernel(0.4, x, p)
        G2 = green_kernel(0.4, -x, p)
        err = float(np.max(np.abs(G1 - G2.conj().T)))
        return err < 1e-12, f"G(x) - G(-x)^* = {err:.1e}"

    def bands():
        from .band_structure import essential_spectrum
        r = essential_spectrum(InteractionParams(2.0, 0.0, 0.0))
        return r.isolated_points == [0.0], f"points {r.isolated_points}"

    def bie():
        from .boundary_integral import assemble_cz, identity_defect
        from .curve_geometry import build_curve, sample_curve, straight_line
        cv = sample_curve(build_curve(straight_line()), 8, 15, refine=False)
        dfc = identity_defect(assemble_cz(cv, InteractionParams(0, -1, 0), 0.0, check_truncation=False))
        return dfc < 5e-2, f"identity defect {dfc:.1e}"

    def schr():
        from .schrodinger_reference import line_threshold
        z, _ = line_threshold(1.0, -1.0)
        return abs(z + 0.5) < 1e-4, f"threshold {z:.6f}"

    def cert():
        from .bound_state_certifier import CertificateInput, bracket
        b = bracket(CertificateInput(-1.0, 1.0, 1.0, 1, 20.0, 0.001))
        return abs(b + 7.2084) < 1e-3, f"bracket {b:.4f}"

    for name, fn in (("special_functions", sf), ("curve_geometry", geom), ("dirac_core", dirac),
                     ("band_structure", bands), ("boundary_integral", bie),
                     ("schrodinger_reference", schr), ("bound_state_certifier", cert)):
        check(name, fn)
    return rows


# -- entry ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="shellspec", description="Dirac delta-shell spectra on curves")
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", help="JSON job config")
    ap.add_argument("--out", help="directory for result files")
    ap.add_argument("--threads", type=int, help="worker threads (default: SHELLSPEC_THREADS or 1)")
    ap.add_argument("--tol", type=float, help="truncation / root tolerance")
    for k in ("eta", "tau", "lam", "mass", "c"):
        ap.add_argument(f"--{k}", type=float)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol must be positive")
        over = {"numerics": {"tol": args.tol},
                "params": {"eta": args.eta, "tau": args.tau, "lambda": args.lam,
                           "mass": args.mass, "c": args.c}}
        cfg = load_config(args.config, args.command, over)
        workers = threads_from(args.threads)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    cmd = cfg["command"]
    try:
        if cmd == "bands":
            files, summary = run_bands(cfg, args.out)
        elif cmd == "scan":
            files, summary = run_scan(cfg, args.out, workers)
        elif cmd == "certify":
            files, summary = run_certify(cfg, args.out)
        elif cmd == "nonrel":
            files, summary = run_nonrel(cfg, args.out)
        else:
            files, summary = run_selfcheck(cfg, args.out)
    except ValueError as e:              # includes ConfigError and violated preconditions
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ArithmeticError, np_linalg_error()) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC

    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            with open(d / name, "w", newline="") as fh:
                fh.write(text)
    if cmd == "selfcheck":
        for c in summary["checks"]:
            print(f"{'PASS' if c['ok'] else 'FAIL'}  {c['name']:<24} {c['detail']}")
        return EXIT_OK if summary["passed"] else EXIT_SELFCHECK
    print(json.dumps(summary))
    return EXIT_OK


def np_linalg_error():
    import numpy as np
    return np.linalg.LinAlgError
