"""Command-line front end ``lcspec``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.  Tables are CSV with ``%.16e`` numbers and LF line
endings; reports are JSON with sorted keys.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
DEFAULT_Z_GRID = ("0", "1", "0+1i", "-2+0.5i")
OMEGA_INPUT_TOL = 1e-6


class ConfigError(ValueError):
    """Malformed configuration or command-line input."""


# ------------------------------------------------------------------ emitters
def write_csv(header, rows, fh=None):
    """Write a header and numeric rows; returns the text when ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join("%.16e" % float(v) for v in row) + "\n")
    return buf.getvalue() if fh is None else None


def dump_json(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def emit_report(results, out=None, fmt="json"):
    """Write ``results`` (a table ``{"header", "rows"}`` or any JSON-able object)."""
    if isinstance(results, dict) and set(results) >= {"header", "rows"} and fmt == "csv":
        text = write_csv(results["header"], results["rows"])
    else:
        text = dump_json(results)
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    return text


# ------------------------------------------------------------------- config
@dataclass
class RunConfig:
    field: object
    ode_tol: float = 1e-10
    volterra_tol: float = 1e-13
    fit_tol: float = 1e-4
    X_inf: float | None = None
    z_grid: list = dc_field(default_factory=lambda: [complex(parse_complex(s)) for s in DEFAULT_Z_GRID])
    interval: tuple = (0.0, 50.0)
    omegas: list = dc_field(default_factory=lambda: [1 + 0j])
    h_spec: str = "gaussian(2,0.5)"
    h_path: str | None = None
    out: str | None = None
    fmt: str | None = None

    def scaled(self, factor):
        self.ode_tol *= factor
        self.volterra_tol *= factor
        self.fit_tol *= factor
        return self


def parse_complex(text):
    """``"1+0i"``, ``"-2+0.5i"``, ``"3"``, ``"i"`` (``j`` also accepted)."""
    s = str(text).strip().replace(" ", "").replace("I", "i").replace("j", "i")
    if s in ("i", "+i"):
        return 1j
    if s == "-i":
        return -1j
    s = re.sub(r"(?<![0-9.])i", "1i", s)
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def parse_interval(text):
    try:
        lo, hi = (float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"interval must be LO,HI, got {text!r}") from exc
    if not lo < hi:
        raise ConfigError("interval must satisfy LO < HI")
    return lo, hi


def load_config(path, args=None):
    from .coefficients import field_from_config

    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    field_cfg = raw.get("field", raw)
    try:
        fld = field_from_config(field_cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid field description: {exc}") from exc
    cfg = RunConfig(fld)
    tol = raw.get("tolerances", {})
    for key in ("ode_tol", "volterra_tol", "fit_tol"):
        if key in tol:
            setattr(cfg, key, float(tol[key]))
    if raw.get("X_inf") is not None:
        cfg.X_inf = float(raw["X_inf"])
    grids = raw.get("grids", {})
    if "z" in grids:
        cfg.z_grid = [parse_complex(v) for v in grids["z"]]
    if "interval" in grids:
        iv = grids["interval"]
        cfg.interval = parse_interval(iv if isinstance(iv, str) else ",".join(str(v) for v in iv))
    if "omega" in grids:
        cfg.omegas = [parse_complex(v) for v in grids["omega"]]
    out = raw.get("output", {})
    cfg.out, cfg.fmt = out.get("path"), out.get("format")
    if args is not None:
        _apply_flags(cfg, args)
    _validate(cfg)
    return cfg


def _apply_flags(cfg, args):
    from .connection import connect
    from .extensions import omega_from_t

    if args.z:
        cfg.z_grid = [parse_complex(v) for v in args.z]
    if args.interval:
        cfg.interval = parse_interval(args.interval)
    if args.omega:
        cfg.omegas = [parse_complex(v) for v in args.omega]
    if args.t is not None:
        t = math.inf if args.t.strip().lower() in ("inf", "infinity") else float(args.t)
        cfg.omegas = [omega_from_t(t, connect(cfg.field, 0.0, tol=cfg.ode_tol, X_inf=cfg.X_inf)).omega]
    if args.out:
        cfg.out = args.out
    if args.format:
        cfg.fmt = args.format
    if args.h:
        cfg.h_path = args.h
    if args.h_builtin:
        cfg.h_spec = args.h_builtin
    if args.tol_scale is not None:
        if not args.tol_scale > 0:
            raise ConfigError("--tol-scale must be positive")
        cfg.scaled(args.tol_scale)


def _validate(cfg):
    if min(cfg.ode_tol, cfg.volterra_tol, cfg.fit_tol) <= 0:
        raise ConfigError("tolerances must be positive")
    if cfg.X_inf is not None and not cfg.X_inf > cfg.field.x0:
        raise ConfigError("X_inf must exceed x0")
    # Decimal input such as 0.7071+0.7071i is normalised; anything farther from the circle is rejected.
    for k, w in enumerate(cfg.omegas):
        if abs(abs(w) - 1.0) > OMEGA_INPUT_TOL:
            raise ConfigError(f"|omega| must be 1, got {w}")
        cfg.omegas[k] = w / abs(w)
    if cfg.fmt not in (None, "csv", "json"):
        raise ConfigError("format must be csv or json")


def workers():
    """Thread cap from ``LCSPEC_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LCSPEC_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def builtin_h(cfg, grid):
    from .quasiresolvent import SampledFunction

    if cfg.h_path:
        try:
            with open(cfg.h_path) as fh:
                return SampledFunction.from_csv(grid, fh.read())
        except (OSError, ValueError, IndexError) as exc:
            raise ConfigError(f"cannot read h from {cfg.h_path!r}: {exc}") from exc
    m = re.fullmatch(r"\s*gaussian\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)\s*", cfg.h_spec)
    if not m:
        raise ConfigError(f"unknown builtin h {cfg.h_spec!r}; expected gaussian(center,width)")
    center, width = float(m.group(1)), float(m.group(2))
    if not width > 0:
        raise ConfigError("gaussian width must be positive")
    return SampledFunction.gaussian(grid, center, width)


# ---------------------------------------------------------------- commands
def cmd_classify(cfg):
    from .coefficients import check_lc_conditions

    return check_lc_conditions(cfg.field).to_dict()


def cmd_jost(cfg):
    from .jost import jost_solution

    z = cfg.z_grid[0]
    sol = jost_solution(cfg.field, z, X_inf=cfg.X_inf, tol=cfg.volterra_tol)
    if cfg.fmt == "json":
        return {"sidecar": sol.sidecar(), "header": ["x", "re_f", "im_f", "re_pf", "im_pf"], "rows": _rows(sol.f)}
    text = sol.to_csv()
    if cfg.out:
        with open(cfg.out + ".json", "w", newline="\n") as fh:
            fh.write(json.dumps(sol.sidecar(), sort_keys=True) + "\n")
    return text


def _rows(sol):
    return np.column_stack(
        [sol.nodes, sol.values.real, sol.values.imag, sol.quasiderivs.real, sol.quasiderivs.imag]
    ).tolist()


def cmd_connect(cfg):
    from .connection import TABLE_HEADER, connect

    coeffs = pmap(lambda z: connect(cfg.field, z, tol=cfg.ode_tol, X_inf=cfg.X_inf), cfg.z_grid)
    return {"header": TABLE_HEADER, "rows": [c.as_row() for c in coeffs]}


def cmd_eigs(cfg):
    from .extensions import eigenvalues

    reps = pmap(lambda w: eigenvalues(cfg.field, w, cfg.interval, X_inf=cfg.X_inf).to_dict(), cfg.omegas)
    return reps[0] if len(reps) == 1 else {"reports": reps}


def cmd_resolve(cfg):
    from .extensions import resolvent_apply, s_fit
    from .quasiresolvent import default_grid, residual_norm

    z, w = cfg.z_grid[0], cfg.omegas[0]
    grid = default_grid(cfg.field, z, cfg.X_inf)
    h = builtin_h(cfg, grid)
    u = resolvent_apply(cfg.field, w, z, h, tol=cfg.ode_tol, X_inf=cfg.X_inf)
    b = s_fit(cfg.field, u)
    side = {
        "z": z, "omega": w, "residual": residual_norm(cfg.field, u, h),
        "s_plus": b.s_plus, "s_minus": b.s_minus, "condition_residual": b.condition_residual(w),
    }
    sys.stderr.write(f"resolve: residual {side['residual']:.3e}, |s+ - omega s-| rel {side['condition_residual']:.3e}\n")
    if cfg.fmt == "json":
        return {"sidecar": side, "header": ["x", "re_u", "im_u", "re_pu", "im_pu"], "rows": _rows(u)}
    if cfg.out:
        with open(cfg.out + ".json", "w", newline="\n") as fh:
            fh.write(dump_json(side))
    return u.to_csv()


def cmd_transform(cfg):
    from .extensions import spectral_transform
    from .quasiresolvent import default_grid

    grid = default_grid(cfg.field, 0.0, cfg.X_inf)
    h = builtin_h(cfg, grid)
    rows = []
    for w in cfg.omegas:
        vals = pmap(lambda z: spectral_transform(cfg.field, w, z, h, tol=cfg.ode_tol, X_inf=cfg.X_inf), cfg.z_grid)
        rows += [[w.real, w.imag, z.real, z.imag, F.real, F.imag] for z, F in zip(cfg.z_grid, vals)]
    return {"header": ["re_omega", "im_omega", "re_z", "im_z", "re_F", "im_F"], "rows": rows}


VERIFY_TAGS = ("Wro", "Jo1B", "LC2p", "qres1", "ABS", "EX1")


def verify_suite(cfg):
    """Run the identity checks; returns a list of ``{tag, passed, value, threshold, detail}``."""
    from .connection import connect, verify_lc2p
    from .extensions import omega_from_t, s_functionals, t_from_omega
    from .jost import jost_solution
    from .odecore import regular_pair, wronskian
    from .quasiresolvent import boundary_form, default_grid, quasiresolvent_apply, residual_norm

    fld, X = cfg.field, cfg.X_inf
    out = []

    def record(tag, value, threshold, detail):
        out.append({"tag": tag, "passed": bool(value <= threshold), "value": float(value),
                    "threshold": threshold, "detail": detail})

    coeffs = [connect(fld, z, tol=cfg.ode_tol, X_inf=X) for z in cfg.z_grid]
    record("Wro", max(c.wro_residual for c in coeffs), 1e-6,
           "max |2i(s+ t- - s- t+) - 1| over the z grid")

    gaps = []
    for z in cfg.z_grid:
        f = jost_solution(fld, z, X_inf=X, tol=cfg.volterra_tol).f
        fb = f.conj() if z.imag == 0 else jost_solution(fld, z.conjugate(), X_inf=X, tol=cfg.volterra_tol).f.conj()
        gaps.append(float(np.max(np.abs(wronskian(f, fb) - 2j))))
    record("Jo1B", max(gaps), 1e-6, "max |{f_z, conj f_zbar} - 2i| over nodes and z")

    lhs, rhs, gap = verify_lc2p(fld, 1j, X, cfg.ode_tol)
    record("LC2p", gap / abs(lhs), 1e-4, f"z = i: lhs {lhs:.12g}, rhs {rhs:.12g}")

    grid = default_grid(fld, 1j, X)
    h = builtin_h(cfg, grid)
    res = [residual_norm(fld, quasiresolvent_apply(fld, z, h, cfg.ode_tol), h) for z in (0.0, 1j)]
    record("qres1", max(res), 1e-6, "||(H - z) R(z) h - h|| / ||h||, z in {0, i}")

    phi, theta = regular_pair(fld, 1j, tol=cfg.ode_tol, grid=grid)
    r = quasiresolvent_apply(fld, 1j, h, cfg.ode_tol, pair=(phi, theta))
    c = connect(fld, 1j, tol=cfg.ode_tol, X_inf=X)
    sr = s_functionals(fld, 0.0, 1j, h, X, cfg.ode_tol)
    table = {id(phi): (c.sigma_plus, c.sigma_minus), id(theta): (c.tau_plus, c.tau_minus),
             id(r): (sr.s_plus, sr.s_minus)}
    worst = 0.0
    for u in (phi, theta, r):
        for v in (phi, theta, r):
            worst = max(worst, boundary_form(fld, u, v, lambda w: table[id(w)]).gap)
    record("ABS", worst, 1e-4, "max |lim p(u v' - u' v) + 2i(s+ s+ - s- s-)| over phi_i, theta_i, R(i)h")

    c0 = connect(fld, 0.0, tol=cfg.ode_tol, X_inf=X)
    unit, trip = 0.0, 0.0
    for t in (-10.0, -1.0, 0.0, 1.0, 10.0, math.inf):
        w = omega_from_t(t, c0)
        unit = max(unit, abs(abs(w.omega) - 1.0))
        back = t_from_omega(w, c0)
        if math.isfinite(t):
            trip = max(trip, abs(back - t) / max(1.0, abs(t)))
        elif math.isfinite(back):
            trip = max(trip, 1.0)
    record("EX1", max(unit / 1e-10, trip / 1e-8), 1.0, f"||omega| - 1| = {unit:.2e}, round trip {trip:.2e} (scaled)")
    return out


def cmd_verify(cfg):
    t0 = time.perf_counter()
    checks = verify_suite(cfg)
    for chk in checks:
        state = "PASS" if chk["passed"] else "FAIL"
        sys.stderr.write(f"{chk['tag']:<6} {state}  {chk['value']:.3e} <= {chk['threshold']:.1e}  {chk['detail']}\n")
    return {"checks": checks, "passed": all(c["passed"] for c in checks), "seconds": time.perf_counter() - t0}


COMMANDS = {
    "classify": cmd_classify, "jost": cmd_jost, "connect": cmd_connect, "eigs": cmd_eigs,
    "resolve": cmd_resolve, "transform": cmd_transform, "verify": cmd_verify,
}
TABLE_COMMANDS = ("jost", "connect", "resolve", "transform")


def build_parser():
    ap = argparse.ArgumentParser(prog="lcspec", description="Spectral computations for limit-circle Sturm-Liouville operators.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON field or run configuration")
    ap.add_argument("--omega", action="append", help="boundary parameter RE+IMi (repeatable)")
    ap.add_argument("--t", help="real parameter converted to omega (or 'inf')")
    ap.add_argument("--interval", help="eigenvalue window LO,HI")
    ap.add_argument("--z", action="append", help="spectral parameter RE+IMi (repeatable)")
    ap.add_argument("--out", help="output path (stdout when omitted)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--tol-scale", type=float, dest="tol_scale", help="multiply all tolerances")
    ap.add_argument("--h", help="CSV with columns x, Re h, Im h")
    ap.add_argument("--h-builtin", dest="h_builtin", help="gaussian(center,width)")
    return ap


def run(command, cfg):
    """Execute one subcommand; returns ``(exit_code, payload)``."""
    from .errors import LCSpecError

    try:
        payload = COMMANDS[command](cfg)
    except ConfigError:
        raise
    except (LCSpecError, FloatingPointError, ZeroDivisionError, ArithmeticError) as exc:
        sys.stderr.write(f"lcspec {command}: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC, None
    if command == "verify" and not payload["passed"]:
        return EXIT_VERIFY, payload
    return EXIT_OK, payload


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        code, payload = run(args.command, cfg)
    except ConfigError as exc:
        sys.stderr.write(f"lcspec: configuration error: {exc}\n")
        return EXIT_CONFIG
    if payload is None:
        return code
    fmt = cfg.fmt or ("csv" if args.command in TABLE_COMMANDS else "json")
    try:
        if isinstance(payload, str):
            if cfg.out:
                with open(cfg.out, "w", newline="\n") as fh:
                    fh.write(payload)
            else:
                sys.stdout.write(payload)
        else:
            emit_report(payload, cfg.out, fmt)
    except OSError as exc:
        sys.stderr.write(f"lcspec: cannot write output: {exc}\n")
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
