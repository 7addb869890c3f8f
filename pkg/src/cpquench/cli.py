"""Command-line front end: ``cpquench {cp-sweep,validate,observables,static}``.

Parameters come from built-in defaults (the caption values of the reference
figures), then an optional ``key = value`` config file, then flags; later
sources win.  Every run writes ``<command>_manifest.json`` to the output
directory, also when it fails.

Exit codes: 0 success, 1 a validation check failed, 2 bad configuration,
3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy import integrate

from . import __version__
from . import contint, modesum
from .core import C_SI, EV, PhysicalConfig, derive_geometry, validity_report
from .errors import ConfigError, ConvergenceError, DivergenceError, DomainError, WindowError

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICS = 0, 1, 2, 3
FLOAT_FMT = "%.12e"

DEFAULTS = {
    "mu_si": 6.31e-30,
    "k0": 5.0e7,
    "z0": 1.001e-7,
    "z": 1.0e-7,
    "lambda": -1.0,
    "t_min": 0.0,
    "t_max": None,              # default 3 Rbar / c
    "points": 200,
    "delta_lc": 0.02,
    "cavity_L": 1.0e-6,
    "n_max": 12,
    "k_cutoff": None,
    "z_min": 1.0e-10,
    "z_max": 1.0e-4,
    "quench_duration": None,
    "ratio_threshold": 0.2,
    "out_dir": None,
    "svg": False,
}
_FLOAT_KEYS = {"mu_si", "k0", "z0", "z", "lambda", "t_min", "t_max", "delta_lc",
               "cavity_L", "k_cutoff", "z_min", "z_max", "quench_duration",
               "ratio_threshold"}
_INT_KEYS = {"points", "n_max"}
_BOOL_KEYS = {"svg"}


class _Failure(Exception):
    def __init__(self, code, message, files=()):
        super().__init__(message)
        self.code = code
        self.files = list(files)


# --------------------------------------------------------------------------
# configuration

def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "lam":
            key = "lambda"
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(key, value):
    if value is None or value == "" or (isinstance(value, str) and value.lower() == "none"):
        return None
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        if key in _BOOL_KEYS:
            if isinstance(value, bool):
                return value
            return str(value).lower() in ("1", "true", "yes", "on")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {key}: {value!r}") from exc
    return value


def resolve_config(args: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    if os.environ.get("CPQ_OUT_DIR"):
        merged["out_dir"] = os.environ["CPQ_OUT_DIR"]
    if args.config:
        merged.update(read_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            merged[key] = value
    resolved = {k: _coerce(k, v) for k, v in merged.items()}
    if resolved["out_dir"] is None:
        resolved["out_dir"] = "."
    if resolved["points"] is None or resolved["points"] < 2:
        raise ConfigError("points must be >= 2")
    return resolved


def physical_config(res: dict) -> PhysicalConfig:
    lam = res["lambda"]
    if lam not in (0.0, -1.0):
        raise ConfigError(f"lambda must be 0 or -1, got {lam!r}")
    return PhysicalConfig.on_axis(
        res["z0"], res["z"], mu_si=res["mu_si"], k0=res["k0"], lam=int(lam),
        delta_lc=res["delta_lc"], quench_duration=res["quench_duration"],
        ratio_threshold=res["ratio_threshold"])


def mode_grid(res: dict) -> modesum.ModeGrid:
    L = res["cavity_L"]
    if not (L > res["z"] and L > res["z0"]):
        raise ConfigError("cavity_L must exceed both atom-wall distances")
    return modesum.build_mode_grid(L, res["n_max"], res["k_cutoff"])


# --------------------------------------------------------------------------
# output

def atomic_write(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory and rename over the target."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return FLOAT_FMT % x


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def svg_plot(x, y, *, reference=None, xlabel="", ylabel="", title="",
             width=640, height=400) -> str:
    """Minimal line plot; NaN entries break the line.  ``reference`` draws a dashed level."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    finite = np.isfinite(y)
    pool = y[finite]
    if reference is not None:
        pool = np.append(pool, reference)
    if pool.size == 0:
        pool = np.array([0.0, 1.0])
    # clip the divergent light-cone spikes so that the rest of the curve stays readable
    lo, hi = np.percentile(pool, [2, 98]) if pool.size > 10 else (pool.min(), pool.max())
    if reference is not None:
        lo, hi = min(lo, reference), max(hi, reference)
    if hi == lo:
        hi, lo = hi + 1.0, lo - 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    ml, mr, mt, mb = 80, 20, 30, 50
    xmin, xmax = float(x.min()), float(x.max())
    if xmax == xmin:
        xmax = xmin + 1.0

    def px(v):
        return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr)

    def py(v):
        return mt + (hi - np.clip(v, lo, hi)) / (hi - lo) * (height - mt - mb)

    segments, cur = [], []
    for xi, yi in zip(x, y):
        if np.isfinite(yi):
            cur.append(f"{px(xi):.2f},{py(yi):.2f}")
        elif cur:
            segments.append(cur)
            cur = []
    if cur:
        segments.append(cur)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{width - ml - mr}" height="{height - mt - mb}" '
        'fill="none" stroke="black"/>',
    ]
    for seg in segments:
        parts.append(f'<polyline fill="none" stroke="#e07020" stroke-width="1.5" points="{" ".join(seg)}"/>')
    if reference is not None:
        yr = py(reference)
        parts.append(f'<line x1="{ml}" x2="{width - mr}" y1="{yr:.2f}" y2="{yr:.2f}" '
                     'stroke="#2060c0" stroke-dasharray="6,4"/>')
    parts += [
        f'<text x="{ml}" y="{height - 15}" font-size="12">{xmin:.3g}</text>',
        f'<text x="{width - mr}" y="{height - 15}" font-size="12" text-anchor="end">{xmax:.3g}</text>',
        f'<text x="{(ml + width - mr) / 2}" y="{height - 10}" font-size="13" text-anchor="middle">{xlabel}</text>',
        f'<text x="5" y="{mt + 10}" font-size="12">{hi:.3e}</text>',
        f'<text x="5" y="{height - mb}" font-size="12">{lo:.3e}</text>',
        f'<text x="15" y="{height / 2}" font-size="13" transform="rotate(-90 15 {height / 2})" '
        f'text-anchor="middle">{ylabel}</text>',
        f'<text x="{width / 2}" y="18" font-size="14" text-anchor="middle">{title}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


# --------------------------------------------------------------------------
# commands

def cmd_cp_sweep(res: dict, out: Path) -> tuple[list, dict]:
    cfg = physical_config(res)
    g = derive_geometry(cfg)
    t_max = res["t_max"] if res["t_max"] is not None else 3.0 * g.Rbar / C_SI
    curve = contint.sweep_cp(cfg, res["t_min"], t_max, res["points"])
    rows = [(s.t, s.ct_over_Rbar, s.energy, s.energy / EV, s.regime.value, s.method.value)
            for s in curve.samples]
    files = []
    path = out / "cp_sweep.csv"
    atomic_write(path, csv_text(["t_s", "ct_over_Rbar", "energy_J", "energy_eV", "regime", "method"], rows))
    files.append(path)
    if res["svg"]:
        y = np.where(curve.excluded, np.nan, curve.energy)
        svg = svg_plot([r[1] for r in rows], y, reference=curve.static_value,
                       xlabel="c t / Rbar", ylabel="E_CP (J)", title="Dynamical Casimir-Polder energy")
        spath = out / "cp_sweep.svg"
        atomic_write(spath, svg)
        files.append(spath)
    extra = {"static_energy_J": curve.static_value,
             "excluded_samples": int(np.sum(curve.excluded)),
             "validity": validity_report(cfg).as_dict()}
    return files, extra


def _check(passed, **info) -> dict:
    return {"passed": bool(passed), **info}


def validation_checks(res: dict, corrupt_sign: bool = False) -> dict:
    """Dual-path, stationarity, conservation and settling checks; see the README."""
    cfg = physical_config(res)
    g = derive_geometry(cfg)
    st = contint.static_cp(cfg)
    checks = {}

    # closed form against the quadrature oracle
    grid = np.concatenate([np.linspace(0.1, 0.9, 25), np.linspace(1.1, 3.0, 25)])
    worst, skipped, unconverged = 0.0, 0, 0
    t0 = time.perf_counter()
    for x in grid:
        t = float(x) * g.Rbar / C_SI
        try:
            cf = contint.cp_closed_form(t, cfg)
            orc, terms = contint.boundary_energy_oracle(t, cfg, strict=False, return_terms=True)
        except WindowError:
            skipped += 1
            continue
        unconverged += sum(not term.converged for term in terms)
        worst = max(worst, abs(cf - orc) / abs(st))
    if unconverged:
        raise _Failure(EXIT_NUMERICS, f"quadrature oracle did not converge on {unconverged} term(s)")
    checks["dual_path"] = _check(worst < 1e-6, max_deviation=worst, threshold=1e-6,
                                 points=int(grid.size - skipped),
                                 seconds=time.perf_counter() - t0)

    # nothing happens without a quench
    still = cfg.with_(r0=cfg.r)
    st_still = contint.static_cp(still)
    ts = np.linspace(0.0, 6.0, 301) * g.Rbar / C_SI
    dev = 0.0
    for t in ts:
        try:
            dev = max(dev, abs(contint.cp_closed_form(float(t), still) - st_still) / abs(st_still))
        except WindowError:
            continue
    mgrid = mode_grid(res)
    tt = np.linspace(0.0, 40.0, 100) / cfg.omega0
    mdev = 0.0
    for fn in (modesum.interaction_energy, modesum.atomic_energy, modesum.field_energy):
        v = np.asarray(fn(tt, still, mgrid))
        mdev = max(mdev, float(np.ptp(v) / np.max(np.abs(v))))
    checks["stationarity"] = _check(dev < 1e-8 and mdev < 1e-12, max_deviation=dev,
                                    mode_sum_max_deviation=mdev, threshold=1e-8,
                                    mode_sum_threshold=1e-12)

    # unitary evolution conserves the total energy
    tot = np.asarray(modesum.total_energy(tt, cfg, mgrid, flip_sign=corrupt_sign))
    drift = float(np.ptp(tot) / abs(np.mean(tot)))
    ref = modesum.total_energy_closed_form(cfg, mgrid)
    closed = float(np.max(np.abs(tot - ref)) / abs(ref))
    checks["conservation"] = _check(drift < 1e-12 and closed < 1e-12, max_deviation=drift,
                                    closed_form_deviation=closed, threshold=1e-12)

    # long-time behaviour
    period = 2 * math.pi / (cfg.k0 * g.Rbar)
    xs = np.linspace(20.0 - period, 20.0, 401)
    e = np.array([contint.cp_closed_form(float(x) * g.Rbar / C_SI, cfg) for x in xs])
    avg = float(integrate.simpson(e, x=xs) / period)
    cont_dev = abs(avg - st) / abs(st)
    tl = np.linspace(0.0, 2000.0, 4001) / cfg.omega0
    asym = modesum.asymptotic_values(cfg, mgrid)
    ea = float(np.mean(modesum.atomic_energy(tl, cfg, mgrid)))
    ef = float(np.mean(modesum.field_energy(tl, cfg, mgrid)))
    mode_dev = max(abs(ea - asym.E_A_inf) / abs(asym.E_A_inf), abs(ef - asym.E_F_inf) / abs(asym.E_F_inf))
    checks["asymptotic_settling"] = _check(cont_dev < 0.01 and mode_dev < 0.01,
                                           continuum_deviation=cont_dev,
                                           mode_sum_deviation=mode_dev, threshold=0.01)
    return checks


def cmd_validate(res: dict, out: Path, corrupt_sign: bool = False) -> tuple[list, dict]:
    checks = validation_checks(res, corrupt_sign)
    passed = all(c["passed"] for c in checks.values())
    report = {"passed": passed, "checks": checks}
    path = out / "validate_report.json"
    atomic_write(path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    for name, c in checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}")
    if not passed:
        failed = ", ".join(k for k, c in checks.items() if not c["passed"])
        raise _Failure(EXIT_VALIDATION, f"validation failed: {failed}", [path])
    return [path], {"passed": passed}


def cmd_observables(res: dict, out: Path) -> tuple[list, dict]:
    cfg = physical_config(res)
    grid = mode_grid(res)
    g = derive_geometry(cfg)
    t_max = res["t_max"] if res["t_max"] is not None else 3.0 * g.Rbar / C_SI
    ts = np.linspace(res["t_min"], t_max, res["points"])
    ei = modesum.interaction_energy(ts, cfg, grid)
    ea = modesum.atomic_energy(ts, cfg, grid)
    ef = modesum.field_energy(ts, cfg, grid)
    et = modesum.total_energy(ts, cfg, grid)
    rows = list(zip(ts, ei, ea, ef, et))
    path = out / "observables.csv"
    atomic_write(path, csv_text(["t_s", "E_I_J", "E_A_J", "E_F_J", "E_total_J"], rows))
    static = modesum.static_references(cfg, grid)
    asym = modesum.asymptotic_values(cfg, grid)
    work = modesum.quench_work(cfg, grid)
    total = modesum.total_energy_closed_form(cfg, grid)
    block = {
        "static_references": static.as_dict(),
        "asymptotic_values": asym.as_dict(),
        "total_energy_J": total,
        "quench_work": {**work, "cutoff_dependent": True},
        "asymptotic_minus_static": {
            "atomic": asym.E_A_inf - static.E_A_stat,
            "field": asym.E_F_inf - static.E_F_stat,
            "total": total - static.E_tot_stat,
            "cutoff_dependent": True,
        },
        "grid": {"L": grid.L, "n_max": grid.n_max, "modes": len(grid),
                 "k_max": grid.k_max, "k_cutoff": grid.k_cutoff},
    }
    jpath = out / "observables.json"
    atomic_write(jpath, json.dumps(block, indent=2, sort_keys=True) + "\n")
    return [path, jpath], {}


def cmd_static(res: dict, out: Path) -> tuple[list, dict]:
    base = physical_config(res)
    z_min, z_max = res["z_min"], res["z_max"]
    if not (0 < z_min < z_max):
        raise ConfigError("need 0 < z_min < z_max")
    zs = np.geomspace(z_min, z_max, res["points"])
    e = np.array([contint.static_cp(base.with_(r=(0.0, 0.0, float(z)), r0=(0.0, 0.0, float(z))))
                  for z in zs])
    slope = np.gradient(np.log(np.abs(e)), np.log(zs))
    rows = [(z, base.k0 * 2 * z, v, v / EV, s) for z, v, s in zip(zs, e, slope)]
    path = out / "static.csv"
    atomic_write(path, csv_text(["z_m", "chi0", "energy_J", "energy_eV", "loglog_slope"], rows))
    files = [path]
    if res["svg"]:
        spath = out / "static.svg"
        atomic_write(spath, svg_plot(np.log10(zs), slope, xlabel="log10 z (m)",
                                     ylabel="d ln|E| / d ln z", title="Static CP scaling"))
        files.append(spath)
    return files, {}


COMMANDS = {
    "cp-sweep": cmd_cp_sweep,
    "validate": cmd_validate,
    "observables": cmd_observables,
    "static": cmd_static,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value parameter file")
    common.add_argument("--mu-si", dest="mu_si", type=float, help="dipole moment (C m)")
    common.add_argument("--k0", type=float, help="transition wavenumber (1/m)")
    common.add_argument("--z0", type=float, help="initial atom-wall distance (m)")
    common.add_argument("--z", type=float, help="final atom-wall distance (m)")
    common.add_argument("--lambda", dest="lambda", type=float, help="0 (RWA) or -1")
    common.add_argument("--t-min", dest="t_min", type=float, help="first time (s)")
    common.add_argument("--t-max", dest="t_max", type=float, help="last time (s); default 3 Rbar/c")
    common.add_argument("--points", type=int, help="number of samples")
    common.add_argument("--delta-lc", dest="delta_lc", type=float, help="light-cone window half width / Rbar")
    common.add_argument("--cavity-L", dest="cavity_L", type=float, help="cavity side (m)")
    common.add_argument("--n-max", dest="n_max", type=int, help="largest mode index per axis")
    common.add_argument("--k-cutoff", dest="k_cutoff", type=float, help="smooth mode cutoff (1/m)")
    common.add_argument("--z-min", dest="z_min", type=float, help="static scan start (m)")
    common.add_argument("--z-max", dest="z_max", type=float, help="static scan end (m)")
    common.add_argument("--ratio-threshold", dest="ratio_threshold", type=float,
                        help="upper bound on both sudden-approximation ratios")
    common.add_argument("--quench-duration", dest="quench_duration", type=float,
                        help="duration of the position change (s), for the validity report")
    common.add_argument("--out-dir", dest="out_dir", help="output directory (default $CPQ_OUT_DIR or .)")
    common.add_argument("--svg", action="store_true", default=False, help="also write an SVG plot")
    parser = argparse.ArgumentParser(prog="cpquench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cp-sweep", parents=[common], help="time sweep of the boundary CP energy")
    v = sub.add_parser("validate", parents=[common], help="dual-path and invariant checks")
    v.add_argument("--self-test-corrupt-sign", dest="corrupt_sign", action="store_true",
                   help="flip one sign in the field energy to show the conservation check fails")
    sub.add_parser("observables", parents=[common], help="mode-sum energies and references")
    sub.add_parser("static", parents=[common], help="static CP energy against distance")
    return parser


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    manifest = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "code_version": __version__,
        "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "config": {},
        "outputs": [],
        "status": "error",
        "exit_code": EXIT_CONFIG,
    }
    out = Path(args.out_dir or os.environ.get("CPQ_OUT_DIR") or ".")
    code = EXIT_OK
    try:
        res = resolve_config(args)
        out = Path(res["out_dir"])
        manifest["config"] = {k: _jsonable(v) for k, v in res.items()}
        fn = COMMANDS[args.command]
        if args.command == "validate":
            files, extra = fn(res, out, corrupt_sign=args.corrupt_sign)
        else:
            files, extra = fn(res, out)
        manifest["outputs"] = [str(p) for p in files]
        manifest.update({k: _jsonable(v) if not isinstance(v, dict) else v for k, v in extra.items()})
        manifest["status"] = "ok"
    except _Failure as exc:
        code = exc.code
        manifest["error"] = str(exc)
        manifest["outputs"] = [str(p) for p in exc.files]
    except (ConfigError, DomainError) as exc:
        code = EXIT_CONFIG
        manifest["error"] = str(exc)
    except (ConvergenceError, DivergenceError, ArithmeticError) as exc:
        code = EXIT_NUMERICS
        manifest["error"] = str(exc)
    manifest["exit_code"] = code
    if code != EXIT_OK:
        manifest["status"] = "failed"
        print(f"cpquench {args.command}: {manifest.get('error')}", file=sys.stderr)
    mpath = out / f"{args.command.replace('-', '_')}_manifest.json"
    manifest["outputs"].append(str(mpath))
    try:
        atomic_write(mpath, json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    except OSError as exc:
        print(f"cpquench: could not write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
