"""Command-line front end: ``steklov-rev <subcommand> [options]``.

Results go to stdout (or ``--output``) as JSON or CSV with 17 significant
digits.  Errors are printed to stderr as one JSON line
``{"error": ..., "flag": ..., "message": ...}``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, experiments
from .annulus import Condition, mixed_eigenvalue as annulus_eigenvalue
from .emit import to_csv, to_json, write_text
from .errors import DomainError, NumericalError, SteklovError
from .modes import multiplicity
from .profiles import HalfProfile, degenerate_profile, load_profile
from .solver import DEFAULT_N, MIN_N, mixed_eigenvalue, steklov_spectrum

EXIT_OK, EXIT_OTHER, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULTS = {
    "format": "json", "output": None, "human": False, "N": DEFAULT_N, "K": 2, "k_max": 4,
    "condition": "dirichlet", "i": 1, "L_min": 0.1, "L_max": 6.0, "points": 60, "L_grid": None,
    "outdir": None, "m": None, "delta": 0.1, "profile": None, "n": None, "L": None, "R": None,
}


class UsageError(Exception):
    def __init__(self, message: str, flag: str | None = None):
        super().__init__(message)
        self.flag = flag


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    # defaults are None so that config-file values can fill the gaps
    p.add_argument("--n", type=int, help="dimension n >= 3")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--config", help="JSON file with option values (flags take precedence)")
    p.add_argument("--human", action="store_true", default=None, help="round numbers to 6 digits")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steklov-rev", description="Steklov spectra of hypersurfaces of revolution.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("spectrum", help="first K eigenvalues of a profile")
    _common(p)
    p.add_argument("--profile", help="profile spec JSON file")
    p.add_argument("-K", "--K", type=int, dest="K")
    p.add_argument("--N", type=int)

    p = sub.add_parser("mixed", help="per-mode mixed eigenvalues on half a profile")
    _common(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--profile", help="symmetric profile spec JSON file")
    src.add_argument("--R", type=float, help="annulus radius; uses h = 1 + r on [0, R - 1]")
    p.add_argument("--condition", choices=("dirichlet", "neumann"))
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--N", type=int)

    p = sub.add_parser("bound", help="closed-form eigenvalue bounds")
    _common(p)
    p.add_argument("kind", choices=("sigma1", "sigma2-m1", "m1plus1", "m1plus1-global"))
    p.add_argument("--L", type=float, help="meridian length (inf allowed)")

    p = sub.add_parser("critical-length", help="critical lengths")
    _common(p)
    p.add_argument("which", choices=("L1", "L2", "Li-star", "appendix"))
    p.add_argument("--i", type=int)

    p = sub.add_parser("stability", help="stability constants and gaps")
    _common(p)
    p.add_argument("which", choices=("constants", "gap"))
    p.add_argument("--L", type=float)
    p.add_argument("--m", type=float, help="plateau height; selects the plateau gap")
    p.add_argument("--delta", type=float, help="plateau smoothing width")
    p.add_argument("--N", type=int)

    p = sub.add_parser("verify", help="run a numerical experiment")
    _common(p)
    p.add_argument("experiment", choices=experiments.EXPERIMENTS)
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("-K", "--K", type=int, dest="K")
    p.add_argument("--outdir", help="also write CSV and JSON files here")

    p = sub.add_parser("figure", help="emit figure data")
    _common(p)
    p.add_argument("figure", choices=experiments.FIGURES)
    p.add_argument("--L-min", type=float, dest="L_min")
    p.add_argument("--L-max", type=float, dest="L_max")
    p.add_argument("--points", type=int)
    p.add_argument("--L-grid", dest="L_grid", help="comma-separated lengths (overrides the range)")
    p.add_argument("--outdir")
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    """Merge flags > config file > defaults."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}", "--config") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object", "--config")
    opts = {}
    for key, value in vars(args).items():
        if key == "config":
            continue
        if value is None:
            value = cfg.get(key, DEFAULTS.get(key))
        opts[key] = value
    return opts


def _require(opts: dict, key: str, flag: str):
    if opts.get(key) is None:
        raise UsageError(f"{flag} is required for '{opts['command']}'", flag)
    return opts[key]


def _validate(opts: dict) -> None:
    n = _require(opts, "n", "--n")
    if isinstance(n, bool) or int(n) != n or n < 3:
        raise UsageError(f"--n must be an integer >= 3, got {n!r}", "--n")
    if opts.get("L") is not None:
        L = float(opts["L"])
        if math.isnan(L) or L <= 0:
            raise UsageError(f"--L must be positive, got {opts['L']!r}", "--L")
    if "N" in opts and (int(opts["N"]) != opts["N"] or opts["N"] < MIN_N):
        raise UsageError(f"--N must be an integer >= {MIN_N}, got {opts['N']!r}", "--N")
    if "K" in opts and opts["K"] < 1:
        raise UsageError(f"-K must be >= 1, got {opts['K']!r}", "-K")
    if "k_max" in opts and opts["k_max"] < 0:
        raise UsageError(f"--k-max must be >= 0, got {opts['k_max']!r}", "--k-max")
    if "i" in opts and opts["i"] < 1:
        raise UsageError(f"--i must be >= 1, got {opts['i']!r}", "--i")
    if opts.get("R") is not None and not opts["R"] > 1:
        raise UsageError(f"--R must exceed 1, got {opts['R']!r}", "--R")


# --------------------------------------------------------------------------
# subcommands; each returns (json-ready dict, csv rows)


def _load(path):
    try:
        return load_profile(path)
    except DomainError as exc:
        raise UsageError(str(exc), "--profile") from None


def _cmd_spectrum(o):
    prof, spec = _load(_require(o, "profile", "--profile"))
    s = steklov_spectrum(prof, o["n"], o["K"], o["N"])
    rows = [{"index": j, "sigma": v, "mode": k, "parity": par}
            for j, (v, (k, par)) in enumerate(zip(s.values(), s.labels()))]
    return {"command": "spectrum", "n": o["n"], "N": o["N"], "K": o["K"], "profile": spec,
            "k_last": s.meta.get("k_last"), "values": [r["sigma"] for r in rows], "entries": rows}, rows


def _cmd_mixed(o):
    cond = Condition.parse(o["condition"])
    n = o["n"]
    if o.get("R") is not None:
        R = float(o["R"])
        prof, spec = degenerate_profile(2.0 * (R - 1.0)), {"kind": "degenerate", "L": 2.0 * (R - 1.0)}
    else:
        prof, spec = _load(_require(o, "profile", "--profile or --R"))
        R = None
    if not prof.symmetric:
        raise UsageError("mixed problems need a symmetric profile", "--profile")
    hp = HalfProfile(prof, cond)
    rows = []
    for k in range(o["k_max"] + 1):
        row = {"k": k, "mult": multiplicity(n, k), "sigma": mixed_eigenvalue(hp, n, k, o["N"])}
        if R is not None:
            row["closed_form"] = annulus_eigenvalue(n, R, k, cond)
        rows.append(row)
    return {"command": "mixed", "n": n, "N": o["N"], "condition": cond.value, "profile": spec,
            "modes": rows}, rows


def _cmd_bound(o):
    n, kind = o["n"], o["kind"]
    if kind == "m1plus1-global":
        bv = bounds.bound_m1_plus_1_global(n)
        L = None
    else:
        L = float(_require(o, "L", "--L"))
        fn = {"sigma1": bounds.bound_sigma1, "sigma2-m1": bounds.bound_sigma2_to_m1,
              "m1plus1": bounds.bound_m1_plus_1}[kind]
        bv = fn(n, L)
    rec = {"command": "bound", "kind": kind, "n": n, "L": L, "value": bv.value, "branch": bv.label, "R": bv.R}
    return rec, [rec]


def _cmd_critical_length(o):
    n, which = o["n"], o["which"]
    rec = {"command": "critical-length", "which": which, "n": n}
    if which == "L1":
        cl, bn = bounds.critical_length_L1(n)
        rec.update(cl.to_dict())
        rec["B_n"] = bn.value
        rec["upper_bracket_bound"] = bounds.l1_upper_bound(n)
    elif which == "L2":
        rec.update(bounds.critical_length_L2(n).to_dict())
    elif which == "Li-star":
        rec.update(bounds.critical_length_Li_star(n, o["i"]).to_dict())
        rec["closed_form_bound"] = bounds.li_star_upper_bound(n, o["i"])
        rec["k_i"] = bounds.k_sequence(n, o["i"])[-1]
    else:
        cd, cn, branch = bounds.appendix_comparator(n)
        rec.update({"L_D": cd.L, "L_N": cn.L, "branch": branch,
                    "residual_D": cd.residual, "residual_N": cn.residual})
    flat = {k: v for k, v in rec.items() if not isinstance(v, (list, dict))}
    return rec, [flat]


def _cmd_stability(o):
    n = o["n"]
    if o["which"] == "constants":
        rec = {"command": "stability", "which": "constants", **bounds.stability_constants(n).to_dict()}
        return rec, [rec]
    L = float(_require(o, "L", "--L"))
    if o.get("m") is None:
        rec = {"command": "stability", "which": "gap", "n": n, "L": L, "C_n_L": bounds.stability_gap_CnL(n, L)}
    else:
        rec = {"command": "stability", "which": "gap", "n": n, "L": L, "m": o["m"], "delta": o["delta"],
               "N": o["N"], "C_n_L_m": bounds.stability_gap_CnLm(n, L, o["m"], o["delta"], o["N"])}
    return rec, [rec]


def _report_output(rep, o):
    if o.get("outdir"):
        rep.write(o["outdir"])
    return rep.to_dict(), rep.rows


def _cmd_verify(o):
    L = 2.0 if o.get("L") is None else float(o["L"])
    K = o["K"] if o.get("K") is not None else 5
    rep = experiments.run_experiment(o["experiment"], o["n"], L=L, N=o["N"], K=K)
    return _report_output(rep, o)


def _cmd_figure(o):
    if o.get("L_grid"):
        try:
            grid = [float(x) for x in str(o["L_grid"]).split(",") if x.strip()]
        except ValueError:
            raise UsageError("--L-grid must be a comma-separated list of numbers", "--L-grid") from None
    else:
        if not 0 < o["L_min"] < o["L_max"]:
            raise UsageError("need 0 < --L-min < --L-max", "--L-min")
        if o["points"] < 2:
            raise UsageError("--points must be >= 2", "--points")
        grid = np.linspace(o["L_min"], o["L_max"], o["points"]).tolist()
    rep = experiments.figure_data(o["figure"], o["n"], grid)
    return _report_output(rep, o)


COMMANDS = {
    "spectrum": _cmd_spectrum, "mixed": _cmd_mixed, "bound": _cmd_bound,
    "critical-length": _cmd_critical_length, "stability": _cmd_stability,
    "verify": _cmd_verify, "figure": _cmd_figure,
}


def _error(kind: str, message: str, flag: str | None = None) -> str:
    return json.dumps({"error": kind, "flag": flag, "message": message}, sort_keys=True)


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, dispatch, print the result; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        opts = _resolve(args)
        _validate(opts)
        record, rows = COMMANDS[opts["command"]](opts)
        digits = 6 if opts.get("human") else 17
        text = to_json(record, digits=digits) if opts["format"] == "json" else to_csv(rows, digits=digits)
        if opts.get("output"):
            write_text(opts["output"], text)
        else:
            stdout.write(text)
        return EXIT_OK
    except UsageError as exc:
        print(_error("UsageError", str(exc), exc.flag), file=stderr)
        return EXIT_INVALID
    except DomainError as exc:
        print(_error(type(exc).__name__, str(exc)), file=stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(_error(type(exc).__name__, str(exc)), file=stderr)
        return EXIT_NUMERICAL
    except SteklovError as exc:  # pragma: no cover - every subclass is handled above
        print(_error(type(exc).__name__, str(exc)), file=stderr)
        return EXIT_OTHER


def main() -> None:
    sys.exit(run())
