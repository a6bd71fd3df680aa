"""Command-line front end: ``xychain <command> [options]``.

Every output starts with a ``#`` header carrying the version, parameters and
tolerances, followed by CSV (or a JSON document with ``--format json``).
Numbers are written with 12 significant digits.  Errors go to stderr as one
``error category=<name> message=<text>`` line with a category-specific exit
status.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import acceptance
from . import criticality as crit
from .errors import XYChainError
from .pair_state import (assemble_rho, concurrence_closed, concurrence_wootters,
                         density_matrix_elements)
from .spectrum import ChainParams, correlator_table

EXIT_USAGE = 2
EXIT_IO = 6
EXIT_VERIFY = 7
RANGE_HELP = "a:b:step grid, b included when within half a step; a bare number is one point"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x) + 0.0:.12g}"


def parse_range(text: str) -> list[float]:
    """``a:b:step`` inclusive of ``b`` within half a step; a bare number is one point."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"malformed range {text!r}; expected a:b:step") from None
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise UsageError(f"malformed range {text!r}; expected a:b:step")
    a, b, step = values
    if not (step > 0 and b >= a and all(math.isfinite(v) for v in values)):
        raise UsageError(f"range {text!r} needs step > 0 and b >= a")
    count = int(math.floor((b - a) / step + 0.5)) + 1
    return [round(a + k * step, 12) for k in range(count)]


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    config = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        config[key.replace("-", "_")] = value
    return config


class Output:
    def __init__(self, args, command: str, params: dict):
        self.args = args
        tol = args.tol
        self.header = {"version": __version__, "command": command, **params,
                       "tolerances": {"threshold": tol.threshold, "xtol": tol.xtol,
                                      "field_step": tol.field_step, "T_points": tol.T_points}}

    def emit(self, columns, rows, extra=None):
        if self.args.format == "json":
            doc = {"header": self.header, "columns": list(columns),
                   "rows": [[_jsonable(v) for v in row] for row in rows]}
            if extra:
                doc.update(extra)
            text = json.dumps(doc, indent=1) + "\n"
        else:
            head = " ".join(f"{k}={_header_value(v)}" for k, v in self.header.items())
            lines = [f"# xychain {head}"]
            if extra:
                lines += [f"# {k}={_header_value(v)}" for k, v in extra.items()]
            lines.append(",".join(columns))
            lines += [",".join(fmt(v) for v in row) for row in rows]
            text = "\n".join(lines) + "\n"
        if self.args.out:
            try:
                Path(self.args.out).write_text(text)
            except OSError as exc:
                raise OSError(f"cannot write {self.args.out}: {exc.strerror or exc}") from exc
        else:
            sys.stdout.write(text)


def _header_value(v):
    if isinstance(v, dict):
        return ";".join(f"{k}:{_header_value(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(fmt(x) for x in v) + "]"
    return fmt(v) if not isinstance(v, str) else v


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _grid_summary(grid):
    return f"{fmt(grid[0])}..{fmt(grid[-1])} ({len(grid)} pts)"


def cmd_fn_table(args):
    params = ChainParams(J=args.J, h=args.h, T=args.T)
    table = correlator_table(args.n_max, params)
    out = Output(args, "fn-table", {"J": args.J, "h": args.h, "T": args.T, "n_max": args.n_max,
                                    "quadrature_points": table.quadrature_points})
    out.emit(["n", "f_n"], [(n, v) for n, v in enumerate(table.f)])


def cmd_concurrence(args):
    params = ChainParams(J=args.J, h=args.h, T=args.T)
    el = density_matrix_elements(args.m, correlator_table(args.m, params))
    closed = concurrence_closed(el)
    wootters = concurrence_wootters(assemble_rho(el))
    out = Output(args, "concurrence", {"J": args.J, "h": args.h, "T": args.T, "m": args.m})
    out.emit(["m", "h", "T", "C", "W", "C_wootters", "x_plus", "y_plus", "y_minus", "x_minus", "z"],
             [(args.m, args.h, args.T, closed.value, closed.witness, wootters.value,
               el.x_plus, el.y_plus, el.y_minus, el.x_minus, el.z)])


def cmd_critical_field(args):
    cp = crit.entangled_field(args.m, args.J, args.tol)
    k = (args.m - 1) ** 2
    out = Output(args, "critical-field", {"J": args.J, "m": args.m})
    out.emit(["m", "h_c_E", "bracket_lo", "bracket_hi", "W", "proposed_relation"],
             [(args.m, cp.location, cp.bracket[0], cp.bracket[1], cp.residual_witness,
               k / (k + 1) * args.J)])


def cmd_critical_temps(args):
    roots = crit.critical_temperatures(args.m, args.h, args.J, args.tol)
    out = Output(args, "critical-temps", {"J": args.J, "m": args.m, "h": args.h})
    out.emit(["kind", "T_c", "bracket_lo", "bracket_hi", "W"],
             [(r.kind, r.location, r.bracket[0], r.bracket[1], r.residual_witness) for r in roots])


def cmd_tc_max(args):
    peak = crit.tc_max(args.m, args.J, tol=args.tol)
    out = Output(args, "tc-max", {"J": args.J, "m": args.m})
    out.emit(["m", "h_star", "T_c_star"], [(args.m, peak.h_star, peak.tc_star)])


def _sweep_rows(args, command):
    rows = crit.sweep(args.m, args.h_range, args.T_range, args.J, workers=args.threads)
    out = Output(args, command, {"J": args.J, "m": args.m, "h": _grid_summary(args.h_range),
                                 "T": _grid_summary(args.T_range)})
    out.emit(["h", "T", "m", "C", "W", "status"],
             [(r.h, r.T, r.m, r.C, r.W, r.error or "ok") for r in rows])


def cmd_sweep(args):
    _sweep_rows(args, "sweep")


def cmd_surface(args):
    _sweep_rows(args, "surface")


def cmd_phase_diagram(args):
    boundary = crit.phase_boundary(args.m, args.h_range, args.J, workers=args.threads,
                                   tol=args.tol)
    out = Output(args, "phase-diagram", {"J": args.J, "m": args.m, "h": _grid_summary(args.h_range)})
    out.emit(["h", "T_c", "branch"], [(p.h, p.T_c, p.branch) for p in boundary.points])


def cmd_ed(args):
    from .ed import ground_state, reduced_pair_rho, thermal_state
    from .ed.io import save_state

    params = ChainParams(J=args.J, h=args.h, T=0.0 if args.ground else args.T)
    i, j = args.pair
    if args.ground:
        source = ground_state(args.n, args.bc, params)
        meta = {"mode": "ground", "energy": source.energy, "sector_n_up": source.sector,
                "degenerate": source.degenerate, "residual": source.residual}
        if args.dump:
            save_state(source, args.dump)
    else:
        source = thermal_state(args.n, args.bc, params)
        meta = {"mode": "thermal", "log_partition": source.log_partition}
    rho = reduced_pair_rho(source, i, j)
    res = concurrence_wootters(rho)
    out = Output(args, "ed", {"J": args.J, "h": args.h, "T": params.T, "N": args.n,
                              "bc": args.bc, "pair": [i, j]})
    r = rho.matrix
    out.emit(["i", "j", "C", "x_plus", "y_plus", "y_minus", "x_minus", "z"],
             [(i, j, res.value, r[0, 0], r[1, 1], r[2, 2], r[3, 3], r[2, 1])], extra=meta)


def cmd_verify(args):
    numbers = args.only or None
    results = acceptance.run_all(numbers, workers=args.threads, report=None)
    out = Output(args, "verify", {})
    out.emit(["criterion", "name", "status", "seconds", "detail"],
             [(r.number, r.name.replace(",", ";"), "pass" if r.passed else "fail",
               round(r.seconds, 1), r.detail.replace(",", ";")) for r in results])
    return 0 if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--J", type=float, default=1.0, help="exchange coupling (> 0)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: $XYCHAIN_THREADS or all cores)")
    common.add_argument("--config", help="key = value file; command-line flags win")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--threshold", type=float, default=crit.ENTANGLED,
                        help="witness value above which a pair counts as entangled")
    common.add_argument("--xtol", type=float, default=crit.XTOL, help="root bracket width")
    common.add_argument("--field-step", type=float, default=crit.FIELD_STEP,
                        help="field scan spacing in units of J")
    common.add_argument("--T-points", type=int, default=crit.T_SCAN_POINTS,
                        help="log-spaced temperature scan points on [1e-4 J, 4 J]")

    parser = _Parser(
        prog="xychain", description=__doc__.split("\n")[0],
        epilog="Ranges use a:b:step and include b when it lies within half a step "
               "of the last grid point.")
    parser.add_argument("--version", action="version", version=f"xychain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    p = add("fn-table", cmd_fn_table, "Fourier coefficients f_0..f_n_max")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--n-max", type=int, default=4)

    p = add("concurrence", cmd_concurrence, "concurrence, witness and pair density matrix")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--T", type=float, required=True)

    p = add("critical-field", cmd_critical_field, "zero-temperature onset field h_c^E")
    p.add_argument("--m", type=int, required=True)

    p = add("critical-temps", cmd_critical_temps, "critical temperatures at one field")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=float, required=True)

    p = add("tc-max", cmd_tc_max, "field and value of the largest single-branch T_c")
    p.add_argument("--m", type=int, required=True)

    for name, func, text in (("sweep", cmd_sweep, "concurrence on an h x T grid"),
                             ("surface", cmd_surface, "concurrence surface C(h, T) grid")):
        p = add(name, func, text)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--h-range", type=parse_range, required=True, help=RANGE_HELP)
        p.add_argument("--T-range", type=parse_range, required=True, help=RANGE_HELP)

    p = add("phase-diagram", cmd_phase_diagram, "T-h boundary of the entangled region")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h-range", type=parse_range, required=True, help=RANGE_HELP)

    p = add("ed", cmd_ed, "finite-chain exact diagonalization of one pair")
    p.add_argument("--n", type=int, required=True, help="chain length (ground <= 24, thermal <= 12)")
    p.add_argument("--bc", choices=("open", "periodic"), default="periodic")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--ground", action="store_true", help="Lanczos ground state")
    mode.add_argument("--T", type=float, help="thermal state by full diagonalization")
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--pair", type=int, nargs=2, metavar=("I", "J"), required=True,
                   help="sites of the pair, counted from 0")
    p.add_argument("--dump", help="write the ground state as a binary vector file")

    p = add("verify", cmd_verify, "run every acceptance check and print a pass/fail table")
    p.add_argument("--only", type=int, nargs="+", help="run only these criteria")
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    config = read_config(known.config)
    command = next((a for a in argv if not a.startswith("-")), None)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    target = sub.choices.get(command)
    if target is None:
        return
    actions = {a.dest: a for a in target._actions}
    defaults = {}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"config key {key!r} is not an option of {command!r}")
        if action.type is not None:
            value = action.type(raw)
        elif action.nargs == 0:
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            value = raw
        # required options satisfied by the config file stop being required
        action.required = False
        defaults[key] = value
    target.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.threads is None:
            args.threads = crit.default_workers()
        if args.threads < 1:
            raise UsageError("--threads must be positive")
        args.tol = crit.Tolerances(args.threshold, args.xtol, args.field_step, args.T_points)
        status = args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except XYChainError as exc:
        return _fail(exc.category, str(exc), exc.exit_code)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)
    return status or 0


def _fail(category, message, code):
    sys.stderr.write(f"error category={category} message={json.dumps(message)}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
