"""Command-line front end: sweep tables, phase diagrams, and the verification suite.

Every command emits a table (CSV or JSON) with a metadata record and fixed,
documented columns; identical config + seed gives byte-identical output.
Exit codes: 0 success, 1 validation error, 2 computation failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from treephase import __version__, plots
from treephase.cliffords import GATE_ALPHA0, GATE_ALPHA1, enumerate_symplectic_group
from treephase.dense import run_equivalence_trials
from treephase.isingtree import IsingParams, boundary_field_scan, root_field
from treephase.markov import (
    CState,
    GateParams,
    NoiseParams,
    Protocol,
    build_transition_matrix,
    iterate,
)
from treephase.oracle import compute_w_exact, verify_purification_equivalence
from treephase.thresholds import (
    EPS_PHASE,
    boundary_protocol,
    multistep_scan,
    sweep_grid,
)
from treephase.treesim import recursion_prediction, simulate_tree

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COMPUTE = 2
EXIT_VERIFY = 3

#: Default RNG seed for every command, fixed so that default runs reproduce.
DEFAULT_SEED = 20260814

_PHASE_LETTER = {"quantum": "Q", "classical": "C", "noisy": "N", "unconverged": "?"}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the validation code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# option plumbing


def _add_common(sub, tol: float = 1e-13) -> None:
    sub.add_argument("--out", default=None, metavar="PATH",
                     help="output file (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--plot", choices=("none", "svg", "ascii"), default="none",
                     help="optional chart next to --out (or on stdout)")
    sub.add_argument("--config", default=None, metavar="PATH",
                     help="JSON file of flag defaults; explicit flags win")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--tol", type=float, default=tol,
                     help="fixed-point convergence tolerance")


def _add_gate(sub) -> None:
    sub.add_argument("--alpha", type=float, default=0.6)
    sub.add_argument("--beta", type=float, default=1.0 / 3.0)
    sub.add_argument("--gamma", type=float, default=0.5)


def _parse_grid(text: str, name: str = "--grid") -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"{name} must be 'lo:hi:n', got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"{name} must be 'lo:hi:n' with numeric fields, got {text!r}")
    if n < 1:
        raise ValueError(f"{name} needs at least one point, got n={n}")
    if n == 1 and lo != hi:
        raise ValueError(f"{name} with n=1 needs lo == hi, got {text!r}")
    return np.linspace(lo, hi, n)


def _parse_grid2(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"--grid must be 'plo:phi:np,rlo:rhi:nr', got {text!r}")
    return _parse_grid(parts[0], "--grid (p part)"), _parse_grid(parts[1], "--grid (r part)")


def _parse_depth(text: str):
    if text == "inf":
        return "inf"
    try:
        d = int(text)
    except ValueError:
        raise ValueError(f"--depth must be an integer or 'inf', got {text!r}")
    if d < 0:
        raise ValueError(f"--depth must be >= 0, got {d}")
    return d


def _gate(args) -> GateParams:
    return GateParams(args.alpha, args.beta, args.gamma)


# --------------------------------------------------------------------------
# output assembly


def _py(v):
    """Coerce one cell to a JSON-serializable Python scalar (or nested dict)."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _fmt(v) -> str:
    v = _py(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _csv_field(s: str) -> str:
    if any(ch in s for ch in ',"\n') or s != s.strip():
        return '"' + s.replace('"', '""') + '"'
    return s


def _config_echo(args) -> dict:
    echo = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "command"):
            continue
        echo[k] = _py(str(v) if isinstance(v, Path) else v)
    return echo


def _metadata(args, command: str) -> dict:
    return {
        "artifact": "treephase",
        "version": __version__,
        "command": command,
        "seed": getattr(args, "seed", DEFAULT_SEED),
        "config": _config_echo(args),
    }


def _table_text(args, command: str, columns, rows) -> str:
    meta = _metadata(args, command)
    if args.format == "json":
        payload = {
            "metadata": meta,
            "columns": list(columns),
            "rows": [[_py(v) for v in row] for row in rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    lines = [
        f"# {meta['artifact']} {meta['version']}",
        f"# command: {command}",
        f"# seed: {meta['seed']}",
        f"# config: {json.dumps(meta['config'], sort_keys=True)}",
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(_csv_field(_fmt(v)) for v in row))
    return "\n".join(lines) + "\n"


def _write(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")


def _write_plot(args, build_svg, build_ascii) -> None:
    if args.plot == "none":
        return
    text = build_svg() if args.plot == "svg" else build_ascii()
    if not text.endswith("\n"):
        text += "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        suffix = ".svg" if args.plot == "svg" else ".txt"
        Path(args.out).with_suffix(suffix).write_text(text, encoding="utf-8")


# --------------------------------------------------------------------------
# sweep commands


def cmd_mipt(args) -> int:
    g = _gate(args)
    ps = _parse_grid(args.grid)
    rows = []
    for p in ps:
        fp = iterate(Protocol.single(g, NoiseParams(float(p), args.r)), tol=args.tol)
        rows.append((float(p), fp.dist.p2, fp.dist.psigma))
    _write(args, _table_text(args, "mipt", ("p", "P2", "Psigma"), rows))
    series = {"P2": [r[1] for r in rows], "Psigma": [r[2] for r in rows]}
    title = "root c-state weights vs measurement rate"
    _write_plot(args,
                lambda: plots.line_svg(list(ps), series, "p", title),
                lambda: plots.line_ascii(list(ps), series, "p", title))
    return EXIT_OK


def cmd_noisy(args) -> int:
    g = _gate(args)
    rs = _parse_grid(args.grid)
    rows = []
    for r in rs:
        n = NoiseParams(args.p, float(r))
        if args.r_leaves is None:
            proto = Protocol.single(g, n)
        else:
            proto = boundary_protocol(args.r_leaves, g, n)
        fp = iterate(proto, tol=args.tol)
        d = fp.dist
        rows.append((float(r), d.p2, d.p1, d.psigma, d.pm, fp.converged))
    _write(args, _table_text(
        args, "noisy", ("r", "P2", "P1", "Psigma", "PM", "converged"), rows))
    series = {name: [row[k] for row in rows]
              for k, name in ((1, "P2"), (2, "P1"), (3, "Psigma"), (4, "PM"))}
    title = "root c-state weights vs decoherence rate"
    _write_plot(args,
                lambda: plots.line_svg(list(rs), series, "r", title),
                lambda: plots.line_ascii(list(rs), series, "r", title))
    return EXIT_OK


def cmd_phase_diagram(args) -> int:
    g = _gate(args)
    ps, rs = _parse_grid2(args.grid)
    if len(ps) < 2 or len(rs) < 2:
        raise ValueError("--grid needs at least 2 points per axis")
    diagram = sweep_grid((float(ps[0]), float(ps[-1])), (float(rs[0]), float(rs[-1])),
                         (len(ps), len(rs)), g=g, eps=args.eps, tol=args.tol)
    rows = []
    for pt in diagram.points:
        d = pt.result.dist
        phase = pt.phase.value if pt.phase is not None else "unconverged"
        rows.append((pt.p, pt.r, d.p2, d.p1, d.psigma, d.pm, phase))
    _write(args, _table_text(
        args, "phase-diagram",
        ("p", "r", "P2", "P1", "Psigma", "PM", "phase"), rows))
    letters = [[_PHASE_LETTER[rows[i * len(rs) + j][6]] for j in range(len(rs))]
               for i in range(len(ps))]
    title = "phases on the (p, r) plane"
    _write_plot(args,
                lambda: plots.phase_grid_svg(diagram.p_values, diagram.r_values,
                                             letters, title),
                lambda: plots.phase_grid_ascii(diagram.p_values, diagram.r_values,
                                               letters))
    return EXIT_OK


def cmd_boundary(args) -> int:
    g = _gate(args)
    values = _parse_grid(args.grid)
    scan = boundary_noise_scan_rows(values, g, NoiseParams(args.p, args.r), args.tol)
    _write(args, _table_text(
        args, "boundary",
        ("r_leaves", "P2", "P1", "Psigma", "PM", "converged"), scan))
    series = {name: [row[k] for row in scan]
              for k, name in ((1, "P2"), (2, "P1"), (3, "Psigma"), (4, "PM"))}
    title = "root c-state weights vs leaf decoherence"
    _write_plot(args,
                lambda: plots.line_svg(list(values), series, "r_leaves", title),
                lambda: plots.line_ascii(list(values), series, "r_leaves", title))
    return EXIT_OK


def boundary_noise_scan_rows(values, g, n, tol) -> list:
    rows = []
    for rl in values:
        fp = iterate(boundary_protocol(float(rl), g, n), tol=tol)
        d = fp.dist
        rows.append((float(rl), d.p2, d.p1, d.psigma, d.pm, fp.converged))
    return rows


def cmd_multistep(args) -> int:
    values = _parse_grid(args.grid)
    scan = multistep_scan(args.alpha_even, args.alpha_odd, args.beta, args.gamma,
                          args.axis, [float(v) for v in values],
                          p=args.p, r=args.r, eps=args.eps, tol=args.tol)
    rows = []
    for v, fp, phase in scan:
        d = fp.dist
        label = phase.value if phase is not None else "unconverged"
        rows.append((v, d.p2, d.p1, d.psigma, d.pm, label))
    _write(args, _table_text(
        args, "multistep",
        (args.axis, "P2", "P1", "Psigma", "PM", "phase"), rows))
    series = {name: [row[k] for row in rows]
              for k, name in ((1, "P2"), (2, "P1"), (3, "Psigma"), (4, "PM"))}
    title = "two-ensemble schedule: root weights"
    _write_plot(args,
                lambda: plots.line_svg(list(values), series, args.axis, title),
                lambda: plots.line_ascii(list(values), series, args.axis, title))
    return EXIT_OK


# --------------------------------------------------------------------------
# Ising command


def _delta_h(beta: float, h_bulk: float, n_br: int, depth, tol: float) -> float:
    up = root_field(IsingParams(beta, h_bulk, n_br, math.inf), depth, tol)
    dn = root_field(IsingParams(beta, h_bulk, n_br, -math.inf), depth, tol)
    if not (up.converged and dn.converged):
        raise RuntimeError(
            f"root field did not converge at beta={beta!r}, h_bulk={h_bulk!r} "
            "(critical point); shift the grid or use a finite --depth"
        )
    return up.h_r - dn.h_r


def cmd_ising(args) -> int:
    depth = _parse_depth(args.depth)
    if args.grid is None:
        args.grid = {"beta": "0:1.2:25", "h": "0:0.6:25", "h-leaf": "-1:1:21"}[args.scan]
    values = _parse_grid(args.grid)
    if args.scan == "beta":
        rows = [(float(b), _delta_h(float(b), args.h_bulk, args.n_br, depth, args.tol))
                for b in values]
        columns = ("beta", "delta_h_R")
        x_label = "beta"
    elif args.scan == "h":
        rows = [(float(h), _delta_h(args.beta, float(h), args.n_br, depth, args.tol))
                for h in values]
        columns = ("h_bulk", "delta_h_R")
        x_label = "h_bulk"
    else:
        rows = boundary_field_scan(args.beta, args.h_bulk, [float(h) for h in values],
                                   n_br=args.n_br, depth=depth, tol=args.tol)
        columns = ("h_leaf", "h_R", "response")
        x_label = "h_leaf"
    _write(args, _table_text(args, "ising", columns, rows))
    series = {columns[-1]: [row[-1] for row in rows]}
    title = "recursive root field on the tree"
    _write_plot(args,
                lambda: plots.line_svg(list(values), series, x_label, title),
                lambda: plots.line_ascii(list(values), series, x_label, title))
    return EXIT_OK


# --------------------------------------------------------------------------
# verification command


def _label(c: CState) -> str:
    return c.label


def _check_group_order(args) -> tuple:
    count = len(enumerate_symplectic_group())
    return count == 720, {"count": count}


def _check_transition_matrix(args) -> tuple:
    w_exact, params = compute_w_exact()
    model = build_transition_matrix(GateParams(params.alpha, params.beta, params.gamma))
    entries = dict(w_exact.w)
    detail = {
        "alpha": str(params.alpha),
        "beta": str(params.beta),
        "gamma": str(params.gamma),
    }
    if args.inject_fault:
        key = (CState.TWO, CState.ONE, CState.TWO)
        entries[key] = entries[key] + Fraction(1, 720)
        detail["injected_fault"] = "W((2,1)->2) += 1/720"
    mismatches = []
    for a in CState:
        for b in CState:
            if a > b:
                continue
            for c in CState:
                got = entries.get((a, b, c), Fraction(0))
                want = model.prob(a, b, c)
                if got != want:
                    mismatches.append(
                        f"W(({_label(a)},{_label(b)})->{_label(c)}) = {got}, "
                        f"expected {want}"
                    )
    detail["mismatches"] = mismatches
    return not mismatches, detail


def _check_deterministic_gates(args) -> tuple:
    detail = {}
    ok = True
    for name, gate, alpha in (("branch_keeping", GATE_ALPHA0, Fraction(0)),
                              ("branch_swapping", GATE_ALPHA1, Fraction(1))):
        _, params = compute_w_exact([(gate, Fraction(1))])
        detail[name] = {"alpha": str(params.alpha), "beta": str(params.beta),
                        "gamma": str(params.gamma)}
        ok = ok and params.alpha == alpha and params.beta == 0 and params.gamma == 0
    return ok, detail


def _check_purification(args) -> tuple:
    report = verify_purification_equivalence()
    return report.passed, {"cases": report.cases_checked,
                           "violations": len(report.violations)}


def _check_dense_equivalence(args) -> tuple:
    report = run_equivalence_trials(sequences=200, seed=args.seed)
    return report.passed, {
        "sequences": report.sequences,
        "operations": report.operations,
        "entropy_checks": report.entropy_checks,
        "sigma_deviation": report.sigma_deviation,
        "failures": len(report.failures),
    }


def _check_simulation(args) -> tuple:
    noise = NoiseParams(0.1, 0.02)
    predicted = recursion_prediction(args.depth, GateParams.clifford(), noise)
    result = simulate_tree(args.depth, noise=noise, trials=args.trials,
                           seed=args.seed)
    sigma = result.max_sigma(predicted)
    return sigma < 4.0, {
        "depth": args.depth,
        "trials": args.trials,
        "counts": list(result.counts),
        "max_sigma": sigma,
    }


_CHECKS = (
    ("symplectic_group_order", _check_group_order),
    ("transition_matrix_match", _check_transition_matrix),
    ("deterministic_gates", _check_deterministic_gates),
    ("purification_equivalence", _check_purification),
    ("tableau_dense_equivalence", _check_dense_equivalence),
    ("simulation_matches_recursion", _check_simulation),
)


def cmd_verify(args) -> int:
    rows = []
    failed = []
    for name, check in _CHECKS:
        passed, detail = check(args)
        rows.append((name, passed, detail))
        if not passed:
            failed.append((name, detail))
    _write(args, _table_text(args, "verify", ("check", "passed", "detail"), rows))
    if failed:
        for name, detail in failed:
            print(f"verification failed: {name}", file=sys.stderr)
            for line in detail.get("mismatches", []):
                print(f"  {line}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# --------------------------------------------------------------------------
# parser and dispatch


def build_parser() -> tuple:
    parser = _Parser(prog="treephase",
                     description="exact recursions and stabilizer simulations "
                                 "for entanglement phases on tree circuits")
    parser.add_argument("--version", action="version",
                        version=f"treephase {__version__}")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")
    registry = {}

    def sub(name, func, help_text):
        s = subs.add_parser(name, help=help_text)
        s.set_defaults(func=func)
        registry[name] = s
        return s

    s = sub("mipt", cmd_mipt, "sweep measurement rate p (columns p, P2, Psigma)")
    _add_gate(s)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--grid", default="0:0.25:26", metavar="LO:HI:N")
    _add_common(s)

    s = sub("noisy", cmd_noisy,
            "sweep decoherence rate r (columns r, P2, P1, Psigma, PM, converged)")
    _add_gate(s)
    s.add_argument("--p", type=float, default=0.0)
    s.add_argument("--r-leaves", type=float, default=None,
                   help="fixed leaf decoherence; bulk channel starts a layer up")
    s.add_argument("--grid", default="0:0.03:25", metavar="LO:HI:N")
    _add_common(s)

    s = sub("phase-diagram", cmd_phase_diagram,
            "classify every point of a (p, r) grid")
    _add_gate(s)
    s.add_argument("--grid", default="0:0.25:9,0:0.03:9",
                   metavar="PLO:PHI:NP,RLO:RHI:NR")
    s.add_argument("--eps", type=float, default=EPS_PHASE,
                   help="component threshold for phase classification")
    _add_common(s)

    s = sub("boundary", cmd_boundary,
            "sweep leaf-only decoherence r_leaves at fixed bulk noise")
    _add_gate(s)
    s.add_argument("--p", type=float, default=0.0)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--grid", default="0:0.99:34", metavar="LO:HI:N")
    _add_common(s)

    s = sub("multistep", cmd_multistep,
            "sweep r or r_leaves for an alternating two-ensemble schedule")
    s.add_argument("--alpha-even", type=float, default=0.8,
                   help="branch-swap weight on even layers (adjacent to leaves)")
    s.add_argument("--alpha-odd", type=float, default=0.2)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--gamma", type=float, default=0.0)
    s.add_argument("--p", type=float, default=0.0)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--axis", choices=("r", "r_leaves"), default="r_leaves")
    s.add_argument("--grid", default="0:0.9:31", metavar="LO:HI:N")
    s.add_argument("--eps", type=float, default=EPS_PHASE)
    _add_common(s)

    s = sub("ising", cmd_ising,
            "root-field scans of the recursive Ising tree")
    s.add_argument("--scan", choices=("beta", "h", "h-leaf"), default="beta")
    s.add_argument("--beta", type=float, default=1.0,
                   help="inverse temperature (fixed for h and h-leaf scans)")
    s.add_argument("--h-bulk", type=float, default=0.0)
    s.add_argument("--n-br", type=int, default=2, help="branching number")
    s.add_argument("--depth", default="inf", metavar="D|inf")
    s.add_argument("--grid", default=None, metavar="LO:HI:N",
                   help="scan grid (default depends on --scan)")
    _add_common(s)

    s = sub("verify", cmd_verify,
            "run the oracle verification suite; exit 3 on any failure")
    s.add_argument("--depth", type=int, default=3,
                   help="tree depth for the simulation check")
    s.add_argument("--trials", type=int, default=20_000,
                   help="trajectories for the simulation check")
    s.add_argument("--inject-fault", action="store_true",
                   help="negative control: perturb one W entry and report it")
    _add_common(s)

    return parser, registry


def _config_path(argv) -> str | None:
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    return path


def _apply_config(registry, argv) -> None:
    path = _config_path(argv)
    if path is None:
        return
    command = next((tok for tok in argv if not tok.startswith("-")), None)
    if command not in registry:
        return  # full parse will report the unknown command
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError(f"config file {path!r} must hold a JSON object")
    sub = registry[command]
    valid = {a.dest for a in sub._actions}
    defaults = {}
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if dest not in valid:
            raise ValueError(f"unknown config key {key!r} for command {command!r}")
        defaults[dest] = value
    sub.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    try:
        _apply_config(registry, argv)
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except (ValueError, OSError) as e:
        print(f"treephase: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ValueError as e:
        print(f"treephase: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, OSError, ArithmeticError) as e:
        print(f"treephase: error: {e}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
