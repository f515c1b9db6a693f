"""Command line front end: ``generate``, ``analyze``, ``sweep``, ``selftest``.

Exit codes
----------
0   success (``analyze``: every check passed)
1   I/O error, or a ``selftest`` invariant failed
2   the instance violates the ordered-spectra hypothesis
3   a numerical check failed
64  usage error
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np

from . import model
from .bounds import certify
from .errors import GraphRiccatiError, HypothesisViolated
from .linalg import Tolerances, subspace_distance
from .model import GeneratorSpec, ensemble_specs, generate
from .riccati import compute_K0_K1, k0_brute_force, solve

EXIT_OK, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3, 64

SWEEP_COLUMNS = ["param", "norm_X", "norm_PQ", "upper_X", "lower_X", "upper_PQ", "lower_PQ", "delta", "d"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _add_tol_flags(p):
    d = Tolerances()
    p.add_argument("--tol-rank", type=float, default=d.tol_rank)
    p.add_argument("--tol-eig", type=float, default=d.tol_eig)
    p.add_argument("--tol-sub", type=float, default=d.tol_sub)


def _add_generator_flags(p, required=True):
    p.add_argument("--n0", type=_positive_int, required=required)
    p.add_argument("--n1", type=_positive_int, required=required)
    p.add_argument("--ker0", type=int, default=0, help="dim Ker(A0 - lambda)")
    p.add_argument("--ker1", type=int, default=0, help="dim Ker(A1 - lambda)")
    p.add_argument("--k0", type=int, default=0, help="kernel pairs linked directly by V")
    p.add_argument("--gap", type=float, default=0.5)
    p.add_argument("--vnorm", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--couple", action="store_true", help="force nontrivial Ker(A0-lam) & Ker V^H and Ker(A1-lam) & Ker V")


def _tol(args):
    return Tolerances(tol_rank=args.tol_rank, tol_eig=args.tol_eig, tol_sub=args.tol_sub)


def _spec_from(args):
    return GeneratorSpec(
        n0=args.n0,
        n1=args.n1,
        ker0_dim=args.ker0,
        ker1_dim=args.ker1,
        gap=args.gap,
        vnorm=args.vnorm,
        couple_kernels=args.couple,
        seed=args.seed,
        lam=args.lam,
        k0_dim=args.k0,
    )


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def build_parser():
    parser = _Parser(prog="graphriccati", description="Graph subspaces and contractive Riccati solutions for Hermitian block operators.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random instance as JSON")
    _add_generator_flags(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", default=None)

    a = sub.add_parser("analyze", help="certify an instance file")
    a.add_argument("input")
    _add_tol_flags(a)
    a.add_argument("--seed", type=int, default=0, help="accepted for symmetry; analyze is deterministic")
    a.add_argument("-o", "--output", default=None, help="write the JSON report here instead of standard output")

    s = sub.add_parser("sweep", help="scale V or widen the gap and tabulate the estimates")
    s.add_argument("--input", default=None, help="instance file; otherwise generator flags are used")
    _add_generator_flags(s, required=False)
    s.add_argument("--param", choices=["vscale", "gap"], required=True)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    _add_tol_flags(s)
    s.add_argument("-o", "--output", default=None)

    t = sub.add_parser("selftest", help="check every invariant on a seeded ensemble")
    t.add_argument("--count", type=_positive_int, default=200)
    t.add_argument("--max-dim", type=_positive_int, default=16)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--inject", action="append", default=[], help="extra instance file to include (repeatable)")
    _add_tol_flags(t)
    t.add_argument("-o", "--output", default="selftest_failure.json", help="where to write the first failing instance")
    return parser


# --- analyze --------------------------------------------------------------------


def _table(rep):
    rows = [
        ("n0, n1", f"{rep.n0}, {rep.n1}"),
        ("lambda", f"{rep.lam:.17g}"),
        ("d", f"{rep.d:.17g}"),
        ("||V||", f"{rep.vnorm:.17g}"),
        ("delta-, delta+", f"{rep.delta_minus:.17g}, {rep.delta_plus:.17g}"),
        ("lower_X <= ||X|| <= upper_X", f"{rep.lower_X:.17g} <= {rep.norm_X:.17g} <= {rep.upper_X:.17g}"),
        ("lower_PQ <= ||P-Q|| <= upper_PQ", f"{rep.lower_PQ:.17g} <= {rep.norm_PQ:.17g} <= {rep.upper_PQ:.17g}"),
        ("residual", f"{rep.residual:.3e}"),
        ("mu=1 multiplicity", str(rep.mu1_multiplicity)),
        ("dims", " ".join(f"{k}={v}" for k, v in rep.dims.items())),
    ]
    if rep.verdict is not None:
        v = rep.verdict
        rows.append(("unique / isolated", f"{v.unique} / {v.isolated}"))
        rows.append(("strictly contractive", str(v.strictly_contractive)))
    rows.append(("gap empty", str(rep.gap_empty)))
    failed = rep.failed()
    rows.append(("all_pass", "yes" if rep.all_pass else "NO (" + ", ".join(failed) + ")"))
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def cmd_analyze(args):
    try:
        op = model.load(args.input)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        rep = certify(op, _tol(args))
    except HypothesisViolated as exc:
        print(f"error: ordered-spectra hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except GraphRiccatiError as exc:
        print(f"error: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(_table(rep))
    doc = model.dumps(rep.as_dict(), indent=1) + "\n"
    if args.output:
        _write(doc, args.output)
    else:
        sys.stdout.write(doc)
    return EXIT_OK if rep.all_pass else EXIT_NUMERIC


# --- generate -------------------------------------------------------------------


def cmd_generate(args):
    try:
        op = generate(_spec_from(args))
    except GraphRiccatiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(model.to_json(op), args.output)
    return EXIT_OK


# --- sweep ----------------------------------------------------------------------


def sweep_rows(base, param, start, stop, steps, tol):
    rows = []
    for value in np.linspace(start, stop, steps):
        value = float(value)
        op = base.with_V(value * base.V) if param == "vscale" else base.shifted(value)
        rep = certify(op, tol)
        rows.append([value, rep.norm_X, rep.norm_PQ, rep.upper_X, rep.lower_X, rep.upper_PQ, rep.lower_PQ, rep.delta, rep.d])
    return rows


def cmd_sweep(args):
    if args.steps < 2 or args.start > args.stop:
        print("error: need --steps >= 2 and --start <= --stop", file=sys.stderr)
        return EXIT_USAGE
    if args.param == "gap" and args.start < 0:
        print("error: gap sweep values must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    if args.input:
        try:
            base = model.load(args.input)
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
            return EXIT_FAIL
    elif args.n0 and args.n1:
        base = generate(_spec_from(args))
    else:
        print("error: give --input or --n0/--n1 generator flags", file=sys.stderr)
        return EXIT_USAGE
    try:
        rows = sweep_rows(base, args.param, args.start, args.stop, args.steps, _tol(args))
    except HypothesisViolated as exc:
        print(f"error: ordered-spectra hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except GraphRiccatiError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([format(x, ".17g") for x in row])
    _write(buf.getvalue(), args.output)
    return EXIT_OK


# --- selftest -------------------------------------------------------------------


def instance_invariants(op, tol, brute_force_dim=6):
    """Invariant name -> bool for one instance.  Raises nothing."""
    out = {}
    try:
        out["roundtrip"] = model.from_json(model.to_json(op)) == op
        rep = certify(op, tol)
    except HypothesisViolated:
        out["hypothesis"] = False
        return out
    except GraphRiccatiError:
        out["numerics"] = False
        return out
    out["hypothesis"] = True
    for name, c in rep.checks.items():
        out[name] = c["ok"]
    if max(op.n0, op.n1) <= brute_force_dim:
        K0, _ = compute_K0_K1(op, tol)
        out["K0_brute_force"] = subspace_distance(K0, k0_brute_force(op, tol)) <= tol.tol_sub
    return out


def cmd_selftest(args):
    tol = _tol(args)
    t0 = time.perf_counter()
    instances = [(f"ensemble[{i}]", lambda s=s: generate(s)) for i, s in enumerate(ensemble_specs(args.count, args.max_dim, args.seed))]
    for path in args.inject:
        instances.append((f"inject:{path}", lambda p=path: model.load(p)))
    passed, failed = Counter(), Counter()
    first_failure = None
    for label, make in instances:
        op = make()
        for name, ok in instance_invariants(op, tol).items():
            (passed if ok else failed)[name] += 1
            if not ok and first_failure is None:
                first_failure = (label, name, op)
    for name in sorted(set(passed) | set(failed)):
        print(f"{name:<40} pass {passed[name]:>5}  fail {failed[name]:>5}")
    print(f"instances {len(instances)}")
    # timing goes to stderr so stdout stays deterministic
    print(f"elapsed {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    if first_failure is None:
        print("selftest: PASS")
        return EXIT_OK
    label, name, op = first_failure
    model.save(op, args.output)
    print(f"selftest: FAIL (first: {label}, invariant {name}); instance written to {args.output}")
    return EXIT_FAIL


COMMANDS = {"generate": cmd_generate, "analyze": cmd_analyze, "sweep": cmd_sweep, "selftest": cmd_selftest}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
