"""Command-line front end.

Subcommands: `violation` (single evaluation), `scan` (parameter sweep to
CSV plus a rendered figure), `tensor` (correlation-tensor dump), `audit`
(formula-vs-oracle and separable-bound suites).

Exit codes: 0 ok, 2 parse error, 3 validation error, 4 incompatible
method/operator, 5 IO failure, 6 audit failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import states
from .bellops import parse_operator_spec
from .correlation import correlation_tensor, dump_tensor
from .errors import DensityFormatError, DensityValidationError, SpecParseError
from .violation import (FAMILIES, OptimizerConfig, crossings, family_state,
                        max_violation_formula, oracle_max_violation, sweep)

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_INCOMPATIBLE = 4
EXIT_IO = 5
EXIT_AUDIT = 6


class IncompatibleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# state spec strings


class _StateParser:
    """Recursive-descent parser for textual state descriptors.

    Grammar: ghz:n=<int>,alpha=<float> | w:n=<int>
           | mixed:x=<float>,a=<spec>,b=<spec> | w4noise:x=<float>
           | file:<path>, each optionally parenthesized.
    """

    def __init__(self, text):
        self.text = text
        self.pos = 0

    def fail(self, msg):
        raise SpecParseError(msg, self.pos)

    def literal(self, lit):
        if not self.text.startswith(lit, self.pos):
            self.fail(f"expected {lit!r}")
        self.pos += len(lit)

    def number(self, conv, what):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in ",()":
            self.pos += 1
        tok = self.text[start:self.pos]
        try:
            return conv(tok)
        except ValueError:
            self.pos = start
            self.fail(f"bad {what}: {tok!r}")

    def spec(self):
        if self.pos < len(self.text) and self.text[self.pos] == "(":
            self.pos += 1
            rho = self.spec()
            self.literal(")")
            return rho
        for name in ("ghz", "w4noise", "w", "mixed", "file"):
            if self.text.startswith(name + ":", self.pos):
                self.pos += len(name) + 1
                return getattr(self, "p_" + name)()
        self.fail("expected one of ghz:, w:, mixed:, w4noise:, file:")

    def p_ghz(self):
        self.literal("n=")
        n = self.number(int, "qubit count")
        self.literal(",alpha=")
        alpha = self.number(float, "alpha")
        return states.make_generalized_ghz(n, alpha)

    def p_w(self):
        self.literal("n=")
        return states.make_w(self.number(int, "qubit count"))

    def p_w4noise(self):
        self.literal("x=")
        x = self.number(float, "mixing parameter")
        return family_state("w4-white-noise", x)

    def p_mixed(self):
        self.literal("x=")
        x = self.number(float, "mixing weight")
        if not 0.0 <= x <= 1.0:
            self.fail(f"mixing weight {x} outside [0, 1]")
        self.literal(",a=")
        rho_a = self.spec()
        self.literal(",b=")
        rho_b = self.spec()
        return states.mix([(x, rho_a), (1.0 - x, rho_b)])

    def p_file(self):
        start = self.pos
        depth = 0
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == ")" and depth == 0:
                break
            depth += ch == "("
            depth -= ch == ")"
            self.pos += 1
        path = self.text[start:self.pos]
        if not path:
            self.fail("empty file path")
        return states.load_density(path)


def parse_state_spec(text):
    p = _StateParser(text)
    rho = p.spec()
    if p.pos != len(text):
        raise SpecParseError(f"trailing garbage {text[p.pos:]!r}", p.pos)
    return rho


# ---------------------------------------------------------------------------
# commands


def _config(args):
    return OptimizerConfig(restarts=args.restarts, grid_points_per_angle=args.grid,
                           local_tol=args.local_tol, max_iters=args.max_iters,
                           seed=args.seed)


def _fmt_vec(v):
    return "(" + ", ".join(f"{x: .6g}" for x in v) + ")"


def _print_result(res):
    print(f"method={res.method} value={res.value:.6g} "
          f"evaluations={res.evaluations} converged={res.converged}")
    if res.argmax_b is not None:
        for lvl, b in enumerate(res.argmax_b, start=3):
            print(f"  b{lvl} = {_fmt_vec(b)}")
    if res.argmax_settings is not None:
        s = res.argmax_settings
        for q in range(s.n_qubits):
            print(f"  qubit {q + 1}: a = {_fmt_vec(s.a[q])}  a' = {_fmt_vec(s.a_prime[q])}")


def cmd_violation(args):
    spec = parse_operator_spec(args.operator)
    if args.method in ("formula", "both") and spec.kind != "recursive":
        raise IncompatibleError(
            f"no closed-form route for operator kind {spec.kind!r}; use --method oracle")
    rho = parse_state_spec(args.state)
    if rho.n_qubits != spec.n_qubits:
        raise DensityValidationError(
            "qubits", f"state has {rho.n_qubits} qubits but operator expects {spec.n_qubits}")
    cfg = _config(args)
    results = []
    if args.method in ("formula", "both"):
        results.append(max_violation_formula(rho, spec, cfg))
    if args.method in ("oracle", "both"):
        results.append(oracle_max_violation(rho, spec, cfg))
    for res in results:
        _print_result(res)
    if args.method == "both":
        print(f"discrepancy={abs(results[0].value - results[1].value):.6g}")
    return 0


def cmd_scan(args):
    if args.family not in FAMILIES:
        raise SpecParseError(f"unknown family {args.family!r}; choose from {FAMILIES}")
    spec = parse_operator_spec(args.operator)
    if spec.kind != "recursive":
        raise IncompatibleError("scan uses the closed-form route; operator must be recursive")
    if args.points < 2:
        raise SpecParseError(f"need at least 2 points, got {args.points}")
    cfg = _config(args)
    xs = np.linspace(0.0, 1.0, args.points)
    points = sweep(args.family, spec, cfg, xs)

    def fresh(x):
        return max_violation_formula(family_state(args.family, x), spec, cfg).value

    found = crossings(points, threshold=1.0, refine=fresh, xtol=1e-3)
    out = Path(args.out)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("x,f\n")
        for x, f in points:
            fh.write(f"{x:.10g},{f:.10g}\n")
    fig_path = Path(args.fig) if args.fig else out.with_suffix(".png")
    if not args.no_fig:
        from .plotting import render_sweep_figure
        render_sweep_figure(points, found, fig_path, args.family)
        print(f"figure written to {fig_path}")
    print(f"csv written to {out}")
    if found:
        print("crossings at f=1: " + ", ".join(f"{x:.4f}" for x in found))
    else:
        print("no crossings of f=1 detected")
    return 0


def cmd_tensor(args):
    rho = parse_state_spec(args.state)
    t = correlation_tensor(rho)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            dump_tensor(t, fh)
            fh.write(f"# unit-trace check: T[0..0] = {t.values[(0,) * t.n_qubits]:.17g}\n")
    else:
        dump_tensor(t, sys.stdout)
        print(f"# unit-trace check: T[0..0] = {t.values[(0,) * t.n_qubits]:.17g}")
    return 0


def cmd_audit(args):
    if args.n not in (3, 4):
        raise SpecParseError(f"audit supports n in {{3, 4}}, got {args.n}")
    if args.samples < 1:
        raise SpecParseError(f"need samples >= 1, got {args.samples}")
    from .bellops import BellOperatorSpec
    ks = (1, 2, 3) if args.n == 3 else (12,)
    rng = np.random.default_rng(args.seed)
    cfg = _config(args)
    worst = 0.0
    for i in range(args.samples):
        rho = states.random_mixed_state(args.n, rng)
        for k in ks:
            spec = BellOperatorSpec("recursive", args.n, k)
            f = max_violation_formula(rho, spec, cfg).value
            o = oracle_max_violation(rho, spec, cfg).value
            worst = max(worst, abs(f - o))
    sep_worst = 0.0
    for i in range(args.samples):
        rho = states.random_separable_state(args.n, rng)
        for k in ks:
            spec = BellOperatorSpec("recursive", args.n, k)
            sep_worst = max(sep_worst, oracle_max_violation(rho, spec, cfg).value)
    agree_ok = worst <= args.agreement_budget
    sep_ok = sep_worst <= 1.0 + args.separable_budget
    print(f"samples={args.samples} n={args.n} k={list(ks)}")
    print(f"max formula-oracle discrepancy: {worst:.3e} "
          f"(budget {args.agreement_budget:g}) -> {'pass' if agree_ok else 'FAIL'}")
    print(f"max separable-state value: {sep_worst:.10f} "
          f"(budget 1+{args.separable_budget:g}) -> {'pass' if sep_ok else 'FAIL'}")
    if not (agree_ok and sep_ok):
        print("error:audit: audit budgets exceeded", file=sys.stderr)
        return EXIT_AUDIT
    return 0


# ---------------------------------------------------------------------------


def _add_cfg_flags(p):
    p.add_argument("--restarts", type=int, default=8, help="optimizer restarts")
    p.add_argument("--grid", type=int, default=12,
                   help="coarse-grid theta points per unit vector (phi gets twice as many)")
    p.add_argument("--local-tol", type=float, default=1e-8, dest="local_tol")
    p.add_argument("--max-iters", type=int, default=300, dest="max_iters")
    p.add_argument("--seed", type=int, default=42)


def build_parser():
    ap = argparse.ArgumentParser(prog="bellmax",
                                 description="Multi-qubit Bell operators and maximal violations")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("violation", help="maximal mean value for one state and operator")
    p.add_argument("--state", required=True)
    p.add_argument("--operator", required=True)
    p.add_argument("--method", choices=("formula", "oracle", "both"), default="formula")
    _add_cfg_flags(p)
    p.set_defaults(func=cmd_violation)

    p = sub.add_parser("scan", help="sweep a state family and write CSV + figure")
    p.add_argument("--family", required=True)
    p.add_argument("--operator", required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out", required=True)
    p.add_argument("--fig", default=None, help="figure path (default: CSV path with .png)")
    p.add_argument("--no-fig", action="store_true", help="skip figure rendering")
    _add_cfg_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("tensor", help="dump the Pauli correlation tensor")
    p.add_argument("--state", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("audit", help="formula-vs-oracle and separable-bound suites")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--agreement-budget", type=float, default=1e-3, dest="agreement_budget")
    p.add_argument("--separable-budget", type=float, default=1e-4, dest="separable_budget")
    _add_cfg_flags(p)
    p.set_defaults(func=cmd_audit)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (SpecParseError, DensityFormatError) as exc:
        print(f"error:parse: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DensityValidationError as exc:
        print(f"error:validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IncompatibleError as exc:
        print(f"error:incompatible: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
