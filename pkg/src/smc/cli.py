"""``smc`` command line: solve, check, decompose, gen, reduce, bench.

Exit codes: 0 success, 1 input error, 2 enumeration cap exceeded,
3 the checked stability notion is violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from fractions import Fraction

from . import altstab, classic, generators, lp, reduction
from .core import (
    FractionalMatching,
    SmcInstance,
    as_fractional,
    check_epsilon,
    check_stability,
    dump_instance,
    dump_matching,
    format_rational,
    rational,
    read_instance,
    read_matching,
    utilities,
    write_text,
)
from .decompose import bvn_decompose, complete_with_dummies, dump_bvn
from .errors import CapExceeded, SmcError

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_VIOLATED = 0, 1, 2, 3

METHODS = ("exact-thresh", "exact-milp", "binary", "heavy-light", "blend", "half-stable")
NOTIONS = ("stable", "eps-stable", "strong", "fractional", "expost")
GEN_FAMILIES = ("fig1", "gap", "nonconvex", "unstable-support", "support-lb", "2x2", "appendixB", "random")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self._start = time.perf_counter()

    def micros(self) -> int:
        return int((time.perf_counter() - self._start) * 1_000_000)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (Fraction, int)):
        return format_rational(x)
    return str(x)


def _report(fields: list, lines: list | None = None) -> str:
    out = ["report v1"] + [f"{k}={_fmt(v)}" for k, v in fields]
    return "\n".join(out + (lines or [])) + "\n"


def _emit(text: str, path=None):
    sys.stdout.write(text)
    if path:
        write_text(path, text)


def _pair(inst: SmcInstance, i: int, j: int) -> str:
    return f"({inst.man_name(i)},{inst.woman_name(j)})"


# ---------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    inst = read_instance(args.input)
    eps = check_epsilon(args.eps or 0, allow_one=args.method == "blend")
    clock = _Clock(not args.no_time)
    cert = None
    subproblems = None
    claimed = None
    if args.method == "exact-thresh":
        res = lp.solve_exact_thresh(inst, eps, cap=args.cap, jobs=args.jobs)
        mu, cert, subproblems = res.matching, res.certificate, res.subproblems_solved
    elif args.method == "exact-milp":
        if eps:
            raise UsageError("exact-milp solves the exact-stability problem; drop --eps")
        res = lp.solve_exact_milp(inst, cap=args.cap)
        mu, cert, subproblems = res.matching, res.certificate, res.subproblems_solved
    elif args.method == "half-stable":
        res = lp.solve_half_stable(inst)
        mu, cert, subproblems = res.matching, res.certificate, res.subproblems_solved
        eps = Fraction(1, 2)
    else:
        if args.method == "binary":
            rep = classic.solve_binary(inst)
        elif args.method == "heavy-light":
            rep = classic.approx_heavy_light(inst, ternary_tiebreak=args.ternary_tiebreak)
        else:
            if args.eps is None:
                raise UsageError("blend needs --eps")
            rep = classic.blend_eps_stable(inst, eps)
        mu, claimed = as_fractional(rep.matching, inst.n), rep.claimed_ratio
    elapsed = clock.micros()
    prof = utilities(inst, mu)
    stable = eps == 1 or check_stability(inst, mu, eps).stable
    fields = [("command", "solve"), ("method", args.method), ("n", inst.n), ("epsilon", eps),
              ("welfare", prof.welfare), ("stable", stable)]
    if subproblems is not None:
        fields.append(("subproblems", subproblems))
    if claimed is not None:
        fields.append(("claimed_ratio", claimed))
    if clock.enabled:
        fields.append(("wall_time_us", elapsed))
    if args.out:
        write_text(args.out, dump_matching(mu))
        fields.append(("matching_file", args.out))
        if cert is not None:
            write_text(args.out + ".cert", lp.dump_certificate(cert, eps))
            fields.append(("certificate_file", args.out + ".cert"))
    lines = []
    if cert is not None and not args.out:
        lines = ["", lp.dump_certificate(cert, eps).rstrip("\n")]
    _emit(_report(fields, lines), args.report)
    return EXIT_OK


# ---------------------------------------------------------------- check

def cmd_check(args) -> int:
    inst = read_instance(args.input)
    mu = read_matching(args.matching)
    if mu.n != inst.n:
        raise UsageError(f"matching is {mu.n}x{mu.n} but the instance has n={inst.n}")
    fields = [("command", "check"), ("notion", args.notion)]
    lines = []
    if args.notion in ("stable", "eps-stable"):
        if args.notion == "eps-stable" and args.eps is None:
            raise UsageError("eps-stable needs --eps")
        eps = check_epsilon(args.eps or 0) if args.notion == "eps-stable" else Fraction(0)
        fields.append(("epsilon", eps))
        rep = check_stability(inst, mu, eps)
        holds = rep.stable
        lines = [f"violation={_pair(inst, b.man, b.woman)}" for b in rep.blocking_pairs]
    elif args.notion == "strong":
        viol = altstab.check_strong_stability(inst, mu)
        holds = not viol
        lines = [f"violation man={inst.man_name(v.man)} holds={inst.woman_name(v.his_worse_woman)} "
                 f"prefers={inst.woman_name(v.woman)} who_holds={inst.man_name(v.rival_man)}" for v in viol]
    elif args.notion == "fractional":
        viol = altstab.check_fractional_stability(inst, mu)
        holds = not viol
        lines = [f"violation={_pair(inst, v.man, v.woman)} value={format_rational(v.value)}" for v in viol]
    else:
        res = altstab.check_expost_stability(inst, mu, cap=args.cap)
        holds = bool(res)
        if holds:
            lines = ["", dump_bvn(res).rstrip("\n")]
        else:
            fields.append(("stable_matchings_considered", res.stable_matchings_considered))
    fields.insert(2, ("holds", holds))
    _emit(_report(fields, lines), args.report)
    return EXIT_OK if holds else EXIT_VIOLATED


# ---------------------------------------------------------------- decompose

def cmd_decompose(args) -> int:
    mu = read_matching(args.matching)
    if args.pad:
        if not args.input:
            raise UsageError("--pad needs --in for the instance")
        _, mu = complete_with_dummies(read_instance(args.input), mu)
    support = bvn_decompose(mu)
    text = dump_bvn(support)
    if args.out:
        write_text(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    fam = args.family
    witnesses = []
    if fam == "fig1":
        inst, w = generators.gen_fig1()
        witnesses = [w]
    elif fam == "gap":
        inst, w = generators.gen_gap(rational(args.alpha or 3), args.k or 3)
        witnesses = [w]
    elif fam == "nonconvex":
        inst, first, second = generators.gen_nonconvex()
        witnesses = [first.to_fractional(inst.n), second.to_fractional(inst.n)]
    elif fam == "unstable-support":
        inst, w = generators.gen_unstable_support(rational(args.alpha or 3))
        witnesses = [w]
    elif fam == "support-lb":
        inst, w = generators.gen_support_lb(args.n or 5, rational(args.rho or 1))
        witnesses = [w]
    elif fam == "2x2":
        inst = generators.gen_2x2_example()
    elif fam == "appendixB":
        inst, w = generators.gen_appendixB()
        witnesses = [w]
    else:
        inst = generators.gen_random(args.n or 4, args.random_family, args.seed,
                                     alpha=rational(args.alpha or 3), max_value=args.max_value)
    text = dump_instance(inst)
    if not args.out:
        sys.stdout.write(text)
        return EXIT_OK
    write_text(args.out, text)
    for k, w in enumerate(witnesses):
        suffix = ".witness" if k == 0 else f".witness{k + 1}"
        write_text(args.out + suffix, dump_matching(w))
    return EXIT_OK


# ---------------------------------------------------------------- reduce

def _parse_assignment(text: str) -> list:
    text = text.strip()
    if "," in text or " " in text:
        tokens = text.replace(",", " ").split()
    else:
        tokens = list(text)
    table = {"1": True, "t": True, "T": True, "0": False, "f": False, "F": False, "?": None, "-": None}
    try:
        return [table[t] for t in tokens]
    except KeyError as exc:
        raise UsageError(f"bad assignment value {exc.args[0]!r}") from None


def cmd_reduce(args) -> int:
    with open(args.cnf, encoding="utf-8") as fh:
        formula = reduction.parse_dimacs_2p2n(fh.read())
    if args.variant == "thm6":
        if args.alpha is None:
            raise UsageError("thm6 needs --alpha")
        k = args.k
        if k is None:
            if args.delta is None:
                raise UsageError("thm6 needs --k or --delta")
            k = reduction.suggest_params(formula, rational(args.delta), "thm6", alpha=rational(args.alpha))["k"]
        art = reduction.compile_thm6(formula, rational(args.alpha), k)
    else:
        if args.eps is None or args.delta is None:
            raise UsageError("appC needs --eps and --delta")
        art = reduction.compile_appC(formula, rational(args.eps), rational(args.delta))
    bounds = reduction.welfare_bounds(art)
    fields = [("command", "reduce"), ("variant", art.variant), ("n", art.instance.n)]
    fields += [(key, art.params[key]) for key in sorted(art.params)]
    fields += [("unsat_upper", bounds.unsat_upper), ("sat_lower", bounds.sat_lower),
               ("separated", bounds.separated)]
    if args.out:
        write_text(args.out, dump_instance(art.instance))
        write_text(args.out + ".bindings", reduction.dump_bindings(art))
    if args.assignment is not None:
        mu = reduction.witness_from_assignment(art, _parse_assignment(args.assignment))
        fields.append(("witness_welfare", utilities(art.instance, mu).welfare))
        fields.append(("witness_stable", check_stability(art.instance, mu, art.epsilon).stable))
        if args.out:
            write_text(args.out + ".witness", dump_matching(mu))
    _emit(_report(fields), args.report)
    return EXIT_OK


# ---------------------------------------------------------------- bench

BENCH_HEADER = ("instance", "method", "welfare", "ratio_vs_oracle", "checks_pass", "time_us")


class _Bench:
    def __init__(self, timed: bool):
        self.rows = []
        self.timed = timed

    def run(self, instance_id, method, fn, oracle=None):
        start = time.perf_counter()
        welfare, ok = fn()
        micros = int((time.perf_counter() - start) * 1_000_000)
        ratio = "" if not oracle else format_rational(welfare / oracle)
        self.rows.append((instance_id, method, format_rational(welfare), ratio, _fmt(bool(ok)),
                          str(micros) if self.timed else ""))
        return welfare

    def csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        writer.writerows(self.rows)
        return buf.getvalue()


def _w(inst, mu) -> Fraction:
    return utilities(inst, as_fractional(mu, inst.n)).welfare


def _stable(inst, mu, eps=0) -> bool:
    return check_stability(inst, as_fractional(mu, inst.n), eps).stable


def _paper_tables(bench: _Bench):
    from .oracle import best_stable_integral

    inst, wit = generators.gen_fig1()
    opt = lp.solve_exact_thresh(inst).profile.welfare
    bench.run("fig1", "witness", lambda: (_w(inst, wit), _w(inst, wit) == Fraction(15, 2) and _stable(inst, wit)), opt)
    bench.run("fig1", "exact-thresh", lambda: (opt, opt >= Fraction(15, 2)), opt)
    for side in ("men", "women"):
        gs = classic.gale_shapley(inst, side)
        bench.run("fig1", f"gale-shapley-{side}", lambda: (_w(inst, gs), _w(inst, gs) == 7), opt)
    bench.run("fig1", "fractional-violation",
              lambda: (Fraction(1, 2), [(v.man, v.woman, v.value) for v in altstab.check_fractional_stability(inst, wit)]
                       == [(0, 2, Fraction(1, 2))]))

    for a, k in ((3, 3), (3, 10), (2, 5)):
        inst, wit = generators.gen_gap(a, k)
        bound = generators.gap_integral_bound(a, k)
        iid = f"gap-a{a}-k{k}"
        bench.run(iid, "witness", lambda: (_w(inst, wit), _w(inst, wit) == generators.gap_witness_welfare(a, k)
                                           and _stable(inst, wit)))
        for side in ("men", "women"):
            gs = classic.gale_shapley(inst, side)
            bench.run(iid, f"gale-shapley-{side}", lambda: (_w(inst, gs), _w(inst, gs) <= bound and _stable(inst, gs)))
        if inst.n <= 9:
            bench.run(iid, "best-stable-integral", lambda: (lambda r: (r[1], r[1] <= bound))(best_stable_integral(inst, cap=9)))

    inst, first, second = generators.gen_nonconvex()
    mid = FractionalMatching.mix(inst.n, [(Fraction(1, 2), first), (Fraction(1, 2), second)])
    bench.run("nonconvex", "mu1", lambda: (_w(inst, first), _stable(inst, first)))
    bench.run("nonconvex", "mu2", lambda: (_w(inst, second), _stable(inst, second)))
    bench.run("nonconvex", "midpoint", lambda: (_w(inst, mid), check_stability(inst, mid).pairs == [(1, 1)]))

    inst, wit = generators.gen_unstable_support(3)
    opt = lp.solve_exact_thresh(inst).profile.welfare
    bench.run("unstable-support-a3", "witness", lambda: (_w(inst, wit), _w(inst, wit) == 7 and _stable(inst, wit)
                                                         and wit.weights[0][0] == 0), opt)
    bench.run("unstable-support-a3", "exact-thresh", lambda: (opt, opt == 7), opt)
    mats = generators.unstable_support_matchings()
    bench.run("unstable-support-a3", "integral-pattern",
              lambda: (max(_w(inst, m) for m in mats),
                       [_w(inst, m) for m in mats] == [6, 6, 6, 5, 8, 5]
                       and [_stable(inst, m) for m in mats] == [True] + [False] * 5))

    inst, wit = generators.gen_support_lb(5, 1)
    alpha = generators.support_lb_alpha(5, 1)
    bench.run("support-lb-n5", "witness",
              lambda: (_w(inst, wit), _stable(inst, wit) and _w(inst, wit) > 4 * alpha and len(bvn_decompose(wit)) == 4))

    inst = generators.gen_2x2_example()
    opt = lp.solve_exact_thresh(inst).profile.welfare
    best = classic.max_welfare_matching(inst)
    bench.run("2x2", "exact-thresh", lambda: (opt, opt == 2), opt)
    bench.run("2x2", "max-welfare", lambda: (_w(inst, best), _w(inst, best) == 4
                                             and check_stability(inst, as_fractional(best, 2)).pairs == [(1, 0)]), opt)

    inst, wit = generators.gen_appendixB()
    prof = utilities(inst, wit)
    bench.run("appendixB", "witness", lambda: (prof.welfare, _stable(inst, wit) and set(prof.u + prof.v) == {1}
                                               and bool(altstab.check_strong_stability(inst, wit))))


def _random_suite(bench: _Bench, seed: int, count: int):
    for idx in range(count):
        family = generators.FAMILIES[idx % len(generators.FAMILIES)]
        n = 2 + idx % 3
        inst = generators.gen_random(n, family, seed * 1000 + idx)
        iid = f"{family}-n{n}-{seed}-{idx}"
        opt = lp.solve_exact_thresh(inst).profile.welfare
        best = _w(inst, classic.max_welfare_matching(inst))
        bench.run(iid, "exact-thresh", lambda: (opt, True), opt)
        rep = classic.approx_heavy_light(inst)
        bench.run(iid, "heavy-light", lambda: (rep.welfare, _stable(inst, rep.matching)
                                               and rep.welfare * rep.claimed_ratio >= best), opt)
        half = Fraction(1, 2)
        blend = classic.blend_eps_stable(inst, half)
        bench.run(iid, "blend-1/2", lambda: (blend.welfare, _stable(inst, blend.matching, half)
                                             and blend.welfare >= half * best), opt)
        hs = lp.solve_half_stable(inst)
        bench.run(iid, "half-stable", lambda: (hs.profile.welfare, _stable(inst, hs.matching, half)
                                               and hs.profile.welfare >= opt), opt)
        if inst.is_binary:
            b = classic.solve_binary(inst)
            bench.run(iid, "binary", lambda: (b.welfare, b.welfare == opt), opt)


def cmd_bench(args) -> int:
    bench = _Bench(timed=not args.no_time)
    if args.suite == "paper-tables":
        _paper_tables(bench)
    else:
        _random_suite(bench, args.seed, args.count)
    text = bench.csv()
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    failed = sum(1 for row in bench.rows if row[4] != "true")
    sys.stderr.write(f"{len(bench.rows)} rows, {failed} failed checks\n")
    return EXIT_OK if not failed else EXIT_VIOLATED


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="smc", description="Exact tools for stable matchings with cardinal valuations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="compute a stable matching")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--method", choices=METHODS, required=True)
    s.add_argument("--eps")
    s.add_argument("--cap", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--ternary-tiebreak", action="store_true")
    s.add_argument("--out", help="matching file; the certificate goes to <out>.cert")
    s.add_argument("--report", help="also write the report here")
    s.add_argument("--no-time", action="store_true")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="test a matching against a stability notion")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--matching", required=True)
    c.add_argument("--notion", choices=NOTIONS, required=True)
    c.add_argument("--eps")
    c.add_argument("--cap", type=int)
    c.add_argument("--report")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("decompose", help="Birkhoff-von Neumann decomposition of a matching")
    d.add_argument("--matching", required=True)
    d.add_argument("--in", dest="input")
    d.add_argument("--pad", action="store_true", help="pad with dummy agents first")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("gen", help="write a named or random instance")
    g.add_argument("--family", choices=GEN_FAMILIES, required=True)
    g.add_argument("--alpha")
    g.add_argument("--k", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--rho")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--random-family", choices=generators.FAMILIES, default="general")
    g.add_argument("--max-value", type=int, default=5)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", help="compile a 2P2N-3SAT formula")
    r.add_argument("--cnf", required=True)
    r.add_argument("--variant", choices=("thm6", "appC"), required=True)
    r.add_argument("--alpha")
    r.add_argument("--eps")
    r.add_argument("--delta")
    r.add_argument("--k", type=int)
    r.add_argument("--assignment", help="e.g. 100, TFF or 1,0,0; writes <out>.witness")
    r.add_argument("--out")
    r.add_argument("--report")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bench", help="run a benchmark suite to CSV")
    b.add_argument("--suite", choices=("paper-tables", "random"), required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--out")
    b.add_argument("--no-time", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        sys.stderr.write(f"error: CapExceeded: {exc}\n")
        return EXIT_CAP
    except (SmcError, UsageError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
