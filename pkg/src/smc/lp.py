"""Exact solvers built on the rational simplex.

Threshold enumeration and the binary y-enumeration are both explored as a
depth-first tree in lexicographic order. A node fixes a prefix of the
choices; its LP keeps only the constraints implied by that prefix, so its
optimum bounds every leaf below it. Subtrees whose bound cannot beat the
incumbent are skipped. The answer is the same as plain enumeration: maximum
welfare, ties going to the lexicographically smallest leaf.
"""
from __future__ import annotations

import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import (
    ONE,
    ZERO,
    FractionalMatching,
    SmcInstance,
    UtilityProfile,
    _read_text,
    check_epsilon,
    format_rational,
    rational,
    utilities,
    welfare_of_pairs,
)
from .errors import CapExceeded, ParseError
from .simplex import (
    Constraint,
    Infeasible,
    LinearProgram,
    Optimal,
    RhsFamily,
    Unbounded,
    replay_basis,
    simplex_solve,
)

__all__ = [
    "Constraint", "LinearProgram", "Optimal", "Infeasible", "Unbounded",
    "simplex_solve", "replay_basis", "ThresholdVector", "YAssignment", "SolveResult",
    "build_opt_thresh", "enumerate_thresholds", "solve_exact_thresh",
    "solve_exact_milp", "solve_half_stable", "certificate_holds",
    "dump_certificate", "load_certificate", "default_cap",
]

DEFAULT_CAPS = {"thresh": 6, "milp": 4, "expost": 8, "integral": 8, "partial": 5}


def default_cap(kind: str) -> int:
    env = os.environ.get("SMC_CAP")
    if env:
        return int(env)
    return DEFAULT_CAPS[kind]


def _check_cap(n: int, cap, kind: str) -> int:
    limit = default_cap(kind) if cap is None else int(cap)
    if n > limit:
        raise CapExceeded(f"n={n} exceeds the {kind} enumeration cap of {limit}")
    return limit


@dataclass(frozen=True)
class ThresholdVector:
    theta_men: tuple
    theta_women: tuple

    def is_stability_preserving(self, inst: SmcInstance, epsilon=0) -> bool:
        s = 1 - rational(epsilon)
        return all(
            self.theta_men[i] >= s * inst.U[i][j] or self.theta_women[j] >= s * inst.V[i][j]
            for i in range(inst.n)
            for j in range(inst.n)
        )


@dataclass(frozen=True)
class YAssignment:
    """Per-pair side choice: 1 means the man is held to U, 0 the woman to V.

    Fractional values appear for the relaxation used by the half-stable solver.
    """

    y: tuple


@dataclass(frozen=True)
class SolveResult:
    matching: FractionalMatching
    profile: UtilityProfile
    certificate: object
    subproblems_solved: int


# ---------------------------------------------------------------------------
# LP encodings


def _cells(inst: SmcInstance, all_cells: bool):
    n = inst.n
    return [
        (i, j)
        for i in range(n)
        for j in range(n)
        if all_cells or inst.U[i][j] + inst.V[i][j] > 0
    ]


def _capacity_constraints(n, index):
    rows: dict = {}
    cols: dict = {}
    for (i, j), k in index.items():
        rows.setdefault(i, {})[k] = ONE
        cols.setdefault(j, {})[k] = ONE
    return [Constraint(c, "<=", ONE) for _, c in sorted(rows.items())] + [
        Constraint(c, "<=", ONE) for _, c in sorted(cols.items())
    ]


def _threshold_lp(inst: SmcInstance, theta_men, theta_women, cells) -> LinearProgram:
    index = {cell: k for k, cell in enumerate(cells)}
    cons = _capacity_constraints(inst.n, index)
    for i, t in enumerate(theta_men):
        if t > 0:
            cons.append(Constraint({k: inst.U[a][b] for (a, b), k in index.items() if a == i}, ">=", t))
    for j, t in enumerate(theta_women):
        if t > 0:
            cons.append(Constraint({k: inst.V[a][b] for (a, b), k in index.items() if b == j}, ">=", t))
    objective = [inst.U[i][j] + inst.V[i][j] for i, j in cells]
    names = tuple(f"x[{i + 1},{j + 1}]" for i, j in cells)
    return LinearProgram(objective, cons, names=names)


def build_opt_thresh(inst: SmcInstance, theta: ThresholdVector) -> LinearProgram:
    """Welfare LP over all n*n cells with the utility floors of ``theta``."""
    return _threshold_lp(inst, theta.theta_men, theta.theta_women, _cells(inst, True))


def _to_matching(n, cells, x) -> FractionalMatching:
    rows = [[ZERO] * n for _ in range(n)]
    for (i, j), v in zip(cells, x):
        rows[i][j] = v
    return FractionalMatching(rows)


# ---------------------------------------------------------------------------
# threshold enumeration


def _candidates(inst: SmcInstance, eps: Fraction):
    s = 1 - eps
    return [sorted({ZERO} | {s * u for u in inst.U[i]}) for i in range(inst.n)]


def complete_women(inst: SmcInstance, theta_men, epsilon=0) -> tuple:
    """Smallest women thresholds making ``theta_men`` stability-preserving."""
    s = 1 - rational(epsilon)
    out = []
    for j in range(inst.n):
        need = [s * inst.V[i][j] for i, t in enumerate(theta_men) if t < s * inst.U[i][j]]
        out.append(max(need, default=ZERO))
    return tuple(out)


def enumerate_thresholds(inst: SmcInstance, epsilon=0, cap=None):
    eps = check_epsilon(epsilon)
    _check_cap(inst.n, cap, "thresh")
    for men in product(*_candidates(inst, eps)):
        yield ThresholdVector(tuple(men), complete_women(inst, men, eps))


class _Search:
    """Depth-first search over per-man (or per-pair) choices with LP bounds."""

    def __init__(self, inst, cells, floor):
        self.inst = inst
        self.cells = cells
        self.floor = floor  # welfare already achieved by a known stable matching
        self.best = None  # (value, leaf key, x)
        self.solved = 0
        n = inst.n
        self.row_max = [max(inst.U[i]) for i in range(n)]
        self.col_max = [max(inst.V[i][j] for i in range(n)) for j in range(n)]
        # every node LP shares this matrix: capacities, then -u_m <= -theta_m,
        # then -v_w <= -theta_w; only the right-hand side changes
        rows = []
        for i in range(n):
            rows.append({k: ONE for k, (a, _) in enumerate(cells) if a == i})
        for j in range(n):
            rows.append({k: ONE for k, (_, b) in enumerate(cells) if b == j})
        self.men_rows = [i for i in range(n) if self.row_max[i] > 0]
        self.women_rows = [j for j in range(n) if self.col_max[j] > 0]
        for i in self.men_rows:
            rows.append({k: -inst.U[a][b] for k, (a, b) in enumerate(cells) if a == i and inst.U[a][b]})
        for j in self.women_rows:
            rows.append({k: -inst.V[a][b] for k, (a, b) in enumerate(cells) if b == j and inst.V[a][b]})
        self.family = RhsFamily([inst.U[i][j] + inst.V[i][j] for i, j in cells], rows)

    def _rhs(self, theta_m, theta_w):
        n = self.inst.n
        return [ONE] * (2 * n) + [-theta_m[i] for i in self.men_rows] + [-theta_w[j] for j in self.women_rows]

    def _node(self, st):
        n = self.inst.n
        u = [ZERO] * n
        v = [ZERO] * n
        for (i, j), xv in zip(self.cells, st.x):
            if xv:
                u[i] += self.inst.U[i][j] * xv
                v[j] += self.inst.V[i][j] * xv
        return st.value, st.x, u, v, st

    def bound(self, theta_m, theta_w, parent):
        """LP optimum for the given floors.

        Reuses the parent's point when it already meets the floors, otherwise
        warm-starts from the parent's optimal basis.
        """
        if parent is not None:
            u, v = parent[2], parent[3]
            if all(u[i] >= t for i, t in enumerate(theta_m)) and all(v[j] >= t for j, t in enumerate(theta_w)):
                return parent
        if any(t > mx for t, mx in zip(theta_m, self.row_max)) or any(
            t > mx for t, mx in zip(theta_w, self.col_max)
        ):
            return None
        self.solved += 1
        b = self._rhs(theta_m, theta_w)
        if parent is None:
            st = self.family.solve_root(b) if not any(theta_m) and not any(theta_w) else None
            if st is None:
                root = self.family.solve_root(self._rhs([ZERO] * len(theta_m), [ZERO] * len(theta_w)))
                st = self.family.resolve(root, b)
        else:
            st = self.family.resolve(parent[4], b)
        return None if st is None else self._node(st)

    def hopeless(self, value) -> bool:
        if value < self.floor:
            return True
        return self.best is not None and value <= self.best[0]

    def offer(self, value, key, x):
        self.best = (value, key, x)


def _thresh_subtree(inst, eps, cells, floor, prefix):
    """Explore all leaves whose first men's thresholds equal ``prefix``."""
    n = inst.n
    s = 1 - eps
    cands = _candidates(inst, eps)
    search = _Search(inst, cells, floor)

    def women_floor(theta_m):
        out = []
        for j in range(n):
            need = [s * inst.V[i][j] for i, t in enumerate(theta_m) if t < s * inst.U[i][j]]
            out.append(max(need, default=ZERO))
        return out

    def visit(theta_m, parent):
        node = search.bound(theta_m + [ZERO] * (n - len(theta_m)), women_floor(theta_m), parent)
        if node is None or search.hopeless(node[0]):
            return
        if len(theta_m) == n:
            search.offer(node[0], tuple(theta_m), node[1])
            return
        for t in cands[len(theta_m)]:
            visit(theta_m + [t], node)

    root = None
    visit(list(prefix), root)
    return search.best, search.solved


def _stable_floor(inst: SmcInstance) -> Fraction:
    from .classic import gale_shapley

    return max(welfare_of_pairs(inst, gale_shapley(inst, side)) for side in ("men", "women"))


def solve_exact_thresh(inst: SmcInstance, epsilon=0, cap=None, jobs: int = 1, prune: bool = True) -> SolveResult:
    """Optimal epsilon-stable fractional matching by threshold enumeration."""
    eps = check_epsilon(epsilon)
    _check_cap(inst.n, cap, "thresh")
    n = inst.n
    cells = _cells(inst, False)
    if not prune:
        return _plain_thresh(inst, eps, cells)
    floor = _stable_floor(inst)
    if jobs > 1 and n > 1:
        firsts = _candidates(inst, eps)[0]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_thresh_subtree, *zip(*[(inst, eps, cells, floor, [t]) for t in firsts])))
        best, solved = None, 0
        for b, k in outs:  # subtrees come back in lexicographic order
            solved += k
            if b is not None and (best is None or b[0] > best[0]):
                best = b
    else:
        best, solved = _thresh_subtree(inst, eps, cells, floor, [])
    value, theta_m, x = best
    mu = _to_matching(n, cells, x)
    cert = ThresholdVector(tuple(theta_m), complete_women(inst, theta_m, eps))
    return SolveResult(mu, utilities(inst, mu), cert, solved)


def _plain_thresh(inst, eps, cells):
    best = None
    solved = 0
    for theta in enumerate_thresholds(inst, eps, cap=inst.n):
        solved += 1
        res = simplex_solve(_threshold_lp(inst, theta.theta_men, theta.theta_women, cells))
        if isinstance(res, Optimal) and (best is None or res.value > best[0]):
            best = (res.value, theta, res.x)
    _, theta, x = best
    mu = _to_matching(inst.n, cells, x)
    return SolveResult(mu, utilities(inst, mu), theta, solved)


# ---------------------------------------------------------------------------
# y-enumeration


def _vacuous_y(inst: SmcInstance, i, j) -> int:
    # y=1 asks u_m >= U, y=0 asks v_w >= V; pick the side whose bound is 0
    return 1 if inst.U[i][j] == 0 else 0


def solve_exact_milp(inst: SmcInstance, cap=None) -> SolveResult:
    """Optimal stable fractional matching by enumerating the binary side choices."""
    _check_cap(inst.n, cap, "milp")
    n = inst.n
    cells = _cells(inst, False)
    heavy = [(i, j) for i in range(n) for j in range(n) if inst.heavy(i, j)]
    search = _Search(inst, cells, _stable_floor(inst))

    def visit(choice, parent):
        theta_m = [ZERO] * n
        theta_w = [ZERO] * n
        for (i, j), y in zip(heavy, choice):
            if y:
                theta_m[i] = max(theta_m[i], inst.U[i][j])
            else:
                theta_w[j] = max(theta_w[j], inst.V[i][j])
        node = search.bound(theta_m, theta_w, parent)
        if node is None or search.hopeless(node[0]):
            return
        if len(choice) == len(heavy):
            search.offer(node[0], tuple(choice), node[1])
            return
        for y in (0, 1):
            visit(choice + [y], node)

    visit([], None)
    value, choice, x = search.best
    ymat = [[_vacuous_y(inst, i, j) for j in range(n)] for i in range(n)]
    for (i, j), y in zip(heavy, choice):
        ymat[i][j] = y
    mu = _to_matching(n, cells, x)
    cert = YAssignment(tuple(tuple(Fraction(y) for y in row) for row in ymat))
    return SolveResult(mu, utilities(inst, mu), cert, search.solved)


# ---------------------------------------------------------------------------
# half-stable relaxation


def solve_half_stable(inst: SmcInstance) -> SolveResult:
    """Single LP: welfare maximum subject to V*u_m + U*v_w >= U*V on heavy pairs."""
    n = inst.n
    cells = _cells(inst, False)
    index = {cell: k for k, cell in enumerate(cells)}
    cons = _capacity_constraints(n, index)
    for i in range(n):
        for j in range(n):
            if not inst.heavy(i, j):
                continue
            a, b = inst.U[i][j], inst.V[i][j]
            coeffs: dict = {}
            for jj in range(n):
                if (i, jj) in index:
                    coeffs[index[(i, jj)]] = coeffs.get(index[(i, jj)], ZERO) + b * inst.U[i][jj]
            for ii in range(n):
                if (ii, j) in index:
                    coeffs[index[(ii, j)]] = coeffs.get(index[(ii, j)], ZERO) + a * inst.V[ii][j]
            cons.append(Constraint(coeffs, ">=", a * b))
    objective = [inst.U[i][j] + inst.V[i][j] for i, j in cells]
    res = simplex_solve(LinearProgram(objective, cons))
    assert isinstance(res, Optimal)  # the zero matching is feasible only without heavy pairs; a max-weight one always is
    mu = _to_matching(n, cells, res.x)
    prof = utilities(inst, mu)
    y = [[Fraction(_vacuous_y(inst, i, j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if inst.heavy(i, j):
                y[i][j] = min(ONE, prof.u[i] / inst.U[i][j])
    return SolveResult(mu, prof, YAssignment(tuple(tuple(r) for r in y)), 1)


# ---------------------------------------------------------------------------
# certificates


def certificate_holds(inst: SmcInstance, mu, cert, epsilon=0) -> bool:
    """Does ``cert`` witness the claimed stability of ``mu``?

    Thresholds: utilities meet them and they are stability-preserving.
    Side choices: u_m >= U*y and v_w >= V*(1-y) for every pair.
    """
    prof = utilities(inst, mu)
    if isinstance(cert, ThresholdVector):
        return (
            all(u >= t for u, t in zip(prof.u, cert.theta_men))
            and all(v >= t for v, t in zip(prof.v, cert.theta_women))
            and cert.is_stability_preserving(inst, epsilon)
        )
    n = inst.n
    return all(
        prof.u[i] >= inst.U[i][j] * cert.y[i][j] and prof.v[j] >= inst.V[i][j] * (1 - cert.y[i][j])
        for i in range(n)
        for j in range(n)
    )


def dump_certificate(cert, epsilon=0) -> str:
    lines = ["certificate v1"]
    if isinstance(cert, ThresholdVector):
        lines += [
            "kind=thresholds",
            f"epsilon={format_rational(epsilon)}",
            "theta_men=" + " ".join(format_rational(t) for t in cert.theta_men),
            "theta_women=" + " ".join(format_rational(t) for t in cert.theta_women),
        ]
    else:
        lines += ["kind=y", f"n={len(cert.y)}", "y="]
        lines += [" ".join(format_rational(v) for v in row) for row in cert.y]
    return "\n".join(lines) + "\n"


def load_certificate(source):
    lines = [ln.strip() for ln in _read_text(source).splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != "certificate v1":
        raise ParseError("expected 'certificate v1' header", 1)
    fields = {}
    body = []
    for ln in lines[1:]:
        m = re.match(r"^(\w+)=(.*)$", ln)
        if m and not body:
            fields[m.group(1)] = m.group(2)
        else:
            body.append(ln)
    kind = fields.get("kind")
    if kind == "thresholds":
        return ThresholdVector(
            tuple(rational(t) for t in fields["theta_men"].split()),
            tuple(rational(t) for t in fields["theta_women"].split()),
        )
    if kind == "y":
        return YAssignment(tuple(tuple(rational(t) for t in ln.split()) for ln in body))
    raise ParseError(f"unknown certificate kind {kind!r}")
