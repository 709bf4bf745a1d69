"""Two-phase simplex over the rationals.

The tableau is kept as an integer matrix together with a common positive
denominator (fraction-free "integer pivoting"), which is exact and much faster
than pivoting on Fraction objects. Bland's rule prevents cycling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple  # sparse ((var, coef), ...)
    relation: str
    rhs: Fraction

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")
        items = self.coeffs.items() if isinstance(self.coeffs, Mapping) else self.coeffs
        merged: dict = {}
        for k, c in items:
            merged[int(k)] = merged.get(int(k), 0) + Fraction(c)
        object.__setattr__(self, "coeffs", tuple(sorted((k, c) for k, c in merged.items() if c != 0)))
        object.__setattr__(self, "rhs", Fraction(self.rhs))


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x subject to constraints, x >= lower (default 0)."""

    objective: tuple
    constraints: tuple
    lower: tuple | None = None
    names: tuple | None = None

    def __post_init__(self):
        obj = tuple(Fraction(c) for c in self.objective)
        object.__setattr__(self, "objective", obj)
        cons = tuple(
            c if isinstance(c, Constraint) else Constraint(dict(enumerate(c[0])) if isinstance(c[0], Sequence) else c[0], c[1], c[2])
            for c in self.constraints
        )
        for c in cons:
            if any(k < 0 or k >= len(obj) for k, _ in c.coeffs):
                raise ValueError("constraint refers to an unknown variable")
        object.__setattr__(self, "constraints", cons)
        if self.lower is not None:
            low = tuple(Fraction(x) for x in self.lower)
            if len(low) != len(obj):
                raise ValueError("lower bounds must match the number of variables")
            object.__setattr__(self, "lower", low)

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class Optimal:
    x: tuple
    value: Fraction
    basis: tuple  # standard-form column per kept row
    rows: tuple  # indices of constraint rows kept after phase one
    pivots: int = 0


@dataclass(frozen=True)
class Infeasible:
    pass


@dataclass(frozen=True)
class Unbounded:
    pass


def _lcm_den(values) -> int:
    den = 1
    for v in values:
        d = v.denominator
        den = den * d // math.gcd(den, d)
    return den


@dataclass
class _Standard:
    rows: list = field(default_factory=list)  # integer rows incl. rhs at the end
    basis: list = field(default_factory=list)
    ncols: int = 0
    nart: int = 0
    art_start: int = 0
    art_rows: list = field(default_factory=list)


def _standard_form(lp: LinearProgram) -> _Standard:
    n = lp.num_vars
    low = lp.lower or (Fraction(0),) * n
    prepared = []
    for con in lp.constraints:
        rhs = con.rhs - sum((c * low[k] for k, c in con.coeffs), Fraction(0))
        coeffs = dict(con.coeffs)
        rel = con.relation
        if rhs < 0:
            coeffs = {k: -c for k, c in coeffs.items()}
            rhs = -rhs
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        scale = _lcm_den(list(coeffs.values()) + [rhs])
        prepared.append(({k: int(c * scale) for k, c in coeffs.items()}, rel, int(rhs * scale)))
    m = len(prepared)
    n_slack = sum(1 for _, rel, _ in prepared if rel != "=")
    n_art = sum(1 for _, rel, _ in prepared if rel != "<=")
    ncols = n + n_slack + n_art
    sf = _Standard(ncols=ncols, nart=n_art, art_start=n + n_slack)
    s_col = n
    a_col = n + n_slack
    for coeffs, rel, rhs in prepared:
        row = [0] * (ncols + 1)
        for k, c in coeffs.items():
            row[k] = c
        row[-1] = rhs
        if rel == "<=":
            row[s_col] = 1
            sf.basis.append(s_col)
            s_col += 1
        else:
            if rel == ">=":
                row[s_col] = -1
                s_col += 1
            row[a_col] = 1
            sf.basis.append(a_col)
            sf.art_rows.append(len(sf.rows))
            a_col += 1
        sf.rows.append(row)
    assert len(sf.rows) == m
    return sf


class _Tableau:
    def __init__(self, rows, basis):
        self.T = rows
        self.basis = basis
        self.D = 1
        self.R = None
        self.pivots = 0

    def pivot(self, r, c):
        T = self.T
        prow = T[r]
        p = prow[c]
        D = self.D
        nz = [k for k, y in enumerate(prow) if y]
        for i in range(len(T)):
            if i == r:
                continue
            row = T[i]
            f = row[c]
            if f == 0:
                if p != D:
                    T[i] = [x * p // D for x in row]
            else:
                new = [x * p for x in row] if p != 1 else list(row)
                for k in nz:
                    new[k] -= f * prow[k]
                T[i] = [x // D for x in new] if D != 1 else new
        R = self.R
        f = R[c]
        new = [x * p for x in R]
        if f:
            for k in nz:
                new[k] -= f * prow[k]
        self.R = [x // D for x in new] if D != 1 else new
        self.basis[r] = c
        self.D = p
        if p < 0:
            self.T = [[-x for x in row] for row in self.T]
            self.R = [-x for x in self.R]
            self.D = -p
        self.pivots += 1

    def run(self, allowed_cols):
        """Bland's rule until optimal (True) or unbounded (False)."""
        while True:
            R = self.R
            enter = next((j for j in allowed_cols if R[j] > 0), None)
            if enter is None:
                return True
            best = None
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > 0:
                    if best is None:
                        best = i
                        continue
                    # compare row[-1]/a with T[best][-1]/T[best][enter]
                    lhs = row[-1] * self.T[best][enter]
                    rhs = self.T[best][-1] * a
                    if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                        best = i
            if best is None:
                return False
            self.pivot(best, enter)


def simplex_solve(lp: LinearProgram):
    """Exact optimum at a vertex, or ``Infeasible()`` / ``Unbounded()``."""
    n = lp.num_vars
    sf = _standard_form(lp)
    tab = _Tableau(sf.rows, sf.basis)
    ncols = sf.ncols
    kept = list(range(len(sf.rows)))
    if sf.nart:
        R = [0] * (ncols + 1)
        for i in sf.art_rows:
            row = sf.rows[i]
            for k in range(ncols + 1):
                R[k] += row[k]
        for k in range(sf.art_start, ncols):
            R[k] = 0
        tab.R = R
        tab.run(range(ncols))
        if tab.R[-1] != 0:
            return Infeasible()
        # drive remaining artificials out of the basis
        r = 0
        while r < len(tab.T):
            if tab.basis[r] >= sf.art_start:
                row = tab.T[r]
                col = next((k for k in range(sf.art_start) if row[k] != 0), None)
                if col is None:
                    del tab.T[r]
                    del tab.basis[r]
                    del kept[r]
                    continue
                tab.pivot(r, col)
            r += 1
    obj_scale = _lcm_den(lp.objective) if lp.objective else 1
    c = [int(x * obj_scale) for x in lp.objective] + [0] * (ncols - n)
    D = tab.D
    R = [cj * D for cj in c] + [0]
    for i, row in enumerate(tab.T):
        cb = c[tab.basis[i]]
        if cb:
            for k in range(ncols + 1):
                R[k] -= cb * row[k]
    for k in range(sf.art_start, ncols):
        R[k] = 0
    tab.R = R
    if not tab.run(range(sf.art_start)):
        return Unbounded()
    low = lp.lower or (Fraction(0),) * n
    x = [Fraction(0)] * n
    for i, col in enumerate(tab.basis):
        if col < n:
            x[col] = Fraction(tab.T[i][-1], tab.D)
    x = [xi + lo for xi, lo in zip(x, low)]
    value = Fraction(-tab.R[-1], tab.D * obj_scale) + sum((cj * lo for cj, lo in zip(lp.objective, low)), Fraction(0))
    return Optimal(tuple(x), value, tuple(tab.basis), tuple(kept), tab.pivots)


def replay_basis(lp: LinearProgram, basis: Sequence[int], rows: Sequence[int]):
    """Recompute (x, objective) from a basis by exact Gaussian elimination."""
    sf = _standard_form(lp)
    n = lp.num_vars
    m = len(rows)
    A = [[Fraction(sf.rows[r][c]) for c in basis] + [Fraction(sf.rows[r][-1])] for r in rows]
    for col in range(m):
        piv = next(r for r in range(col, m) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [v / pv for v in A[col]]
        for r in range(m):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    low = lp.lower or (Fraction(0),) * n
    x = list(low)
    for k, col in enumerate(basis):
        if col < n:
            x[col] += A[k][-1]
    value = sum((c * xi for c, xi in zip(lp.objective, x)), Fraction(0))
    return tuple(x), value


class WarmState:
    """Optimal tableau of a :class:`RhsFamily` member, reusable as a warm start."""

    __slots__ = ("T", "R", "rhs", "basis", "D", "x", "value", "pivots")


class RhsFamily:
    """LPs ``max c.x  s.t.  A x <= b, x >= 0`` sharing c and A, differing in b.

    The first member is solved by primal simplex from the slack basis (needs
    b >= 0). Later members restart from any earlier optimal tableau: the basis
    stays dual feasible when only b changes, so a few dual simplex pivots
    restore optimality.
    """

    def __init__(self, objective, rows):
        self.n = len(objective)
        self.m = len(rows)
        self.obj = [Fraction(c) for c in objective]
        self.scale = []
        self.A = []
        for i, row in enumerate(rows):
            coeffs = {k: Fraction(c) for k, c in (row.items() if isinstance(row, Mapping) else enumerate(row))}
            s = _lcm_den(coeffs.values())
            self.scale.append(s)
            full = [0] * (self.n + self.m)
            for k, c in coeffs.items():
                full[k] = int(c * s)
            full[self.n + i] = 1
            self.A.append(full)
        oscale = _lcm_den(self.obj)
        self.c = [int(x * oscale) for x in self.obj] + [0] * self.m

    def _finish(self, st):
        x = [Fraction(0)] * self.n
        for i, col in enumerate(st.basis):
            if col < self.n:
                x[col] = st.rhs[i]
        st.x = tuple(x)
        st.value = sum((c * v for c, v in zip(self.obj, x) if v), Fraction(0))
        return st

    @staticmethod
    def _pivot(st, r, c):
        T = st.T
        prow = T[r]
        p = prow[c]
        D = st.D
        nz = [k for k, y in enumerate(prow) if y]
        real_p = Fraction(p, D)
        rhs_r = st.rhs[r] / real_p
        for i in range(len(T)):
            if i == r:
                continue
            row = T[i]
            f = row[c]
            if f:
                st.rhs[i] -= Fraction(f, D) * rhs_r
                new = [x * p for x in row]
                for k in nz:
                    new[k] -= f * prow[k]
                T[i] = [x // D for x in new]
            elif p != D:
                T[i] = [x * p // D for x in row]
        st.rhs[r] = rhs_r
        f = st.R[c]
        new = [x * p for x in st.R]
        if f:
            for k in nz:
                new[k] -= f * prow[k]
        st.R = [x // D for x in new]
        st.basis[r] = c
        st.D = p
        if p < 0:
            st.T = [[-x for x in row] for row in st.T]
            st.R = [-x for x in st.R]
            st.D = -p
        st.pivots += 1

    def solve_root(self, b):
        st = WarmState()
        st.T = [list(r) for r in self.A]
        st.R = list(self.c)
        st.rhs = [Fraction(bi) * s for bi, s in zip(b, self.scale)]
        if any(v < 0 for v in st.rhs):
            raise ValueError("root right-hand side must be non-negative")
        st.basis = [self.n + i for i in range(self.m)]
        st.D = 1
        st.pivots = 0
        ncols = self.n + self.m
        while True:
            enter = next((j for j in range(ncols) if st.R[j] > 0), None)
            if enter is None:
                return self._finish(st)
            best = None
            for i, row in enumerate(st.T):
                a = row[enter]
                if a > 0:
                    if best is None:
                        best = i
                        continue
                    lhs = st.rhs[i] * st.T[best][enter]
                    rhs = st.rhs[best] * a
                    if lhs < rhs or (lhs == rhs and st.basis[i] < st.basis[best]):
                        best = i
            if best is None:
                return Unbounded()
            self._pivot(st, best, enter)

    def resolve(self, start: WarmState, b):
        """Optimal state for right-hand side ``b``, or None when infeasible."""
        st = WarmState()
        st.T = [list(r) for r in start.T]
        st.R = list(start.R)
        st.basis = list(start.basis)
        st.D = start.D
        st.pivots = 0
        n, D = self.n, start.D
        sb = [Fraction(bi) * s for bi, s in zip(b, self.scale)]
        st.rhs = [
            sum((row[n + k] * sb[k] for k in range(self.m) if row[n + k] and sb[k]), Fraction(0)) / D
            for row in st.T
        ]
        ncols = n + self.m
        while True:
            bad = [i for i, v in enumerate(st.rhs) if v < 0]
            if not bad:
                return self._finish(st)
            r = min(bad, key=lambda i: st.basis[i])
            row = st.T[r]
            enter = None
            for j in range(ncols):
                a = row[j]
                if a < 0:
                    # ratio R_j / a, both non-positive; keep the smallest
                    if enter is None or st.R[j] * row[enter] < st.R[enter] * a:
                        enter = j
            if enter is None:
                return None
            self._pivot(st, r, enter)
