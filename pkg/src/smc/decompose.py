"""Birkhoff-von Neumann decomposition of complete fractional matchings."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .bipartite import lex_min_perfect_matching
from .core import (
    ONE,
    ZERO,
    FractionalMatching,
    IntegralMatching,
    SmcInstance,
    _read_text,
    format_rational,
    rational,
)
from .errors import NotDoublyStochastic, ParseError


@dataclass(frozen=True)
class BvnSupport:
    """Convex weights over distinct integral matchings."""

    terms: tuple  # of (Fraction, IntegralMatching)

    def __len__(self):
        return len(self.terms)

    def reconstruct(self, n: int) -> FractionalMatching:
        return FractionalMatching.mix(n, self.terms)


def bvn_decompose(mu: FractionalMatching) -> BvnSupport:
    """Greedy decomposition: repeatedly peel off the lexicographically smallest
    perfect matching on the positive cells, weighted by its smallest entry."""
    n = mu.n
    for i, s in enumerate(mu.row_sums()):
        if s != 1:
            raise NotDoublyStochastic(f"row {i + 1} sums to {format_rational(s)}")
    for j, s in enumerate(mu.col_sums()):
        if s != 1:
            raise NotDoublyStochastic(f"column {j + 1} sums to {format_rational(s)}")
    rest = [list(row) for row in mu.weights]
    terms = []
    remaining = ONE
    while remaining > 0:
        adj = [[j for j in range(n) if rest[i][j] > 0] for i in range(n)]
        perm = lex_min_perfect_matching(n, adj)
        if perm is None:  # cannot happen for a doubly stochastic residual
            raise NotDoublyStochastic("residual has no perfect matching")
        lam = min(rest[i][perm[i]] for i in range(n))
        for i in range(n):
            rest[i][perm[i]] -= lam
        remaining -= lam
        terms.append((lam, IntegralMatching(list(enumerate(perm)))))
    return BvnSupport(tuple(terms))


def support_size(mu: FractionalMatching) -> int:
    return len(bvn_decompose(mu))


def _fill(supplies, demands):
    """North-west corner transport plan between two equal-total vectors."""
    cells = {}
    a, b = list(supplies), list(demands)
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == 0:
            i += 1
            continue
        if b[j] == 0:
            j += 1
            continue
        x = min(a[i], b[j])
        cells[(i, j)] = cells.get((i, j), ZERO) + x
        a[i] -= x
        b[j] -= x
    return cells


def complete_with_dummies(inst: SmcInstance, mu: FractionalMatching):
    """Pad with zero-valued agents so that every row and column sums to 1.

    Uses ceil(total slack) dummies on each side. Welfare is unchanged since the
    dummies value everybody at zero.
    """
    n = mu.n
    row_slack = [1 - s for s in mu.row_sums()]
    col_slack = [1 - s for s in mu.col_sums()]
    total = sum(row_slack, ZERO)
    d = math.ceil(total)
    size = n + d
    rows = [[ZERO] * size for _ in range(size)]
    for i in range(n):
        rows[i][:n] = mu.weights[i]
    # real men's slack goes to dummy women, real women's slack to dummy men
    unit = [ONE] * d
    for (i, k), x in _fill(row_slack, unit).items():
        rows[i][n + k] = x
    for (j, k), x in _fill(col_slack, unit).items():
        rows[n + k][j] = x
    dummy_men_left = [1 - sum(rows[n + k][:n], ZERO) for k in range(d)]
    dummy_women_left = [1 - sum((rows[i][n + k] for i in range(n)), ZERO) for k in range(d)]
    for (a, b), x in _fill(dummy_men_left, dummy_women_left).items():
        rows[n + a][n + b] += x
    U = [list(r) + [ZERO] * d for r in inst.U] + [[ZERO] * size for _ in range(d)]
    V = [list(r) + [ZERO] * d for r in inst.V] + [[ZERO] * size for _ in range(d)]
    labels = None
    if inst.labels:
        labels = (
            list(inst.labels[:n]) + [f"dummy_m{k + 1}" for k in range(d)]
            + list(inst.labels[n:]) + [f"dummy_w{k + 1}" for k in range(d)]
        )
    return SmcInstance(U, V, labels), FractionalMatching(rows)


def dump_bvn(support: BvnSupport) -> str:
    lines = ["bvn v1"]
    for lam, m in support.terms:
        pairs = ";".join(f"({i + 1},{j + 1})" for i, j in m)
        lines.append(f"lambda={format_rational(lam)} pairs={pairs}")
    return "\n".join(lines) + "\n"


_TERM_RE = re.compile(r"^lambda=(\S+)\s+pairs=(.*)$")
_PAIR_RE = re.compile(r"^\((\d+),(\d+)\)$")


def load_bvn(source) -> BvnSupport:
    lines = [(k, ln.strip()) for k, ln in enumerate(_read_text(source).splitlines(), 1) if ln.strip()]
    if not lines or lines[0][1] != "bvn v1":
        raise ParseError("expected 'bvn v1' header", 1)
    terms = []
    for lineno, line in lines[1:]:
        m = _TERM_RE.match(line)
        if not m:
            raise ParseError(f"bad term line {line!r}", lineno)
        try:
            lam = rational(m.group(1))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        pairs = []
        for tok in filter(None, m.group(2).split(";")):
            pm = _PAIR_RE.match(tok.strip())
            if not pm:
                raise ParseError(f"bad pair {tok!r}", lineno)
            pairs.append((int(pm.group(1)) - 1, int(pm.group(2)) - 1))
        terms.append((lam, IntegralMatching(pairs)))
    return BvnSupport(tuple(terms))

