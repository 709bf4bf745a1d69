"""Ordinal stability notions for fractional matchings: strong, fractional
and ex-post stability. Comparisons use the raw valuations as weak orders."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import ONE, SmcInstance, as_fractional
from .decompose import BvnSupport
from .lp import _check_cap
from .oracle import stable_integral_matchings
from .simplex import Constraint, LinearProgram, Optimal, simplex_solve


@dataclass(frozen=True)
class StrongViolation:
    """Man and woman who both engage with agents they rank below each other."""

    man: int
    his_worse_woman: int
    rival_man: int
    woman: int

    def as_tuple(self):
        return (self.man, self.his_worse_woman, self.rival_man, self.woman)


@dataclass(frozen=True)
class FractionalViolation:
    man: int
    woman: int
    value: Fraction


@dataclass(frozen=True)
class NotExPost:
    stable_matchings_considered: int

    def __bool__(self):
        return False


def check_strong_stability(inst: SmcInstance, mu) -> list:
    fm = as_fractional(mu, inst.n)
    n = inst.n
    U, V = inst.U, inst.V
    out = []
    for m in range(n):
        for w2 in range(n):
            if fm.weights[m][w2] <= 0:
                continue
            for w in range(n):
                if U[m][w] <= U[m][w2]:
                    continue
                for m2 in range(n):
                    if fm.weights[m2][w] > 0 and V[m][w] > V[m2][w]:
                        out.append(StrongViolation(m, w2, m2, w))
    return out


def fractional_stability_value(inst: SmcInstance, mu, man: int, woman: int) -> Fraction:
    fm = as_fractional(mu, inst.n)
    U, V, W = inst.U, inst.V, fm.weights
    n = inst.n
    his = sum((W[man][j] for j in range(n) if U[man][j] >= U[man][woman]), Fraction(0))
    hers = sum((W[i][woman] for i in range(n) if V[i][woman] >= V[man][woman]), Fraction(0))
    return his + hers - W[man][woman]


def check_fractional_stability(inst: SmcInstance, mu) -> list:
    out = []
    for i in range(inst.n):
        for j in range(inst.n):
            val = fractional_stability_value(inst, mu, i, j)
            if val < 1:
                out.append(FractionalViolation(i, j, val))
    return out


def check_expost_stability(inst: SmcInstance, mu, cap=None):
    """Express ``mu`` as a convex combination of stable integral matchings.

    Returns a :class:`BvnSupport` over stable matchings, or :class:`NotExPost`.
    Only matchings inside the support of ``mu`` can appear, and an agent may
    be left unmatched only if ``mu`` leaves it slack.
    """
    n = inst.n
    _check_cap(n, cap, "expost")
    fm = as_fractional(mu, n)
    rows, cols = fm.row_sums(), fm.col_sums()
    candidates = stable_integral_matchings(
        inst,
        allowed=lambda i, j: fm.weights[i][j] > 0,
        complete_only=fm.is_complete,
        men_may_idle=[s < 1 for s in rows],
        women_may_idle=[s < 1 for s in cols],
    )
    if not candidates:
        return NotExPost(0)
    k = len(candidates)
    cons = [Constraint({c: 1 for c in range(k)}, "=", ONE)]
    for i, j in fm.support():
        using = {c: 1 for c, mt in enumerate(candidates) if (i, j) in mt.pairs}
        cons.append(Constraint(using, "=", fm.weights[i][j]))
    res = simplex_solve(LinearProgram([0] * k, cons))
    if not isinstance(res, Optimal):
        return NotExPost(k)
    terms = tuple((lam, candidates[c]) for c, lam in enumerate(res.x) if lam > 0)
    return BvnSupport(terms)
