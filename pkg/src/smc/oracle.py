"""Brute-force ground truth for small instances."""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from .core import (
    ONE,
    ZERO,
    IntegralMatching,
    SmcInstance,
    as_fractional,
    is_stable,
    utilities,
)
from .lp import _check_cap, solve_exact_thresh


def _partial(n, man, used, acc):
    if man == n:
        yield IntegralMatching(acc)
        return
    yield from _partial(n, man + 1, used, acc)
    for w in range(n):
        if w not in used:
            used.add(w)
            acc.append((man, w))
            yield from _partial(n, man + 1, used, acc)
            acc.pop()
            used.discard(w)


def _blocked(U, V, choice, partner, i) -> bool:
    """Does deciding man i create a blocking pair among settled agents?

    A man is settled once decided; a woman is settled once matched. Unmatched
    women are checked only when the whole assignment is known.
    """
    w = choice[i]
    ui = U[i][w] if w is not None else 0
    row = U[i]
    for j, m in enumerate(partner):
        if m is not None and m != i and ui < row[j] and V[m][j] < V[i][j]:
            return True
    if w is not None:
        vw = V[i][w]
        for k in range(i):
            ck = choice[k]
            uk = U[k][ck] if ck is not None else 0
            if V[k][w] > vw and uk < U[k][w]:
                return True
    return False


def enumerate_integral(inst: SmcInstance, complete_only: bool = True, cap=None):
    """Yield integral matchings in lexicographic order.

    Complete matchings come from permutations of the women. Partial
    enumeration decides each man in turn, "unmatched" before any woman.
    """
    n = inst.n
    if complete_only:
        _check_cap(n, cap, "integral")
        for perm in permutations(range(n)):
            yield IntegralMatching(list(enumerate(perm)))
    else:
        _check_cap(n, cap, "partial")
        yield from _partial(n, 0, set(), [])


def stable_integral_matchings(inst: SmcInstance, allowed=None, complete_only=True,
                              men_may_idle=None, women_may_idle=None):
    """All stable integral matchings, found by backtracking with early pruning.

    ``allowed(i, j)`` restricts the cells a matching may use. The optional
    idle masks say which agents may stay unmatched when ``complete_only``
    is false.
    """
    n = inst.n
    U, V = inst.U, inst.V
    ok = allowed or (lambda i, j: True)
    man_idle = men_may_idle or [True] * n
    woman_idle = women_may_idle or [True] * n
    partner = [None] * n  # woman -> man
    choice = [None] * n  # man -> woman or None
    found = []

    def go(i):
        if i == n:
            pairs = [(m, w) for m, w in enumerate(choice) if w is not None]
            if any(partner[j] is None and not woman_idle[j] for j in range(n)):
                return
            mt = IntegralMatching(pairs)
            if is_stable(inst, mt):
                found.append(mt)
            return
        if not complete_only and man_idle[i]:
            choice[i] = None
            if not _blocked(U, V, choice, partner, i):
                go(i + 1)
        for j in range(n):
            if partner[j] is None and ok(i, j):
                choice[i], partner[j] = j, i
                if not _blocked(U, V, choice, partner, i):
                    go(i + 1)
                partner[j] = None
        choice[i] = None

    go(0)
    return found


def best_stable_integral(inst: SmcInstance, cap=None):
    """Welfare-maximal stable integral matching by branch and bound.

    Only complete matchings are searched: with non-negative valuations any
    stable matching extends to a complete one that is still stable and has
    no less welfare. Ties go to the lexicographically first matching.
    """
    n = inst.n
    _check_cap(n, cap, "integral")
    U, V = inst.U, inst.V
    total = [[U[i][j] + V[i][j] for j in range(n)] for i in range(n)]
    partner = [None] * n
    choice = [None] * n
    best = [None, Fraction(-1)]

    def go(i, acc):
        if i == n:
            if acc > best[1]:
                best[0], best[1] = list(choice), acc
            return
        free = [j for j in range(n) if partner[j] is None]
        bound = acc + sum(max(total[k][j] for j in free) for k in range(i, n))
        if bound <= best[1]:
            return
        for j in free:
            choice[i], partner[j] = j, i
            if not _blocked(U, V, choice, partner, i):
                go(i + 1, acc + total[i][j])
            partner[j] = None
        choice[i] = None

    go(0, ZERO)
    return IntegralMatching(list(enumerate(best[0]))), best[1]


def rho_efficiency(inst: SmcInstance, mu, epsilon=0, cap=None) -> Fraction:
    """Welfare of ``mu`` relative to the optimal (epsilon-)stable fractional welfare."""
    w = utilities(inst, as_fractional(mu, inst.n)).welfare
    opt = solve_exact_thresh(inst, epsilon, cap=cap).profile.welfare
    if opt == 0:
        return ONE if w == 0 else ZERO
    return w / opt
