"""Combinatorial algorithms: deferred acceptance, exact max-weight matching,
the binary-valuation solver, the heavy/light approximation and the
epsilon-stable blend."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bipartite import max_weight_assignment
from .core import (
    ONE,
    ZERO,
    FractionalMatching,
    IntegralMatching,
    SmcInstance,
    check_epsilon,
    utilities,
    welfare_of_pairs,
)
from .errors import NotBinary


@dataclass(frozen=True)
class ApproxReport:
    matching: object  # IntegralMatching or FractionalMatching
    welfare: Fraction
    sigma_max: Fraction
    sigma_min: Fraction
    claimed_ratio: Fraction | None


def _sigmas(inst: SmcInstance):
    hi, lo = inst.sigma_max, inst.sigma_min
    return (hi or ZERO), (lo or ZERO)


def gale_shapley(inst: SmcInstance, proposing_side: str = "men", *,
                 acceptable=None, ternary_tiebreak: bool = False) -> IntegralMatching:
    """Deferred acceptance on the strict refinement of the weak orders.

    Ties are broken by ascending index, or first by larger U+V when
    ``ternary_tiebreak`` is set. ``acceptable(m, w)`` restricts which pairs
    may be formed; by default every pair is acceptable.
    """
    if proposing_side not in ("men", "women"):
        raise ValueError("proposing_side must be 'men' or 'women'")
    n = inst.n
    U, V = inst.U, inst.V
    men_side = proposing_side == "men"

    def key(prop, recv):
        m, w = (prop, recv) if men_side else (recv, prop)
        own = U[m][w] if men_side else V[m][w]
        tie = -(U[m][w] + V[m][w]) if ternary_tiebreak else 0
        return (-own, tie, recv)

    def recv_key(recv, prop):
        m, w = (prop, recv) if men_side else (recv, prop)
        own = V[m][w] if men_side else U[m][w]
        tie = -(U[m][w] + V[m][w]) if ternary_tiebreak else 0
        return (-own, tie, prop)

    def ok(prop, recv):
        if acceptable is None:
            return True
        return acceptable(prop, recv) if men_side else acceptable(recv, prop)

    prefs = [sorted((r for r in range(n) if ok(p, r)), key=lambda r, p=p: key(p, r)) for p in range(n)]
    nxt = [0] * n
    held = [None] * n  # receiver -> proposer
    free = list(range(n - 1, -1, -1))
    while free:
        p = free.pop()
        while nxt[p] < len(prefs[p]):
            r = prefs[p][nxt[p]]
            nxt[p] += 1
            cur = held[r]
            if cur is None:
                held[r] = p
                break
            if recv_key(r, p) < recv_key(r, cur):
                held[r] = p
                free.append(cur)
                break
    pairs = [(p, r) if men_side else (r, p) for r, p in enumerate(held) if p is not None]
    return IntegralMatching(pairs)


def max_weight_matching(weights, allowed=None) -> IntegralMatching:
    """Maximum total weight matching using only allowed cells.

    Exact over rationals. Among optimal matchings the lexicographically
    smallest assignment wins; cells of weight zero are left out of the result.
    """
    n = len(weights)
    w = [[Fraction(x) for x in row] for row in weights]
    if allowed is not None:
        w = [[x if allowed[i][j] else ZERO for j, x in enumerate(row)] for i, row in enumerate(w)]
    if any(x < 0 for row in w for x in row):
        raise ValueError("weights must be non-negative")
    assign = max_weight_assignment(w)
    return IntegralMatching([(i, j) for i, j in enumerate(assign) if w[i][j] > 0])


def binary_weights(inst: SmcInstance):
    gamma = 2 + Fraction(1, inst.n ** 2)

    def weight(a, b):
        if a == 1 and b == 1:
            return gamma
        return ONE if a + b == 1 else ZERO

    return [[weight(inst.U[i][j], inst.V[i][j]) for j in range(inst.n)] for i in range(inst.n)]


def solve_binary(inst: SmcInstance) -> ApproxReport:
    """Welfare-optimal stable matching for 0/1 valuations (always integral)."""
    if not inst.is_binary:
        raise NotBinary("instance has a valuation outside {0, 1}")
    m = max_weight_matching(binary_weights(inst))
    hi, lo = _sigmas(inst)
    return ApproxReport(m, welfare_of_pairs(inst, m), hi, lo, ONE)


def approx_heavy_light(inst: SmcInstance, ternary_tiebreak: bool = False) -> ApproxReport:
    n = inst.n
    heavy = gale_shapley(inst, "men", acceptable=inst.heavy, ternary_tiebreak=ternary_tiebreak)
    busy_m = {i for i, _ in heavy}
    busy_w = {j for _, j in heavy}
    allowed = [
        [i not in busy_m and j not in busy_w and not inst.heavy(i, j) for j in range(n)]
        for i in range(n)
    ]
    total = [[inst.U[i][j] + inst.V[i][j] for j in range(n)] for i in range(n)]
    light = max_weight_matching(total, allowed)
    m = IntegralMatching(list(heavy) + list(light))
    hi, lo = _sigmas(inst)
    alpha = inst.ternary_alpha
    if ternary_tiebreak and alpha is not None:
        ratio = max(Fraction(2), alpha)
    elif lo:
        ratio = 1 + hi / lo
    else:
        ratio = ONE
    return ApproxReport(m, welfare_of_pairs(inst, m), hi, lo, ratio)


def max_welfare_matching(inst: SmcInstance) -> IntegralMatching:
    n = inst.n
    return max_weight_matching([[inst.U[i][j] + inst.V[i][j] for j in range(n)] for i in range(n)])


def blend_eps_stable(inst: SmcInstance, epsilon) -> ApproxReport:
    """(1-eps) of the men-proposing stable matching plus eps of a welfare optimum."""
    eps = check_epsilon(epsilon, allow_one=True)
    n = inst.n
    stable = gale_shapley(inst, "men")
    best = max_welfare_matching(inst)
    mu = FractionalMatching.mix(n, [(1 - eps, stable), (eps, best)])
    hi, lo = _sigmas(inst)
    return ApproxReport(mu, utilities(inst, mu).welfare, hi, lo, (1 / eps) if eps else None)
