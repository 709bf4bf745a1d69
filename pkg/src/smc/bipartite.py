"""Exact bipartite matching helpers on square n x n graphs."""
from __future__ import annotations

import math
from fractions import Fraction


class _Matcher:
    """Kuhn-style matching with explicit man/woman maps."""

    def __init__(self, n, adj):
        self.n = n
        self.adj = adj
        self.of_man = [None] * n
        self.of_woman = [None] * n

    def try_path(self, start, allowed_man, allowed_woman, target=None):
        """Alternating path from ``start`` to a free woman (or to ``target``)."""
        parent = {}
        visited = set()
        stack = [(start, iter(self.adj[start]))]
        while stack:
            man, it = stack[-1]
            pushed = False
            for w in it:
                if w in visited or not allowed_woman(w):
                    continue
                visited.add(w)
                parent[w] = man
                owner = self.of_woman[w]
                end = (w == target) if target is not None else owner is None
                if end:
                    cur = w
                    while cur is not None:
                        m = parent[cur]
                        nxt = self.of_man[m]
                        self.of_man[m] = cur
                        self.of_woman[cur] = m
                        cur = nxt if m != start else None
                    return True
                if owner is not None and allowed_man(owner):
                    stack.append((owner, iter(self.adj[owner])))
                    pushed = True
                    break
            if not pushed:
                stack.pop()
        return False


def lex_min_perfect_matching(n: int, adj, initial=None):
    """Lexicographically smallest perfect matching, as a list woman-of-man.

    ``adj[i]`` lists the women adjacent to man i. Returns None when the graph
    has no perfect matching. ``initial`` may supply any perfect matching to
    start from.
    """
    adj = [sorted(set(a)) for a in adj]
    mt = _Matcher(n, adj)
    everyone = lambda _x: True  # noqa: E731
    if initial is not None:
        for i, j in enumerate(initial):
            mt.of_man[i] = j
            mt.of_woman[j] = i
    else:
        for i in range(n):
            if not mt.try_path(i, everyone, everyone):
                return None
    fixed_women = set()
    for i in range(n):
        for j in adj[i]:
            if j in fixed_women:
                continue
            if mt.of_man[i] == j:
                break
            # move i to j; j's owner must find a path to the woman i releases
            rival = mt.of_woman[j]
            freed = mt.of_man[i]
            saved_man, saved_woman = list(mt.of_man), list(mt.of_woman)
            mt.of_man[i] = j
            mt.of_woman[j] = i
            mt.of_woman[freed] = None
            mt.of_man[rival] = None
            ok = mt.try_path(
                rival,
                lambda m, i=i: m > i,
                lambda w, j=j: w not in fixed_women and w != j,
                target=freed,
            )
            if ok:
                break
            mt.of_man, mt.of_woman = saved_man, saved_woman
        fixed_women.add(mt.of_man[i])
    return list(mt.of_man)


def _hungarian_min(cost):
    """Min-cost perfect assignment on an integer matrix.

    Returns (assignment woman-of-man, row potentials, column potentials) with
    u[i] + v[j] <= cost[i][j] everywhere and equality on the assignment.
    """
    n = len(cost)
    inf = math.inf
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            row = cost[i0 - 1]
            ui0 = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assign = [0] * n
    for j in range(1, n + 1):
        assign[p[j] - 1] = j - 1
    return assign, u[1:], v[1:]


def max_weight_assignment(weights):
    """Lexicographically smallest maximum-weight perfect assignment.

    ``weights`` is a square matrix of non-negative rationals. Returns the list
    woman-of-man.
    """
    n = len(weights)
    if n == 0:
        return []
    fr = [[Fraction(x) for x in row] for row in weights]
    den = 1
    for row in fr:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    cost = [[-(x.numerator * (den // x.denominator)) for x in row] for row in fr]
    assign, u, v = _hungarian_min(cost)
    tight = [[j for j in range(n) if cost[i][j] - u[i] - v[j] == 0] for i in range(n)]
    return lex_min_perfect_matching(n, tight, initial=assign)
