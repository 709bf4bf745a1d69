"""Named instances from the literature on stable fractional matchings,
random instance families, and a builder for gadget-style constructions."""
from __future__ import annotations

import math
import random
from fractions import Fraction

from .core import ONE, ZERO, FractionalMatching, IntegralMatching, SmcInstance, rational
from .errors import ParameterError


class InstanceBuilder:
    """Collects named agents and "a-b" edges, then pads to a square instance.

    Dummy agents (all-zero valuations) are appended after every named agent
    on the short side.
    """

    def __init__(self):
        self.men: list[str] = []
        self.women: list[str] = []
        self._man_index: dict[str, int] = {}
        self._woman_index: dict[str, int] = {}
        self.edges: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}

    def man(self, name: str) -> int:
        if name in self._man_index:
            return self._man_index[name]
        self._man_index[name] = len(self.men)
        self.men.append(name)
        return self._man_index[name]

    def woman(self, name: str) -> int:
        if name in self._woman_index:
            return self._woman_index[name]
        self._woman_index[name] = len(self.women)
        self.women.append(name)
        return self._woman_index[name]

    def edge(self, man: str, woman: str, his_value, her_value):
        i, j = self.man(man), self.woman(woman)
        if (i, j) in self.edges:
            raise ParameterError(f"edge ({man},{woman}) defined twice")
        self.edges[(i, j)] = (Fraction(his_value), Fraction(her_value))
        return i, j

    def man_index(self, name: str) -> int:
        return self._man_index[name]

    def woman_index(self, name: str) -> int:
        return self._woman_index[name]

    def cell(self, man: str, woman: str) -> tuple[int, int]:
        return self._man_index[man], self._woman_index[woman]

    def build(self) -> SmcInstance:
        men, women = list(self.men), list(self.women)
        n = max(len(men), len(women))
        men += [f"dummy_m{k + 1}" for k in range(n - len(self.men))]
        women += [f"dummy_w{k + 1}" for k in range(n - len(self.women))]
        U = [[ZERO] * n for _ in range(n)]
        V = [[ZERO] * n for _ in range(n)]
        for (i, j), (a, b) in self.edges.items():
            U[i][j], V[i][j] = a, b
        return SmcInstance(U, V, men + women)

    def matching(self, weights: dict, n: int) -> FractionalMatching:
        """Fractional matching from {(man name, woman name): weight}."""
        rows = [[ZERO] * n for _ in range(n)]
        for (m, w), x in weights.items():
            i, j = self.cell(m, w)
            rows[i][j] += Fraction(x)
        return FractionalMatching(rows)


def gen_fig1():
    """Three-by-three example where a fractional matching beats both stable
    integral ones; the witness mixes the women-optimal matching with the
    identity half and half."""
    U = [[0, 1, 2], [2, 1, 0], [1, 0, 3]]
    V = [[3, 0, 1], [0, 1, 2], [1, 2, 0]]
    inst = SmcInstance(U, V)
    women_optimal = IntegralMatching([(0, 0), (1, 2), (2, 1)])
    identity = IntegralMatching([(0, 0), (1, 1), (2, 2)])
    half = Fraction(1, 2)
    return inst, FractionalMatching.mix(3, [(half, women_optimal), (half, identity)])


def gen_gap(alpha, k: int):
    """Ternary chain whose best stable integral welfare is far below the
    best stable fractional welfare.

    Men are m_i, e^1_i, e^2_i, e^3_i and women w_i, f^1_i, f^2_i, f^3_i; one
    dummy woman squares the instance.
    """
    a = rational(alpha)
    if a < 2:
        raise ParameterError("alpha must be at least 2")
    if int(k) != k or k < 2:
        raise ParameterError("k must be an integer >= 2")
    k = int(k)
    b = InstanceBuilder()
    for i in range(1, k + 1):
        b.man(f"m_{i}")
    for i in range(1, k):
        b.man(f"e^1_{i}")
    for i in range(1, k):
        b.man(f"e^2_{i}")
    for i in range(2, k + 1):
        b.man(f"e^3_{i}")
    for i in range(1, k + 1):
        b.woman(f"w_{i}")
    for i in range(2, k):
        b.woman(f"f^1_{i}")
    for i in range(2, k + 1):
        b.woman(f"f^2_{i}")
    for i in range(2, k + 1):
        b.woman(f"f^3_{i}")
    for i in range(1, k + 1):
        b.edge(f"m_{i}", f"w_{i}", 0, a)
    for i in range(2, k + 1):
        b.edge(f"m_{i}", f"f^3_{i}", 0, a)
        b.edge(f"e^3_{i}", f"f^2_{i}", a, 0)
        b.edge(f"m_{i}", f"f^2_{i}", 1, 1)
    for i in range(2, k):
        b.edge(f"e^1_{i}", f"f^1_{i}", 0, a)
    for i in range(1, k):
        b.edge(f"m_{i + 1}", f"w_{i}", a, 0)
        b.edge(f"e^2_{i}", f"w_{i}", a, 0)
        b.edge(f"e^1_{i}", f"w_{i}", 1, 1)
    inst = b.build()
    inv = 1 / a
    rest = 1 - 2 * inv
    weights = {}
    for i in range(1, k + 1):
        weights[(f"m_{i}", f"w_{i}")] = inv
    for i in range(1, k):
        weights[(f"e^2_{i}", f"w_{i}")] = rest
        weights[(f"m_{i + 1}", f"w_{i}")] = inv
    for i in range(2, k + 1):
        weights[(f"m_{i}", f"f^3_{i}")] = rest
        weights[(f"e^3_{i}", f"f^2_{i}")] = ONE
    for i in range(2, k):
        weights[(f"e^1_{i}", f"f^1_{i}")] = ONE
    return inst, b.matching(weights, inst.n)


def gap_witness_welfare(alpha, k: int) -> Fraction:
    a = rational(alpha)
    return 4 * k * (a - Fraction(1, 2)) - 5 * a + 3


def gap_integral_bound(alpha, k: int) -> Fraction:
    return 4 * k - 6 + rational(alpha)


def gen_nonconvex():
    """Binary instance with two stable matchings whose midpoint is unstable."""
    U = [[0, 0, 1], [1, 1, 0], [0, 1, 0]]
    V = [[0, 1, 0], [0, 1, 1], [1, 0, 0]]
    first = IntegralMatching([(0, 2), (1, 0), (2, 1)])
    second = IntegralMatching([(0, 1), (1, 2), (2, 0)])
    return SmcInstance(U, V), first, second


def unstable_support_matchings():
    """The six perfect matchings of the three-agent ternary example, in the
    order used by the construction (identity first)."""
    return [
        IntegralMatching([(0, 0), (1, 1), (2, 2)]),
        IntegralMatching([(0, 1), (1, 2), (2, 0)]),
        IntegralMatching([(0, 2), (1, 0), (2, 1)]),
        IntegralMatching([(0, 0), (1, 2), (2, 1)]),
        IntegralMatching([(0, 2), (1, 1), (2, 0)]),
        IntegralMatching([(0, 1), (1, 0), (2, 2)]),
    ]


def gen_unstable_support(alpha=3):
    """Ternary instance whose optimal stable matching mixes only unstable
    integral matchings."""
    a = rational(alpha)
    if a < 3:
        raise ParameterError("alpha must be at least 3")
    U = [[1, 0, 0], [0, 1, a], [a, 0, 1]]
    V = [[1, 0, a], [a, 1, 0], [0, 0, 1]]
    inst = SmcInstance(U, V)
    ms = unstable_support_matchings()
    mu = FractionalMatching.mix(3, [
        (1 / (a * (a - 1)), ms[1]),
        (1 / a, ms[2]),
        ((a - 2) / (a - 1), ms[4]),
    ])
    return inst, mu


def support_lb_alpha(n: int, rho) -> int:
    r = rational(rho)
    bound = max(Fraction(n + 2), Fraction(2 * n) / (r * (n - 1)))
    return math.floor(bound) + 1


def support_lb_matchings(n: int):
    """(optimal matching, [the (n+1)/2 swapped variants]) for the support family."""
    half = (n - 1) // 2
    base = {0: 0}
    for i in range(1, half + 1):
        base[2 * i - 1] = 2 * i      # m_{2i} -> w_{2i+1}
        base[2 * i] = 2 * i - 1      # m_{2i+1} -> w_{2i}
    best = IntegralMatching(base.items())
    variants = []
    for i in range(1, half + 1):
        p = dict(base)
        p[0], p[2 * i - 1] = 2 * i, 0
        variants.append(IntegralMatching(p.items()))
    p = dict(base)
    p[0], p[n - 1] = n - 2, 0
    variants.append(IntegralMatching(p.items()))
    return best, variants


def gen_support_lb(n: int, rho=1):
    """Ternary family where every nearly optimal stable matching needs a
    support growing linearly in n."""
    if int(n) != n or n < 3 or n % 2 == 0:
        raise ParameterError("n must be an odd integer >= 3")
    r = rational(rho)
    if not 0 < r <= 1:
        raise ParameterError("rho must lie in (0, 1]")
    n = int(n)
    a = Fraction(support_lb_alpha(n, r))
    U = [[ZERO] * n for _ in range(n)]
    V = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        U[i][i] = V[i][i] = ONE
    for i in range(1, (n - 1) // 2 + 1):
        U[2 * i - 1][0] = a
        U[2 * i][2 * i - 1] = a
        V[2 * i - 1][2 * i] = a
    V[n - 1][0] = a
    inst = SmcInstance(U, V)
    best, variants = support_lb_matchings(n)
    terms = [(1 / a, m) for m in variants]
    terms.append((1 - Fraction(n + 1) / (2 * a), best))
    return inst, FractionalMatching.mix(n, terms)


def gen_2x2_example() -> SmcInstance:
    return SmcInstance([[2, 0], [1, 0]], [[0, 0], [1, 2]])


def appendix_b_matchings():
    return [
        IntegralMatching([(0, 0), (1, 1), (2, 2)]),
        IntegralMatching([(0, 2), (1, 0), (2, 1)]),
        IntegralMatching([(0, 1), (1, 2), (2, 0)]),
    ]


def gen_appendixB():
    """Cyclic 3x3 instance: the uniform mix of three stable matchings is
    stable but not strongly stable."""
    U = [[2, 1, 0], [0, 2, 1], [1, 0, 2]]
    V = [[0, 1, 2], [2, 0, 1], [1, 2, 0]]
    third = Fraction(1, 3)
    mu = FractionalMatching.mix(3, [(third, m) for m in appendix_b_matchings()])
    return SmcInstance(U, V), mu


FAMILIES = ("binary", "ternary", "symmetric-ternary", "general")


def gen_random(n: int, family: str = "general", seed=0, alpha=3, max_value: int = 5) -> SmcInstance:
    """Random instance; deterministic in ``seed``.

    ``general`` draws p/q with 0 <= p <= max_value and 1 <= q <= 10.
    """
    if n < 1:
        raise ParameterError("n must be positive")
    rng = random.Random(seed)
    a = rational(alpha)
    if family in ("ternary", "symmetric-ternary") and a <= 1:
        raise ParameterError("alpha must exceed 1")
    if family == "binary":
        draw = lambda: Fraction(rng.randint(0, 1))  # noqa: E731
    elif family in ("ternary", "symmetric-ternary"):
        values = (ZERO, ONE, a)
        draw = lambda: rng.choice(values)  # noqa: E731
    elif family == "general":
        draw = lambda: Fraction(rng.randint(0, max_value), rng.randint(1, 10))  # noqa: E731
    else:
        raise ParameterError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    U = [[draw() for _ in range(n)] for _ in range(n)]
    V = U if family == "symmetric-ternary" else [[draw() for _ in range(n)] for _ in range(n)]
    return SmcInstance(U, V)


def random_complete_matching(n: int, seed=0, terms: int = 3, max_den: int = 6) -> FractionalMatching:
    """Random convex mix of permutation matrices (always complete)."""
    rng = random.Random(seed)
    raw = [Fraction(rng.randint(1, max_den)) for _ in range(terms)]
    total = sum(raw)
    parts = []
    for w in raw:
        perm = list(range(n))
        rng.shuffle(perm)
        parts.append((w / total, IntegralMatching(enumerate(perm))))
    return FractionalMatching.mix(n, parts)
