"""Instance and matching model, utilities, stability checks and text formats.

All numbers are ``fractions.Fraction``. Agents are indexed from 0 in the
API; text formats and human-readable names (``m1``, ``w1``) count from 1.
"""
from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatch,
    EpsilonOutOfRange,
    InvalidMatching,
    NegativeValuation,
    ParseError,
)

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def rational(value) -> Fraction:
    """Convert an int, Fraction or ``p/q`` string to a Fraction.

    Floats and decimal strings are rejected so that no rounding can sneak in.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL_RE.match(text):
            raise ValueError(f"not an exact rational: {value!r}")
        num, _, den = text.partition("/")
        if den and int(den) == 0:
            raise ValueError(f"zero denominator: {value!r}")
        return Fraction(int(num), int(den) if den else 1)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def check_epsilon(epsilon, allow_one: bool = False) -> Fraction:
    eps = rational(epsilon)
    upper_ok = eps <= 1 if allow_one else eps < 1
    if eps < 0 or not upper_ok:
        bound = "[0,1]" if allow_one else "[0,1)"
        raise EpsilonOutOfRange(f"epsilon {format_rational(eps)} is outside {bound}")
    return eps


def _matrix(rows, n=None, name="matrix") -> tuple[tuple[Fraction, ...], ...]:
    out = tuple(tuple(rational(x) for x in row) for row in rows)
    size = len(out) if n is None else n
    if len(out) != size or any(len(row) != size for row in out):
        raise DimensionMismatch(f"{name} must be {size}x{size}")
    return out


@dataclass(frozen=True)
class SmcInstance:
    """n men and n women with valuation matrices.

    ``U[i][j]`` is what man i gets from woman j, ``V[i][j]`` is what woman j
    gets from man i. ``labels`` optionally names the men followed by the women.
    """

    U: tuple
    V: tuple
    labels: tuple | None = None

    def __post_init__(self):
        U = _matrix(self.U, name="U")
        V = _matrix(self.V, len(U), name="V")
        if len(U) == 0:
            raise DimensionMismatch("an instance needs at least one agent per side")
        for name, mat in (("U", U), ("V", V)):
            for i, row in enumerate(mat):
                for j, x in enumerate(row):
                    if x < 0:
                        raise NegativeValuation(f"{name}[{i}][{j}] = {format_rational(x)} is negative")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != 2 * len(U):
                raise DimensionMismatch("labels must name n men followed by n women")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.U)

    def man_name(self, i: int) -> str:
        return self.labels[i] if self.labels else f"m{i + 1}"

    def woman_name(self, j: int) -> str:
        return self.labels[self.n + j] if self.labels else f"w{j + 1}"

    def values(self) -> set:
        return {x for mat in (self.U, self.V) for row in mat for x in row}

    @property
    def is_binary(self) -> bool:
        return self.values() <= {0, 1}

    @property
    def ternary_alpha(self) -> Fraction | None:
        """The α for which every entry lies in {0, 1, α}, if there is exactly one."""
        extra = self.values() - {0, 1}
        if len(extra) == 1:
            (alpha,) = extra
            if alpha > 1:
                return alpha
        return None

    def is_ternary(self, alpha=None) -> bool:
        if alpha is None:
            return self.ternary_alpha is not None
        alpha = rational(alpha)
        return alpha > 1 and self.values() <= {0, 1, alpha}

    @property
    def is_symmetric(self) -> bool:
        return self.U == self.V

    @property
    def sigma_max(self) -> Fraction | None:
        positive = [x for x in self.values() if x > 0]
        return max(positive) if positive else None

    @property
    def sigma_min(self) -> Fraction | None:
        positive = [x for x in self.values() if x > 0]
        return min(positive) if positive else None

    def heavy(self, i: int, j: int) -> bool:
        return self.U[i][j] > 0 and self.V[i][j] > 0

    def scaled(self, factor) -> "SmcInstance":
        f = rational(factor)
        return SmcInstance(
            [[x * f for x in row] for row in self.U],
            [[x * f for x in row] for row in self.V],
            self.labels,
        )


@dataclass(frozen=True)
class FractionalMatching:
    weights: tuple

    def __post_init__(self):
        w = _matrix(self.weights, name="matching")
        for i, row in enumerate(w):
            for j, x in enumerate(row):
                if x < 0:
                    raise InvalidMatching(f"negative weight at ({i + 1},{j + 1})")
        object.__setattr__(self, "weights", w)
        for i, s in enumerate(self.row_sums()):
            if s > 1:
                raise InvalidMatching(f"row {i + 1} sums to {format_rational(s)} > 1")
        for j, s in enumerate(self.col_sums()):
            if s > 1:
                raise InvalidMatching(f"column {j + 1} sums to {format_rational(s)} > 1")

    @property
    def n(self) -> int:
        return len(self.weights)

    def __getitem__(self, cell) -> Fraction:
        i, j = cell
        return self.weights[i][j]

    def row_sums(self) -> list:
        return [sum(row, ZERO) for row in self.weights]

    def col_sums(self) -> list:
        return [sum(col, ZERO) for col in zip(*self.weights)]

    @property
    def is_complete(self) -> bool:
        return all(s == 1 for s in self.row_sums()) and all(s == 1 for s in self.col_sums())

    @property
    def is_integral(self) -> bool:
        return all(x in (0, 1) for row in self.weights for x in row)

    def support(self) -> list:
        return [(i, j) for i, row in enumerate(self.weights) for j, x in enumerate(row) if x > 0]

    def to_integral(self) -> "IntegralMatching":
        if not self.is_integral:
            raise InvalidMatching("matching is not integral")
        return IntegralMatching(self.support())

    @classmethod
    def zero(cls, n: int) -> "FractionalMatching":
        return cls([[ZERO] * n for _ in range(n)])

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable, weight=ONE) -> "FractionalMatching":
        rows = [[ZERO] * n for _ in range(n)]
        w = rational(weight)
        for i, j in pairs:
            rows[i][j] += w
        return cls(rows)

    @classmethod
    def mix(cls, n: int, terms: Sequence) -> "FractionalMatching":
        """Weighted sum of matchings given as ``(weight, matching)`` pairs."""
        rows = [[ZERO] * n for _ in range(n)]
        for lam, m in terms:
            lam = rational(lam)
            fm = as_fractional(m, n)
            for i, j in fm.support():
                rows[i][j] += lam * fm.weights[i][j]
        return cls(rows)


@dataclass(frozen=True)
class IntegralMatching:
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted((int(i), int(j)) for i, j in self.pairs))
        men = [i for i, _ in pairs]
        women = [j for _, j in pairs]
        if len(set(men)) != len(men) or len(set(women)) != len(women):
            raise InvalidMatching("an agent appears in two pairs")
        object.__setattr__(self, "pairs", pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def to_fractional(self, n: int) -> FractionalMatching:
        return FractionalMatching.from_pairs(n, self.pairs)

    def partner_of_man(self) -> dict:
        return dict(self.pairs)

    def partner_of_woman(self) -> dict:
        return {j: i for i, j in self.pairs}


def as_fractional(mu, n: int) -> FractionalMatching:
    if isinstance(mu, IntegralMatching):
        return mu.to_fractional(n)
    if isinstance(mu, FractionalMatching):
        if mu.n != n:
            raise DimensionMismatch(f"matching is {mu.n}x{mu.n}, instance has n={n}")
        return mu
    return FractionalMatching(mu)


@dataclass(frozen=True)
class UtilityProfile:
    u: tuple
    v: tuple
    welfare: Fraction


@dataclass(frozen=True)
class BlockingPair:
    man: int
    woman: int
    man_utility: Fraction
    woman_utility: Fraction
    man_threshold: Fraction
    woman_threshold: Fraction


@dataclass(frozen=True)
class BlockingReport:
    epsilon: Fraction
    blocking_pairs: tuple = field(default_factory=tuple)

    @property
    def stable(self) -> bool:
        return not self.blocking_pairs

    @property
    def pairs(self) -> list:
        return [(b.man, b.woman) for b in self.blocking_pairs]


@dataclass(frozen=True)
class OrdinalProfile:
    """Weak orders as tiers, best tier first; each tier lists indices ascending."""

    men_prefs: tuple
    women_prefs: tuple


def utilities(inst: SmcInstance, mu) -> UtilityProfile:
    fm = as_fractional(mu, inst.n)
    u = [ZERO] * inst.n
    v = [ZERO] * inst.n
    for i, j in fm.support():
        x = fm.weights[i][j]
        u[i] += inst.U[i][j] * x
        v[j] += inst.V[i][j] * x
    return UtilityProfile(tuple(u), tuple(v), sum(u, ZERO) + sum(v, ZERO))


def welfare(inst: SmcInstance, mu) -> Fraction:
    return utilities(inst, mu).welfare


def check_stability(inst: SmcInstance, mu, epsilon=0) -> BlockingReport:
    eps = check_epsilon(epsilon)
    scale = 1 - eps
    prof = utilities(inst, mu)
    found = []
    for i in range(inst.n):
        ui = prof.u[i]
        Ui = inst.U[i]
        Vi = inst.V[i]
        for j in range(inst.n):
            tu = scale * Ui[j]
            if ui < tu:
                tv = scale * Vi[j]
                if prof.v[j] < tv:
                    found.append(BlockingPair(i, j, ui, prof.v[j], tu, tv))
    return BlockingReport(eps, tuple(found))


def is_stable(inst: SmcInstance, mu, epsilon=0) -> bool:
    return check_stability(inst, mu, epsilon).stable


def _tiers(values: Sequence) -> tuple:
    groups: dict = {}
    for idx, x in enumerate(values):
        groups.setdefault(x, []).append(idx)
    return tuple(tuple(groups[x]) for x in sorted(groups, reverse=True))


def derive_ordinal(inst: SmcInstance) -> OrdinalProfile:
    men = tuple(_tiers(inst.U[i]) for i in range(inst.n))
    women = tuple(_tiers([inst.V[i][j] for i in range(inst.n)]) for j in range(inst.n))
    return OrdinalProfile(men, women)


def welfare_of_pairs(inst: SmcInstance, m: IntegralMatching) -> Fraction:
    return sum((inst.U[i][j] + inst.V[i][j] for i, j in m), ZERO)


# ---------------------------------------------------------------------------
# text formats


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    if isinstance(source, os.PathLike):
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _parse_row(line: str, lineno: int, n: int, what: str) -> list:
    tokens = line.split()
    if len(tokens) != n:
        raise ParseError(f"{what} row has {len(tokens)} entries, expected {n}", lineno)
    row = []
    for tok in tokens:
        try:
            x = rational(tok)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if x < 0:
            raise NegativeValuation(f"{what} entry {tok} is negative", lineno)
        row.append(x)
    return row


def _parse_n(lines, lineno_hint=0) -> int:
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise ParseError("missing n=<int> line", lineno_hint) from None
    key, sep, val = line.partition("=")
    if key.strip() != "n" or not sep:
        raise ParseError(f"expected n=<int>, got {line!r}", lineno)
    try:
        n = int(val.strip())
    except ValueError:
        raise ParseError(f"bad n value {val.strip()!r}", lineno) from None
    if n < 1:
        raise ParseError("n must be positive", lineno)
    return n


def _parse_block(lines, header: str, n: int) -> list:
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise ParseError(f"missing {header}= section") from None
    if line.replace(" ", "") != f"{header}=":
        raise ParseError(f"expected {header}=, got {line!r}", lineno)
    rows = []
    for _ in range(n):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise DimensionMismatch(f"{header} has fewer than {n} rows") from None
        rows.append(_parse_row(line, lineno, n, header))
    return rows


def load_instance(source) -> SmcInstance:
    """Parse SMC v1 text (str, bytes, path-like or file object)."""
    lines = _content_lines(_read_text(source))
    n = _parse_n(lines)
    U = _parse_block(lines, "U", n)
    V = _parse_block(lines, "V", n)
    labels = None
    rest = list(lines)
    if rest:
        lineno, line = rest[0]
        if line.replace(" ", "") != "labels=":
            raise ParseError(f"unexpected content {line!r}", lineno)
        labels = [tok for _, ln in rest[1:] for tok in ln.split()]
        if len(labels) != 2 * n:
            raise DimensionMismatch(f"labels section names {len(labels)} agents, expected {2 * n}")
    return SmcInstance(U, V, labels)


def read_instance(path) -> SmcInstance:
    with open(path, encoding="utf-8") as fh:
        return load_instance(fh.read())


def _format_matrix(rows) -> list:
    return [" ".join(format_rational(x) for x in row) for row in rows]


def dump_instance(inst: SmcInstance) -> str:
    out = [f"n={inst.n}", "U=", *_format_matrix(inst.U), "V=", *_format_matrix(inst.V)]
    if inst.labels:
        out += ["labels=", " ".join(inst.labels[: inst.n]), " ".join(inst.labels[inst.n:])]
    return "\n".join(out) + "\n"


def load_matching(source) -> FractionalMatching:
    lines = _content_lines(_read_text(source))
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty matching file") from None
    if header != "matching v1":
        raise ParseError(f"expected 'matching v1', got {header!r}", lineno)
    n = _parse_n(lines, lineno)
    rows = []
    for _ in range(n):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise DimensionMismatch(f"matching has fewer than {n} rows") from None
        rows.append(_parse_row(line, lineno, n, "matching"))
    extra = next(lines, None)
    if extra is not None:
        raise ParseError(f"unexpected content {extra[1]!r}", extra[0])
    return FractionalMatching(rows)


def read_matching(path) -> FractionalMatching:
    with open(path, encoding="utf-8") as fh:
        return load_matching(fh.read())


def dump_matching(mu, n: int | None = None) -> str:
    if isinstance(mu, IntegralMatching):
        if n is None:
            raise ValueError("n is required to serialise an IntegralMatching")
        mu = mu.to_fractional(n)
    return "\n".join(["matching v1", f"n={mu.n}", *_format_matrix(mu.weights)]) + "\n"


def write_text(path, text: str) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
