from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from smc.core import FractionalMatching, SmcInstance

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

small_rational = st.builds(Fraction, st.integers(0, 6), st.integers(1, 4))


@st.composite
def instances(draw, min_n=1, max_n=4, values=small_rational):
    n = draw(st.integers(min_n, max_n))
    U = [[draw(values) for _ in range(n)] for _ in range(n)]
    V = [[draw(values) for _ in range(n)] for _ in range(n)]
    return SmcInstance(U, V)


@st.composite
def matchings(draw, n, complete=False):
    """Sub-stochastic matrices built as scaled mixtures of permutations."""
    from itertools import permutations

    perms = list(permutations(range(n)))
    k = draw(st.integers(1, 3))
    chosen = [draw(st.sampled_from(perms)) for _ in range(k)]
    raw = [draw(st.integers(1, 5)) for _ in range(k)]
    total = sum(raw) if complete else sum(raw) + draw(st.integers(0, 3))
    rows = [[Fraction(0)] * n for _ in range(n)]
    for w, p in zip(raw, chosen):
        for i, j in enumerate(p):
            rows[i][j] += Fraction(w, total)
    return FractionalMatching(rows)


@st.composite
def instance_and_matching(draw, min_n=1, max_n=4, complete=False):
    inst = draw(instances(min_n, max_n))
    return inst, draw(matchings(inst.n, complete))


# ---------------------------------------------------------------- acceptance summary

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _ACCEPTANCE.get(name)
        if prev is None or prev == "PASS":
            _ACCEPTANCE[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]} {name}")


@pytest.fixture(scope="session")
def fig1():
    from smc.generators import gen_fig1

    return gen_fig1()
