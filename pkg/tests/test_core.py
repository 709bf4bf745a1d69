from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instance_and_matching, instances
from smc.core import (
    FractionalMatching,
    IntegralMatching,
    SmcInstance,
    check_stability,
    derive_ordinal,
    dump_instance,
    dump_matching,
    load_instance,
    load_matching,
    rational,
    utilities,
    welfare_of_pairs,
)
from smc.decompose import bvn_decompose, complete_with_dummies
from smc.errors import DimensionMismatch, EpsilonOutOfRange, InvalidMatching, NegativeValuation, ParseError
from smc.generators import gen_nonconvex, gen_unstable_support, unstable_support_matchings

H = Fraction(1, 2)

FIG1_TEXT = """# Fig 1
n=3
U=
0 1 2
2 1 0
1 0 3
V=
3 0 1
0 1 2
1 2 0
"""


def test_load_fig1_rows():
    inst = load_instance(FIG1_TEXT)
    assert inst.U[0] == (0, 1, 2)
    assert inst.V[0] == (3, 0, 1)
    assert inst.U[2] == (1, 0, 3)


def test_degenerate_one_by_one():
    inst = load_instance("n=1\nU=\n0\nV=\n0\n")
    assert inst.n == 1 and inst.U == ((0,),)


def test_negative_entry_rejected():
    with pytest.raises(NegativeValuation):
        load_instance("n=1\nU=\n-1\nV=\n0\n")


def test_parse_error_carries_line():
    with pytest.raises(ParseError) as exc:
        load_instance("n=2\nU=\n1 2\n3 x\nV=\n0 0\n0 0\n")
    assert exc.value.line == 4


def test_short_matrix_is_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        load_instance("n=2\nU=\n1 2\n")


def test_rational_parsing_rejects_decimals():
    assert rational("3/6") == H
    with pytest.raises(ValueError):
        rational("0.5")


def test_fig1_witness_utilities(fig1):
    inst, mu = fig1
    prof = utilities(inst, mu)
    assert prof.u == (0, H, Fraction(3, 2))
    assert prof.v == (3, Fraction(3, 2), 1)
    assert prof.welfare == Fraction(15, 2)


def test_zero_matching_profile(fig1):
    inst, _ = fig1
    prof = utilities(inst, FractionalMatching.zero(3))
    assert prof.welfare == 0 and set(prof.u) == {0}


def test_fig1_integral_welfares(fig1):
    inst, _ = fig1
    men_optimal = IntegralMatching([(0, 2), (1, 1), (2, 0)])
    identity = IntegralMatching([(0, 0), (1, 1), (2, 2)])
    assert welfare_of_pairs(inst, men_optimal) == 7
    assert welfare_of_pairs(inst, identity) == 8
    assert welfare_of_pairs(inst, IntegralMatching([])) == 0


def test_unstable_support_fifth_matching_welfare():
    inst, _ = gen_unstable_support(3)
    assert welfare_of_pairs(inst, unstable_support_matchings()[4]) == 8


def test_fig1_witness_stable(fig1):
    inst, mu = fig1
    assert check_stability(inst, mu).stable


def test_nonconvex_midpoint_blocks_second_pair():
    inst, first, second = gen_nonconvex()
    mid = FractionalMatching.mix(3, [(H, first), (H, second)])
    assert check_stability(inst, mid).pairs == [(1, 1)]


def test_epsilon_range():
    inst = SmcInstance([[1]], [[1]])
    with pytest.raises(EpsilonOutOfRange):
        check_stability(inst, FractionalMatching.zero(1), 1)
    with pytest.raises(EpsilonOutOfRange):
        check_stability(inst, FractionalMatching.zero(1), Fraction(-1, 2))


def test_matching_rejects_overfull_row():
    with pytest.raises(InvalidMatching):
        FractionalMatching([[H, H + Fraction(1, 10)], [0, 0]])


def test_ordinal_tiers(fig1):
    inst, _ = fig1
    prof = derive_ordinal(inst)
    assert prof.men_prefs[0] == ((2,), (1,), (0,))
    flat = derive_ordinal(SmcInstance([[0, 0], [1, 0]], [[0, 0], [0, 0]]))
    assert flat.men_prefs[0] == ((0, 1),)
    binary = derive_ordinal(SmcInstance([[1, 0, 1]] * 3, [[0] * 3] * 3))
    assert binary.men_prefs[0] == ((0, 2), (1,))


def test_classification_predicates():
    inst = SmcInstance([[0, 3], [1, 3]], [[3, 1], [0, 0]])
    assert inst.is_ternary(3) and not inst.is_binary and not inst.is_symmetric
    assert inst.sigma_max == 3 and inst.sigma_min == 1


@given(instance_and_matching(complete=True))
def test_welfare_matches_bvn_terms(pair):
    inst, mu = pair
    support = bvn_decompose(mu)
    assert sum(lam * welfare_of_pairs(inst, m) for lam, m in support.terms) == utilities(inst, mu).welfare


@given(instance_and_matching(), st.integers(0, 8), st.integers(0, 8))
def test_stability_monotone_in_epsilon(pair, a, b):
    inst, mu = pair
    lo, hi = sorted((Fraction(a, 9), Fraction(b, 9)))
    if check_stability(inst, mu, lo).stable:
        assert check_stability(inst, mu, hi).stable


@given(instance_and_matching(), st.integers(1, 7), st.integers(1, 5))
def test_scaling_keeps_blocking_pairs(pair, p, q):
    inst, mu = pair
    assert check_stability(inst.scaled(Fraction(p, q)), mu).pairs == check_stability(inst, mu).pairs


@given(st.data())
def test_integral_blocking_matches_ordinal_definition(data):
    from itertools import permutations

    n = data.draw(st.integers(1, 4))
    # distinct values per row and column keep the ordinal refinement strict
    vals = data.draw(st.permutations(range(1, n * n + 1)))
    U = [[Fraction(vals[i * n + j]) for j in range(n)] for i in range(n)]
    vals2 = data.draw(st.permutations(range(1, n * n + 1)))
    V = [[Fraction(vals2[i * n + j]) for j in range(n)] for i in range(n)]
    inst = SmcInstance(U, V)
    perm = data.draw(st.sampled_from(list(permutations(range(n)))))
    mu = IntegralMatching(list(enumerate(perm)))
    prefs = derive_ordinal(inst)
    husband = {j: i for i, j in enumerate(perm)}

    def rank(tiers, x):
        return next(r for r, tier in enumerate(tiers) if x in tier)

    expected = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if rank(prefs.men_prefs[i], j) < rank(prefs.men_prefs[i], perm[i])
        and rank(prefs.women_prefs[j], i) < rank(prefs.women_prefs[j], husband[j])
    ]
    assert check_stability(inst, mu.to_fractional(n)).pairs == expected


@given(instance_and_matching())
def test_text_round_trip(pair):
    inst, mu = pair
    text = dump_instance(inst)
    assert load_instance(text) == inst
    assert dump_instance(load_instance(text)) == text
    assert load_matching(dump_matching(mu)) == mu


@given(instance_and_matching())
def test_padding_preserves_welfare_and_completes(pair):
    inst, mu = pair
    big, full = complete_with_dummies(inst, mu)
    assert full.is_complete
    assert utilities(big, full).welfare == utilities(inst, mu).welfare


@given(instances())
def test_stable_matching_is_eps_stable(inst):
    from smc.classic import gale_shapley

    mu = gale_shapley(inst).to_fractional(inst.n)
    for eps in (Fraction(1, 10), H, Fraction(9, 10)):
        assert check_stability(inst, mu, eps).stable
