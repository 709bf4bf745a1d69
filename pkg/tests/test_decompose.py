from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import matchings
from smc.core import FractionalMatching, IntegralMatching, SmcInstance
from smc.decompose import bvn_decompose, complete_with_dummies, dump_bvn, load_bvn, support_size
from smc.errors import NotDoublyStochastic
from smc.generators import gen_fig1, gen_unstable_support, random_complete_matching

H = Fraction(1, 2)


def test_fig1_witness_two_terms():
    _, mu = gen_fig1()
    support = bvn_decompose(mu)
    assert [lam for lam, _ in support.terms] == [H, H]
    assert {m.pairs for _, m in support.terms} == {((0, 0), (1, 2), (2, 1)), ((0, 0), (1, 1), (2, 2))}
    assert support_size(mu) == 2


def test_integral_single_term():
    m = IntegralMatching([(0, 1), (1, 0), (2, 2)])
    support = bvn_decompose(m.to_fractional(3))
    assert support.terms == ((1, m),)


def test_uniform_two_by_two():
    support = bvn_decompose(FractionalMatching([[H, H], [H, H]]))
    assert [lam for lam, _ in support.terms] == [H, H]
    assert len({m.pairs for _, m in support.terms}) == 2


def test_unstable_support_witness_has_three_terms():
    _, mu = gen_unstable_support(3)
    assert support_size(mu) == 3


def test_incomplete_rejected():
    with pytest.raises(NotDoublyStochastic):
        bvn_decompose(FractionalMatching([[H, 0], [0, 1]]))


def test_padding_of_empty_matching():
    inst = SmcInstance([[0]], [[0]])
    big, mu = complete_with_dummies(inst, FractionalMatching.zero(1))
    assert big.n == 2
    assert mu.weights == ((0, 1), (1, 0))


def test_padding_complete_matching_is_identity():
    inst = SmcInstance([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    mu = FractionalMatching([[1, 0], [0, 1]])
    big, same = complete_with_dummies(inst, mu)
    assert big == inst and same == mu


def test_padding_half_slack_uses_one_dummy():
    inst = SmcInstance([[1, 1], [1, 1]], [[1, 1], [1, 1]])
    mu = FractionalMatching([[H, H], [H, 0]])
    big, full = complete_with_dummies(inst, mu)
    assert big.n == 3
    assert full.weights[1][2] == H and full.weights[2][1] == H
    assert full.is_complete


def test_text_round_trip():
    _, mu = gen_fig1()
    support = bvn_decompose(mu)
    assert load_bvn(dump_bvn(support)) == support


@given(st.integers(1, 6).flatmap(lambda n: matchings(n, complete=True)))
def test_reconstruction_and_term_bound(mu):
    support = bvn_decompose(mu)
    n = mu.n
    assert support.reconstruct(n) == mu
    assert sum(lam for lam, _ in support.terms) == 1
    assert all(lam > 0 for lam, _ in support.terms)
    assert len({m.pairs for _, m in support.terms}) == len(support)
    assert len(support) <= n * n - 2 * n + 2
    assert len(support) <= len(mu.support())


@pytest.mark.parametrize("seed", range(20))
def test_random_complete_matchings(seed):
    n = 2 + seed % 5
    mu = random_complete_matching(n, seed=seed, terms=4)
    support = bvn_decompose(mu)
    assert support.reconstruct(n) == mu
    for _, m in support.terms:
        assert all(mu.weights[i][j] > 0 for i, j in m)
