from fractions import Fraction

import pytest
from hypothesis import given

from conftest import instances
from smc.altstab import (
    NotExPost,
    check_expost_stability,
    check_fractional_stability,
    check_strong_stability,
    fractional_stability_value,
)
from smc.classic import gale_shapley
from smc.core import FractionalMatching, SmcInstance, check_stability, utilities
from smc.decompose import BvnSupport
from smc.errors import CapExceeded
from smc.generators import gen_appendixB, gen_fig1, gen_random, random_complete_matching
from smc.oracle import stable_integral_matchings

H = Fraction(1, 2)


def test_appendix_b_strong_violation():
    inst, mu = gen_appendixB()
    found = {v.as_tuple() for v in check_strong_stability(inst, mu)}
    assert (0, 2, 1, 1) in found


def test_appendix_b_stable_with_unit_utilities():
    inst, mu = gen_appendixB()
    prof = utilities(inst, mu)
    assert set(prof.u) | set(prof.v) == {1}
    assert check_stability(inst, mu).stable


def test_appendix_b_fractionally_stable():
    inst, mu = gen_appendixB()
    assert check_fractional_stability(inst, mu) == []


def test_integral_stable_is_strongly_stable():
    inst, _ = gen_fig1()
    assert check_strong_stability(inst, gale_shapley(inst).to_fractional(3)) == []


def test_zero_matching_zero_instance():
    inst = SmcInstance([[0, 0], [0, 0]], [[0, 0], [0, 0]])
    assert check_strong_stability(inst, FractionalMatching.zero(2)) == []


def test_fig1_fractional_violation_value():
    inst, mu = gen_fig1()
    assert fractional_stability_value(inst, mu, 0, 2) == H
    viol = check_fractional_stability(inst, mu)
    assert [(v.man, v.woman, v.value) for v in viol] == [(0, 2, H)]


def test_complete_stable_integral_is_fractionally_stable():
    inst, _ = gen_fig1()
    assert check_fractional_stability(inst, gale_shapley(inst, "women").to_fractional(3)) == []


def test_expost_mix_of_gale_shapley_outcomes():
    inst, _ = gen_fig1()
    a, b = gale_shapley(inst, "men"), gale_shapley(inst, "women")
    mu = FractionalMatching.mix(3, [(H, a), (H, b)])
    res = check_expost_stability(inst, mu)
    assert isinstance(res, BvnSupport)
    assert sorted((lam, m.pairs) for lam, m in res.terms) == sorted([(H, a.pairs), (H, b.pairs)])


def test_expost_integral_stable_is_itself():
    inst, _ = gen_fig1()
    a = gale_shapley(inst)
    res = check_expost_stability(inst, a.to_fractional(3))
    assert res.terms == ((1, a),)


def test_fig1_witness_not_expost():
    inst, mu = gen_fig1()
    res = check_expost_stability(inst, mu)
    assert isinstance(res, NotExPost) and not res


def test_expost_cap():
    inst = gen_random(9, "binary", 0)
    with pytest.raises(CapExceeded):
        check_expost_stability(inst, FractionalMatching.zero(9))


def _chain(inst, mu):
    strong = not check_strong_stability(inst, mu)
    expost = bool(check_expost_stability(inst, mu))
    fractional = not check_fractional_stability(inst, mu)
    if strong:
        assert expost
        assert check_stability(inst, mu).stable
    if expost:
        assert fractional


@given(instances(max_n=4))
def test_implication_chain_on_mixes_of_stable_matchings(inst):
    stable = stable_integral_matchings(inst)
    mu = FractionalMatching.mix(inst.n, [(Fraction(1, len(stable)), m) for m in stable])
    _chain(inst, mu)
    assert check_expost_stability(inst, mu)


@pytest.mark.parametrize("seed", range(60))
def test_implication_chain_on_random_complete_matchings(seed):
    n = 2 + seed % 4
    inst = gen_random(n, ("binary", "ternary", "general")[seed % 3], seed)
    _chain(inst, random_complete_matching(n, seed=seed, terms=1 + seed % 3))
