from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instances
from smc.core import SmcInstance, check_stability, utilities
from smc.decompose import bvn_decompose, complete_with_dummies
from smc.errors import CapExceeded
from smc.generators import gen_2x2_example, gen_fig1, gen_random, gen_unstable_support
from smc.lp import (
    Constraint,
    Infeasible,
    LinearProgram,
    Optimal,
    ThresholdVector,
    Unbounded,
    YAssignment,
    build_opt_thresh,
    certificate_holds,
    dump_certificate,
    enumerate_thresholds,
    load_certificate,
    replay_basis,
    simplex_solve,
    solve_exact_milp,
    solve_exact_thresh,
    solve_half_stable,
)
from smc.classic import max_welfare_matching
from smc.core import welfare_of_pairs

H = Fraction(1, 2)


# ---------------------------------------------------------------- simplex

def test_simplex_single_bound():
    res = simplex_solve(LinearProgram([1], [Constraint({0: 1}, "<=", 3)]))
    assert isinstance(res, Optimal) and res.x == (3,) and res.value == 3


def test_simplex_infeasible():
    lp = LinearProgram([1], [Constraint({0: 1}, "<=", 1), Constraint({0: 1}, ">=", 2)])
    assert isinstance(simplex_solve(lp), Infeasible)


def test_simplex_unbounded():
    assert isinstance(simplex_solve(LinearProgram([1, 0], [Constraint({1: 1}, "<=", 1)])), Unbounded)


def test_simplex_degenerate_vertex():
    res = simplex_solve(LinearProgram([1, 1], [Constraint({0: 1, 1: 1}, "<=", 1)]))
    assert res.value == 1 and res.x == (1, 0)


def test_simplex_lower_bounds():
    lp = LinearProgram([-1, -1], [Constraint({0: 1, 1: 1}, ">=", 1)], lower=[H, 0])
    res = simplex_solve(lp)
    assert res.value == -1 and res.x[0] >= H


@st.composite
def random_lps(draw):
    nv = draw(st.integers(1, 4))
    nc = draw(st.integers(1, 4))
    coef = st.integers(-3, 4)
    cons = []
    for _ in range(nc):
        rel = draw(st.sampled_from(["<=", ">=", "="]))
        cons.append(Constraint({k: draw(coef) for k in range(nv)}, rel, draw(st.integers(-2, 6))))
    for k in range(nv):  # keep the feasible region bounded
        cons.append(Constraint({k: 1}, "<=", draw(st.integers(0, 5))))
    return LinearProgram([draw(coef) for _ in range(nv)], cons)


@given(random_lps())
def test_simplex_agrees_with_scipy(lp):
    optimize = pytest.importorskip("scipy.optimize")
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for c in lp.constraints:
        row = [0.0] * lp.num_vars
        for k, v in c.coeffs:
            row[k] = float(v)
        if c.relation == "=":
            A_eq.append(row)
            b_eq.append(float(c.rhs))
        elif c.relation == "<=":
            A_ub.append(row)
            b_ub.append(float(c.rhs))
        else:
            A_ub.append([-x for x in row])
            b_ub.append(-float(c.rhs))
    ref = optimize.linprog([-float(c) for c in lp.objective], A_ub=A_ub or None, b_ub=b_ub or None,
                           A_eq=A_eq or None, b_eq=b_eq or None, bounds=[(0, None)] * lp.num_vars,
                           method="highs")
    res = simplex_solve(lp)
    if ref.status == 2:
        assert isinstance(res, Infeasible)
    else:
        assert ref.status == 0
        assert isinstance(res, Optimal)
        assert abs(float(res.value) + ref.fun) < 1e-7
        for c in lp.constraints:
            lhs = sum(v * res.x[k] for k, v in c.coeffs)
            assert {"<=": lhs <= c.rhs, ">=": lhs >= c.rhs, "=": lhs == c.rhs}[c.relation]
        assert replay_basis(lp, res.basis, res.rows) == (res.x, res.value)


# ---------------------------------------------------------------- threshold LPs

def test_zero_thresholds_give_max_welfare():
    inst, _ = gen_fig1()
    res = simplex_solve(build_opt_thresh(inst, ThresholdVector((0,) * 3, (0,) * 3)))
    assert res.value == welfare_of_pairs(inst, max_welfare_matching(inst)) == 8


def test_fig1_witness_thresholds():
    inst, mu = gen_fig1()
    prof = utilities(inst, mu)
    res = simplex_solve(build_opt_thresh(inst, ThresholdVector((0, 0, 0), prof.v)))
    assert res.value >= Fraction(15, 2)


def test_threshold_lp_infeasible_when_too_high():
    inst, _ = gen_fig1()
    theta = ThresholdVector(tuple(max(r) + 1 for r in inst.U), (0, 0, 0))
    assert isinstance(simplex_solve(build_opt_thresh(inst, theta)), Infeasible)


def test_enumeration_single_pair():
    tuples = list(enumerate_thresholds(SmcInstance([[1]], [[5]])))
    assert [(t.theta_men, t.theta_women) for t in tuples] == [((0,), (5,)), ((1,), (0,))]


def test_enumeration_fig1_count_and_binary_values():
    inst, _ = gen_fig1()
    tuples = list(enumerate_thresholds(inst))
    assert len(set(tuples)) <= 64
    assert all(t.is_stability_preserving(inst) for t in tuples)
    binary = gen_random(3, "binary", 1)
    assert all(set(t.theta_men) <= {0, 1} for t in enumerate_thresholds(binary))


def test_enumeration_respects_cap():
    with pytest.raises(CapExceeded):
        list(enumerate_thresholds(gen_random(7, "general", 0)))


# ---------------------------------------------------------------- exact solvers

def test_exact_thresh_fig1():
    inst, _ = gen_fig1()
    res = solve_exact_thresh(inst)
    assert res.profile.welfare >= Fraction(15, 2) and res.profile.welfare > 7


def test_exact_thresh_unstable_support():
    inst, _ = gen_unstable_support(3)
    assert solve_exact_thresh(inst).profile.welfare == 7


def test_exact_thresh_two_by_two():
    res = solve_exact_thresh(gen_2x2_example())
    assert res.profile.welfare == 2
    # (m1,w2) is worth nothing to either side, so the solver leaves it empty
    assert res.matching.weights[1][0] == 1
    assert res.matching.support() == [(1, 0)]


def test_milp_small_examples():
    assert solve_exact_milp(SmcInstance([[1, 0], [0, 1]], [[1, 0], [0, 1]])).profile.welfare == 4
    assert solve_exact_milp(gen_2x2_example()).profile.welfare == 2


def test_milp_cap():
    with pytest.raises(CapExceeded):
        solve_exact_milp(gen_random(5, "general", 0))


def test_env_cap_override(monkeypatch):
    monkeypatch.setenv("SMC_CAP", "2")
    with pytest.raises(CapExceeded):
        solve_exact_thresh(gen_fig1()[0])


def test_half_stable_examples():
    inst, _ = gen_fig1()
    res = solve_half_stable(inst)
    assert check_stability(inst, res.matching, H).stable
    assert res.profile.welfare >= Fraction(15, 2)
    light = SmcInstance([[3, 0], [1, 2]], [[0, 5], [0, 0]])
    assert solve_half_stable(light).profile.welfare == welfare_of_pairs(light, max_welfare_matching(light))


def test_certificate_round_trip():
    inst, _ = gen_fig1()
    res = solve_exact_thresh(inst)
    assert load_certificate(dump_certificate(res.certificate)) == res.certificate
    y = YAssignment(((1, 0), (H, 1)))
    assert load_certificate(dump_certificate(y)) == y


@pytest.mark.parametrize("seed", range(100))
def test_thresh_and_milp_agree(seed):
    n = 2 + seed % 3
    family = ("binary", "ternary", "general")[seed % 3]
    inst = gen_random(n, family, seed)
    a = solve_exact_thresh(inst)
    b = solve_exact_milp(inst)
    assert a.profile.welfare == b.profile.welfare
    assert certificate_holds(inst, b.matching, b.certificate)


@given(instances(max_n=4), st.sampled_from([Fraction(0), Fraction(1, 4), H]))
def test_exact_thresh_properties(inst, eps):
    res = solve_exact_thresh(inst, eps)
    assert check_stability(inst, res.matching, eps).stable
    assert certificate_holds(inst, res.matching, res.certificate, eps)
    assert res.profile == utilities(inst, res.matching)
    plain = solve_exact_thresh(inst, eps, prune=False)
    assert plain.profile.welfare == res.profile.welfare
    big, full = complete_with_dummies(inst, res.matching)
    assert len(bvn_decompose(full)) <= 4 * big.n


@given(instances(max_n=4))
def test_parallel_search_is_deterministic(inst):
    assert solve_exact_thresh(inst, jobs=2).matching == solve_exact_thresh(inst).matching


@given(instances(max_n=4))
def test_half_stable_dominates_exact(inst):
    res = solve_half_stable(inst)
    assert check_stability(inst, res.matching, H).stable
    assert res.profile.welfare >= solve_exact_thresh(inst).profile.welfare


@given(instances(max_n=3))
def test_blend_never_beats_eps_optimum(inst):
    from smc.classic import blend_eps_stable

    for eps in (Fraction(1, 4), H):
        assert blend_eps_stable(inst, eps).welfare <= solve_exact_thresh(inst, eps).profile.welfare
