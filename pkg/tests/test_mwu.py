import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import lp
from itersparse.core import ViolationVector, violation_vector
from itersparse.errors import MwuBoundViolated, OracleContractBroken
from itersparse.mwu import (WeightState, anytime_bound, framework_run, probabilities, smax,
                            smax_check, weighted_violation)
from itersparse.oracles import ExactLvo
from itersparse.simplex import SubLp, vertex_enumeration_solve


def vv(bits, slack=0.0):
    return ViolationVector(np.asarray(bits, dtype=np.int8), slack)


@pytest.mark.parametrize("counts,expected", [
    ([0, 0, 0, 0], [0.25] * 4),
    ([1, 0, 1, 0], [1 / 3, 1 / 6, 1 / 3, 1 / 6]),
    ([2, 0], [0.8, 0.2]),
])
def test_probabilities(counts, expected):
    p = probabilities(WeightState(np.array(counts)))
    assert p == pytest.approx(expected, abs=1e-15)


@settings(max_examples=200)
@given(arrays(np.int64, st.integers(1, 50), elements=st.integers(0, 5000)), st.integers(0, 100))
def test_probabilities_normalized_and_shift_invariant(counts, shift):
    p = probabilities(WeightState(counts))
    assert abs(p.sum() - 1) <= 1e-12
    assert np.allclose(p, probabilities(WeightState(counts + shift)), rtol=0, atol=1e-15)


def test_weight_doubling_law():
    ws = WeightState.uniform(4)
    before = ws.weights()
    ws.update(vv([1, 0, 1, 0]))
    ratio = ws.weights() / before
    assert ratio.tolist() == [2, 1, 2, 1] and ws.t == 1


@pytest.mark.parametrize("p,bits,expected", [
    ([0.25] * 4, [1, 0, 0, 0], 0.25),
    ([0.25] * 4, [0, 0, 0, 0], 0.0),
    ([0.8, 0.2], [0, 1], 0.2),
])
def test_weighted_violation(p, bits, expected):
    assert weighted_violation(p, vv(bits)) == pytest.approx(expected)


def test_smax_examples():
    assert smax_check(np.zeros(2), np.zeros(2))
    # [DERIVED] ln(e + 1) = 1.3133 <= ln 2 + 2 * 0.5
    assert smax(np.array([1.0, 0.0])) == pytest.approx(math.log(math.e + 1))
    assert smax_check(np.zeros(2), np.array([1.0, 0.0]))


@settings(max_examples=300)
@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    arrays(float, n, elements=st.floats(0, 50)), arrays(float, n, elements=st.floats(0, 1)))))
def test_smax_growth_property(pair):
    assert smax_check(*pair)


def test_feasible_oracle_keeps_uniform():
    inst = lp(np.ones((5, 1)), np.ones(5), [1.0], 0.0, 1.0)
    seen = []

    def oracle(p):
        seen.append(p.copy())
        return np.zeros(1), violation_vector(inst, np.zeros(1), 0.0)

    sol = framework_run(inst, oracle, 0.0, mu=0.9, T=10)
    assert sol.T == 10 and sol.counts.tolist() == [0] * 5
    assert all(np.allclose(p, 0.2) for p in seen)


def test_alternating_oracle_hand_simulation():
    # [DERIVED] violate the lower-weight constraint each step; weights [1,1]->[2,1]->[2,2]->...
    inst = lp(np.eye(2), np.ones(2), [1.0, 1.0], 0.0, 1.0)
    state = {"k": 0}

    def oracle(p):
        i = state["k"] % 2
        state["k"] += 1
        bits = np.zeros(2, dtype=np.int8)
        bits[i] = 1
        return np.zeros(2), ViolationVector(bits, 0.0)

    sol = framework_run(inst, oracle, 0.0, mu=3 * 0.51, T=4)
    assert sol.counts.tolist() == [2, 2]
    assert sol.weighted == pytest.approx([0.5, 1 / 3, 0.5, 1 / 3])


def test_contract_breach_is_fatal():
    inst = lp(np.eye(2), np.ones(2), [1.0, 1.0], 0.0, 1.0)
    with pytest.raises(OracleContractBroken):
        framework_run(inst, lambda p: (np.zeros(2), vv([1, 1])), 0.0, mu=0.3, T=3)


def test_anytime_bound_guard_detects_bookkeeping_errors(monkeypatch):
    import itersparse.mwu as mwu
    inst = lp(np.eye(2), np.ones(2), [1.0, 1.0], 0.0, 1.0)
    monkeypatch.setattr(mwu, "anytime_bound", lambda n, t, m: -1.0)
    with pytest.raises(MwuBoundViolated):
        framework_run(inst, lambda p: (np.zeros(2), vv([0, 0])), 0.0, mu=0.3, T=1)


def test_anytime_bound_implies_frequency_bound():
    # log2 n + T log2(1 + mu') <= 3 mu' T whenever T >= ln n / mu'
    for n in (2, 10, 10**4, 10**6):
        for mu_p in (1e-3, 0.05, 1 / 3):
            T = math.ceil(math.log(n) / mu_p)
            assert anytime_bound(n, T, mu_p) <= 3 * mu_p * T


def test_one_dimensional_exact_run_finds_feasible_iterate():
    # d = 1: mu = 1, T = ceil(24 ln n); some iterate must be fully feasible
    rng = np.random.default_rng(2)
    n = 60
    inst = lp(rng.choice([-1.0, 1.0], size=(n, 1)), rng.uniform(0.2, 3.0, n), [1.0], -5.0, 5.0)
    oracle = ExactLvo(inst, mu=1 / 3, eps=0.0, rng=rng)
    sol = framework_run(inst, oracle, 0.0, mu=1.0, T=math.ceil(24 * math.log(n)))
    feasible = [x for x in sol.xs if not violation_vector(inst, x, 0.0).any()]
    assert feasible
    best = vertex_enumeration_solve(SubLp.full(inst))
    assert float(inst.c @ feasible[0]) == pytest.approx(best.objective, abs=1e-9)
