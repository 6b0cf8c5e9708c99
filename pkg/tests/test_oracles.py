import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import lp
from itersparse.core import ContractError, QueryLedger
from itersparse.classical import mpc_grid_solver
from itersparse.generate import generate_instance
from itersparse.oracles import (ApproxLvo, ExactLvo, bernoulli_subset, discretize_mpc,
                                grid_cardinality, grid_values, on_grid)
from itersparse.simplex import SubLp, simplex_solve


def test_bernoulli_examples(rng):
    assert bernoulli_subset(np.zeros(5), rng).size == 0
    assert bernoulli_subset([2.0, 5.0], rng).tolist() == [0, 1]


def test_bernoulli_size_statistics(rng):
    # [DERIVED] Binomial(10^4, 0.3): mean 3000, sd sqrt(2100)
    sizes = np.array([bernoulli_subset(np.full(10**4, 0.3), rng).size for _ in range(200)])
    assert abs(sizes.mean() - 3000) <= 3 * math.sqrt(2100 / 200)


def test_exact_lvo_oversampling_is_direct_solve(rng):
    inst = lp(np.r_[np.eye(2), [[1.0, 1.0]]], [1.0, 1.0, 1.5], [2.0, 1.0], 0.0, 2.0)
    ledger = QueryLedger()
    oracle = ExactLvo(inst, mu=0.01, eps=0.0, rng=rng, ledger=ledger)
    x, v = oracle(np.full(3, 1 / 3))
    assert oracle.sample_sizes == [3] and not v.any()
    assert x == pytest.approx(simplex_solve(SubLp.full(inst)).x)
    assert ledger.classical_row_reads == 3 + 3


def test_exact_lvo_concentrated_weight(rng):
    inst = lp(np.ones((101, 1)), np.r_[np.full(100, 3.0), 1.0], [1.0], 0.0, 10.0)
    p = np.zeros(101)
    p[100] = 1.0
    oracle = ExactLvo(inst, mu=0.5, eps=0.0, rng=rng)
    for _ in range(20):
        x, v = oracle(p)
        assert x == pytest.approx([1.0]) and not v.any()
    assert oracle.sample_sizes == [1] * 20


def test_exact_lvo_contract_on_random_instances(rng):
    for seed in range(5):
        inst = generate_instance("feasible-nondegenerate", 300, 3, seed)
        mu = 0.1
        oracle = ExactLvo(inst, mu=mu, eps=0.0, rng=rng)
        for _ in range(5):
            p = rng.dirichlet(np.ones(inst.n))
            x, v = oracle(p)
            assert float(p @ v.bits) <= mu + 1e-12


def test_approx_lvo_oversampling(rng):
    inst = lp(np.eye(2), [1.0, 1.0], [1.0, 1.0], 0.0, 2.0)
    oracle = ApproxLvo(inst, mu=0.01, eps=0.0, rng=rng, solver=lambda sub: simplex_solve(sub).x, N=10.0)
    x, v = oracle(np.array([0.5, 0.5]))
    assert oracle.sample_sizes == [2] and x == pytest.approx([1.0, 1.0]) and not v.any()


def test_approx_lvo_grid_solver_outputs_grid_points(rng):
    mpc = generate_instance("mixed", 300, 2, 4)
    oracle = ApproxLvo(mpc.covering_lp(), mu=0.5 / 3, eps=0.0, rng=rng,
                       solver=mpc_grid_solver(mpc, 0.5), N=float(grid_cardinality(0.5, mpc.r_p)) ** 2)
    x, _ = oracle(np.full(mpc.n_c, 1 / mpc.n_c))
    assert on_grid(x, 0.5, mpc.r_p)


def test_oracle_rejects_bad_inputs(rng):
    inst = lp(np.eye(2), [1.0, 1.0], [1.0, 1.0], 0.0, 2.0)
    with pytest.raises(ContractError):
        ExactLvo(inst, mu=0.0, eps=0.0, rng=rng)
    with pytest.raises(ContractError):
        ExactLvo(inst, mu=0.1, eps=0.0, rng=rng)(np.ones(3) / 3)
    with pytest.raises(ContractError):
        ApproxLvo(inst, mu=0.1, eps=0.0, rng=rng)


def test_discretize_examples():
    assert discretize_mpc([0.0], 0.5, 2).tolist() == [0.0]
    assert discretize_mpc([1e-9, 0.4, 1.0], 1.0, 1).tolist() == [1.0, 1.0, 1.0]
    assert discretize_mpc([0.3], 0.5, 2) == pytest.approx([0.375])


def test_grid_cardinality_bounds_grid():
    for eps in (0.05, 0.1, 0.25, 0.5, 1.0):
        for r_p in (1, 2, 4, 10):
            assert grid_values(eps, r_p).size <= grid_cardinality(eps, r_p)


@settings(max_examples=300)
@given(st.floats(0.01, 1.0), st.integers(1, 10), st.lists(st.floats(0, 1), min_size=1, max_size=8))
def test_discretize_properties(eps, r_p, xs):
    x = np.array(xs)
    y = discretize_mpc(x, eps, r_p)
    assert on_grid(y, eps, r_p)
    assert np.array_equal(discretize_mpc(y, eps, r_p), y)
    assert np.all(y >= x)
    assert np.all(y <= np.maximum((1 + eps) * x, eps / r_p) + 1e-15)
