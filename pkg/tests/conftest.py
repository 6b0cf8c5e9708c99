from math import comb

import numpy as np
import pytest

from itersparse.core import BoxDomain, LpInstance, Status
from itersparse.simplex import SubLp, vertex_enumeration_solve

ACCEPTANCE_LINES: list = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def lp(rows, rhs, c, lo, hi):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    d = rows.shape[1]
    return LpInstance(rows, np.asarray(rhs, dtype=float), np.asarray(c, dtype=float),
                      BoxDomain(np.full(d, lo, dtype=float) if np.isscalar(lo) else lo,
                                np.full(d, hi, dtype=float) if np.isscalar(hi) else hi))


def kkt_optimum(inst: LpInstance, tol: float = 1e-7):
    """Optimal objective via HiGHS, re-derived exactly from the active set.

    HiGHS only proposes the active constraints; the vertex is recomputed
    from them and certified by primal feasibility and nonnegative multipliers.
    Returns (status, objective).
    """
    from scipy.optimize import linprog

    bounds = list(zip(inst.domain.lower, inst.domain.upper))
    A_ub, b_ub = inst.A, inst.b
    if inst.n_retained:
        A_ub = np.vstack([A_ub, inst.retained_A])
        b_ub = np.concatenate([b_ub, inst.retained_b])
    res = linprog(-inst.c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status == 2:
        return Status.INFEASIBLE, None
    assert res.status == 0, res.message
    G, h = SubLp.full(inst).constraints()
    active = np.flatnonzero(h - G @ res.x <= tol)
    assert active.size == inst.d, f"expected {inst.d} active constraints, got {active.size}"
    x = np.linalg.solve(G[active], h[active])
    y = np.linalg.solve(G[active].T, inst.c)
    assert np.all(G @ x - h <= 1e-9), "recomputed vertex infeasible"
    assert np.all(y >= -1e-12), "negative multiplier: vertex not optimal"
    return Status.OPTIMAL, float(inst.c @ x)


def oracle_optimum(inst: LpInstance, budget: int = 10**6):
    """Brute-force vertex enumeration when affordable, otherwise the KKT-certified optimum."""
    m = inst.n + inst.n_retained + 2 * inst.d
    if comb(m, inst.d) <= budget:
        out = vertex_enumeration_solve(SubLp.full(inst), budget=budget)
        return out.status, out.objective
    return kkt_optimum(inst)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
