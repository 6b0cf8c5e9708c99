"""End-to-end classical solvers built on the MWU driver and sampling oracles."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import (TAU, ContractError, LpInstance, MpcInstance, QueryLedger, SolveOutcome,
                   SolveStats, Status, compute_widths, violation_vector)
from .errors import NoFeasibleIterate, SubproblemInfeasible
from .mwu import framework_run
from .oracles import (ApproxLvo, ExactLvo, SolverCache, discretize_mpc, exact_solver,
                      grid_cardinality)
from .simplex import SubLp, mpc_inner_solve


def log_n(n: int) -> float:
    return math.log(n) if n > 1 else 0.0


def clarkson_iterations(d: int, n: int) -> int:
    return max(1, math.ceil(24 * d * log_n(n)))


def lowprec_iterations(v_max: float, eps: float, n: int) -> int:
    return max(1, math.ceil(24 * (v_max / eps) * log_n(n)))


def mpc_iterations(eps: float, n_c: int) -> int:
    return max(1, math.ceil((24 / eps) * log_n(n_c)))


def _stats(iterations: int, oracle, ledger: QueryLedger, sol=None, **extra) -> SolveStats:
    sizes = oracle.sample_sizes if oracle is not None else []
    st = SolveStats(iterations=iterations, max_sublp=max(sizes, default=0),
                    ledger=ledger.snapshot(), extra=dict(extra))
    st.extra["sample_sizes"] = list(sizes)
    if oracle is not None:
        st.extra["rounds"] = list(oracle.rounds)
    if sol is not None:
        st.extra["max_frequency"] = sol.max_frequency()
        st.extra["frequency_bound"] = sol.mu * sol.planned_T
        st.extra["planned_T"] = sol.planned_T
    return st


def clarkson_solve(inst: LpInstance, rng: np.random.Generator,
                   ledger: Optional[QueryLedger] = None) -> SolveOutcome:
    """Exact LP solve: MWU with an exact oracle at mu' = 1/(3d), stop at the first feasible iterate."""
    ledger = ledger if ledger is not None else QueryLedger()
    d, n = inst.d, inst.n
    T = clarkson_iterations(d, n)
    oracle = ExactLvo(inst, mu=1.0 / (3 * d), eps=0.0, rng=rng, ledger=ledger)
    try:
        sol = framework_run(inst, oracle, eps=0.0, mu=1.0 / d, T=T,
                            stop_when=lambda x, v: not v.any())
    except SubproblemInfeasible:
        return SolveOutcome(Status.INFEASIBLE, stats=_stats(len(oracle.rounds), oracle, ledger))
    x = sol.xs[-1]
    # stop_when fires on a fully feasible iterate; otherwise the run was exhausted
    if violation_vector(inst, x, 0.0).any():
        raise NoFeasibleIterate(f"no feasible iterate in {T} iterations")
    return SolveOutcome(Status.OPTIMAL, x=x, objective=float(inst.c @ x),
                        stats=_stats(sol.T, oracle, ledger, sol))


def low_precision_solve(inst: LpInstance, eps: float, rng: np.random.Generator,
                        ledger: Optional[QueryLedger] = None) -> SolveOutcome:
    """Average of sub-LP optima whose violations beyond eps/2 are rare; A x <= b + 2 eps."""
    if not eps > 0:
        raise ContractError("eps must be positive")
    ledger = ledger if ledger is not None else QueryLedger()
    v_max, _ = compute_widths(inst)
    if eps >= v_max:
        # every box point is within eps of feasible, so one relaxation solve suffices
        try:
            x = exact_solver(SubLp(inst, np.empty(0, dtype=np.int64)))
        except SubproblemInfeasible:
            return SolveOutcome(Status.INFEASIBLE, stats=SolveStats(ledger=ledger.snapshot()))
        return SolveOutcome(Status.APPROXIMATE, x=x, objective=float(inst.c @ x),
                            stats=SolveStats(iterations=1, ledger=ledger.snapshot(),
                                             extra={"v_max": v_max, "shortcut": True}))
    T = lowprec_iterations(v_max, eps, inst.n)
    mu_p = eps / (6 * v_max)
    oracle = ExactLvo(inst, mu=mu_p, eps=eps / 2, rng=rng, ledger=ledger)
    try:
        sol = framework_run(inst, oracle, eps=eps / 2, mu=3 * mu_p, T=T)
    except SubproblemInfeasible:
        return SolveOutcome(Status.INFEASIBLE, stats=_stats(len(oracle.rounds), oracle, ledger))
    x_bar = np.mean(sol.xs, axis=0)
    return SolveOutcome(Status.APPROXIMATE, x=x_bar, objective=float(inst.c @ x_bar),
                        stats=_stats(sol.T, oracle, ledger, sol, v_max=v_max))


def mpc_grid_solver(mpc: MpcInstance, eps: float):
    """Exact inner solve on the sampled covering rows, rounded up to the grid."""
    r_p = mpc.r_p

    def solve(sub: SubLp) -> np.ndarray:
        res = mpc_inner_solve(mpc.P, mpc.C[sub.rows], eps)
        if res.status is Status.INFEASIBLE:
            raise SubproblemInfeasible(f"{sub.size} sampled covering rows are infeasible with packing")
        return discretize_mpc(res.x, eps, r_p)

    return SolverCache(solve)


def mpc_run_eps(eps: float) -> float:
    """The final rescale divides by 1 - eps, so eps = 1 is run at 1/2 (still within 1 + 4 eps)."""
    if not 0 < eps <= 1:
        raise ContractError("eps must lie in (0, 1]")
    return min(eps, 0.5)


def finalize_mpc(mpc: MpcInstance, x_bar: np.ndarray, eps: float, ledger: QueryLedger):
    """Rescale x_bar by 1/(1 - eps); clip to the unit box only if covering survives the clip."""
    x = x_bar / (1.0 - eps)
    clipped = np.minimum(x, 1.0)
    ledger.read_rows(mpc.n_c)
    if np.all(mpc.C @ clipped >= 1.0 - TAU):
        return clipped, False
    return x, True


def mpc_solve(mpc: MpcInstance, eps: float, rng: np.random.Generator,
              ledger: Optional[QueryLedger] = None) -> SolveOutcome:
    """Mixed packing/covering: packing rows kept in every sub-solve, covering rows sampled."""
    ledger = ledger if ledger is not None else QueryLedger()
    e = mpc_run_eps(eps)
    lp = mpc.covering_lp()
    g = grid_cardinality(e, mpc.r_p)
    N = float(g) ** mpc.d
    T = mpc_iterations(e, mpc.n_c)
    oracle = ApproxLvo(lp, mu=e / 3, eps=0.0, rng=rng, ledger=ledger,
                       solver=mpc_grid_solver(mpc, e), N=N)
    try:
        sol = framework_run(lp, oracle, eps=0.0, mu=e, T=T)
    except SubproblemInfeasible:
        return SolveOutcome(Status.INFEASIBLE, stats=_stats(len(oracle.rounds), oracle, ledger))
    x_bar = np.mean(sol.xs, axis=0)
    x, outside = finalize_mpc(mpc, x_bar, e, ledger)
    stats = _stats(sol.T, oracle, ledger, sol, eps_run=e, grid_size=g,
                   x_bar=x_bar, outside_box=outside)
    return SolveOutcome(Status.APPROXIMATE, x=x, objective=0.0, stats=stats)
