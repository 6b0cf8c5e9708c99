"""Classical simulation of the quantum sampling algorithms.

Every procedure returns a sample from exactly the distribution its quantum
counterpart would; the quantum part lives only in the ledger, which charges
ceil(c * sqrt(n * max(sum q, 1)) * L^e) weight queries per subset draw
(L = max(ln n, 1)), each multiplied by the row cost of one weight query.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classical import (clarkson_iterations, finalize_mpc, lowprec_iterations, mpc_grid_solver,
                        mpc_iterations, mpc_run_eps)
from .core import (ContractError, LpInstance, MpcInstance, QueryLedger, SolveOutcome, SolveStats,
                   Status, TAU, compute_widths)
from .errors import SubproblemInfeasible
from .oracles import SolverCache, exact_solver
from .simplex import SubLp

ESTIMATION_S = 71
MAX_LOG2_WEIGHT = 1000.0


@dataclass(frozen=True)
class QueryCostModel:
    charge_constant: float = 1.0
    polylog_exponent: int = 1
    record_actual: bool = True
    inject_failures: bool = False
    failure_rate: Optional[float] = None

    def __post_init__(self):
        if not self.charge_constant > 0:
            raise ContractError("charge_constant must be positive")
        if self.polylog_exponent < 0:
            raise ContractError("polylog_exponent must be nonnegative")

    def polylog(self, n: int) -> float:
        return max(math.log(n), 1.0) ** self.polylog_exponent if n > 1 else 1.0

    def subset_charge(self, n: int, total_q: float) -> int:
        return math.ceil(self.charge_constant * math.sqrt(n * max(total_q, 1.0)) * self.polylog(n))

    def search_charge(self, n: int, p: float) -> int:
        return math.ceil(self.charge_constant * math.sqrt(n * math.log(1.0 / p)))


class WeightOracle:
    """Query access to w_i = 2^log2w_i; each query costs `row_cost` row reads.

    When every exponent is an integer (violation counts) the sampler groups
    rows by weight, which keeps exact sampling cheap for large n.
    """

    def __init__(self, log2w, row_cost: int = 1, integral: Optional[bool] = None):
        self.log2w = np.asarray(log2w)
        if self.log2w.ndim != 1:
            raise ContractError("weights must be a vector")
        if self.log2w.size and self.log2w.max() > MAX_LOG2_WEIGHT:
            raise OverflowError("weight exponent beyond float range")
        self.row_cost = int(row_cost)
        if integral is None:
            integral = np.issubdtype(self.log2w.dtype, np.integer)
        self.integral = integral

    @classmethod
    def from_weights(cls, w, row_cost: int = 1) -> "WeightOracle":
        w = np.asarray(w, dtype=float)
        if np.any(w < 0):
            raise ContractError("weights must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls(np.log2(w), row_cost, integral=False)

    @property
    def n(self) -> int:
        return self.log2w.shape[0]

    def values(self) -> np.ndarray:
        return np.exp2(self.log2w.astype(float))

    def total(self) -> float:
        return float(self.values().sum())


# -- subset sampling --------------------------------------------------------

def _materialize(members_of, sizes, rng) -> np.ndarray:
    picked = [rng.choice(members_of(g), size=k, replace=False) for g, k in sizes if k > 0]
    return np.sort(np.concatenate(picked)) if picked else np.empty(0, dtype=np.int64)


def _median_draw(q: np.ndarray, R: int, rng, counts: Optional[np.ndarray] = None):
    """R independent Bernoulli(q) subsets; return the one of median size and all sizes.

    Rows with equal q are exchangeable, so each repetition only needs the
    number drawn per group (a binomial); only the chosen set is materialized,
    uniformly within each group.
    """
    n = q.shape[0]
    if counts is not None:
        sizes_g = np.bincount(counts)
        keys = np.flatnonzero(sizes_g)
        if keys.size < 64:
            first = np.empty(sizes_g.size, dtype=np.int64)
            first[counts[::-1]] = np.arange(n - 1, -1, -1)  # later writes win: first occurrence
            q_g = q[first[keys]]
            K = rng.binomial(sizes_g[keys][None, :], q_g[None, :], size=(R, keys.size))
            totals = K.sum(axis=1)
            pick = int(np.argsort(totals, kind="stable")[R // 2])
            S = _materialize(lambda g: np.flatnonzero(counts == keys[g]),
                             enumerate(K[pick]), rng)
            return S, totals
    vals, inv, cnt = np.unique(q, return_inverse=True, return_counts=True)
    if vals.size <= max(16, n // 32):
        K = rng.binomial(cnt[None, :], vals[None, :], size=(R, vals.size))
        totals = K.sum(axis=1)
        pick = int(np.argsort(totals, kind="stable")[R // 2])
        S = _materialize(lambda g: np.flatnonzero(inv == g), enumerate(K[pick]), rng)
        return S, totals
    masks = rng.random((R, n)) < q
    totals = masks.sum(axis=1)
    pick = int(np.argsort(totals, kind="stable")[R // 2])
    return np.flatnonzero(masks[pick]), totals


def q_subset_sample(q, model: QueryCostModel, ledger: QueryLedger, rng: np.random.Generator,
                    row_cost: int = 1, iteration: Optional[int] = None) -> np.ndarray:
    """One exact Bernoulli(q) subset, charged ceil(c sqrt(n max(sum q, 1)) L^e) queries."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0) or np.any(q > 1):
        raise ContractError("q must lie in [0, 1]")
    n = q.shape[0]
    unit = model.subset_charge(n, float(q.sum()))
    ledger.charge("q_subset_sample", unit, row_cost, iteration, qram_bits=unit)
    S, _ = _median_draw(q, 1, rng)
    return S


def repetitions(p: float) -> int:
    if not 0 < p < 1:
        raise ContractError("p must lie in (0, 1)")
    return math.ceil(1 + 5 * math.log(1.0 / p))


def quantum_sampling(w: WeightOracle, s: float, W: float, p: float, model: QueryCostModel,
                     ledger: QueryLedger, rng: np.random.Generator, iteration: Optional[int] = None,
                     procedure: str = "quantum_sampling") -> np.ndarray:
    """Median-size set among R = ceil(1 + 5 ln(1/p)) draws with q = min(s w / W, 1)."""
    if s < 6:
        raise ContractError("s must be at least 6")
    if not W > 0:
        raise ContractError("W must be positive")
    R = repetitions(p)
    with np.errstate(over="ignore"):
        q = np.minimum(s * np.exp2(w.log2w.astype(float) - math.log2(W)), 1.0)
    unit = model.subset_charge(w.n, float(q.sum()))
    ledger.charge(procedure, R * unit, w.row_cost, iteration, qram_bits=unit)
    counts = None
    if w.integral and w.n:
        shift = int(w.log2w.min())
        counts = (w.log2w - shift).astype(np.int64)
    S, _ = _median_draw(q, R, rng, counts)
    return S


def estimate_from_size(W: float, size: int, s: int = ESTIMATION_S) -> float:
    return W / (2 * s) * (math.sqrt(3 + 2 * size) - math.sqrt(3)) ** 2


def estimation_sum(w: WeightOracle, W: float, p: float, model: QueryCostModel,
                   ledger: QueryLedger, rng: np.random.Generator,
                   iteration: Optional[int] = None) -> float:
    """Estimate ||w||_1 to within a factor 2 from the size of one s = 71 sample.

    When s w_i / W >= 1 for every i the sample is all of [n] and its size says
    nothing about ||w||_1; the exact sum is then read classically, which costs
    n row_cost reads, fewer than the quantum draw would be charged.
    """
    if w.n and ESTIMATION_S * np.exp2(float(w.log2w.min()) - math.log2(W)) >= 1.0:
        ledger.read_rows(w.n * w.row_cost)
        return w.total()
    S = quantum_sampling(w, ESTIMATION_S, W, p, model, ledger, rng, iteration, "estimation_sum")
    return estimate_from_size(W, int(S.size))


class _AllSatisfied:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "AllSatisfied"

    def __bool__(self):
        return False


ALL_SATISFIED = _AllSatisfied()


def grover_find_violated(inst: LpInstance, x, eps: float, p: float, model: QueryCostModel,
                         ledger: QueryLedger, rng: np.random.Generator,
                         iteration: Optional[int] = None):
    """Index of a violated row (uniform among them) or ALL_SATISFIED."""
    if not 0 < p < 1:
        raise ContractError("p must lie in (0, 1)")
    ledger.charge("grover_find_violated", model.search_charge(inst.n, p), 1, iteration)
    if model.record_actual:
        ledger.read_rows(inst.n)
    bad = np.flatnonzero(inst.A @ np.asarray(x, dtype=float) - inst.b - eps > TAU)
    if model.inject_failures:
        rate = p if model.failure_rate is None else model.failure_rate
        if rng.random() < rate:
            return ALL_SATISFIED
    if bad.size == 0:
        return ALL_SATISFIED
    return int(rng.choice(bad))


# -- the four algorithms ----------------------------------------------------

def failure_probability(n: int) -> float:
    ln = math.log(max(n, 2))
    return 1.0 / (32 * n * ln) / (100 * n * n)


def _violations(inst: LpInstance, x, slack: float, model, ledger) -> np.ndarray:
    if model.record_actual:
        ledger.read_rows(inst.n)
    return (inst.A @ x - inst.b - slack > TAU).astype(np.int64)


def _check_ratio(ratios: list, total: float, W: float) -> None:
    ratios.append(total / W if W > 0 else math.inf)


class _CountingRun:
    """Shared loop of the power-of-two-weight algorithms (exact, mixed, one-sided)."""

    def __init__(self, inst, s, T, slack, solver, model, ledger, rng, W0):
        self.inst, self.s, self.T, self.slack = inst, s, T, slack
        self.solver, self.model, self.ledger, self.rng = solver, model, ledger, rng
        self.p = failure_probability(inst.n)
        self.counts = np.zeros(inst.n, dtype=np.int64)
        self.W = float(W0)
        self.xs, self.sizes, self.ratios = [], [], []

    def run(self):
        for t in range(self.T):
            self.step(t)

    def step(self, t):
        _check_ratio(self.ratios, float(np.exp2(self.counts.astype(float)).sum()), self.W)
        S = quantum_sampling(WeightOracle(self.counts, row_cost=t), self.s, self.W, self.p,
                             self.model, self.ledger, self.rng, iteration=t)
        self.sizes.append(int(S.size))
        self.ledger.read_rows(S.size)
        x = self.solver(SubLp(self.inst, S))
        self.counts = self.counts + _violations(self.inst, x, self.slack, self.model, self.ledger)
        self.xs.append(x)
        self.W = estimation_sum(WeightOracle(self.counts, row_cost=t + 1), self.W, self.p,
                                self.model, self.ledger, self.rng, iteration=t)

    def stats(self, **extra) -> SolveStats:
        ok = all(1.0 - 1e-12 <= r <= 2.0 + 1e-12 for r in self.ratios)
        st = SolveStats(iterations=len(self.xs), max_sublp=max(self.sizes, default=0),
                        ledger=self.ledger.snapshot(), extra=dict(extra))
        st.extra.update(sample_sizes=list(self.sizes), weight_ratios=list(self.ratios),
                        estimate_invariant=ok, s=self.s, planned_T=self.T,
                        max_frequency=int(self.counts.max()))
        return st


def _setup(model, ledger):
    return (model if model is not None else QueryCostModel(),
            ledger if ledger is not None else QueryLedger())


def quantum_clarkson(inst: LpInstance, model: Optional[QueryCostModel] = None,
                     rng: Optional[np.random.Generator] = None,
                     ledger: Optional[QueryLedger] = None) -> SolveOutcome:
    """Sample with s = 6d^2 for 24 d ln n rounds, then search the iterates for a feasible one."""
    model, ledger = _setup(model, ledger)
    rng = rng if rng is not None else np.random.default_rng()
    d, n = inst.d, inst.n
    run = _CountingRun(inst, 6 * d * d, clarkson_iterations(d, n), 0.0,
                       SolverCache(exact_solver), model, ledger, rng, n)
    try:
        run.run()
    except SubproblemInfeasible:
        return SolveOutcome(Status.INFEASIBLE, stats=run.stats())
    for j, x in enumerate(run.xs):
        if grover_find_violated(inst, x, 0.0, run.p, model, ledger, rng, iteration=j) is ALL_SATISFIED:
            return SolveOutcome(Status.OPTIMAL, x=x, objective=float(inst.c @ x),
                                stats=run.stats(first_feasible=j))
    return SolveOutcome(Status.BOTTOM, stats=run.stats())


def mpc_sample_size(d: int, eps: float, r_p: int) -> float:
    """6 (d/eps) ln(max(ln(r_p/eps), 1)/eps), never below 6."""
    inner = max(math.log(max(r_p, 1) / eps), 1.0)
    return max(6.0, 6 * (d / eps) * math.log(inner / eps))


def quantum_mpc(mpc: MpcInstance, eps: float, model: Optional[QueryCostModel] = None,
                rng: Optional[np.random.Generator] = None,
                ledger: Optional[QueryLedger] = None) -> SolveOutcome:
    model, ledger = _setup(model, ledger)
    rng = rng if rng is not None else np.random.default_rng()
    e = mpc_run_eps(eps)
    lp = mpc.covering_lp()
    run = _CountingRun(lp, mpc_sample_size(mpc.d, e, mpc.r_p), mpc_iterations(e, mpc.n_c), 0.0,
                       mpc_grid_solver(mpc, e), model, ledger, rng, mpc.n_c)
    try:
        run.run()
    except SubproblemInfeasible:
        return SolveOutcome(Status.INFEASIBLE, stats=run.stats())
    x_bar = np.mean(run.xs, axis=0)
    x, outside = finalize_mpc(mpc, x_bar, e, ledger)
    return SolveOutcome(Status.APPROXIMATE, x=x, objective=0.0,
                        stats=run.stats(eps_run=e, x_bar=x_bar, outside_box=outside))


def _relaxation_only(inst, ledger, v_max):
    try:
        x = exact_solver(SubLp(inst, np.empty(0, dtype=np.int64)))
    except SubproblemInfeasible:
        return SolveOutcome(Status.INFEASIBLE, stats=SolveStats(ledger=ledger.snapshot()))
    return SolveOutcome(Status.APPROXIMATE, x=x, objective=float(inst.c @ x),
                        stats=SolveStats(iterations=1, ledger=ledger.snapshot(),
                                         extra={"v_max": v_max, "shortcut": True}))


def quantum_lp_one_sided(inst: LpInstance, eps: float, model: Optional[QueryCostModel] = None,
                         rng: Optional[np.random.Generator] = None,
                         ledger: Optional[QueryLedger] = None) -> SolveOutcome:
    """Power-of-two weights on violations beyond eps; s = 6 d V/eps, T = 24 (V/eps) ln n."""
    if not eps > 0:
        raise ContractError("eps must be positive")
    model, ledger = _setup(model, ledger)
    rng = rng if rng is not None else np.random.default_rng()
    v_max, _ = compute_widths(inst)
    if eps >= v_max:
        return _relaxation_only(inst, ledger, v_max)
    s = max(6.0, 6 * inst.d * v_max / eps)
    run = _CountingRun(inst, s, lowprec_iterations(v_max, eps, inst.n), eps,
                       SolverCache(exact_solver), model, ledger, rng, inst.n)
    try:
        run.run()
    except SubproblemInfeasible:
        return SolveOutcome(Status.INFEASIBLE, stats=run.stats())
    x_bar = np.mean(run.xs, axis=0)
    return SolveOutcome(Status.APPROXIMATE, x=x_bar, objective=float(inst.c @ x_bar),
                        stats=run.stats(v_max=v_max))


def two_sided_iterations(rho: float, eps: float, n: int) -> int:
    return max(1, math.ceil(16 * (rho / eps) * (math.log(n) if n > 1 else 0.0)))


def quantum_lp_two_sided(inst: LpInstance, eps: float, model: Optional[QueryCostModel] = None,
                         rng: Optional[np.random.Generator] = None,
                         ledger: Optional[QueryLedger] = None) -> SolveOutcome:
    """Weights 2^((A sum x - t b)/rho), one row read per weight query; s = 6 d rho/eps."""
    if not eps > 0:
        raise ContractError("eps must be positive")
    model, ledger = _setup(model, ledger)
    rng = rng if rng is not None else np.random.default_rng()
    n, d = inst.n, inst.d
    _, rho = compute_widths(inst)
    if rho <= 0:
        rho = eps  # every row is tight over the whole box; any scale works
    s = max(6.0, 6 * d * rho / eps)
    T = two_sided_iterations(rho, eps, n)
    p = failure_probability(n)
    solver = SolverCache(exact_solver)
    W = float(n)
    log2w = np.zeros(n)
    x_sum = np.zeros(d)
    sizes, ratios, steps = [], [], []
    for t in range(T):
        _check_ratio(ratios, float(np.exp2(log2w).sum()), W)
        S = quantum_sampling(WeightOracle(log2w, 1, integral=False), s, W, p, model, ledger, rng, t)
        sizes.append(int(S.size))
        ledger.read_rows(S.size)
        try:
            x = solver(SubLp(inst, S))
        except SubproblemInfeasible:
            return SolveOutcome(Status.INFEASIBLE, stats=SolveStats(
                iterations=t, max_sublp=max(sizes), ledger=ledger.snapshot()))
        x_sum = x_sum + x
        if model.record_actual:
            ledger.read_rows(n)
        new = (inst.A @ x_sum - (t + 1) * inst.b) / rho
        steps.append(float(np.abs(new - log2w).max()))
        log2w = new
        W = estimation_sum(WeightOracle(log2w, 1, integral=False), W / 2, p, model, ledger, rng, t)
    x_bar = x_sum / T
    st = SolveStats(iterations=T, max_sublp=max(sizes), ledger=ledger.snapshot(),
                    extra=dict(rho=rho, s=s, planned_T=T, sample_sizes=sizes, weight_ratios=ratios,
                               max_log2_step=max(steps), final_log2w_max=float(log2w.max())))
    return SolveOutcome(Status.APPROXIMATE, x=x_bar, objective=float(inst.c @ x_bar), stats=st)
