"""Low-violation oracles: sample constraints by weight, solve the sample, verify.

Two constructions are provided.  `ExactLvo` samples at rate 2d/mu and calls
an exact solver; `ApproxLvo` samples at rate ln(N n)/mu and calls any
deterministic solver whose set of possible outputs has size at most N.  The
grid rounding used to bound N for mixed packing/covering lives here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import ContractError, LpInstance, QueryLedger, Status, violation_vector
from .errors import RetryBudgetExceeded, SubproblemInfeasible
from .mwu import CONTRACT_TOL, weighted_violation
from .simplex import SubLp, simplex_solve


def bernoulli_subset(q, rng: np.random.Generator) -> np.ndarray:
    """Include each i independently with probability min(q_i, 1)."""
    q = np.asarray(q, dtype=float)
    return np.flatnonzero(rng.random(q.shape[0]) < q)


def retry_budget(n: int) -> int:
    return max(1, math.ceil(64 * math.log(n)))


class SolverCache:
    """Memoize a deterministic solver by sampled row set."""

    def __init__(self, solve: Callable[[SubLp], np.ndarray], maxsize: int = 4096):
        self.solve = solve
        self.maxsize = maxsize
        self.store: dict = {}
        self.hits = 0

    def __call__(self, sub: SubLp) -> np.ndarray:
        key = sub.rows.tobytes()
        if key in self.store:
            self.hits += 1
            return self.store[key]
        x = self.solve(sub)
        if len(self.store) < self.maxsize:
            self.store[key] = x
        return x


def exact_solver(sub: SubLp) -> np.ndarray:
    res = simplex_solve(sub)
    if res.status is Status.INFEASIBLE:
        raise SubproblemInfeasible(f"sampled relaxation with {sub.size} rows is infeasible")
    return res.x


@dataclass
class _SamplingOracle:
    inst: LpInstance
    mu: float
    eps: float
    rng: np.random.Generator
    ledger: Optional[QueryLedger] = None
    solver: Optional[Callable[[SubLp], np.ndarray]] = None
    max_rounds: Optional[int] = None
    sample_sizes: list = field(default_factory=list)
    rounds: list = field(default_factory=list)

    def __post_init__(self):
        if not self.mu > 0:
            raise ContractError("mu must be positive")
        if self.max_rounds is None:
            self.max_rounds = retry_budget(self.inst.n)

    def rate(self) -> float:
        raise NotImplementedError

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.inst.n,):
            raise ContractError("p must have one entry per constraint")
        q = np.minimum(self.rate() * p, 1.0)
        for k in range(1, self.max_rounds + 1):
            rows = bernoulli_subset(q, self.rng)
            self.sample_sizes.append(int(rows.size))
            if self.ledger is not None:
                self.ledger.read_rows(rows.size)
            x = self.solver(SubLp(self.inst, rows))
            v = violation_vector(self.inst, x, self.eps, self.ledger)
            if weighted_violation(p, v) <= self.mu + CONTRACT_TOL:
                self.rounds.append(k)
                return x, v
        raise RetryBudgetExceeded(f"no low-violation point after {self.max_rounds} rounds")


@dataclass
class ExactLvo(_SamplingOracle):
    """Sample with probability min(2d/mu p_i, 1) and solve the sample exactly."""

    def __post_init__(self):
        super().__post_init__()
        if self.solver is None:
            self.solver = SolverCache(exact_solver)

    def rate(self) -> float:
        return 2.0 * self.inst.d / self.mu


@dataclass
class ApproxLvo(_SamplingOracle):
    """Sample with probability min(ln(N n)/mu p_i, 1) for a solver with <= N outputs."""

    N: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.solver is None:
            raise ContractError("ApproxLvo needs a solver")
        if not self.N >= 1:
            raise ContractError("N must be at least 1")

    def rate(self) -> float:
        return log_nn(self.N, self.inst.n) / self.mu


def log_nn(N: float, n: int) -> float:
    """ln(N n), accepting N given as a float that may be astronomically large."""
    return math.log(N) + math.log(n) if N < math.inf else math.inf


def exact_lvo(inst, p, mu, eps, rng, ledger=None):
    return ExactLvo(inst, mu, eps, rng, ledger)(p)


def approx_lvo(inst, p, mu, eps, solver, N, rng, ledger=None):
    return ApproxLvo(inst, mu, eps, rng, ledger, solver=solver, N=N)(p)


# -- grid rounding for mixed packing/covering -------------------------------

def _check_grid_args(eps: float, r_p: int) -> int:
    if not 0 < eps <= 1:
        raise ContractError("eps must lie in (0, 1]")
    return max(int(r_p), 1)


def grid_values(eps: float, r_p: int) -> np.ndarray:
    """{0} U {(eps/r_p)(1+eps)^k < 1 : k >= 0} U {1}, sorted."""
    r_p = _check_grid_args(eps, r_p)
    base = eps / r_p
    vals = [0.0]
    v = base
    while v < 1.0:
        vals.append(v)
        v *= 1.0 + eps
    vals.append(1.0)
    return np.array(vals)


def grid_cardinality(eps: float, r_p: int) -> int:
    """Per-coordinate bound ceil(2 + 4 ln(r_p/eps)/eps), never below 2."""
    r_p = _check_grid_args(eps, r_p)
    return max(2, math.ceil(2 + 4 * math.log(r_p / eps) / eps))


def discretize_mpc(x, eps: float, r_p: int) -> np.ndarray:
    """Round every coordinate up to the nearest grid value."""
    grid = grid_values(eps, r_p)
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return grid[np.searchsorted(grid, x, side="left")]


def on_grid(x, eps: float, r_p: int) -> bool:
    return bool(np.isin(np.asarray(x, dtype=float), grid_values(eps, r_p)).all())
