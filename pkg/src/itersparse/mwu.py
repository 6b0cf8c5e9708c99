"""Multiplicative weights over constraints with base-2 weights.

Weights are never stored directly: we keep the integer number of times each
constraint has been violated and derive w_i = 2^count_i on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import ContractError, LpInstance, ViolationVector
from .errors import MwuBoundViolated, OracleContractBroken

CONTRACT_TOL = 1e-12


@dataclass
class WeightState:
    counts: np.ndarray
    t: int = 0

    @classmethod
    def uniform(cls, n: int) -> "WeightState":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    def weights(self) -> np.ndarray:
        return np.exp2(self.counts.astype(float))

    def update(self, v: ViolationVector) -> None:
        if v.bits.shape != self.counts.shape:
            raise ContractError("violation vector length does not match weight state")
        self.counts = self.counts + v.bits.astype(np.int64)
        self.t += 1


def probabilities(ws: WeightState) -> np.ndarray:
    """p_i = 2^counts_i / sum_k 2^counts_k, computed after shifting by the max count."""
    c = ws.counts
    w = np.exp2((c - c.max()).astype(float))
    return w / w.sum()


def weighted_violation(p, v) -> float:
    bits = v.bits if isinstance(v, ViolationVector) else np.asarray(v)
    p = np.asarray(p, dtype=float)
    if p.shape != bits.shape:
        raise ContractError(f"length mismatch: p has {p.shape}, v has {bits.shape}")
    return float(p @ bits)


def smax(x) -> float:
    x = np.asarray(x, dtype=float)
    m = x.max()
    return float(m + np.log(np.exp(x - m).sum()))


def smax_grad(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    e = np.exp(x - x.max())
    return e / e.sum()


def smax_check(x, delta) -> bool:
    """smax(x + delta) <= smax(x) + 2 <grad smax(x), delta> + 1e-9."""
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if x.shape != delta.shape:
        raise ContractError("x and delta must have the same shape")
    return smax(x + delta) <= smax(x) + 2.0 * float(smax_grad(x) @ delta) + 1e-9


def anytime_bound(n: int, t: int, mu_prime: float) -> float:
    """Largest count reachable after t accepted steps: log2 n + t log2(1 + mu')."""
    return math.log2(n) + t * math.log2(1.0 + mu_prime)


@dataclass
class SolutionSet:
    xs: list
    eps: float
    mu: float
    counts: np.ndarray
    planned_T: int
    weighted: list = field(default_factory=list)

    @property
    def T(self) -> int:
        return len(self.xs)

    def max_frequency(self) -> int:
        return int(self.counts.max()) if self.counts.size else 0


Oracle = Callable[[np.ndarray], tuple]


def framework_run(inst: LpInstance, oracle: Oracle, eps: float, mu: float, T: int,
                  stop_when: Optional[Callable[[np.ndarray, ViolationVector], bool]] = None) -> SolutionSet:
    """Run MWU for up to T steps against an oracle meeting target mu/3.

    Every accepted step is checked against the oracle contract, and the
    frequency bound max_i count_i <= 3 (mu/3) T is asserted whenever
    T >= ln n / (mu/3).  `stop_when(x, v)` ends the run early (used by the
    exact solver, which only needs the first fully feasible iterate).
    """
    if mu <= 0:
        raise ContractError("mu must be positive")
    if T < 1:
        raise ContractError("T must be at least 1")
    n = inst.n
    mu_p = mu / 3.0
    ws = WeightState.uniform(n)
    xs, weighted = [], []
    check_final = T >= math.log(n) / mu_p
    for _ in range(T):
        p = probabilities(ws)
        x, v = oracle(p)
        val = weighted_violation(p, v)
        if val > mu_p + CONTRACT_TOL:
            raise OracleContractBroken(f"weighted violation {val:.6g} exceeds {mu_p:.6g} at step {ws.t}")
        ws.update(v)
        xs.append(x)
        weighted.append(val)
        top = int(ws.counts.max())
        if top > anytime_bound(n, ws.t, mu_p) + 1e-9:
            raise MwuBoundViolated(f"count {top} above potential bound at step {ws.t}")
        if check_final and top > 3.0 * mu_p * T + 1e-9:
            raise MwuBoundViolated(f"count {top} exceeds 3 mu' T = {3 * mu_p * T:.6g}")
        if stop_when is not None and stop_when(x, v):
            break
    return SolutionSet(xs, eps, mu, ws.counts, T, weighted)
