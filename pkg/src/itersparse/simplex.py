"""Exact solvers for small dense LPs.

`simplex_solve` is the base solver every sampling oracle calls.  The LP
``max <c,x> s.t. G x <= h`` always carries its box rows, so the dual
``min <h,y> s.t. G^T y = c, y >= 0`` has an immediate feasible basis (one box
row per coordinate).  We run the primal simplex on that dual with Bland's
rule; the simplex multipliers of the dual basis are the primal vertex, and the
reduced costs are the primal slacks.  Each pivot costs one pass over the rows
plus three d x d solves, which suits d << m.

`vertex_enumeration_solve` is a brute-force oracle kept independent of the
simplex code path; tests compare the two.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .core import TAU, ContractError, LpInstance, SolveOutcome, SolveStats, Status
from .errors import CombinatorialBudgetExceeded, SimplexCyclingError

PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class SubLp:
    """Sampled rows of an instance plus its retained block and box bounds."""

    inst: LpInstance
    rows: np.ndarray

    def __post_init__(self):
        rows = np.unique(np.asarray(self.rows, dtype=np.int64))
        if rows.size and (rows[0] < 0 or rows[-1] >= self.inst.n):
            raise ContractError("row indices out of range")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @classmethod
    def full(cls, inst: LpInstance) -> "SubLp":
        return cls(inst, np.arange(inst.n))

    @property
    def size(self) -> int:
        return int(self.rows.size)

    def constraints(self):
        """Effective (G, h): sampled rows, retained rows, upper bounds, lower bounds."""
        inst = self.inst
        d = inst.d
        eye = np.eye(d)
        blocks_G = [inst.A[self.rows]]
        blocks_h = [inst.b[self.rows]]
        if inst.n_retained:
            blocks_G.append(inst.retained_A)
            blocks_h.append(inst.retained_b)
        blocks_G += [eye, -eye]
        blocks_h += [inst.domain.upper, -inst.domain.lower]
        return np.vstack(blocks_G), np.concatenate(blocks_h)


def solve_lp(G: np.ndarray, h: np.ndarray, c: np.ndarray, max_pivots: Optional[int] = None):
    """Maximise <c, x> subject to G x <= h.

    The last 2d rows of G must be the box rows ``I`` then ``-I``.
    Returns ``(x, basis, duals)`` or ``None`` when infeasible.
    """
    M, d = G.shape
    ub0 = M - 2 * d
    basis = np.where(c >= 0, ub0 + np.arange(d), ub0 + d + np.arange(d))
    if max_pivots is None:
        max_pivots = 50 * M + 1000
    for _ in range(max_pivots):
        GB = G[basis]
        x = np.linalg.solve(GB, h[basis])
        slack = h - G @ x
        viol = np.flatnonzero(slack < -TAU)
        if viol.size == 0:
            y = np.linalg.solve(GB.T, c)
            return x, basis, y
        enter = viol[0]  # Bland: lowest index with negative reduced cost
        y = np.linalg.solve(GB.T, c)
        alpha = np.linalg.solve(GB.T, G[enter])
        cand = np.flatnonzero(alpha > PIVOT_TOL)
        if cand.size == 0:
            return None  # dual unbounded, primal infeasible
        ratios = np.maximum(y[cand], 0.0) / alpha[cand]
        best = ratios.min()
        ties = cand[ratios <= best + 1e-15 * max(1.0, best)]
        leave = ties[np.argmin(basis[ties])]  # Bland: lowest basic index
        basis = basis.copy()
        basis[leave] = enter
    raise SimplexCyclingError(f"pivot cap {max_pivots} exceeded on {M}x{d} LP")


def simplex_solve(sub: SubLp) -> SolveOutcome:
    G, h = sub.constraints()
    c = sub.inst.c
    res = solve_lp(G, h, c)
    stats = SolveStats(iterations=0, max_sublp=sub.size)
    if res is None:
        return SolveOutcome(Status.INFEASIBLE, stats=stats)
    x, basis, y = res
    stats.extra["basis"] = tuple(int(i) for i in basis)
    stats.extra["duals"] = y
    return SolveOutcome(Status.OPTIMAL, x=x, objective=float(c @ x), stats=stats)


def vertex_enumeration_solve(sub: SubLp, budget: int = 10**6, chunk: int = 20000) -> SolveOutcome:
    """Enumerate every d-subset of effective constraints; keep the best feasible vertex."""
    G, h = sub.constraints()
    c = sub.inst.c
    M, d = G.shape
    total = comb(M, d)
    if total > budget:
        raise CombinatorialBudgetExceeded(f"C({M},{d}) = {total} exceeds budget {budget}")
    best_val, best_x = -np.inf, None
    combos = itertools.combinations(range(M), d)
    while True:
        idx = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if idx.size == 0:
            break
        mats = G[idx]
        rhs = h[idx]
        ok = np.abs(np.linalg.det(mats)) > 1e-12
        if not ok.any():
            continue
        xs = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
        # cheap rejection on the box rows (last 2d) and a small row block before the full check
        xs = xs[np.all(xs @ G[-2 * d:].T - h[-2 * d:] <= TAU, axis=1)]
        xs = xs[np.all(xs @ G[:64].T - h[:64] <= TAU, axis=1)]
        xs = xs[np.all(xs @ G.T - h <= TAU, axis=1)]
        if not xs.size:
            continue
        vals = xs @ c
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_x = float(vals[k]), xs[k]
    stats = SolveStats(max_sublp=sub.size, extra={"vertices_checked": total})
    if best_x is None:
        return SolveOutcome(Status.INFEASIBLE, stats=stats)
    return SolveOutcome(Status.OPTIMAL, x=best_x, objective=best_val, stats=stats)


def mpc_inner_solve(P, C_sampled, eps: float = 0.0) -> SolveOutcome:
    """Exact feasibility solve of P x <= 1, C_sampled x >= 1 over [0,1]^d.

    Maximises the smallest covering slack t (variables (x, t), t in [-1, d]).
    An exact feasible point is a (1+eps)-approximation for every eps.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    C = np.asarray(C_sampled, dtype=float)
    d = P.shape[1]
    if C.size == 0:
        C = C.reshape(0, d)
    if C.ndim != 2 or C.shape[1] != d:
        raise ContractError(f"covering block must have {d} columns")
    stats = SolveStats(max_sublp=C.shape[0])
    if C.shape[0] == 0:
        return SolveOutcome(Status.APPROXIMATE, x=np.zeros(d), objective=0.0, stats=stats)
    n_p = P.shape[0]
    D = d + 1
    G = np.zeros((n_p + C.shape[0] + 2 * D, D))
    h = np.zeros(G.shape[0])
    G[:n_p, :d] = P
    h[:n_p] = 1.0
    r = n_p + C.shape[0]
    G[n_p:r, :d] = -C
    G[n_p:r, d] = 1.0
    h[n_p:r] = -1.0
    G[r:r + D] = np.eye(D)
    G[r + D:] = -np.eye(D)
    h[r:r + D] = np.r_[np.ones(d), float(d)]
    h[r + D:] = np.r_[np.zeros(d), 1.0]
    obj = np.zeros(D)
    obj[d] = 1.0
    res = solve_lp(G, h, obj)
    if res is None or res[0][d] < -TAU:
        return SolveOutcome(Status.INFEASIBLE, stats=stats)
    x = np.clip(res[0][:d], 0.0, 1.0)
    stats.extra["min_cover_slack"] = float(res[0][d])
    return SolveOutcome(Status.APPROXIMATE, x=x, objective=float(res[0][d]), stats=stats)
