"""Seeded instance generators."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import BoxDomain, ContractError, LpInstance, MpcInstance
from .simplex import SubLp, solve_lp

KINDS = ("feasible-nondegenerate", "infeasible", "covering", "packing", "mixed", "mixed-infeasible")
LP_KINDS = ("feasible-nondegenerate", "infeasible", "covering", "packing")
MPC_KINDS = ("mixed", "mixed-infeasible")

B_NOISE = 1e-6
DEGENERACY_TOL = 1e-7
MAX_TRIES = 200


@dataclass(frozen=True)
class Generated:
    instance: Union[LpInstance, MpcInstance]
    point: Optional[np.ndarray] = None  # interior point (LP) or planted solution (MPC)


def _unit_rows(rng, n, d):
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def is_nondegenerate(inst: LpInstance, tol: float = DEGENERACY_TOL) -> bool:
    """Unique optimal basis: strictly positive basic duals, strictly positive nonbasic slacks."""
    G, h = SubLp.full(inst).constraints()
    res = solve_lp(G, h, inst.c)
    if res is None:
        return False
    x, basis, y = res
    if np.linalg.cond(G[basis]) > 1e10 or np.any(y <= tol):
        return False
    slack = h - G @ x
    nonbasic = np.ones(G.shape[0], dtype=bool)
    nonbasic[basis] = False
    return bool(np.all(slack[nonbasic] > tol))


def _feasible(rng, n, d):
    for _ in range(MAX_TRIES):
        A = _unit_rows(rng, n, d)
        b = rng.uniform(0.5, 1.0, n) + rng.uniform(0.0, B_NOISE, n)
        c = _unit_rows(rng, 1, d)[0]
        inst = LpInstance(A, b, c, BoxDomain.cube(d, -1.0, 1.0))
        if is_nondegenerate(inst):
            return Generated(inst, np.zeros(d))
    raise RuntimeError(f"no nondegenerate instance after {MAX_TRIES} draws")


def _infeasible(rng, n, d):
    A = np.zeros((2, d))
    A[0, 0], A[1, 0] = 1.0, -1.0
    b = np.array([-1.0, -2.0])
    if n > 2:
        A = np.vstack([A, _unit_rows(rng, n - 2, d)])
        b = np.concatenate([b, rng.uniform(0.5, 1.0, n - 2)])
    c = _unit_rows(rng, 1, d)[0]
    return Generated(LpInstance(A, b, c, BoxDomain.cube(d, -10.0, 10.0)))


def _covering(rng, n, d):
    C = rng.uniform(0.0, 1.0, (n, d))
    inst = LpInstance(-C, -np.ones(n), -np.ones(d), BoxDomain.cube(d, 0.0, 1.0))
    return Generated(inst, np.ones(d) if np.all(C.sum(axis=1) >= 1) else None)


def _packing(rng, n, d):
    P = rng.uniform(0.0, 1.0, (n, d))
    inst = LpInstance(P, np.ones(n), np.ones(d), BoxDomain.cube(d, 0.0, 1.0))
    return Generated(inst, np.zeros(d))


def _rows_until(rng, n, draw):
    rows = []
    for _ in range(10_000):
        rows.extend(r for r in draw() if r is not None)
        if len(rows) >= n:
            return np.array(rows[:n])
    raise RuntimeError("row rejection sampling did not converge")


def _mixed(rng, n, d, n_p):
    x_star = np.ones(d)
    if d > 1:
        # covering rows have max entry 1, so they can only reach 1 if sum(x*) is comfortably above 1
        x_star = rng.uniform(0.4, 1.0, d)
        while x_star.sum() < 1.25:
            x_star = rng.uniform(0.4, 1.0, d)

    def covering_batch():
        raw = rng.uniform(0.0, 1.0, (64, d))
        raw /= raw.max(axis=1, keepdims=True)
        out = []
        for row in raw:
            v = row @ x_star
            if v < 1.0:
                out.append(None)
                continue
            target = rng.uniform(1.0, min(1.5, v))
            out.append(row * (target / v))
        return out

    def packing_batch():
        out = []
        for _ in range(64):
            k = rng.integers(1, d + 1)
            row = np.zeros(d)
            row[rng.choice(d, size=k, replace=False)] = rng.uniform(0.05, 1.0, k)
            row *= rng.uniform(0.7, 1.0) / (row @ x_star)
            out.append(row if row.max() <= 1.0 else None)
        return out

    C = _rows_until(rng, n, covering_batch)
    P = _rows_until(rng, n_p, packing_batch) if n_p else np.zeros((0, d))
    return Generated(MpcInstance(P, C), x_star)


def _mixed_infeasible(rng, n, d, n_p):
    # sum(x) <= 1 while every covering row has entries below 0.9, so C x <= 0.9
    P = np.ones((max(n_p, 1), d))
    C = rng.uniform(0.0, 0.9, (n, d))
    return Generated(MpcInstance(P, C))


def generate(kind: str, n: int, d: int, seed: int, n_p: int = 2) -> Generated:
    if kind not in KINDS:
        raise ContractError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if not (isinstance(n, (int, np.integer)) and isinstance(d, (int, np.integer))):
        raise ContractError("n and d must be integers")
    if d < 1 or n < d:
        raise ContractError(f"need n >= d >= 1, got n={n}, d={d}")
    if kind == "infeasible" and n < 2:
        raise ContractError("infeasible kind needs n >= 2")
    rng = np.random.default_rng(seed)
    if kind == "feasible-nondegenerate":
        return _feasible(rng, n, d)
    if kind == "infeasible":
        return _infeasible(rng, n, d)
    if kind == "covering":
        return _covering(rng, n, d)
    if kind == "packing":
        return _packing(rng, n, d)
    if n_p < 0:
        raise ContractError("n_p must be nonnegative")
    if kind == "mixed":
        return _mixed(rng, n, d, n_p)
    return _mixed_infeasible(rng, n, d, n_p)


def generate_instance(kind: str, n: int, d: int, seed: int, n_p: int = 2):
    return generate(kind, n, d, seed, n_p).instance
