"""Core data model: LP and mixed packing/covering instances, violation
indicators, widths, the query ledger and solver outcomes."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Absolute comparison tolerance on <A_i, x> - b_i - eps.
TAU = 1e-9


class ContractError(ValueError):
    """Raised when an operation is called with arguments that break its contract."""


def _frozen(a, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise ContractError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class BoxDomain:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen(self.lower, 1, "lower")
        hi = _frozen(self.upper, 1, "upper")
        if lo.shape != hi.shape:
            raise ContractError("lower and upper must have the same length")
        if np.any(lo > hi):
            raise ContractError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, d: int, lo: float, hi: float) -> "BoxDomain":
        return cls(np.full(d, float(lo)), np.full(d, float(hi)))

    @property
    def d(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class LpInstance:
    """max <c, x>  s.t.  A x <= b,  x in box,  retained_A x <= retained_b.

    The retained block is enforced in every sub-problem and never sampled.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    domain: BoxDomain
    retained_A: Optional[np.ndarray] = None
    retained_b: Optional[np.ndarray] = None

    def __post_init__(self):
        A = _frozen(self.A, 2, "A")
        b = _frozen(self.b, 1, "b")
        c = _frozen(self.c, 1, "c")
        n, d = A.shape
        if n < 1 or d < 1:
            raise ContractError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        if b.shape != (n,):
            raise ContractError(f"b must have length n={n}, got {b.shape[0]}")
        if c.shape != (d,):
            raise ContractError(f"c must have length d={d}, got {c.shape[0]}")
        if self.domain.d != d:
            raise ContractError(f"domain has dimension {self.domain.d}, expected {d}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if (self.retained_A is None) != (self.retained_b is None):
            raise ContractError("retained_A and retained_b must be given together")
        if self.retained_A is not None:
            RA = _frozen(np.atleast_2d(self.retained_A), 2, "retained_A")
            Rb = _frozen(np.atleast_1d(self.retained_b), 1, "retained_b")
            if RA.shape[1] != d or Rb.shape != (RA.shape[0],):
                raise ContractError("retained block must have d columns and matching rhs")
            object.__setattr__(self, "retained_A", RA)
            object.__setattr__(self, "retained_b", Rb)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def n_retained(self) -> int:
        return 0 if self.retained_A is None else self.retained_A.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LpInstance):
            return NotImplemented
        same = (
            np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.domain.lower, other.domain.lower)
            and np.array_equal(self.domain.upper, other.domain.upper)
            and self.n_retained == other.n_retained
        )
        if same and self.n_retained:
            same = np.array_equal(self.retained_A, other.retained_A) and np.array_equal(
                self.retained_b, other.retained_b
            )
        return bool(same)

    __hash__ = object.__hash__


@dataclass(frozen=True)
class MpcInstance:
    """Mixed packing/covering feasibility: find x in [0,1]^d, P x <= 1, C x >= 1."""

    P: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        P = _frozen(self.P, 2, "P")
        C = _frozen(self.C, 2, "C")
        if P.shape[1] != C.shape[1]:
            raise ContractError("P and C must have the same number of columns")
        if C.shape[0] < 1 or C.shape[1] < 1:
            raise ContractError("need at least one covering row and one variable")
        for name, M in (("P", P), ("C", C)):
            if M.size and (M.min() < 0 or M.max() > 1):
                raise ContractError(f"{name} entries must lie in [0, 1]")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "C", C)

    @property
    def d(self) -> int:
        return self.C.shape[1]

    @property
    def n_p(self) -> int:
        return self.P.shape[0]

    @property
    def n_c(self) -> int:
        return self.C.shape[0]

    @property
    def r_p(self) -> int:
        return int((self.P != 0).sum(axis=1).max()) if self.n_p else 0

    @property
    def r_c(self) -> int:
        return int((self.C != 0).sum(axis=1).max())

    def covering_lp(self) -> LpInstance:
        """Covering rows as `-C x <= -1` over [0,1]^d with packing retained."""
        d = self.d
        return LpInstance(
            A=-self.C,
            b=-np.ones(self.n_c),
            c=np.zeros(d),
            domain=BoxDomain.cube(d, 0.0, 1.0),
            retained_A=self.P if self.n_p else None,
            retained_b=np.ones(self.n_p) if self.n_p else None,
        )

    def __eq__(self, other):
        if not isinstance(other, MpcInstance):
            return NotImplemented
        return bool(np.array_equal(self.P, other.P) and np.array_equal(self.C, other.C))

    __hash__ = object.__hash__


@dataclass(frozen=True)
class ViolationVector:
    bits: np.ndarray
    slack: float

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def any(self) -> bool:
        return bool(self.bits.any())


@dataclass(frozen=True)
class LedgerRecord:
    procedure: str
    iteration: Optional[int]
    units: int
    row_cost: int
    charge: int
    qram_bits: int = 0


@dataclass
class QueryLedger:
    """Classical row reads and modelled quantum query charges for one run."""

    classical_row_reads: int = 0
    quantum_query_charge: int = 0
    log: list = field(default_factory=list)

    def read_rows(self, k: int) -> None:
        if k < 0:
            raise ContractError("row read count must be nonnegative")
        self.classical_row_reads += int(k)

    def charge(self, procedure: str, units: int, row_cost: int = 1,
               iteration: Optional[int] = None, qram_bits: int = 0) -> int:
        if units < 0 or row_cost < 0:
            raise ContractError("charges must be nonnegative")
        amount = int(units) * int(row_cost)
        self.quantum_query_charge += amount
        self.log.append(LedgerRecord(procedure, iteration, int(units), int(row_cost),
                                     amount, int(qram_bits)))
        return amount

    def logged_total(self) -> int:
        return sum(r.charge for r in self.log)

    def snapshot(self) -> dict:
        return {
            "classical_row_reads": self.classical_row_reads,
            "quantum_query_charge": self.quantum_query_charge,
            "records": len(self.log),
        }


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    APPROXIMATE = "Approximate"
    INFEASIBLE = "Infeasible"
    BOTTOM = "Bottom"


@dataclass
class SolveStats:
    iterations: int = 0
    max_sublp: int = 0
    ledger: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


@dataclass
class SolveOutcome:
    status: Status
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    stats: SolveStats = field(default_factory=SolveStats)

    def __post_init__(self):
        has_x = self.x is not None
        if has_x != (self.status in (Status.OPTIMAL, Status.APPROXIMATE)):
            raise ContractError(f"x must be present exactly for Optimal/Approximate, got {self.status}")


def violation_vector(inst: LpInstance, x, eps: float, ledger: Optional[QueryLedger] = None) -> ViolationVector:
    """Indicator of rows with <A_i, x> > b_i + eps (+ TAU). Charges n row reads."""
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.d,):
        raise ContractError(f"x must have length d={inst.d}, got shape {x.shape}")
    if not np.isfinite(eps):
        raise ContractError("eps must be finite")
    bits = (inst.A @ x - inst.b - eps) > TAU
    if ledger is not None:
        ledger.read_rows(inst.n)
    return ViolationVector(bits.astype(np.int8), float(eps))


def row_extremes(A: np.ndarray, b: np.ndarray, domain: BoxDomain):
    """Per-row max and min of <A_i, x> - b_i over the box."""
    lo, hi = domain.lower, domain.upper
    pos = np.clip(A, 0, None)
    neg = np.clip(A, None, 0)
    rmax = pos @ hi + neg @ lo - b
    rmin = pos @ lo + neg @ hi - b
    return rmax, rmin


def compute_widths(inst: LpInstance):
    """Return (v_max, rho): largest one-sided violation and two-sided width over the box."""
    rmax, rmin = row_extremes(inst.A, inst.b, inst.domain)
    v_max = float(rmax.max())
    rho = float(np.maximum(np.abs(rmax), np.abs(rmin)).max())
    return v_max, rho
