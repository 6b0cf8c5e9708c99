"""Exception types raised by the solvers and tooling."""
from .core import ContractError


class SimplexCyclingError(RuntimeError):
    """Pivot cap exceeded; Bland's rule should make this unreachable."""


class CombinatorialBudgetExceeded(RuntimeError):
    pass


class SubproblemInfeasible(Exception):
    """A sampled relaxation is infeasible, so the full instance is too."""


class RetryBudgetExceeded(RuntimeError):
    pass


class OracleContractBroken(RuntimeError):
    """An oracle returned a point whose weighted violation exceeds its target."""


class MwuBoundViolated(RuntimeError):
    pass


class NoFeasibleIterate(RuntimeError):
    pass


class InstanceFormatError(ValueError):
    pass


__all__ = [
    "ContractError", "SimplexCyclingError", "CombinatorialBudgetExceeded",
    "SubproblemInfeasible", "RetryBudgetExceeded", "OracleContractBroken",
    "MwuBoundViolated", "NoFeasibleIterate", "InstanceFormatError",
]
