"""Shared error and signal types.

Every error that callers are expected to branch on carries a stable
``signal`` string, so the CLI can print machine-readable reasons.
"""


class SimgenError(Exception):
    signal = "error"

    def __str__(self):
        base = super().__str__()
        return f"{self.signal}: {base}" if base else self.signal


class RhoRequired(SimgenError):
    """Analytic operation needs a declared radius of convergence."""
    signal = "rho-required"


class CapacityExceeded(SimgenError):
    """Requested mean or size is outside what the weight support allows."""
    signal = "capacity-exceeded"


class EmptySupport(SimgenError):
    signal = "empty-support"


class InvalidDegreeSequence(SimgenError):
    """Degree sequence fails the prefix or total-sum test.

    ``index`` is the first offending position (0-based), or -1 when the
    total is wrong.
    """
    signal = "invalid-degree-sequence"

    def __init__(self, message="", index=-1):
        super().__init__(message)
        self.index = index


class RationalUnavailable(SimgenError):
    signal = "rational-unavailable"


class InfeasibleAllocation(SimgenError):
    signal = "infeasible-allocation"


class PrefixIncompatible(SimgenError):
    signal = "prefix-incompatible"


class AcceptanceTooLow(SimgenError):
    signal = "acceptance-too-low"


class BoundaryImprecise(SimgenError):
    """Boundary series did not settle within the iteration budget.

    Carries the partial sum, which is a valid lower bound for the
    (nonnegative-term) series.
    """
    signal = "boundary-evaluation-imprecise"

    def __init__(self, message="", partial=0.0, lower_bound=0.0):
        super().__init__(message)
        self.partial = partial
        self.lower_bound = lower_bound
