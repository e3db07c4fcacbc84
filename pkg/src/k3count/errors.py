"""Error types shared across the package.

The CLI maps these onto its exit codes (input error 2, wall violation 3,
budget refusal 4) and the service maps them onto HTTP statuses, so the
distinction between them is part of the public contract.
"""

from __future__ import annotations


class K3CountError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "error"


class InputError(K3CountError):
    """Malformed or inconsistent caller input (bad dimensions, bad names,
    degenerate data where nondegenerate is required, unparseable rationals)."""

    code = "input_error"


class WallViolationError(K3CountError):
    """A spherical class delta with delta^2 = -2 has Z(delta) = 0: the charge
    sits on a wall and semistable counting is refused."""

    code = "wall_violation"

    def __init__(self, witness, message=None):
        self.witness = tuple(witness)
        if message is None:
            message = "charge lies on a wall: Z(delta) = 0 for delta = %s" % (
                self.witness,
            )
        super().__init__(message)


class BudgetError(K3CountError):
    """An enumeration or scan was refused because its estimated size exceeds
    the configured point budget.  Carries the estimate so callers can decide
    whether to raise the budget."""

    code = "budget_exceeded"

    def __init__(self, estimated_points, budget, message=None):
        self.estimated_points = int(estimated_points)
        self.budget = int(budget)
        if message is None:
            message = (
                "refusing enumeration: estimated %d points exceeds budget %d"
                % (self.estimated_points, self.budget)
            )
        super().__init__(message)
