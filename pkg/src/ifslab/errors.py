"""Exception taxonomy shared across the package.

The CLI maps these onto its exit-code contract: config/parse problems
exit 2, numeric precondition failures exit 3, degenerate constructions
exit 4.
"""


class PreconditionError(ValueError):
    """A numeric precondition does not hold (infeasible target, boundary
    eigenvalue, singular matrix, certificate failure, residual too large)."""


class DegenerateConstructionError(ValueError):
    """A construction came out trivial (e.g. an empty spectral selection
    where a nontrivial one is required)."""
