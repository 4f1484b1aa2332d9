"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; generic misuse (wrong dtype, wrong dimensionality) raises plain
``ValueError``.
"""

from __future__ import annotations


class IncoprojError(Exception):
    """Base class for all package-specific errors."""


class ZeroColumn(IncoprojError):
    """A matrix column has (numerically) zero norm where a nonzero one is required."""

    def __init__(self, index: int, context: str = ""):
        self.index = int(index)
        msg = f"column {self.index} has zero norm"
        if context:
            msg = f"{msg} ({context})"
        super().__init__(msg)


class InvalidRank(IncoprojError):
    """Requested rank is outside the meaningful range for the given matrix."""


class NotPSD(IncoprojError):
    """Matrix expected to be positive semidefinite has a significantly negative eigenvalue."""


class TooFewColumns(IncoprojError):
    """Pairwise column statistics need at least two columns."""


class EmptyAverage(IncoprojError):
    """No off-diagonal Gram entry exceeds the threshold, so the average is undefined."""


class DegenerateDiagonal(IncoprojError):
    """A Gram diagonal entry is too close to zero to normalize."""

    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"diagonal entry {self.index} is numerically zero")


class DegenerateSpectrum(IncoprojError):
    """All eigenvalues of the frame operator are numerically zero."""


class RankExceeded(IncoprojError):
    """Numerical rank is larger than the target rank allows."""


class TooLarge(IncoprojError):
    """Problem size exceeds a hard enumeration guard."""


class NotFound(IncoprojError):
    """Exhaustive search finished without finding any admissible solution."""


class SingularSystem(IncoprojError):
    """A linear system that must be solved exactly is numerically singular."""


class ConfigError(IncoprojError):
    """Experiment configuration is malformed (unknown key, bad value, missing entry)."""
