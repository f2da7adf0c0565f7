"""Exception hierarchy.

``ValidationError`` subclasses mean bad input (CLI exit code 1);
``NumericalFailure`` subclasses mean the computation ran but its result is
unusable (CLI exit code 2).
"""


class ValidationError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


class EmptySupportError(ValidationError):
    """The shell contains no lattice site."""


class ResolutionError(ValidationError):
    """Too few shell sites to resolve the requested angular momentum."""


class ConditioningError(NumericalFailure):
    """Sampled basis too far from orthonormal to orthogonalize safely."""


class PrecisionError(ValidationError):
    """Not enough phase-estimation bits for the m range."""


class LeakageError(NumericalFailure):
    """Phase estimation left too much probability outside the target subspace."""

    def __init__(self, leakage: float):
        super().__init__(f"leakage {leakage:.3g} exceeds 0.5; estimate unusable")
        self.leakage = leakage
