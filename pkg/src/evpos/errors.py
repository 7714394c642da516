"""Exception hierarchy."""


class EvposError(Exception):
    """Base class for all errors raised by this package."""


class LatticeError(EvposError, ValueError):
    """Invalid vector or order unit."""


class SpectralError(EvposError):
    """Eigenstructure could not be determined reliably."""


class EigensolverError(SpectralError):
    def __init__(self, name: str, cause: Exception):
        super().__init__(f"eigensolver failed on operator {name!r}: {cause}")
        self.name = name


class ClusterAmbiguityError(SpectralError):
    """The requested eigenvalue is not an isolated cluster."""


class ProjectionDisagreementError(SpectralError):
    """The two projection methods disagree beyond tolerance."""


class NotAnEigenvalueError(SpectralError, ValueError):
    """A routine that needs a real eigenvalue got something else."""


class NearSingularError(EvposError):
    """Resolvent requested too close to the spectrum."""


class OverflowRiskError(EvposError, OverflowError):
    """Matrix exponential would overflow; rescale the generator first."""


class MatrixMarketError(EvposError, ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column
