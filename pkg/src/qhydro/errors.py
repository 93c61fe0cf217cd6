"""Exception types shared across the solver modules."""


class QhydroError(Exception):
    """Base class for all package-specific errors."""


class NodeEncountered(QhydroError):
    """A logarithmic or divided quantity hit the density floor in a region
    that carries non-negligible mass."""

    def __init__(self, index, message=None):
        self.index = int(index)
        super().__init__(message or f"wavefunction node at grid index {self.index}")


class StepDiverged(QhydroError):
    """A time step produced non-finite values."""


class DomainError(QhydroError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class IllPosed(QhydroError):
    """The thermal dispersion law has no root for these parameters."""


class UnsupportedPotential(QhydroError):
    """Phase-space evolution is restricted to at-most-quadratic potentials."""


class TransformInconsistent(QhydroError):
    """Phase-space transform produced an excessive imaginary residue."""


class NegativeDensity(QhydroError):
    """A density stepper produced meaningfully negative values."""


class ConfigError(QhydroError):
    """Scenario configuration failed to parse or validate.

    Carries the full list of error strings (one per problem, each with a
    line number where applicable) so a user sees everything at once.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
