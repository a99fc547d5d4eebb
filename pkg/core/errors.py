"""Exception and warning types shared across the toolkit."""


class GnarError(Exception):
    """Base class for toolkit failures."""


class InputError(GnarError, ValueError):
    """Malformed data, configuration or arguments."""


class EstimationError(GnarError):
    """Numerical or estimation failure."""


class RankDeficiencyWarning(UserWarning):
    """Design matrix is rank deficient; a minimum-norm solution was used."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped before reaching its tolerance."""


class LookAheadWarning(UserWarning):
    """A forecast uses information dated on the forecast date itself."""
