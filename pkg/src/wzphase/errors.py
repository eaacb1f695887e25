"""Exception hierarchy; the CLI maps each class to a distinct exit status."""


class WzPhaseError(Exception):
    """Base class for all library errors."""


class ConfigError(WzPhaseError):
    """Malformed configuration document or input record."""


class ValidationError(WzPhaseError):
    """Input violates an operation's preconditions or a type invariant."""


class NumericalError(WzPhaseError):
    """An iterative routine failed to reach its tolerance."""


class CaseTransitionError(WzPhaseError):
    """A parameter path left its degeneracy-case region mid-computation."""
