"""Exception hierarchy.

Every failure mode that is part of an operation's contract gets its own
class so callers (and the CLI) can react to specific conditions without
string matching.
"""


class GaugeFormsError(Exception):
    """Base class for all errors raised by this package."""


# -- chart ------------------------------------------------------------------

class BadDimension(GaugeFormsError):
    pass


class BadResolution(GaugeFormsError):
    pass


class BadAxis(GaugeFormsError):
    pass


class SampleCountMismatch(GaugeFormsError):
    pass


# -- expression language ----------------------------------------------------

class ParseError(GaugeFormsError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifier(GaugeFormsError):
    pass


class DivisionByZero(GaugeFormsError):
    pass


# -- symbols ----------------------------------------------------------------

class ArityMismatch(GaugeFormsError):
    pass


class InvalidSymbol(GaugeFormsError):
    """A symbol failed validation where a valid one is required."""


# -- geometry ---------------------------------------------------------------

class SignatureViolation(GaugeFormsError):
    pass


class DegenerateMetric(GaugeFormsError):
    pass


class ResidualTooLarge(GaugeFormsError):
    pass


class NonConstantCharge(GaugeFormsError):
    pass


class NotTimelike(GaugeFormsError):
    pass


# -- framing and lifts ------------------------------------------------------

class DegenerateFrame(GaugeFormsError):
    pass


class NotInGroup(GaugeFormsError):
    pass


class LiftVerificationFailed(GaugeFormsError):
    pass


class SamplingTooCoarse(GaugeFormsError):
    pass


class ClosureFailure(GaugeFormsError):
    pass


class NoLift(GaugeFormsError):
    pass


# -- gauge action and comparison --------------------------------------------

class SingularGauge(GaugeFormsError):
    pass


class VanishingVolumeForm(GaugeFormsError):
    pass


class NotClosed(GaugeFormsError):
    pass


class NoSingleValuedPhase(GaugeFormsError):
    pass


class InvalidComparison(GaugeFormsError):
    """Precondition failure for a pairwise comparison (chart/group mismatch)."""


# -- operator correspondence ------------------------------------------------

class GridMismatch(GaugeFormsError):
    pass


# -- configuration files ----------------------------------------------------

class ConfigError(GaugeFormsError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
