"""Exception hierarchy shared by all modules."""


class SlantHelixError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SlantHelixError):
    """Malformed curve source. Carries a 1-based line/column location."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class DomainError(SlantHelixError, ValueError):
    """A jet operation left its domain (division by zero, log/sqrt of a nonpositive value)."""


class JetOrderError(SlantHelixError, ValueError):
    """Requested derivative order exceeds the configured maximum."""


class CurveError(SlantHelixError):
    """The curve cannot be analysed (irregular, degenerate, bad sampling)."""


class NotRegular(CurveError):
    def __init__(self, t, index=None):
        self.t = t
        self.index = index
        where = f"t={t:.17g}" + ("" if index is None else f", grid index {index}")
        super().__init__(f"curve is not regular at {where}: speed below tolerance")


class DegenerateCurve(CurveError):
    """Gram-Schmidt pivot failed at ``step`` (1-based): the curve has a vanishing curvature."""

    def __init__(self, t, step, index=None):
        self.t = t
        self.step = step
        self.index = index
        where = f"t={t:.17g}" + ("" if index is None else f", grid index {index}")
        super().__init__(f"degenerate at step {step} ({where})")


class InsufficientJetDepth(CurveError):
    """The recursion needs more derivatives than the apparatus carries."""


class PrescriptionError(CurveError):
    """A curvature prescription violates its sign constraints, or the integrator drifted."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(message)


class FixtureRejected(SlantHelixError):
    """Fixture generator could not find an admissible seed within its retry budget."""
