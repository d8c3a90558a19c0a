class LabError(Exception):
    """
    Base class for every error raised by the lab
    """


class NoCriticalPoints(LabError):
    """
    Raised when f' never changes sign, i.e. L is in the diffeomorphism regime
    """


class NonMorseDrive(LabError):
    """
    Raised when a drive function has a degenerate critical point on the check grid
    """


class ConstantsError(LabError):
    pass


class InvalidBeta(ConstantsError):
    pass


class InvalidAlpha(ConstantsError):
    pass


class InvalidOverrides(ConstantsError):
    pass


class InvalidEpsilon(ConstantsError):
    pass


class K0Unbounded(ConstantsError):
    pass


class NumericalFailure(LabError):
    """
    Failures of the floating point machinery, as opposed to failures of a condition
    """


class CriticalHit(NumericalFailure):
    """
    Raised when an orbit lands (numerically) on a critical point. The truncated trace is attached.
    """

    def __init__(self, message, trace=None):
        super(CriticalHit, self).__init__(message)
        self.trace = trace


class DegenerateLadder(NumericalFailure):

    def __init__(self, message, index=None):
        super(DegenerateLadder, self).__init__(message)
        self.index = index


class OracleMismatch(NumericalFailure):
    pass


class LadderExhausted(LabError):
    """
    Raised when a point is closer to its critical point than the last radius of the ladder
    """

    def __init__(self, message, distance=None, smallest_radius=None):
        super(LadderExhausted, self).__init__(message)
        self.distance = distance
        self.smallest_radius = smallest_radius


class ConfigError(LabError):
    pass


class ParseError(ConfigError):

    def __init__(self, message, line=None, column=None):
        super(ParseError, self).__init__("{} (line {}, column {})".format(message, line, column))
        self.line = line
        self.column = column


class ValidationError(ConfigError):

    def __init__(self, field, message):
        super(ValidationError, self).__init__("{}: {}".format(field, message))
        self.field = field


class IoError(LabError):

    def __init__(self, path, message):
        super(IoError, self).__init__("{}: {}".format(path, message))
        self.path = path
