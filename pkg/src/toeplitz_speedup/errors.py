"""Exception hierarchy shared by every module."""


class SpeedupError(Exception):
    """Base class for all errors raised by this package."""


class AlphabetMismatch(SpeedupError):
    pass


class NotSeed(SpeedupError):
    pass


class NonGrowing(SpeedupError):
    pass


class NotConstantLength(SpeedupError):
    pass


class DivisibilityViolation(SpeedupError):
    pass


class DuplicateBaseWords(SpeedupError):
    pass


class InconsistentOrbitNumber(SpeedupError):
    pass


class LandingAmbiguous(SpeedupError):
    pass


class InvalidJump(SpeedupError):
    """Raised when an operation needs a jump function that passed validation."""


class WindowExhausted(SpeedupError):
    pass


class GcdObstruction(SpeedupError):
    pass


class LevelTooLow(SpeedupError):
    pass


class GcdViolation(SpeedupError):
    pass


class HorizonTooSmall(SpeedupError):
    pass


class NotLeftProper(SpeedupError):
    pass


class InconsistentPath(SpeedupError):
    pass


class NoCommonLength(SpeedupError):
    pass


class SpecError(SpeedupError):
    """Problems with a system specification document.

    ``problems`` is a list of ``(path, reason)`` pairs so that every issue in
    a document can be reported at once.
    """

    kind = "spec"

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [("$", problems)]
        self.problems = list(problems)
        lines = [f"{path}: {reason}" for path, reason in self.problems]
        super().__init__("; ".join(lines))


class ParseError(SpecError):
    kind = "parse"


class SchemaError(SpecError):
    kind = "schema"


class ValidationError(SpecError):
    kind = "validation"
