"""Exception types raised by colprob."""


class ColprobError(ValueError):
    """Base class for all library errors."""


class NonPSDError(ColprobError):
    pass


class SingularMatrixError(ColprobError):
    pass


class SingularCovarianceError(SingularMatrixError):
    pass


class LengthMismatchError(ColprobError):
    pass


class TimeMismatchError(ColprobError):
    pass


class InvalidParamsError(ColprobError):
    pass


class EmptyTrajectoryError(ColprobError):
    pass


class InvalidPolygonError(ColprobError):
    pass


class ScenarioParseError(ColprobError):
    pass


class ScenarioValidationError(ColprobError):
    """Scenario content failed validation.

    ``problems`` holds ``(field_path, message)`` pairs, one per failed check.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{path}: {msg}" for path, msg in self.problems]
        super().__init__("invalid scenario:\n  " + "\n  ".join(lines))


class InvalidSpecError(ColprobError):
    pass
