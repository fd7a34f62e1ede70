"""Exception hierarchy.

ConfigError maps to exit status 2 and NumericError to exit status 3 in the CLI.
"""


class ErgolabError(Exception):
    pass


class ConfigError(ErgolabError):
    pass


class NumericError(ErgolabError):
    pass


class PositivityViolation(NumericError):
    pass


class DomainError(NumericError, ValueError):
    pass


class DegenerateState(NumericError):
    pass


class UndefinedEfficiency(NumericError):
    pass


class StepTooLarge(NumericError):
    pass


class InsufficientRepetitions(NumericError):
    pass


class NoInteriorMax(NumericError):
    pass


class NoRoot(NumericError):
    pass
