"""
Exception hierarchy for the toolkit.
Every error raised by the library derives from FranError; the four families map
one-to-one onto the command-line exit codes defined in config.py.
"""
from typing import List, Optional

from config import EXIT_CONFIG_ERROR, EXIT_INFEASIBLE, EXIT_SOLVER_FAILURE


class FranError(Exception):
    """Root of all toolkit errors"""
    exit_code = EXIT_SOLVER_FAILURE


# ===== Configuration =====

class ConfigError(FranError):
    exit_code = EXIT_CONFIG_ERROR


class ParseError(ConfigError):
    """The configuration file is not valid JSON"""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaError(ConfigError):
    """A key is missing, unknown or has the wrong type"""

    def __init__(self, key: str, message: str = ""):
        super().__init__(f"{key}: {message}" if message else key)
        self.key = key


class ValidationError(ConfigError):
    """The configuration parsed but the network instance violates model invariants"""

    def __init__(self, violations: List):
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"{len(violations)} model violation(s): {lines}")
        self.violations = list(violations)


# ===== Model and formulation =====

class ModelError(FranError):
    exit_code = EXIT_CONFIG_ERROR


class InvalidBounds(ModelError):
    pass


class EmptyHostingSet(ModelError):
    pass


class UnroutableRequest(ModelError):
    pass


class Unstable(ModelError):
    """M/M/1 queue with arrival rate at or above capacity"""
    pass


class TooLarge(ModelError):
    pass


class CapacityCoupling(ModelError):
    pass


# ===== Solving =====

class InfeasibleError(FranError):
    exit_code = EXIT_INFEASIBLE


class SolverError(FranError):
    exit_code = EXIT_SOLVER_FAILURE


class NumericalBreakdown(SolverError):
    pass


class CorruptSolution(SolverError):
    pass


class IterationLimit(SolverError):
    """Node budget exhausted; the partial report is attached"""

    def __init__(self, message: str, report: Optional[object] = None):
        super().__init__(message)
        self.report = report
