from typing import Any, List, Optional


class LabError(Exception):
    """Base class for every failure raised by the lab."""


class ParamsError(LabError, ValueError):
    """A precondition or parameter invariant does not hold."""


class DegenerateProfileError(ParamsError):
    """The profile vanishes identically where a ratio is requested."""


class UnboundedFormError(ParamsError):
    """The supremum defining the quasi-dissipativity bound is infinite."""


class QuadratureError(LabError):
    def __init__(self, message: str, partial_value: float, abs_error_estimate: float, node_count: int):
        super().__init__(message)
        self.partial_value = partial_value
        self.abs_error_estimate = abs_error_estimate
        self.node_count = node_count


class SolverError(LabError):
    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class ExtrapolationError(LabError):
    def __init__(self, message: str, table: Optional[List[List[Any]]] = None):
        super().__init__(message)
        self.table = table or []


NUMERICAL_ERRORS = (QuadratureError, SolverError, ExtrapolationError)
