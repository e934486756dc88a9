"""Exception hierarchy shared by every solver and the CLI."""

from __future__ import annotations


class ModelError(Exception):
    """Base class for all engine errors."""


class ParameterError(ModelError, ValueError):
    """A parameter lies outside its admissible domain."""

    def __init__(self, field: str, value: object, rule: str):
        self.field = field
        self.value = value
        super().__init__(f"{field} {rule} (got {value!r})")


class DegenerateInputError(ModelError, ValueError):
    pass


class NoSolutionError(ModelError):
    """A scalar equation has no root in the admissible domain."""


class NoCrossingError(NoSolutionError):
    """Labor supply lies above labor demand for every tightness searched."""

    def __init__(self, message: str, gap_at_zero: float):
        self.gap_at_zero = gap_at_zero
        super().__init__(message)


class SurplusExhaustedError(NoSolutionError):
    """The marginal product of labor does not exceed the outside option."""


class NonPositiveDiscountError(ModelError, ValueError):
    pass


class NonConvergenceError(ModelError):
    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message)


class BlowUpError(ModelError):
    """A transition path left the economically feasible region."""

    def __init__(self, step: int, t: float, reason: str):
        self.step = step
        self.t = t
        self.reason = reason
        super().__init__(f"path blew up at step {step} (t={t:g} months): {reason}")


class RegionUndefinedError(ModelError, ValueError):
    pass


class UnattainableTargetError(ModelError):
    def __init__(self, target: float, lo: float, hi: float):
        self.target = target
        self.range = (lo, hi)
        super().__init__(
            f"target unemployment {target:.6g} outside achievable range [{lo:.6g}, {hi:.6g}]"
        )


class OutOfRangeError(ModelError, ValueError):
    pass


class SchemaError(ModelError, ValueError):
    def __init__(self, message: str, column: str | None = None, line: int | None = None):
        self.column = column
        self.line = line
        where = []
        if column is not None:
            where.append(f"column '{column}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ScenarioAbortError(ModelError):
    def __init__(self, label: str, failures: list[tuple[int, str]], total: int):
        self.failures = failures
        super().__init__(
            f"scenario {label} aborted: {len(failures)} of {total} rows failed"
        )


class UnknownFieldError(ModelError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown field"
