from typing import Any, Optional


class PolynomialSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"syntax error at position {position}: {message}")
        self.message = message
        self.position = position


class ArityError(ValueError):
    pass


class EnumerationCapError(ValueError):
    pass


class PrecisionOverflowError(ValueError):
    """Some D(n)^2 in the box is not exactly representable as a double."""


class FlowError(RuntimeError):
    """Base for continuation failures; ``path`` holds the path accepted so far."""

    def __init__(self, message: str, path: Optional[Any] = None):
        super().__init__(message)
        self.path = path


class GapCollapse(FlowError):
    def __init__(self, s: float, q: int, l: int, gap: float, path: Optional[Any] = None):
        super().__init__(f"gap collapse at s={s:.9g} between levels {q} and {l} (gap {gap:.3e})", path)
        self.s = s
        self.q = q
        self.l = l
        self.gap = gap


class AmbiguousMatch(FlowError):
    def __init__(self, s: float, column: int, overlap: float, path: Optional[Any] = None):
        super().__init__(f"ambiguous eigenvector match at s={s:.9g}: column {column} best overlap {overlap:.3f}", path)
        self.s = s
        self.column = column
        self.overlap = overlap


class StepSizeUnderflow(FlowError):
    def __init__(self, s: float, step: float, path: Optional[Any] = None):
        super().__init__(f"step size underflow at s={s:.9g} (step {step:.3e})", path)
        self.s = s
        self.step = step


class StepLimitExceeded(FlowError):
    def __init__(self, s: float, steps: int, path: Optional[Any] = None):
        super().__init__(f"step budget of {steps} exhausted at s={s:.9g}", path)
        self.s = s
        self.steps = steps


class NonFiniteAmplitudeError(RuntimeError):
    pass
