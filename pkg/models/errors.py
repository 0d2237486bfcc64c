"""
Exception hierarchy shared by every package.

Each error derives from the builtin family a caller would expect
(ValueError for bad input, RuntimeError for numerical failures), so
`except ValueError` keeps working for code that does not care about
the finer classes.
"""

from typing import List, Optional, Sequence


class StructureError(ValueError):
    """Shapes, scopes or variable ids that do not fit the model."""


class CapacityError(ValueError):
    """A computation would exceed a configured size cap."""


class EvidenceError(ValueError):
    """Query/evidence combination that makes no sense (e.g. query observed)."""


class InferenceError(RuntimeError):
    """Exact inference hit a zero normalizer (contradictory evidence)."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, loss: float, detail: str = ""):
        self.epoch = epoch
        self.loss = loss
        self.detail = detail
        message = f"loss diverged to {loss} in epoch {epoch}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.epoch, self.loss, self.detail)


class DataFormatError(ValueError):
    """A text file could not be parsed."""

    def __init__(self, path: str, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        self.message = message
        super().__init__(f"{path}:{line_number}: {message}")

    def __reduce__(self):
        return type(self), (self.path, self.line_number, self.message)


class DegenerateSampleError(ValueError):
    """Statistical test on samples with no spread at all."""


class ReportMismatchError(ValueError):
    """Report rows cannot be paired across methods."""


class ToleranceBreach(RuntimeError):
    """One or more verification rows exceeded their tolerance.

    Attributes:
        breaches: Human readable descriptions, one per offending row
    """

    def __init__(self, breaches: Sequence[str], rows: Optional[List[dict]] = None):
        self.breaches = list(breaches)
        self.rows = rows or []
        super().__init__("; ".join(self.breaches))

    def __reduce__(self):
        return type(self), (self.breaches, self.rows)
