"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary argument guards; the classes here
mark failure modes callers are expected to distinguish.
"""


class KayaNodeError(Exception):
    """Base class for all package-specific errors."""


class PanelParseError(KayaNodeError):
    """Malformed panel CSV input. Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateRecordError(KayaNodeError):
    """Two rows share the same (country, year) key."""


class DegenerateInputError(KayaNodeError):
    """A record cannot be decomposed (zero divisor or missing field)."""


class ShapeError(KayaNodeError):
    """Array dimensions do not match the declared network layout."""


class DivergenceError(KayaNodeError):
    """Integration produced a non-finite value. Carries the model time."""

    def __init__(self, t: float, message: str = "non-finite state during integration"):
        super().__init__(f"{message} (t={t})")
        self.t = t


class SingularFitError(KayaNodeError):
    """Least-squares system is rank deficient beyond the ridge jitter rescue."""


class ExperimentError(KayaNodeError):
    """A (country, horizon, model) experiment cell failed. Carries the cell."""

    def __init__(self, country: str, horizon: int, model: str, message: str):
        super().__init__(f"{country} horizon={horizon} model={model}: {message}")
        self.country = country
        self.horizon = horizon
        self.model = model
