"""Exception types shared across the package."""

from __future__ import annotations


class SweepError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(SweepError, ValueError):
    pass


class HorizonError(SweepError, ValueError):
    """A time argument falls outside the horizon an object was built for."""


class NonUniqueProjection(SweepError):
    """The point lies outside the uniqueness tube of the set.

    ``distance`` and ``radius`` describe the failed query; ``step`` is filled
    in by the solvers with the index of the offending step.
    """

    def __init__(self, distance: float, radius: float, step: int | None = None, detail: str = ""):
        self.distance = float(distance)
        self.radius = float(radius)
        self.step = step
        self.detail = detail
        super().__init__(self._message())

    def _message(self) -> str:
        where = f"step {self.step}: " if self.step is not None else ""
        msg = f"{where}distance {self.distance:.6g} to the set is not below prox radius {self.radius:.6g}"
        if self.detail:
            msg += f" ({self.detail})"
        return msg

    def at_step(self, step: int) -> "NonUniqueProjection":
        return NonUniqueProjection(self.distance, self.radius, step, self.detail)


class ScenarioError(SweepError, ValueError):
    """Validation failure; ``field`` names the offending scenario entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnknownKind(ScenarioError):
    pass


class InfeasibleInitialState(ScenarioError):
    pass
