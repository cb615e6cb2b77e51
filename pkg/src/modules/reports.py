import math
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, computed_field

from models import ComplexPair


class Comparison(str, Enum):
    AT_MOST = "<="
    AT_LEAST = ">="
    EQUAL = "=="


class SubCheck(BaseModel):
    name: str
    measured: float
    threshold: float
    comparison: Comparison
    passed: bool


def _holds(measured: float, threshold: float, comparison: Comparison) -> bool:
    if math.isnan(measured):
        return False
    match comparison:
        case Comparison.AT_MOST:
            return measured <= threshold
        case Comparison.AT_LEAST:
            return measured >= threshold
        case Comparison.EQUAL:
            return measured == threshold
    return False


class CheckReport(BaseModel):
    """Outcome of one theorem-level check; passes when every sub-check does."""

    name: str
    details: list[SubCheck] = Field(default_factory=list)
    provenance: dict[str, Any] = Field(default_factory=dict)
    sequences: dict[str, list[float]] = Field(default_factory=dict)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(detail.passed for detail in self.details)

    def record(
        self,
        name: str,
        measured: float,
        threshold: float,
        comparison: Comparison = Comparison.AT_MOST,
    ) -> bool:
        """Append a sub-check and return whether it held."""
        measured = float(measured)
        threshold = float(threshold)
        passed = _holds(measured, threshold, comparison)
        self.details.append(
            SubCheck(
                name=name,
                measured=measured,
                threshold=threshold,
                comparison=comparison,
                passed=passed,
            )
        )
        return passed

    def require(self, name: str, condition: bool) -> bool:
        """Record a boolean sub-check as 1 == 1 or 0 == 1."""
        return self.record(name, 1.0 if condition else 0.0, 1.0, Comparison.EQUAL)

    def failures(self) -> list[str]:
        return [f"{self.name}.{detail.name}" for detail in self.details if not detail.passed]

    def to_json(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


class ArrDiscEntry(BaseModel):
    a: ComplexPair
    in_spectrum: bool
    is_member: bool
    agree: bool


class ArrDiscReport(BaseModel):
    entries: list[ArrDiscEntry] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(entry.agree for entry in self.entries)

    def disagreements(self) -> list[ArrDiscEntry]:
        return [entry for entry in self.entries if not entry.agree]
