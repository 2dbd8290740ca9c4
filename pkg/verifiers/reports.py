"""Report types shared by the inequality and duplication verifiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
SLACK = 1e-12  # log-space rounding allowance for inequality verdicts


class NestingError(ValueError):
    """Edge sets were not nested as the check requires (Λ ⊆ A ⊆ B, A ⊆ B)."""


class MonotonicityError(ValueError):
    """A functional declared increasing failed the pairwise audit."""


@dataclass(frozen=True)
class UrsellValue:
    """Joint cumulant of order 1-3 of edge indicators."""
    order: int
    indices: tuple[int, ...]
    value: float


@dataclass
class InequalityReport:
    """
    Outcome of one inequality check.

    ``worst_violation`` is signed: the largest value of (smaller side) -
    (larger side) over everything tested, so non-positive means the
    inequality held everywhere.
    """
    tag: str
    params: dict[str, Any]
    worst_violation: float
    witness: Any = None
    checked: int = 0
    slack: float = SLACK
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.worst_violation <= self.slack

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_record(self) -> dict[str, Any]:
        record = dict(self.params)
        record.update(
            tag=self.tag,
            worst_violation=self.worst_violation,
            witness=_witness_text(self.witness),
            checked=self.checked,
            verdict=self.verdict,
        )
        record.update(self.extra)
        return record


@dataclass
class IdentityReport:
    """Outcome of an equality check: largest absolute error against a tolerance."""
    tag: str
    params: dict[str, Any]
    max_error: float
    tolerance: float
    witness: Any = None
    checked: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_record(self) -> dict[str, Any]:
        record = dict(self.params)
        record.update(
            tag=self.tag,
            max_error=self.max_error,
            tolerance=self.tolerance,
            witness=_witness_text(self.witness),
            checked=self.checked,
            verdict=self.verdict,
        )
        record.update(self.extra)
        return record


def _witness_text(witness: Any) -> str:
    if witness is None:
        return ""
    if isinstance(witness, (tuple, list)):
        return "|".join(_witness_text(w) for w in witness)
    if isinstance(witness, (set, frozenset)):
        return "{" + " ".join(str(w) for w in sorted(witness)) + "}"
    return str(witness)


def combine(reports: list[InequalityReport], tag: str, params: dict[str, Any]) -> InequalityReport:
    """Fold several reports into one carrying the worst violation."""
    if not reports:
        return InequalityReport(tag=tag, params=params, worst_violation=0.0)
    worst = max(reports, key=lambda r: r.worst_violation)
    return InequalityReport(
        tag=tag,
        params=params,
        worst_violation=worst.worst_violation,
        witness=worst.witness,
        checked=sum(r.checked for r in reports),
    )
