"""Evidence-carrying verdicts shared by the admissibility checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Status(enum.Enum):
    VERIFIED = "Verified"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a membership check.

    ``witness`` is required for refutations; ``detail`` names the failing
    condition (for example ``"S0"`` or ``"S1(fbar)"``).
    """

    status: Status
    witness: Any = None
    budget_used: int = 0
    detail: str = ""
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.status is Status.REFUTED and self.witness is None:
            raise ValueError("a refutation must carry a witness")

    @property
    def verified(self) -> bool:
        return self.status is Status.VERIFIED

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED


def verified(budget_used: int = 0, detail: str = "", notes: tuple[str, ...] = ()) -> Verdict:
    return Verdict(Status.VERIFIED, None, budget_used, detail, notes)


def refuted(witness: Any, budget_used: int = 0, detail: str = "") -> Verdict:
    return Verdict(Status.REFUTED, witness, budget_used, detail)


def unknown(budget_used: int = 0, detail: str = "", witness: Any = None) -> Verdict:
    return Verdict(Status.UNKNOWN, witness, budget_used, detail)


class BudgetExceeded(RuntimeError):
    """Raised when a bounded search runs out of steps."""

    def __init__(self, message: str, witness: Any = None, used: int = 0) -> None:
        super().__init__(message)
        self.witness = witness
        self.used = used
