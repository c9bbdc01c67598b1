"""Stopping rules restricted to Poisson arrival times."""

from __future__ import annotations

import difflib
import enum
import math
from dataclasses import dataclass

from .errors import StrategyParseError


class StrategyKind(enum.Enum):
    THRESHOLD = "threshold"
    ARRIVAL = "arrival"
    NEVER = "never"


@dataclass(frozen=True)
class StoppingStrategy:
    """Stop at the first arrival n >= 1 with X >= level, at arrival k, or never."""

    kind: StrategyKind
    level: float = math.nan
    k: int = 0
    role: str | None = None

    @classmethod
    def threshold(cls, level: float, role: str | None = None) -> "StoppingStrategy":
        if not level > 0 or not math.isfinite(level):
            raise StrategyParseError(f"threshold level must be finite and > 0, got {level}")
        return cls(StrategyKind.THRESHOLD, level=float(level), role=role)

    @classmethod
    def arrival(cls, k: int, role: str | None = None) -> "StoppingStrategy":
        if int(k) != k or k < 1:
            raise StrategyParseError(f"arrival index must be an integer >= 1, got {k}")
        return cls(StrategyKind.ARRIVAL, k=int(k), role=role)

    @classmethod
    def never(cls, role: str | None = None) -> "StoppingStrategy":
        return cls(StrategyKind.NEVER, role=role)

    def with_role(self, role: str) -> "StoppingStrategy":
        return StoppingStrategy(self.kind, self.level, self.k, role)

    def describe(self) -> str:
        if self.kind is StrategyKind.THRESHOLD:
            return f"threshold:{self.level:.10g}"
        if self.kind is StrategyKind.ARRIVAL:
            return f"arrival:{self.k}"
        return "never"

    def __str__(self):
        return self.describe()


def parse_strategy(text: str, role: str | None = None) -> StoppingStrategy:
    """Parse ``threshold:<y>``, ``arrival:<k>`` or ``never``."""
    raw = text.strip()
    head, _, arg = raw.partition(":")
    head = head.strip().lower()
    names = [k.value for k in StrategyKind]
    if head not in names:
        hint = difflib.get_close_matches(head, names, n=1)
        extra = f" (did you mean '{hint[0]}'?)" if hint else ""
        raise StrategyParseError(f"unknown strategy '{head}' in {text!r}{extra}")
    if head == "never":
        if arg.strip():
            raise StrategyParseError(f"'never' takes no argument: {text!r}")
        return StoppingStrategy.never(role)
    if not arg.strip():
        raise StrategyParseError(f"missing argument in {text!r}")
    try:
        if head == "threshold":
            return StoppingStrategy.threshold(float(arg), role)
        return StoppingStrategy.arrival(int(arg), role)
    except ValueError as exc:
        raise StrategyParseError(f"bad argument in {text!r}: {exc}") from None
