"""Memory-strength lifecycle of episode nodes.

A node starts at ``s_init``, is reinforced toward 1 each time it is
activated, and decays multiplicatively every time another episode is
activated. The decay is either a fixed ``delta`` or the adaptive
``delta_init / (n - 1)`` that keeps regularly activated episodes at
equilibrium.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

from .art import DomainError

# absorbs rounding when a feedback floor theta/(1-d) is decayed by (1-d)
PRUNE_TOLERANCE = 1e-12


class DegenerateError(ArithmeticError):
    """The recurrence has no finite fixed point (r = 0 and delta = 0)."""


class StrengthEvent(enum.Enum):
    CREATED = "created"
    REACTIVATED = "reactivated"
    DECAYED = "decayed"


def adaptive_delta_init(s_init: float, r: float) -> float:
    """``ln(s_init (1 - r) / (s_init - r))``, zero when there is no reinforcement."""
    if not 0.0 < s_init <= 1.0:
        raise DomainError(f"s_init must lie in (0, 1], got {s_init}")
    if r < 0 or r >= 1:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    if s_init <= r:
        raise DomainError(f"adaptive decay requires s_init > r (got s_init={s_init}, r={r})")
    return math.log(s_init * (1.0 - r) / (s_init - r))


@dataclass
class StrengthParams:
    s_init: float = 0.8
    r: float = 0.1
    theta: float = 0.1
    delta: float | None = None  # None selects the adaptive decay

    def __post_init__(self):
        if not 0.0 < self.s_init <= 1.0:
            raise DomainError(f"s_init must lie in (0, 1], got {self.s_init}")
        if not 0.0 <= self.r < 1.0:
            raise DomainError(f"r must lie in [0, 1), got {self.r}")
        if not 0.0 <= self.theta < 1.0:
            raise DomainError(f"theta must lie in [0, 1), got {self.theta}")
        if self.delta is not None and not 0.0 <= self.delta <= 1.0:
            raise DomainError(f"delta must lie in [0, 1], got {self.delta}")
        if self.adaptive:
            self.delta_init = adaptive_delta_init(self.s_init, self.r)

    @property
    def adaptive(self) -> bool:
        return self.delta is None

    def effective_delta(self, n: int) -> float:
        """Decay applied per step when ``n`` ordinary episodes are stored."""
        if not self.adaptive:
            return self.delta
        # a lone episode is never decayed in round-robin; any finite value works
        return self.delta_init / (n - 1) if n > 1 else self.delta_init


def update_strength(s: float, event: StrengthEvent, params: StrengthParams, n: int = 1) -> float:
    if event is StrengthEvent.CREATED:
        return params.s_init
    if event is StrengthEvent.REACTIVATED:
        return s + (1.0 - s) * params.r
    if event is StrengthEvent.DECAYED:
        return s * (1.0 - params.effective_delta(n))
    raise ValueError(f"unknown strength event {event!r}")


def iteration_factor(n: int, r: float, delta: float) -> float:
    return (1.0 - r) * (1.0 - delta) ** (n - 1)


def terminal_value(n: int, r: float, delta: float) -> float:
    big_delta = iteration_factor(n, r, delta)
    if big_delta >= 1.0:
        raise DegenerateError(f"no fixed point for r={r}, delta={delta}")
    return r / (1.0 - big_delta)


def closed_form_strength(T: int, n: int, s_init: float, r: float, delta: float) -> float:
    """Strength after ``T - 1`` full round-robin iterations, in closed form."""
    if T < 1:
        raise DomainError(f"iteration count must be >= 1, got {T}")
    big_delta = iteration_factor(n, r, delta)
    if big_delta >= 1.0:
        raise DegenerateError(f"no fixed point for r={r}, delta={delta}")
    limit = r / (1.0 - big_delta)
    return (s_init - limit) * big_delta ** (T - 1) + limit


def prune(states: Mapping[int, float], theta: float) -> list[int]:
    """Indices whose strength has fallen to ``theta`` or below."""
    return sorted(j for j, s in states.items() if s <= theta + PRUNE_TOLERANCE)
