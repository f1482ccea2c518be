"""User feedback on a served episode and its effect on strength and vigilance."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .art import DomainError

STRONG_POSITIVE = 2.0
WEAK_POSITIVE = 1.0
NEGATIVE = -1.0


class FeedbackKind(enum.Enum):
    STRONG_POSITIVE = "strong_positive"
    WEAK_POSITIVE = "weak_positive"
    NEGATIVE = "negative"
    NONE = "none"


def classify_feedback(xi: float | None, xi_w: float = WEAK_POSITIVE) -> FeedbackKind:
    if xi is None:
        return FeedbackKind.NONE
    if xi > xi_w:
        return FeedbackKind.STRONG_POSITIVE
    if xi == xi_w:
        return FeedbackKind.WEAK_POSITIVE
    return FeedbackKind.NEGATIVE


@dataclass
class FeedbackParams:
    r_s: float = 0.1
    delta_s: float = 0.05
    p: int = 2
    r_rho: float = 0.1
    delta_rho: float = 0.05
    rho_init: float = 0.9
    theta: float = 0.1
    s_init: float = 0.8
    xi_w: float = WEAK_POSITIVE

    def __post_init__(self):
        for name in ("r_s", "delta_s", "r_rho", "delta_rho", "theta", "s_init"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if self.delta_s >= 1.0:
            raise DomainError("delta_s must be < 1 (the negative floor divides by 1 - delta_s)")
        if int(self.p) != self.p or self.p < 1:
            raise DomainError(f"episode parameter p must be a positive integer, got {self.p}")


def modulate_strength(s_old: float, kind: FeedbackKind, params: FeedbackParams) -> float:
    ds = params.delta_s
    if kind is FeedbackKind.STRONG_POSITIVE:
        return min(1.0, s_old + 2.0 * (1.0 - s_old) * params.r_s)
    if kind is FeedbackKind.WEAK_POSITIVE:
        return s_old + (1.0 - s_old) * params.r_s
    if kind is FeedbackKind.NEGATIVE:
        if s_old - params.s_init * (1.0 - ds) ** params.p > 0:
            return s_old * (1.0 - ds) ** 2
        # survives exactly until the next missed activation
        return params.theta / (1.0 - ds)
    return s_old * (1.0 - ds)


def modulate_vigilance(rho_old: float, kind: FeedbackKind, params: FeedbackParams) -> float:
    if kind is FeedbackKind.STRONG_POSITIVE:
        return rho_old * (1.0 - params.delta_rho)
    if kind is FeedbackKind.NEGATIVE:
        return min(1.0, rho_old + (1.0 - rho_old) * params.r_rho)
    return rho_old
