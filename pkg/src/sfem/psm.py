"""Personal service management: run a retrieved episode on the timeline.

User-type steps are waited for, device-type steps are actuated. Negative
feedback stops the routine; the scheduler then watches what the user does
instead and learns that as the replacement episode.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

from .feedback import FeedbackKind, classify_feedback
from .network import InputKind, Polarity, SFEMNetwork

log = logging.getLogger(__name__)

WAIT_TIMEOUT = 600.0
GRACE_WINDOW = 60.0
OBSERVE_WINDOW = 600.0


class PlanStatus(enum.Enum):
    WAITING = "waiting"
    ACTUATING = "actuating"
    DONE = "done"
    ABORTED = "aborted"


class PlanError(RuntimeError):
    pass


@dataclass(frozen=True)
class Actuation:
    time: float
    device: str
    action: str
    source_node: int


@dataclass
class ServicePlan:
    episode: list[int]
    origin_node: int
    kinds: list[str]  # "user", "device" or "gap" per step
    labels: list[str]
    cursor: int = 0
    status: PlanStatus = PlanStatus.WAITING
    wait_since: float = 0.0
    seen: list[int] = field(default_factory=list)
    abort_reason: str | None = None
    last_service: int | None = None  # cursor of the latest actuated step
    timeout: float = WAIT_TIMEOUT

    @property
    def active(self) -> bool:
        return self.status in (PlanStatus.WAITING, PlanStatus.ACTUATING)


def step_kind(network: SFEMNetwork, j: int) -> str:
    if network.is_gap(j):
        return "gap"
    return "device" if network.event_kind(j) == InputKind.SERVICE.value else "user"


def start_plan(network: SFEMNetwork, episode: list[int], origin: int, cue: list[int], now: float,
               timeout: float = WAIT_TIMEOUT) -> ServicePlan:
    """Build a plan positioned just after the cue's last event in the episode."""
    plan = ServicePlan(
        list(episode),
        origin,
        [step_kind(network, j) for j in episode],
        [network.event_label(j) for j in episode],
        wait_since=now,
        timeout=timeout,
    )
    if cue and cue[-1] in episode:
        plan.cursor = episode.index(cue[-1]) + 1
    return plan


def _take_seen(plan: ServicePlan, j: int) -> bool:
    if j in plan.seen:
        plan.seen.remove(j)
        return True
    return False


def execute_step(plan: ServicePlan, observed: int | None, now: float) -> tuple[ServicePlan, Actuation | None]:
    """Advance the plan by at most one actuation.

    ``observed`` is an event index seen on the timeline, or None for a
    clock tick.
    """
    if not plan.active:
        raise PlanError(f"plan is {plan.status.value}")
    if observed is not None:
        plan.seen.append(observed)
    while plan.cursor < len(plan.episode):
        j = plan.episode[plan.cursor]
        kind = plan.kinds[plan.cursor]
        if kind == "gap" or _take_seen(plan, j):
            plan.cursor += 1
            plan.wait_since = now
            continue
        if kind == "user":
            plan.status = PlanStatus.WAITING
            if now - plan.wait_since > plan.timeout:
                plan.status = PlanStatus.ABORTED
                plan.abort_reason = "timeout"
            return plan, None
        device, _, action = plan.labels[plan.cursor].partition(":")
        act = Actuation(now, device, action, plan.origin_node)
        plan.last_service = plan.cursor
        plan.cursor += 1
        plan.wait_since = now
        plan.status = PlanStatus.DONE if plan.cursor >= len(plan.episode) else PlanStatus.ACTUATING
        return plan, act
    plan.status = PlanStatus.DONE
    return plan, None


def run_until_blocked(plan: ServicePlan, observed: int | None, now: float) -> list[Actuation]:
    acts = []
    plan, act = execute_step(plan, observed, now)
    while act is not None:
        acts.append(act)
        if not plan.active:
            break
        plan, act = execute_step(plan, None, now)
    return acts


def handle_feedback(plan: ServicePlan, xi: float, network: SFEMNetwork) -> ServicePlan:
    """Pass feedback to the origin node; negative feedback aborts the plan."""
    kind = classify_feedback(xi, network.config.xi_w)
    if network.config.use_feedback and plan.origin_node in network.episodes:
        network.apply_feedback(plan.origin_node, xi)
    if kind is FeedbackKind.NEGATIVE and plan.active:
        plan.status = PlanStatus.ABORTED
        plan.abort_reason = "negative feedback"
    return plan


class Scheduler:
    """Single-owner service loop around one network."""

    def __init__(self, network: SFEMNetwork, wait_timeout: float = WAIT_TIMEOUT,
                 grace: float = GRACE_WINDOW, observe_window: float = OBSERVE_WINDOW):
        self.network = network
        self.wait_timeout = wait_timeout
        self.grace = grace
        self.observe_window = observe_window
        self.plan: ServicePlan | None = None
        self.finished: tuple[ServicePlan, float] | None = None
        self.observing: list[int] | None = None
        self.observe_last = 0.0
        self.last_retrieval = None
        self.events: list[str] = []  # human-readable transcript

    @property
    def idle(self) -> bool:
        return self.plan is None and self.observing is None

    def _note(self, now: float, text: str):
        self.events.append(f"t={now:g} {text}")
        log.info("t=%s %s", now, text)

    def _close_plan(self, now: float):
        plan = self.plan
        if plan is None or plan.active:
            return
        if plan.status is PlanStatus.DONE:
            self.finished = (plan, now)
            self._note(now, f"service from episode {plan.origin_node} done")
        elif plan.abort_reason == "timeout":
            self._note(now, f"service from episode {plan.origin_node} timed out")
        self.plan = None

    def finish_observation(self, now: float) -> int | None:
        if self.observing is None:
            return None
        seq, self.observing = self.observing, None
        if len(seq) < 2:
            self._note(now, "observation ended without a replacement episode")
            return None
        node = self.network.learn_episode(seq, Polarity.ORDINARY)
        labels = " ".join(self.network.event_label(j) for j in seq)
        self._note(now, f"learned replacement episode {node}: {labels}")
        return node

    def _advance(self, observed: int | None, now: float) -> list[Actuation]:
        acts = run_until_blocked(self.plan, observed, now)
        for a in acts:
            self._note(now, f"actuate {a.device}:{a.action}")
        self._close_plan(now)
        return acts

    def tick(self, now: float) -> list[Actuation]:
        if self.observing is not None and now - self.observe_last > self.observe_window:
            self.finish_observation(now)
        if self.plan is not None and self.plan.active:
            return self._advance(None, now)
        return []

    def on_event(self, j: int, now: float, retrieve: bool = True) -> list[Actuation]:
        acts = self.tick(now)
        if self.observing is not None:
            self.observing.append(j)
            self.observe_last = now
            return acts
        if self.plan is not None:
            return acts + self._advance(j, now)
        if not retrieve or self.network.event_kind(j) != InputKind.CONTEXT.value:
            return acts
        if not self.network.ordinary():
            return acts
        found = self.network.retrieve_service([j])
        if found is None:
            return acts
        self.last_retrieval = found
        self.plan = start_plan(self.network, found.episode, found.node_id, [j], now, self.wait_timeout)
        seq = " ".join(self.plan.labels)
        self._note(now, f"retrieved episode {found.node_id} (T={found.activation:.4f}): {seq}")
        return acts + self._advance(None, now)

    def on_feedback(self, xi: float, now: float):
        self.tick(now)
        kind = classify_feedback(xi, self.network.config.xi_w)
        if self.plan is not None and self.plan.active:
            plan = self.plan
        elif self.finished is not None and now - self.finished[1] <= self.grace:
            plan = self.finished[0]
        else:
            log.warning("feedback %s at t=%s with no active or recent service; ignored", xi, now)
            self._note(now, f"feedback {xi:g} ignored")
            return
        self._note(now, f"feedback {xi:g} ({kind.value}) on episode {plan.origin_node}")
        was_active = plan.active
        before = self.network.negative_registrations
        handle_feedback(plan, xi, self.network)
        if self.network.negative_registrations > before:
            self._note(now, f"episode {plan.origin_node} registered in negative memory")
        if kind is FeedbackKind.NEGATIVE:
            # keep the accepted part of the routine, watch for what replaces the rest
            upto = plan.last_service if plan.last_service is not None else plan.cursor
            self.observing = list(plan.episode[:upto])
            self.observe_last = now
            self.plan = None
            self.finished = None
            self._note(now, "service stopped; observing the user" if was_active
                       else "service rejected; observing the user")
