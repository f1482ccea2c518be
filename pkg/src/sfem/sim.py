"""Simulation drivers behind the command line.

Strength traces and scenario replay live here, next to the three-arm
feedback comparison."""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from .feedback import NEGATIVE, STRONG_POSITIVE, WEAK_POSITIVE
from .interpreter import Catalog, CatalogError, EventRecord, Interpreter, RecordKind
from .network import NetworkConfig, SFEMNetwork, letters_network
from .psm import Actuation, Scheduler
from .strength import PRUNE_TOLERANCE, StrengthEvent, StrengthParams, update_strength

log = logging.getLogger(__name__)


class Arm(str, enum.Enum):
    SFEM = "SFEM"
    FB_ONLY = "FB_ONLY"
    VANILLA = "VANILLA"

    @property
    def flags(self) -> dict[str, bool]:
        return {
            Arm.SFEM: {"use_feedback": True, "use_negative": True},
            Arm.FB_ONLY: {"use_feedback": True, "use_negative": False},
            Arm.VANILLA: {"use_feedback": False, "use_negative": False},
        }[self]


# ---- strength dynamics ---------------------------------------------------

# n over the four quarters of a dynamic run
DEFAULT_SCHEDULE = (10, 50, 20, 100)


@dataclass
class StrengthRow:
    activation: int
    iteration: int
    n: int
    delta: float
    event: str
    strength: float
    pruned: bool = False

    FIELDS = ("activation", "iteration", "n", "delta", "event", "strength", "pruned")


def quarter_schedule(schedule: Sequence[int], activations: int) -> Callable[[int], int]:
    span = max(1, activations // len(schedule))
    return lambda a: schedule[min(a // span, len(schedule) - 1)]


def round_robin(
    params: StrengthParams,
    n: int | Callable[[int], int],
    iterations: int | None = None,
    activations: int | None = None,
) -> Iterator[StrengthRow]:
    """Strength of one regularly activated episode among ``n``.

    Every episode is activated once per ``n`` activations, so the tracked
    one decays ``n - 1`` times and is then reinforced. ``n`` may be a
    function of the activation count. Stops early once the node is pruned.
    """
    n_at = n if callable(n) else (lambda a, _n=n: _n)
    if activations is None:
        if iterations is None or callable(n):
            raise ValueError("give iterations for a fixed n or activations for a schedule")
        activations = iterations * n
    s = update_strength(0.0, StrengthEvent.CREATED, params)
    since = 0
    iteration = 0
    for a in range(activations):
        cur = n_at(a)
        since += 1
        if since >= cur:
            s = update_strength(s, StrengthEvent.REACTIVATED, params)
            since = 0
            iteration += 1
            event = "reinforce"
        else:
            s = update_strength(s, StrengthEvent.DECAYED, params, cur)
            event = "decay"
        pruned = s <= params.theta + PRUNE_TOLERANCE
        yield StrengthRow(a + 1, iteration, cur, params.effective_delta(cur), event, s, pruned)
        if pruned:
            return


def post_iteration_strengths(params: StrengthParams, n: int, iterations: int) -> list[float]:
    return [row.strength for row in round_robin(params, n, iterations) if row.event == "reinforce"]


def write_csv(rows, fields: Sequence[str], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(getattr(row, f) if not isinstance(row, dict) else row[f]) for f in fields])


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.10f}"
    return "" if v is None else str(v)


# ---- three-arm feedback comparison -----------------------------------------

TRAIN_QUEUE = "abcdabcdefgefg"
KNOWN_EPISODES = {"abcd": 1, "efg": 2, "ehij": 3}
PREFERRED = "ehij"


@dataclass
class FeedbackSimResult:
    arm: Arm
    transcript: list[str]
    served: list[int | None]
    rows: list[dict] = field(default_factory=list)

    FIELDS = ("step", "cue", "served", "activation", "strengths", "vigilances", "action")


def _episode_name(net: SFEMNetwork, seq: Sequence[int]) -> str:
    return "".join(net.event_label(j) for j in seq)


def _snapshot(net: SFEMNetwork, field_name: str) -> str:
    return ";".join(f"{n.node_id}:{getattr(n, field_name):.6f}" for n in net.ordinary())


def run_feedback_sim(arm: Arm | str, rounds: int = 4, **overrides) -> FeedbackSimResult:
    """Replay the partial-cue protocol: learn two routines, serve them, then
    change the preferred routine after ``e`` and keep cueing with ``e``."""
    arm = Arm(arm)
    net, inputs = letters_network("abcdefghij", **{**arm.flags, **overrides})
    clock = iter(range(10**9))
    for ch in TRAIN_QUEUE:
        net.observe_event(inputs[ch], next(clock))
    learned = net.consolidate()
    result = FeedbackSimResult(arm, [], [])
    result.transcript.append(
        "trained: " + ", ".join(f"episode {KNOWN_EPISODES.get(_episode_name(net, net.decode(j)), '?')}="
                                f"{_episode_name(net, net.decode(j))}" for j in learned)
    )

    def serve(cue: str, phase: str):
        j = net.observe_event(inputs[cue], next(clock))
        found = net.retrieve_service([j])
        if found is None:
            label, name = None, "-"
        else:
            name = _episode_name(net, found.episode)
            label = KNOWN_EPISODES.get(name)
        result.served.append(label)
        line = f"{phase} cue {cue} -> " + ("nothing" if found is None else f"episode {label} ({name})")
        if found is not None and found.blocked:
            line += " [blocked: " + ", ".join(
                f"episode {KNOWN_EPISODES.get(_episode_name(net, net.decode(b)), '?')}" for b in found.blocked
            ) + "]"
        result.transcript.append(line)
        return found, name, line

    def row(cue, found, action):
        result.rows.append({
            "step": len(result.rows) + 1,
            "cue": cue,
            "served": "" if found is None else found.node_id,
            "activation": 0.0 if found is None else found.activation,
            "strengths": _snapshot(net, "strength"),
            "vigilances": _snapshot(net, "vigilance"),
            "action": action,
        })

    for cue in "ae":
        found, _, _ = serve(cue, "before change:")
        row(cue, found, "accept")

    reported = len(net.pruned)
    for k in range(rounds):
        found, name, _ = serve("e", f"after change #{k + 1}:")
        if found is not None and name == PREFERRED:
            row("e", found, "accept")
            continue
        if found is not None and arm is not Arm.VANILLA:
            net.apply_feedback(found.node_id, NEGATIVE)
            action = "negative feedback"
            if arm is Arm.SFEM:
                action += ", stored in negative memory"
        else:
            action = "user stopped the service"
        # the user then demonstrates the preferred routine
        for ch in PREFERRED[1:]:
            net.observe_event(inputs[ch], next(clock))
        node = net.learn_episode([_index_of(net, c) for c in PREFERRED])
        result.transcript.append(f"  {action}; learned {PREFERRED} as node {node}")
        row("e", found, action)
        if len(net.pruned) > reported:
            result.transcript.append("  pruned: " + ", ".join(f"node {j}" for j in net.pruned[reported:]))
            reported = len(net.pruned)
    return result


def _index_of(net: SFEMNetwork, label: str) -> int:
    for i, node in enumerate(net.event_nodes):
        if node.extra.get("label") == label:
            return i
    raise KeyError(label)


# ---- scenario replay -------------------------------------------------------


class ScenarioError(ValueError):
    pass


NETWORK_KEYS = set(NetworkConfig.__dataclass_fields__) - {"dims", "use_feedback", "use_negative"}
SCHEDULER_KEYS = {"wait_timeout", "grace", "observe_window"}
RUN_KEYS = {"env_noise"}


@dataclass
class Scenario:
    name: str
    catalog: Catalog
    params: dict[str, Any]
    timeline: list[EventRecord]
    expected: dict[str, Any] | None = None

    @classmethod
    def from_json(cls, doc: dict[str, Any], name: str = "scenario") -> "Scenario":
        for key in ("catalog", "timeline"):
            if key not in doc:
                raise ScenarioError(f"scenario is missing top-level key {key!r}")
        try:
            catalog = Catalog.from_json(doc["catalog"], doc.get("membership", {}))
        except (CatalogError, KeyError, TypeError) as exc:
            raise ScenarioError(f"catalog: {exc}") from None
        params = dict(doc.get("params", {}))
        unknown = set(params) - NETWORK_KEYS - SCHEDULER_KEYS - RUN_KEYS
        if unknown:
            raise ScenarioError(f"params: unknown keys {sorted(unknown)}")
        timeline = []
        last = float("-inf")
        for i, entry in enumerate(doc["timeline"]):
            try:
                rec = EventRecord.from_json(entry)
            except (CatalogError, KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(f"timeline[{i}]: {exc}") from None
            if rec.time < last:
                raise ScenarioError(f"timeline[{i}]: time {rec.time} goes backwards (previous {last})")
            last = rec.time
            timeline.append(rec)
        return cls(name, catalog, params, timeline, doc.get("expected"))

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_json(doc, path.stem)


@dataclass
class TraceRow:
    time: float
    kind: str
    name: str
    event: int | None = None
    winner: int | None = None
    activation: float | None = None
    strengths: str = ""
    vigilances: str = ""
    actuation: str = ""

    FIELDS = ("time", "kind", "name", "event", "winner", "activation", "strengths", "vigilances", "actuation")


def parse_feedback(text: str) -> float | None:
    """Terminal shorthand: ``+`` strong, ``ok`` weak, ``-`` negative, or a number."""
    text = text.strip().lower()
    if not text:
        return None
    shorthand = {"+": STRONG_POSITIVE, "strong": STRONG_POSITIVE, "ok": WEAK_POSITIVE, "weak": WEAK_POSITIVE,
                 "-": NEGATIVE, "negative": NEGATIVE}
    if text in shorthand:
        return shorthand[text]
    return float(text)


class ScenarioRunner:
    def __init__(self, scenario: Scenario, arm: Arm | str = Arm.SFEM, seed: int = 0,
                 feedback_prompt: Callable[[Actuation], float | None] | None = None):
        self.scenario = scenario
        self.arm = Arm(arm)
        p = scenario.params
        self.interpreter = Interpreter(scenario.catalog)
        cfg = NetworkConfig(dims=scenario.catalog.dims, **{k: v for k, v in p.items() if k in NETWORK_KEYS},
                            **self.arm.flags)
        self.network = SFEMNetwork(cfg, self.interpreter.gap_input())
        self.scheduler = Scheduler(self.network, **{k: v for k, v in p.items() if k in SCHEDULER_KEYS})
        self.env_noise = float(p.get("env_noise", 0.0))
        self.rng = np.random.default_rng(seed)
        self.feedback_prompt = feedback_prompt
        self.rows: list[TraceRow] = []
        self.actuations: list[Actuation] = []
        self.position = 0

    def _row(self, rec: EventRecord, event=None, acts: Sequence[Actuation] = ()):
        found = self.scheduler.last_retrieval
        self.scheduler.last_retrieval = None
        self.rows.append(TraceRow(
            rec.time, rec.kind.value, rec.name, event,
            None if found is None else found.node_id,
            None if found is None else found.activation,
            _snapshot(self.network, "strength"),
            _snapshot(self.network, "vigilance"),
            " ".join(f"{a.device}:{a.action}" for a in acts),
        ))

    def _actuate(self, acts: list[Actuation]):
        for a in acts:
            self.interpreter.apply_device_event(a.device, a.action)
            self.actuations.append(a)
            if self.feedback_prompt is not None:
                xi = self.feedback_prompt(a)
                if xi is not None:
                    self.scheduler.on_feedback(xi, a.time)

    def step(self, rec: EventRecord):
        if rec.kind is RecordKind.CONSOLIDATE:
            self.scheduler.finish_observation(rec.time)
            ids = self.network.consolidate()
            self.scheduler.events.append(f"t={rec.time:g} consolidated episodes {ids}")
            self._row(rec)
            return
        if rec.kind is RecordKind.FEEDBACK:
            # interactive runs take feedback from the terminal instead
            if self.feedback_prompt is None:
                self.scheduler.on_feedback(rec.feedback_value, rec.time)
            self._row(rec)
            return
        if rec.kind is RecordKind.ENV_READING and self.env_noise > 0:
            rec = EventRecord(rec.time, rec.kind, rec.name, rec.value + self.rng.normal(0.0, self.env_noise))
        inp = self.interpreter.interpret(rec)
        if rec.kind in (RecordKind.ENV_READING, RecordKind.DEVICE_STATE):
            # state records refresh the sticky snapshot but are not events
            acts = self.scheduler.tick(rec.time)
            self._actuate(acts)
            self._row(rec, acts=acts)
            return
        j = self.network.observe_event(inp, rec.time)
        acts = self.scheduler.on_event(j, rec.time)
        self._actuate(acts)
        self._row(rec, j, acts)

    def run(self) -> "ScenarioRunner":
        timeline = self.scenario.timeline
        while self.position < len(timeline):
            self.step(timeline[self.position])
            self.position += 1
        end = timeline[-1].time if timeline else 0.0
        self.scheduler.finish_observation(end)
        return self

    def run_until(self, position: int) -> "ScenarioRunner":
        while self.position < position:
            self.step(self.scenario.timeline[self.position])
            self.position += 1
        return self

    def export_state(self) -> dict[str, Any]:
        if not self.scheduler.idle:
            raise RuntimeError("state can only be exported while no service or observation is running")
        return {
            "network": self.network.to_dict(),
            "interpreter": self.interpreter.state(),
            "position": self.position,
        }

    def import_state(self, state: dict[str, Any]):
        self.network = SFEMNetwork.from_dict(state["network"])
        self.scheduler.network = self.network
        self.interpreter.load_state(state["interpreter"])
        self.position = state["position"]

    def trace_csv(self) -> str:
        buf = io.StringIO()
        write_csv(self.rows, TraceRow.FIELDS, buf)
        return buf.getvalue()

    def check_expected(self) -> list[str]:
        """Mismatches between emitted and expected actuations (empty = pass)."""
        expected = (self.scenario.expected or {}).get("actuations")
        if expected is None:
            return []
        want = [(e["device"], e["action"]) for e in expected]
        got = [(a.device, a.action) for a in self.actuations]
        problems = []
        for i in range(max(len(want), len(got))):
            w = want[i] if i < len(want) else None
            g = got[i] if i < len(got) else None
            if w != g:
                problems.append(f"actuation #{i + 1}: expected {_pair(w)}, got {_pair(g)}")
        return problems


def _pair(p) -> str:
    return "nothing" if p is None else f"{p[0]}:{p[1]}"
