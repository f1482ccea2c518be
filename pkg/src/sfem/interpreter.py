"""Turn simulated observations into four-channel network inputs.

User actions become one-hots, environment readings are fuzzified with
triangular memberships, and device information is split into a state
snapshot (part of the context) and device events (the service half).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .network import InputKind, NetworkInput

log = logging.getLogger(__name__)

TIME_GAP = "time_gap"


class CatalogError(ValueError):
    pass


class RecordKind(str, enum.Enum):
    USER_ACTION = "user_action"
    ENV_READING = "env_reading"
    DEVICE_STATE = "device_state"
    DEVICE_EVENT = "device_event"
    FEEDBACK = "feedback"
    # control record: run episode recognition over the working buffer
    CONSOLIDATE = "consolidate"


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: RecordKind
    name: str = ""
    value: float | None = None
    feedback_value: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RecordKind(self.kind))
        k = self.kind
        if k is RecordKind.ENV_READING and self.value is None:
            raise CatalogError(f"env_reading needs a value: {self!r}")
        if k is RecordKind.FEEDBACK and self.feedback_value is None:
            raise CatalogError(f"feedback needs xi: {self!r}")
        if k in (RecordKind.DEVICE_STATE, RecordKind.DEVICE_EVENT) and ":" not in self.name:
            raise CatalogError(f"{k.value} name must be 'device:value', got {self.name!r}")
        if k in (RecordKind.USER_ACTION, RecordKind.ENV_READING) and not self.name:
            raise CatalogError(f"{k.value} needs a name: {self!r}")

    @property
    def device_pair(self) -> tuple[str, str]:
        device, _, what = self.name.partition(":")
        return device, what

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "EventRecord":
        return cls(
            time=float(obj["t"]),
            kind=obj["kind"],
            name=obj.get("name", ""),
            value=None if obj.get("value") is None else float(obj["value"]),
            feedback_value=None if obj.get("xi") is None else float(obj["xi"]),
        )


@dataclass(frozen=True)
class Triangle:
    level: str
    left: float
    peak: float
    right: float

    def __call__(self, x: float) -> float:
        if x == self.peak:
            return 1.0
        if self.left < x < self.peak:
            return (x - self.left) / (self.peak - self.left)
        if self.peak < x < self.right:
            return (self.right - x) / (self.right - self.peak)
        return 0.0


@dataclass
class EnvVariable:
    name: str
    unit: str
    lo: float
    hi: float
    levels: list[Triangle]


@dataclass
class Device:
    name: str
    states: list[str]
    events: list[str]


@dataclass
class Catalog:
    user_actions: list[str]
    env_variables: list[EnvVariable] = field(default_factory=list)
    devices: list[Device] = field(default_factory=list)

    def __post_init__(self):
        if TIME_GAP not in self.user_actions:
            self.user_actions = list(self.user_actions) + [TIME_GAP]
        for what, names in (
            ("user action", self.user_actions),
            ("env variable", [v.name for v in self.env_variables]),
            ("device", [d.name for d in self.devices]),
        ):
            if len(set(names)) != len(names):
                raise CatalogError(f"duplicate {what} labels: {names}")
        for v in self.env_variables:
            if len(v.levels) < 2:
                raise CatalogError(f"env variable {v.name!r} needs at least 2 membership levels")
            probe = np.linspace(v.lo, v.hi, 101)
            if any(max(t(x) for t in v.levels) <= 0 for x in probe):
                raise CatalogError(f"memberships of {v.name!r} do not cover [{v.lo}, {v.hi}]")
        self.event_pairs = [(d.name, e) for d in self.devices for e in d.events]

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (
            len(self.user_actions),
            sum(len(v.levels) for v in self.env_variables),
            sum(len(d.states) for d in self.devices),
            len(self.event_pairs),
        )

    @property
    def gap_index(self) -> int:
        return self.user_actions.index(TIME_GAP)

    def device(self, name: str) -> Device:
        for d in self.devices:
            if d.name == name:
                return d
        raise CatalogError(f"unknown device {name!r}; known: {[d.name for d in self.devices]}")

    @classmethod
    def from_json(cls, catalog: Mapping[str, Any], membership: Mapping[str, Any]) -> "Catalog":
        env = []
        for entry in catalog.get("env_variables", []):
            name = entry["name"]
            if name not in membership:
                raise CatalogError(f"no membership functions for env variable {name!r}")
            tris = [Triangle(m["level"], float(m["left"]), float(m["peak"]), float(m["right"])) for m in membership[name]]
            declared = entry.get("levels")
            if declared is not None and [t.level for t in tris] != list(declared):
                raise CatalogError(f"membership levels of {name!r} do not match catalog levels {declared}")
            lo, hi = entry["range"]
            env.append(EnvVariable(name, entry.get("unit", ""), float(lo), float(hi), tris))
        devices = [Device(d["name"], list(d["states"]), list(d["events"])) for d in catalog.get("devices", [])]
        return cls(list(catalog["user_actions"]), env, devices)


def encode_user_action(label: str, catalog: Catalog) -> np.ndarray:
    try:
        i = catalog.user_actions.index(label)
    except ValueError:
        raise CatalogError(f"unknown user action {label!r}; valid: {catalog.user_actions}") from None
    v = np.zeros(len(catalog.user_actions))
    v[i] = 1.0
    return v


def fuzzify_environment(readings: Mapping[str, float], catalog: Catalog) -> np.ndarray:
    blocks = []
    for var in catalog.env_variables:
        if var.name not in readings:
            blocks.append(np.zeros(len(var.levels)))
            continue
        x = float(readings[var.name])
        if not var.lo <= x <= var.hi:
            log.warning("%s reading %s %s outside [%s, %s]; clamped", var.name, x, var.unit, var.lo, var.hi)
            x = min(max(x, var.lo), var.hi)
        blocks.append(np.array([t(x) for t in var.levels]))
    return np.concatenate(blocks) if blocks else np.zeros(0)


def encode_device_state(states: Mapping[str, str], catalog: Catalog) -> np.ndarray:
    blocks = []
    for dev in catalog.devices:
        block = np.zeros(len(dev.states))
        if dev.name in states:
            st = states[dev.name]
            if st not in dev.states:
                raise CatalogError(f"device {dev.name!r} has no state {st!r}; states: {dev.states}")
            block[dev.states.index(st)] = 1.0
        blocks.append(block)
    unknown = set(states) - {d.name for d in catalog.devices}
    if unknown:
        raise CatalogError(f"unknown devices {sorted(unknown)}")
    return np.concatenate(blocks) if blocks else np.zeros(0)


def encode_device_event(event: tuple[str, str] | None, catalog: Catalog) -> np.ndarray:
    v = np.zeros(len(catalog.event_pairs))
    if event is None:
        return v
    if event not in catalog.event_pairs:
        catalog.device(event[0])
        raise CatalogError(f"device {event[0]!r} has no event {event[1]!r}")
    v[catalog.event_pairs.index(event)] = 1.0
    return v


class Interpreter:
    """Stateful front end holding the latest environment and device snapshot."""

    def __init__(self, catalog: Catalog):
        self.catalog = catalog
        self.readings: dict[str, float] = {}
        self.device_states: dict[str, str] = {d.name: d.states[0] for d in catalog.devices if d.states}

    def _context(self, user: np.ndarray, label: str) -> NetworkInput:
        c = self.catalog
        return NetworkInput(
            user=user,
            env=fuzzify_environment(self.readings, c),
            dev_state=encode_device_state(self.device_states, c),
            dev_event=np.zeros(c.dims[3]),
            kind=InputKind.CONTEXT,
            label=label,
        )

    def gap_input(self) -> NetworkInput:
        c = self.catalog
        return NetworkInput(
            user=encode_user_action(TIME_GAP, c),
            env=np.zeros(c.dims[1]),
            dev_state=np.zeros(c.dims[2]),
            dev_event=np.zeros(c.dims[3]),
            kind=InputKind.CONTEXT,
            label=TIME_GAP,
        )

    def apply_device_event(self, device: str, action: str):
        """Device events that name a state of the device also change that state."""
        dev = self.catalog.device(device)
        if action in dev.states:
            self.device_states[device] = action

    def interpret(self, record: EventRecord) -> NetworkInput | None:
        c = self.catalog
        try:
            if record.kind is RecordKind.USER_ACTION:
                return self._context(encode_user_action(record.name, c), record.name)
            if record.kind is RecordKind.ENV_READING:
                if record.name not in {v.name for v in c.env_variables}:
                    raise CatalogError(f"unknown env variable {record.name!r}")
                self.readings[record.name] = record.value
                return self._context(np.zeros(c.dims[0]), record.name)
            if record.kind is RecordKind.DEVICE_STATE:
                device, state = record.device_pair
                if state not in c.device(device).states:
                    raise CatalogError(f"device {device!r} has no state {state!r}")
                self.device_states[device] = state
                return self._context(np.zeros(c.dims[0]), record.name)
            if record.kind is RecordKind.DEVICE_EVENT:
                pair = record.device_pair
                vec = encode_device_event(pair, c)
                inp = NetworkInput(
                    user=np.zeros(c.dims[0]),
                    env=np.zeros(c.dims[1]),
                    dev_state=np.zeros(c.dims[2]),
                    dev_event=vec,
                    kind=InputKind.SERVICE,
                    label=record.name,
                )
                self.apply_device_event(*pair)
                return inp
        except CatalogError as exc:
            raise CatalogError(f"{exc} (record: {record!r})") from None
        # feedback and control records are routed elsewhere
        return None

    def state(self) -> dict:
        return {"readings": dict(self.readings), "device_states": dict(self.device_states)}

    def load_state(self, state: Mapping[str, Any]):
        self.readings = dict(state["readings"])
        self.device_states = dict(state["device_states"])
