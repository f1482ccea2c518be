"""The stabilized-feedback episodic memory network.

Layout:

* an event layer: four-channel Fusion ART over (user, environment,
  device state, device event) inputs;
* a buffered sequence code over the event nodes;
* an episode layer split into ordinary nodes (strength and vigilance
  dynamics, user feedback) and negative nodes (rejected routines, frozen).
"""

from __future__ import annotations

import enum
import json
import logging
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from . import art, codec
from .codec import CodecParams, DecodeError
from .episodes import GAP, recognize_episodes
from .feedback import FeedbackKind, FeedbackParams, classify_feedback, modulate_strength, modulate_vigilance
from .strength import StrengthEvent, StrengthParams, prune, update_strength

log = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1


class ContractError(ValueError):
    """An input violates the context/service exclusivity of network inputs."""


class InputKind(str, enum.Enum):
    CONTEXT = "context"
    SERVICE = "service"


class Polarity(str, enum.Enum):
    ORDINARY = "ordinary"
    NEGATIVE = "negative"


@dataclass
class NetworkInput:
    user: np.ndarray
    env: np.ndarray
    dev_state: np.ndarray
    dev_event: np.ndarray
    kind: InputKind
    label: str = ""

    def __post_init__(self):
        self.user, self.env, self.dev_state, self.dev_event = (
            np.asarray(v, dtype=float) for v in (self.user, self.env, self.dev_state, self.dev_event)
        )
        self.kind = InputKind(self.kind)
        context_live = any(np.any(v != 0) for v in (self.user, self.env, self.dev_state))
        service_live = bool(np.any(self.dev_event != 0))
        if self.kind is InputKind.CONTEXT and service_live:
            raise ContractError("context input carries a nonzero device event")
        if self.kind is InputKind.SERVICE and context_live:
            raise ContractError("service input carries nonzero context channels")

    def channels(self) -> list[np.ndarray]:
        return [self.user, self.env, self.dev_state, self.dev_event]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c.size for c in self.channels())


@dataclass
class NetworkConfig:
    dims: tuple[int, int, int, int]
    gamma: float = 0.25
    alpha: float = 0.01
    beta: float = 0.5
    event_rho: float = 0.9
    rho_init: float = 0.9
    rho_neg: float = 0.9
    t_min: float = 0.01
    i_w: float = 1.0
    b_w: float = 0.4
    s_init: float = 0.8
    r: float = 0.1
    theta: float = 0.1
    delta: float | None = None  # None = adaptive decay
    p: int = 2
    r_rho: float = 0.1
    delta_rho: float = 0.05
    xi_w: float = 1.0
    use_feedback: bool = True
    use_negative: bool = True
    buffer_capacity: int = 256
    gap_regularity: float = 0.2
    gap_min_seconds: float = 60.0

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != 4:
            raise ValueError(f"expected four channel dimensions, got {self.dims}")
        # parameter validation lives in the component dataclasses
        self.event_params
        self.codec_params
        self.strength_params
        if self.t_min < 0:
            raise ValueError(f"t_min must be >= 0, got {self.t_min}")

    @property
    def event_params(self) -> art.ArtParams:
        return art.ArtParams.uniform(4, self.gamma, self.alpha, self.beta, self.event_rho)

    @property
    def codec_params(self) -> CodecParams:
        return CodecParams(i_w=self.i_w, b_w=self.b_w)

    @property
    def strength_params(self) -> StrengthParams:
        return StrengthParams(self.s_init, self.r, self.theta, self.delta)


@dataclass
class EpisodeNode:
    node_id: int
    weights: np.ndarray
    polarity: Polarity = Polarity.ORDINARY
    strength: float = 1.0
    vigilance: float = 0.9
    # strength before the implicit reinforcement of the latest service;
    # feedback on that service replaces the reinforcement
    pre_service_strength: float | None = None


@dataclass
class Retrieval:
    node_id: int
    episode: list[int]
    activation: float
    blocked: list[int] = field(default_factory=list)


class SFEMNetwork:
    def __init__(self, config: NetworkConfig, gap_input: NetworkInput | None = None):
        self.config = config
        self.event_params = config.event_params
        self.codec_params = config.codec_params
        self.strength_params = config.strength_params
        self.gap_input = gap_input
        self.event_nodes: list[art.CategoryNode] = []
        self.episodes: dict[int, EpisodeNode] = {}
        self.buffer: deque[tuple[int, float]] = deque(maxlen=config.buffer_capacity)
        self.code = np.zeros(0)
        self.next_id = 1
        self.pruned: list[int] = []
        self.negative_registrations = 0

    # ---- event layer ------------------------------------------------------

    @property
    def n_events(self) -> int:
        return len(self.event_nodes)

    def _classify(self, inp: NetworkInput) -> int:
        if inp.dims != self.config.dims:
            raise art.DomainError(f"input dims {inp.dims} do not match network dims {self.config.dims}")
        x = [art.complement_code(c) for c in inp.channels()]
        T = art.choice_activation(x, self.event_nodes, self.event_params)
        J = art.compete(T)
        if J is not None:
            _, ok = art.template_match(x, self.event_nodes[J], self.event_params.rho)
            if ok:
                art.template_learn(x, self.event_nodes[J], self.event_params.beta)
                return J
        node = art.commit_new(x, self.n_events)
        node.extra = {"kind": inp.kind.value, "label": inp.label}
        self.event_nodes.append(node)
        return node.node_index

    def observe_event(self, inp: NetworkInput, time: float = 0.0) -> int:
        J = self._classify(inp)
        if self.buffer and time < self.buffer[-1][1]:
            raise ValueError(f"observation at t={time} precedes the last buffered one")
        self.buffer.append((J, float(time)))
        self.code = codec.deepart_step(codec.pad(self.code, self.n_events), J, self.codec_params)
        return J

    def event_kind(self, j: int) -> str:
        return self.event_nodes[j].extra.get("kind", InputKind.CONTEXT.value)

    def event_label(self, j: int) -> str:
        return self.event_nodes[j].extra.get("label", str(j))

    def gap_event(self) -> int:
        if self.gap_input is None:
            raise ValueError("this network has no time-gap input configured")
        return self._classify(self.gap_input)

    def is_gap(self, j: int) -> bool:
        return self.gap_input is not None and self.event_label(j) == self.gap_input.label

    # ---- episode layer ----------------------------------------------------

    def ordinary(self) -> list[EpisodeNode]:
        return [n for n in self.episodes.values() if n.polarity is Polarity.ORDINARY]

    def negative(self) -> list[EpisodeNode]:
        return [n for n in self.episodes.values() if n.polarity is Polarity.NEGATIVE]

    def _weights(self, node: EpisodeNode) -> np.ndarray:
        return codec.pad(node.weights, self.n_events)

    def _decay_others(self, winner: int | None):
        nodes = self.ordinary()
        n = len(nodes)
        for node in nodes:
            if node.node_id != winner:
                node.strength = update_strength(node.strength, StrengthEvent.DECAYED, self.strength_params, n)
        self._prune()

    def _prune(self):
        gone = prune({n.node_id: n.strength for n in self.ordinary()}, self.strength_params.theta)
        for j in gone:
            log.info("episode node %d pruned (strength %.6f)", j, self.episodes[j].strength)
            del self.episodes[j]
        self.pruned.extend(gone)

    def encode(self, sequence: Sequence[int]) -> np.ndarray:
        return codec.encode(sequence, self.n_events, self.codec_params)

    def learn_episode(self, episode: Sequence[int], polarity: Polarity = Polarity.ORDINARY) -> int:
        episode = [self.gap_event() if j == GAP else int(j) for j in episode]
        if len(episode) < 2:
            raise ValueError(f"episodes need at least two events, got {episode}")
        polarity = Polarity(polarity)
        y = self.encode(episode)
        pool = [n for n in self.episodes.values() if n.polarity is polarity]
        T = np.array([codec.episode_activation(y, self._weights(n)) for n in pool])
        J = art.compete(T)
        winner = None
        if J is not None:
            node = pool[J]
            w = self._weights(node)
            rho = self.config.rho_neg if polarity is Polarity.NEGATIVE else node.vigilance
            if codec.episode_match(y, w) >= rho:
                beta = self.config.beta
                node.weights = (1.0 - beta) * w + beta * np.minimum(y, w)
                if polarity is Polarity.ORDINARY:
                    node.strength = update_strength(node.strength, StrengthEvent.REACTIVATED, self.strength_params)
                    node.pre_service_strength = None
                winner = node.node_id
        if winner is None:
            winner = self.next_id
            self.next_id += 1
            self.episodes[winner] = EpisodeNode(
                winner,
                y.copy(),
                polarity,
                self.strength_params.s_init if polarity is Polarity.ORDINARY else 1.0,
                self.config.rho_init if polarity is Polarity.ORDINARY else self.config.rho_neg,
            )
        if polarity is Polarity.ORDINARY:
            self._decay_others(winner)
        return winner

    def recognize(self) -> list[tuple[int, ...]]:
        return recognize_episodes(
            list(self.buffer),
            gap_regularity=self.config.gap_regularity,
            min_gap=self.config.gap_min_seconds,
        )

    def consolidate(self) -> list[int]:
        """Learn every episode recognized in the working buffer, then clear it."""
        ids = [self.learn_episode(ep) for ep in self.recognize()]
        self.buffer.clear()
        self.code = np.zeros(self.n_events)
        return ids

    def activations(self, cue: Sequence[int]) -> dict[int, float]:
        """Vigilance-modulated episode activations for a partial cue."""
        y = self.encode(cue)
        rho0 = self.config.rho_init
        return {
            n.node_id: (rho0 / n.vigilance) * codec.episode_activation(y, self._weights(n))
            for n in self.ordinary()
        }

    def decode(self, node_id: int) -> list[int]:
        return codec.decode_sequence(self._weights(self.episodes[node_id]), self.codec_params)

    def is_blocked(self, episode: Sequence[int]) -> bool:
        if not self.config.use_negative:
            return False
        y = self.encode(episode)
        return any(codec.episode_match(y, self._weights(n)) >= self.config.rho_neg for n in self.negative())

    def retrieve_service(self, cue: Sequence[int]) -> Retrieval | None:
        if not cue:
            raise ValueError("retrieval needs a non-empty cue")
        for j in cue:
            if not 0 <= j < self.n_events:
                return None
        acts = self.activations(cue)
        order = sorted(acts, key=lambda j: (-acts[j], j))
        blocked = []
        found = None
        for j in order:
            if acts[j] <= 0 or acts[j] < self.config.t_min:
                break
            try:
                episode = self.decode(j)
            except DecodeError as exc:
                log.warning("episode node %d skipped: %s", j, exc)
                continue
            if self.is_blocked(episode):
                blocked.append(j)
                continue
            found = Retrieval(j, episode, acts[j], blocked)
            break
        if found is None:
            # the layer still competed if anything was activated
            if any(a > 0 for a in acts.values()):
                self._decay_others(None)
            return None
        node = self.episodes[found.node_id]
        node.pre_service_strength = node.strength
        node.strength = update_strength(node.strength, StrengthEvent.REACTIVATED, self.strength_params)
        self._decay_others(found.node_id)
        return found

    def feedback_params(self) -> FeedbackParams:
        sp = self.strength_params
        c = self.config
        return FeedbackParams(
            r_s=sp.r,
            delta_s=sp.effective_delta(len(self.ordinary())),
            p=c.p,
            r_rho=c.r_rho,
            delta_rho=c.delta_rho,
            rho_init=c.rho_init,
            theta=sp.theta,
            s_init=sp.s_init,
            xi_w=c.xi_w,
        )

    def apply_feedback(self, node_id: int, xi: float | None) -> EpisodeNode:
        if not self.config.use_feedback:
            raise RuntimeError("feedback mechanism is disabled for this network")
        node = self.episodes.get(node_id)
        if node is None:
            raise KeyError(f"no episode node {node_id}")
        if node.polarity is not Polarity.ORDINARY:
            raise ValueError(f"episode node {node_id} is a negative node")
        kind = classify_feedback(xi, self.config.xi_w)
        fp = self.feedback_params()
        s_old = node.strength if node.pre_service_strength is None else node.pre_service_strength
        node.strength = modulate_strength(s_old, kind, fp)
        node.vigilance = modulate_vigilance(node.vigilance, kind, fp)
        node.pre_service_strength = None
        if kind is FeedbackKind.NEGATIVE and self.config.use_negative:
            self.learn_episode(self.decode(node_id), Polarity.NEGATIVE)
            self.negative_registrations += 1
        self._prune()
        return node

    # ---- persistence ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        cfg = asdict(self.config)
        cfg["dims"] = list(self.config.dims)
        gap = None
        if self.gap_input is not None:
            gap = {
                "user": self.gap_input.user.tolist(),
                "env": self.gap_input.env.tolist(),
                "dev_state": self.gap_input.dev_state.tolist(),
                "dev_event": self.gap_input.dev_event.tolist(),
                "kind": self.gap_input.kind.value,
                "label": self.gap_input.label,
            }
        return {
            "version": SNAPSHOT_VERSION,
            "config": cfg,
            "gap_input": gap,
            "event_nodes": [
                {"weights": [w.tolist() for w in n.weights], "extra": n.extra} for n in self.event_nodes
            ],
            "episodes": [
                {
                    "id": n.node_id,
                    "weights": n.weights.tolist(),
                    "polarity": n.polarity.value,
                    "strength": n.strength,
                    "vigilance": n.vigilance,
                    "pre_service_strength": n.pre_service_strength,
                }
                for n in self.episodes.values()
            ],
            "buffer": [list(b) for b in self.buffer],
            "code": self.code.tolist(),
            "next_id": self.next_id,
            "pruned": list(self.pruned),
            "negative_registrations": self.negative_registrations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "SFEMNetwork":
        if doc.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {doc.get('version')!r}")
        cfg = dict(doc["config"])
        cfg["dims"] = tuple(cfg["dims"])
        gap = doc.get("gap_input")
        net = cls(NetworkConfig(**cfg), NetworkInput(**gap) if gap else None)
        for i, n in enumerate(doc["event_nodes"]):
            net.event_nodes.append(art.CategoryNode([np.array(w, dtype=float) for w in n["weights"]], i, dict(n["extra"])))
        for e in doc["episodes"]:
            net.episodes[e["id"]] = EpisodeNode(
                e["id"],
                np.array(e["weights"], dtype=float),
                Polarity(e["polarity"]),
                e["strength"],
                e["vigilance"],
                e["pre_service_strength"],
            )
        net.buffer.extend((int(j), float(t)) for j, t in doc["buffer"])
        net.code = np.array(doc["code"], dtype=float)
        net.next_id = doc["next_id"]
        net.pruned = list(doc["pruned"])
        net.negative_registrations = doc["negative_registrations"]
        return net

    @classmethod
    def from_json(cls, text: str) -> "SFEMNetwork":
        return cls.from_dict(json.loads(text))


def letters_network(alphabet: Iterable[str], **overrides) -> tuple[SFEMNetwork, dict[str, NetworkInput]]:
    """Network whose events are abstract symbols, one user-channel one-hot each."""
    alphabet = list(alphabet)
    U = len(alphabet) + 1  # last slot reserved for the time-gap token
    dims = (U, 0, 0, 0)

    def one_hot(i: int, label: str) -> NetworkInput:
        u = np.zeros(U)
        u[i] = 1.0
        return NetworkInput(u, np.zeros(0), np.zeros(0), np.zeros(0), InputKind.CONTEXT, label)

    inputs = {ch: one_hot(i, ch) for i, ch in enumerate(alphabet)}
    net = SFEMNetwork(NetworkConfig(dims=dims, **overrides), one_hot(U - 1, "time_gap"))
    return net, inputs
