"""Fusion ART primitives.

Inputs arrive as a list of per-channel vectors. Each channel is complement
coded, so a node stores one weight vector of length 2d per channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """A value lies outside the domain an operation is defined on."""


def fuzzy_and(a, b):
    return np.minimum(a, b)


def l1(v) -> float:
    return float(np.sum(v))


@dataclass
class ArtParams:
    """Parameters of one Fusion ART field.

    gamma and rho are per channel. alpha must be strictly positive.
    """

    gamma: tuple[float, ...] = (1.0,)
    alpha: float = 0.01
    beta: float = 0.5
    rho: tuple[float, ...] = (0.9,)

    def __post_init__(self):
        self.gamma = tuple(float(g) for g in self.gamma)
        self.rho = tuple(float(r) for r in self.rho)
        if len(self.gamma) != len(self.rho):
            raise DomainError("gamma and rho must have one entry per channel")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        for name, vals in (("gamma", self.gamma), ("rho", self.rho), ("beta", (self.beta,))):
            if any(v < 0 or v > 1 for v in vals):
                raise DomainError(f"{name} must lie in [0, 1], got {vals}")

    @property
    def n_channels(self) -> int:
        return len(self.gamma)

    @classmethod
    def uniform(cls, n_channels: int, gamma=None, alpha=0.01, beta=0.5, rho=0.9):
        gamma = 1.0 / n_channels if gamma is None else gamma
        return cls((gamma,) * n_channels, alpha, beta, (rho,) * n_channels)


@dataclass
class CategoryNode:
    weights: list[np.ndarray]
    node_index: int = 0
    extra: dict = field(default_factory=dict)

    def copy(self) -> "CategoryNode":
        return CategoryNode([w.copy() for w in self.weights], self.node_index, dict(self.extra))


def complement_code(values) -> np.ndarray:
    """Return ``(I; 1 - I)``. The result always has norm ``len(I)``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size and (np.any(v < 0.0) or np.any(v > 1.0) or np.any(np.isnan(v))):
        raise DomainError(f"complement coding needs values in [0, 1], got {v.tolist()}")
    return np.concatenate([v, 1.0 - v])


def _channels(x) -> list[np.ndarray]:
    if isinstance(x, np.ndarray) and x.ndim == 1:
        return [x]
    return [np.asarray(c, dtype=float) for c in x]


def _check_dims(x: list[np.ndarray], weights: list[np.ndarray]):
    if len(x) != len(weights):
        raise DomainError(f"expected {len(weights)} channels, got {len(x)}")
    for k, (xc, wc) in enumerate(zip(x, weights)):
        if xc.shape != wc.shape:
            raise DomainError(f"channel {k}: dimension {xc.shape} does not match {wc.shape}")


def choice_activation(
    x,
    nodes: Sequence[CategoryNode],
    params: ArtParams,
    vigilances: Sequence[float] | None = None,
    rho_init: float | None = None,
) -> np.ndarray:
    """Code activation for every node, optionally vigilance-modulated.

    ``T_j = (rho_init / rho_j) * sum_k gamma_k |x_k ^ w_jk| / (alpha + |w_jk|)``.
    With ``vigilances`` omitted (or all equal to ``rho_init``) this is the
    plain Fusion ART choice function.
    """
    x = _channels(x)
    if not nodes:
        return np.zeros(0)
    if vigilances is not None:
        if rho_init is None or rho_init <= 0:
            raise DomainError(f"rho_init must be > 0, got {rho_init}")
        if len(vigilances) != len(nodes):
            raise DomainError("one vigilance per node is required")
    T = np.empty(len(nodes))
    for j, node in enumerate(nodes):
        _check_dims(x, node.weights)
        total = 0.0
        for g, xc, wc in zip(params.gamma, x, node.weights):
            total += g * l1(fuzzy_and(xc, wc)) / (params.alpha + l1(wc))
        if vigilances is not None:
            rho_j = vigilances[j]
            if rho_j <= 0:
                raise DomainError(f"node vigilance must be > 0, got {rho_j}")
            total *= rho_init / rho_j
        T[j] = total
    return T


def compete(T) -> int | None:
    """Index of the largest activation, lowest index on ties; None if empty."""
    T = np.asarray(T, dtype=float)
    if T.size == 0:
        return None
    # np.argmax returns the first occurrence of the maximum
    return int(np.argmax(T))


def template_match(x, node: CategoryNode, rho: Sequence[float]) -> tuple[list[float], bool]:
    x = _channels(x)
    _check_dims(x, node.weights)
    # a zero-width channel carries no evidence either way
    m = [l1(fuzzy_and(xc, wc)) / l1(xc) if xc.size else 1.0 for xc, wc in zip(x, node.weights)]
    return m, all(mk >= rk for mk, rk in zip(m, rho))


def template_learn(x, node: CategoryNode, beta: float) -> list[np.ndarray]:
    """Update ``node`` in place with the ART learning rule and return its weights."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    x = _channels(x)
    _check_dims(x, node.weights)
    node.weights = [(1.0 - beta) * wc + beta * fuzzy_and(xc, wc) for xc, wc in zip(x, node.weights)]
    return node.weights


def commit_new(x, node_index: int = 0) -> CategoryNode:
    return CategoryNode([c.copy() for c in _channels(x)], node_index)
