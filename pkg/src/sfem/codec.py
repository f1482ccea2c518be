"""Temporal sequence codes for the episode layer.

Two schemes are provided: the decay code (every older event shrinks by
``1 - tau``) and the buffered code, ``o_new = i_w * onehot(J) + b_w * o_old``.
The buffered code can be decoded back into the exact event order as long
as ``b_w < 0.5``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .art import DomainError

EPS_DECODE = 1e-9
MATCH_FRACTION = 0.05
MAX_DECODE_TERMS = 256


class DecodeError(ValueError):
    """A code cannot be written as a sum of distinct buffer-weight powers."""


@dataclass(frozen=True)
class CodecParams:
    tau: float = 0.5
    i_w: float = 1.0
    b_w: float = 0.4

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")
        if self.i_w <= 0:
            raise DomainError(f"i_w must be > 0, got {self.i_w}")
        # greedy decoding needs the geometric tail below one unit
        if not 0.0 < self.b_w < 0.5:
            raise DomainError(f"b_w must lie in (0, 0.5), got {self.b_w}")

    @property
    def bound(self) -> float:
        return self.i_w / (1.0 - self.b_w)


def _check_index(code: np.ndarray, j: int):
    if not 0 <= j < code.size:
        raise IndexError(f"event index {j} outside code of length {code.size}")


def emart_update(y, fired: int, tau: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    _check_index(y, fired)
    out = y * (1.0 - tau)
    out[fired] = 1.0
    return out


def emart_order(y) -> list[int]:
    """Recency order (most recent first) of the nonzero entries of a decay code."""
    y = np.asarray(y, dtype=float)
    idx = [int(i) for i in np.argsort(-y, kind="stable") if y[i] > 0]
    return idx


def deepart_step(o_prev, fired: int, params: CodecParams) -> np.ndarray:
    o_prev = np.asarray(o_prev, dtype=float)
    _check_index(o_prev, fired)
    out = params.b_w * o_prev
    out[fired] += params.i_w
    return out


def encode(sequence: Iterable[int], size: int, params: CodecParams) -> np.ndarray:
    o = np.zeros(size)
    for j in sequence:
        o = deepart_step(o, j, params)
    return o


def _power(params: CodecParams, n: int) -> float:
    return params.i_w * params.b_w**n


def _candidate_power(v: float, used: set[int], params: CodecParams, rel_tol: float) -> int | None:
    """Smallest unused exponent n whose term fits under ``v`` (with tolerance)."""
    # begin one exponent above the first term that fits under v
    start = max(0, int(math.floor(math.log(v / params.i_w) / math.log(params.b_w))) - 1) if v > 0 else 0
    for n in range(start, start + MAX_DECODE_TERMS):
        p = _power(params, n)
        if n in used:
            continue
        slack = max(EPS_DECODE, rel_tol * p)
        if p <= v + slack:
            return n
        if p < EPS_DECODE:
            break
    return None


def _greedy_decode(code: np.ndarray, params: CodecParams, rel_tol: float) -> list[int]:
    c = code.astype(float).copy()
    used: set[int] = set()
    terms: list[tuple[int, int]] = []
    for _ in range(MAX_DECODE_TERMS):
        j = int(np.argmax(c))
        v = c[j]
        if v <= EPS_DECODE:
            break
        n = _candidate_power(v, used, params, rel_tol)
        if n is None:
            raise DecodeError(f"element {j} = {v:.6g} has no unused power term")
        p = _power(params, n)
        used.add(n)
        terms.append((n, j))
        rest = v - p
        if rest < 0 or (rel_tol > 0 and rest <= rel_tol * p):
            rest = 0.0
        c[j] = rest
    else:
        raise DecodeError("decoding did not terminate")
    if np.any(c > EPS_DECODE):
        raise DecodeError("residual mass left after decoding")
    exponents = sorted(n for n, _ in terms)
    if exponents != list(range(len(terms))):
        raise DecodeError(f"power terms {exponents} are not a contiguous sequence")
    # larger exponent = older event
    terms.sort(key=lambda t: -t[0])
    return [j for _, j in terms]


def decode_sequence(code, params: CodecParams, tolerant: bool = True) -> list[int]:
    """Recover the chronological event order from a buffered code.

    The largest element is peeled off repeatedly by subtracting the largest
    unused ``i_w * b_w**n`` that fits under it. An exact pass runs first; if
    it fails and ``tolerant`` is set, a second pass accepts terms within 5%
    (to read back weights that learning has pulled slightly off the grid).
    """
    code = np.asarray(code, dtype=float)
    if code.size == 0 or not np.any(code > EPS_DECODE):
        return []
    if np.any(code < -EPS_DECODE):
        raise DecodeError("negative element in code")
    try:
        return _greedy_decode(code, params, 0.0)
    except DecodeError:
        if not tolerant:
            raise
    return _greedy_decode(code, params, MATCH_FRACTION)


def episode_activation(y, w) -> float:
    """Episode-layer choice ``|y ^ w| / |w|`` (0 for an empty template)."""
    den = float(np.sum(w))
    if den <= 0:
        return 0.0
    return float(np.sum(np.minimum(y, w))) / den


def episode_match(y, w) -> float:
    den = float(np.sum(y))
    if den <= 0:
        return 0.0
    return float(np.sum(np.minimum(y, w))) / den


def pad(code: Sequence[float], size: int) -> np.ndarray:
    out = np.zeros(size)
    code = np.asarray(code, dtype=float)
    out[: code.size] = code
    return out
