"""Episode recognition over the working buffer.

Adjacent chunks that follow each other at least twice are merged, most
frequent pair first, until nothing changes. Chunks that are still single
events at the fixpoint never became part of a routine and are dropped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

GAP = -1  # time-gap token inside an episode


@dataclass(frozen=True)
class _Chunk:
    tokens: tuple[int, ...]
    start: float
    end: float


def _has_repeat(tokens: tuple[int, ...]) -> bool:
    """True if some contiguous run of >= 2 events occurs twice without overlap."""
    seq = [t for t in tokens if t != GAP]
    for length in range(2, len(seq) // 2 + 1):
        first_seen: dict[tuple[int, ...], int] = {}
        for i in range(len(seq) - length + 1):
            window = tuple(seq[i : i + length])
            j = first_seen.setdefault(window, i)
            if i - j >= length:
                return True
    return False


def _count_pairs(items: list[_Chunk]) -> tuple[Counter, dict]:
    counts: Counter = Counter()
    first: dict = {}
    i = 0
    last_end: dict = {}
    while i < len(items) - 1:
        key = (items[i].tokens, items[i + 1].tokens)
        # occurrences are counted without overlap
        if last_end.get(key, -1) <= i:
            counts[key] += 1
            first.setdefault(key, i)
            last_end[key] = i + 2
        i += 1
    return counts, first


def _regular_gap(gaps: list[float], regularity: float, min_gap: float) -> bool:
    mean = sum(gaps) / len(gaps)
    if mean < min_gap or mean <= 0:
        return False
    return max(gaps) - min(gaps) <= regularity * mean


def _merge(items: list[_Chunk], key, regularity: float, min_gap: float) -> list[_Chunk]:
    left, right = key
    spots = []
    i = 0
    while i < len(items) - 1:
        if items[i].tokens == left and items[i + 1].tokens == right:
            spots.append(i)
            i += 2
        else:
            i += 1
    gaps = [items[i + 1].start - items[i].end for i in spots]
    tokens = left + ((GAP,) if _regular_gap(gaps, regularity, min_gap) else ()) + right
    out = []
    spot_set = set(spots)
    i = 0
    while i < len(items):
        if i in spot_set:
            out.append(_Chunk(tokens, items[i].start, items[i + 1].end))
            i += 2
        else:
            out.append(items[i])
            i += 1
    return out


def recognize_episodes(
    buffer: Sequence[tuple[int, float]],
    min_count: int = 2,
    gap_regularity: float = 0.2,
    min_gap: float = 60.0,
) -> list[tuple[int, ...]]:
    """Segment a buffer of ``(event_index, time)`` pairs into episodes.

    A time-gap token is inserted between two merged chunks when the pause
    between them is at least ``min_gap`` seconds and its spread across
    occurrences is within ``gap_regularity`` of the mean pause.
    """
    items = [_Chunk((int(j),), float(t), float(t)) for j, t in buffer]
    while True:
        counts, first = _count_pairs(items)
        candidates = [
            k for k, c in counts.items()
            if c >= min_count and not _has_repeat(k[0] + k[1])
        ]
        if not candidates:
            break
        best = min(candidates, key=lambda k: (-counts[k], first[k]))
        items = _merge(items, best, gap_regularity, min_gap)

    episodes: list[tuple[int, ...]] = []
    for chunk in items:
        n_events = sum(1 for t in chunk.tokens if t != GAP)
        if n_events >= 2 and chunk.tokens not in episodes:
            episodes.append(chunk.tokens)
    return episodes
