"""Recurrent reference window over previously enhanced frames.

Streaming enhancement may only look backwards.  Each processed frame leaves
behind its feature map and its enhanced (pre-encode, float) luma plane; later
frames pick their two references from this window by compression quality, so
a heavily compressed current frame can borrow detail from the cleanest recent
frames instead of merely the most recent ones.  Caching both artifacts means
no frame is ever re-run through the feature extractor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class CacheEntry:
    frame_index: int
    qp: int
    features: np.ndarray  # (32, H/2, W/2) float32 from the feature extractor
    enhanced: np.ndarray  # (H, W) float32 enhanced luma, pre-encode

    def __post_init__(self):
        if self.frame_index < 0:
            raise ConfigError(f"frame_index must be >= 0, got {self.frame_index}")


class ReferenceWindow:
    """Sliding window of the last ``capacity`` enhanced frames."""

    def __init__(self, capacity: int = 7):
        if capacity < 1:
            raise ConfigError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._entries: list[CacheEntry] = []

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[CacheEntry, ...]:
        return tuple(self._entries)

    def push(self, entry: CacheEntry) -> None:
        """Append the newest frame, evicting the oldest past capacity."""
        if self._entries and entry.frame_index <= self._entries[-1].frame_index:
            raise ConfigError(
                f"frame_index {entry.frame_index} not after "
                f"{self._entries[-1].frame_index}; frames must arrive in order"
            )
        self._entries.append(entry)
        if len(self._entries) > self.capacity:
            del self._entries[0]

    def select_refs(self, count: int = 2) -> list[CacheEntry]:
        """The ``count`` least-compressed cached frames.

        Sorted by ascending QP; equal QP prefers the more recent frame.
        Returns fewer than ``count`` when the window has fewer entries.
        """
        ranked = sorted(self._entries, key=lambda e: (e.qp, -e.frame_index))
        return ranked[:count]

    def clear(self) -> None:
        self._entries.clear()


def bootstrap_refs(current: CacheEntry, selected: list[CacheEntry]):
    """Pad a reference list to exactly two entries.

    An empty window (first frame) falls back to self-reference with the
    current frame's own features and compensated plane; a single reference
    is duplicated.  Two references pass through unchanged.
    """
    if len(selected) >= 2:
        return selected[0], selected[1]
    if len(selected) == 1:
        return selected[0], selected[0]
    return current, current
