"""Digital pulse trains.

A pulse train is the wire format between circuit modules: an ordered list of
(rise time, width) pairs. Pulse frequency carries activity, pulse width
carries coupling strength.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PulseTrain:
    """Ordered, non-overlapping digital pulses.

    rises and widths are parallel arrays in seconds. Rise times are strictly
    increasing and each pulse must end at or before the next one rises
    (adjacent pulses are allowed, overlapping ones are not).
    """

    rises: np.ndarray = field(default_factory=lambda: np.empty(0))
    widths: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.rises = np.asarray(self.rises, dtype=float)
        self.widths = np.asarray(self.widths, dtype=float)
        if self.rises.shape != self.widths.shape or self.rises.ndim != 1:
            raise ValueError("rises and widths must be 1-D arrays of equal length")
        if len(self.rises) == 0:
            return
        if np.any(self.widths <= 0):
            raise ValueError("pulse widths must be positive")
        if np.any(np.diff(self.rises) <= 0):
            raise ValueError("pulse rise times must be strictly increasing")
        ends = self.rises + self.widths
        if np.any(ends[:-1] > self.rises[1:]):
            raise ValueError("pulses within one train must not overlap")

    @classmethod
    def empty(cls) -> "PulseTrain":
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def from_pairs(cls, pairs) -> "PulseTrain":
        """Build from an iterable of (rise_time, width) tuples."""
        pairs = list(pairs)
        if not pairs:
            return cls.empty()
        rises, widths = zip(*pairs)
        return cls(np.array(rises, dtype=float), np.array(widths, dtype=float))

    def __len__(self) -> int:
        return len(self.rises)

    @property
    def ends(self) -> np.ndarray:
        return self.rises + self.widths

    def high_time(self) -> float:
        """Total time the signal is high."""
        return float(self.widths.sum())

    def levels(self, times) -> np.ndarray:
        """Sample the digital level at the given instants.

        A pulse covers the half-open interval [rise, rise + width).
        """
        times = np.asarray(times, dtype=float)
        if len(self.rises) == 0:
            return np.zeros(times.shape, dtype=bool)
        idx = np.searchsorted(self.rises, times, side="right") - 1
        valid = idx >= 0
        idx = np.clip(idx, 0, None)
        high = valid & (times < self.rises[idx] + self.widths[idx])
        return high

    def step_levels(self, dt: float, n_steps: int) -> np.ndarray:
        """Boolean level per simulation step, sampled at step start times."""
        return self.levels(np.arange(n_steps) * dt)


def periodic_train(freq_hz: float, width: float, duration: float,
                   start: float = 0.0) -> PulseTrain:
    """Regular pulse train at a fixed frequency, pulses within [start, duration)."""
    if freq_hz <= 0:
        return PulseTrain.empty()
    if width >= 1.0 / freq_hz:
        raise ValueError("pulse width must be shorter than the pulse period")
    n = int(np.ceil((duration - start) * freq_hz))
    rises = start + np.arange(max(n, 0)) / freq_hz
    rises = rises[rises < duration]
    return PulseTrain(rises, np.full(len(rises), width))


def merge_or(trains) -> PulseTrain:
    """OR-combination of pulse trains.

    The output is high wherever any input is high; overlapping or adjacent
    pulses coalesce into one.
    """
    trains = list(trains)
    nonempty = [t for t in trains if len(t) > 0]
    if not nonempty:
        return PulseTrain.empty()
    rises = np.concatenate([t.rises for t in nonempty])
    ends = np.concatenate([t.ends for t in nonempty])
    order = np.argsort(rises, kind="stable")
    rises, ends = rises[order], ends[order]

    out_r = [rises[0]]
    out_e = [ends[0]]
    for r, e in zip(rises[1:], ends[1:]):
        if r <= out_e[-1]:
            out_e[-1] = max(out_e[-1], e)
        else:
            out_r.append(r)
            out_e.append(e)
    out_r = np.array(out_r)
    out_e = np.array(out_e)
    return PulseTrain(out_r, out_e - out_r)
