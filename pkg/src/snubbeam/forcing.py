"""Periodic excitation signals.

A shaker driving a beam through a force transducer does not deliver a
clean sine, so besides the analytic sine there is a sampled variant that
periodically extends a measured force record by linear interpolation.
Linear (not spline) interpolation is deliberate: the signal feeds a
nonsmooth ODE and higher-order interpolation buys nothing there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SineForcing",
    "SampledPeriodicForcing",
    "ForcingSignal",
    "load_samples",
    "read_force_file",
]


@dataclass(frozen=True)
class SineForcing:
    """A sin(2 pi f t + phase), amplitude in N, frequency in Hz."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.amplitude) and self.amplitude >= 0.0):
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude!r}")
        if not (np.isfinite(self.frequency) and self.frequency > 0.0):
            raise ValueError(f"frequency must be positive, got {self.frequency!r}")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    def value_at(self, t):
        return self.amplitude * np.sin(2.0 * np.pi * self.frequency * t + self.phase)

    def min_breakpoint_spacing(self) -> float | None:
        """Smooth signal: no breakpoints to recommend to the integrator."""
        return None

    __call__ = value_at


class SampledPeriodicForcing:
    """Measured samples on [0, period), extended periodically.

    Evaluation interpolates linearly on t mod period; the segment from the
    last sample back to the first closes the period, so the extension is
    continuous.
    """

    def __init__(self, times, values, period):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d and equally long")
        if len(times) < 2:
            raise ValueError("need at least 2 samples")
        if not (np.isfinite(period) and period > 0.0):
            raise ValueError(f"period must be positive, got {period!r}")
        if not np.isfinite(times).all() or not np.isfinite(values).all():
            raise ValueError("samples must be finite")
        if times[0] != 0.0:
            raise ValueError(f"first sample time must be 0, got {times[0]}")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("sample times must be strictly ascending")
        if times[-1] > period:
            raise ValueError(
                f"last sample time {times[-1]} exceeds the period {period}"
            )
        self.times = times
        self.values = values
        self.period = float(period)
        if times[-1] < period:
            # wrap the last sample to the first to close the period
            self._tx = np.append(times, period)
            self._vx = np.append(values, values[0])
        else:
            self._tx = times
            self._vx = values

    def value_at(self, t):
        return np.interp(np.mod(t, self.period), self._tx, self._vx)

    def min_breakpoint_spacing(self) -> float:
        """Smallest interpolation segment; a recommended step-size cap."""
        return float(np.min(np.diff(self._tx)))

    __call__ = value_at

    def __repr__(self):
        return (
            f"SampledPeriodicForcing({len(self.times)} samples, "
            f"period={self.period})"
        )


ForcingSignal = SineForcing | SampledPeriodicForcing


def load_samples(rows, period: float) -> SampledPeriodicForcing:
    """Validated sampled signal from (time, force) rows.

    Rejects malformed rows with an error naming the offender; the
    structural checks (ascending times, last time within the period) are
    delegated to the signal constructor.
    """
    rows = list(rows)
    if len(rows) < 2:
        raise ValueError(f"need at least 2 samples, got {len(rows)}")
    times = np.empty(len(rows))
    values = np.empty(len(rows))
    for i, row in enumerate(rows):
        try:
            t, f = row
            times[i] = float(t)
            values[i] = float(f)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"row {i} is not a (time, force) pair: {row!r}") from exc
        if not (math.isfinite(times[i]) and math.isfinite(values[i])):
            raise ValueError(f"row {i} contains non-finite values: {row!r}")
    return SampledPeriodicForcing(times, values, period)


def read_force_file(path) -> list[tuple[float, float]]:
    """Parse a two-column (time, force) text file.

    Comma- or whitespace-delimited; ``#`` starts a comment. Errors carry
    the file name and line number.
    """
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected two columns, got {len(parts)}: {raw.rstrip()!r}"
                )
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ValueError(
                    f"{path}:{lineno}: could not parse numbers: {raw.rstrip()!r}"
                ) from exc
    return rows
