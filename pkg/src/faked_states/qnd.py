"""Nondemolition timing measurement on a discretised time-bin qubit.

A single photon in two Gaussian pulses separated by ``tau`` with relative
phase ``phi`` is sampled on a uniform time grid.  The grid is split into an
early window ``[t_start, t_start + tau)`` and a late window of the same
length; bin ``k`` of the early window and bin ``k + tau/dt`` of the late
window are the same instant of the two pulses.  A timing projector keeps the
amplitude in one interval of the early window *and* in its ``tau``-shifted
copy, so it narrows both pulses together and leaves the relative phase alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QubitDestroyedError

# distance from t0 (in units of 1/delta) that both pulses must fit within
_PULSE_REACH = 4.0
_MIN_SEPARATION = 10.0


def _integral_ratio(x: float, unit: float) -> int:
    k = round(x / unit)
    if k < 1 or abs(x / unit - k) > 1e-9 * max(k, 1):
        raise ValueError(f"{x!r} is not a positive integer multiple of {unit!r}")
    return int(k)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid (ns); ``tau`` must be a multiple of ``dt``."""

    t_start: float
    dt: float
    n_bins: int
    tau: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        m = _integral_ratio(self.tau, self.dt)
        if self.n_bins < 2 * m:
            raise ValueError("grid must cover both pulse windows (n_bins >= 2 tau/dt)")

    @property
    def window_bins(self) -> int:
        """Bins per pulse window, ``tau / dt``."""
        return round(self.tau / self.dt)

    @property
    def centers(self) -> np.ndarray:
        return self.t_start + self.dt * (np.arange(self.n_bins) + 0.5)

    @classmethod
    def covering(cls, tau: float, bins_per_window: int, t_start: float = 0.0) -> TimeGrid:
        """Grid spanning exactly the two pulse windows."""
        return cls(t_start, tau / bins_per_window, 2 * bins_per_window, tau)


@dataclass(frozen=True, eq=False)
class TimeBinState:
    """Single-photon amplitudes on a :class:`TimeGrid` (read-only array)."""

    amplitudes: np.ndarray
    grid: TimeGrid
    phase: float | None = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_bins,):
            raise ValueError("amplitude vector does not match the grid")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def overlap(self, other: TimeBinState) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def gaussian_envelope(t, t0: float, omega0: float, delta: float):
    """Normalised Gaussian pulse with carrier ``exp(-i omega0 (t - t0))``."""
    t = np.asarray(t, dtype=float)
    return (2 * delta**2 / math.pi) ** 0.25 * np.exp(-1j * omega0 * (t - t0) - delta**2 * (t - t0) ** 2)


def make_qubit_state(phase: float, t0: float, grid: TimeGrid, omega0: float, delta: float) -> TimeBinState:
    """Time-bin qubit ``(|t0> + e^{i phase}|t0 + tau>) / sqrt 2``, phase in degrees.

    Amplitudes are sampled at bin centres, each pulse within its own window,
    and renormalised.  Because ``tau`` is a whole number of bins, the late
    pulse is the early one shifted by ``tau / dt`` bins, carrier included.

    Raises:
        ValueError: if the pulses are not short compared with ``tau``
            (``tau * delta < 10``) or do not fit inside their windows.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if grid.tau * delta < _MIN_SEPARATION:
        raise ValueError(f"pulse duration 1/delta must be at most tau/{_MIN_SEPARATION:g}")
    reach = _PULSE_REACH / delta
    if t0 - reach < grid.t_start or t0 + reach > grid.t_start + grid.tau:
        raise ValueError("pulses extend outside the grid windows")
    m = grid.window_bins
    t = grid.centers
    amps = np.zeros(grid.n_bins, dtype=complex)
    rel = np.exp(1j * math.radians(phase))
    # Each pulse is truncated to its own window.  Sampling the plain sum would
    # mix ~exp(-16) tails of both pulses near the window boundary and corrupt
    # the phase of states collapsed there.
    amps[:m] = gaussian_envelope(t[:m], t0, omega0, delta) / math.sqrt(2)
    amps[m : 2 * m] = rel * amps[:m]
    amps /= np.linalg.norm(amps)
    return TimeBinState(amps, grid, phase)


def n_intervals(grid: TimeGrid, resolution: float) -> int:
    """Number of timing intervals of width ``resolution`` covering the early window."""
    k = _integral_ratio(resolution, grid.dt)
    return -(-grid.window_bins // k)


def interval_mask(grid: TimeGrid, i: int, resolution: float) -> np.ndarray:
    """Boolean mask of interval ``i`` of the early window and its ``tau``-shifted copy."""
    k = _integral_ratio(resolution, grid.dt)
    m = grid.window_bins
    if not 0 <= i < -(-m // k):
        raise ValueError(f"interval index {i} outside the first-pulse window")
    mask = np.zeros(grid.n_bins, dtype=bool)
    lo, hi = i * k, min((i + 1) * k, m)
    mask[lo:hi] = True
    mask[m + lo : m + hi] = True
    return mask


def project_timing(state: TimeBinState, i: int, resolution: float) -> tuple[float, TimeBinState | None]:
    """Apply timing projector ``i`` at the given resolution (ns).

    Returns the outcome probability and the renormalised post-measurement
    state, or ``None`` when the outcome is impossible.
    """
    mask = interval_mask(state.grid, i, resolution)
    kept = np.where(mask, state.amplitudes, 0.0)
    # Rescale before normalising: far-tail outcomes have subnormal probabilities.
    prob = float(np.sum(np.abs(kept) ** 2))
    if prob == 0.0:
        return 0.0, None
    unit = kept / np.max(np.abs(kept))
    unit /= np.linalg.norm(unit)
    return prob, TimeBinState(unit, state.grid, state.phase)


def timing_distribution(state: TimeBinState, resolution: float) -> np.ndarray:
    """Outcome probabilities of every timing interval."""
    return np.array(
        [project_timing(state, i, resolution)[0] for i in range(n_intervals(state.grid, resolution))]
    )


def recovered_phase(state: TimeBinState, grid: TimeGrid | None = None) -> float:
    """Relative phase (degrees, in ``[0, 360)``) between the late and early pulses.

    Raises:
        QubitDestroyedError: if either window carries no amplitude.
    """
    grid = grid or state.grid
    m = grid.window_bins
    early, late = state.amplitudes[:m], state.amplitudes[m : 2 * m]
    if not np.any(early) or not np.any(late):
        raise QubitDestroyedError("qubit destroyed: amplitude left in only one pulse window")
    degrees = math.degrees(np.angle(np.vdot(early, late))) % 360.0
    return 0.0 if degrees == 360.0 else degrees


def rms_duration(state: TimeBinState) -> float:
    """Root-mean-square duration (ns) of the early pulse, using ``|amplitude|^2`` weights."""
    m = state.grid.window_bins
    w = np.abs(state.amplitudes[:m]) ** 2
    if w.sum() == 0:
        raise QubitDestroyedError("no amplitude in the early window")
    t = state.grid.centers[:m]
    mean = np.sum(w * t) / w.sum()
    return float(np.sqrt(np.sum(w * (t - mean) ** 2) / w.sum()))
