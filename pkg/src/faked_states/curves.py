"""Time-dependent detector efficiency curves.

Two representations are supported:

* :class:`GateCurve`: a parametric gate built from a logistic rising edge and
  a logistic falling edge around a flat plateau.
* :class:`TabulatedCurve`: sampled ``(t, eta)`` points, linearly interpolated
  and zero outside the sampled range.

Both are callable on scalars or numpy arrays (times in ns) and always return
values inside ``[0, 1]``.  The module also computes the worst-case efficiency
ratio between the two detectors of a :class:`DetectorPair`
(:func:`mismatch_eta`), smears curves with timing jitter
(:func:`jitter_smear`), and reads curve data files.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import expit

from .errors import InfeasibleError, ParseError

DEFAULT_FLOOR = 1e-4
DEFAULT_STEP = 1e-3  # ns

# Logistic tails are below exp(-25) ~ 1e-11 of the peak this far past an edge.
_GATE_TAIL = 25.0

PROCESSED_HEADER = ("t_ns", "eta0", "eta1")
RAW_HEADER = (
    "t_ns",
    "counts0",
    "gates0",
    "counts1",
    "gates1",
    "dark0",
    "dark_gates0",
    "dark1",
    "dark_gates1",
)


def _clip(values):
    out = np.clip(values, 0.0, 1.0)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class GateCurve:
    """Parametric gate: logistic rise and fall around a plateau.

    Args:
        center: Gate center (ns).
        plateau_width: Distance between the half-height points of the two
            edges (ns).
        edge_scale: Logistic scale of both edges (ns).
        peak_efficiency: Efficiency on the plateau.
    """

    center: float
    plateau_width: float
    edge_scale: float
    peak_efficiency: float

    def __post_init__(self):
        if not 0.0 <= self.peak_efficiency <= 1.0:
            raise ValueError("peak_efficiency must lie in [0, 1]")
        if self.edge_scale <= 0:
            raise ValueError("edge_scale must be positive")
        if self.plateau_width < 0:
            raise ValueError("plateau_width must be nonnegative")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        half = 0.5 * self.plateau_width
        rise = expit((t - (self.center - half)) / self.edge_scale)
        fall = expit(-(t - (self.center + half)) / self.edge_scale)
        return _clip(self.peak_efficiency * rise * fall)

    def support(self) -> tuple[float, float]:
        reach = 0.5 * self.plateau_width + _GATE_TAIL * self.edge_scale
        return self.center - reach, self.center + reach

    def shifted(self, dt: float) -> GateCurve:
        return GateCurve(self.center + dt, self.plateau_width, self.edge_scale, self.peak_efficiency)


@dataclass(frozen=True, eq=False)
class TabulatedCurve:
    """Sampled efficiency curve with linear interpolation, zero outside."""

    t: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        eta = np.array(self.eta, dtype=float)
        if t.ndim != 1 or t.shape != eta.shape or t.size == 0:
            raise ValueError("t and eta must be equal-length, nonempty 1-D sequences")
        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            raise ValueError(f"sample times must be strictly increasing (row {bad[0] + 1})")
        if np.any(~np.isfinite(eta)) or np.any((eta < 0) | (eta > 1)):
            raise ValueError("efficiencies must lie in [0, 1]")
        t.flags.writeable = False
        eta.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "eta", eta)

    def __call__(self, t):
        return _clip(np.interp(t, self.t, self.eta, left=0.0, right=0.0))

    def support(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def shifted(self, dt: float) -> TabulatedCurve:
        return TabulatedCurve(self.t + dt, self.eta)


EfficiencyCurve = GateCurve | TabulatedCurve


def evaluate(curve: EfficiencyCurve, t):
    """Efficiency of ``curve`` at time(s) ``t`` (ns)."""
    return curve(t)


@dataclass(frozen=True)
class DetectorPair:
    """Bob's two detectors: ``curve0`` registers bit 0, ``curve1`` bit 1.

    ``dark0``/``dark1`` are per-gate dark-count probabilities.
    """

    curve0: EfficiencyCurve
    curve1: EfficiencyCurve
    dark0: float = 0.0
    dark1: float = 0.0

    def __post_init__(self):
        for name in ("dark0", "dark1"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")

    def swapped(self) -> DetectorPair:
        return DetectorPair(self.curve1, self.curve0, self.dark1, self.dark0)

    def support(self) -> tuple[float, float]:
        lo0, hi0 = self.curve0.support()
        lo1, hi1 = self.curve1.support()
        return min(lo0, lo1), max(hi0, hi1)


@dataclass(frozen=True)
class JitterDistribution:
    """Timing jitter added by Bob: ``gaussian`` (scale = std) or ``uniform`` (scale = half-width)."""

    kind: str
    scale: float

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown jitter kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("jitter scale must be positive")


@dataclass(frozen=True)
class MismatchResult:
    """Outcome of :func:`mismatch_eta`.

    ``direction`` is ``"eta1/eta0"`` when detector 1 is the one blinded at
    ``t`` and ``"eta0/eta1"`` otherwise.
    """

    eta: float
    t: float
    direction: str
    floor: float
    peak: float

    @property
    def total_mismatch(self) -> bool:
        return self.eta == 0.0

    def __float__(self):
        return self.eta


def from_samples(rows: Iterable[Sequence[float]], calibration: float = 1.0) -> TabulatedCurve:
    """Build a tabulated curve from raw count data with dark counts subtracted.

    Each row is ``(t, counts, gates, dark_counts, dark_gates)``; the efficiency
    at ``t`` is ``max(0, counts/gates - dark_counts/dark_gates) * calibration``.

    Raises:
        ParseError: on nonpositive gate numbers, negative counts or
            non-increasing times; the message names the 0-based row.
    """
    ts, etas = [], []
    for i, row in enumerate(rows):
        t, counts, gates, dark, dark_gates = (float(x) for x in row)
        if gates <= 0 or dark_gates <= 0:
            raise ParseError(f"row {i}: gate numbers must be positive")
        if counts < 0 or dark < 0:
            raise ParseError(f"row {i}: negative counts")
        if ts and t <= ts[-1]:
            raise ParseError(f"row {i}: times must be strictly increasing")
        ts.append(t)
        etas.append(min(1.0, max(0.0, counts / gates - dark / dark_gates) * calibration))
    if not ts:
        raise ParseError("no samples")
    return TabulatedCurve(np.array(ts), np.array(etas))


def _sample_times(domain: tuple[float, float], step: float) -> np.ndarray:
    lo, hi = domain
    if not hi >= lo:
        raise ValueError("empty domain")
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    t = lo + step * np.arange(n)
    if t[-1] < hi:
        t = np.append(t, hi)
    return t


def mismatch_eta(
    pair: DetectorPair,
    domain: tuple[float, float] | None = None,
    floor: float = DEFAULT_FLOOR,
    step: float = DEFAULT_STEP,
) -> MismatchResult:
    """Worst-case efficiency ratio ``min(min_t eta1/eta0, min_t eta0/eta1)``.

    Only times where the brighter detector reaches ``floor`` times the peak
    efficiency seen on the sampled domain take part; elsewhere both curves are
    in their 0/0 noise tails.  Ties resolve toward the earliest time.

    Args:
        pair: The detectors.
        domain: ``(start, stop)`` in ns; defaults to the union of the curve
            supports.
        floor: Relative floor, a fraction of the peak efficiency.
        step: Sampling step (ns).

    Raises:
        InfeasibleError: if no sampled time passes the floor.
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    t = _sample_times(domain if domain is not None else pair.support(), step)
    e0 = np.asarray(pair.curve0(t), dtype=float)
    e1 = np.asarray(pair.curve1(t), dtype=float)
    brighter = np.maximum(e0, e1)
    peak = float(brighter.max())
    keep = (brighter >= floor * peak) & (peak > 0)
    if not keep.any():
        raise InfeasibleError("curves below floor everywhere")
    t, e0, e1 = t[keep], e0[keep], e1[keep]
    r10 = np.divide(e1, e0, out=np.full_like(e1, np.inf), where=e0 > 0)
    r01 = np.divide(e0, e1, out=np.full_like(e0, np.inf), where=e1 > 0)
    i10, i01 = int(np.argmin(r10)), int(np.argmin(r01))
    m10, m01 = float(r10[i10]), float(r01[i01])
    if m10 < m01 or (m10 == m01 and t[i10] <= t[i01]):
        eta, tmin, direction = m10, t[i10], "eta1/eta0"
    else:
        eta, tmin, direction = m01, t[i01], "eta0/eta1"
    return MismatchResult(min(eta, 1.0), float(tmin), direction, floor, peak)


def _kernel(jitter: JitterDistribution, step: float) -> np.ndarray:
    n_half = max(1, math.ceil(5.0 * jitter.scale / step))
    u = step * np.arange(-n_half, n_half + 1)
    if jitter.kind == "gaussian":
        w = np.exp(-0.5 * (u / jitter.scale) ** 2)
    else:
        # trapezoid weights: endpoints of the box count half
        w = np.where(np.abs(u) < jitter.scale, 1.0, 0.0)
        w[np.isclose(np.abs(u), jitter.scale, rtol=0, atol=1e-9 * step)] = 0.5
    if w.sum() == 0:
        w[n_half] = 1.0
    return w / w.sum()


def jitter_smear(curve: EfficiencyCurve, jitter: JitterDistribution, grid_step: float) -> TabulatedCurve:
    """Convolve a curve with a jitter density on a uniform time grid.

    The result is tabulated on ``grid_step`` spacing and its support extends
    the input support by ``5 * jitter.scale`` on each side.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    lo, hi = curve.support()
    pad = 5.0 * jitter.scale
    n = int(math.ceil((hi - lo + 2 * pad) / grid_step)) + 1
    t = (lo - pad) + grid_step * np.arange(n)
    f = np.asarray(curve(t), dtype=float)
    smeared = np.convolve(f, _kernel(jitter, grid_step), mode="same")
    return TabulatedCurve(t, np.clip(smeared, 0.0, 1.0))


def eta_vs_shift(
    pair: DetectorPair,
    shifts: Iterable[float],
    floor: float = DEFAULT_FLOOR,
    step: float = DEFAULT_STEP,
) -> list[tuple[float, float]]:
    """Mismatch ``eta`` with ``curve1`` translated by each shift (ns)."""
    out = []
    for dt in shifts:
        moved = DetectorPair(pair.curve0, pair.curve1.shifted(dt), pair.dark0, pair.dark1)
        out.append((float(dt), mismatch_eta(moved, floor=floor, step=step).eta))
    return out


def curve_mass(curve: EfficiencyCurve, step: float = DEFAULT_STEP) -> float:
    """Trapezoidal ``integral eta(t) dt`` over the curve support."""
    t = _sample_times(curve.support(), step)
    return float(trapezoid(curve(t), t))


# -- curve data files -------------------------------------------------------


def _data_rows(text: str):
    """Yield ``(line_number, fields)`` for non-comment, non-blank lines."""
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, next(csv.reader([stripped]))


def parse_curve_text(text: str, calibration: float = 1.0) -> DetectorPair:
    """Parse curve CSV text in processed or raw form into a :class:`DetectorPair`.

    Raises:
        ParseError: with the offending line number.
    """
    rows = _data_rows(text)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError("empty curve file") from None
    header = tuple(h.strip() for h in header)
    if header == PROCESSED_HEADER:
        raw = False
    elif header == RAW_HEADER:
        raw = True
    else:
        raise ParseError(f"unrecognised header {','.join(header)!r}", line=lineno)

    values, linenos = [], []
    for lineno, fields in rows:
        if len(fields) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(fields)}", line=lineno)
        try:
            values.append([float(x) for x in fields])
        except ValueError:
            raise ParseError("non-numeric field", line=lineno) from None
        if not all(math.isfinite(v) for v in values[-1]):
            raise ParseError("non-finite field", line=lineno)
        if len(values) > 1 and values[-1][0] <= values[-2][0]:
            raise ParseError("times must be strictly increasing", line=lineno)
        linenos.append(lineno)
    if not values:
        raise ParseError("no data rows")
    data = np.array(values)
    t = data[:, 0]

    if not raw:
        for col in (1, 2):
            bad = np.flatnonzero((data[:, col] < 0) | (data[:, col] > 1))
            if bad.size:
                raise ParseError("efficiency outside [0, 1]", line=linenos[bad[0]])
        eta0 = np.clip(data[:, 1] * calibration, 0.0, 1.0)
        eta1 = np.clip(data[:, 2] * calibration, 0.0, 1.0)
        return DetectorPair(TabulatedCurve(t, eta0), TabulatedCurve(t, eta1))

    curves = []
    for counts, gates, dark, dark_gates in ((1, 2, 5, 6), (3, 4, 7, 8)):
        for k, row in enumerate(data):
            if row[gates] <= 0 or row[dark_gates] <= 0:
                raise ParseError("gate numbers must be positive", line=linenos[k])
            if row[counts] < 0 or row[dark] < 0:
                raise ParseError("negative counts", line=linenos[k])
        curves.append(from_samples(data[:, [0, counts, gates, dark, dark_gates]], calibration))
    return DetectorPair(*curves)


def read_curve_file(path: str | Path, calibration: float = 1.0) -> DetectorPair:
    """Read a curve data file (UTF-8 CSV, ``#`` comments ignored)."""
    return parse_curve_text(Path(path).read_text(encoding="utf-8"), calibration)


def format_curve_text(t: Sequence[float], eta0: Sequence[float], eta1: Sequence[float]) -> str:
    """Render a processed-form curve file."""
    lines = [",".join(PROCESSED_HEADER)]
    lines += [f"{a:.9g},{b:.9g},{c:.9g}" for a, b, c in zip(t, eta0, eta1)]
    return "\n".join(lines) + "\n"
