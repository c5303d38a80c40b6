"""Frequency/impedance sweep container and resonance location.

The :class:`ImpedanceSweep` is the exchange format between the plate model,
the circuit fitter, the scoring metrics and the file readers.  All functions
here are pure; sweeps are immutable after construction.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, ResonanceNotFoundError


@dataclass(frozen=True)
class ImpedanceSweep:
    """Complex impedance samples on a strictly increasing frequency grid.

    Attributes:
        freq_hz: frequencies in Hz, strictly increasing, all positive.
        z_ohm: complex impedance at each frequency.
        ref_ohm: reference impedance for reflection-based metrics.
    """

    freq_hz: np.ndarray
    z_ohm: np.ndarray
    ref_ohm: float = 50.0

    def __post_init__(self):
        f = np.asarray(self.freq_hz, dtype=float).copy()
        z = np.asarray(self.z_ohm, dtype=complex).copy()
        if f.ndim != 1 or z.ndim != 1:
            raise InvariantError("freq_hz and z_ohm must be 1-D arrays")
        if len(f) != len(z):
            raise InvariantError("freq_hz and z_ohm must have equal length")
        if len(f) == 0:
            raise InvariantError("sweep must contain at least one point")
        if not np.all(f > 0):
            raise InvariantError("frequencies must be positive")
        if len(f) > 1 and not np.all(np.diff(f) > 0):
            raise InvariantError("frequencies must be strictly increasing")
        if not (float(self.ref_ohm) > 0):
            raise InvariantError("ref_ohm must be positive")
        f.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "freq_hz", f)
        object.__setattr__(self, "z_ohm", z)
        object.__setattr__(self, "ref_ohm", float(self.ref_ohm))

    def __len__(self) -> int:
        return len(self.freq_hz)


def _parabolic_vertex(x: np.ndarray, y: np.ndarray) -> float:
    """Vertex abscissa of the parabola through three points (non-uniform grid)."""
    x1, x2, x3 = x
    y1, y2, y3 = y
    d21, d23 = x2 - x1, x3 - x2
    num = (y1 - y2) * d23 * d23 - (y3 - y2) * d21 * d21
    den = (y1 - y2) * d23 + (y3 - y2) * d21
    if den == 0 or not np.isfinite(den) or not np.isfinite(num):
        return float(x2)
    x_star = x2 + 0.5 * num / den
    # a degenerate fit can put the vertex outside the bracket; fall back
    if not (x1 <= x_star <= x3):
        return float(x2)
    return float(x_star)


def _refine(freq: np.ndarray, logmag: np.ndarray, idx: int) -> float:
    if idx <= 0 or idx >= len(freq) - 1:
        return float(freq[idx])
    if not np.all(np.isfinite(logmag[idx - 1:idx + 2])):
        return float(freq[idx])
    return _parabolic_vertex(freq[idx - 1:idx + 2], logmag[idx - 1:idx + 2])


def find_resonances(sweep: ImpedanceSweep) -> tuple[float, float]:
    """Locate the series (|Z| minimum) and parallel (|Z| maximum) resonances.

    The series resonance is the global interior |Z| minimum; the parallel
    resonance is the first interior |Z| maximum above it.  Both are refined
    by quadratic interpolation of log|Z| over the three nearest grid points.

    Raises:
        ResonanceNotFoundError: no interior minimum/maximum ordering exists
            (e.g. a monotone capacitive sweep).
    """
    if len(sweep) < 3:
        raise ResonanceNotFoundError("sweep too short to contain a resonance")
    mag = np.abs(sweep.z_ohm)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.maximum(mag, 1e-300))
    f = sweep.freq_hz

    i_min = int(np.argmin(mag))
    if i_min == 0 or i_min == len(f) - 1:
        raise ResonanceNotFoundError("global |Z| minimum sits on the sweep edge")
    if not (mag[i_min] < mag[i_min - 1] and mag[i_min] < mag[i_min + 1]):
        raise ResonanceNotFoundError("no strict interior |Z| minimum found")

    i_max = None
    for j in range(i_min + 1, len(f) - 1):
        if mag[j] > mag[j - 1] and mag[j] >= mag[j + 1]:
            i_max = j
            break
    if i_max is None:
        raise ResonanceNotFoundError("no |Z| maximum found above the minimum")

    fs = _refine(f, logmag, i_min)
    fp = _refine(f, logmag, i_max)
    if not fs < fp:
        # interpolation cannot cross grid cells; this is defensive only
        fs, fp = float(f[i_min]), float(f[i_max])
    return fs, fp
