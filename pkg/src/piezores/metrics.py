"""Resonator figures of merit: Bode Q, coupling, suppression region, FoM.

Also carries the built-in state-of-the-art comparison table and the ranking
helper.  All functions are pure; independent sweeps may be scored
concurrently.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import bvd
from .errors import (InvariantError, ReflectionMagnitudeError,
                     SweepCoverageError)
from .sweep import ImpedanceSweep, find_resonances

#: supported k_r^2 conventions, selectable wherever coupling is computed
K2_CONVENTIONS = ("pi2_8", "fp_ref", "mason_tan")


def coupling_from_freqs(fs_hz: float, fp_hz: float,
                        convention: str = "pi2_8") -> float:
    """Electromechanical coupling from the resonance pair.

    Default convention: k_r^2 = (pi^2/8) (fp^2 - fs^2) / fs^2.  Alternatives:
    "fp_ref" = (fp^2 - fs^2)/fp^2 and "mason_tan" = phi_s / tan(phi_s) with
    phi_s = (pi/2)(fs/fp).
    """
    if not 0 < fs_hz < fp_hz:
        raise InvariantError("need 0 < fs < fp")
    if convention == "pi2_8":
        return (math.pi ** 2 / 8.0) * (fp_hz ** 2 - fs_hz ** 2) / fs_hz ** 2
    if convention == "fp_ref":
        return (fp_hz ** 2 - fs_hz ** 2) / fp_hz ** 2
    if convention == "mason_tan":
        phi = (math.pi / 2.0) * (fs_hz / fp_hz)
        return phi / math.tan(phi)
    raise InvariantError(f"unknown k^2 convention {convention!r}")


def fp_from_coupling(fs_hz: float, k_sq: float,
                     convention: str = "pi2_8") -> float:
    """Inverse of :func:`coupling_from_freqs` (parallel resonance implied)."""
    if not (fs_hz > 0 and k_sq > 0):
        raise InvariantError("need positive fs and k^2")
    if convention == "pi2_8":
        return fs_hz * math.sqrt(1.0 + (8.0 / math.pi ** 2) * k_sq)
    if convention == "fp_ref":
        return fs_hz / math.sqrt(1.0 - k_sq)
    raise InvariantError(f"no closed inverse for convention {convention!r}")


def fom(q: float, k_sq: float) -> float:
    """Figure of merit Q * k_r^2."""
    if q < 0 or k_sq < 0:
        raise InvariantError("Q and k^2 must be non-negative")
    return q * k_sq


def bode_q(sweep: ImpedanceSweep) -> tuple[np.ndarray, np.ndarray]:
    """Quality factor from the reflection coefficient's group delay.

    Gamma = (Z - Zref)/(Z + Zref); tau = -d(arg Gamma)/dw with the phase
    unwrapped and differentiated by central differences (one-sided at the
    ends); Q = w tau |Gamma| / (1 - |Gamma|^2).

    Raises:
        ReflectionMagnitudeError: |Gamma| >= 1 - 1e-12 anywhere (non-passive
            input data).
    """
    if len(sweep) < 3:
        raise InvariantError("Bode Q needs at least 3 points")
    gamma = (sweep.z_ohm - sweep.ref_ohm) / (sweep.z_ohm + sweep.ref_ohm)
    mag = np.abs(gamma)
    if np.any(mag >= 1.0 - 1e-12):
        raise ReflectionMagnitudeError(
            "reflection magnitude reaches 1; data is not passive")
    phase = np.unwrap(np.angle(gamma))
    w = 2.0 * np.pi * sweep.freq_hz
    tau = -np.gradient(phase, w)
    q = w * tau * mag / (1.0 - mag ** 2)
    return sweep.freq_hz.copy(), q


@dataclass(frozen=True)
class SuppressedRegion:
    """Contiguous band around the resistance minimum below the threshold."""

    f_lo_hz: float
    f_hi_hz: float
    width_hz: float
    fractional: float


def suppressed_region(sweep: ImpedanceSweep, fs_hz: float, fp_hz: float,
                      threshold: float = 20.0) -> SuppressedRegion:
    """Band inside [fs, fp] where Re(Z) stays below threshold times its minimum.

    The region is the maximal contiguous interval containing the resistance
    minimum on which Re(Z) <= threshold * R_min, clipped to [fs, fp]; edge
    crossings are linearly interpolated between grid points.
    """
    if not 0 < fs_hz < fp_hz:
        raise InvariantError("need 0 < fs < fp")
    if not threshold >= 1:
        raise InvariantError("threshold multiplier must be >= 1")
    f = sweep.freq_hz
    if f[0] > fs_hz or f[-1] < fp_hz:
        raise SweepCoverageError(
            f"sweep [{f[0]:g}, {f[-1]:g}] Hz does not span "
            f"[fs, fp] = [{fs_hz:g}, {fp_hz:g}] Hz")
    r_all = sweep.z_ohm.real

    # band samples with interpolated values exactly at fs and fp
    inner = (f > fs_hz) & (f < fp_hz)
    fb = np.concatenate([[fs_hz], f[inner], [fp_hz]])
    rb = np.concatenate([[np.interp(fs_hz, f, r_all)], r_all[inner],
                         [np.interp(fp_hz, f, r_all)]])

    i0 = int(np.argmin(rb))
    r_min = float(rb[i0])
    if r_min <= 0:
        raise InvariantError(
            "resistance minimum within [fs, fp] must be positive")
    limit = threshold * r_min
    inside = rb <= limit

    lo = i0
    while lo > 0 and inside[lo - 1]:
        lo -= 1
    hi = i0
    while hi < len(fb) - 1 and inside[hi + 1]:
        hi += 1

    def cross(i_in: int, i_out: int) -> float:
        r1, r2 = rb[i_in], rb[i_out]
        if r2 == r1:
            return float(fb[i_out])
        t = (limit - r1) / (r2 - r1)
        return float(fb[i_in] + t * (fb[i_out] - fb[i_in]))

    f_lo = cross(lo, lo - 1) if lo > 0 else float(fb[0])
    f_hi = cross(hi, hi + 1) if hi < len(fb) - 1 else float(fb[-1])
    width = f_hi - f_lo
    return SuppressedRegion(f_lo, f_hi, width, width / (fp_hz - fs_hz))


@dataclass(frozen=True)
class ResonatorScore:
    """Everything the toolkit reports about one resonator sweep."""

    fs_hz: float
    fp_hz: float
    k_r_sq: float
    q_bode_at_fs: float
    q_band_lo_hz: float
    q_band_hi_hz: float
    q_bode_band_median: float
    fom: float
    supp_lo_hz: float
    supp_hi_hz: float
    supp_width_hz: float
    fractional_supp: float
    threshold: float = 20.0
    k2_convention: str = "pi2_8"

    def __post_init__(self):
        if not self.fs_hz < self.fp_hz:
            raise InvariantError("fs must be below fp")
        if not 0 <= self.k_r_sq < 1:
            raise InvariantError("k_r^2 must lie in [0, 1)")
        if not self.supp_lo_hz <= self.supp_hi_hz:
            raise InvariantError("suppressed region bounds out of order")
        if not 0 <= self.fractional_supp <= 1:
            raise InvariantError("fractional suppressed region must be in [0, 1]")
        expected = self.q_bode_at_fs * self.k_r_sq
        if abs(self.fom - expected) > 1e-9 * max(abs(expected), 1.0):
            raise InvariantError("FoM must equal Q(fs) * k_r^2")


def score(sweep: ImpedanceSweep, threshold: float = 20.0,
          k2_convention: str = "pi2_8") -> ResonatorScore:
    """Full figure-of-merit report for a sweep spanning fs and fp."""
    fs, fp = find_resonances(sweep)
    k_sq = coupling_from_freqs(fs, fp, k2_convention)
    freq, q = bode_q(sweep)
    q_fs = float(np.interp(fs, freq, q))
    region = suppressed_region(sweep, fs, fp, threshold)
    in_band = (freq >= region.f_lo_hz) & (freq <= region.f_hi_hz)
    q_med = float(np.median(q[in_band])) if np.any(in_band) else q_fs
    return ResonatorScore(
        fs_hz=fs, fp_hz=fp, k_r_sq=k_sq, q_bode_at_fs=q_fs,
        q_band_lo_hz=region.f_lo_hz, q_band_hi_hz=region.f_hi_hz,
        q_bode_band_median=q_med, fom=q_fs * k_sq,
        supp_lo_hz=region.f_lo_hz, supp_hi_hz=region.f_hi_hz,
        supp_width_hz=region.width_hz, fractional_supp=region.fractional,
        threshold=threshold, k2_convention=k2_convention,
    )


@dataclass(frozen=True)
class SoaRow:
    """One row of the built-in state-of-the-art comparison table."""

    label: str
    fs_mhz: float
    k_r_sq: float
    q: float | None
    fom: float | None
    supp_region_mhz: float | None
    fractional_supp: float | None

    def __post_init__(self):
        for name in ("fs_mhz", "k_r_sq", "q", "fom", "supp_region_mhz",
                     "fractional_supp"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvariantError(f"{name} must be positive when present")


_SOA_ROWS = (
    SoaRow("PZT-radial [34]", 0.48, 0.19, 1030.0, 196.0, 0.015, 0.429),
    SoaRow("LN-TS [35]", 3.55, 0.53, None, None, None, None),
    SoaRow("LN-TS [36]", 5.94, 0.45, 3500.0, 1575.0, 0.37, 0.349),
    SoaRow("LN-TE [31]", 6.28, 0.255, 3700.0, 944.0, None, None),
    SoaRow("LN-TE [32]", 6.82, 0.29, 4178.0, 1212.0, 0.027, 0.0338),
    SoaRow("LN-TE [this work]", 10.14, 0.30, 4000.0, 1200.0, 0.72, 0.62),
)


def soa_table() -> tuple[SoaRow, ...]:
    """Published piezoelectric power-converter resonators, best entry last."""
    return _SOA_ROWS


def reference_model(c0_f: float = 100e-12) -> bvd.BvdModel:
    """Single-branch twin of the table's best entry (fs, region, Q rows)."""
    row = _SOA_ROWS[-1]
    fs = row.fs_mhz * 1e6
    fp = fs + row.supp_region_mhz * 1e6 / row.fractional_supp
    return bvd.from_resonance_specs(fs, fp, row.q, c0_f, label=row.label)


@dataclass(frozen=True)
class ComparisonRow:
    """SoA row or user score, with its rank in the combined table."""

    rank: int
    label: str
    fs_mhz: float
    k_r_sq: float
    q: float | None
    fom: float | None
    supp_region_mhz: float | None
    fractional_supp: float | None
    is_user: bool


def compare(user: ResonatorScore, label: str = "user device") -> tuple[ComparisonRow, ...]:
    """Rank the user score against the built-in table.

    Primary key: fractional suppressed region (descending, absent values
    last); tie break: FoM (descending).
    """
    entries = [(r.label, r.fs_mhz, r.k_r_sq, r.q, r.fom, r.supp_region_mhz,
                r.fractional_supp, False) for r in _SOA_ROWS]
    entries.append((label, user.fs_hz / 1e6, user.k_r_sq, user.q_bode_at_fs,
                    user.fom, user.supp_width_hz / 1e6, user.fractional_supp,
                    True))

    def key(t):
        frac, fm = t[6], t[4]
        return (frac is None, -(frac or 0.0), fm is None, -(fm or 0.0))

    ranked = sorted(entries, key=key)
    return tuple(ComparisonRow(i + 1, *t) for i, t in enumerate(ranked))
