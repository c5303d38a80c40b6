"""Butterworth-Van Dyke circuit models: synthesis, extraction, spur injection.

A resonator is a static capacitance C0 in parallel with one series R-L-C
"motional" branch per mechanical mode.  This module synthesizes impedance
sweeps from models, extracts models from measured or synthetic sweeps and
injects artificial spurious branches for what-if studies.

Synthesis is pure and thread-safe; :func:`fit` is single-threaded per call
but independent fits may run concurrently.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .errors import (BranchCountError, DuplicateSpurError, FitConvergenceError,
                     InvariantError, NoResonanceError, ResonanceNotFoundError)
from .sweep import ImpedanceSweep, find_resonances


@dataclass(frozen=True)
class BvdBranch:
    """One series motional branch: resistance, inductance, capacitance.

    Zero resistance is allowed as the lossless limit used by the converter
    analysis; L and C must be strictly positive.
    """

    r_ohm: float
    l_h: float
    c_f: float

    def __post_init__(self):
        if not (self.r_ohm >= 0 and self.l_h > 0 and self.c_f > 0):
            raise InvariantError(
                "branch L and C must be positive, R non-negative")

    @property
    def fs_hz(self) -> float:
        """Series-resonance frequency of the branch alone."""
        return 1.0 / (2.0 * math.pi * math.sqrt(self.l_h * self.c_f))

    @property
    def q(self) -> float:
        """Unloaded quality factor w_s L / R."""
        if self.r_ohm == 0:
            return math.inf
        return 2.0 * math.pi * self.fs_hz * self.l_h / self.r_ohm


@dataclass(frozen=True)
class BvdModel:
    """Static capacitance plus any number of motional branches."""

    c0_f: float
    branches: tuple[BvdBranch, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.c0_f > 0:
            raise InvariantError("C0 must be positive")
        fs = sorted(b.fs_hz for b in self.branches)
        for lo, hi in zip(fs, fs[1:]):
            if (hi - lo) / hi <= 1e-6:
                raise InvariantError(
                    "branch series resonances must be pairwise distinct "
                    "(relative separation > 1e-6)")


def impedance(model: BvdModel, freq_hz: np.ndarray,
              ref_ohm: float = 50.0) -> ImpedanceSweep:
    """Z(w) = [i w C0 + sum_k 1/(r_k + i w l_k + 1/(i w c_k))]^-1."""
    f = np.asarray(freq_hz, dtype=float)
    if not np.all(f > 0):
        raise InvariantError("frequencies must be positive")
    w = 2.0 * np.pi * f
    y = 1j * w * model.c0_f
    for b in model.branches:
        y = y + 1.0 / (b.r_ohm + 1j * (w * b.l_h - 1.0 / (w * b.c_f)))
    return ImpedanceSweep(f, 1.0 / y, ref_ohm)


def resonance_freqs(model: BvdModel) -> tuple[float, float]:
    """Closed-form (fs, fp) of a single-branch model.

    fs = 1/(2 pi sqrt(L C)); fp = fs sqrt(1 + C/C0).
    """
    if len(model.branches) != 1:
        raise BranchCountError(
            f"closed forms need exactly one branch, model has {len(model.branches)}")
    b = model.branches[0]
    fs = b.fs_hz
    fp = fs * math.sqrt(1.0 + b.c_f / model.c0_f)
    return fs, fp


def from_resonance_specs(fs_hz: float, fp_hz: float, q: float, c0_f: float,
                         label: str = "") -> BvdModel:
    """Single-branch model hitting given fs, fp and unloaded Q at fixed C0."""
    if not 0 < fs_hz < fp_hz:
        raise InvariantError("need 0 < fs < fp")
    if not (q > 0 and c0_f > 0):
        raise InvariantError("Q and C0 must be positive")
    c_m = c0_f * ((fp_hz / fs_hz) ** 2 - 1.0)
    w_s = 2.0 * math.pi * fs_hz
    l_m = 1.0 / (w_s ** 2 * c_m)
    r_m = w_s * l_m / q
    return BvdModel(c0_f, (BvdBranch(r_m, l_m, c_m),), label)


def inject_spurs(base: BvdModel,
                 spurs: list[tuple[float, float, float]]) -> BvdModel:
    """Append one motional branch per (f_spur_hz, coupling_fraction, q) spur.

    The branch capacitance is chosen so the spur's local parallel resonance
    satisfies (fp_spur/f_spur)^2 - 1 = (8/pi^2) * coupling_fraction, i.e. the
    coupling fraction is the spur's k_r^2 against the model's C0.
    """
    branches = list(base.branches)
    for f_spur, coupling, q in spurs:
        if not (f_spur > 0 and coupling > 0 and q > 0):
            raise InvariantError("spur frequency, coupling and Q must be positive")
        for b in branches:
            if abs(b.fs_hz - f_spur) / f_spur <= 1e-6:
                raise DuplicateSpurError(
                    f"spur at {f_spur:g} Hz collides with an existing branch")
        c_m = base.c0_f * (8.0 / math.pi ** 2) * coupling
        w = 2.0 * math.pi * f_spur
        l_m = 1.0 / (w ** 2 * c_m)
        r_m = w * l_m / q
        branches.append(BvdBranch(r_m, l_m, c_m))
    return BvdModel(base.c0_f, tuple(branches), base.label)


@dataclass(frozen=True)
class FitResult:
    """Extracted model plus diagnostics of the extraction."""

    model: BvdModel
    residual_rms: float
    branch_confidence: tuple[float, ...]  # relative residual growth on removal
    n_function_evals: int


def _log_residual(z_model: np.ndarray, z_data: np.ndarray) -> np.ndarray:
    d = np.log(z_model) - np.log(z_data)
    return np.concatenate([d.real, d.imag])


def _model_z(c0: float, branch_params: np.ndarray, w: np.ndarray) -> np.ndarray:
    y = 1j * w * c0
    for r, l, c in branch_params.reshape(-1, 3):
        y = y + 1.0 / (r + 1j * (w * l - 1.0 / (w * c)))
    return 1.0 / y


def _half_power_width(f: np.ndarray, g: np.ndarray, ipk: int) -> float:
    """FWHM of the conductance peak at index ipk, linearly interpolated."""
    half = g[ipk] / 2.0
    lo = ipk
    while lo > 0 and g[lo] > half:
        lo -= 1
    hi = ipk
    while hi < len(g) - 1 and g[hi] > half:
        hi += 1
    if lo == ipk or hi == ipk:
        return f[min(hi + 1, len(f) - 1)] - f[max(lo - 1, 0)]

    def cross(i, j):
        if g[j] == g[i]:
            return f[j]
        return f[i] + (half - g[i]) * (f[j] - f[i]) / (g[j] - g[i])

    return cross(hi - 1, hi) - cross(lo + 1, lo) if hi - 1 >= lo + 1 else f[hi] - f[lo]


def fit(sweep: ImpedanceSweep, max_branches: int = 5, *,
        peak_threshold: float = 3.0, residual_drop_tol: float = 0.01,
        max_iterations: int = 200, gtol: float = 1e-10) -> FitResult:
    """Extract a BVD model from an impedance sweep.

    Three phases: (1) C0 seeded from the median of Im(Y)/w over the lowest
    frequency decile (branch susceptances removed once branches are seeded;
    a parallel-resonance-implied value and the raw estimate serve as
    fallback starts when the sweep barely extends below resonance);
    (2) one candidate branch per conductance peak above ``peak_threshold``
    times the median conductance, seeded from the peak height, position and
    half-power width; (3) joint nonlinear least squares on log-parameters
    minimizing |log Z_model - log Z_data|^2.  Candidates whose removal
    changes the residual by less than ``residual_drop_tol`` are discarded.

    Raises:
        NoResonanceError: conductance structure present but no usable peak.
        FitConvergenceError: refinement hit the iteration cap before the
            gradient tolerance.
    """
    if len(sweep) < 50:
        raise InvariantError("fit needs at least 50 sweep points")
    f = sweep.freq_hz
    w = 2.0 * np.pi * f
    z = sweep.z_ohm
    y = 1.0 / z

    n_lo = max(len(f) // 10, 3)
    c0_seed = float(np.median(y.imag[:n_lo] / w[:n_lo]))
    if not c0_seed > 0:
        c0_seed = float(np.median(np.abs(y.imag) / w))
    if not c0_seed > 0:
        raise NoResonanceError("sweep shows no capacitive behaviour to seed C0")

    g = y.real
    g_med = float(np.median(g))
    g_floor = max(g_med, 1e-30)
    peaks, _ = find_peaks(g, height=peak_threshold * g_floor)

    if len(peaks) == 0:
        # degenerate fit: accept a bare capacitor if it already explains the
        # data, otherwise report that no resonance could be used
        model = BvdModel(c0_seed, ())
        res = _log_residual(_model_z(c0_seed, np.empty(0), w), z)
        if math.sqrt(float(np.mean(res ** 2))) < 1e-3:
            return FitResult(model, math.sqrt(float(np.mean(res ** 2))), (), 1)
        raise NoResonanceError(
            "no conductance peak above the detection threshold")

    order = np.argsort(g[peaks])[::-1]
    peaks = peaks[order][:max_branches]

    seeds = []
    for ipk in peaks:
        r = 1.0 / g[ipk]
        fs = f[ipk]
        width = max(_half_power_width(f, g, int(ipk)), f[1] - f[0])
        q_b = fs / width
        l = q_b * r / (2.0 * np.pi * fs)
        c = 1.0 / ((2.0 * np.pi * fs) ** 2 * l)
        seeds.append((r, l, c))
    seeds.sort(key=lambda s: 1.0 / math.sqrt(s[1] * s[2]))  # ascending fs

    # C0 seed candidates.  The raw low-decile estimate includes the branch
    # susceptances, so remove the seeded branches; when the sweep barely
    # extends below resonance even that is fragile, so a parallel-resonance
    # implied value and the raw estimate serve as fallback starts.
    y_branches = np.zeros_like(y)
    for r, l, c in seeds:
        y_branches += 1.0 / (r + 1j * (w * l - 1.0 / (w * c)))
    c0_corr = float(np.median(
        (y.imag[:n_lo] - y_branches.imag[:n_lo]) / w[:n_lo]))
    c0_candidates = [c0_corr] if c0_corr > 0 else []
    try:
        fs_g, fp_g = find_resonances(sweep)
        r_n, l_n, c_n = min(seeds,
                            key=lambda s: abs(1.0 / (2.0 * math.pi * math.sqrt(
                                s[1] * s[2])) - fs_g))
        fs_n = 1.0 / (2.0 * math.pi * math.sqrt(l_n * c_n))
        ratio = (fp_g / fs_n) ** 2 - 1.0
        if ratio > 0:
            c0_candidates.append(c_n / ratio)
    except ResonanceNotFoundError:
        pass
    c0_candidates.append(c0_seed)

    def refine(c0_val, branch_seed):
        theta0 = np.log(np.concatenate([[c0_val], np.ravel(branch_seed)]))

        def resid(theta):
            p = np.exp(theta)
            return _log_residual(_model_z(p[0], p[1:], w), z)

        sol = least_squares(resid, theta0, method="lm", gtol=gtol,
                            xtol=1e-14, ftol=1e-14,
                            max_nfev=max_iterations * (len(theta0) + 2))
        return sol

    def rms_of(attempt):
        return math.sqrt(float(np.mean(attempt.fun ** 2)))

    attempts = []
    for c0_try in c0_candidates:
        attempt = refine(c0_try, seeds)
        attempts.append(attempt)
        if attempt.status != 0 and rms_of(attempt) < 1e-2:
            break
    nfev_total = sum(int(a.nfev) for a in attempts)
    converged = [a for a in attempts if a.status != 0]
    sol = min(converged or attempts, key=rms_of)
    if sol.status == 0:
        raise FitConvergenceError(
            f"refinement exceeded {max_iterations} iterations "
            f"(residual {rms_of(sol):.3e})")
    params = np.exp(sol.x)
    res_full = rms_of(sol)

    # prune branches whose removal barely changes the residual
    kept, confidence = [], []
    branch_params = params[1:].reshape(-1, 3)
    for i in range(len(branch_params)):
        others = np.delete(branch_params, i, axis=0)
        res_wo = _log_residual(_model_z(params[0], others.ravel(), w), z)
        res_wo = math.sqrt(float(np.mean(res_wo ** 2)))
        change = (res_wo - res_full) / max(res_full, 1e-300)
        if change >= residual_drop_tol:
            kept.append(i)
            confidence.append(float(change))

    nfev = nfev_total
    if len(kept) < len(branch_params):
        if not kept:
            model = BvdModel(params[0], ())
            return FitResult(model, res_full, (), nfev)
        sol = refine(params[0], branch_params[np.array(kept)])
        if sol.status == 0:
            raise FitConvergenceError(
                f"refinement exceeded {max_iterations} iterations after pruning")
        params = np.exp(sol.x)
        res_full = rms_of(sol)
        nfev += int(sol.nfev)

    branches = tuple(BvdBranch(r, l, c)
                     for r, l, c in params[1:].reshape(-1, 3))
    model = BvdModel(params[0], branches)
    return FitResult(model, res_full, tuple(confidence), nfev)
