"""Periodic steady state of a resonator-based DC-DC converter.

The resonator (single-branch BVD model) is driven through ideal switches
between DC rails.  A switching cycle is an ordered list of stages:

* ``Clamped(v)`` - the resonator terminal is held at ``v`` volts (the rail
  at that level carries the terminal current; ``v = 0`` is the zero stage).
* ``Open()`` - the terminal floats and the motional current slews the static
  capacitance toward the next rail (soft charging).

Zero-voltage switching is enforced as a hard equality: each open stage must
deliver the static-capacitance voltage exactly onto the next stage's clamp
level.  Unknowns are the initial state plus the open-stage durations; the
clamped stages share the remaining period equally.  The resulting square
system is solved by damped Newton iteration on the shooting map with a
finite-difference Jacobian (relative step 1e-7).

Stage propagation is exact: each stage is a linear circuit whose two-state
core (current and loop-capacitor voltage) is advanced by the closed-form
matrix exponential, valid in the oscillatory, critically damped and
overdamped root regimes alike.

Power bookkeeping: a stage clamped at ``v`` exchanges ``v * dQ`` with its
rail, where ``dQ = C_m * dv_cm`` is the exact branch charge.  Output power
is the average current delivered into the output rail times ``v_out``;
losses are conduction in the motional resistance only, so the per-period
energy audit closes identically.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from .bvd import BvdModel, resonance_freqs
from .errors import (BranchCountError, ConfigError, InfeasibleTimingError,
                     InvariantError, PssConvergenceError)

_LEGENDRE_X, _LEGENDRE_W = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class Clamped:
    """Terminal held at a DC rail; volts = 0 denotes the zero stage."""

    volts: float


@dataclass(frozen=True)
class Open:
    """Terminal floating; the motional current charges C0."""


Stage = Clamped | Open


def default_stages(v_in: float, v_out: float) -> tuple[Stage, ...]:
    """Six-stage cycle delivering power from v_in to v_out.

    The ordering (v_in, zero, v_out) places the output stage inside the
    negative lobe of the motional current, so the output rail receives
    charge; the reverse ordering would circulate power backwards.
    """
    return (Clamped(v_in), Open(), Clamped(0.0), Open(), Clamped(v_out), Open())


@dataclass(frozen=True)
class ConverterSpec:
    """Operating point and switching cycle of the converter."""

    v_in: float
    v_out: float
    f_op_hz: float
    stages: tuple[Stage, ...] = ()

    def __post_init__(self):
        if not self.v_in > 0:
            raise InvariantError("v_in must be positive")
        if not 0 < self.v_out < self.v_in:
            raise InvariantError("need 0 < v_out < v_in (step-down orientation)")
        if not self.f_op_hz > 0:
            raise InvariantError("operating frequency must be positive")
        stages = tuple(self.stages) or default_stages(self.v_in, self.v_out)
        object.__setattr__(self, "stages", stages)
        n = len(stages)
        if not any(isinstance(s, Open) for s in stages):
            raise InvariantError("cycle needs at least one open stage")
        if not any(isinstance(s, Clamped) for s in stages):
            raise InvariantError("cycle needs at least one clamped stage")
        levels = {0.0, self.v_in, self.v_out}
        for i, s in enumerate(stages):
            nxt = stages[(i + 1) % n]
            if isinstance(s, Open) and not isinstance(nxt, Clamped):
                raise ConfigError(
                    "every open stage must be followed by a clamped stage")
            if isinstance(s, Clamped) and not any(
                    math.isclose(s.volts, v, abs_tol=1e-12) for v in levels):
                raise ConfigError(
                    f"clamp level {s.volts!r} is not one of v_in, v_out, 0")


@dataclass(frozen=True)
class ResonatorState:
    """Motional current, motional capacitor voltage, static cap voltage."""

    i_l_a: float
    v_cm_v: float
    v_c0_v: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.i_l_a, self.v_cm_v, self.v_c0_v))):
            raise InvariantError("state must be finite")


def _single_branch(model: BvdModel):
    if len(model.branches) != 1:
        raise BranchCountError(
            f"the stage propagator needs exactly one branch, "
            f"model has {len(model.branches)}")
    b = model.branches[0]
    return b.r_ohm, b.l_h, b.c_f, model.c0_f


def _lti2_step(i0, u0, r, l, c, t):
    """Advance the damped series loop L di/dt = -R i - u, du/dt = i/C.

    Closed form from the characteristic roots, uniform over the oscillatory
    and overdamped regimes via a complex discriminant; valid for negative t
    (backward evolution) as well.
    """
    alpha = r / (2.0 * l)
    w0_sq = 1.0 / (l * c)
    delta = np.sqrt(complex(alpha * alpha - w0_sq))
    x = delta * t
    ch = np.cosh(x)
    # sinh(x)/delta, series-safe for |x| -> 0
    if abs(x) < 1e-6:
        shd = t * (1.0 + x * x / 6.0 + x ** 4 / 120.0)
    else:
        shd = np.sinh(x) / delta
    damp = math.exp(-alpha * t)
    i1 = damp * (ch * i0 + shd * (-alpha * i0 - u0 / l))
    u1 = damp * (ch * u0 + shd * (i0 / c + alpha * u0))
    return float(i1.real), float(u1.real)


def _lti2_current(i0, u0, r, l, c, ts):
    """Vectorized current profile of the same loop at times ts >= 0."""
    alpha = r / (2.0 * l)
    w0_sq = 1.0 / (l * c)
    delta = np.sqrt(complex(alpha * alpha - w0_sq))
    x = delta * np.asarray(ts, dtype=float)
    ch = np.cosh(x)
    small = np.abs(x) < 1e-6
    with np.errstate(invalid="ignore", over="ignore"):
        shd = np.where(small,
                       ts * (1.0 + x * x / 6.0),
                       np.sinh(np.where(small, 1.0, x)) / delta)
    damp = np.exp(-alpha * np.asarray(ts, dtype=float))
    return (damp * (ch * i0 + shd * (-alpha * i0 - u0 / l))).real


def _evolve(state: ResonatorState, stage: Stage, model: BvdModel,
            dt: float) -> ResonatorState:
    """Stage propagation without the dt >= 0 gate (Newton may probe dt < 0)."""
    r, l, cm, c0 = _single_branch(model)
    if dt == 0:
        if isinstance(stage, Clamped):
            return replace(state, v_c0_v=stage.volts)
        return state
    if isinstance(stage, Clamped):
        i1, u1 = _lti2_step(state.i_l_a, state.v_cm_v - stage.volts,
                            r, l, cm, dt)
        return ResonatorState(i1, u1 + stage.volts, stage.volts)
    cs = cm * c0 / (cm + c0)
    u0 = state.v_cm_v - state.v_c0_v
    qtot = cm * state.v_cm_v + c0 * state.v_c0_v
    i1, u1 = _lti2_step(state.i_l_a, u0, r, l, cs, dt)
    v_cm = (qtot + c0 * u1) / (cm + c0)
    v_c0 = (qtot - cm * u1) / (cm + c0)
    return ResonatorState(i1, v_cm, v_c0)


def stage_evolve(state: ResonatorState, stage: Stage, model: BvdModel,
                 dt: float) -> ResonatorState:
    """Propagate the resonator state through one stage for dt seconds.

    Clamped(V): the series loop rings against the clamp level with the static
    capacitance pinned at V (its entry jump is absorbed by the ideal source).
    Open: the loop closes through the series combination of C_m and C0.  The
    closed form handles oscillatory and overdamped stage systems alike.
    """
    if dt < 0:
        raise InvariantError("dt must be non-negative")
    return _evolve(state, stage, model, dt)


def _stage_current(state: ResonatorState, stage: Stage, model: BvdModel,
                   ts: np.ndarray) -> np.ndarray:
    """Branch current at offsets ts into the stage (exact profile)."""
    r, l, cm, c0 = _single_branch(model)
    if isinstance(stage, Clamped):
        return _lti2_current(state.i_l_a, state.v_cm_v - stage.volts,
                             r, l, cm, ts)
    cs = cm * c0 / (cm + c0)
    return _lti2_current(state.i_l_a, state.v_cm_v - state.v_c0_v,
                         r, l, cs, ts)


@dataclass(frozen=True)
class PssSolution:
    """Converged periodic steady state of one operating point."""

    f_op_hz: float
    stage_durations_s: tuple[float, ...]
    boundary_states: tuple[ResonatorState, ...]  # len = n_stages + 1
    p_in_w: float
    p_out_w: float
    p_loss_w: float
    efficiency: float
    periodicity_residual: float
    zvs_residuals_v: tuple[float, ...]

    def __post_init__(self):
        t = 1.0 / self.f_op_hz
        if any(d <= 0 for d in self.stage_durations_s):
            raise InvariantError("stage durations must be positive")
        if abs(sum(self.stage_durations_s) - t) > 1e-12 * t:
            raise InvariantError("stage durations must sum to one period")
        if not 0.0 <= self.efficiency <= 1.0:
            raise InvariantError("efficiency must lie in [0, 1]")


def _pack_structure(spec: ConverterSpec):
    stages = spec.stages
    n = len(stages)
    open_idx = [i for i, s in enumerate(stages) if isinstance(s, Open)]
    clamp_idx = [i for i, s in enumerate(stages) if isinstance(s, Clamped)]
    next_clamp_v = {}
    for i in open_idx:
        next_clamp_v[i] = stages[(i + 1) % n].volts
    first_open = isinstance(stages[0], Open)
    return stages, open_idx, clamp_idx, next_clamp_v, first_open


def _simulate_cycle(z, spec, model, scales):
    """Residual vector of the shooting map plus boundary states."""
    stages, open_idx, clamp_idx, next_clamp_v, first_open = _pack_structure(spec)
    t_period = 1.0 / spec.f_op_hz
    i_scale, v_scale = scales

    n_state = 3 if first_open else 2
    i0, vcm0 = z[0], z[1]
    vc00 = z[2] if first_open else stages[0].volts
    t_open = z[n_state:]
    t_clamped = (t_period - float(np.sum(t_open))) / len(clamp_idx)

    state = ResonatorState(i0, vcm0, vc00)
    boundary = [state]
    zvs = []
    durations = []
    for i, stage in enumerate(stages):
        dt = t_open[open_idx.index(i)] if isinstance(stage, Open) else t_clamped
        durations.append(dt)
        state = _evolve(state, stage, model, dt)
        boundary.append(state)
        if isinstance(stage, Open):
            zvs.append(state.v_c0_v - next_clamp_v[i])

    res = [(state.i_l_a - i0) / i_scale, (state.v_cm_v - vcm0) / v_scale]
    if first_open:
        res.append((state.v_c0_v - vc00) / v_scale)
    res.extend(v / v_scale for v in zvs)
    return np.array(res), boundary, durations, zvs


def _initial_guess(spec, model, t_open_frac):
    """Cold start: equal open durations, initial state from the linear
    periodicity solve at those fixed durations."""
    stages, open_idx, clamp_idx, next_clamp_v, first_open = _pack_structure(spec)
    t_period = 1.0 / spec.f_op_hz
    n_open = len(open_idx)
    t_open = np.full(n_open, t_open_frac * t_period)

    n_state = 3 if first_open else 2
    z0 = np.zeros(n_state + n_open)
    z0[n_state:] = t_open

    # periodicity is affine in the initial state: solve it exactly
    def end_state(x):
        z = z0.copy()
        z[:n_state] = x
        _, boundary, _, _ = _simulate_cycle(z, spec, model, (1.0, 1.0))
        s = boundary[-1]
        return np.array([s.i_l_a, s.v_cm_v, s.v_c0_v][:n_state])

    base = end_state(np.zeros(n_state))
    m = np.empty((n_state, n_state))
    for j in range(n_state):
        e = np.zeros(n_state)
        e[j] = 1.0
        m[:, j] = end_state(e) - base
    try:
        x0 = np.linalg.solve(np.eye(n_state) - m, base)
    except np.linalg.LinAlgError:
        x0 = np.zeros(n_state)
    z0[:n_state] = x0
    return z0


def solve_pss(spec: ConverterSpec, model: BvdModel, *,
              max_iterations: int = 100, tol: float = 1e-9,
              warm: np.ndarray | None = None) -> PssSolution:
    """Find the ZVS periodic steady state by damped Newton shooting.

    Unknowns: initial state plus one duration per open stage; residuals:
    periodicity of the state over one period plus, per open stage, the
    static-capacitance voltage arriving exactly on the next clamp level.
    Residual components are scaled by v_in (volts) and v_in * w_s * C0
    (amperes); convergence requires the scaled 2-norm below ``tol``.

    Raises:
        ConfigError: operating frequency outside the inductive band (fs, fp).
        InfeasibleTimingError: the converged cycle needs a negative duration.
        PssConvergenceError: Newton did not reach ``tol``.
    """
    fs, fp = resonance_freqs(model)
    if not fs < spec.f_op_hz < fp:
        raise ConfigError(
            f"f_op = {spec.f_op_hz:g} Hz outside the inductive band "
            f"({fs:g}, {fp:g}) Hz")
    w_s = 2.0 * math.pi * fs
    scales = (spec.v_in * w_s * model.c0_f, spec.v_in)

    stages, open_idx, clamp_idx, _, first_open = _pack_structure(spec)
    n_state = 3 if first_open else 2
    t_period = 1.0 / spec.f_op_hz

    candidates = []
    if warm is not None and len(warm) == n_state + len(open_idx):
        candidates.append(np.asarray(warm, dtype=float).copy())
    candidates.extend(_initial_guess(spec, model, frac)
                      for frac in (0.02, 0.005, 0.05))

    best_z, best_norm = None, math.inf
    for z0 in candidates:
        z0, norm, _ = _newton(z0, spec, model, scales, max_iterations, tol)
        if norm < best_norm:
            best_z, best_norm = z0, norm
        if norm < tol:
            break
    if best_norm >= tol:
        raise PssConvergenceError(
            f"no convergence after {max_iterations} iterations "
            f"(best residual {best_norm:.3e})")
    z = best_z

    res, boundary, durations, zvs = _simulate_cycle(z, spec, model, scales)
    if any(d <= 0 for d in durations):
        raise InfeasibleTimingError(
            "operating point requires a negative stage duration "
            f"(durations {['%.3e' % d for d in durations]})")

    # energy bookkeeping over one period
    r, l, cm, c0 = _single_branch(model)
    e_in = e_out = e_loss = 0.0
    for k, stage in enumerate(stages):
        s0, s1 = boundary[k], boundary[k + 1]
        if isinstance(stage, Clamped):
            dq = cm * (s1.v_cm_v - s0.v_cm_v)  # exact branch charge
            if math.isclose(stage.volts, spec.v_in, abs_tol=1e-12):
                e_in += spec.v_in * dq
            elif math.isclose(stage.volts, spec.v_out, abs_tol=1e-12):
                e_out -= spec.v_out * dq
        dt = durations[k]
        ts = 0.5 * dt * (_LEGENDRE_X + 1.0)
        cur = _stage_current(s0, stage, model, ts)
        e_loss += r * 0.5 * dt * float(np.dot(_LEGENDRE_W, cur ** 2))

    p_in = e_in / t_period
    p_out = e_out / t_period
    p_loss = e_loss / t_period
    if p_out < 0:
        raise ConfigError(
            "the configured stage cycle circulates power backwards "
            f"(p_out = {p_out:.3g} W); reorder the clamp levels so the "
            "output stage sits in the returning half of the current cycle")
    eff = 1.0 if p_loss == 0.0 else p_out / (p_out + p_loss)

    periodicity = float(np.linalg.norm(res[:n_state]))
    return PssSolution(
        f_op_hz=spec.f_op_hz,
        stage_durations_s=tuple(durations),
        boundary_states=tuple(boundary),
        p_in_w=p_in, p_out_w=p_out, p_loss_w=p_loss, efficiency=eff,
        periodicity_residual=periodicity,
        zvs_residuals_v=tuple(zvs),
    )


def _newton(z, spec, model, scales, max_iterations, tol):
    """Damped Newton with finite-difference Jacobian (relative step 1e-7)."""
    t_period = 1.0 / spec.f_op_hz
    i_scale, v_scale = scales
    n = len(z)
    n_state = 3 if _is_open_first(spec) else 2
    typ = np.empty(n)
    typ[:n_state] = [i_scale, v_scale, v_scale][:n_state]
    typ[n_state:] = t_period / 1000.0

    res, *_ = _simulate_cycle(z, spec, model, scales)
    norm = float(np.linalg.norm(res))
    it = 0
    while norm >= tol and it < max_iterations:
        jac = np.empty((len(res), n))
        for j in range(n):
            step = 1e-7 * max(abs(z[j]), typ[j])
            zp = z.copy()
            zp[j] += step
            rp, *_ = _simulate_cycle(zp, spec, model, scales)
            jac[:, j] = (rp - res) / step
        try:
            dz = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(jac, -res, rcond=None)[0]
        s = 1.0
        while s > 1e-4:
            z_try = z + s * dz
            r_try, *_ = _simulate_cycle(z_try, spec, model, scales)
            n_try = float(np.linalg.norm(r_try))
            if n_try < norm:
                z, res, norm = z_try, r_try, n_try
                break
            s *= 0.5
        else:
            break  # line search stalled
        it += 1
    return z, norm, it


def _is_open_first(spec) -> bool:
    return isinstance(spec.stages[0], Open)


def shooting_residual(z: np.ndarray, spec: ConverterSpec,
                      model: BvdModel) -> np.ndarray:
    """Scaled residual of the shooting map at unknown vector z (for
    diagnostics such as Jacobian checks)."""
    fs, _ = resonance_freqs(model)
    scales = (spec.v_in * 2.0 * math.pi * fs * model.c0_f, spec.v_in)
    res, *_ = _simulate_cycle(np.asarray(z, dtype=float), spec, model, scales)
    return res


def solution_vector(sol: PssSolution, spec: ConverterSpec) -> np.ndarray:
    """Pack a solution back into the unknown vector of the shooting map."""
    s0 = sol.boundary_states[0]
    first_open = _is_open_first(spec)
    state = [s0.i_l_a, s0.v_cm_v] + ([s0.v_c0_v] if first_open else [])
    t_open = [d for d, st in zip(sol.stage_durations_s, spec.stages)
              if isinstance(st, Open)]
    return np.array(state + t_open)


def simulate_waveform(sol: PssSolution, spec: ConverterSpec, model: BvdModel,
                      points_per_period: int = 256):
    """Sample the converged cycle: t, i_L, v_cm, v_c0, stage index arrays.

    Every stage gets at least two samples so the soft-charging ramps of the
    brief open stages are visible.
    """
    if points_per_period < 200:
        raise InvariantError("waveform sampling needs >= 200 points/period")
    t_period = 1.0 / sol.f_op_hz
    ts, cur, vcm, vc0, idx = [], [], [], [], []
    t0 = 0.0
    r, l, cm, c0 = _single_branch(model)
    for k, stage in enumerate(spec.stages):
        dt = sol.stage_durations_s[k]
        n = max(2, int(round(points_per_period * dt / t_period)))
        local = np.linspace(0.0, dt, n, endpoint=False)
        s0 = sol.boundary_states[k]
        cur.append(_stage_current(s0, stage, model, local))
        states = [stage_evolve(s0, stage, model, float(t)) for t in local]
        vcm.append(np.array([s.v_cm_v for s in states]))
        vc0.append(np.array([s.v_c0_v for s in states]))
        ts.append(t0 + local)
        idx.append(np.full(n, k, dtype=int))
        t0 += dt
    return (np.concatenate(ts), np.concatenate(cur), np.concatenate(vcm),
            np.concatenate(vc0), np.concatenate(idx))


@dataclass(frozen=True)
class PowerPoint:
    """One operating point of a frequency sweep."""

    f_op_hz: float
    p_out_w: float | None
    efficiency: float | None
    converged: bool
    detail: str = ""


def power_sweep(spec: ConverterSpec, model: BvdModel, f_grid_hz,
                warm_start: bool = True, **solver_kw) -> tuple[PowerPoint, ...]:
    """Solve the PSS at each grid frequency; failures are flagged, not fatal.

    With ``warm_start`` each point starts from the previous solution (with
    durations rescaled to the new period); without it every point is solved
    cold, which makes the points independent of each other.
    """
    n_state = 3 if _is_open_first(spec) else 2
    points = []
    warm, warm_f = None, None
    for f in np.asarray(f_grid_hz, dtype=float):
        point_spec = replace(spec, f_op_hz=float(f))
        guess = None
        if warm is not None:
            guess = warm.copy()
            guess[n_state:] *= warm_f / f  # durations scale with the period
        try:
            sol = solve_pss(point_spec, model, warm=guess, **solver_kw)
            points.append(PowerPoint(float(f), sol.p_out_w, sol.efficiency, True))
            if warm_start:
                warm, warm_f = solution_vector(sol, point_spec), float(f)
        except (PssConvergenceError, InfeasibleTimingError, ConfigError) as e:
            points.append(PowerPoint(float(f), None, None, False, str(e)))
            warm, warm_f = None, None
    return tuple(points)


@dataclass(frozen=True)
class SpurImpact:
    """Operating-range comparison of a clean model against a spurred one."""

    f_grid_hz: tuple[float, ...]
    clean: tuple[PowerPoint, ...]
    spurred: tuple[PowerPoint, ...]
    lost_freqs_hz: tuple[float, ...]


def spur_impact(spec: ConverterSpec, clean_model: BvdModel,
                spurred_model: BvdModel, f_grid_hz,
                deviation: float = 0.10, **solver_kw) -> SpurImpact:
    """Report the operating range lost to spurious branches.

    The PSS solver handles one branch at a time, so the spurred model is
    assessed by model swap: at each grid point the branch whose series
    resonance lies nearest the operating frequency is the one simulated.
    A grid point is lost when the clean model converges there but the
    spurred model either fails or deviates more than ``deviation`` in
    output power.
    """
    if not clean_model.branches:
        raise BranchCountError("clean model needs a motional branch")
    base = clean_model.branches[0]
    if not any(abs(b.fs_hz - base.fs_hz) / base.fs_hz < 1e-9
               for b in spurred_model.branches):
        raise InvariantError("spurred model must share the clean base branch")

    f_grid = np.asarray(f_grid_hz, dtype=float)
    clean_pts = power_sweep(spec, clean_model, f_grid, **solver_kw)

    spurred_pts = []
    warm = None
    last_pick = None
    for f in f_grid:
        pick = min(spurred_model.branches, key=lambda b: abs(b.fs_hz - f))
        swap = BvdModel(spurred_model.c0_f, (pick,), spurred_model.label)
        if last_pick is not None and pick != last_pick:
            warm = None
        point_spec = replace(spec, f_op_hz=float(f))
        try:
            sol = solve_pss(point_spec, swap, warm=warm, **solver_kw)
            spurred_pts.append(
                PowerPoint(float(f), sol.p_out_w, sol.efficiency, True))
            warm = solution_vector(sol, point_spec)
        except (PssConvergenceError, InfeasibleTimingError, ConfigError) as e:
            spurred_pts.append(PowerPoint(float(f), None, None, False, str(e)))
            warm = None
        last_pick = pick

    lost = []
    for f, cp, sp in zip(f_grid, clean_pts, spurred_pts):
        if not cp.converged:
            continue
        if not sp.converged:
            lost.append(float(f))
        elif abs(sp.p_out_w - cp.p_out_w) > deviation * abs(cp.p_out_w):
            lost.append(float(f))
    return SpurImpact(tuple(map(float, f_grid)), clean_pts,
                      tuple(spurred_pts), tuple(lost))
