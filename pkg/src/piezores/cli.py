"""Command-line entry point.

Subcommands: ``cut-scan``, ``mason``, ``fit``, ``score``, ``converter``,
``compare``.  Every subcommand is deterministic given its arguments and
writes plot-ready CSV/JSON files into ``--out``.

Exit codes: 0 success, 1 input error, 2 numerical non-convergence,
3 internal invariant violation.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import __version__, bvd, converter, io, mason, materials, metrics
from .errors import (FitConvergenceError, InfeasibleTimingError,
                     InvariantError, PiezoresError, PssConvergenceError)

_NONCONVERGENCE = (FitConvergenceError, PssConvergenceError,
                   InfeasibleTimingError)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise InvariantError("config file must hold a JSON object")
    return doc


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _material(args, cfg) -> materials.MaterialConstantSet:
    path = getattr(args, "material", None) or cfg.get("material")
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            return io.material_from_json(fh.read())
    return materials.lithium_niobate()


def cmd_cut_scan(args) -> int:
    cfg = _load_config(args.config)
    base = _material(args, cfg)
    scan = materials.coupling_scan(base, args.theta_min, args.theta_max,
                                   args.step, stiffened=args.stiffened)
    path = _out_path(args, "cut_scan.csv")
    io.write_text(io.scan_to_csv(scan), path)
    theta_star = materials.ts_zero_crossing(base)
    m36 = materials.rotate_constants(base, 36.0)
    k33_36 = materials.coupling_te(m36, stiffened=args.stiffened)
    print(f"wrote {path} ({len(scan)} rows)")
    print(f"shear-coupling zero crossing: theta* = {theta_star:.3f} deg")
    print(f"k33^2 at 36 deg = {k33_36:.4f}")
    return 0


def cmd_mason(args) -> int:
    cfg = _load_config(args.config)
    stack = mason.default_reference_stack(
        electrode_radius_m=cfg.get("electrode_radius_m", args.electrode_radius),
        al_thickness_m=cfg.get("al_thickness_m", args.al_thickness),
        piezo_thickness_m=cfg.get("piezo_thickness_m", args.piezo_thickness),
        piezo_q=cfg.get("piezo_q", args.piezo_q))
    freq = np.linspace(args.fmin, args.fmax, args.points)
    sweep = mason.input_impedance(stack, freq)
    path = _out_path(args, "mason_sweep.csv")
    io.write_text(io.sweep_to_csv(sweep), path)
    fs, fp = mason.find_resonances(sweep)
    print(f"wrote {path} ({len(sweep)} points)")
    print(f"fs = {fs / 1e6:.4f} MHz, fp = {fp / 1e6:.4f} MHz, "
          f"C0 = {stack.c0_f * 1e12:.2f} pF")
    return 0


def cmd_fit(args) -> int:
    _load_config(args.config)
    sf = io.load_sweep(args.sweep)
    result = bvd.fit(sf.sweep, max_branches=args.max_branches)
    model_path = _out_path(args, "fitted_model.json")
    io.write_text(io.bvd_model_to_json(result.model), model_path)
    report_path = _out_path(args, "fit_report.json")
    io.write_report(result, report_path)
    print(f"wrote {model_path} and {report_path}")
    print(f"C0 = {result.model.c0_f * 1e12:.4f} pF, "
          f"{len(result.model.branches)} branches, "
          f"residual rms = {result.residual_rms:.3e}")
    return 0


def cmd_score(args) -> int:
    cfg = _load_config(args.config)
    threshold = cfg.get("threshold", args.threshold)
    convention = cfg.get("k2_convention", args.k2_convention)
    sf = io.load_sweep(args.sweep)
    sc = metrics.score(sf.sweep, threshold=threshold, k2_convention=convention)
    report_path = _out_path(args, "score_report.json")
    io.write_report(sc, report_path)

    freq, q = metrics.bode_q(sf.sweep)
    in_band = ((freq >= sc.supp_lo_hz) & (freq <= sc.supp_hi_hz)).astype(int)
    lines = ["freq_hz,abs_z_ohm,re_z_ohm,bode_q,in_suppressed_band"]
    for f, z, qq, m in zip(sf.sweep.freq_hz, sf.sweep.z_ohm, q, in_band):
        lines.append(f"{float(f)!r},{abs(z)!r},{float(z.real)!r},"
                     f"{float(qq)!r},{int(m)}")
    plot_path = _out_path(args, "score_plotdata.csv")
    io.write_text("\n".join(lines) + "\n", plot_path)

    print(f"wrote {report_path} and {plot_path}")
    print(f"fs = {sc.fs_hz / 1e6:.4f} MHz, fp = {sc.fp_hz / 1e6:.4f} MHz")
    print(f"k_r^2 = {sc.k_r_sq:.4f}, Q(fs) = {sc.q_bode_at_fs:.1f}, "
          f"FoM = {sc.fom:.1f}")
    print(f"suppressed region = {sc.supp_width_hz / 1e6:.4f} MHz "
          f"({sc.fractional_supp:.1%} of fp - fs, threshold {threshold:g}x)")
    return 0


def _converter_model(args) -> bvd.BvdModel:
    if args.model:
        with open(args.model, "r", encoding="utf-8") as fh:
            return io.bvd_model_from_json(fh.read())
    return metrics.reference_model()


def _stages_from_config(doc) -> tuple:
    """Stage list from config JSON: "open" or {"clamped": volts} entries."""
    stages = []
    for i, entry in enumerate(doc):
        if entry == "open":
            stages.append(converter.Open())
        elif isinstance(entry, dict) and "clamped" in entry:
            stages.append(converter.Clamped(float(entry["clamped"])))
        else:
            raise InvariantError(
                f"stage {i}: expected \"open\" or {{\"clamped\": volts}}, "
                f"got {entry!r}")
    return tuple(stages)


def cmd_converter(args) -> int:
    cfg = _load_config(args.config)
    model = _converter_model(args)
    fs, fp = bvd.resonance_freqs(model)
    v_in = cfg.get("v_in", args.vin)
    v_out = cfg.get("v_out", args.vout)
    stages = _stages_from_config(cfg["stages"]) if "stages" in cfg else ()
    solver_kw = {}
    if "tol" in cfg:
        solver_kw["tol"] = float(cfg["tol"])
    if "max_iterations" in cfg:
        solver_kw["max_iterations"] = int(cfg["max_iterations"])

    grid = None
    if "f_grid_hz" in cfg:
        grid = np.asarray(cfg["f_grid_hz"], dtype=float)
    elif args.f_grid:
        lo, hi, n = args.f_grid.split(":")
        grid = np.linspace(float(lo), float(hi), int(n))

    if grid is not None:
        spec = converter.ConverterSpec(v_in, v_out, float(grid[0]), stages)
        points = converter.power_sweep(spec, model, grid, **solver_kw)
        lines = ["f_op_hz,p_out_w,efficiency,converged"]
        for p in points:
            lines.append(
                f"{p.f_op_hz!r},"
                f"{'' if p.p_out_w is None else repr(p.p_out_w)},"
                f"{'' if p.efficiency is None else repr(p.efficiency)},"
                f"{1 if p.converged else 0}")
        path = _out_path(args, "power_sweep.csv")
        io.write_text("\n".join(lines) + "\n", path)
        n_ok = sum(p.converged for p in points)
        print(f"wrote {path} ({n_ok}/{len(points)} points converged)")
        return 0

    f_op = cfg.get("f_op_hz", args.f_op) or fs + 0.15 * (fp - fs)
    spec = converter.ConverterSpec(v_in, v_out, f_op, stages)
    sol = converter.solve_pss(spec, model, **solver_kw)
    report_path = _out_path(args, "pss_report.json")
    io.write_report(sol, report_path)
    wave = converter.simulate_waveform(sol, spec, model,
                                       points_per_period=args.points_per_period)
    wave_path = _out_path(args, "waveform.csv")
    io.write_text(io.waveform_to_csv(*wave), wave_path)
    print(f"wrote {report_path} and {wave_path}")
    print(f"f_op = {f_op / 1e6:.4f} MHz, p_out = {sol.p_out_w:.3f} W, "
          f"efficiency = {sol.efficiency:.4%}")
    return 0


def cmd_compare(args) -> int:
    _load_config(args.config)
    if args.score_report:
        with open(args.score_report, "r", encoding="utf-8") as fh:
            doc = io.parse_report(fh.read())
        settings = doc.get("settings", {})
        sc = metrics.ResonatorScore(
            **{k: doc[k] for k in (
                "fs_hz", "fp_hz", "k_r_sq", "q_bode_at_fs", "q_band_lo_hz",
                "q_band_hi_hz", "q_bode_band_median", "fom", "supp_lo_hz",
                "supp_hi_hz", "supp_width_hz", "fractional_supp")},
            threshold=settings.get("threshold", 20.0),
            k2_convention=settings.get("k2_convention", "pi2_8"))
    else:
        sf = io.load_sweep(args.sweep)
        sc = metrics.score(sf.sweep)
    rows = metrics.compare(sc, label=args.label)
    path = _out_path(args, "comparison.csv")
    io.write_text(io.comparison_to_csv(rows), path)
    print(f"wrote {path}")
    for r in rows:
        marker = " <-- user" if r.is_user else ""
        frac = "n/a" if r.fractional_supp is None else f"{r.fractional_supp:.1%}"
        print(f"  #{r.rank} {r.label}: fractional region {frac}{marker}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="piezores",
        description="Thickness-mode resonator analysis and converter simulation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--config", default=None, help="JSON config overrides")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for any randomized option (none by default)")

    p = sub.add_parser("cut-scan", help="coupling vs. cut angle table")
    common(p)
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=180.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--stiffened", action="store_true",
                   help="use e^2/(c eps + e^2) instead of e^2/(c eps)")
    p.add_argument("--material", default=None, help="material JSON file")
    p.set_defaults(func=cmd_cut_scan)

    p = sub.add_parser("mason", help="1-D plate impedance sweep")
    common(p)
    p.add_argument("--electrode-radius", type=float, default=5e-3)
    p.add_argument("--al-thickness", type=float, default=300e-9)
    p.add_argument("--piezo-thickness", type=float, default=0.3e-3)
    p.add_argument("--piezo-q", type=float, default=4000.0)
    p.add_argument("--fmin", type=float, default=8e6)
    p.add_argument("--fmax", type=float, default=14e6)
    p.add_argument("--points", type=int, default=6001)
    p.set_defaults(func=cmd_mason)

    p = sub.add_parser("fit", help="extract a BVD model from a sweep file")
    common(p)
    p.add_argument("sweep", help="sweep file (.s1p or .csv)")
    p.add_argument("--max-branches", type=int, default=5)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="figures of merit of a sweep file")
    common(p)
    p.add_argument("sweep", help="sweep file (.s1p or .csv)")
    p.add_argument("--threshold", type=float, default=20.0)
    p.add_argument("--k2-convention", default="pi2_8",
                   choices=metrics.K2_CONVENTIONS)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("converter", help="periodic steady state / power sweep")
    common(p)
    p.add_argument("--vin", type=float, default=40.0)
    p.add_argument("--vout", type=float, default=30.0)
    p.add_argument("--f-op", type=float, default=None)
    p.add_argument("--f-grid", default=None, metavar="LO:HI:N")
    p.add_argument("--model", default=None, help="BVD model JSON file")
    p.add_argument("--points-per-period", type=int, default=256)
    p.set_defaults(func=cmd_converter)

    p = sub.add_parser("compare", help="rank a device against the SoA table")
    common(p)
    p.add_argument("sweep", nargs="?", default=None,
                   help="sweep file (.s1p or .csv)")
    p.add_argument("--score-report", default=None,
                   help="existing score report JSON")
    p.add_argument("--label", default="user device")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare" and not args.sweep and not args.score_report:
        print("compare needs a sweep file or --score-report", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _NONCONVERGENCE as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (PiezoresError, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # pragma: no cover - internal defect guard
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
