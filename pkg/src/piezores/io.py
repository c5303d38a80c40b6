"""File formats: Touchstone one-port and CSV sweeps, JSON models and reports.

Parsers are total: any byte input either parses or raises
:class:`~piezores.errors.ParseError` with row context; nothing else escapes.
Writers produce canonical output so that write -> parse -> write round-trips
are byte-identical.
"""
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .bvd import BvdBranch, BvdModel, FitResult
from .converter import PssSolution
from .errors import InvariantError, ParseError
from .materials import CouplingScan, MaterialConstantSet
from .metrics import ResonatorScore
from .sweep import ImpedanceSweep

SCHEMA_VERSION = "1"

_FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


@dataclass(frozen=True)
class SweepFile:
    """A parsed sweep plus provenance metadata."""

    source: str | None
    format_tag: str  # "touchstone-s1p" | "csv"
    sweep: ImpedanceSweep
    ref_ohm: float
    comments: tuple[str, ...]


def _parse_float(tok: str, row: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"could not parse number {tok!r}", row) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite number {tok!r}", row)
    return v


def parse_touchstone_s1p(text: str, source: str | None = None) -> SweepFile:
    """Parse a Touchstone v1 one-port file into an impedance sweep.

    Option line ``# <freq-unit> <S|Z> <RI|MA|DB> R <ref>`` (case-insensitive;
    omitted fields default to HZ / S / MA / R 50).  S11 is converted to
    Z = ref (1 + S)/(1 - S); Z-parameter files are taken directly as ohms.
    ``!`` starts a comment (whole-line or trailing).

    Raises:
        ParseError: malformed option line, non-numeric or short data rows,
            non-monotonic frequencies, or |S11| >= 1 rows (named by row).
    """
    if not isinstance(text, str):
        raise ParseError("input must be text")
    unit, param, fmt, ref = 1.0, "S", "MA", 50.0
    saw_option = False
    comments: list[str] = []
    freqs: list[float] = []
    zs: list[complex] = []

    for row, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("!"):
            comments.append(line[1:].strip())
            continue
        if "!" in line:
            line, trailing = line.split("!", 1)
            comments.append(trailing.strip())
            line = line.strip()
            if not line:
                continue
        if line.startswith("#"):
            if saw_option:
                raise ParseError("multiple option lines", row)
            saw_option = True
            toks = line[1:].upper().split()
            i = 0
            while i < len(toks):
                t = toks[i]
                if t in _FREQ_UNITS:
                    unit = _FREQ_UNITS[t]
                elif t in ("S", "Z"):
                    param = t
                elif t in ("RI", "MA", "DB"):
                    fmt = t
                elif t == "R":
                    if i + 1 >= len(toks):
                        raise ParseError("option line: R without a value", row)
                    ref = _parse_float(toks[i + 1], row)
                    if ref <= 0:
                        raise ParseError("reference impedance must be positive", row)
                    i += 1
                elif t in ("Y", "G", "H"):
                    raise ParseError(f"unsupported parameter type {t!r}", row)
                else:
                    raise ParseError(f"malformed option line token {t!r}", row)
                i += 1
            continue
        toks = line.split()
        if len(toks) != 3:
            raise ParseError(
                f"one-port data row needs 3 columns, found {len(toks)}", row)
        f = _parse_float(toks[0], row) * unit
        a = _parse_float(toks[1], row)
        b = _parse_float(toks[2], row)
        if f <= 0:
            raise ParseError("frequency must be positive", row)
        if freqs and f <= freqs[-1]:
            raise ParseError("non-monotonic frequency", row)
        if fmt == "RI":
            val = complex(a, b)
        elif fmt == "MA":
            val = a * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))
        else:  # DB
            val = 10.0 ** (a / 20.0) * complex(math.cos(math.radians(b)),
                                               math.sin(math.radians(b)))
        if param == "S":
            if abs(val) >= 1.0:
                raise ParseError(
                    f"|S11| = {abs(val):.6g} >= 1 cannot be converted to an "
                    "impedance", row)
            z = ref * (1.0 + val) / (1.0 - val)
        else:
            z = val
        freqs.append(f)
        zs.append(z)

    if not freqs:
        raise ParseError("file contains no data rows")
    try:
        sweep = ImpedanceSweep(np.array(freqs), np.array(zs), ref)
    except InvariantError as e:
        raise ParseError(str(e)) from None
    return SweepFile(source, "touchstone-s1p", sweep, ref, tuple(comments))


def parse_csv_sweep(text: str, source: str | None = None) -> SweepFile:
    """Parse the toolkit's sweep CSV: header ``freq_hz,re_ohm,im_ohm``.

    Extra columns are ignored; a ``# ref_ohm=<x>`` comment line sets the
    reference impedance (default 50).
    """
    if not isinstance(text, str):
        raise ParseError("input must be text")
    ref = 50.0
    header: list[str] | None = None
    cols: dict[str, int] = {}
    freqs: list[float] = []
    res: list[float] = []
    ims: list[float] = []

    for row, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("ref_ohm="):
                ref = _parse_float(body.split("=", 1)[1].strip(), row)
                if ref <= 0:
                    raise ParseError("ref_ohm must be positive", row)
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            header = [c.lower() for c in cells]
            for need in ("freq_hz", "re_ohm", "im_ohm"):
                if need not in header:
                    raise ParseError(f"missing column {need!r}", row)
                cols[need] = header.index(need)
            continue
        if len(cells) < len(header):
            raise ParseError(
                f"row has {len(cells)} cells, header has {len(header)}", row)
        f = _parse_float(cells[cols["freq_hz"]], row)
        re_v = _parse_float(cells[cols["re_ohm"]], row)
        im_v = _parse_float(cells[cols["im_ohm"]], row)
        if f <= 0:
            raise ParseError("frequency must be positive", row)
        if freqs and f <= freqs[-1]:
            raise ParseError("non-increasing frequency", row)
        freqs.append(f)
        res.append(re_v)
        ims.append(im_v)

    if header is None:
        raise ParseError("missing header row")
    if not freqs:
        raise ParseError("file contains no data rows")
    try:
        sweep = ImpedanceSweep(np.array(freqs),
                               np.array(res) + 1j * np.array(ims), ref)
    except InvariantError as e:
        raise ParseError(str(e)) from None
    return SweepFile(source, "csv", sweep, ref, ())


def load_sweep(path: str) -> SweepFile:
    """Read a sweep file, picking the parser from the extension."""
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        text = fh.read()
    if str(path).lower().endswith((".s1p", ".snp")):
        return parse_touchstone_s1p(text, source=str(path))
    return parse_csv_sweep(text, source=str(path))


def sweep_to_csv(sweep: ImpedanceSweep) -> str:
    lines = [f"# ref_ohm={sweep.ref_ohm!r}", "freq_hz,re_ohm,im_ohm"]
    for f, z in zip(sweep.freq_hz, sweep.z_ohm):
        lines.append(f"{float(f)!r},{float(z.real)!r},{float(z.imag)!r}")
    return "\n".join(lines) + "\n"


def scan_to_csv(scan: CouplingScan) -> str:
    lines = ["theta_deg,k33_sq,k35_sq"]
    for t, a, b in zip(scan.theta_deg, scan.k33_sq, scan.k35_sq):
        lines.append(f"{float(t)!r},{float(a)!r},{float(b)!r}")
    return "\n".join(lines) + "\n"


def comparison_to_csv(rows) -> str:
    lines = ["rank,reference,fs_mhz,k_r_sq,q,fom,supp_region_mhz,"
             "fractional_supp,is_user"]
    for r in rows:
        cells = [str(r.rank), r.label]
        for v in (r.fs_mhz, r.k_r_sq, r.q, r.fom, r.supp_region_mhz,
                  r.fractional_supp):
            cells.append("" if v is None else repr(float(v)))
        cells.append("1" if r.is_user else "0")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def waveform_to_csv(t_s, i_l_a, v_cm_v, v_c0_v, stage_index) -> str:
    lines = ["t_s,i_l_a,v_cm_v,v_c0_v,stage_index"]
    for t, i, vc, v0, k in zip(t_s, i_l_a, v_cm_v, v_c0_v, stage_index):
        lines.append(f"{float(t)!r},{float(i)!r},{float(vc)!r},"
                     f"{float(v0)!r},{int(k)}")
    return "\n".join(lines) + "\n"


def bvd_model_to_json(model: BvdModel) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "bvd_model",
        "c0_f": model.c0_f,
        "branches": [{"r_ohm": b.r_ohm, "l_h": b.l_h, "c_f": b.c_f}
                     for b in model.branches],
        "label": model.label,
    }
    return json.dumps(doc, indent=2) + "\n"


def bvd_model_from_json(text: str) -> BvdModel:
    try:
        doc = json.loads(text)
        branches = tuple(BvdBranch(b["r_ohm"], b["l_h"], b["c_f"])
                         for b in doc.get("branches", []))
        return BvdModel(float(doc["c0_f"]), branches, str(doc.get("label", "")))
    except ParseError:
        raise
    except (InvariantError, ValueError, TypeError, KeyError,
            json.JSONDecodeError) as e:
        raise ParseError(f"invalid circuit-model file: {e}") from None


def material_to_json(m: MaterialConstantSet) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "material_constants",
        "name": m.name,
        "density_kg_m3": m.density,
        "stiffness_pa": [float(v) for v in m.stiffness.ravel()],
        "piezo_c_m2": [float(v) for v in m.piezo.ravel()],
        "permittivity_f_m": [float(v) for v in m.permittivity.ravel()],
    }
    return json.dumps(doc, indent=2) + "\n"


def material_from_json(text: str) -> MaterialConstantSet:
    try:
        doc = json.loads(text)
        c = np.array(doc["stiffness_pa"], dtype=float).reshape(6, 6)
        e = np.array(doc["piezo_c_m2"], dtype=float).reshape(3, 6)
        p = np.array(doc["permittivity_f_m"], dtype=float).reshape(3, 3)
        return MaterialConstantSet(c, e, p, float(doc["density_kg_m3"]),
                                   str(doc.get("name", "")))
    except (InvariantError, ValueError, TypeError, KeyError,
            json.JSONDecodeError) as e:
        raise ParseError(f"invalid material file: {e}") from None


def _report_dict(obj) -> dict:
    if isinstance(obj, ResonatorScore):
        body = {k: getattr(obj, k) for k in (
            "fs_hz", "fp_hz", "k_r_sq", "q_bode_at_fs", "q_band_lo_hz",
            "q_band_hi_hz", "q_bode_band_median", "fom", "supp_lo_hz",
            "supp_hi_hz", "supp_width_hz", "fractional_supp")}
        body["settings"] = {"threshold": obj.threshold,
                            "k2_convention": obj.k2_convention}
        kind = "resonator_score"
    elif isinstance(obj, FitResult):
        body = {
            "c0_f": obj.model.c0_f,
            "branches": [{"r_ohm": b.r_ohm, "l_h": b.l_h, "c_f": b.c_f}
                         for b in obj.model.branches],
            "label": obj.model.label,
            "residual_rms": obj.residual_rms,
            "branch_confidence": list(obj.branch_confidence),
            "n_function_evals": obj.n_function_evals,
        }
        kind = "bvd_fit"
    elif isinstance(obj, PssSolution):
        body = {
            "f_op_hz": obj.f_op_hz,
            "stage_durations_s": list(obj.stage_durations_s),
            "boundary_states": [asdict(s) for s in obj.boundary_states],
            "p_in_w": obj.p_in_w,
            "p_out_w": obj.p_out_w,
            "p_loss_w": obj.p_loss_w,
            "efficiency": obj.efficiency,
            "periodicity_residual": obj.periodicity_residual,
            "zvs_residuals_v": list(obj.zvs_residuals_v),
        }
        kind = "pss_solution"
    elif isinstance(obj, dict):
        body, kind = dict(obj), obj.get("kind", "report")
    else:
        raise InvariantError(f"cannot serialize {type(obj).__name__} as a report")
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **body}


def report_to_json(obj) -> str:
    """Canonical JSON for a score / fit / PSS result (deterministic order)."""
    return json.dumps(_report_dict(obj), indent=2) + "\n"


def parse_report(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid report JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("report must be a JSON object")
    return doc


def write_report(obj, path: str) -> str:
    """Serialize a result object to ``path``; returns the path written."""
    text = report_to_json(obj) if not isinstance(obj, str) else obj
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(path)


def write_text(text: str, path: str) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(path)
