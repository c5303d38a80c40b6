import json
import math

import numpy as np
import pytest

from piezores import bvd, io, materials, metrics
from piezores.converter import ConverterSpec, solve_pss
from piezores.errors import ParseError


# ---------------------------------------------------------------------------
# touchstone
# ---------------------------------------------------------------------------

def test_touchstone_matched_load_row():
    sf = io.parse_touchstone_s1p("# HZ S RI R 50\n1e7 0 0\n")
    assert sf.sweep.freq_hz[0] == 1e7
    assert sf.sweep.z_ohm[0] == pytest.approx(50.0 + 0.0j)
    assert sf.ref_ohm == 50.0


def test_touchstone_full_reflection_row_rejected_with_row_number():
    text = "# HZ S RI R 50\n1e7 0.5 0\n2e7 -1 0\n"
    with pytest.raises(ParseError) as err:
        io.parse_touchstone_s1p(text)
    assert err.value.row == 3


def test_touchstone_defaults_are_mhz_free():
    # omitted option fields default to HZ / S / MA / R 50
    sf = io.parse_touchstone_s1p("#\n1e6 0.5 0\n")
    assert sf.ref_ohm == 50.0
    assert sf.sweep.z_ohm[0] == pytest.approx(50 * 1.5 / 0.5)


def test_touchstone_unit_scaling_and_comments():
    text = "! front comment\n# MHZ S RI R 75\n10 0.1 0.2 ! trailing\n"
    sf = io.parse_touchstone_s1p(text)
    assert sf.sweep.freq_hz[0] == 10e6
    assert "front comment" in sf.comments
    s = 0.1 + 0.2j
    assert sf.sweep.z_ohm[0] == pytest.approx(75 * (1 + s) / (1 - s))


def test_touchstone_db_format():
    text = "# HZ S DB R 50\n1e6 -6.0205999132796239 45\n"
    sf = io.parse_touchstone_s1p(text)
    s = 0.5 * complex(math.cos(math.radians(45)), math.sin(math.radians(45)))
    assert sf.sweep.z_ohm[0] == pytest.approx(50 * (1 + s) / (1 - s), rel=1e-9)


def test_touchstone_z_parameter_file_taken_directly():
    text = "# HZ Z RI R 50\n1e6 12.5 -3.25\n"
    sf = io.parse_touchstone_s1p(text)
    assert sf.sweep.z_ohm[0] == pytest.approx(12.5 - 3.25j)


def test_touchstone_ma_roundtrip_through_independent_ri_writer(twin_sweep):
    # oracle: write the sweep as an RI-format file with code independent of
    # the production writers, re-parse, compare impedances
    ref = twin_sweep.ref_ohm
    s11 = (twin_sweep.z_ohm - ref) / (twin_sweep.z_ohm + ref)
    ma_lines = ["# HZ S MA R 50"]
    ri_lines = ["# HZ S RI R 50"]
    for f, s in zip(twin_sweep.freq_hz, s11):
        ma_lines.append(f"{float(f)!r} {float(abs(s))!r} "
                        f"{float(math.degrees(np.angle(s)))!r}")
        ri_lines.append(f"{float(f)!r} {float(s.real)!r} {float(s.imag)!r}")
    z_ma = io.parse_touchstone_s1p("\n".join(ma_lines)).sweep.z_ohm
    z_ri = io.parse_touchstone_s1p("\n".join(ri_lines)).sweep.z_ohm
    np.testing.assert_allclose(z_ma, z_ri, rtol=1e-9)
    np.testing.assert_allclose(z_ri, twin_sweep.z_ohm, rtol=1e-9)


def test_touchstone_malformed_inputs():
    with pytest.raises(ParseError):
        io.parse_touchstone_s1p("# HZ S RI R\n1e6 0 0\n")  # R without value
    with pytest.raises(ParseError):
        io.parse_touchstone_s1p("# HZ S XYZ\n1e6 0 0\n")  # unknown token
    with pytest.raises(ParseError):
        io.parse_touchstone_s1p("# HZ Y RI R 50\n1e6 0 0\n")  # unsupported
    with pytest.raises(ParseError):
        io.parse_touchstone_s1p("1e6 0\n")  # short row
    with pytest.raises(ParseError):
        io.parse_touchstone_s1p("2e6 0 0\n1e6 0 0\n")  # non-monotonic
    with pytest.raises(ParseError):
        io.parse_touchstone_s1p("")  # no data


# ---------------------------------------------------------------------------
# csv
# ---------------------------------------------------------------------------

def test_csv_minimal_two_rows():
    sf = io.parse_csv_sweep("freq_hz,re_ohm,im_ohm\n1e6,1,2\n2e6,3,4\n")
    assert len(sf.sweep) == 2
    assert sf.sweep.z_ohm[1] == 3 + 4j


def test_csv_decreasing_frequency_names_row():
    text = "freq_hz,re_ohm,im_ohm\n2e6,1,0\n1e6,1,0\n"
    with pytest.raises(ParseError) as err:
        io.parse_csv_sweep(text)
    assert err.value.row == 3


def test_csv_missing_column():
    with pytest.raises(ParseError):
        io.parse_csv_sweep("freq_hz,re_ohm\n1e6,1\n")


def test_csv_non_numeric_cell_named():
    with pytest.raises(ParseError) as err:
        io.parse_csv_sweep("freq_hz,re_ohm,im_ohm\n1e6,abc,0\n")
    assert err.value.row == 2


def test_csv_ref_comment_and_extra_columns():
    text = ("# ref_ohm=75\nfreq_hz,re_ohm,im_ohm,junk\n"
            "1e6,1,2,9\n2e6,3,4,9\n")
    sf = io.parse_csv_sweep(text)
    assert sf.ref_ohm == 75.0
    assert sf.sweep.ref_ohm == 75.0


def test_csv_writer_parser_bit_roundtrip(twin_sweep):
    text = io.sweep_to_csv(twin_sweep)
    sf = io.parse_csv_sweep(text)
    assert np.array_equal(sf.sweep.freq_hz, twin_sweep.freq_hz)
    assert np.array_equal(sf.sweep.z_ohm, twin_sweep.z_ohm)
    assert io.sweep_to_csv(sf.sweep) == text


# ---------------------------------------------------------------------------
# reports and model files
# ---------------------------------------------------------------------------

def test_report_roundtrip_is_byte_identical(twin_sweep):
    sc = metrics.score(twin_sweep)
    text = io.report_to_json(sc)
    doc = io.parse_report(text)
    assert json.dumps(doc, indent=2) + "\n" == text
    assert doc["schema_version"] == "1"
    assert doc["kind"] == "resonator_score"
    assert doc["settings"]["threshold"] == 20.0
    assert doc["fractional_supp"] == sc.fractional_supp


def test_fit_report_serialization(twin_model):
    freq = np.linspace(9.9e6, 11.6e6, 800)
    result = bvd.fit(bvd.impedance(twin_model, freq))
    doc = io.parse_report(io.report_to_json(result))
    assert doc["kind"] == "bvd_fit"
    assert len(doc["branches"]) == 1
    assert doc["schema_version"] == "1"


def test_pss_report_serialization(twin_model):
    fs, fp = bvd.resonance_freqs(twin_model)
    spec = ConverterSpec(40.0, 30.0, fs + 0.2 * (fp - fs))
    sol = solve_pss(spec, twin_model)
    doc = io.parse_report(io.report_to_json(sol))
    assert doc["kind"] == "pss_solution"
    assert len(doc["stage_durations_s"]) == 6
    assert doc["efficiency"] == sol.efficiency


def test_bvd_model_json_roundtrip(twin_model):
    text = io.bvd_model_to_json(twin_model)
    model = io.bvd_model_from_json(text)
    assert model == twin_model
    assert io.bvd_model_to_json(model) == text


def test_material_json_roundtrip():
    ln = materials.lithium_niobate()
    text = io.material_to_json(ln)
    back = io.material_from_json(text)
    assert np.array_equal(back.stiffness, ln.stiffness)
    assert np.array_equal(back.piezo, ln.piezo)
    assert np.array_equal(back.permittivity, ln.permittivity)
    assert back.density == ln.density


def test_write_report_touches_disk(tmp_path, twin_sweep):
    sc = metrics.score(twin_sweep)
    path = tmp_path / "score.json"
    io.write_report(sc, str(path))
    assert io.parse_report(path.read_text())["kind"] == "resonator_score"


# ---------------------------------------------------------------------------
# fuzzing: parsers must never raise anything but ParseError
# ---------------------------------------------------------------------------

_CHARSET = list("0123456789.eE+-# !,\tSZRIMADBHKGz\npqr")


def _fuzz(parser, n, seed):
    rng = np.random.default_rng(seed)
    crashes = 0
    for _ in range(n):
        length = int(rng.integers(0, 120))
        text = "".join(rng.choice(_CHARSET, size=length))
        try:
            parser(text)
        except ParseError:
            pass
        except Exception:
            crashes += 1
    return crashes


def test_fuzz_touchstone_structured_errors_only():
    assert _fuzz(io.parse_touchstone_s1p, 60000, 314159) == 0


def test_fuzz_csv_structured_errors_only():
    assert _fuzz(io.parse_csv_sweep, 40000, 271828) == 0


def test_fuzz_binary_garbage():
    rng = np.random.default_rng(17)
    for _ in range(200):
        raw = bytes(rng.integers(0, 256, size=int(rng.integers(0, 300))))
        text = raw.decode("utf-8", errors="replace")
        for parser in (io.parse_touchstone_s1p, io.parse_csv_sweep):
            try:
                parser(text)
            except ParseError:
                pass
