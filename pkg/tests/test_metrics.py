import math

import numpy as np
import pytest

from piezores import bvd
from piezores.errors import (InvariantError, ReflectionMagnitudeError,
                             ResonanceNotFoundError, SweepCoverageError)
from piezores.metrics import (bode_q, compare, coupling_from_freqs, fom,
                              fp_from_coupling, reference_model, score,
                              soa_table, suppressed_region)
from piezores.sweep import ImpedanceSweep, find_resonances

TWIN_FS = 10.14e6
TWIN_FP = TWIN_FS + 0.72e6 / 0.62


# ---------------------------------------------------------------------------
# coupling conventions
# ---------------------------------------------------------------------------

def test_coupling_reproduces_reference_row():
    # fs and the 0.72 MHz / 62% region data imply fp - fs = 1.1613 MHz;
    # the pi^2/8 convention must land on the published 30%
    k = coupling_from_freqs(TWIN_FS, TWIN_FP)
    assert k == pytest.approx(0.2988, abs=2e-4)
    assert abs(k - 0.30) <= 0.005


def test_coupling_alternative_conventions():
    assert coupling_from_freqs(TWIN_FS, TWIN_FP, "fp_ref") == pytest.approx(
        0.195, abs=0.005)
    assert coupling_from_freqs(TWIN_FS, TWIN_FP, "mason_tan") == pytest.approx(
        0.23, abs=0.005)
    with pytest.raises(InvariantError):
        coupling_from_freqs(TWIN_FS, TWIN_FP, "bogus")


def test_coupling_vanishes_as_fp_approaches_fs():
    assert coupling_from_freqs(10e6, 10e6 + 1e-3) < 1e-9


def test_coupling_ordering_error():
    with pytest.raises(InvariantError):
        coupling_from_freqs(11e6, 10e6)


def test_coupling_inverse_application_roundtrip():
    # algebraic inversion for the published 5.94 MHz / 45% entry
    fp = fp_from_coupling(5.94e6, 0.45)
    assert coupling_from_freqs(5.94e6, fp) == pytest.approx(0.45, rel=1e-12)
    assert fp > 5.94e6


# ---------------------------------------------------------------------------
# Bode Q
# ---------------------------------------------------------------------------

def test_bode_q_matches_unloaded_q(twin_model, twin_sweep):
    freq, q = bode_q(twin_sweep)
    fs, _ = find_resonances(twin_sweep)
    q_fs = float(np.interp(fs, freq, q))
    b = twin_model.branches[0]
    q_unloaded = 2 * math.pi * b.fs_hz * b.l_h / b.r_ohm
    assert q_fs == pytest.approx(q_unloaded, rel=0.05)


def test_bode_q_matches_half_power_oracle(twin_model, twin_sweep):
    # independent oracle: Q from the conductance full width at half maximum
    g = (1.0 / twin_sweep.z_ohm).real
    f = twin_sweep.freq_hz
    ipk = int(np.argmax(g))
    half = g[ipk] / 2
    above = np.nonzero(g > half)[0]
    width = f[above[-1]] - f[above[0]]
    q_oracle = f[ipk] / width
    freq, q = bode_q(twin_sweep)
    q_fs = float(np.interp(f[ipk], freq, q))
    assert q_fs == pytest.approx(q_oracle, rel=0.10)


def test_bode_q_invariant_under_common_scaling(twin_sweep):
    freq, q1 = bode_q(twin_sweep)
    scaled = ImpedanceSweep(twin_sweep.freq_hz, 7.3 * twin_sweep.z_ohm,
                            7.3 * twin_sweep.ref_ohm)
    _, q2 = bode_q(scaled)
    np.testing.assert_allclose(q2, q1, rtol=1e-9)


def test_bode_q_rejects_nonpassive_data():
    freq = np.linspace(1e6, 2e6, 10)
    z = np.full(10, -10.0 + 0.0j)
    with pytest.raises(ReflectionMagnitudeError):
        bode_q(ImpedanceSweep(freq, z))


# ---------------------------------------------------------------------------
# suppressed region
# ---------------------------------------------------------------------------

def test_suppressed_region_matches_analytic_form(twin_sweep):
    fs, fp = find_resonances(twin_sweep)
    region = suppressed_region(twin_sweep, fs, fp, threshold=20.0)
    # closed form for a clean single branch: the upper crossing sits at
    # f^2 = fs^2 + (1 - 1/sqrt(thr)) (fp^2 - fs^2)
    y = 1.0 - 1.0 / math.sqrt(20.0)
    f_hi = math.sqrt(fs ** 2 + y * (fp ** 2 - fs ** 2))
    expected = (f_hi - fs) / (fp - fs)
    assert region.fractional == pytest.approx(expected, abs=2e-3)
    assert region.f_lo_hz == pytest.approx(fs, rel=1e-3)


def test_suppressed_region_threshold_monotonicity(twin_sweep):
    fs, fp = find_resonances(twin_sweep)
    widths = [suppressed_region(twin_sweep, fs, fp, t).width_hz
              for t in (5.0, 10.0, 20.0, 50.0)]
    assert all(a <= b for a, b in zip(widths, widths[1:]))


def test_suppressed_region_huge_threshold_fills_band(twin_sweep):
    fs, fp = find_resonances(twin_sweep)
    region = suppressed_region(twin_sweep, fs, fp, threshold=1e9)
    assert region.fractional == pytest.approx(1.0, abs=1e-9)


def test_suppressed_region_shrinks_with_spur(twin_model, twin_sweep):
    fs, fp = find_resonances(twin_sweep)
    clean = suppressed_region(twin_sweep, fs, fp)
    spurred = bvd.inject_spurs(twin_model, [(10.7e6, 0.01, 1000.0)])
    sweep2 = bvd.impedance(spurred, twin_sweep.freq_hz)
    dirty = suppressed_region(sweep2, fs, fp)
    assert dirty.fractional < clean.fractional


def test_suppressed_region_coverage_error(twin_sweep):
    fs, fp = find_resonances(twin_sweep)
    freq = twin_sweep.freq_hz
    short = ImpedanceSweep(freq[freq < 11e6], twin_sweep.z_ohm[freq < 11e6])
    with pytest.raises(SweepCoverageError):
        suppressed_region(short, fs, fp)


# ---------------------------------------------------------------------------
# FoM and score
# ---------------------------------------------------------------------------

def test_fom_products():
    assert fom(4000.0, 0.30) == pytest.approx(1200.0, rel=1e-15)
    assert fom(3500.0, 0.45) == pytest.approx(1575.0, rel=1e-15)
    assert fom(0.0, 0.5) == 0.0
    with pytest.raises(InvariantError):
        fom(-1.0, 0.3)


def test_score_reference_twin(twin_sweep):
    sc = score(twin_sweep)
    assert sc.fom == pytest.approx(1200.0, rel=0.05)
    assert sc.fom == sc.q_bode_at_fs * sc.k_r_sq
    assert sc.threshold == 20.0
    assert sc.k2_convention == "pi2_8"


def test_score_is_deterministic(twin_sweep):
    assert score(twin_sweep) == score(twin_sweep)


def test_score_bare_capacitor_raises():
    freq = np.linspace(1e6, 2e6, 300)
    sweep = bvd.impedance(bvd.BvdModel(100e-12), freq)
    with pytest.raises(ResonanceNotFoundError):
        score(sweep)


def test_score_frequency_scaling_covariance(twin_model):
    # scale every reactive element by 1/alpha: all frequencies scale by
    # alpha while the impedance level (and hence the reflection) is reused
    alpha = 2.5
    b = twin_model.branches[0]
    scaled_model = bvd.BvdModel(
        twin_model.c0_f / alpha,
        (bvd.BvdBranch(b.r_ohm, b.l_h / alpha, b.c_f / alpha),))
    freq = np.linspace(9.6e6, 12.0e6, 12001)
    sc1 = score(bvd.impedance(twin_model, freq))
    sc2 = score(bvd.impedance(scaled_model, alpha * freq))
    assert sc2.fs_hz / sc1.fs_hz == pytest.approx(alpha, rel=1e-6)
    assert sc2.fp_hz / sc1.fp_hz == pytest.approx(alpha, rel=1e-6)
    assert sc2.supp_width_hz / sc1.supp_width_hz == pytest.approx(alpha, rel=1e-5)
    assert sc2.k_r_sq == pytest.approx(sc1.k_r_sq, rel=1e-6)
    assert sc2.fractional_supp == pytest.approx(sc1.fractional_supp, rel=1e-5)
    assert sc2.q_bode_at_fs == pytest.approx(sc1.q_bode_at_fs, rel=1e-6)


# ---------------------------------------------------------------------------
# SoA table and ranking
# ---------------------------------------------------------------------------

def test_soa_table_rows():
    rows = {r.label: r for r in soa_table()}
    assert len(rows) == 6
    pzt = rows["PZT-radial [34]"]
    assert (pzt.fs_mhz, pzt.k_r_sq, pzt.q, pzt.fom) == (0.48, 0.19, 1030.0, 196.0)
    assert pzt.supp_region_mhz == 0.015
    assert pzt.fractional_supp == 0.429
    ts35 = rows["LN-TS [35]"]
    assert ts35.k_r_sq == 0.53
    assert ts35.q is None and ts35.fom is None
    assert ts35.supp_region_mhz is None and ts35.fractional_supp is None
    best = rows["LN-TE [this work]"]
    assert (best.fs_mhz, best.k_r_sq, best.q, best.fom) == (10.14, 0.30, 4000.0, 1200.0)
    assert (best.supp_region_mhz, best.fractional_supp) == (0.72, 0.62)


def test_compare_ranks_reference_rows(twin_sweep):
    sc = score(twin_sweep)
    rows = compare(sc, label="twin under test")
    user = next(r for r in rows if r.is_user)
    table = [r for r in rows if not r.is_user]
    # table entries rank by fractional region: 62% > 42.9% > 34.9% > 3.38%
    fractions = [r.fractional_supp for r in table if r.fractional_supp is not None]
    assert fractions == sorted(fractions, reverse=True)
    assert table[0].label == "LN-TE [this work]"
    # the clean twin has no residual spurs, so it outranks the measured rows
    assert user.rank == 1
    # rows without suppression data rank last
    assert rows[-1].fractional_supp is None


def test_reference_model_matches_table_row():
    model = reference_model()
    fs, fp = bvd.resonance_freqs(model)
    assert fs == pytest.approx(10.14e6, rel=1e-12)
    assert fp == pytest.approx(TWIN_FP, rel=1e-12)
    assert model.branches[0].q == pytest.approx(4000.0, rel=1e-12)


def test_suppressed_region_rejects_nonpassive_band():
    freq = np.linspace(9e6, 12e6, 500)
    z = np.full(500, -0.1 + 10.0j)
    with pytest.raises(InvariantError):
        suppressed_region(ImpedanceSweep(freq, z), 10e6, 11e6)
