"""
Scoring a resonator
===================

One sweep yields every converter-relevant figure of merit: the resonance
pair, the coupling k_r^2, the reflection group-delay Q, the FoM = Q k_r^2,
and the spurious-suppressed region (the band where the resistance stays
below 20x its minimum).  The score is then ranked against published
power-converter resonators.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from piezores import bvd, metrics
from piezores.io import comparison_to_csv, report_to_json, write_text

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# single-mode twin of the best published entry
model = metrics.reference_model()
freq = np.linspace(9.6e6, 12.0e6, 12001)
sweep = bvd.impedance(model, freq)

sc = metrics.score(sweep)
print(f"fs = {sc.fs_hz / 1e6:.3f} MHz, fp = {sc.fp_hz / 1e6:.3f} MHz")
print(f"k_r^2 = {sc.k_r_sq:.3f}, Q(fs) = {sc.q_bode_at_fs:.0f}, "
      f"FoM = {sc.fom:.0f}")
print(f"suppressed region: {sc.supp_width_hz / 1e6:.3f} MHz "
      f"({sc.fractional_supp:.1%} of the inductive band)")
write_text(report_to_json(sc), os.path.join(OUT, "score_report.json"))

rows = metrics.compare(sc, label="clean single-mode twin")
write_text(comparison_to_csv(rows), os.path.join(OUT, "comparison.csv"))
print("\nranking by fractional suppressed region:")
for r in rows:
    frac = "  n/a" if r.fractional_supp is None else f"{r.fractional_supp:5.1%}"
    marker = "  <-- this sweep" if r.is_user else ""
    print(f"  #{r.rank} {r.label:22s} {frac}{marker}")

freqs, q = metrics.bode_q(sweep)
fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
ax1.semilogy(freq / 1e6, sweep.z_ohm.real)
ax1.axvspan(sc.supp_lo_hz / 1e6, sc.supp_hi_hz / 1e6, color="gold", alpha=0.4)
ax1.set_ylabel("Re Z (ohm)")
ax2.plot(freqs / 1e6, q)
ax2.axvspan(sc.supp_lo_hz / 1e6, sc.supp_hi_hz / 1e6, color="gold", alpha=0.4)
ax2.set_ylim(0, 6000)
ax2.set_ylabel("Bode Q")
ax2.set_xlabel("frequency (MHz)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "figures_of_merit.png"), dpi=150)
print(f"\nwrote {OUT}/score_report.json, comparison.csv, figures_of_merit.png")
