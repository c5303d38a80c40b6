"""
What a spurious mode costs
==========================

A spurious mechanical mode inside the inductive band adds a resistance
spike that truncates the spurious-suppressed region and an impedance
disturbance that costs converter operating range.  Both effects are
quantified by injecting a synthetic spur into the clean reference twin.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from piezores import bvd, metrics
from piezores.converter import ConverterSpec, spur_impact

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

clean = metrics.reference_model()
fs, fp = bvd.resonance_freqs(clean)
f_spur = fs + 0.5 * (fp - fs)
spurred = bvd.inject_spurs(clean, [(f_spur, 0.01, 1000.0)])
print(f"spur injected at {f_spur / 1e6:.3f} MHz "
      f"(coupling 1%, Q = 1000)")

freq = np.linspace(9.6e6, 12.0e6, 12001)
region_clean = metrics.suppressed_region(bvd.impedance(clean, freq), fs, fp)
region_spur = metrics.suppressed_region(bvd.impedance(spurred, freq), fs, fp)
print(f"fractional suppressed region: {region_clean.fractional:.1%} clean "
      f"-> {region_spur.fractional:.1%} with the spur")

grid = fs + (fp - fs) * np.arange(1, 21) / 21.0
spec = ConverterSpec(40.0, 30.0, float(grid[0]))
impact = spur_impact(spec, clean, spurred, grid)
lost = impact.lost_freqs_hz
print(f"converter range lost at {len(lost)}/{len(grid)} grid points "
      f"({min(lost) / 1e6:.2f} .. {max(lost) / 1e6:.2f} MHz)")

r_clean = bvd.impedance(clean, freq).z_ohm.real
r_spur = bvd.impedance(spurred, freq).z_ohm.real
fig, ax = plt.subplots(figsize=(7, 4))
ax.semilogy(freq / 1e6, r_spur, label="with spur")
ax.semilogy(freq / 1e6, r_clean, label="clean", color="gray")
ax.axvspan(region_spur.f_lo_hz / 1e6, region_spur.f_hi_hz / 1e6,
           color="gold", alpha=0.4, label="suppressed region (spurred)")
for f in lost:
    ax.axvline(f / 1e6, color="red", alpha=0.15)
ax.set_xlabel("frequency (MHz)")
ax.set_ylabel("Re Z (ohm)")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "spur_impact.png"), dpi=150)
print(f"wrote {OUT}/spur_impact.png")
