"""
1-D plate impedance
===================

The electrical input impedance of an electroded plate follows from a
transmission-line model of the layer stack: 300 nm aluminum on both faces of
a 0.3 mm 36Y lithium niobate plate.  The plate looks capacitive except
between the series resonance (impedance minimum) and the parallel resonance
(maximum), where the converter operates.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from piezores import mason
from piezores.io import sweep_to_csv, write_text
from piezores.sweep import find_resonances

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

stack = mason.default_reference_stack()
print(f"stack: {len(stack.layers)} layers, C0 = {stack.c0_f * 1e12:.1f} pF")

freq = np.linspace(8e6, 14e6, 6001)
sweep = mason.input_impedance(stack, freq)
write_text(sweep_to_csv(sweep), os.path.join(OUT, "plate_sweep.csv"))

fs, fp = find_resonances(sweep)
print(f"series resonance  fs = {fs / 1e6:.3f} MHz")
print(f"parallel resonance fp = {fp / 1e6:.3f} MHz")
print(f"inductive band width  = {(fp - fs) / 1e6:.3f} MHz")

fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
ax1.semilogy(freq / 1e6, np.abs(sweep.z_ohm))
ax1.axvline(fs / 1e6, color="g", ls=":")
ax1.axvline(fp / 1e6, color="r", ls=":")
ax1.set_ylabel("|Z| (ohm)")
ax2.semilogy(freq / 1e6, np.maximum(sweep.z_ohm.real, 1e-3))
ax2.set_ylabel("Re Z (ohm)")
ax2.set_xlabel("frequency (MHz)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "plate_impedance.png"), dpi=150)
print(f"wrote {OUT}/plate_sweep.csv and plate_impedance.png")
