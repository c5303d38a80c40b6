"""
Coupling versus cut angle
=========================

Rotated Y-cut plates trade thickness-extensional (TE) coupling against the
parasitic thickness-shear (TS) mode.  This script sweeps the cut angle for
the canonical lithium niobate set, locates the angle where the shear
coupling vanishes, and plots both curves.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from piezores import materials
from piezores.io import scan_to_csv, write_text

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

ln = materials.lithium_niobate()

# one row per degree from the Y-cut (0) to the Z-cut (90) and back around
scan = materials.coupling_scan(ln, 0.0, 180.0, 1.0)
write_text(scan_to_csv(scan), os.path.join(OUT, "cut_scan.csv"))

# the shear null is what makes the 36-degree neighborhood attractive
theta_star = materials.ts_zero_crossing(ln)
m36 = materials.rotate_constants(ln, 36.0)
print(f"TS coupling crosses zero at theta* = {theta_star:.2f} deg")
print(f"at 36 deg: k33^2 = {materials.coupling_te(m36):.3f}, "
      f"k35^2 = {materials.coupling_ts(m36):.5f}")

fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(scan.theta_deg, 100 * scan.k33_sq, label="TE  $k_{33}^2$")
ax.plot(scan.theta_deg, 100 * scan.k35_sq, label="TS  $k_{35}^2$")
ax.axvline(theta_star, color="gray", ls=":", label=f"TS null {theta_star:.1f}°")
ax.plot([36], [100 * materials.coupling_te(m36)], "k*", ms=12)
ax.set_xlabel("rotation from the Y axis (deg)")
ax.set_ylabel("coupling (%)")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "cut_scan.png"), dpi=150)
print(f"wrote {OUT}/cut_scan.csv and cut_scan.png")
