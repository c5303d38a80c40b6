"""
DC-DC converter periodic steady state
=====================================

The resonator replaces the magnetic inductor of a 40 V -> 30 V converter.
Ideal switches cycle the terminal through clamped and open stages; during
the open stages the motional current slews the static capacitance exactly
onto the next rail (zero-voltage switching), which the shooting solver
enforces as a hard constraint.  Sweeping the operating frequency through
the inductive band trades output power against efficiency.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from piezores import bvd, metrics
from piezores.converter import ConverterSpec, power_sweep, simulate_waveform, solve_pss
from piezores.io import report_to_json, waveform_to_csv, write_text

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

model = metrics.reference_model()
fs, fp = bvd.resonance_freqs(model)
spec = ConverterSpec(v_in=40.0, v_out=30.0, f_op_hz=fs + 0.15 * (fp - fs))

sol = solve_pss(spec, model)
print(f"f_op = {spec.f_op_hz / 1e6:.3f} MHz "
      f"(band {fs / 1e6:.3f} .. {fp / 1e6:.3f} MHz)")
print(f"p_out = {sol.p_out_w:.2f} W at {sol.efficiency:.2%} efficiency; "
      f"loss {sol.p_loss_w * 1e3:.1f} mW")
print(f"periodicity residual {sol.periodicity_residual:.1e}, "
      f"worst ZVS residual {max(abs(v) for v in sol.zvs_residuals_v):.1e} V")
write_text(report_to_json(sol), os.path.join(OUT, "pss_report.json"))

t, cur, vcm, vc0, idx = simulate_waveform(sol, spec, model, 512)
write_text(waveform_to_csv(t, cur, vcm, vc0, idx),
           os.path.join(OUT, "waveform.csv"))

fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
ax1.plot(t * 1e9, vc0, label="$v_{C0}$")
ax1.set_ylabel("resonator voltage (V)")
ax1.legend(loc="upper right")
ax2.plot(t * 1e9, cur, color="tab:orange")
ax2.set_ylabel("motional current (A)")
ax2.set_xlabel("time (ns)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "waveforms.png"), dpi=150)

grid = fs + (fp - fs) * np.arange(1, 21) / 21.0
points = power_sweep(spec, model, grid)
ok = [p for p in points if p.converged]
print(f"\nfrequency sweep: {len(ok)}/{len(points)} points converged")
print(f"max power {max(p.p_out_w for p in ok):.1f} W at the low end, "
      f"{min(p.p_out_w for p in ok):.2f} W at the top")

fig, ax1 = plt.subplots(figsize=(7, 4))
ax2 = ax1.twinx()
ax1.semilogy([p.f_op_hz / 1e6 for p in ok], [p.p_out_w for p in ok], "o-")
ax2.plot([p.f_op_hz / 1e6 for p in ok], [100 * p.efficiency for p in ok],
         "s--", color="tab:green")
ax1.set_xlabel("operating frequency (MHz)")
ax1.set_ylabel("output power (W)")
ax2.set_ylabel("efficiency (%)", color="tab:green")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "power_sweep.png"), dpi=150)
print(f"wrote {OUT}/pss_report.json, waveform.csv, waveforms.png, power_sweep.png")
