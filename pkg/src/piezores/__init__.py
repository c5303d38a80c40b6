"""Thickness-mode piezoelectric resonator analysis toolkit.

Submodules:

* :mod:`piezores.materials` - anisotropic constants, cut rotation, couplings
* :mod:`piezores.mason` - 1-D plate impedance synthesis
* :mod:`piezores.bvd` - Butterworth-Van Dyke models, fitting, spur injection
* :mod:`piezores.metrics` - Bode Q, coupling, suppression region, SoA table
* :mod:`piezores.converter` - ZVS periodic steady state of the DC-DC stage
* :mod:`piezores.io` - Touchstone / CSV / JSON file formats
"""

__version__ = "0.1.0"

from .bvd import BvdBranch, BvdModel, fit, from_resonance_specs, inject_spurs
from .converter import (Clamped, ConverterSpec, Open, PssSolution,
                        ResonatorState, power_sweep, solve_pss, spur_impact,
                        stage_evolve)
from .mason import Layer, LayerStack, default_reference_stack, input_impedance
from .materials import (CrystalCut, MaterialConstantSet, coupling_scan,
                        coupling_te, coupling_ts, lithium_niobate,
                        rotate_constants)
from .metrics import (ResonatorScore, bode_q, compare, coupling_from_freqs,
                      fom, score, soa_table, suppressed_region)
from .sweep import ImpedanceSweep, find_resonances

__all__ = [
    "__version__",
    "BvdBranch", "BvdModel", "fit", "from_resonance_specs", "inject_spurs",
    "Clamped", "ConverterSpec", "Open", "PssSolution", "ResonatorState",
    "power_sweep", "solve_pss", "spur_impact", "stage_evolve",
    "Layer", "LayerStack", "default_reference_stack", "input_impedance",
    "CrystalCut", "MaterialConstantSet", "coupling_scan", "coupling_te",
    "coupling_ts", "lithium_niobate", "rotate_constants",
    "ResonatorScore", "bode_q", "compare", "coupling_from_freqs", "fom",
    "score", "soa_table", "suppressed_region",
    "ImpedanceSweep", "find_resonances",
]
