"""1-D thickness-mode input impedance of an electroded piezoelectric plate.

Each layer is an acoustic transmission line with complex velocity
``v = sqrt(c (1 + i/Q) / rho)`` and characteristic impedance ``rho v A``;
the single electrically active layer adds the static capacitance
``C0 = eps33 A / d`` and the transformer coupling ``h = e33 / eps33``.
Electrode stacks on either side are collapsed into acoustic load impedances
by the standard line transformation with free outer surfaces, and the loaded
plate is solved in closed form.

The active layer stores its *constant-field* stiffness; the acoustic line
runs on the piezoelectrically stiffened constant ``c + e33^2/eps33`` (loss
applied to the stiffened value).  With zero piezo coupling the result
reduces exactly to 1/(i w C0).

Everything here is pure: impedance evaluation over disjoint frequency
partitions can proceed concurrently and concatenates to the full sweep.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import materials
from .errors import DegenerateStackError, InvariantError
from .sweep import ImpedanceSweep, find_resonances  # noqa: F401  (re-export)


@dataclass(frozen=True)
class Layer:
    """One mechanical layer of the stack (SI units).

    ``c33_pa`` is the effective longitudinal stiffness along the stack axis
    (constant-field value for the active layer).  Layers with
    ``eps33_f_m == 0`` are passive (metal) layers and must have
    ``e33_c_m2 == 0``; the single layer with ``eps33_f_m > 0`` carries the
    electrical port.
    """

    thickness_m: float
    density_kg_m3: float
    c33_pa: float
    mech_q: float
    e33_c_m2: float = 0.0
    eps33_f_m: float = 0.0

    def __post_init__(self):
        if not self.thickness_m > 0:
            raise InvariantError("layer thickness must be positive")
        if not self.density_kg_m3 > 0:
            raise InvariantError("layer density must be positive")
        if not self.c33_pa > 0:
            raise InvariantError("layer stiffness must be positive")
        if not self.mech_q > 0:
            raise InvariantError("layer mechanical Q must be positive")
        if self.eps33_f_m < 0:
            raise InvariantError("layer permittivity must be non-negative")
        if self.eps33_f_m == 0 and self.e33_c_m2 != 0:
            raise InvariantError("passive layers must have zero piezo constant")

    @property
    def is_piezo(self) -> bool:
        return self.eps33_f_m > 0


@dataclass(frozen=True)
class LayerStack:
    """Bottom-to-top layer list with exactly one electrically active layer."""

    layers: tuple[Layer, ...]
    active_area_m2: float

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not self.active_area_m2 > 0:
            raise InvariantError("active area must be positive")
        n_active = sum(1 for l in layers if l.is_piezo)
        if n_active != 1:
            raise DegenerateStackError(
                f"stack must contain exactly one active layer, found {n_active}")

    @property
    def piezo_index(self) -> int:
        return next(i for i, l in enumerate(self.layers) if l.is_piezo)

    @property
    def c0_f(self) -> float:
        """Static capacitance of the active layer."""
        p = self.layers[self.piezo_index]
        return p.eps33_f_m * self.active_area_m2 / p.thickness_m


def aluminum_layer(thickness_m: float, mech_q: float = 1000.0) -> Layer:
    """Aluminum electrode layer (c11 = 111 GPa, rho = 2700 kg/m^3)."""
    return Layer(thickness_m, 2700.0, 1.11e11, mech_q)


def lithium_niobate_layer(thickness_m: float, theta_deg: float = 36.0,
                          mech_q: float = 4000.0) -> Layer:
    """Rotated-Y-cut LiNbO3 layer using the canonical constant set."""
    m = materials.rotate_constants(materials.lithium_niobate(), float(theta_deg))
    return Layer(
        thickness_m=thickness_m,
        density_kg_m3=m.density,
        c33_pa=float(m.stiffness[2, 2]),
        mech_q=mech_q,
        e33_c_m2=float(m.piezo[2, 2]),
        eps33_f_m=float(m.permittivity[2, 2]),
    )


def default_reference_stack(electrode_radius_m: float = 5e-3,
                        al_thickness_m: float = 300e-9,
                        piezo_thickness_m: float = 0.3e-3,
                        piezo_q: float = 4000.0,
                        electrode_q: float = 1000.0,
                        theta_deg: float = 36.0) -> LayerStack:
    """Al / 36Y LiNbO3 / Al reference stack: 300 nm electrodes, 0.3 mm plate.

    The electrode radius is a configurable parameter (default 5 mm); the
    lateral geometry of the reference device is not modeled.
    """
    area = math.pi * electrode_radius_m ** 2
    return LayerStack(
        layers=(
            aluminum_layer(al_thickness_m, electrode_q),
            lithium_niobate_layer(piezo_thickness_m, theta_deg, piezo_q),
            aluminum_layer(al_thickness_m, electrode_q),
        ),
        active_area_m2=area,
    )


def _layer_acoustics(layer: Layer, area: float):
    """Complex velocity, wavenumber factor and characteristic impedance."""
    c = layer.c33_pa
    if layer.is_piezo:
        c = c + layer.e33_c_m2 ** 2 / layer.eps33_f_m
    c_cplx = c * (1.0 + 1j / layer.mech_q)
    v = np.sqrt(c_cplx / layer.density_kg_m3)
    zc = layer.density_kg_m3 * v * area
    return v, zc


def _chain_load(layers, area: float, w: np.ndarray) -> np.ndarray:
    """Acoustic impedance looking into a layer chain terminated free.

    ``layers`` are ordered from the outermost (free-backed) layer inward.
    """
    z = np.zeros_like(w, dtype=complex)
    for layer in layers:
        v, zc = _layer_acoustics(layer, area)
        t = np.tan(w / v * layer.thickness_m)
        z = zc * (z + 1j * zc * t) / (zc + 1j * z * t)
    return z


def input_impedance(stack: LayerStack, freq_hz: np.ndarray,
                    ref_ohm: float = 50.0) -> ImpedanceSweep:
    """Electrical input impedance of the stack on the given frequency grid."""
    freq = np.asarray(freq_hz, dtype=float)
    if not np.all(freq > 0):
        raise InvariantError("frequencies must be positive")
    n_active = sum(1 for l in stack.layers if l.is_piezo)
    if n_active != 1:
        raise DegenerateStackError(
            f"stack must contain exactly one active layer, found {n_active}")

    ip = stack.piezo_index
    piezo = stack.layers[ip]
    area = stack.active_area_m2
    w = 2.0 * np.pi * freq

    # loads seen from the active layer's faces (outermost layer first)
    z_bot = _chain_load(list(stack.layers[:ip]), area, w)
    z_top = _chain_load(list(reversed(stack.layers[ip + 1:])), area, w)

    v, zc = _layer_acoustics(piezo, area)
    d = piezo.thickness_m
    kd = w / v * d
    sin_kd, cos_kd = np.sin(kd), np.cos(kd)
    h = piezo.e33_c_m2 / piezo.eps33_f_m
    rhs = area * h

    m11 = zc * w
    m12 = -1j * w * z_bot
    m21 = zc * w * cos_kd + 1j * w * z_top * sin_kd
    m22 = -zc * w * sin_kd + 1j * w * z_top * cos_kd
    det = m11 * m22 - m12 * m21
    p = rhs * (m22 + 1j * w * z_bot) / det
    q = rhs * (m11 - m21) / det

    volt = -h * (p * sin_kd + q * (cos_kd - 1.0)) + d / piezo.eps33_f_m
    z = volt / (1j * w * area)
    return ImpedanceSweep(freq, z, ref_ohm)
