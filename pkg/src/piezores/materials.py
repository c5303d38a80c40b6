"""Anisotropic material constants, cut rotation and thickness couplings.

Frame convention
----------------
A :class:`MaterialConstantSet` is expressed in *plate coordinates*: axis 3 is
the plate normal (the thickness direction an electric field is applied
along), axes 1 and 2 lie in the plate.  Rotating a cut by ``theta`` tilts the
plate normal by ``theta`` degrees about the in-plane 2-axis, from the old
3-axis toward the old 1-axis.

The shipped lithium niobate set (:func:`lithium_niobate`) is pre-expressed in
the plate frame of the plain Y-cut: its 3-axis is the crystal +Y axis, its
2-axis is the crystal X axis and its 1-axis is the crystal Z axis.  With that
choice, ``rotate_constants(lithium_niobate(), theta)`` produces the plate
constants of the rotated Y-cut whose normal lies ``theta`` degrees from the
crystal +Y axis toward +Z (``theta = 36`` is the 36Y cut), and the rotation
axis is the crystal X axis.

Thickness-extensional coupling reads the (3,3) entries of a plate-frame set,
thickness-shear coupling the (3,5)/(5,5) entries; both use the plain ratio
``e^2 / (c * eps)``.  The stiffened alternative ``e^2 / (c*eps + e^2)`` is
available behind the ``stiffened`` keyword.

All operations are pure functions on immutable value objects and are safe to
call concurrently.
"""
from dataclasses import dataclass

import numpy as np

from .errors import EmptyScanRangeError, InvariantError

EPS0 = 8.8541878128e-12  # vacuum permittivity, F/m

# Voigt pair order fixed as 11, 22, 33, 23, 13, 12.
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))


@dataclass(frozen=True)
class MaterialConstantSet:
    """Full elastic / piezoelectric / dielectric constant set of a crystal.

    Attributes:
        stiffness: 6x6 constant-field stiffness, Pa, Voigt notation.
        piezo: 3x6 piezoelectric stress constants, C/m^2.
        permittivity: 3x3 clamped permittivity, F/m.
        density: kg/m^3.
        name: free-text label.
    """

    stiffness: np.ndarray
    piezo: np.ndarray
    permittivity: np.ndarray
    density: float
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.stiffness, dtype=float).copy()
        e = np.asarray(self.piezo, dtype=float).copy()
        p = np.asarray(self.permittivity, dtype=float).copy()
        if c.shape != (6, 6):
            raise InvariantError("stiffness must be a 6x6 matrix")
        if e.shape != (3, 6):
            raise InvariantError("piezo must be a 3x6 matrix")
        if p.shape != (3, 3):
            raise InvariantError("permittivity must be a 3x3 matrix")
        if not np.allclose(c, c.T, rtol=1e-6, atol=1e-6 * abs(c).max()):
            raise InvariantError("stiffness matrix must be symmetric")
        if not np.allclose(p, p.T, rtol=1e-6, atol=1e-6 * abs(p).max()):
            raise InvariantError("permittivity matrix must be symmetric")
        if np.linalg.eigvalsh(0.5 * (c + c.T)).min() <= 0:
            raise InvariantError("stiffness matrix must be positive definite")
        if np.linalg.eigvalsh(0.5 * (p + p.T)).min() <= 0:
            raise InvariantError("permittivity matrix must be positive definite")
        if not (float(self.density) > 0):
            raise InvariantError("density must be positive")
        for a in (c, e, p):
            a.flags.writeable = False
        object.__setattr__(self, "stiffness", c)
        object.__setattr__(self, "piezo", e)
        object.__setattr__(self, "permittivity", p)
        object.__setattr__(self, "density", float(self.density))


@dataclass(frozen=True)
class CrystalCut:
    """A rotated-Y-cut angle; 36 denotes the 36Y cut.

    The angle is normalized into [0, 180) degrees: theta and theta + 180
    name the same plate (the normal is a line, not a direction).
    """

    theta_deg: float

    def __post_init__(self):
        object.__setattr__(self, "theta_deg", float(self.theta_deg) % 180.0)


def rotation_matrix(theta_deg: float) -> np.ndarray:
    """Direction-cosine matrix tilting the plate normal by theta degrees.

    Rows are the new axes expressed in the old frame: a rotation about the
    2-axis carrying the old 3-axis toward the old 1-axis.
    """
    t = np.radians(theta_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def bond_stress_matrix(a: np.ndarray) -> np.ndarray:
    """6x6 Bond matrix M transforming stress 6-vectors, T' = M T."""
    m = np.empty((6, 6))
    for row, (i, j) in enumerate(_VOIGT_PAIRS):
        for col, (k, l) in enumerate(_VOIGT_PAIRS):
            if k == l:
                m[row, col] = a[i, k] * a[j, k]
            else:
                m[row, col] = a[i, k] * a[j, l] + a[i, l] * a[j, k]
    return m


def _transform(c: np.ndarray, e: np.ndarray, p: np.ndarray,
               a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply the direction-cosine matrix a to a (c, e, eps) constant triple."""
    m = bond_stress_matrix(a)
    c2 = m @ c @ m.T
    e2 = a @ e @ m.T
    p2 = a @ p @ a.T
    # symmetrize away floating-point noise so invariants stay exact
    return 0.5 * (c2 + c2.T), e2, 0.5 * (p2 + p2.T)


def rotate_constants(base: MaterialConstantSet,
                     cut: CrystalCut | float) -> MaterialConstantSet:
    """Express a constant set in the plate frame of the rotated cut.

    Stiffness transforms by the Bond matrix, the piezo matrix by the mixed
    direction-cosine/Bond transformation and the permittivity as a rank-2
    tensor.  ``cut`` may be a :class:`CrystalCut` (angle normalized to
    [0, 180)) or a raw angle in degrees, used unnormalized; theta = 0 is the
    identity and rotations about the same axis compose additively.
    """
    theta = cut.theta_deg if isinstance(cut, CrystalCut) else float(cut)
    a = rotation_matrix(theta)
    c, e, p = _transform(base.stiffness, base.piezo, base.permittivity, a)
    name = base.name if theta == 0 else f"{base.name} @ {theta:g} deg"
    return MaterialConstantSet(c, e, p, base.density, name)


def coupling_te(m: MaterialConstantSet, stiffened: bool = False) -> float:
    """Thickness-extensional coupling e33^2 / (c33 * eps33) of a plate set."""
    e = m.piezo[2, 2]
    k2 = e * e / (m.stiffness[2, 2] * m.permittivity[2, 2])
    return k2 / (1.0 + k2) if stiffened else k2


def coupling_ts(m: MaterialConstantSet, stiffened: bool = False) -> float:
    """Thickness-shear coupling e35^2 / (c55 * eps33) of a plate set."""
    e = m.piezo[2, 4]
    k2 = e * e / (m.stiffness[4, 4] * m.permittivity[2, 2])
    return k2 / (1.0 + k2) if stiffened else k2


@dataclass(frozen=True)
class CouplingScan:
    """Result table of a cut-angle scan: one row per angle."""

    theta_deg: np.ndarray
    k33_sq: np.ndarray
    k35_sq: np.ndarray

    def __post_init__(self):
        for attr in ("theta_deg", "k33_sq", "k35_sq"):
            arr = np.asarray(getattr(self, attr), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, attr, arr)

    def __len__(self) -> int:
        return len(self.theta_deg)


def coupling_scan(base: MaterialConstantSet, theta_min: float,
                  theta_max: float, step: float,
                  stiffened: bool = False) -> CouplingScan:
    """Scan TE and TS couplings over cut angles [theta_min, theta_max].

    Both endpoints are included when (theta_max - theta_min) is an integer
    multiple of step.  Row values equal coupling_te / coupling_ts of
    rotate_constants at that angle.
    """
    if step <= 0:
        raise EmptyScanRangeError("scan step must be positive")
    if not theta_min < theta_max:
        raise EmptyScanRangeError("theta_min must be strictly below theta_max")
    n = int(np.floor((theta_max - theta_min) / step + 1e-9))
    thetas = theta_min + step * np.arange(n + 1)
    k33 = np.empty(n + 1)
    k35 = np.empty(n + 1)
    for i, th in enumerate(thetas):
        m = rotate_constants(base, float(th))
        k33[i] = coupling_te(m, stiffened)
        k35[i] = coupling_ts(m, stiffened)
    return CouplingScan(thetas, k33, k35)


def ts_zero_crossing(base: MaterialConstantSet, theta_lo: float = 1.0,
                     theta_hi: float = 89.0) -> float:
    """Angle where the signed shear constant e35 crosses zero.

    Locates the first sign change of e35(theta) on a 1-degree bracket grid
    and refines it by bisection (scipy brentq).
    """
    from scipy.optimize import brentq

    def e35(theta: float) -> float:
        return float(rotate_constants(base, theta).piezo[2, 4])

    grid = np.arange(theta_lo, theta_hi + 1e-9, 1.0)
    vals = np.array([e35(t) for t in grid])
    sign_change = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if len(sign_change) == 0:
        raise EmptyScanRangeError(
            f"e35 has no zero crossing in [{theta_lo}, {theta_hi}] deg")
    i = int(sign_change[0])
    return float(brentq(e35, grid[i], grid[i + 1], xtol=1e-10))


# Congruent LiNbO3 room-temperature constants (crystal frame, class 3m):
# constant-field stiffness, piezoelectric stress constants and clamped
# permittivity after Warner, Onoe & Coquin (1967), as compiled by
# Weis & Gaylord (1985); density from the same compilation.
_LN_C11 = 2.03e11
_LN_C12 = 0.53e11
_LN_C13 = 0.75e11
_LN_C14 = 0.09e11
_LN_C33 = 2.45e11
_LN_C44 = 0.60e11
_LN_E15 = 3.7
_LN_E22 = 2.5
_LN_E31 = 0.2
_LN_E33 = 1.3
_LN_EPS11 = 44.0 * EPS0
_LN_EPS33 = 29.0 * EPS0
_LN_DENSITY = 4647.0


def lithium_niobate_crystal_frame() -> MaterialConstantSet:
    """Congruent LiNbO3 constants in the conventional crystal frame (Z = 3)."""
    c66 = 0.5 * (_LN_C11 - _LN_C12)
    c = np.array([
        [_LN_C11, _LN_C12, _LN_C13, _LN_C14, 0.0, 0.0],
        [_LN_C12, _LN_C11, _LN_C13, -_LN_C14, 0.0, 0.0],
        [_LN_C13, _LN_C13, _LN_C33, 0.0, 0.0, 0.0],
        [_LN_C14, -_LN_C14, 0.0, _LN_C44, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, _LN_C44, _LN_C14],
        [0.0, 0.0, 0.0, 0.0, _LN_C14, c66],
    ])
    e = np.array([
        [0.0, 0.0, 0.0, 0.0, _LN_E15, -_LN_E22],
        [-_LN_E22, _LN_E22, 0.0, _LN_E15, 0.0, 0.0],
        [_LN_E31, _LN_E31, _LN_E33, 0.0, 0.0, 0.0],
    ])
    p = np.diag([_LN_EPS11, _LN_EPS11, _LN_EPS33])
    return MaterialConstantSet(c, e, p, _LN_DENSITY, "LiNbO3 (crystal frame)")


def lithium_niobate() -> MaterialConstantSet:
    """Congruent LiNbO3 in the Y-cut plate frame (the toolkit's canonical set).

    Axes: 3 = crystal +Y (plate normal of the plain Y-cut), 2 = crystal X
    (the rotation axis of rotated Y-cuts), 1 = crystal Z.  Rotating this set
    with :func:`rotate_constants` by theta yields the plate constants of the
    theta-rotated Y-cut.
    """
    base = lithium_niobate_crystal_frame()
    # cyclic axis permutation (Z, X, Y) -> (1, 2, 3); a proper rotation
    a0 = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    c, e, p = _transform(base.stiffness, base.piezo, base.permittivity, a0)
    return MaterialConstantSet(c, e, p, base.density, "LiNbO3 (Y-cut plate frame)")
