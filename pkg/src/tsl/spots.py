"""Cavity-axis shift under mirror yaw: beam spots and radiation-pressure torques.

The cavity axis is the line through the two mirrors' centers of
curvature. Yawing a mirror moves its center of curvature sideways, the
axis follows, and the displaced beam spots turn the circulating power
into torques. Differentiating the composed map regenerates the optical
stiffness matrix, which is this module's consistency anchor.

Sign conventions: positive yaw is counterclockwise seen from above for
both mirrors (one global rotation axis), and both spot displacements are
measured along one global transverse axis. With that choice the
radiation-pressure torque is +(2P/c) spot1 on mirror 1 and -(2P/c) spot2
on mirror 2; the relative minus sign comes from the mirrors facing each
other and is pinned by requiring -dT/dalpha to equal optical_stiffness.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT
from .system import CavitySystem

# Central-difference step for the stiffness Jacobian, rad. Balances
# truncation against round-off for torques of order 1e-10 N m.
ANGLE_STEP = 1e-9

# Spot excursion beyond this fraction of the face radius risks clipping.
SPOT_WARN_FRACTION = 0.5

# Static decentering beyond ~2 um would break the length lock in the
# reference experiment; exposed for callers, not modeled here.
LOCK_DECENTRATION_LIMIT = 2e-6


@dataclass(frozen=True)
class SpotState:
    """Linearized cavity-axis pose and beam-spot displacements."""

    spot1: float        # m, transverse spot displacement on mirror 1
    spot2: float        # m, same on mirror 2
    axis_tilt: float    # rad, cavity-axis tilt
    axis_offset: float  # m, axis transverse position at the mirror-1 plane


def spot_response_matrix(system: CavitySystem) -> np.ndarray:
    """2x2 matrix mapping (alpha1, alpha2) to (spot1, spot2).

    spot1 = L (g2 a1 - a2) / (1 - g1 g2)
    spot2 = L (a1 - g1 a2) / (1 - g1 g2)
    """
    g1, g2 = system.g1, system.g2
    if not 0.0 < g1 * g2 < 1.0:
        raise ValueError(f"resonator unstable (g1 g2 = {g1 * g2}); cavity axis undefined")
    scale = system.length / (1.0 - g1 * g2)
    return scale * np.array([[g2, -1.0], [1.0, -g1]])


def spots_from_angles(system: CavitySystem, alpha1: float, alpha2: float) -> SpotState:
    """Beam-spot displacements for small mirror yaw angles (linearized)."""
    s1, s2 = spot_response_matrix(system) @ (alpha1, alpha2)
    g1, g2 = system.g1, system.g2
    tilt = ((1.0 - g2) * alpha1 + (1.0 - g1) * alpha2) / (1.0 - g1 * g2)
    for spot, mirror, name in ((s1, system.mirror1, "mirror 1"), (s2, system.mirror2, "mirror 2")):
        if abs(spot) > SPOT_WARN_FRACTION * mirror.radius:
            warnings.warn(
                f"beam spot on {name} displaced {spot:.3e} m, beyond "
                f"{SPOT_WARN_FRACTION:g} of the {mirror.radius:.3e} m face radius",
                stacklevel=2,
            )
    return SpotState(spot1=float(s1), spot2=float(s2), axis_tilt=float(tilt), axis_offset=float(s1))


def torques_from_spots(intracavity_power: float, spots: SpotState) -> tuple[float, float]:
    """Radiation-pressure torques (T1, T2) in N m from displaced spots."""
    if intracavity_power < 0:
        raise ValueError(f"intracavity power must be nonnegative, got {intracavity_power}")
    force = 2.0 * intracavity_power / C_LIGHT
    return (force * spots.spot1, -force * spots.spot2)


def stiffness_from_geometry(system: CavitySystem, intracavity_power: float) -> np.ndarray:
    """Optical stiffness recovered as -dT/dalpha by central differences.

    Independent route to the closed-form optical_stiffness matrix; the
    two must agree entrywise on every stable geometry.
    """

    def torque(alpha1, alpha2):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return torques_from_spots(intracavity_power, spots_from_angles(system, alpha1, alpha2))

    h = ANGLE_STEP
    jac = np.empty((2, 2))
    for col, (da1, da2) in enumerate(((h, 0.0), (0.0, h))):
        plus = torque(da1, da2)
        minus = torque(-da1, -da2)
        jac[0, col] = (plus[0] - minus[0]) / (2.0 * h)
        jac[1, col] = (plus[1] - minus[1]) / (2.0 * h)
    return -jac


def ray_traced_spots(system: CavitySystem, alpha1: float, alpha2: float) -> tuple[float, float]:
    """Exact centers-of-curvature construction, without linearization.

    Rotates each mirror normal by its full angle, draws the cavity axis
    through the two centers of curvature, and intersects it with the
    mirror planes. Used to cross-check spots_from_angles; requires finite
    radii of curvature.
    """
    if system.mirror1.flat or system.mirror2.flat:
        raise ValueError("ray construction needs finite radii of curvature")
    r1 = system.mirror1.radius_of_curvature
    r2 = system.mirror2.radius_of_curvature
    length = system.length
    # mirror 1 vertex at z = 0 with inward normal +z; mirror 2 at z = L, normal -z
    c1 = np.array([r1 * math.sin(alpha1), r1 * math.cos(alpha1)])
    c2 = np.array([-r2 * math.sin(alpha2), length - r2 * math.cos(alpha2)])
    if c2[1] == c1[1]:
        raise ValueError("degenerate geometry: centers of curvature at equal z")
    slope = (c2[0] - c1[0]) / (c2[1] - c1[1])
    x_at = lambda z: c1[0] + slope * (z - c1[1])
    return (float(x_at(0.0)), float(x_at(length)))
