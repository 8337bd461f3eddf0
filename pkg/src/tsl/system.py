"""Cavity system description: mirrors, suspensions, and the assembled cavity."""

import math
from dataclasses import dataclass

from .geometry import finesse_from_reflectivities, g_factor, resonator_is_stable, spot_size
from .materials import MaterialProps


@dataclass(frozen=True)
class MirrorSpec:
    """One suspended cavity mirror.

    radius_of_curvature is positive for a face concave toward the cavity.
    A flat mirror is encoded with flat=True, which maps to g = 1 exactly
    (the radius field is then ignored). yaw_inertia overrides the cylinder
    value when a measured or published moment of inertia is available.
    """

    mass: float                 # kg
    radius: float               # m, face radius
    thickness: float            # m
    radius_of_curvature: float  # m
    power_reflectivity: float
    substrate: MaterialProps
    coat_low: MaterialProps
    coat_high: MaterialProps
    flat: bool = False
    yaw_inertia: float | None = None  # kg m^2

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.thickness <= 0:
            raise ValueError(f"thickness must be positive, got {self.thickness}")
        if not 0.0 < self.power_reflectivity <= 1.0:
            raise ValueError(
                f"power_reflectivity must be in (0, 1], got {self.power_reflectivity}"
            )
        if not self.flat and self.radius_of_curvature == 0:
            raise ValueError("radius_of_curvature must be nonzero (use flat=True for g = 1)")
        if self.yaw_inertia is not None and self.yaw_inertia <= 0:
            raise ValueError(f"yaw_inertia must be positive, got {self.yaw_inertia}")

    @property
    def yaw_moment_of_inertia(self) -> float:
        """Moment of inertia about the vertical diameter, I = m r^2/4 + m t^2/12."""
        if self.yaw_inertia is not None:
            return self.yaw_inertia
        return self.mass * (self.radius**2 / 4.0 + self.thickness**2 / 12.0)

    @property
    def face_area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class SuspensionSpec:
    """Suspension of one mirror.

    Exactly one of rotational_stiffness (N m/rad) and yaw_resonance
    (rad/s) is given; the other follows from K = I omega^2 once the
    mirror inertia is known. pendulum_frequency is the longitudinal
    pendulum resonance (rad/s) used by the noise budget.
    """

    quality_factor: float
    pendulum_frequency: float            # rad/s
    rotational_stiffness: float | None = None  # N m / rad
    yaw_resonance: float | None = None         # rad/s

    def __post_init__(self):
        if (self.rotational_stiffness is None) == (self.yaw_resonance is None):
            raise ValueError(
                "exactly one of rotational_stiffness and yaw_resonance must be given"
            )
        if self.rotational_stiffness is not None and self.rotational_stiffness <= 0:
            raise ValueError(f"rotational_stiffness must be positive, got {self.rotational_stiffness}")
        if self.yaw_resonance is not None and self.yaw_resonance <= 0:
            raise ValueError(f"yaw_resonance must be positive, got {self.yaw_resonance}")
        if self.quality_factor <= 0:
            raise ValueError(f"quality_factor must be positive, got {self.quality_factor}")
        if self.pendulum_frequency <= 0:
            raise ValueError(f"pendulum_frequency must be positive, got {self.pendulum_frequency}")

    def stiffness(self, inertia: float) -> float:
        """Yaw restoring torque coefficient K in N m/rad."""
        if self.rotational_stiffness is not None:
            return self.rotational_stiffness
        return inertia * self.yaw_resonance**2

    def yaw_frequency(self, inertia: float) -> float:
        """Free yaw resonance in rad/s."""
        if self.yaw_resonance is not None:
            return self.yaw_resonance
        return math.sqrt(self.rotational_stiffness / inertia)


# Intracavity power builds up from the input power by 2F/pi on resonance.
BUILDUP_FACTOR_OVER_FINESSE = 2.0 / math.pi


@dataclass(frozen=True)
class CavitySystem:
    """Two-mirror suspended cavity, the single source of truth for all formulas.

    mirror1 is the light test mass, mirror2 the heavy input mirror. At
    least one of input_power and intracavity_power must be given; when
    both are, the intracavity value is authoritative and the ratio to the
    ideal buildup is reported as the implied mode-matching efficiency.
    """

    mirror1: MirrorSpec
    mirror2: MirrorSpec
    suspension1: SuspensionSpec
    suspension2: SuspensionSpec
    length: float       # m
    wavelength: float   # m
    input_power: float | None = None        # W
    intracavity_power: float | None = None  # W
    finesse_override: float | None = None   # measured finesse, if available
    beam_radius_override: float | None = None  # m, overrides the computed mode size

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.input_power is None and self.intracavity_power is None:
            raise ValueError("at least one of input_power and intracavity_power is required")
        for name in ("input_power", "intracavity_power", "finesse_override", "beam_radius_override"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")

    def _mirror_g(self, mirror: MirrorSpec) -> float:
        if mirror.flat:
            return 1.0
        return g_factor(self.length, mirror.radius_of_curvature)

    @property
    def g1(self) -> float:
        return self._mirror_g(self.mirror1)

    @property
    def g2(self) -> float:
        return self._mirror_g(self.mirror2)

    @property
    def is_stable(self) -> bool:
        return resonator_is_stable(self.g1, self.g2)

    @property
    def finesse(self) -> float:
        if self.finesse_override is not None:
            return self.finesse_override
        return finesse_from_reflectivities(
            self.mirror1.power_reflectivity, self.mirror2.power_reflectivity
        )

    @property
    def resolved_intracavity_power(self) -> float:
        """Circulating power, from the intracavity field or the ideal buildup."""
        if self.intracavity_power is not None:
            return self.intracavity_power
        return self.input_power * BUILDUP_FACTOR_OVER_FINESSE * self.finesse

    @property
    def mode_matching_efficiency(self) -> float | None:
        """Intracavity power over the ideal buildup; None unless both powers given."""
        if self.intracavity_power is None or self.input_power is None:
            return None
        ideal = self.input_power * BUILDUP_FACTOR_OVER_FINESSE * self.finesse
        return self.intracavity_power / ideal

    def spot_size_on_mirror(self, which: int) -> float:
        """Gaussian mode radius on mirror 1 or 2 (the computed value, no override)."""
        return spot_size(self.length, self.wavelength, self.g1, self.g2, which)

    @property
    def beam_radius(self) -> float:
        """Mode radius on the test mass, honoring beam_radius_override."""
        if self.beam_radius_override is not None:
            return self.beam_radius_override
        return self.spot_size_on_mirror(1)
