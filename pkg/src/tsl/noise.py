"""Displacement-noise budget toward quantum-radiation-pressure dominance.

All curves are single-sided amplitude spectral densities referred to
test-mass longitudinal displacement, computed on resonance. Each source
carries a formula identifier so an alternate convention can be swapped
in and traced through the output.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C_LIGHT, HBAR, K_BOLTZMANN, M_NITROGEN
from .geometry import cavity_pole, quarter_wave_stack
from .materials import MaterialProps
from .system import CavitySystem, MirrorSpec

FORMULA_IDS = {
    "qrpn": "qrpn:buildup-2F-over-pi,single-pole",
    "shot": "shot:uncertainty-product-hbar^2",
    "suspension_thermal": "suspension:structural-damping-fdt",
    "substrate_brownian": "substrate:half-space-elastic-loss",
    "coating_brownian": "coating:isotropic-thickness-weighted-loss",
    "seismic": "seismic:1e-7-over-f^2,stack-1-over-f^4",
    "residual_gas": "gas:free-molecular-damping",
    "laser_frequency": "laser-frequency:10Hz-over-f",
}

# Classical curves summed in quadrature into the budget total; shot noise
# is quantum and reported alongside instead.
CLASSICAL_SOURCES = (
    "suspension_thermal",
    "substrate_brownian",
    "coating_brownian",
    "seismic",
    "residual_gas",
    "laser_frequency",
)

LASER_FREQUENCY_NOISE_COEFF = 10.0  # Hz/sqrt(Hz) at 1 Hz, falling as 1/f

MIN_BAND_POINTS_PER_DECADE = 50
BAND_EDGE_TOLERANCE = 0.01  # relative frequency resolution of band endpoints


@dataclass(frozen=True)
class EnvSpec:
    """Environment around the suspended cavity."""

    temperature: float = 300.0        # K
    air_pressure: float = 1e-4        # Pa
    seismic_level: float = 1e-7       # m Hz^(3/2): coefficient of the 1/f^2 ground law
    isolation_corner: float = 1.0     # Hz, corner of the 1/f^4 stack suppression
    gas_molecular_mass: float = M_NITROGEN  # kg

    def __post_init__(self):
        for name in (
            "temperature",
            "air_pressure",
            "seismic_level",
            "isolation_corner",
            "gas_molecular_mass",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class NoiseCurve:
    """One labeled ASD on a frequency grid."""

    label: str
    frequencies: np.ndarray  # Hz
    asd: np.ndarray          # m/sqrt(Hz)
    formula_id: str = ""

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        a = np.asarray(self.asd, dtype=float)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "asd", a)
        if f.shape != a.shape or f.ndim != 1:
            raise ValueError("frequencies and asd must be matching 1-d arrays")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValueError(f"{self.label}: asd must be nonnegative and finite")


def mech_susceptibility(mass, pendulum_frequency, quality_factor, omega):
    """Structurally damped oscillator response chi(Omega), m/N.

    chi = 1 / (m (wp^2 (1 + i/Q) - Omega^2)); a free mass 1/(m Omega^2)
    well above the pendulum resonance.
    """
    if mass <= 0 or pendulum_frequency <= 0 or quality_factor <= 0:
        raise ValueError("mass, pendulum_frequency, and quality_factor must be positive")
    wp_sq = pendulum_frequency**2
    return 1.0 / (mass * (wp_sq * (1.0 + 1j / quality_factor) - np.asarray(omega) ** 2))


def qrpn_force_asd(intracavity_power, finesse, length, wavelength, omega):
    """Quantum radiation-pressure force fluctuation, N/sqrt(Hz).

    S_F(Omega) = (8 hbar w0 P / c^2) (2F/pi) / (1 + (Omega/gamma)^2) with
    w0 the optical angular frequency and gamma the cavity pole.
    """
    if intracavity_power < 0:
        raise ValueError(f"intracavity power must be nonnegative, got {intracavity_power}")
    w0 = 2.0 * math.pi * C_LIGHT / wavelength
    gamma = cavity_pole(length, finesse)
    s_f = (
        (8.0 * HBAR * w0 * intracavity_power / C_LIGHT**2)
        * (2.0 * finesse / math.pi)
        / (1.0 + (np.asarray(omega) / gamma) ** 2)
    )
    return np.sqrt(s_f)


def shot_noise_displacement_asd(intracavity_power, finesse, length, wavelength, omega):
    """Readout imprecision paired with the force noise: sqrt(S_x) = hbar / sqrt(S_F).

    Ideal lossless convention, so S_x S_F = hbar^2 at every frequency.
    """
    return HBAR / qrpn_force_asd(intracavity_power, finesse, length, wavelength, omega)


def suspension_thermal_asd(mass, pendulum_frequency, quality_factor, temperature, omega):
    """Pendulum thermal displacement noise under structural damping, m/sqrt(Hz).

    S_x(Omega) = (4 kB T / Omega) (wp^2/Q) / (m [(wp^2 - Omega^2)^2 + wp^4/Q^2]),
    the fluctuation-dissipation result for a constant loss angle 1/Q.
    """
    if min(mass, pendulum_frequency, quality_factor, temperature) <= 0:
        raise ValueError("all suspension thermal parameters must be positive")
    omega = np.asarray(omega, dtype=float)
    wp_sq = pendulum_frequency**2
    s_x = (4.0 * K_BOLTZMANN * temperature / omega) * (wp_sq / quality_factor) / (
        mass * ((wp_sq - omega**2) ** 2 + wp_sq**2 / quality_factor**2)
    )
    return np.sqrt(s_x)


def substrate_brownian_asd(material: MaterialProps, beam_radius, temperature, frequency):
    """Brownian noise of a half-space mirror substrate, m/sqrt(Hz).

    S_x(f) = (4 kB T / 2 pi f) (1 - sigma^2) phi / (sqrt(pi) Y w).
    """
    if beam_radius <= 0 or temperature <= 0:
        raise ValueError("beam_radius and temperature must be positive")
    f = np.asarray(frequency, dtype=float)
    s_x = (
        (4.0 * K_BOLTZMANN * temperature / (2.0 * math.pi * f))
        * (1.0 - material.poisson_ratio**2)
        * material.loss_angle
        / (math.sqrt(math.pi) * material.young_modulus * beam_radius)
    )
    return np.sqrt(s_x)


def coating_brownian_asd(stack, substrate: MaterialProps, beam_radius, temperature, frequency):
    """Brownian noise of a thin lossy coating on the substrate, m/sqrt(Hz).

    S_x(f) = (4 kB T / 2 pi f) (d phi_eff / pi w^2)
             (1 + sigma_s)(1 - 2 sigma_s) / Y_s
    with d the stack thickness and phi_eff its thickness-weighted loss angle.
    """
    if beam_radius <= 0 or temperature <= 0:
        raise ValueError("beam_radius and temperature must be positive")
    f = np.asarray(frequency, dtype=float)
    sigma_s = substrate.poisson_ratio
    s_x = (
        (4.0 * K_BOLTZMANN * temperature / (2.0 * math.pi * f))
        * (stack.total_physical_thickness * stack.effective_loss_angle / (math.pi * beam_radius**2))
        * ((1.0 + sigma_s) * (1.0 - 2.0 * sigma_s) / substrate.young_modulus)
    )
    return np.sqrt(s_x)


def seismic_asd(env: EnvSpec, frequency):
    """Ground motion through the isolation stack, m/sqrt(Hz).

    (level / f^2) ground spectrum, suppressed by (f0/f)^4 above the stack
    corner f0 and untouched below it.
    """
    f = np.asarray(frequency, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency must be positive")
    suppression = np.minimum(1.0, (env.isolation_corner / f) ** 4)
    return (env.seismic_level / f**2) * suppression


def residual_gas_asd(env: EnvSpec, mirror: MirrorSpec, pendulum_frequency, quality_factor, omega):
    """Residual-gas damping force noise on the mirror, as displacement.

    Free-molecular damping beta_gas = p A sqrt(8 m0 / (pi kB T)) over both
    faces gives S_F = 4 kB T beta_gas, filtered by the pendulum response.
    """
    area = 2.0 * mirror.face_area  # both faces
    beta_gas = env.air_pressure * area * math.sqrt(
        8.0 * env.gas_molecular_mass / (math.pi * K_BOLTZMANN * env.temperature)
    )
    s_f = 4.0 * K_BOLTZMANN * env.temperature * beta_gas
    chi = mech_susceptibility(mirror.mass, pendulum_frequency, quality_factor, omega)
    return math.sqrt(s_f) * np.abs(chi)


def laser_frequency_noise_asd(system: CavitySystem, frequency, coefficient_hz=LASER_FREQUENCY_NOISE_COEFF):
    """Laser frequency noise coupled through the cavity length, m/sqrt(Hz).

    Displacement equivalent (L / nu0) (coefficient / f) for a stabilized
    source whose frequency noise falls as 1/f.
    """
    f = np.asarray(frequency, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency must be positive")
    nu0 = C_LIGHT / system.wavelength
    return (system.length / nu0) * (coefficient_hz / f)


def _coating_stack(system: CavitySystem, mirror: MirrorSpec):
    return quarter_wave_stack(
        target_transmission=1.0 - mirror.power_reflectivity,
        n_low=mirror.coat_low.refractive_index,
        n_high=mirror.coat_high.refractive_index,
        n_substrate=mirror.substrate.refractive_index,
        wavelength=system.wavelength,
        loss_low=mirror.coat_low.loss_angle,
        loss_high=mirror.coat_high.loss_angle,
    )


def quadrature_total(curves: list[NoiseCurve], label="total") -> NoiseCurve:
    """Quadrature sum of ASDs sharing one grid."""
    if not curves:
        raise ValueError("need at least one curve")
    grid = curves[0].frequencies
    for curve in curves[1:]:
        if curve.frequencies.shape != grid.shape or np.any(curve.frequencies != grid):
            raise ValueError(f"grid mismatch between {curves[0].label} and {curve.label}")
    total = np.sqrt(sum(curve.asd**2 for curve in curves))
    return NoiseCurve(label=label, frequencies=grid, asd=total)


@dataclass(frozen=True)
class NoiseBudget:
    """All source curves plus the classical total and the QRPN signal curve."""

    system: CavitySystem
    env: EnvSpec
    frequencies: np.ndarray
    sources: tuple[NoiseCurve, ...]
    classical_total: NoiseCurve
    qrpn: NoiseCurve
    formula_ids: dict = field(default_factory=dict)

    def source(self, label: str) -> NoiseCurve:
        for curve in self.sources:
            if curve.label == label:
                return curve
        raise KeyError(label)


def _evaluate_sources(system: CavitySystem, env: EnvSpec, f: np.ndarray) -> dict:
    omega = 2.0 * math.pi * f
    power = system.resolved_intracavity_power
    finesse = system.finesse
    m1, m2 = system.mirror1, system.mirror2
    sus1 = system.suspension1
    w1 = system.beam_radius
    w2 = system.beam_radius_override or system.spot_size_on_mirror(2)

    substrate = np.sqrt(
        substrate_brownian_asd(m1.substrate, w1, env.temperature, f) ** 2
        + substrate_brownian_asd(m2.substrate, w2, env.temperature, f) ** 2
    )
    coating = np.sqrt(
        coating_brownian_asd(_coating_stack(system, m1), m1.substrate, w1, env.temperature, f) ** 2
        + coating_brownian_asd(_coating_stack(system, m2), m2.substrate, w2, env.temperature, f) ** 2
    )
    # The heavy input mirror's suspension and gas-damping terms are
    # suppressed by the mass ratio and left out of the budget.
    return {
        "suspension_thermal": suspension_thermal_asd(
            m1.mass, sus1.pendulum_frequency, sus1.quality_factor, env.temperature, omega
        ),
        "substrate_brownian": substrate,
        "coating_brownian": coating,
        "seismic": seismic_asd(env, f),
        "residual_gas": residual_gas_asd(
            env, m1, sus1.pendulum_frequency, sus1.quality_factor, omega
        ),
        "laser_frequency": laser_frequency_noise_asd(system, f),
        "shot": shot_noise_displacement_asd(
            power, finesse, system.length, system.wavelength, omega
        ),
    }


def total_budget(system: CavitySystem, env: EnvSpec, frequencies) -> NoiseBudget:
    """Evaluate every source on one grid and form the classical total.

    The QRPN displacement curve (force noise through the test-mass
    susceptibility) is the signal of interest and is reported separately
    from the classical quadrature sum; shot noise is quantum and likewise
    kept out of the classical total.
    """
    f = np.asarray(list(frequencies) if np.ndim(frequencies) == 0 else frequencies, dtype=float)
    if f.ndim != 1 or f.size == 0 or np.any(f <= 0) or np.any(np.diff(f) <= 0):
        raise ValueError("frequencies must be a strictly increasing positive 1-d grid")

    values = _evaluate_sources(system, env, f)
    sources = tuple(
        NoiseCurve(label=label, frequencies=f, asd=asd, formula_id=FORMULA_IDS.get(label, ""))
        for label, asd in values.items()
    )
    classical = quadrature_total(
        [c for c in sources if c.label in CLASSICAL_SOURCES], label="classical_total"
    )

    omega = 2.0 * math.pi * f
    sus1 = system.suspension1
    chi = mech_susceptibility(
        system.mirror1.mass, sus1.pendulum_frequency, sus1.quality_factor, omega
    )
    qrpn_disp = qrpn_force_asd(
        system.resolved_intracavity_power, system.finesse, system.length, system.wavelength, omega
    ) * np.abs(chi)
    qrpn = NoiseCurve(label="qrpn", frequencies=f, asd=qrpn_disp, formula_id=FORMULA_IDS["qrpn"])

    return NoiseBudget(
        system=system,
        env=env,
        frequencies=f,
        sources=sources,
        classical_total=classical,
        qrpn=qrpn,
        formula_ids=dict(FORMULA_IDS),
    )


def _ratio_minus_one(system, env, frequency):
    budget = total_budget(system, env, np.array([frequency]))
    classical = budget.classical_total.asd[0]
    if classical == 0.0:
        return math.inf if budget.qrpn.asd[0] > 0 else -1.0
    return budget.qrpn.asd[0] / classical - 1.0


def dominance_band(budget: NoiseBudget) -> list[tuple[float, float]]:
    """Frequency bands where the QRPN curve exceeds the classical total.

    Scans the budget grid (which must resolve at least 50 points per
    decade) for sign changes of qrpn/classical - 1 and refines each band
    endpoint by bisection to 1% in frequency. Bands running into the grid
    edges are truncated there.
    """
    f = budget.frequencies
    if f.size < 2:
        raise ValueError("budget grid too small")
    decades = math.log10(f[-1] / f[0])
    if decades > 0 and (f.size - 1) / decades < MIN_BAND_POINTS_PER_DECADE:
        raise ValueError(
            f"budget grid has fewer than {MIN_BAND_POINTS_PER_DECADE} points per decade"
        )

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            budget.classical_total.asd > 0,
            budget.qrpn.asd / budget.classical_total.asd,
            np.inf,
        )
    above = ratio > 1.0

    def refine(lo, hi):
        value_lo = _ratio_minus_one(budget.system, budget.env, lo)
        while (hi - lo) > BAND_EDGE_TOLERANCE * hi:
            mid = math.sqrt(lo * hi)
            value_mid = _ratio_minus_one(budget.system, budget.env, mid)
            if (value_mid > 0) == (value_lo > 0):
                lo, value_lo = mid, value_mid
            else:
                hi = mid
        return math.sqrt(lo * hi)

    bands = []
    start = float(f[0]) if above[0] else None
    for i in range(len(f) - 1):
        if above[i] != above[i + 1]:
            edge = refine(float(f[i]), float(f[i + 1]))
            if above[i + 1]:
                start = edge
            else:
                bands.append((start, edge))
                start = None
    if start is not None:
        bands.append((start, float(f[-1])))
    return bands
