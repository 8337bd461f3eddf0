"""Yaw dynamics, transfer functions, and noise budget of a two-mirror suspended cavity."""

from .constants import C_LIGHT, HBAR, K_BOLTZMANN
from .dynamics import (
    COMMON,
    DIFFERENTIAL,
    CriticalPower,
    Mode,
    ModeFrequency,
    ModeSolution,
    StiffnessSystem,
    approx_common_frequency,
    approx_differential_frequency,
    beta,
    build_stiffness,
    critical_powers,
    optical_stiffness,
    power_sweep,
    solve_modes,
)
from .geometry import (
    StackSummary,
    cavity_pole,
    finesse_from_reflectivities,
    g_factor,
    quarter_wave_stack,
    resonator_is_stable,
    spot_size,
)
from .materials import FUSED_SILICA, MATERIALS, MaterialProps, SILICA_COATING, TITANIA_TANTALA
from .noise import (
    EnvSpec,
    NoiseBudget,
    NoiseCurve,
    coating_brownian_asd,
    dominance_band,
    laser_frequency_noise_asd,
    mech_susceptibility,
    qrpn_force_asd,
    residual_gas_asd,
    seismic_asd,
    shot_noise_displacement_asd,
    substrate_brownian_asd,
    suspension_thermal_asd,
    total_budget,
)
from .response import (
    PowerComparison,
    PowerPoint,
    ResonanceFit,
    TransferFunctionData,
    fit_resonance,
    frequency_vs_power_curve,
    load_tf_csv,
    resonance_magnitude,
    synthesize_response,
    write_tf_csv,
)
from .spots import SpotState, spots_from_angles, stiffness_from_geometry, torques_from_spots
from .system import CavitySystem, MirrorSpec, SuspensionSpec

__version__ = "0.1.0"
