"""Geometric and optical properties of a two-mirror resonator.

Pure functions of scalar cavity parameters: g factors, stability,
finesse, cavity pole, Gaussian spot sizes on the mirrors, and
quarter-wave coating stack synthesis.
"""

import math
from dataclasses import dataclass

from .constants import C_LIGHT

# Hard cap on quarter-wave doublets before a transmission target is
# declared unreachable.
MAX_STACK_DOUBLETS = 60


def g_factor(length: float, radius_of_curvature: float) -> float:
    """g = 1 - L/R for one mirror.

    A flat mirror (g = 1 exactly) is encoded with the ``flat`` flag on
    MirrorSpec rather than an infinite radius, so R = 0 is the only
    rejected input here.
    """
    if radius_of_curvature == 0:
        raise ValueError("radius_of_curvature must be nonzero")
    return 1.0 - length / radius_of_curvature


def resonator_is_stable(g1: float, g2: float) -> bool:
    """True iff 0 < g1*g2 < 1 (strict on both ends)."""
    product = g1 * g2
    return 0.0 < product < 1.0


def finesse_from_reflectivities(r1: float, r2: float) -> float:
    """Finesse of a lossless two-mirror cavity.

    F = pi (r1 r2)^(1/4) / (1 - sqrt(r1 r2)) with r1, r2 the power
    reflectivities. A measured finesse can be supplied through
    CavitySystem.finesse_override instead.
    """
    if not (0.0 < r1 < 1.0 and 0.0 < r2 < 1.0):
        if r1 * r2 >= 1.0:
            raise ValueError(f"reflectivity product {r1 * r2} >= 1 diverges")
        raise ValueError(f"reflectivities must lie in (0, 1), got {r1}, {r2}")
    rr = math.sqrt(r1 * r2)
    return math.pi * rr**0.5 / (1.0 - rr)


def cavity_pole(length: float, finesse: float) -> float:
    """Cavity half linewidth (HWHM) in angular frequency, gamma = pi c / (2 L F)."""
    if length <= 0 or finesse <= 0:
        raise ValueError("length and finesse must be positive")
    return math.pi * C_LIGHT / (2.0 * length * finesse)


def spot_size(length: float, wavelength: float, g1: float, g2: float, which: int) -> float:
    """Gaussian 1/e^2 intensity radius of the cavity mode on mirror 1 or 2.

    w1^2 = (L lambda / pi) sqrt(g2 / (g1 (1 - g1 g2))) and symmetrically
    for w2. The marginally stable symmetric confocal case g1 = g2 = 0 is
    accepted through its finite limit w^2 = L lambda / pi; every other
    unstable or opposite-sign geometry is rejected (no mode exists).
    """
    if which not in (1, 2):
        raise ValueError(f"mirror index must be 1 or 2, got {which}")
    if length <= 0 or wavelength <= 0:
        raise ValueError("length and wavelength must be positive")
    if g1 == 0.0 and g2 == 0.0:
        return math.sqrt(length * wavelength / math.pi)
    if g1 * g2 < 0:
        raise ValueError(f"g factors of opposite sign (g1={g1}, g2={g2}): no cavity mode")
    if not resonator_is_stable(g1, g2):
        raise ValueError(f"resonator unstable (g1 g2 = {g1 * g2}): no cavity mode")
    if which == 2:
        g1, g2 = g2, g1
    w_sq = (length * wavelength / math.pi) * math.sqrt(g2 / (g1 * (1.0 - g1 * g2)))
    return math.sqrt(w_sq)


@dataclass(frozen=True)
class StackSummary:
    """Result of synthesizing a quarter-wave high/low coating stack."""

    doublet_count: int
    total_physical_thickness: float   # m
    effective_loss_angle: float       # thickness-weighted over the two materials
    transmission: float               # achieved power transmission


def _doublet_stack_transmission(n_doublets, n_low, n_high, n_substrate, n_incident=1.0):
    # Quarter-wave admittance recursion: each doublet multiplies the load
    # admittance by (n_high/n_low)^2. Equivalent to the layer-by-layer
    # transfer matrix product for exact quarter-wave layers.
    y = n_substrate * (n_high / n_low) ** (2 * n_doublets)
    return 4.0 * n_incident * y / (n_incident + y) ** 2


def quarter_wave_stack(
    target_transmission: float,
    n_low: float,
    n_high: float,
    n_substrate: float,
    wavelength: float,
    loss_low: float = 0.0,
    loss_high: float = 0.0,
) -> StackSummary:
    """Smallest quarter-wave doublet stack reaching a transmission target.

    Doublets are high/low pairs of optical thickness lambda/4 each,
    deposited on the substrate and probed from vacuum. Returns the doublet
    count, the summed physical thickness, and the thickness-weighted loss
    angle of the two layer materials (zero unless loss angles are given).
    """
    if not n_high > n_low >= 1.0:
        raise ValueError(f"need n_high > n_low >= 1, got n_low={n_low}, n_high={n_high}")
    if not 0.0 < target_transmission < 1.0:
        raise ValueError(f"target transmission must be in (0, 1), got {target_transmission}")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")

    n = 0
    while _doublet_stack_transmission(n, n_low, n_high, n_substrate) > target_transmission:
        n += 1
        if n > MAX_STACK_DOUBLETS:
            raise ValueError(
                f"target transmission {target_transmission} not reachable within "
                f"{MAX_STACK_DOUBLETS} doublets of n_low={n_low}, n_high={n_high}"
            )

    d_high = wavelength / (4.0 * n_high)
    d_low = wavelength / (4.0 * n_low)
    total = n * (d_high + d_low)
    if n == 0:
        phi_eff = 0.0
    else:
        phi_eff = (d_high * loss_high + d_low * loss_low) / (d_high + d_low)
    return StackSummary(
        doublet_count=n,
        total_physical_thickness=total,
        effective_loss_angle=phi_eff,
        transmission=_doublet_stack_transmission(n, n_low, n_high, n_substrate),
    )
