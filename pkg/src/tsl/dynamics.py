"""Coupled yaw dynamics of the two suspended mirrors.

Builds the optical and mechanical stiffness matrices of the 2x2
rotational system, solves the generalized eigenproblem, classifies
stability, sweeps intracavity power, and locates the critical powers
where a mode's squared frequency crosses zero.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .constants import C_LIGHT
from .system import CavitySystem

DIFFERENTIAL = "differential"
COMMON = "common"

# Log bracketing grid for the critical-power search.
CRITICAL_GRID_POINTS_PER_DECADE = 200
CRITICAL_GRID_FLOOR = 1e-3  # W


def beta(system: CavitySystem, intracavity_power: float) -> float:
    """Optical torsional coupling beta = 2 P L / [c (1 - g1 g2)], N m/rad."""
    g1, g2 = system.g1, system.g2
    if not 0.0 < g1 * g2 < 1.0:
        raise ValueError(f"resonator unstable (g1 g2 = {g1 * g2}); beta undefined")
    if intracavity_power < 0:
        raise ValueError(f"intracavity power must be nonnegative, got {intracavity_power}")
    return 2.0 * intracavity_power * system.length / (C_LIGHT * (1.0 - g1 * g2))


def optical_stiffness(system: CavitySystem, intracavity_power: float) -> np.ndarray:
    """Radiation-pressure torsional stiffness matrix, N m/rad.

    K_opt = 2P / [c (R1 + R2 - L)] * [[R1 (L - R2), R1 R2],
                                      [R1 R2,       R2 (L - R1)]]

    For a flat mirror (g = 1) the equivalent g-factor form
    [[-beta g2, beta], [beta, -beta g1]] is used; the two forms are
    algebraically identical wherever both are defined.
    """
    g1, g2 = system.g1, system.g2
    if not 0.0 < g1 * g2 < 1.0:
        raise ValueError(
            f"resonator unstable (g1 g2 = {g1 * g2}); optical stiffness undefined"
        )
    if intracavity_power < 0:
        raise ValueError(f"intracavity power must be nonnegative, got {intracavity_power}")

    if system.mirror1.flat or system.mirror2.flat:
        b = beta(system, intracavity_power)
        return np.array([[-b * g2, b], [b, -b * g1]])

    r1 = system.mirror1.radius_of_curvature
    r2 = system.mirror2.radius_of_curvature
    length = system.length
    denom = r1 + r2 - length
    if denom == 0:
        raise ValueError("degenerate geometry R1 + R2 = L (zero stiffness denominator)")
    pref = 2.0 * intracavity_power / (C_LIGHT * denom)
    off = pref * r1 * r2
    return np.array(
        [[pref * r1 * (length - r2), off], [off, pref * r2 * (length - r1)]]
    )


@dataclass(frozen=True)
class StiffnessSystem:
    """Assembled matrices of the 2x2 rotational eigenproblem."""

    k_opt: np.ndarray    # 2x2 symmetric, N m/rad
    k_mech: np.ndarray   # 2x2 diagonal, N m/rad
    inertia: np.ndarray  # 2x2 diagonal, kg m^2
    beta: float          # N m/rad
    g1: float
    g2: float

    def __post_init__(self):
        if self.k_opt[0, 1] != self.k_opt[1, 0]:
            raise ValueError("k_opt must be exactly symmetric")
        if not (self.inertia[0, 0] > 0 and self.inertia[1, 1] > 0):
            raise ValueError("inertia diagonal must be strictly positive")
        scale = max(abs(self.beta), abs(self.k_opt).max(), 1e-300)
        expected = np.array(
            [[-self.beta * self.g2, self.beta], [self.beta, -self.beta * self.g1]]
        )
        if np.abs(self.k_opt - expected).max() > 1e-9 * scale:
            raise ValueError("k_opt is inconsistent with beta and the g factors")

    @property
    def k_total(self) -> np.ndarray:
        return self.k_opt + self.k_mech


def build_stiffness(system: CavitySystem, intracavity_power: float) -> StiffnessSystem:
    """Assemble the stiffness system for a cavity at a given circulating power."""
    i1 = system.mirror1.yaw_moment_of_inertia
    i2 = system.mirror2.yaw_moment_of_inertia
    k1 = system.suspension1.stiffness(i1)
    k2 = system.suspension2.stiffness(i2)
    return StiffnessSystem(
        k_opt=optical_stiffness(system, intracavity_power),
        k_mech=np.diag([k1, k2]),
        inertia=np.diag([i1, i2]),
        beta=beta(system, intracavity_power),
        g1=system.g1,
        g2=system.g2,
    )


def _signed_sqrt(x: float) -> float:
    return math.copysign(math.sqrt(abs(x)), x)


@dataclass(frozen=True)
class ModeFrequency:
    """A squared angular frequency; negative values mark unstable modes."""

    omega_squared: float  # rad^2/s^2

    @property
    def stable(self) -> bool:
        return self.omega_squared > 0.0

    @property
    def angular_frequency(self) -> float:
        """rad/s; only defined for a stable mode."""
        if not self.stable:
            raise ValueError(f"mode is unstable (omega^2 = {self.omega_squared})")
        return math.sqrt(self.omega_squared)

    @property
    def signed_angular_frequency(self) -> float:
        """sign(omega^2) sqrt(|omega^2|), the plotting convention for instability."""
        return _signed_sqrt(self.omega_squared)

    @property
    def signed_frequency_hz(self) -> float:
        return self.signed_angular_frequency / (2.0 * math.pi)


@dataclass(frozen=True)
class Mode(ModeFrequency):
    """One eigenmode of the coupled yaw system."""

    eigenvector: tuple[float, float] = (1.0, 0.0)
    label: str = DIFFERENTIAL


@dataclass(frozen=True)
class ModeSolution:
    """Both eigenmodes, addressable by label."""

    differential: Mode
    common: Mode

    @property
    def modes(self) -> tuple[Mode, Mode]:
        return (self.differential, self.common)

    @property
    def stable(self) -> bool:
        return self.differential.stable and self.common.stable


def _mirror1_weight(vector, inertia_diag) -> float:
    # Fraction of the mode's inertia-weighted motion carried by mirror 1.
    # The two eigenvectors' fractions sum to exactly 1, so comparing them
    # always separates a test-mass-dominated mode from the other.
    v1, v2 = vector
    w1 = inertia_diag[0] * v1 * v1
    w2 = inertia_diag[1] * v2 * v2
    return w1 / (w1 + w2)


def solve_modes(stiffness: StiffnessSystem) -> ModeSolution:
    """Exact eigenmodes of (K_opt + K_mech) v = omega^2 I v.

    The symmetric pencil is reduced with I^(-1/2) so the eigenvalues are
    real by construction; unstable modes come out as negative omega^2.

    The test-mass-dominated mode (larger inertia-weighted mirror-1 share)
    is labeled differential and the other common, which reduces to
    "mirrors rotating in the same direction = differential" once the
    trapped differential mode sits above the common one. Perfectly mixed
    modes fall back to that rotation-direction rule directly.
    """
    k = stiffness.k_total
    if not np.all(np.isfinite(k)):
        raise ValueError("non-finite stiffness matrix entries")
    inv_sqrt_i = np.diag(1.0 / np.sqrt(np.diag(stiffness.inertia)))
    reduced = inv_sqrt_i @ k @ inv_sqrt_i
    reduced = 0.5 * (reduced + reduced.T)
    omega_sq, u = np.linalg.eigh(reduced)
    vectors = inv_sqrt_i @ u

    inertia_diag = np.diag(stiffness.inertia)
    pair = []
    for idx in range(2):
        v = vectors[:, idx]
        v = v / np.max(np.abs(v))
        pair.append((float(omega_sq[idx]), (float(v[0]), float(v[1]))))

    weights = [_mirror1_weight(vec, inertia_diag) for _, vec in pair]
    if weights[0] != weights[1]:
        first_differential = weights[0] > weights[1]
    else:
        v1, v2 = pair[0][1]
        first_differential = v1 * v2 > 0  # same rotation direction
    labels = (DIFFERENTIAL, COMMON) if first_differential else (COMMON, DIFFERENTIAL)

    modes = {
        label: Mode(omega_squared=w2, eigenvector=vec, label=label)
        for label, (w2, vec) in zip(labels, pair)
    }
    return ModeSolution(differential=modes[DIFFERENTIAL], common=modes[COMMON])


def approx_differential_frequency(stiffness: StiffnessSystem) -> ModeFrequency:
    """Reduced light-mirror formula omega_diff^2 = (K1 - beta g2) / I1.

    Valid in the I1 << I2, K1 << K2 regime; the formula is evaluated
    regardless and a negative result marks the instability.
    """
    radicand = (stiffness.k_mech[0, 0] - stiffness.beta * stiffness.g2) / stiffness.inertia[0, 0]
    return ModeFrequency(omega_squared=float(radicand))


def approx_common_frequency(stiffness: StiffnessSystem) -> ModeFrequency:
    """Reduced heavy-mirror formula omega_com^2 = (K2 + beta (1 - g^2)/g) / I2.

    Only defined for identical mirror curvatures g1 = g2 = g with g != 0.
    """
    g1, g2 = stiffness.g1, stiffness.g2
    if g1 != g2:
        raise ValueError(f"common-mode formula requires g1 = g2, got {g1} and {g2}")
    if g1 == 0.0:
        raise ValueError("common-mode formula is singular at g = 0")
    radicand = (
        stiffness.k_mech[1, 1] + stiffness.beta * (1.0 - g1 * g1) / g1
    ) / stiffness.inertia[1, 1]
    return ModeFrequency(omega_squared=float(radicand))


@dataclass(frozen=True)
class SweepPoint:
    """Power-sweep entry: a mode solution or the error that prevented one."""

    power: float
    solution: ModeSolution | None = None
    error: str | None = None


def power_sweep(system: CavitySystem, powers) -> list[SweepPoint]:
    """Exact 2x2 mode solutions over a list of intracavity powers.

    Per-point failures are recorded in the output rather than aborting
    the sweep. Points are independent; evaluation order does not matter.
    """

    def solve_one(power):
        try:
            if not math.isfinite(power) or power < 0:
                raise ValueError(f"power must be finite and nonnegative, got {power}")
            return SweepPoint(power=power, solution=solve_modes(build_stiffness(system, power)))
        except ValueError as exc:
            return SweepPoint(power=power, error=str(exc))

    return parallel_map(solve_one, list(powers))


@dataclass(frozen=True)
class CriticalPower:
    """Power at which one mode's squared frequency crosses zero."""

    power: float  # W
    label: str


def _sorted_omega_squared(system, power):
    st = build_stiffness(system, power)
    inv_sqrt_i = np.diag(1.0 / np.sqrt(np.diag(st.inertia)))
    reduced = inv_sqrt_i @ st.k_total @ inv_sqrt_i
    return np.linalg.eigvalsh(0.5 * (reduced + reduced.T))


def critical_powers(
    system: CavitySystem,
    p_max: float,
    points_per_decade: int = CRITICAL_GRID_POINTS_PER_DECADE,
    relative_tolerance: float = 1e-6,
) -> list[CriticalPower]:
    """Zero crossings of the exact squared eigenfrequencies in (0, p_max].

    Each sorted eigenvalue branch is scanned on a log power grid and any
    sign change is refined by bisection to the requested relative
    tolerance in power. An empty list means no mode changes stability.
    """
    if p_max <= 0:
        raise ValueError(f"p_max must be positive, got {p_max}")
    p_min = min(CRITICAL_GRID_FLOOR, p_max / 10.0)
    n_points = max(2, int(math.ceil(points_per_decade * math.log10(p_max / p_min))) + 1)
    grid = np.logspace(math.log10(p_min), math.log10(p_max), n_points)
    levels = np.array([_sorted_omega_squared(system, p) for p in grid])

    found = []
    for branch in range(2):
        f = levels[:, branch]
        for i in range(len(grid) - 1):
            if f[i] == 0.0:
                found.append(grid[i])
                continue
            if f[i] * f[i + 1] < 0.0:
                lo, hi = grid[i], grid[i + 1]
                f_lo = f[i]
                while (hi - lo) > relative_tolerance * hi:
                    mid = 0.5 * (lo + hi)
                    f_mid = _sorted_omega_squared(system, mid)[branch]
                    if f_mid == 0.0:
                        lo = hi = mid
                        break
                    if (f_mid > 0) == (f_lo > 0):
                        lo, f_lo = mid, f_mid
                    else:
                        hi = mid
                found.append(0.5 * (lo + hi))

    found.sort()
    results = []
    for p in found:
        if results and abs(p - results[-1].power) <= 10 * relative_tolerance * p:
            continue  # same root seen from both branches
        solution = solve_modes(build_stiffness(system, p))
        crossing = min(solution.modes, key=lambda m: abs(m.omega_squared))
        results.append(CriticalPower(power=float(p), label=crossing.label))
    return results
