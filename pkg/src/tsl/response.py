"""Torque-to-spot transfer functions: synthesis, resonance fitting, power trends.

The measured quantity is the frequency response from a drive torque on
the heavy input mirror to the beam-spot motion on the test mass. The
synthesized response solves the coupled 2x2 yaw system with structural
damping on the suspensions; the fit extracts resonant frequency, damping
ratio, and gain from the response magnitude alone (phase is produced for
display but excluded from the objective). The fit's viscous-style zeta
maps to the structural model as zeta ~ 1/(2Q) near resonance.
"""

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import build_stiffness, solve_modes
from .spots import spot_response_matrix
from .system import CavitySystem

MIN_FIT_POINTS = 4
MAX_FIT_ITERATIONS = 200
FIT_STEP_TOLERANCE = 1e-8
TF_CSV_HEADER = "freq_hz,mag_db,phase_deg"


@dataclass(frozen=True)
class TransferFunctionData:
    """Sampled complex frequency response with optional magnitude errors."""

    frequencies: np.ndarray       # Hz, strictly increasing
    response: np.ndarray          # dimensionless complex
    magnitude_sigma: np.ndarray | None = None  # same shape, linear units

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        h = np.asarray(self.response, dtype=complex)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "response", h)
        if f.ndim != 1 or h.shape != f.shape:
            raise ValueError("frequencies and response must be matching 1-d arrays")
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ValueError("frequencies must be positive and finite")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if self.magnitude_sigma is not None:
            s = np.asarray(self.magnitude_sigma, dtype=float)
            object.__setattr__(self, "magnitude_sigma", s)
            if s.shape != f.shape or np.any(s <= 0):
                raise ValueError("magnitude_sigma must be positive and match the grid")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.response)

    @property
    def phase_deg(self) -> np.ndarray:
        return np.degrees(np.angle(self.response))


def synthesize_response(
    system: CavitySystem, intracavity_power: float, frequencies
) -> TransferFunctionData:
    """Spot-1 response per unit drive torque on mirror 2.

    Solves the frequency-domain yaw system with structurally damped
    suspensions, K_i -> K_i (1 + i/Q_i), for the drive vector (0, T2) and
    reads out the test-mass beam spot. Rejects operating points where
    either rotational mode is unstable.
    """
    st = build_stiffness(system, intracavity_power)
    solution = solve_modes(st)
    for mode in solution.modes:
        if not mode.stable:
            raise ValueError(
                f"{mode.label} mode is unstable at {intracavity_power} W "
                f"(omega^2 = {mode.omega_squared:.3e}); no steady-state response"
            )

    f = np.asarray(list(frequencies), dtype=float)
    if f.ndim != 1 or f.size == 0 or np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValueError("frequencies must be a nonempty 1-d array of finite values >= 0")

    k1 = st.k_mech[0, 0] * (1.0 + 1j / system.suspension1.quality_factor)
    k2 = st.k_mech[1, 1] * (1.0 + 1j / system.suspension2.quality_factor)
    spot_row = spot_response_matrix(system)[0]

    response = np.empty(f.size, dtype=complex)
    for idx, freq in enumerate(f):
        omega_sq = (2.0 * math.pi * freq) ** 2
        m = np.array(
            [
                [k1 - st.beta * st.g2 - st.inertia[0, 0] * omega_sq, st.beta],
                [st.beta, k2 - st.beta * st.g1 - st.inertia[1, 1] * omega_sq],
            ],
            dtype=complex,
        )
        alpha = np.linalg.solve(m, np.array([0.0, 1.0]))
        response[idx] = spot_row @ alpha
    return TransferFunctionData(frequencies=f, response=response)


@dataclass(frozen=True)
class ResonanceFit:
    """Single-resonance magnitude fit |H| = A / sqrt((f0^2-f^2)^2 + (2 zeta f0 f)^2)."""

    resonant_frequency: float  # Hz
    damping_ratio: float
    gain: float
    covariance: np.ndarray     # 3x3 over (f0, zeta, A)
    residual_norm: float
    converged: bool
    iterations: int
    cost_history: tuple[float, ...] = ()

    @property
    def sigmas(self) -> tuple[float, float, float]:
        d = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return (float(d[0]), float(d[1]), float(d[2]))


def resonance_magnitude(f, f0: float, zeta: float, gain: float):
    """The fit model evaluated on a frequency array."""
    f = np.asarray(f, dtype=float)
    return gain / np.sqrt((f0**2 - f**2) ** 2 + (2.0 * zeta * f0 * f) ** 2)


def _model_jacobian(f, f0, zeta, gain):
    d = (f0**2 - f**2) ** 2 + (2.0 * zeta * f0 * f) ** 2
    m = gain / np.sqrt(d)
    dd_df0 = 4.0 * f0 * (f0**2 - f**2) + 8.0 * zeta**2 * f0 * f**2
    dd_dzeta = 8.0 * zeta * f0**2 * f**2
    dm_df0 = -0.5 * gain * d ** (-1.5) * dd_df0
    dm_dzeta = -0.5 * gain * d ** (-1.5) * dd_dzeta
    dm_dgain = m / gain
    return m, np.column_stack([dm_df0, dm_dzeta, dm_dgain])


def _seed_parameters(f, y):
    peak = int(np.argmax(y))
    f0 = f[peak]
    y_peak = y[peak]
    # half-power bandwidth estimate for zeta, falling back to 0.05
    target = y_peak / math.sqrt(2.0)
    above = y >= target
    lo = peak
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = peak
    while hi < len(f) - 1 and above[hi + 1]:
        hi += 1
    if hi > lo and 0 < lo and hi < len(f) - 1:
        zeta = max(1e-4, (f[hi] - f[lo]) / (2.0 * f0))
    else:
        zeta = 0.05
    gain = y_peak * 2.0 * zeta * f0**2
    return np.array([f0, zeta, gain])


def fit_resonance(
    data: TransferFunctionData, initial_guess: ResonanceFit | None = None
) -> ResonanceFit:
    """Damped Gauss-Newton fit of the response magnitude.

    Seeds from the magnitude peak unless a guess is supplied; the damping
    factor is raised whenever a step would increase the objective or push
    a parameter nonpositive, so accepted steps decrease the cost
    monotonically. Converges when the relative step falls below 1e-8;
    otherwise returns the best iterate flagged as not converged.
    Covariance comes from the Jacobian at the optimum: (J^T J)^-1 scaled
    by the residual variance for unweighted data, unscaled for data with
    per-point magnitude errors.
    """
    f = data.frequencies
    y = data.magnitude
    if f.size < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} points to fit, got {f.size}")
    if np.all(y == y[0]):
        raise ValueError("degenerate data: all magnitudes equal")
    weighted = data.magnitude_sigma is not None
    w = 1.0 / data.magnitude_sigma if weighted else np.ones_like(y)

    if initial_guess is not None:
        theta = np.array(
            [initial_guess.resonant_frequency, initial_guess.damping_ratio, initial_guess.gain],
            dtype=float,
        )
    else:
        theta = _seed_parameters(f, y)

    def cost_and_parts(params):
        m, jac = _model_jacobian(f, *params)
        r = w * (y - m)
        return float(r @ r), r, w[:, None] * jac

    cost, r, jac = cost_and_parts(theta)
    history = [cost]
    mu = 1e-3
    converged = False
    iterations = 0
    while iterations < MAX_FIT_ITERATIONS:
        iterations += 1
        jtj = jac.T @ jac
        jtr = jac.T @ r
        accepted = False
        for _ in range(50):
            try:
                step = np.linalg.solve(jtj + mu * np.diag(np.diag(jtj)), jtr)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            candidate = theta + step
            if np.any(candidate <= 0):
                mu *= 10.0
                continue
            new_cost, new_r, new_jac = cost_and_parts(candidate)
            if new_cost <= cost:
                accepted = True
                break
            mu *= 10.0
        if not accepted:
            break
        rel_step = float(np.max(np.abs(step) / np.abs(theta)))
        theta, cost, r, jac = candidate, new_cost, new_r, new_jac
        history.append(cost)
        mu = max(mu / 10.0, 1e-15)
        if rel_step < FIT_STEP_TOLERANCE:
            converged = True
            break

    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.inf)
    if not weighted:
        dof = max(f.size - 3, 1)
        cov = cov * (cost / dof)

    return ResonanceFit(
        resonant_frequency=float(theta[0]),
        damping_ratio=float(theta[1]),
        gain=float(theta[2]),
        covariance=cov,
        residual_norm=math.sqrt(cost),
        converged=converged,
        iterations=iterations,
        cost_history=tuple(history),
    )


@dataclass(frozen=True)
class PowerPoint:
    """One measured operating point: intracavity power with its fit."""

    power: float        # W
    power_sigma: float  # W, symmetric error bar as supplied by the user
    fit: ResonanceFit


@dataclass(frozen=True)
class PowerComparison:
    """Fitted frequency against the reduced-formula prediction band."""

    power: float
    power_sigma: float
    fitted_frequency: float
    fitted_sigma: float
    predicted_low: float   # Hz
    predicted_high: float  # Hz
    contained: bool


def differential_prediction_band(
    system: CavitySystem,
    power: float,
    length_uncertainty: float,
    power_scale_uncertainty: float,
) -> tuple[float, float]:
    """Interval of the reduced differential frequency over parameter corners.

    Evaluates omega_diff at the corners (and center) of the cavity-length
    interval and of a relative power-scale interval standing in for the
    reflectivity/finesse uncertainty of the power calibration.
    """
    from .dynamics import approx_differential_frequency

    values = []
    for dl in (-length_uncertainty, 0.0, length_uncertainty):
        varied = replace(system, length=system.length + dl)
        for scale in (1.0 - power_scale_uncertainty, 1.0, 1.0 + power_scale_uncertainty):
            st = build_stiffness(varied, scale * power)
            mode = approx_differential_frequency(st)
            values.append(mode.signed_frequency_hz)
    return (min(values), max(values))


def frequency_vs_power_curve(
    system: CavitySystem,
    points: list[PowerPoint],
    length_uncertainty: float = 3e-3,
    power_scale_uncertainty: float = 0.1,
) -> list[PowerComparison]:
    """Compare fitted resonant frequencies with the predicted band per point."""
    if not points:
        raise ValueError("need at least one fitted point")
    rows = []
    for point in points:
        lo, hi = differential_prediction_band(
            system, point.power, length_uncertainty, power_scale_uncertainty
        )
        f_fit = point.fit.resonant_frequency
        rows.append(
            PowerComparison(
                power=point.power,
                power_sigma=point.power_sigma,
                fitted_frequency=f_fit,
                fitted_sigma=point.fit.sigmas[0],
                predicted_low=lo,
                predicted_high=hi,
                contained=lo <= f_fit <= hi,
            )
        )
    return rows


def load_tf_csv(path) -> TransferFunctionData:
    """Read a transfer-function CSV: freq_hz,mag_db,phase_deg[,mag_sigma_db].

    Rows are sorted by frequency; duplicated frequencies and malformed
    rows are rejected with the offending value or line number.
    """
    rows = []
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = [col.strip() for col in lines[0].split(",")]
    if header[:3] != ["freq_hz", "mag_db", "phase_deg"]:
        raise ValueError(f"{path}: line 1: expected header '{TF_CSV_HEADER}[,mag_sigma_db]'")
    has_sigma = len(header) == 4 and header[3] == "mag_sigma_db"
    if len(header) > 3 and not has_sigma:
        raise ValueError(f"{path}: line 1: unrecognized extra columns {header[3:]}")
    expected = 4 if has_sigma else 3

    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != expected:
            raise ValueError(f"{path}: line {number}: expected {expected} columns, got {len(parts)}")
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"{path}: line {number}: non-numeric field") from None
        rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")

    rows.sort(key=lambda row: row[0])
    freqs = np.array([row[0] for row in rows])
    duplicates = freqs[1:][np.diff(freqs) == 0]
    if duplicates.size:
        raise ValueError(f"{path}: duplicated frequency {duplicates[0]!r} Hz")

    mag = 10.0 ** (np.array([row[1] for row in rows]) / 20.0)
    phase = np.radians(np.array([row[2] for row in rows]))
    response = mag * np.exp(1j * phase)
    sigma = None
    if has_sigma:
        # symmetric small-dB error mapped to linear: sigma ~ mag * ln(10)/20 * sigma_db
        sigma_db = np.array([row[3] for row in rows])
        sigma = mag * (math.log(10.0) / 20.0) * sigma_db
    return TransferFunctionData(frequencies=freqs, response=response, magnitude_sigma=sigma)


def write_tf_csv(path, data: TransferFunctionData) -> None:
    """Write the CSV form read back by load_tf_csv (full double precision)."""
    has_sigma = data.magnitude_sigma is not None
    header = TF_CSV_HEADER + (",mag_sigma_db" if has_sigma else "")
    lines = [header]
    mag = data.magnitude
    phase = data.phase_deg
    for idx in range(data.frequencies.size):
        mag_db = 20.0 * math.log10(mag[idx])
        row = f"{data.frequencies[idx]:.16e},{mag_db:.16e},{phase[idx]:.16e}"
        if has_sigma:
            sigma_db = data.magnitude_sigma[idx] / mag[idx] * 20.0 / math.log(10.0)
            row += f",{sigma_db:.16e}"
        lines.append(row)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
