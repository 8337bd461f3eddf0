"""Command-line front end.

Subcommands read one config file, run an analysis, and emit CSV/JSON for
external plotting. Exit codes: 0 success, 2 configuration or usage
problem, 3 numerical failure during an analysis.

Analysis CSV/JSON numbers are formatted in scientific notation with 9
significant digits, so identical configs give byte-identical outputs.
Transfer-function data files keep full double precision instead, so they
round-trip through the reader exactly.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import dynamics, noise, response
from .config import (
    ConfigError,
    FIG2_NEGATIVE_TEXT,
    FIG2_POSITIVE_TEXT,
    RunConfig,
    TABLE_DEFAULT_TEXT,
    load_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SELFTEST_PARAMS = (2.0, 0.05, 1.0)  # f0 Hz, zeta, gain
SELFTEST_TOLERANCE = 1e-6


def _fmt(value: float) -> str:
    return f"{value:.8e}"


def _quantize(value):
    """Round floats through the 9-significant-digit format for stable JSON."""
    if isinstance(value, dict):
        return {key: _quantize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_quantize(item) for item in value]
    if isinstance(value, bool):
        return value
    if isinstance(value, (float, np.floating)):
        return float(_fmt(float(value)))
    return value


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return path


def _write_json(out_dir, name, payload):
    return _write(out_dir, name, json.dumps(_quantize(payload), indent=2, sort_keys=True) + "\n")


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("a config file is required (--config PATH)")
    return load_config(args.config)


def _signed_hz(mode) -> float:
    return mode.signed_frequency_hz


def cmd_stability(args) -> int:
    config = _load(args)
    powers = config.stability.power_grid()
    sweep = dynamics.power_sweep(config.system, powers)

    lines = ["power_w,f_diff_hz,f_com_hz"]
    for point in sweep:
        if point.error is not None:
            raise ArithmeticError(f"power sweep failed at {point.power} W: {point.error}")
        lines.append(
            f"{_fmt(point.power)},"
            f"{_fmt(_signed_hz(point.solution.differential))},"
            f"{_fmt(_signed_hz(point.solution.common))}"
        )
    csv_path = _write(args.out, "stability.csv", "\n".join(lines) + "\n")

    criticals = dynamics.critical_powers(config.system, config.stability.power_max)
    payload = {
        "power_max_w": config.stability.power_max,
        "critical_powers": [{"power_w": c.power, "mode": c.label} for c in criticals],
    }
    json_path = _write_json(args.out, "critical_powers.json", payload)
    print(csv_path)
    print(json_path)
    return EXIT_OK


def cmd_modes(args) -> int:
    config = _load(args)
    power = args.power if args.power is not None else config.modes.power
    st = dynamics.build_stiffness(config.system, power)
    solution = dynamics.solve_modes(st)
    approx_diff = dynamics.approx_differential_frequency(st)
    try:
        approx_com = dynamics.approx_common_frequency(st)
        approx_com_payload = {
            "stable": approx_com.stable,
            "signed_frequency_hz": approx_com.signed_frequency_hz,
        }
    except ValueError as exc:
        approx_com_payload = {"error": str(exc)}

    def mode_payload(mode):
        return {
            "label": mode.label,
            "stable": mode.stable,
            "omega_squared": mode.omega_squared,
            "signed_frequency_hz": mode.signed_frequency_hz,
            "eigenvector": list(mode.eigenvector),
        }

    diff_exact = solution.differential.signed_frequency_hz
    diff_approx = approx_diff.signed_frequency_hz
    payload = {
        "intracavity_power_w": power,
        "exact": {
            "differential": mode_payload(solution.differential),
            "common": mode_payload(solution.common),
        },
        "approximate": {
            "differential": {
                "stable": approx_diff.stable,
                "signed_frequency_hz": diff_approx,
            },
            "common": approx_com_payload,
        },
        "differential_relative_difference": (
            abs(diff_approx - diff_exact) / abs(diff_exact) if diff_exact != 0 else None
        ),
    }
    print(_write_json(args.out, "modes.json", payload))
    return EXIT_OK


def _run_selftest() -> int:
    f0, zeta, gain = SELFTEST_PARAMS
    freqs = np.logspace(math.log10(0.2), math.log10(20.0), 200)
    mag = response.resonance_magnitude(freqs, f0, zeta, gain)
    data = response.TransferFunctionData(frequencies=freqs, response=mag.astype(complex))
    fit = response.fit_resonance(data)
    worst = max(
        abs(fit.resonant_frequency - f0) / f0,
        abs(fit.damping_ratio - zeta) / zeta,
        abs(fit.gain - gain) / gain,
    )
    print(f"selftest: recovered (f0, zeta, gain) to relative {worst:.3e}")
    if worst >= SELFTEST_TOLERANCE or not fit.converged:
        print("selftest FAILED", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_tf(args) -> int:
    if args.selftest:
        return _run_selftest()
    config = _load(args)
    power = args.power if args.power is not None else config.tf.power
    freqs = config.tf.frequency_grid()
    data = response.synthesize_response(config.system, power, freqs)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "tf_synth.csv")
    response.write_tf_csv(csv_path, data)
    print(csv_path)

    if args.fit:
        records = []
        for path in args.fit:
            measured = response.load_tf_csv(path)
            fit = response.fit_resonance(measured)
            sigmas = fit.sigmas
            records.append(
                {
                    "input": str(path),
                    "resonant_frequency_hz": fit.resonant_frequency,
                    "damping_ratio": fit.damping_ratio,
                    "gain": fit.gain,
                    "sigma_frequency_hz": sigmas[0],
                    "sigma_damping_ratio": sigmas[1],
                    "sigma_gain": sigmas[2],
                    "residual_norm": fit.residual_norm,
                    "converged": fit.converged,
                    "iterations": fit.iterations,
                }
            )
        print(_write_json(args.out, "tf_fits.json", {"fits": records}))
    return EXIT_OK


def cmd_noise(args) -> int:
    config = _load(args)
    system = config.system
    if args.power is not None:
        from dataclasses import replace

        system = replace(system, intracavity_power=args.power)
    grid = config.noise.frequency_grid()
    budget = noise.total_budget(system, config.env, grid)

    labels = [curve.label for curve in budget.sources]
    lines = ["freq_hz," + ",".join(labels) + ",classical_total,qrpn"]
    for idx in range(budget.frequencies.size):
        row = [_fmt(budget.frequencies[idx])]
        row += [_fmt(curve.asd[idx]) for curve in budget.sources]
        row.append(_fmt(budget.classical_total.asd[idx]))
        row.append(_fmt(budget.qrpn.asd[idx]))
        lines.append(",".join(row))
    csv_path = _write(args.out, "noise_budget.csv", "\n".join(lines) + "\n")

    bands = noise.dominance_band(budget)
    payload = {
        "intracavity_power_w": system.resolved_intracavity_power,
        "mode_matching_efficiency": system.mode_matching_efficiency,
        "dominance_bands_hz": [{"low": lo, "high": hi} for lo, hi in bands],
        "formula_ids": budget.formula_ids,
    }
    json_path = _write_json(args.out, "dominance_band.json", payload)
    print(csv_path)
    print(json_path)
    return EXIT_OK


def cmd_paper_defaults(args) -> int:
    written = [
        _write(args.out, "table1.cfg", TABLE_DEFAULT_TEXT),
        _write(args.out, "fig2_negative_g.cfg", FIG2_NEGATIVE_TEXT),
        _write(args.out, "fig2_positive_g.cfg", FIG2_POSITIVE_TEXT),
    ]
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsl",
        description="Yaw stability, transfer-function, and noise analysis "
        "of a two-mirror suspended cavity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--power", type=float, help="override intracavity power, W")

    p_stab = sub.add_parser("stability", help="power sweep and critical powers")
    common(p_stab)
    p_stab.set_defaults(func=cmd_stability)

    p_modes = sub.add_parser("modes", help="single-point mode report")
    common(p_modes)
    p_modes.set_defaults(func=cmd_modes)

    p_tf = sub.add_parser("tf", help="synthesize and fit transfer functions")
    common(p_tf)
    p_tf.add_argument("--fit", action="append", default=[], help="measured TF CSV (repeatable)")
    p_tf.add_argument("--selftest", action="store_true", help="round-trip fit self-test")
    p_tf.set_defaults(func=cmd_tf)

    p_noise = sub.add_parser("noise", help="displacement-noise budget and dominance band")
    common(p_noise)
    p_noise.set_defaults(func=cmd_noise)

    p_defaults = sub.add_parser(
        "paper-defaults", help="write the built-in reference configurations"
    )
    p_defaults.add_argument("--out", default=".", help="output directory (default: .)")
    p_defaults.set_defaults(func=cmd_paper_defaults)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
