"""Run configuration: flat sectioned key-value files with explicit units.

The format is deliberately auditable against a published parameter table:
one [section] per physical block, `key = value unit` lines, `#` comments.
Parsing validates every module precondition it can check statically, so
an analysis never starts from an inconsistent description.
"""

import configparser
import io
import math
from dataclasses import dataclass, field, fields

from .materials import MATERIALS, material_name
from .system import CavitySystem, MirrorSpec, SuspensionSpec
from .noise import EnvSpec


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


_UNIT_FACTORS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9},
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6},
    "power": {"W": 1.0, "kW": 1e3, "mW": 1e-3, "uW": 1e-6},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "mHz": 1e-3},
    "temperature": {"K": 1.0},
    "pressure": {"Pa": 1.0, "mPa": 1e-3},
    "inertia": {"kg*m^2": 1.0},
    "stiffness": {"N*m/rad": 1.0},
}


def _parse_quantity(raw: str, dimension: str, key: str) -> float:
    """Parse '110 mm' style values; dimensionless values take no unit."""
    parts = raw.split()
    if dimension == "dimensionless":
        if len(parts) == 1 and parts[0].endswith("%"):
            parts = [parts[0][:-1], "%"]
        if len(parts) == 2 and parts[1] == "%":
            try:
                return float(parts[0]) / 100.0
            except ValueError:
                raise ConfigError(f"{key}: cannot parse number {parts[0]!r}") from None
        if len(parts) != 1:
            raise ConfigError(f"{key}: expected a bare number, got {raw!r}")
        try:
            return float(parts[0])
        except ValueError:
            raise ConfigError(f"{key}: cannot parse number {raw!r}") from None
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected '<number> <unit>', got {raw!r}")
    number, unit = parts
    factors = _UNIT_FACTORS[dimension]
    if unit not in factors:
        raise ConfigError(
            f"{key}: unknown {dimension} unit {unit!r} (expected one of {sorted(factors)})"
        )
    try:
        return float(number) * factors[unit]
    except ValueError:
        raise ConfigError(f"{key}: cannot parse number {number!r}") from None


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


@dataclass(frozen=True)
class StabilityBlock:
    power_min: float = 1e-3   # W
    power_max: float = 1e5    # W
    points_per_decade: int = 60

    def power_grid(self):
        if self.power_max <= self.power_min or self.points_per_decade < 1:
            raise ConfigError(
                "stability.power_max must exceed stability.power_min with at least "
                "one point per decade (empty power grid)"
            )
        decades = math.log10(self.power_max / self.power_min)
        n = max(2, int(round(self.points_per_decade * decades)) + 1)
        ratio = (self.power_max / self.power_min) ** (1.0 / (n - 1))
        return [self.power_min * ratio**i for i in range(n)]


@dataclass(frozen=True)
class NoiseBlock:
    freq_min: float = 10.0    # Hz
    freq_max: float = 1e4     # Hz
    points_per_decade: int = 100

    def frequency_grid(self):
        if self.freq_max <= self.freq_min or self.points_per_decade < 1:
            raise ConfigError("noise.freq_max must exceed noise.freq_min (empty grid)")
        decades = math.log10(self.freq_max / self.freq_min)
        n = max(2, int(round(self.points_per_decade * decades)) + 1)
        ratio = (self.freq_max / self.freq_min) ** (1.0 / (n - 1))
        return [self.freq_min * ratio**i for i in range(n)]


@dataclass(frozen=True)
class TfBlock:
    power: float = 1.0      # W intracavity, drive operating point
    freq_min: float = 0.2   # Hz
    freq_max: float = 20.0  # Hz
    points: int = 200

    def frequency_grid(self):
        if self.freq_max <= self.freq_min or self.points < 2:
            raise ConfigError("tf block must define an increasing grid of >= 2 points")
        ratio = (self.freq_max / self.freq_min) ** (1.0 / (self.points - 1))
        return [self.freq_min * ratio**i for i in range(self.points)]


@dataclass(frozen=True)
class ModesBlock:
    power: float = 0.0  # W intracavity


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs: the cavity, environment, and analysis grids."""

    system: CavitySystem
    env: EnvSpec = field(default_factory=EnvSpec)
    stability: StabilityBlock = field(default_factory=StabilityBlock)
    noise: NoiseBlock = field(default_factory=NoiseBlock)
    tf: TfBlock = field(default_factory=TfBlock)
    modes: ModesBlock = field(default_factory=ModesBlock)


_MIRROR_FIELDS = {
    "mass": ("mass", "mass"),
    "radius": ("length", "radius"),
    "thickness": ("length", "thickness"),
    "radius_of_curvature": ("length", "radius_of_curvature"),
    "power_reflectivity": ("dimensionless", "power_reflectivity"),
    "yaw_inertia": ("inertia", "yaw_inertia"),
}

_SUSPENSION_FIELDS = {
    "quality_factor": ("dimensionless", "quality_factor"),
    "pendulum_frequency": ("frequency", "pendulum_frequency"),
    "yaw_resonance": ("frequency", "yaw_resonance"),
    "rotational_stiffness": ("stiffness", "rotational_stiffness"),
}


def _section_dict(parser, name):
    if not parser.has_section(name):
        raise ConfigError(f"missing required section [{name}]")
    return dict(parser.items(name))


def _pop(values, section, key, dimension, default=None, required=False):
    full_key = f"{section}.{key}"
    if key not in values:
        if required:
            raise ConfigError(f"{full_key} is required")
        return default
    return _parse_quantity(values.pop(key), dimension, full_key)


def _reject_leftovers(values, section):
    if values:
        raise ConfigError(f"unknown key {section}.{sorted(values)[0]}")


def _parse_material(values, section, key):
    full_key = f"{section}.{key}"
    name = values.pop(key, None)
    if name is None:
        raise ConfigError(f"{full_key} is required")
    name = name.strip()
    if name not in MATERIALS:
        raise ConfigError(f"{full_key}: unknown material {name!r} (built in: {sorted(MATERIALS)})")
    return MATERIALS[name]


def _parse_mirror(parser, section) -> MirrorSpec:
    values = _section_dict(parser, section)
    substrate = _parse_material(values, section, "substrate")
    coat_low = _parse_material(values, section, "coat_low")
    coat_high = _parse_material(values, section, "coat_high")
    flat = _parse_bool(values.pop("flat"), f"{section}.flat") if "flat" in values else False
    kwargs = {}
    for key, (dimension, attr) in _MIRROR_FIELDS.items():
        required = attr in ("mass", "radius", "thickness", "power_reflectivity") or (
            attr == "radius_of_curvature" and not flat
        )
        value = _pop(values, section, key, dimension, required=required)
        if value is not None:
            kwargs[attr] = value
    if flat:
        kwargs.setdefault("radius_of_curvature", math.inf)
    _reject_leftovers(values, section)
    try:
        return MirrorSpec(
            substrate=substrate, coat_low=coat_low, coat_high=coat_high, flat=flat, **kwargs
        )
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def _parse_suspension(parser, section) -> SuspensionSpec:
    values = _section_dict(parser, section)
    kwargs = {}
    for key, (dimension, attr) in _SUSPENSION_FIELDS.items():
        required = attr in ("quality_factor", "pendulum_frequency")
        value = _pop(values, section, key, dimension, required=required)
        if value is not None:
            if dimension == "frequency":
                value *= 2.0 * math.pi  # config files carry Hz, the model uses rad/s
            kwargs[attr] = value
    _reject_leftovers(values, section)
    try:
        return SuspensionSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def _parse_block(parser, section, block_cls, spec):
    if not parser.has_section(section):
        return block_cls()
    values = dict(parser.items(section))
    kwargs = {}
    for key, (dimension, cast) in spec.items():
        if key in values:
            value = _parse_quantity(values.pop(key), dimension, f"{section}.{key}")
            kwargs[key] = cast(value)
    _reject_leftovers(values, section)
    try:
        return block_cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None

    known = {
        "mirror1", "mirror2", "suspension1", "suspension2", "cavity",
        "environment", "stability", "noise", "tf", "modes",
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")

    mirror1 = _parse_mirror(parser, "mirror1")
    mirror2 = _parse_mirror(parser, "mirror2")
    suspension1 = _parse_suspension(parser, "suspension1")
    suspension2 = _parse_suspension(parser, "suspension2")

    cavity = _section_dict(parser, "cavity")
    length = _pop(cavity, "cavity", "length", "length", required=True)
    wavelength = _pop(cavity, "cavity", "wavelength", "length", required=True)
    input_power = _pop(cavity, "cavity", "input_power", "power")
    intracavity_power = _pop(cavity, "cavity", "intracavity_power", "power")
    finesse_override = _pop(cavity, "cavity", "finesse", "dimensionless")
    beam_radius = _pop(cavity, "cavity", "beam_radius", "length")
    _reject_leftovers(cavity, "cavity")

    try:
        system = CavitySystem(
            mirror1=mirror1,
            mirror2=mirror2,
            suspension1=suspension1,
            suspension2=suspension2,
            length=length,
            wavelength=wavelength,
            input_power=input_power,
            intracavity_power=intracavity_power,
            finesse_override=finesse_override,
            beam_radius_override=beam_radius,
        )
    except ValueError as exc:
        raise ConfigError(f"[cavity] {exc}") from None

    if not system.is_stable:
        raise ConfigError(
            f"[cavity] resonator is optically unstable: g1 g2 = {system.g1 * system.g2:.6g} "
            "(need 0 < g1 g2 < 1)"
        )

    env_values = dict(parser.items("environment")) if parser.has_section("environment") else {}
    env_kwargs = {}
    for key, dimension in (
        ("temperature", "temperature"),
        ("air_pressure", "pressure"),
        ("seismic_level", "dimensionless"),
        ("isolation_corner", "frequency"),
        ("gas_molecular_mass", "mass"),
    ):
        if key in env_values:
            env_kwargs[key] = _parse_quantity(env_values.pop(key), dimension, f"environment.{key}")
    _reject_leftovers(env_values, "environment")
    try:
        env = EnvSpec(**env_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[environment] {exc}") from None

    stability = _parse_block(
        parser, "stability", StabilityBlock,
        {"power_min": ("power", float), "power_max": ("power", float),
         "points_per_decade": ("dimensionless", int)},
    )
    noise = _parse_block(
        parser, "noise", NoiseBlock,
        {"freq_min": ("frequency", float), "freq_max": ("frequency", float),
         "points_per_decade": ("dimensionless", int)},
    )
    tf = _parse_block(
        parser, "tf", TfBlock,
        {"power": ("power", float), "freq_min": ("frequency", float),
         "freq_max": ("frequency", float), "points": ("dimensionless", int)},
    )
    modes = _parse_block(parser, "modes", ModesBlock, {"power": ("power", float)})

    return RunConfig(system=system, env=env, stability=stability, noise=noise, tf=tf, modes=modes)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _fmt(value: float) -> str:
    return repr(float(value))


def dump_config(config: RunConfig) -> str:
    """Serialize to the canonical SI form; parse(dump(c)) == c."""
    system = config.system
    out = io.StringIO()

    def mirror_section(name, mirror):
        out.write(f"[{name}]\n")
        out.write(f"mass = {_fmt(mirror.mass)} kg\n")
        out.write(f"radius = {_fmt(mirror.radius)} m\n")
        out.write(f"thickness = {_fmt(mirror.thickness)} m\n")
        if mirror.flat:
            out.write("flat = true\n")
        else:
            out.write(f"radius_of_curvature = {_fmt(mirror.radius_of_curvature)} m\n")
        out.write(f"power_reflectivity = {_fmt(mirror.power_reflectivity)}\n")
        if mirror.yaw_inertia is not None:
            out.write(f"yaw_inertia = {_fmt(mirror.yaw_inertia)} kg*m^2\n")
        out.write(f"substrate = {material_name(mirror.substrate)}\n")
        out.write(f"coat_low = {material_name(mirror.coat_low)}\n")
        out.write(f"coat_high = {material_name(mirror.coat_high)}\n\n")

    def suspension_section(name, suspension):
        out.write(f"[{name}]\n")
        out.write(f"quality_factor = {_fmt(suspension.quality_factor)}\n")
        out.write(f"pendulum_frequency = {_fmt(suspension.pendulum_frequency / (2 * math.pi))} Hz\n")
        if suspension.yaw_resonance is not None:
            out.write(f"yaw_resonance = {_fmt(suspension.yaw_resonance / (2 * math.pi))} Hz\n")
        if suspension.rotational_stiffness is not None:
            out.write(f"rotational_stiffness = {_fmt(suspension.rotational_stiffness)} N*m/rad\n")
        out.write("\n")

    mirror_section("mirror1", system.mirror1)
    mirror_section("mirror2", system.mirror2)
    suspension_section("suspension1", system.suspension1)
    suspension_section("suspension2", system.suspension2)

    out.write("[cavity]\n")
    out.write(f"length = {_fmt(system.length)} m\n")
    out.write(f"wavelength = {_fmt(system.wavelength)} m\n")
    if system.input_power is not None:
        out.write(f"input_power = {_fmt(system.input_power)} W\n")
    if system.intracavity_power is not None:
        out.write(f"intracavity_power = {_fmt(system.intracavity_power)} W\n")
    if system.finesse_override is not None:
        out.write(f"finesse = {_fmt(system.finesse_override)}\n")
    if system.beam_radius_override is not None:
        out.write(f"beam_radius = {_fmt(system.beam_radius_override)} m\n")
    out.write("\n")

    env = config.env
    out.write("[environment]\n")
    out.write(f"temperature = {_fmt(env.temperature)} K\n")
    out.write(f"air_pressure = {_fmt(env.air_pressure)} Pa\n")
    out.write(f"seismic_level = {_fmt(env.seismic_level)}\n")
    out.write(f"isolation_corner = {_fmt(env.isolation_corner)} Hz\n")
    out.write(f"gas_molecular_mass = {_fmt(env.gas_molecular_mass)} kg\n\n")

    out.write("[stability]\n")
    out.write(f"power_min = {_fmt(config.stability.power_min)} W\n")
    out.write(f"power_max = {_fmt(config.stability.power_max)} W\n")
    out.write(f"points_per_decade = {config.stability.points_per_decade}\n\n")

    out.write("[noise]\n")
    out.write(f"freq_min = {_fmt(config.noise.freq_min)} Hz\n")
    out.write(f"freq_max = {_fmt(config.noise.freq_max)} Hz\n")
    out.write(f"points_per_decade = {config.noise.points_per_decade}\n\n")

    out.write("[tf]\n")
    out.write(f"power = {_fmt(config.tf.power)} W\n")
    out.write(f"freq_min = {_fmt(config.tf.freq_min)} Hz\n")
    out.write(f"freq_max = {_fmt(config.tf.freq_max)} Hz\n")
    out.write(f"points = {config.tf.points}\n\n")

    out.write("[modes]\n")
    out.write(f"power = {_fmt(config.modes.power)} W\n")
    return out.getvalue()


def table_default_config() -> RunConfig:
    """The shipped reference configuration (the published parameter table)."""
    text = TABLE_DEFAULT_TEXT
    return parse_config(text)


def fig2_config(regime: str = "negative") -> RunConfig:
    """Stability-analysis parameter set for g = -0.1 or g = +0.1."""
    if regime == "negative":
        return parse_config(FIG2_NEGATIVE_TEXT)
    if regime == "positive":
        return parse_config(FIG2_POSITIVE_TEXT)
    raise ConfigError(f"unknown regime {regime!r} (expected 'negative' or 'positive')")


TABLE_DEFAULT_TEXT = """\
# Reference configuration: milligram test mass in a negative-g linear cavity.

[mirror1]                      # test mass
mass = 8 mg
radius = 1.5 mm
thickness = 0.5 mm
radius_of_curvature = 100 mm
power_reflectivity = 99.99 %
substrate = fused_silica
coat_low = silica
coat_high = titania_tantala

[suspension1]
quality_factor = 1e5
pendulum_frequency = 3 Hz
yaw_resonance = 0.5 Hz

[mirror2]                      # input mirror
mass = 60 g
radius = 10 mm
thickness = 5 mm
radius_of_curvature = 100 mm
power_reflectivity = 99.9 %
substrate = fused_silica
coat_low = silica
coat_high = titania_tantala

[suspension2]
quality_factor = 1e3
pendulum_frequency = 5 Hz
yaw_resonance = 5 Hz

[cavity]
length = 110 mm
wavelength = 1064 nm
input_power = 10 mW
intracavity_power = 14 W
finesse = 5000
beam_radius = 0.21 mm

[environment]
temperature = 300 K
air_pressure = 1e-4 Pa
seismic_level = 1e-7
isolation_corner = 1 Hz

[stability]
power_min = 1e-3 W
power_max = 100 kW
points_per_decade = 60

[noise]
freq_min = 10 Hz
freq_max = 10 kHz
points_per_decade = 100

[tf]
power = 1 W
freq_min = 0.2 Hz
freq_max = 20 Hz
points = 200

[modes]
power = 0 W
"""

_FIG2_BASE = """\
[mirror1]                      # light mirror
mass = 10 mg
radius = 1.5 mm
thickness = 0.5 mm
radius_of_curvature = {roc}
power_reflectivity = 99.99 %
yaw_inertia = 5.6e-12 kg*m^2
substrate = fused_silica
coat_low = silica
coat_high = titania_tantala

[suspension1]
quality_factor = 8e4
pendulum_frequency = 3 Hz
yaw_resonance = 0.5 Hz

[mirror2]                      # heavy mirror
mass = 10 g
radius = 10 mm
thickness = 5 mm
radius_of_curvature = {roc}
power_reflectivity = 99.9 %
yaw_inertia = 2.5e-7 kg*m^2
substrate = fused_silica
coat_low = silica
coat_high = titania_tantala

[suspension2]
quality_factor = 1e3
pendulum_frequency = 5 Hz
yaw_resonance = 5 Hz

[cavity]
length = 110 mm
wavelength = 1064 nm
intracavity_power = 1 W

[stability]
power_min = 1e-3 W
power_max = 100 kW
points_per_decade = 60

[tf]
power = 1 W
freq_min = 0.2 Hz
freq_max = 20 Hz
points = 200

[modes]
power = 0 W
"""

# g = -0.1: cavity slightly longer than the common radius of curvature.
FIG2_NEGATIVE_TEXT = _FIG2_BASE.format(roc="100 mm")
# g = +0.1: radius of curvature L / (1 - g) = 122.22... mm.
FIG2_POSITIVE_TEXT = _FIG2_BASE.format(roc="0.12222222222222222 m")
