"""Sectioned ``key = value`` run configuration.

Sections: ``[turbine]``, ``[farm]``, ``[inflow]``, ``[mixing]``,
``[strategy.N]`` (N = 1 for the upstream turbine) and ``[sim]``. Unknown
sections and keys are rejected. Spans that default to an automatic value
accept ``auto``.
"""
from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError, InvalidInputError
from .excitation import StrategyKind, StrategySpec
from .farm import FarmLayout, SimulationConfig
from .rotor import PRESETS, TurbineParameters, get_preset
from .wake import InflowModel, MixingParams

AUTO = "auto"

_TURBINE_UNITS = {
    "rotor_diameter": ("m", "rotor diameter"),
    "hub_height": ("m", "hub height"),
    "rated_power": ("W", "rated electrical power (metadata only)"),
    "rotor_speed": ("rad/s", "fixed rotor speed"),
    "air_density": ("kg/m^3", "air density"),
    "cp_ref": ("-", "power coefficient at zero pitch offset"),
    "ct_ref": ("-", "thrust coefficient at zero pitch offset"),
    "cp_lin": ("1/deg", "linear power-loss coefficient"),
    "cp_quad": ("1/deg^2", "quadratic power-loss coefficient"),
    "ct_lin": ("1/deg", "linear thrust-loss coefficient"),
    "ct_quad": ("1/deg^2", "quadratic thrust-loss coefficient"),
    "deflection_gain": ("rad/deg", "thrust-vector deflection per degree of cyclic pitch"),
    "moment_ref": ("N*m", "mean blade root out-of-plane moment at u_ref"),
    "moment_pitch_gain": ("1/deg", "relative root-moment drop per degree of blade pitch"),
    "u_ref": ("m/s", "reference inflow for moment_ref"),
    "rotor_rotation": ("cw|ccw", "rotor spin sense seen from upstream"),
}

KEYS = {
    "turbine": {"preset": ("name", "built-in parameter set: " + ", ".join(PRESETS)), **_TURBINE_UNITS},
    "farm": {
        "n_turbines": ("-", "turbines in the row"),
        "spacing_d": ("D", "streamwise spacing"),
        "y_offset_d": ("D", "lateral offset of downstream turbines"),
    },
    "inflow": {
        "u_inf": ("m/s", "free-stream speed"),
        "turbulence_intensity": ("-", "longitudinal turbulence intensity"),
        "integral_time": ("s", "turbulence integral time scale"),
    },
    "mixing": {
        "k_base": ("1/D", "base deficit decay rate per diameter travelled"),
        "c_meander": ("-", "gain of forced meandering and deficit pulsing on recovery"),
        "c_ti": ("-", "gain of ambient turbulence intensity on recovery"),
        "width_growth": ("m/m", "Gaussian wake width growth"),
        "initial_width": ("D", "Gaussian wake width at the rotor"),
        "deflection_arm": ("D", "wake offset per radian of thrust deflection"),
        "x_max": ("D", "wake extent"),
    },
    "strategy.N": {
        "kind": ("name", "one of " + ", ".join(k.value for k in StrategyKind)),
        "amplitude_deg": ("deg", "derate (static) or sinusoid amplitude"),
        "strouhal": ("-", "excitation Strouhal number f D / U"),
        "phase_offset_deg": ("deg", "tilt/yaw phase offset; 90 for helix_ccw, 270 for helix_cw"),
    },
    "sim": {
        "dt": ("s", "time step"),
        "duration": ("s", "simulated time, or auto"),
        "warmup": ("s", "discarded spin-up, or auto"),
        "seed": ("-", "turbulence seed"),
        "output_step": ("s", "output sample spacing (multiple of dt), or auto"),
        "n_periods": ("-", "excitation periods averaged when duration is auto"),
        "out_dir": ("path", "output directory"),
    },
}


def config_help() -> str:
    """Reference of every configuration key with its unit."""
    lines = ["configuration keys:"]
    for section, keys in KEYS.items():
        lines.append(f"  [{section}]")
        for key, (unit, text) in keys.items():
            lines.append(f"    {key:<22} [{unit}] {text}")
    return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    turbine: TurbineParameters
    turbine_preset: str | None
    n_turbines: int
    spacing_d: float
    y_offset_d: float
    inflow: InflowModel
    mixing: MixingParams
    strategies: tuple
    sim: SimulationConfig
    out_dir: str = "helix_out"

    @property
    def layout(self) -> FarmLayout:
        return FarmLayout.row(self.n_turbines, self.spacing_d, self.turbine.rotor_diameter, self.y_offset_d)


def _convert(section: str, key: str, raw: str, kind):
    label = f"[{section}].{key}"
    text = raw.strip()
    try:
        if kind is str:
            return text
        if kind == "optional_float":
            return None if text.lower() == AUTO else float(text)
        if kind is int:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigurationError(f"{label}: cannot parse {raw!r} as {getattr(kind, '__name__', 'number')}",
                                 [label]) from None


def _build(cls, section: str, values: dict, **extra):
    try:
        return cls(**values, **extra)
    except InvalidInputError as err:
        key = f"[{section}].{err.field}" if err.field else f"[{section}]"
        raise ConfigurationError(f"{key}: {err}", [key]) from None


_STRATEGY_RE = re.compile(r"^strategy\.(\d+)$")


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True, empty_lines_in_values=False,
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as err:
        lineno = getattr(err, "lineno", None)
        where = f"line {lineno}: " if lineno else ""
        raise ConfigurationError(f"syntax error: {where}{err.message.splitlines()[0]}") from None

    unknown = [s for s in parser.sections() if s not in KEYS and not _STRATEGY_RE.match(s)]
    if unknown:
        raise ConfigurationError(f"unknown section(s): {', '.join(f'[{s}]' for s in unknown)}",
                                 [f"[{s}]" for s in unknown])
    bad_keys = []
    for section in parser.sections():
        allowed = KEYS["strategy.N" if _STRATEGY_RE.match(section) else section]
        bad_keys += [f"[{section}].{k}" for k in parser[section] if k not in allowed]
    if bad_keys:
        raise ConfigurationError(f"unknown key(s): {', '.join(bad_keys)}", bad_keys)

    def section(name):
        return parser[name] if parser.has_section(name) else {}

    tsec = dict(section("turbine"))
    preset = tsec.pop("preset", "DTU10MW").strip()
    try:
        base = get_preset(preset)
    except InvalidInputError as err:
        raise ConfigurationError(f"[turbine].preset: {err}", ["[turbine].preset"]) from None
    tvals = {k: _convert("turbine", k, v, str if k == "rotor_rotation" else float) for k, v in tsec.items()}
    try:
        turbine = dataclasses.replace(base, **tvals)
    except InvalidInputError as err:
        key = f"[turbine].{err.field}"
        raise ConfigurationError(f"{key}: {err}", [key]) from None

    fsec = section("farm")
    n_turbines = _convert("farm", "n_turbines", fsec.get("n_turbines", "1"), int)
    spacing_d = _convert("farm", "spacing_d", fsec.get("spacing_d", "5.0"), float)
    y_offset_d = _convert("farm", "y_offset_d", fsec.get("y_offset_d", "0.0"), float)
    layout = _build(FarmLayout.row, "farm", {}, n_turbines=n_turbines, spacing_d=spacing_d,
                    diameter=turbine.rotor_diameter, y_offset_d=y_offset_d)
    try:
        layout.validate(turbine.rotor_diameter)
    except InvalidInputError as err:
        raise ConfigurationError(f"[farm].y_offset_d: {err}", ["[farm].y_offset_d"]) from None

    inflow = _build(InflowModel, "inflow", {k: _convert("inflow", k, v, float) for k, v in section("inflow").items()})
    mixing = _build(MixingParams, "mixing", {k: _convert("mixing", k, v, float) for k, v in section("mixing").items()})

    indices = sorted(int(_STRATEGY_RE.match(s).group(1)) for s in parser.sections() if _STRATEGY_RE.match(s))
    extra = [i for i in indices if not 1 <= i <= n_turbines]
    if extra:
        keys = [f"[strategy.{i}]" for i in extra]
        raise ConfigurationError(f"strategy sections {', '.join(keys)} do not match n_turbines={n_turbines}", keys)
    strategies = []
    for i in range(1, n_turbines + 1):
        name = f"strategy.{i}"
        raw = dict(section(name))
        values = {}
        for k, v in raw.items():
            kind = str if k == "kind" else ("optional_float" if k == "phase_offset_deg" else float)
            values[k] = _convert(name, k, v, kind)
        strategies.append(_build(StrategySpec, name, values))
    for i, spec in enumerate(strategies[1:], start=2):
        if spec.kind is not StrategyKind.BASELINE:
            key = f"[strategy.{i}].kind"
            raise ConfigurationError(f"{key}: downstream turbines must use baseline", [key])

    ssec = dict(section("sim"))
    out_dir = ssec.pop("out_dir", "helix_out").strip()
    svals = {}
    for k, v in ssec.items():
        kind = int if k in ("seed", "n_periods") else ("optional_float" if k in ("duration", "warmup", "output_step")
                                                      else float)
        svals[k] = _convert("sim", k, v, kind)
    sim = _build(SimulationConfig, "sim", svals)

    return RunConfig(turbine, preset, n_turbines, spacing_d, y_offset_d, inflow, mixing, tuple(strategies),
                     sim, out_dir)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}", [str(path)]) from None
    except (OSError, UnicodeDecodeError) as err:
        raise ConfigurationError(f"cannot read config {path}: {err}", [str(path)]) from None
    return parse_config(text)


def _fmt(value) -> str:
    if value is None:
        return AUTO
    if isinstance(value, StrategyKind):
        return value.value
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def format_config(cfg: RunConfig) -> str:
    """Serialize ``cfg`` so that :func:`parse_config` reproduces it exactly."""
    out = ["[turbine]"]
    if cfg.turbine_preset:
        out.append(f"preset = {cfg.turbine_preset}")
    out += [f"{f.name} = {_fmt(getattr(cfg.turbine, f.name))}" for f in dataclasses.fields(cfg.turbine)]
    out += ["", "[farm]", f"n_turbines = {cfg.n_turbines}", f"spacing_d = {_fmt(float(cfg.spacing_d))}",
            f"y_offset_d = {_fmt(float(cfg.y_offset_d))}"]
    for name, obj in (("inflow", cfg.inflow), ("mixing", cfg.mixing)):
        out += ["", f"[{name}]"] + [f"{f.name} = {_fmt(getattr(obj, f.name))}" for f in dataclasses.fields(obj)]
    for i, spec in enumerate(cfg.strategies, start=1):
        out += ["", f"[strategy.{i}]"] + [f"{f.name} = {_fmt(getattr(spec, f.name))}"
                                         for f in dataclasses.fields(spec)]
    out += ["", "[sim]"] + [f"{f.name} = {_fmt(getattr(cfg.sim, f.name))}" for f in dataclasses.fields(cfg.sim)]
    out.append(f"out_dir = {cfg.out_dir}")
    return "\n".join(out) + "\n"
