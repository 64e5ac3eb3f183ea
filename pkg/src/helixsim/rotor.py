"""Quasi-steady actuator-disk rotor model.

Collective pitch sets the power and thrust coefficients through quadratic
loss curves. Cyclic (tilt/yaw) pitch leaves the magnitudes untouched and
only tilts the thrust vector the rotor applies to the flow.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .mbc import _pack, blade_azimuths

BETZ_LIMIT = 16.0 / 27.0
MAX_PITCH_DEG = 15.0
MAX_DEFLECTION_RAD = np.pi / 6.0
# Cyclic amplitude whose near-wake displacement sets the default deflection gain.
_CALIBRATION_AMPLITUDE_DEG = 4.0
_CALIBRATION_OFFSET_D = 0.15
_CALIBRATION_ARM_D = 3.0
_CALIBRATION_STROUHAL = 0.25


def default_deflection_gain() -> float:
    """Thrust-vector deflection [rad/deg] giving a 0.15 D wake offset for a 4 deg helix.

    The near-wake offset is ``arm * angle`` passed through a first-order lag
    with time constant ``D/U``. At St = 0.25 that lag has ``omega*tau = pi/2``
    independent of D and U, so the gain is ``0.15 / (3 * 4) * sqrt(1 + pi**2/4)``.
    """
    omega_tau = 2.0 * np.pi * _CALIBRATION_STROUHAL
    lag = 1.0 / np.sqrt(1.0 + omega_tau**2)
    return float(_CALIBRATION_OFFSET_D / (_CALIBRATION_ARM_D * _CALIBRATION_AMPLITUDE_DEG * lag))


@dataclass(frozen=True)
class TurbineParameters:
    """Rotor and surrogate-aerodynamics parameters (SI units, pitch in degrees).

    ``rotor_rotation`` is the spin sense seen from upstream, ``"cw"`` or
    ``"ccw"``; it fixes which side of the disk ``psi = 90 deg`` points to and
    therefore the sign of horizontal thrust deflection.
    """

    rotor_diameter: float = 178.3
    hub_height: float = 119.0
    rated_power: float = 10.0e6
    rotor_speed: float = 2.0 * np.pi * 0.12
    air_density: float = 1.225
    cp_ref: float = 0.476
    ct_ref: float = 0.80
    cp_lin: float = 0.0045
    cp_quad: float = 0.0055
    ct_lin: float = 0.055
    ct_quad: float = 0.0
    deflection_gain: float = dataclasses.field(default_factory=default_deflection_gain)
    moment_ref: float = 2.4e7
    moment_pitch_gain: float = 0.06
    u_ref: float = 9.0
    rotor_rotation: str = "cw"

    def __post_init__(self):
        positive = (
            "rotor_diameter", "hub_height", "rated_power", "rotor_speed", "air_density",
            "cp_ref", "ct_ref", "deflection_gain", "moment_ref", "moment_pitch_gain", "u_ref",
        )
        for name in positive:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive, got {value}", name)
        for name in ("cp_lin", "cp_quad", "ct_lin", "ct_quad"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise InvalidInputError(f"{name} must be non-negative, got {value}", name)
        if self.cp_ref > BETZ_LIMIT:
            raise InvalidInputError(f"cp_ref={self.cp_ref} exceeds the Betz limit 16/27", "cp_ref")
        if self.ct_ref >= 1.0:
            raise InvalidInputError(f"ct_ref must be below 1, got {self.ct_ref}", "ct_ref")
        if self.rotor_rotation not in ("cw", "ccw"):
            raise InvalidInputError(f"rotor_rotation must be 'cw' or 'ccw', got {self.rotor_rotation!r}",
                                    "rotor_rotation")

    @property
    def rotor_area(self) -> float:
        return np.pi * self.rotor_diameter**2 / 4.0

    @property
    def rotor_frequency(self) -> float:
        return self.rotor_speed / (2.0 * np.pi)

    @property
    def horizontal_sign(self) -> float:
        return 1.0 if self.rotor_rotation == "cw" else -1.0

    def replace(self, **changes) -> "TurbineParameters":
        return dataclasses.replace(self, **changes)


PRESETS = {"DTU10MW": TurbineParameters()}

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(TurbineParameters)}


def parse_turbine_record(text: str, base: TurbineParameters | None = None) -> TurbineParameters:
    """Build parameters from ``key = value`` lines; ``#`` starts a comment.

    A ``preset = NAME`` line selects the starting point; other keys override
    it. Section headers are ignored so a ``[turbine]`` block can be pasted in.
    """
    values = {}
    preset = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise InvalidInputError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "preset":
            preset = value
        elif key in _FIELD_TYPES:
            values[key] = value if key == "rotor_rotation" else _float(value, key)
        else:
            raise InvalidInputError(f"line {lineno}: unknown turbine key {key!r}", key)
    if preset is not None:
        base = get_preset(preset)
    return dataclasses.replace(base or TurbineParameters(), **values)


def _float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise InvalidInputError(f"{key} must be a number, got {value!r}", key) from None


def load_turbine_preset(path) -> TurbineParameters:
    return parse_turbine_record(Path(path).read_text(encoding="utf-8"))


def format_turbine_record(params: TurbineParameters) -> str:
    lines = []
    for f in dataclasses.fields(params):
        value = getattr(params, f.name)
        lines.append(f"{f.name} = {value if isinstance(value, str) else repr(float(value))}")
    return "\n".join(lines) + "\n"


def get_preset(name: str) -> TurbineParameters:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidInputError(f"unknown turbine preset {name!r} (known: {', '.join(PRESETS)})", "preset") from None


@dataclass(frozen=True)
class RotorState:
    """Blade-1 azimuth [rad] at ``time`` [s] for a rotor turning at ``omega_r`` [rad/s]."""

    azimuth: float = 0.0
    omega_r: float = 2.0 * np.pi * 0.12
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "azimuth", float(np.mod(self.azimuth, 2.0 * np.pi)))

    @property
    def blade_azimuths(self) -> np.ndarray:
        return blade_azimuths(self.azimuth)

    def advance(self, dt: float) -> "RotorState":
        return RotorState(self.azimuth + self.omega_r * dt, self.omega_r, self.time + dt)


class AeroOutput(NamedTuple):
    power: float
    thrust_magnitude: float
    thrust_tilt: float
    thrust_yaw: float
    effective_ct: float


class BladeLoads(NamedTuple):
    m_1: float
    m_2: float
    m_3: float


def _check_pitch(theta0):
    theta0 = np.asarray(theta0, dtype=float)
    if np.any(~np.isfinite(theta0)) or np.any(np.abs(theta0) > MAX_PITCH_DEG):
        raise InvalidInputError(f"collective pitch must lie within +/-{MAX_PITCH_DEG:g} deg", "theta0")
    return theta0


def _loss_curve(theta0, ref, lin, quad):
    theta0 = _check_pitch(theta0)
    value = np.clip(ref * (1.0 - lin * theta0 - quad * theta0**2), 0.0, ref)
    return float(value) if value.ndim == 0 else value


def cp_curve(theta0, params: TurbineParameters):
    """Power coefficient at collective pitch offset ``theta0`` [deg]."""
    return _loss_curve(theta0, params.cp_ref, params.cp_lin, params.cp_quad)


def ct_curve(theta0, params: TurbineParameters):
    """Thrust coefficient at collective pitch offset ``theta0`` [deg]."""
    return _loss_curve(theta0, params.ct_ref, params.ct_lin, params.ct_quad)


def aero_response(u_eff: float, fixed_pitch, params: TurbineParameters) -> AeroOutput:
    if not (np.isfinite(u_eff) and u_eff >= 0):
        raise InvalidInputError(f"u_eff must be non-negative, got {u_eff}", "u_eff")
    theta0, theta_tilt, theta_yaw = (float(v) for v in fixed_pitch)
    if not abs(theta0) <= MAX_PITCH_DEG:
        raise InvalidInputError(f"collective pitch must lie within +/-{MAX_PITCH_DEG:g} deg", "theta0")
    tilt = -params.deflection_gain * theta_tilt
    yaw = -params.horizontal_sign * params.deflection_gain * theta_yaw
    if not (abs(tilt) < MAX_DEFLECTION_RAD and abs(yaw) < MAX_DEFLECTION_RAD):
        raise InvalidInputError(f"cyclic pitch ({theta_tilt}, {theta_yaw}) deg deflects thrust beyond 30 deg",
                                "fixed_pitch")
    cp = min(max(params.cp_ref * (1.0 - params.cp_lin * theta0 - params.cp_quad * theta0 * theta0), 0.0),
             params.cp_ref)
    ct = min(max(params.ct_ref * (1.0 - params.ct_lin * theta0 - params.ct_quad * theta0 * theta0), 0.0),
             params.ct_ref)
    half_rho_area = 0.5 * params.air_density * params.rotor_area
    return AeroOutput(
        power=half_rho_area * cp * u_eff**3,
        thrust_magnitude=half_rho_area * ct * u_eff**2,
        thrust_tilt=tilt,
        thrust_yaw=yaw,
        effective_ct=ct,
    )


def blade_load_surrogate(u_eff, blade_pitch, rotor: RotorState, params: TurbineParameters) -> BladeLoads:
    """Out-of-plane root bending moments [N m] scaled from the reference inflow.

    Uniform inflow is assumed, so the azimuth does not enter; ``rotor`` is
    accepted to keep the call shape of a sheared-inflow model.
    """
    u_eff = np.asarray(u_eff, dtype=float)
    theta = np.asarray(blade_pitch, dtype=float)
    if np.any(u_eff < 0) or not np.all(np.isfinite(theta)):
        raise InvalidInputError("blade loads need non-negative u_eff and finite pitch")
    scale = params.moment_ref * (u_eff / params.u_ref) ** 2
    moments = np.asarray(scale)[..., None] * (1.0 - params.moment_pitch_gain * theta)
    return _pack(moments, BladeLoads)
