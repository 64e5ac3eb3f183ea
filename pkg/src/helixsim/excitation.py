"""Pitch setpoint generation for the five control strategies.

Pitch is in degrees, positive toward feather (lower thrust and power).
Fixed-frame setpoints are turned into blade commands with the inverse MBC
transform, so every strategy is expressed through collective, tilt and yaw
channels.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .mbc import FixedFrameVector, BladeVector, _pack, blade_azimuths, inverse_mbc

MAX_AMPLITUDE_DEG = 15.0
HELIX_PHASE_DEG = {"helix_ccw": 90.0, "helix_cw": 270.0}


class StrategyKind(str, enum.Enum):
    BASELINE = "baseline"
    STATIC_INDUCTION = "static_induction"
    DYNAMIC_INDUCTION = "dynamic_induction"
    HELIX_CCW = "helix_ccw"
    HELIX_CW = "helix_cw"

    @property
    def is_helix(self) -> bool:
        return self in (StrategyKind.HELIX_CCW, StrategyKind.HELIX_CW)

    @property
    def is_dynamic(self) -> bool:
        return self in (StrategyKind.DYNAMIC_INDUCTION, StrategyKind.HELIX_CCW, StrategyKind.HELIX_CW)


@dataclass(frozen=True)
class StrategySpec:
    """Control strategy of one turbine.

    ``amplitude_deg`` is the derate for static induction and the sinusoid
    amplitude otherwise. ``phase_offset_deg`` is the tilt-to-yaw offset and is
    pinned by the helix variants (90 for CCW, 270 for CW); leave it ``None``
    to take that value.
    """

    kind: StrategyKind = StrategyKind.BASELINE
    amplitude_deg: float = 0.0
    strouhal: float = 0.25
    phase_offset_deg: float | None = None

    def __post_init__(self):
        try:
            kind = StrategyKind(self.kind)
        except ValueError:
            choices = ", ".join(k.value for k in StrategyKind)
            raise InvalidInputError(f"unknown strategy kind {self.kind!r} (choose from {choices})", "kind")
        object.__setattr__(self, "kind", kind)
        if not (0.0 <= self.amplitude_deg <= MAX_AMPLITUDE_DEG):
            raise InvalidInputError(
                f"amplitude_deg must be in [0, {MAX_AMPLITUDE_DEG:g}], got {self.amplitude_deg}", "amplitude_deg"
            )
        if not self.strouhal > 0:
            raise InvalidInputError(f"strouhal must be positive, got {self.strouhal}", "strouhal")
        required = HELIX_PHASE_DEG.get(kind.value)
        if self.phase_offset_deg is None:
            object.__setattr__(self, "phase_offset_deg", required if required is not None else 0.0)
        elif required is not None and self.phase_offset_deg != required:
            raise InvalidInputError(
                f"phase_offset_deg must be {required:g} for {kind.value}, got {self.phase_offset_deg}",
                "phase_offset_deg",
            )

    @property
    def label(self) -> str:
        names = {
            StrategyKind.BASELINE: "Baseline",
            StrategyKind.STATIC_INDUCTION: "Static",
            StrategyKind.DYNAMIC_INDUCTION: "DIC",
            StrategyKind.HELIX_CCW: "CCW Helix",
            StrategyKind.HELIX_CW: "CW Helix",
        }
        if self.kind is StrategyKind.BASELINE:
            return names[self.kind]
        return f"{names[self.kind]} {self.amplitude_deg:g}deg"


def _check_positive(**values):
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise InvalidInputError(f"{name} must be positive, got {value}", name)


def strouhal_frequency(st: float, rotor_diameter: float, u_inf: float) -> float:
    """Excitation frequency [Hz] for Strouhal number ``st = f D / U``."""
    _check_positive(st=st, rotor_diameter=rotor_diameter, u_inf=u_inf)
    return st * u_inf / rotor_diameter


def excitation_period(st: float, rotor_diameter: float, u_inf: float) -> float:
    """Excitation period ``D / (St U)`` in seconds."""
    _check_positive(st=st, rotor_diameter=rotor_diameter, u_inf=u_inf)
    return rotor_diameter / (st * u_inf)


@dataclass(frozen=True)
class ExcitationTiming:
    f_e: float
    omega_e: float = field(init=False)
    period_T_e: float = field(init=False)

    def __post_init__(self):
        _check_positive(f_e=self.f_e)
        object.__setattr__(self, "omega_e", 2.0 * np.pi * self.f_e)
        object.__setattr__(self, "period_T_e", 1.0 / self.f_e)

    @classmethod
    def from_strouhal(cls, st: float, rotor_diameter: float, u_inf: float) -> "ExcitationTiming":
        return cls(strouhal_frequency(st, rotor_diameter, u_inf))


FixedFramePitch = FixedFrameVector


def _times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise InvalidInputError("time must be finite and non-negative")
    return t


def _fixed_frame(t, spec: StrategySpec, timing: ExcitationTiming, derivative: bool) -> np.ndarray:
    t = _times(t)
    a = spec.amplitude_deg
    w = timing.omega_e
    zero = np.zeros_like(t)
    kind = spec.kind
    s, c = np.sin(w * t), np.cos(w * t)
    if derivative:
        # d/dt sin = w cos, d/dt cos = -w sin
        s, c = w * c, -w * s
    if kind is StrategyKind.BASELINE:
        parts = (zero, zero, zero)
    elif kind is StrategyKind.STATIC_INDUCTION:
        parts = (zero if derivative else zero + a, zero, zero)
    elif kind is StrategyKind.DYNAMIC_INDUCTION:
        parts = (a * s, zero, zero)
    elif kind is StrategyKind.HELIX_CCW:
        parts = (zero, a * s, a * c)
    else:
        parts = (zero, a * s, -a * c)
    return np.stack(parts, axis=-1)


def fixed_frame_setpoints(t, spec: StrategySpec, timing: ExcitationTiming) -> FixedFramePitch:
    """Collective, tilt and yaw pitch setpoints [deg] at time(s) ``t``.

    Helix variants put a sine on tilt and a (signed) cosine on yaw, so the
    fixed-frame vector has constant magnitude ``amplitude_deg``.
    """
    return _pack(_fixed_frame(t, spec, timing, derivative=False), FixedFrameVector)


def fixed_frame_rates(t, spec: StrategySpec, timing: ExcitationTiming) -> FixedFrameVector:
    """Time derivative of :func:`fixed_frame_setpoints` [deg/s]."""
    return _pack(_fixed_frame(t, spec, timing, derivative=True), FixedFrameVector)


def _rotor_azimuths(t, rotor) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return blade_azimuths(rotor.azimuth + rotor.omega_r * (t - rotor.time))


def blade_pitch_commands(t, rotor, spec: StrategySpec, timing: ExcitationTiming) -> BladeVector:
    """Per-blade pitch [deg] at time(s) ``t`` for a rotor spinning at constant speed.

    ``rotor`` provides ``azimuth`` (blade 1, rad) at ``rotor.time`` and
    ``omega_r`` (rad/s).
    """
    fixed = _fixed_frame(t, spec, timing, derivative=False)
    return inverse_mbc(_rotor_azimuths(t, rotor), fixed)


def blade_pitch_rates(t, rotor, spec: StrategySpec, timing: ExcitationTiming) -> BladeVector:
    """Exact per-blade pitch rate [deg/s], including the rotor-rotation terms."""
    fixed = _fixed_frame(t, spec, timing, derivative=False)
    rates = _fixed_frame(t, spec, timing, derivative=True)
    psi = _rotor_azimuths(t, rotor)
    w = rotor.omega_r
    cos, sin = np.cos(psi), np.sin(psi)
    tilt, yaw = fixed[..., 1:2], fixed[..., 2:3]
    d = rates[..., 0:1] + rates[..., 1:2] * cos + rates[..., 2:3] * sin + w * (yaw * cos - tilt * sin)
    return _pack(d, BladeVector)


def dominant_pitch_frequency(spec: StrategySpec, f_r: float, timing: ExcitationTiming) -> float:
    """Frequency [Hz] of the blade pitch signal produced by ``spec``."""
    kind = spec.kind
    if kind in (StrategyKind.BASELINE, StrategyKind.STATIC_INDUCTION):
        return 0.0
    if kind is StrategyKind.DYNAMIC_INDUCTION:
        return timing.f_e
    if not f_r > timing.f_e:
        raise InvalidInputError(
            f"helix excitation needs rotor frequency above excitation frequency "
            f"(f_r={f_r}, f_e={timing.f_e})",
            "f_r",
        )
    return f_r + timing.f_e if kind is StrategyKind.HELIX_CCW else f_r - timing.f_e
