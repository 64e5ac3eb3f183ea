"""Lagrangian wake-marker model.

Each simulation step a turbine sheds one marker carrying the current
near-wake displacement, an actuator-disk velocity deficit and a Gaussian
width. Markers convect downstream, their deficit decays with a recovery
rate raised by forced meandering, deficit pulsing and ambient turbulence,
and the flow at any cross-plane is reconstructed from the two markers that
bracket it.

Coordinates: ``x`` downstream, ``y`` horizontal (positive to the right when
looking downstream from upstream), ``z`` vertical relative to hub height.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidInputError

MAX_DT = 2.0
_ORDER_EPS = 1e-6  # m, minimum marker separation
_MAX_CT = 0.999


@dataclass(frozen=True)
class InflowModel:
    """Free-stream speed [m/s], turbulence intensity and integral time scale [s]."""

    u_inf: float = 9.0
    turbulence_intensity: float = 0.05
    integral_time: float = 20.0

    def __post_init__(self):
        if not (np.isfinite(self.u_inf) and self.u_inf > 0):
            raise InvalidInputError(f"u_inf must be positive, got {self.u_inf}", "u_inf")
        if not (0.0 <= self.turbulence_intensity <= 0.3):
            raise InvalidInputError(
                f"turbulence_intensity must be in [0, 0.3], got {self.turbulence_intensity}",
                "turbulence_intensity",
            )
        if not (np.isfinite(self.integral_time) and self.integral_time > 0):
            raise InvalidInputError(f"integral_time must be positive, got {self.integral_time}", "integral_time")

    @property
    def sigma_u(self) -> float:
        return self.turbulence_intensity * self.u_inf


@dataclass(frozen=True)
class MixingParams:
    """Wake recovery and geometry coefficients.

    ``k_base`` is the deficit decay rate per rotor diameter travelled.
    ``initial_width``, ``deflection_arm`` and ``x_max`` are in rotor diameters;
    ``width_growth`` is metres of Gaussian width per metre downstream.
    """

    k_base: float = 0.08
    c_meander: float = 2.0
    c_ti: float = 4.0
    width_growth: float = 0.03
    initial_width: float = 0.25
    deflection_arm: float = 3.0
    x_max: float = 10.0

    def __post_init__(self):
        for name in ("k_base", "c_meander", "c_ti", "width_growth"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise InvalidInputError(f"{name} must be non-negative, got {value}", name)
        for name in ("initial_width", "deflection_arm", "x_max"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive, got {value}", name)


class OrnsteinUhlenbeck:
    """Longitudinal inflow perturbation with exponential autocorrelation.

    Uses the exact discretisation of the OU process, so the stationary
    standard deviation is ``TI * u_inf`` for any step size. The first value is
    drawn from the stationary distribution.
    """

    def __init__(self, inflow: InflowModel, seed: int):
        self.inflow = inflow
        self._rng = np.random.default_rng(seed)
        self.value = inflow.sigma_u * self._rng.standard_normal()

    def step(self, dt: float) -> float:
        if not dt > 0:
            raise InvalidInputError(f"dt must be positive, got {dt}", "dt")
        a = np.exp(-dt / self.inflow.integral_time)
        noise = self._rng.standard_normal()
        self.value = a * self.value + self.inflow.sigma_u * np.sqrt(1.0 - a * a) * noise
        return self.value


def turbulence_sample(inflow: InflowModel, dt: float, state: OrnsteinUhlenbeck) -> float:
    """Advance ``state`` by ``dt`` and return the new perturbation [m/s]."""
    return state.step(dt)


def turbulence_series(inflow: InflowModel, n_steps: int, dt: float, seed: int) -> np.ndarray:
    process = OrnsteinUhlenbeck(inflow, seed)
    out = np.empty(n_steps)
    out[0] = process.value
    for i in range(1, n_steps):
        out[i] = process.step(dt)
    return out


class WakeMarker(NamedTuple):
    x: float
    y_off: float
    z_off: float
    deficit: float
    width: float
    t_emit: float


class PlaneSample(NamedTuple):
    y_off: float
    z_off: float
    deficit: float
    width: float


def initial_deficit(ct: float) -> float:
    """Fully expanded actuator-disk deficit ``1 - sqrt(1 - C_T)``."""
    return 1.0 - np.sqrt(1.0 - np.clip(ct, 0.0, _MAX_CT))


class WakeState:
    """Markers shed by one turbine plus the filters that drive them.

    Marker arrays are stored youngest first, so ``x`` increases with index.
    ``x_origin``/``y_origin`` place the turbine in farm coordinates; marker
    positions are relative to it.
    """

    _ARRAYS = ("x", "y_off", "z_off", "deficit", "width", "k_eff", "t_emit")

    def __init__(self, diameter: float, x_origin: float = 0.0, y_origin: float = 0.0,
                 x_max: float | None = None):
        if not diameter > 0:
            raise InvalidInputError("diameter must be positive", "diameter")
        self.diameter = float(diameter)
        self.x_origin = float(x_origin)
        self.y_origin = float(y_origin)
        self.x_max = 10.0 * self.diameter if x_max is None else float(x_max)
        for name in self._ARRAYS:
            setattr(self, name, np.empty(0))
        self.deflection_y = 0.0
        self.deflection_z = 0.0
        self.time = 0.0
        self._defl_mean = np.zeros(2)
        self._defl_var = 0.0
        self._pulse_lag = None
        self._pulse_mean = None
        self._pulse_var = 0.0

    def copy(self) -> "WakeState":
        other = WakeState.__new__(WakeState)
        other.__dict__.update(self.__dict__)
        for name in self._ARRAYS:
            setattr(other, name, getattr(self, name).copy())
        other._defl_mean = self._defl_mean.copy()
        return other

    def __len__(self) -> int:
        return len(self.x)

    @property
    def markers(self) -> list[WakeMarker]:
        return [WakeMarker(*row) for row in zip(self.x, self.y_off, self.z_off, self.deficit,
                                                  self.width, self.t_emit)]

    @property
    def meander_intensity(self) -> float:
        """RMS of the band-passed near-wake displacement [m]."""
        return float(np.sqrt(self._defl_var))

    @property
    def pulse_intensity(self) -> float:
        """RMS of the band-passed emitted deficit (dimensionless)."""
        return float(np.sqrt(self._pulse_var))

    def recovery_rate(self, mixing: MixingParams, inflow: InflowModel) -> float:
        """Deficit decay rate per diameter for a marker shed now."""
        forcing = self.meander_intensity / self.diameter + self.pulse_intensity
        return mixing.k_base * (1.0 + mixing.c_meander * forcing + mixing.c_ti * inflow.turbulence_intensity)

    def sample_plane(self, local_x: float) -> PlaneSample | None:
        """Wake properties at ``local_x`` metres behind the turbine, or ``None`` if no wake is there."""
        if local_x > self.x_max * (1.0 + 1e-12):
            raise InvalidInputError(
                f"plane {local_x:.1f} m behind the turbine is beyond the wake extent {self.x_max:.1f} m",
                "plane_x",
            )
        x = self.x
        if local_x <= 0 or len(x) == 0 or local_x > x[-1]:
            return None
        i = int(np.searchsorted(x, local_x))
        if i == 0:
            return PlaneSample(self.y_off[0], self.z_off[0], self.deficit[0], self.width[0])
        f = (local_x - x[i - 1]) / (x[i] - x[i - 1])
        g = 1.0 - f
        return PlaneSample(g * self.y_off[i - 1] + f * self.y_off[i], g * self.z_off[i - 1] + f * self.z_off[i],
                           g * self.deficit[i - 1] + f * self.deficit[i], g * self.width[i - 1] + f * self.width[i])


def _update_filters(state: WakeState, a0: float, alpha: float, beta: float):
    d = np.array([state.deflection_y, state.deflection_z])
    state._defl_mean += alpha * (d - state._defl_mean)
    dev = d - state._defl_mean
    state._defl_var += beta * (float(dev @ dev) - state._defl_var)
    if state._pulse_lag is None:
        state._pulse_lag = state._pulse_mean = a0
    state._pulse_lag += alpha * (a0 - state._pulse_lag)
    state._pulse_mean += alpha * (state._pulse_lag - state._pulse_mean)
    state._pulse_var += beta * ((state._pulse_lag - state._pulse_mean) ** 2 - state._pulse_var)


def _monotone(x_young_first: np.ndarray) -> np.ndarray:
    """Clamp positions so each marker stays strictly behind the older one ahead of it."""
    r = x_young_first[::-1]
    j = np.arange(len(r)) * _ORDER_EPS
    return (np.minimum.accumulate(r + j) - j)[::-1]


def emit_and_advect(state: WakeState, aero, inflow: InflowModel, mixing: MixingParams,
                    dt: float) -> WakeState:
    """Advance ``state`` by one step in place and return it.

    The near-wake displacement relaxes toward ``deflection_arm * D`` times the
    thrust-vector angles with time constant ``D / u_inf``; a marker is shed
    at the rotor; all markers convect at ``u_inf * (1 - deficit / 2)`` while
    their deficit decays and width grows with distance travelled.
    """
    if not (0.0 < dt <= MAX_DT):
        raise InvalidInputError(f"dt must be in (0, {MAX_DT:g}] s, got {dt}", "dt")
    diameter = state.diameter
    tau = diameter / inflow.u_inf
    alpha = 1.0 - np.exp(-dt / tau)
    beta = 1.0 - np.exp(-dt / (4.0 * tau))

    arm = mixing.deflection_arm * diameter
    state.deflection_y += alpha * (arm * aero.thrust_yaw - state.deflection_y)
    state.deflection_z += alpha * (arm * aero.thrust_tilt - state.deflection_z)
    a0 = initial_deficit(aero.effective_ct) if aero.thrust_magnitude > 0 else 0.0
    _update_filters(state, a0, alpha, beta)

    new = (0.0, state.deflection_y, state.deflection_z, a0, mixing.initial_width * diameter,
           state.recovery_rate(mixing, inflow), state.time)
    for name, value in zip(WakeState._ARRAYS, new):
        setattr(state, name, np.concatenate(([value], getattr(state, name))))

    x_old = state.x
    x_new = _monotone(x_old + inflow.u_inf * (1.0 - 0.5 * state.deficit) * dt)
    travelled = x_new - x_old
    state.x = x_new
    state.deficit = state.deficit * np.exp(-state.k_eff * travelled / diameter)
    state.width = state.width + mixing.width_growth * travelled
    state.time += dt

    keep = state.x <= state.x_max
    if not keep.all():
        for name in WakeState._ARRAYS:
            setattr(state, name, getattr(state, name)[keep])
    return state


def _disk_rule(n_azimuth: int = 24, n_radial: int = 6):
    # Gauss-Legendre in s = (r/R)^2, for which dA is uniform; weights sum to 1.
    s, w = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    phi = 2.0 * np.pi * (np.arange(n_azimuth) + 0.5) / n_azimuth
    r = np.sqrt(s)
    yy = np.outer(r, np.cos(phi)).ravel()
    zz = np.outer(r, np.sin(phi)).ravel()
    ww = np.repeat(w / n_azimuth, n_azimuth)
    return yy, zz, ww


DISK_Y, DISK_Z, DISK_W = _disk_rule()


def _as_states(states) -> Sequence[WakeState]:
    return [states] if isinstance(states, WakeState) else list(states)


def deficit_at(states, plane_x: float, y, z) -> np.ndarray:
    """Summed fractional deficit of all ``states`` at points (y, z) of plane ``plane_x``."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    total = np.zeros(np.broadcast(y, z).shape)
    for state in _as_states(states):
        sample = state.sample_plane(plane_x - state.x_origin)
        if sample is None or sample.deficit == 0.0:
            continue
        dy = y - state.y_origin - sample.y_off
        dz = z - sample.z_off
        total += sample.deficit * np.exp(-(dy * dy + dz * dz) / (2.0 * sample.width**2))
    return total


def disk_velocities(states, u_ambient: float, center, plane_x: float, diameter: float) -> np.ndarray:
    """Velocity at each node of the 24x6 disk rule; weights are ``DISK_W``."""
    radius = 0.5 * diameter
    y = center[0] + radius * DISK_Y
    z = center[1] + radius * DISK_Z
    return u_ambient * np.clip(1.0 - deficit_at(states, plane_x, y, z), 0.0, None)


def sample_rotor_velocity(states, u_ambient: float, center, plane_x: float, diameter: float) -> float:
    """Disk-averaged streamwise velocity [m/s] over a rotor-sized disk at ``center``."""
    return float(DISK_W @ disk_velocities(states, u_ambient, center, plane_x, diameter))


def kinetic_energy_flux(states, u_ambient: float, plane_x: float, diameter: float,
                        air_density: float, center=(0.0, 0.0)) -> float:
    """Instantaneous flux ``0.5 rho \\int u^3 dA`` [W] through a rotor-sized disk."""
    u = disk_velocities(states, u_ambient, center, plane_x, diameter)
    area = np.pi * diameter**2 / 4.0
    return float(0.5 * air_density * area * (DISK_W @ u**3))


def wake_center(state: WakeState, plane_x: float) -> tuple[float, float]:
    """Wake-centre (y, z) in farm coordinates at plane ``plane_x``; NaN if the wake has not arrived."""
    sample = state.sample_plane(plane_x - state.x_origin)
    if sample is None:
        return (np.nan, np.nan)
    return (state.y_origin + sample.y_off, sample.z_off)


def wake_center_trace(history: Iterable[WakeState], plane_x: float) -> np.ndarray:
    """Stack :func:`wake_center` over a sequence of wake snapshots; shape (n, 2)."""
    return np.array([wake_center(state, plane_x) for state in history], dtype=float).reshape(-1, 2)
