"""Time-marching farm simulation, aggregate metrics and baseline-relative reports."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .excitation import (
    ExcitationTiming,
    StrategyKind,
    StrategySpec,
    blade_pitch_commands,
    blade_pitch_rates,
    fixed_frame_setpoints,
)
from .mbc import blade_azimuths, forward_mbc
from .rotor import PRESETS, RotorState, TurbineParameters, aero_response, blade_load_surrogate
from .wake import (
    InflowModel,
    MixingParams,
    OrnsteinUhlenbeck,
    WakeState,
    emit_and_advect,
    kinetic_energy_flux,
    sample_rotor_velocity,
    wake_center,
)

DEFAULT_SPACING_D = 5.0
DEFAULT_PLANES_D = (3.0, 5.0, 7.0)
MIN_PERIODS = 5
THREADS_ENV = "HELIX_SIM_THREADS"


@dataclass(frozen=True)
class FarmLayout:
    """Turbine hub positions (x, y) [m] along a single row, upstream first."""

    positions: tuple = ((0.0, 0.0),)

    def __post_init__(self):
        positions = tuple((float(x), float(y)) for x, y in self.positions)
        if not positions:
            raise InvalidInputError("layout needs at least one turbine", "positions")
        xs = [p[0] for p in positions]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidInputError("turbine x positions must be strictly increasing", "positions")
        object.__setattr__(self, "positions", positions)

    @classmethod
    def row(cls, n_turbines: int = 2, spacing_d: float = DEFAULT_SPACING_D, diameter: float = 178.3,
            y_offset_d: float = 0.0) -> "FarmLayout":
        """``n_turbines`` spaced ``spacing_d`` diameters apart; downstream ones shifted by ``y_offset_d``."""
        if n_turbines < 1:
            raise InvalidInputError("n_turbines must be at least 1", "n_turbines")
        if not spacing_d > 0:
            raise InvalidInputError("spacing_d must be positive", "spacing_d")
        return cls(tuple((i * spacing_d * diameter, (y_offset_d * diameter if i else 0.0))
                         for i in range(n_turbines)))

    @property
    def n_turbines(self) -> int:
        return len(self.positions)

    def validate(self, diameter: float):
        for x, y in self.positions:
            if abs(y) > 2.0 * diameter:
                raise InvalidInputError(f"lateral offset {y} m exceeds 2 D", "positions")


@dataclass(frozen=True)
class SimulationConfig:
    """Step size, spans and output cadence [s].

    ``duration`` and ``warmup`` default to ``None``: warmup is then two farm
    flow-through times and duration adds ``n_periods`` excitation periods.
    ``output_step`` must be a whole multiple of ``dt`` (default ``dt``).
    """

    dt: float = 0.25
    duration: float | None = None
    warmup: float | None = None
    seed: int = 0
    output_step: float | None = None
    n_periods: int = 10

    def __post_init__(self):
        if not (0.0 < self.dt <= 2.0):
            raise InvalidInputError(f"dt must be in (0, 2] s, got {self.dt}", "dt")
        if self.warmup is not None and self.warmup < 0:
            raise InvalidInputError("warmup must be non-negative", "warmup")
        if self.duration is not None and not self.duration > 0:
            raise InvalidInputError("duration must be positive", "duration")
        if self.duration is not None and self.warmup is not None and self.duration <= self.warmup:
            raise InvalidInputError("duration must exceed warmup", "duration")
        step = self.dt if self.output_step is None else self.output_step
        ratio = step / self.dt
        if step < self.dt or abs(ratio - round(ratio)) > 1e-9:
            raise InvalidInputError("output_step must be a whole multiple of dt", "output_step")
        if self.n_periods < 1:
            raise InvalidInputError("n_periods must be at least 1", "n_periods")

    @property
    def stride(self) -> int:
        return 1 if self.output_step is None else int(round(self.output_step / self.dt))


@dataclass
class TurbineSeries:
    """Recorded signals of one turbine; ``pitch``/``pitch_rate``/``moments`` are (n, 3)."""

    time: np.ndarray
    power: np.ndarray
    thrust: np.ndarray
    thrust_tilt: np.ndarray
    thrust_yaw: np.ndarray
    pitch: np.ndarray
    pitch_rate: np.ndarray
    u_eff: np.ndarray
    moments: np.ndarray  # fixed-frame (M0, M_tilt, M_yaw) of the blade root moments


@dataclass
class PlaneSeries:
    distance_d: float
    plane_x: float
    time: np.ndarray
    y_center: np.ndarray
    z_center: np.ndarray
    disk_avg_u: np.ndarray
    ke_flux: np.ndarray


@dataclass
class CaseResult:
    name: str
    strategies: tuple
    layout: FarmLayout
    turbine: TurbineParameters
    inflow: InflowModel
    mixing: MixingParams
    sim: SimulationConfig
    reference_period: float
    warmup: float
    duration: float
    turbines: list = field(default_factory=list)
    planes: list = field(default_factory=list)

    @property
    def metrics(self) -> dict:
        return compute_metrics(self)

    def plane(self, distance_d: float) -> PlaneSeries:
        for p in self.planes:
            if math.isclose(p.distance_d, distance_d):
                return p
        raise KeyError(distance_d)


class _FrozenTurbulence:
    """Inflow perturbation history, convected downstream at ``u_inf`` (Taylor's hypothesis)."""

    def __init__(self, process: OrnsteinUhlenbeck, dt: float, u_inf: float):
        self.process = process
        self.dt = dt
        self.u_inf = u_inf
        self.history = []

    def record(self):
        self.history.append(self.process.value)

    def at(self, distance: float) -> float:
        """Perturbation now seen ``distance`` metres downstream of the first turbine."""
        lag = distance / self.u_inf / self.dt
        pos = len(self.history) - 1 - lag
        if pos <= 0:
            return self.history[0]
        lo = int(pos)
        frac = pos - lo
        if frac == 0.0:
            return self.history[lo]
        return (1.0 - frac) * self.history[lo] + frac * self.history[lo + 1]


def resolve_spans(layout: FarmLayout, turbine: TurbineParameters, inflow: InflowModel,
                  mixing: MixingParams, sim: SimulationConfig, reference_period: float):
    """Return (warmup, duration) with defaults filled in and snapped to the step grid."""
    if sim.warmup is None:
        extent = layout.positions[-1][0] - layout.positions[0][0] + mixing.x_max * turbine.rotor_diameter
        warmup = 2.0 * extent / inflow.u_inf
    else:
        warmup = sim.warmup
    warmup = math.ceil(warmup / sim.dt - 1e-9) * sim.dt
    duration = sim.duration if sim.duration is not None else warmup + sim.n_periods * reference_period
    if duration <= warmup:
        raise InvalidInputError("duration must exceed warmup", "duration")
    return warmup, duration


def _reference_timing(strategy: StrategySpec, turbine: TurbineParameters, inflow: InflowModel):
    return ExcitationTiming.from_strouhal(strategy.strouhal, turbine.rotor_diameter, inflow.u_inf)


def run_case(layout: FarmLayout, strategies: Sequence[StrategySpec], turbine: TurbineParameters | None = None,
             inflow: InflowModel | None = None, mixing: MixingParams | None = None,
             sim: SimulationConfig | None = None, name: str = "case",
             planes_d: Sequence[float] = DEFAULT_PLANES_D) -> CaseResult:
    """Simulate one case and return its recorded series.

    Per step: inflow perturbation, pitch commands, rotor response, wake
    update; downstream turbines see the disk-averaged wake of every turbine
    upstream of them. Wake planes are placed ``planes_d`` diameters behind the
    first turbine.
    """
    turbine = turbine or PRESETS["DTU10MW"]
    inflow = inflow or InflowModel()
    mixing = mixing or MixingParams()
    sim = sim or SimulationConfig()
    strategies = tuple(strategies)
    diameter = turbine.rotor_diameter
    x0, y0 = layout.positions[0]

    problems = []
    if len(strategies) != layout.n_turbines:
        problems.append(("strategies", f"{len(strategies)} strategies for {layout.n_turbines} turbines"))
    for i, spec in enumerate(strategies[1:], start=2):
        if spec.kind is not StrategyKind.BASELINE:
            problems.append((f"strategy.{i}.kind", "downstream turbines must run the baseline strategy"))
    for d in planes_d:
        if not (0 < d <= mixing.x_max):
            problems.append(("planes", f"plane at {d:g} D lies outside the wake extent (0, {mixing.x_max:g}] D"))
    if problems:
        raise ConfigurationError("; ".join(f"{k}: {m}" for k, m in problems), [k for k, _ in problems])
    layout.validate(diameter)

    timings = [_reference_timing(spec, turbine, inflow) for spec in strategies]
    reference_period = timings[0].period_T_e
    warmup, duration = resolve_spans(layout, turbine, inflow, mixing, sim, reference_period)
    n_steps = int(math.floor(duration / sim.dt + 1e-9))
    n_warm = int(round(warmup / sim.dt))
    rotor = RotorState(0.0, turbine.rotor_speed, 0.0)

    turbulence = _FrozenTurbulence(OrnsteinUhlenbeck(inflow, sim.seed), sim.dt, inflow.u_inf)
    wakes = [WakeState(diameter, x, y, mixing.x_max * diameter) for x, y in layout.positions]
    planes_x = [x0 + d * diameter for d in planes_d]

    n_rec = (n_steps - n_warm) // sim.stride + 1
    # Open-loop setpoints do not depend on the flow, so evaluate them up front.
    step_times = np.arange(n_steps + 1) * sim.dt
    setpoints = [np.asarray(fixed_frame_setpoints(step_times, spec, timing)).tolist()
                 for spec, timing in zip(strategies, timings)]
    rec = [{k: np.empty(n_rec) for k in ("power", "thrust", "thrust_tilt", "thrust_yaw", "u_eff")}
           for _ in strategies]
    plane_rec = [{k: np.empty(n_rec) for k in ("y", "z", "u", "ke")} for _ in planes_d]
    times = np.empty(n_rec)
    k = 0

    for n in range(n_steps + 1):
        t = n * sim.dt
        turbulence.record()
        recording = n >= n_warm and (n - n_warm) % sim.stride == 0
        for i, ((x, y), spec) in enumerate(zip(layout.positions, strategies)):
            u_amb = inflow.u_inf + turbulence.at(x - x0)
            if i == 0:
                u_eff = u_amb
            else:
                u_eff = sample_rotor_velocity(wakes[:i], u_amb, (y, 0.0), x, diameter)
            aero = aero_response(max(u_eff, 0.0), setpoints[i][n], turbine)
            if recording:
                r = rec[i]
                r["power"][k] = aero.power
                r["thrust"][k] = aero.thrust_magnitude
                r["thrust_tilt"][k] = aero.thrust_tilt
                r["thrust_yaw"][k] = aero.thrust_yaw
                r["u_eff"][k] = u_eff
            emit_and_advect(wakes[i], aero, inflow, mixing, sim.dt)
        if recording:
            times[k] = t
            for j, px in enumerate(planes_x):
                u_amb = inflow.u_inf + turbulence.at(px - x0)
                cy, cz = wake_center(wakes[0], px)
                p = plane_rec[j]
                p["y"][k], p["z"][k] = cy, cz
                p["u"][k] = sample_rotor_velocity(wakes, u_amb, (y0, 0.0), px, diameter)
                p["ke"][k] = kinetic_energy_flux(wakes, u_amb, px, diameter, turbine.air_density, (y0, 0.0))
            k += 1
        turbulence.process.step(sim.dt)

    result = CaseResult(name, strategies, layout, turbine, inflow, mixing, sim, reference_period, warmup, duration)
    times = times[:k]
    azimuths = blade_azimuths(rotor.azimuth + rotor.omega_r * times)
    for r, spec, timing in zip(rec, strategies, timings):
        pitch = np.asarray(blade_pitch_commands(times, rotor, spec, timing)).reshape(-1, 3)
        u_eff = r["u_eff"][:k]
        loads = np.asarray(blade_load_surrogate(u_eff, pitch, rotor, turbine)).reshape(-1, 3)
        result.turbines.append(TurbineSeries(
            time=times.copy(), power=r["power"][:k], thrust=r["thrust"][:k],
            thrust_tilt=r["thrust_tilt"][:k], thrust_yaw=r["thrust_yaw"][:k], pitch=pitch,
            pitch_rate=np.asarray(blade_pitch_rates(times, rotor, spec, timing)).reshape(-1, 3),
            u_eff=u_eff, moments=np.asarray(forward_mbc(azimuths, loads)).reshape(-1, 3)))
    for d, px, p in zip(planes_d, planes_x, plane_rec):
        result.planes.append(PlaneSeries(float(d), px, times.copy(), p["y"][:k], p["z"][:k],
                                         p["u"][:k], p["ke"][:k]))
    return result


def averaging_window(result: CaseResult) -> np.ndarray:
    """Boolean mask of samples inside the whole excitation periods after warmup."""
    t = result.turbines[0].time
    span = result.duration - result.warmup
    n_periods = int(math.floor(span / result.reference_period + 1e-9))
    if n_periods < MIN_PERIODS:
        raise InvalidInputError(
            f"post-warmup span {span:.1f} s holds {n_periods} excitation periods; need {MIN_PERIODS}",
            "duration",
        )
    end = result.warmup + n_periods * result.reference_period
    return (t >= result.warmup - 1e-9) & (t < end - 1e-9)


def _plane_key(prefix: str, distance_d: float) -> str:
    return f"{prefix}_{distance_d:g}D"


def compute_metrics(result: CaseResult) -> dict:
    """Aggregates over whole excitation periods after warmup.

    Variances use the unbiased estimator on output samples. Pitch variation
    is given both as mean ``|d theta/dt|`` and RMS of ``d theta/dt`` in deg/min,
    pooled over the three blades.
    """
    mask = averaging_window(result)
    out = {}
    for i, s in enumerate(result.turbines, start=1):
        rate = s.pitch_rate[mask] * 60.0
        out[f"power_mean_T{i}"] = float(np.mean(s.power[mask]))
        out[f"power_var_T{i}"] = float(np.var(s.power[mask], ddof=1))
        out[f"thrust_mean_T{i}"] = float(np.mean(s.thrust[mask]))
        out[f"thrust_var_T{i}"] = float(np.var(s.thrust[mask], ddof=1))
        out[f"u_eff_mean_T{i}"] = float(np.mean(s.u_eff[mask]))
        out[f"pitch_rate_abs_T{i}"] = float(np.mean(np.abs(rate)))
        out[f"pitch_rate_rms_T{i}"] = float(np.sqrt(np.mean(rate**2)))
    out["farm_power"] = float(sum(out[f"power_mean_T{i}"] for i in range(1, len(result.turbines) + 1)))
    for p in result.planes:
        out[_plane_key("ke_flux", p.distance_d)] = float(np.mean(p.ke_flux[mask]))
        out[_plane_key("u_mean", p.distance_d)] = float(np.mean(p.disk_avg_u[mask]))
    return out


@dataclass
class RelativeReport:
    """Percentage change of every aggregate against ``baseline``; ``None`` where undefined."""

    baseline: str
    cases: list
    keys: list
    deltas: dict
    absolute: dict

    def delta(self, case: str, key: str):
        return self.deltas[case][key]


def relative_report(results, baseline_id: str) -> RelativeReport:
    """``results`` is a sequence of :class:`CaseResult` or a mapping name -> metrics."""
    if isinstance(results, Mapping):
        metrics = dict(results)
    else:
        metrics = {r.name: r.metrics for r in results}
    if baseline_id not in metrics:
        raise InvalidInputError(f"baseline {baseline_id!r} not among cases {list(metrics)}", "baseline_id")
    base = metrics[baseline_id]
    keys = list(base)
    deltas = {}
    for name, values in metrics.items():
        row = {}
        for key in keys:
            ref = base[key]
            row[key] = None if ref == 0 or key not in values else (values[key] - ref) / ref * 100.0
        deltas[name] = row
    return RelativeReport(baseline_id, list(metrics), keys, deltas, metrics)


class StudyCase(NamedTuple):
    case_id: str
    label: str
    strategy: StrategySpec


def study_cases() -> list[StudyCase]:
    """The nine upstream-turbine strategies in the order they are numbered in the study."""
    specs = [
        StrategySpec(StrategyKind.BASELINE),
        StrategySpec(StrategyKind.STATIC_INDUCTION, 1.0),
        StrategySpec(StrategyKind.STATIC_INDUCTION, 2.0),
        StrategySpec(StrategyKind.DYNAMIC_INDUCTION, 2.5),
        StrategySpec(StrategyKind.HELIX_CCW, 2.5),
        StrategySpec(StrategyKind.HELIX_CW, 2.5),
        StrategySpec(StrategyKind.DYNAMIC_INDUCTION, 4.0),
        StrategySpec(StrategyKind.HELIX_CCW, 4.0),
        StrategySpec(StrategyKind.HELIX_CW, 4.0),
    ]
    ids = ["baseline", "static_1", "static_2", "dic_2.5", "helix_ccw_2.5", "helix_cw_2.5",
           "dic_4", "helix_ccw_4", "helix_cw_4"]
    return [StudyCase(i, s.label, s) for i, s in zip(ids, specs)]


def worker_count(n_jobs: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            limit = int(env)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {env!r}", [THREADS_ENV]) from None
        if limit < 1:
            raise ConfigurationError(f"{THREADS_ENV} must be at least 1", [THREADS_ENV])
    else:
        limit = os.cpu_count() or 1
    return max(1, min(limit, n_jobs))


def _run_job(kwargs):
    return run_case(**kwargs)


def run_cases(jobs: Sequence[dict]) -> list[CaseResult]:
    """Run independent :func:`run_case` keyword sets, in parallel when allowed; order is preserved."""
    workers = worker_count(len(jobs))
    if workers == 1:
        return [run_case(**job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def run_strategy_suite(two_turbine: bool = True, turbine: TurbineParameters | None = None,
                    inflow: InflowModel | None = None, mixing: MixingParams | None = None,
                    sim: SimulationConfig | None = None, spacing_d: float = DEFAULT_SPACING_D,
                    strouhal: float = 0.25) -> list[CaseResult]:
    """Run the nine study cases on the upstream turbine; any downstream turbine stays greedy."""
    turbine = turbine or PRESETS["DTU10MW"]
    layout = FarmLayout.row(2 if two_turbine else 1, spacing_d, turbine.rotor_diameter)
    jobs = []
    for case in study_cases():
        spec = replace(case.strategy, strouhal=strouhal)
        strategies = (spec,) + (StrategySpec(StrategyKind.BASELINE, strouhal=strouhal),) * (layout.n_turbines - 1)
        jobs.append(dict(layout=layout, strategies=strategies, turbine=turbine, inflow=inflow,
                         mixing=mixing, sim=sim, name=case.case_id))
    return run_cases(jobs)


class SweepRow(NamedTuple):
    strouhal: float
    plane_d: float
    normalized_u: float


def sweep_strouhal(st_values: Sequence[float], kind=StrategyKind.DYNAMIC_INDUCTION, amplitude: float = 4.0,
                   planes: Sequence[float] = DEFAULT_PLANES_D, turbine: TurbineParameters | None = None,
                   inflow: InflowModel | None = None, mixing: MixingParams | None = None,
                   sim: SimulationConfig | None = None) -> list[SweepRow]:
    """Time-averaged disk velocity behind one excited turbine, normalized by the baseline case.

    Runs in laminar inflow unless ``inflow`` says otherwise.
    """
    st_values = [float(s) for s in st_values]
    bad = [s for s in st_values if not (0.05 < s <= 1.0)]
    if bad:
        raise InvalidInputError(f"Strouhal numbers must lie in (0.05, 1.0], got {bad}", "st_values")
    turbine = turbine or PRESETS["DTU10MW"]
    inflow = inflow or InflowModel(turbulence_intensity=0.0)
    layout = FarmLayout.row(1, diameter=turbine.rotor_diameter)
    common = dict(layout=layout, turbine=turbine, inflow=inflow, mixing=mixing, sim=sim, planes_d=tuple(planes))
    jobs = [dict(common, strategies=(StrategySpec(StrategyKind.BASELINE),), name="baseline")]
    for st in st_values:
        jobs.append(dict(common, strategies=(StrategySpec(kind, amplitude, st),), name=f"st_{st:g}"))
    results = run_cases(jobs)
    base = results[0].metrics
    rows = []
    for st, res in zip(st_values, results[1:]):
        m = res.metrics
        for d in planes:
            key = _plane_key("u_mean", d)
            rows.append(SweepRow(st, float(d), m[key] / base[key]))
    return rows
