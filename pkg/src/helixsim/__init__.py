"""Desk-scale surrogate of wake-mixing control on a wind turbine row.

Covers the multi-blade coordinate transform, static and dynamic induction and
helix pitch excitation, a quasi-steady rotor, a Lagrangian wake marker model
and a farm driver with suite and Strouhal sweep runners.
"""
from .errors import ConfigurationError, HelixSimError, InvalidInputError
from .mbc import (BladeAzimuths, BladeVector, FixedFrameVector, blade_azimuths, forward_mbc, inverse_mbc,
                  is_equally_spaced)
from .excitation import (ExcitationTiming, FixedFramePitch, StrategyKind, StrategySpec, blade_pitch_commands,
                         blade_pitch_rates, dominant_pitch_frequency, excitation_period, fixed_frame_rates,
                         fixed_frame_setpoints, strouhal_frequency)
from .rotor import (PRESETS, AeroOutput, BladeLoads, RotorState, TurbineParameters, aero_response,
                    blade_load_surrogate, cp_curve, ct_curve, get_preset, load_turbine_preset)
from .wake import (InflowModel, MixingParams, OrnsteinUhlenbeck, PlaneSample, WakeMarker, WakeState,
                   deficit_at, emit_and_advect, kinetic_energy_flux, sample_rotor_velocity, turbulence_sample,
                   turbulence_series, wake_center, wake_center_trace)
from .farm import (CaseResult, FarmLayout, RelativeReport, SimulationConfig, SweepRow, compute_metrics,
                   study_cases, relative_report, run_case, run_cases, run_strategy_suite, sweep_strouhal)
from .config import RunConfig, format_config, load_config, parse_config

__version__ = "0.1.0"
