"""Acceptance criteria, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import time

import numpy as np
import pytest

from helixsim.cli import main
from helixsim.excitation import StrategyKind, StrategySpec, excitation_period, strouhal_frequency
from helixsim.farm import FarmLayout, SimulationConfig, averaging_window, relative_report, run_case
from helixsim.mbc import blade_azimuths, forward_mbc, inverse_mbc
from helixsim.rotor import PRESETS
from helixsim.signals import (bin_containing, bin_power_fraction, dominant_bin, fit_sinusoid, mean_period,
                              signed_area, wrap_degrees)
from helixsim.wake import InflowModel, WakeState, sample_rotor_velocity, turbulence_series

P = PRESETS["DTU10MW"]
D = P.rotor_diameter
UNIFORM = InflowModel(turbulence_intensity=0.0)
SINGLE = FarmLayout.row(1)
F_R = 0.12


def _single(kind, amplitude=4.0, **sim):
    return run_case(SINGLE, [StrategySpec(kind, amplitude)], inflow=UNIFORM, sim=SimulationConfig(**sim))


@pytest.mark.criterion(1, "Strouhal timing")
def test_strouhal_timing():
    assert abs(strouhal_frequency(0.25, 178.3, 9.0) - 0.012619) < 1e-4
    assert abs(excitation_period(0.25, 178.3, 9.0) - 79.24) < 0.01


@pytest.mark.criterion(2, "MBC identity over 1000 random round trips")
def test_mbc_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    psi = blade_azimuths(rng.uniform(-10 * np.pi, 10 * np.pi, 1000))
    fixed = rng.uniform(-15.0, 15.0, (1000, 3))
    back = forward_mbc(psi, inverse_mbc(psi, fixed))
    assert np.max(np.abs(back - fixed)) < 1e-12
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(3, "Helix blade-pitch frequency shift")
@pytest.mark.parametrize("kind,f_target", [(StrategyKind.HELIX_CCW, 0.1326), (StrategyKind.HELIX_CW, 0.1074)])
def test_helix_frequency_shift(kind, f_target):
    start = time.perf_counter()
    res = run_case(SINGLE, [StrategySpec(kind, 4.0)], inflow=UNIFORM,
                   sim=SimulationConfig(dt=0.1, warmup=0.0, duration=600.0), planes_d=())
    trace = res.turbines[0].pitch[:, 0]
    dt = 0.1
    f_e = 1.0 / res.reference_period
    f_theta = F_R + f_e if kind is StrategyKind.HELIX_CCW else F_R - f_e
    assert f_theta == pytest.approx(f_target, abs=1e-4)
    assert dominant_bin(trace, dt) == bin_containing(f_theta, len(trace), dt)
    assert bin_power_fraction(trace, dt, f_theta) >= 0.99
    assert time.perf_counter() - start < 5.0


@pytest.mark.criterion(4, "Thrust/power smoothness contrast in uniform inflow")
def test_smoothness_contrast():
    start = time.perf_counter()
    cov = {}
    power_var = {}
    for kind, amp in [(StrategyKind.HELIX_CCW, 4.0), (StrategyKind.HELIX_CW, 4.0),
                      (StrategyKind.DYNAMIC_INDUCTION, 4.0), (StrategyKind.DYNAMIC_INDUCTION, 2.5)]:
        res = _single(kind, amp, n_periods=5)
        thrust = res.turbines[0].thrust[averaging_window(res)]
        cov[kind, amp] = np.std(thrust) / np.mean(thrust)
        power_var[kind, amp] = res.metrics["power_var_T1"]
    assert cov[StrategyKind.HELIX_CCW, 4.0] <= 1e-12
    assert cov[StrategyKind.HELIX_CW, 4.0] <= 1e-12
    assert cov[StrategyKind.DYNAMIC_INDUCTION, 4.0] > 0.05
    assert power_var[StrategyKind.DYNAMIC_INDUCTION, 4.0] > power_var[StrategyKind.DYNAMIC_INDUCTION, 2.5]
    assert time.perf_counter() - start < 30.0


@pytest.mark.criterion(5, "Wake-centre circle at 3D")
def test_wake_circle():
    start = time.perf_counter()
    areas = {}
    for kind in (StrategyKind.HELIX_CCW, StrategyKind.HELIX_CW):
        res = _single(kind, n_periods=5)
        p = res.plane(3.0)
        step = p.time[1] - p.time[0]
        for channel in (p.y_center, p.z_center):
            assert mean_period(p.time, channel) == pytest.approx(79.24, abs=step)
        last = p.time >= p.time[-1] - res.reference_period
        areas[kind] = signed_area(p.y_center[last], p.z_center[last])
    assert areas[StrategyKind.HELIX_CCW] > 0
    assert areas[StrategyKind.HELIX_CW] < 0
    assert time.perf_counter() - start < 60.0


@pytest.mark.criterion(6, "Tilt/yaw moment quadrature")
def test_moment_quadrature():
    start = time.perf_counter()
    res = _single(StrategyKind.HELIX_CCW, n_periods=5)
    s = res.turbines[0]
    mask = averaging_window(res)
    f_e = 1.0 / res.reference_period
    a_tilt, ph_tilt, _ = fit_sinusoid(s.time[mask], s.moments[mask, 1], f_e)
    a_yaw, ph_yaw, _ = fit_sinusoid(s.time[mask], s.moments[mask, 2], f_e)
    residual = s.moments[mask, 1] - a_tilt * np.sin(2 * np.pi * f_e * s.time[mask] + ph_tilt)
    assert np.max(np.abs(residual - residual.mean())) < 1e-6 * a_tilt
    assert abs(a_yaw / a_tilt - 1.0) < 0.02
    assert abs(abs(wrap_degrees(np.degrees(ph_yaw - ph_tilt))) - 90.0) < 2.0
    assert time.perf_counter() - start < 10.0


@pytest.fixture(scope="module")
def suite_report(suite_metrics):
    return relative_report(suite_metrics, "baseline")


@pytest.mark.criterion(7, "Static-induction power calibration")
def test_sic_calibration(two_turbine_suite, suite_report):
    assert abs(suite_report.delta("static_1", "power_mean_T1") - (-1.0)) <= 0.2
    assert abs(suite_report.delta("static_2", "power_mean_T1") - (-3.1)) <= 0.3


@pytest.mark.criterion(8, "Qualitative ordering of downstream gains")
def test_qualitative_ordering(suite_report):
    d = suite_report.delta
    helix, dic = d("helix_ccw_4", "power_mean_T2"), d("dic_4", "power_mean_T2")
    assert helix > dic > 0
    assert d("helix_ccw_4", "farm_power") > 0
    assert d("dic_4", "farm_power") > 0
    for case in ("dic_2.5", "helix_ccw_2.5", "helix_cw_2.5", "dic_4", "helix_ccw_4", "helix_cw_4"):
        assert d(case, "power_var_T2") > 0
        assert d(case, "thrust_var_T2") > 0


@pytest.mark.criterion(9, "Deterministic suite output")
def test_suite_determinism(tmp_path):
    for name in ("a", "b"):
        assert main(["suite", "--seed", "0", "--out-dir", str(tmp_path / name)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == ["aggregates.txt", "summary.txt"]
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.criterion(10, "Disk quadrature and turbulence oracles")
def test_oracles():
    wake = WakeState(D)
    wake.x = np.array([1.0 * D, 2.0 * D])
    wake.y_off = wake.z_off = wake.k_eff = wake.t_emit = np.zeros(2)
    wake.deficit = np.full(2, 0.4)
    wake.width = np.full(2, D / 4)
    quad = sample_rotor_velocity(wake, 9.0, (0.0, 0.0), 1.5 * D, D)
    rng = np.random.default_rng(10)
    n = 1_000_000
    r2 = (0.5 * D) ** 2 * rng.random(n)
    mc = np.mean(9.0 * (1.0 - 0.4 * np.exp(-r2 / (2 * (D / 4) ** 2))))
    assert abs(quad / mc - 1.0) < 5e-3

    inflow = InflowModel(u_inf=9.0, turbulence_intensity=0.05)
    x = turbulence_series(inflow, 100_000, 0.25, seed=0)
    assert abs(np.std(x) / (0.05 * 9.0) - 1.0) < 0.05
