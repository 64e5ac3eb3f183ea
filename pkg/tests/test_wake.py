import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helixsim.errors import InvalidInputError
from helixsim.rotor import PRESETS, AeroOutput, aero_response
from helixsim.wake import (DISK_W, InflowModel, MixingParams, OrnsteinUhlenbeck, WakeState, deficit_at,
                           emit_and_advect, initial_deficit, kinetic_energy_flux, sample_rotor_velocity,
                           turbulence_sample, turbulence_series, wake_center, wake_center_trace)

P = PRESETS["DTU10MW"]
D = P.rotor_diameter
LAMINAR = InflowModel(turbulence_intensity=0.0)


def _synthetic_wake(deficit=0.4, width=D / 4, y_off=0.0):
    """Two markers with identical properties, so any plane between them sees exactly those values."""
    w = WakeState(D)
    w.x = np.array([1.0 * D, 2.0 * D])
    w.y_off = np.full(2, y_off)
    w.z_off = np.zeros(2)
    w.deficit = np.full(2, deficit)
    w.width = np.full(2, width)
    w.k_eff = np.zeros(2)
    w.t_emit = np.zeros(2)
    return w


def _steady_wake(aero, inflow=LAMINAR, mixing=None, dt=0.5, seconds=None):
    mixing = mixing or MixingParams()
    w = WakeState(D, x_max=mixing.x_max * D)
    n = int((seconds or 2.5 * mixing.x_max * D / inflow.u_inf) / dt)
    for _ in range(n):
        emit_and_advect(w, aero, inflow, mixing, dt)
    return w


def test_weights_form_unit_rule():
    assert DISK_W.sum() == pytest.approx(1.0, abs=1e-14)
    assert len(DISK_W) == 24 * 6


def test_disk_average_matches_monte_carlo():
    wake = _synthetic_wake()
    quad = sample_rotor_velocity(wake, 9.0, (0.0, 0.0), 1.5 * D, D)

    rng = np.random.default_rng(12345)
    n = 1_000_000
    r = 0.5 * D * np.sqrt(rng.random(n))
    phi = 2 * np.pi * rng.random(n)
    y, z = r * np.cos(phi), r * np.sin(phi)
    mc = np.mean(9.0 * (1 - 0.4 * np.exp(-(y**2 + z**2) / (2 * (D / 4) ** 2))))
    assert quad == pytest.approx(mc, rel=5e-3)
    # closed form of the disk mean of a centred Gaussian
    exact = 9.0 * (1 - 0.4 * 0.5 * (1 - np.exp(-2.0)))
    assert quad == pytest.approx(exact, rel=1e-6)


def test_far_offset_has_negligible_overlap():
    centred = 9.0 - sample_rotor_velocity(_synthetic_wake(), 9.0, (0.0, 0.0), 1.5 * D, D)
    offset = 9.0 - sample_rotor_velocity(_synthetic_wake(y_off=2 * D), 9.0, (0.0, 0.0), 1.5 * D, D)
    assert offset < 0.01 * centred


def test_no_markers_gives_ambient():
    assert sample_rotor_velocity(WakeState(D), 8.7, (0.0, 0.0), 3 * D, D) == 8.7
    assert sample_rotor_velocity([], 8.7, (0.0, 0.0), 3 * D, D) == 8.7


def test_uniform_flux_exact():
    flux = kinetic_energy_flux([], 9.0, 5 * D, D, P.air_density)
    assert flux == pytest.approx(0.5 * P.air_density * np.pi * D**2 / 4 * 729.0, rel=1e-14)


def test_baseline_wake_reduces_flux():
    w = _steady_wake(aero_response(9.0, (0, 0, 0), P))
    assert kinetic_energy_flux(w, 9.0, 5 * D, D, P.air_density) < kinetic_energy_flux([], 9.0, 5 * D, D, P.air_density)


def test_initial_deficit():
    assert initial_deficit(0.0) == 0.0
    assert initial_deficit(0.75) == pytest.approx(0.5)
    assert 0 < initial_deficit(1.5) < 1


def test_zero_thrust_leaves_no_deficit():
    w = _steady_wake(aero_response(0.0, (0, 0, 0), P), seconds=200)
    assert np.all(w.deficit == 0.0)
    assert sample_rotor_velocity(w, 9.0, (0.0, 0.0), 0.5 * D, D) == 9.0


@pytest.mark.parametrize("plane_d", [3.0, 5.0, 7.0])
def test_centreline_decay_is_exponential(plane_d):
    aero = aero_response(9.0, (0, 0, 0), P)
    mixing = MixingParams(c_meander=0.0)
    w = _steady_wake(aero, mixing=mixing, dt=0.25)
    sample = w.sample_plane(plane_d * D)
    expected = initial_deficit(aero.effective_ct) * np.exp(-mixing.k_base * plane_d)
    assert sample.deficit == pytest.approx(expected, rel=1e-2)
    assert sample.width == pytest.approx(mixing.initial_width * D + mixing.width_growth * plane_d * D, rel=1e-2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 0.99), min_size=20, max_size=80), st.floats(0.1, 2.0))
def test_markers_stay_ordered_and_decay(cts, dt):
    w = WakeState(D, x_max=2 * D)
    inflow, mixing = LAMINAR, MixingParams()
    history = {}
    for ct in cts:
        emit_and_advect(w, AeroOutput(1.0, 1.0, 0.0, 0.0, ct), inflow, mixing, dt)
        assert np.all(np.diff(w.x) > 0)
        assert np.all((w.deficit >= 0) & (w.deficit <= 1))
        assert np.all(w.width > 0) and np.all(w.x >= 0)
        for t, a in zip(w.t_emit, w.deficit):
            assert a <= history.get(t, np.inf)
            history[t] = a


def test_markers_dropped_beyond_extent():
    w = _steady_wake(aero_response(9.0, (0, 0, 0), P))
    assert w.x[-1] <= w.x_max
    assert len(w) < 2.5 * 10 * D / 9.0 / 0.5


def test_invalid_dt_and_plane():
    w = WakeState(D)
    aero = aero_response(9.0, (0, 0, 0), P)
    for dt in (0.0, -1.0, 2.5):
        with pytest.raises(InvalidInputError):
            emit_and_advect(w, aero, LAMINAR, MixingParams(), dt)
    with pytest.raises(InvalidInputError):
        sample_rotor_velocity(w, 9.0, (0, 0), 11 * D, D)
    with pytest.raises(InvalidInputError):
        wake_center(w, 10.5 * D)


def test_wake_center_before_arrival_is_nan():
    w = WakeState(D)
    emit_and_advect(w, aero_response(9.0, (0, 0, 0), P), LAMINAR, MixingParams(), 0.5)
    assert np.isnan(wake_center(w, 3 * D)).all()


def test_baseline_trace_stays_on_axis():
    aero = aero_response(9.0, (0, 0, 0), P)
    w = _steady_wake(aero)
    snaps = []
    for _ in range(50):
        emit_and_advect(w, aero, LAMINAR, MixingParams(), 0.5)
        snaps.append(w.copy())
    trace = wake_center_trace(snaps, 3 * D)
    assert trace.shape == (50, 2)
    assert np.all(trace == 0.0)


def test_forced_meandering_increases_recovery():
    mixing = MixingParams()
    base = _steady_wake(aero_response(9.0, (0, 0, 0), P))
    w = WakeState(D)
    dt = 0.5
    omega = 2 * np.pi * 0.25 * 9.0 / D
    for n in range(2000):
        t = n * dt
        emit_and_advect(w, aero_response(9.0, (0, 4 * np.sin(omega * t), 4 * np.cos(omega * t)), P),
                        LAMINAR, mixing, dt)
    assert w.meander_intensity > base.meander_intensity == 0.0
    assert w.recovery_rate(mixing, LAMINAR) > base.recovery_rate(mixing, LAMINAR)
    assert np.all(w.k_eff[: len(w) // 2] > base.k_eff.max())


def test_deficits_superpose():
    a, b = _synthetic_wake(0.2), _synthetic_wake(0.1)
    y = np.linspace(-D, D, 9)
    np.testing.assert_allclose(deficit_at([a, b], 1.5 * D, y, 0.0),
                               deficit_at(a, 1.5 * D, y, 0.0) + deficit_at(b, 1.5 * D, y, 0.0))


# turbulence

def test_laminar_turbulence_is_zero():
    assert np.all(turbulence_series(LAMINAR, 1000, 0.25, seed=3) == 0.0)


def test_turbulence_stationary_std():
    inflow = InflowModel(u_inf=9.0, turbulence_intensity=0.05)
    x = turbulence_series(inflow, 100_000, 1.0, seed=7)
    assert np.std(x) == pytest.approx(0.45, abs=0.02)
    assert abs(np.mean(x)) < 0.05


def test_turbulence_integral_time():
    inflow = InflowModel(integral_time=20.0)
    dt = 1.0
    x = turbulence_series(inflow, 200_000, dt, seed=11)
    lag = 20
    rho = np.corrcoef(x[:-lag], x[lag:])[0, 1]
    assert rho == pytest.approx(np.exp(-lag * dt / 20.0), abs=0.02)


def test_turbulence_deterministic():
    inflow = InflowModel()
    a = turbulence_series(inflow, 500, 0.25, seed=5)
    b = turbulence_series(inflow, 500, 0.25, seed=5)
    c = turbulence_series(inflow, 500, 0.25, seed=6)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    proc = OrnsteinUhlenbeck(inflow, 5)
    steps = [proc.value] + [turbulence_sample(inflow, 0.25, proc) for _ in range(499)]
    assert np.array_equal(np.array(steps), a)


def test_inflow_validation():
    with pytest.raises(InvalidInputError):
        InflowModel(u_inf=0.0)
    with pytest.raises(InvalidInputError):
        InflowModel(turbulence_intensity=0.31)
    with pytest.raises(InvalidInputError):
        MixingParams(k_base=-0.1)


def test_wake_history_deterministic():
    def run():
        inflow = InflowModel()
        proc = OrnsteinUhlenbeck(inflow, 9)
        w = WakeState(D)
        for _ in range(400):
            emit_and_advect(w, aero_response(9.0 + proc.value, (1.0, 0.5, -0.5), P), inflow, MixingParams(), 0.5)
            proc.step(0.5)
        return w

    a, b = run(), run()
    for name in WakeState._ARRAYS:
        assert np.array_equal(getattr(a, name), getattr(b, name))
