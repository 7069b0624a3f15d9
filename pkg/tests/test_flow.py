import math

import numpy as np
import pytest

from circle_euler.flow import (
    BLOWUP,
    COMPLETED,
    REJECTED,
    SimulationConfig,
    energy,
    mean_momentum,
    simulate,
    step_rk4,
)
from circle_euler.operators import B_M_FORM, B_NONLOCAL, EULER, HELMHOLTZ, IDENTITY, EulerSystem
from circle_euler.spectral import EXACT, SpectralFunction

BURGERS = EulerSystem(IDENTITY)
CH = EulerSystem(HELMHOLTZ, 2)
SIN = SpectralFunction.sin(1)
ONE = SpectralFunction.constant(1.0)


def burgers_exact(t: float, M: int) -> np.ndarray:
    """u = sin(x - 3 t u) solved pointwise by Newton; valid before t = 1/3."""
    x = 2 * np.pi * np.arange(M) / M
    u = np.sin(x)
    for _ in range(60):
        f = u - np.sin(x - 3 * t * u)
        df = 1 + 3 * t * np.cos(x - 3 * t * u)
        u = u - f / df
    return u


def grid_coeffs(samples: np.ndarray, N: int) -> np.ndarray:
    c = np.fft.fft(samples) / len(samples)
    return np.array([c[n % len(samples)] for n in range(-N, N + 1)])


# -- energy ------------------------------------------------------------------------

def test_energy_examples():
    assert energy(CH, SIN) == pytest.approx(1.0, abs=1e-15)
    assert energy(BURGERS, ONE) == 1.0
    assert energy(CH, SpectralFunction.zero()) == 0.0


def test_energy_accepts_exact_input():
    assert energy(CH, SpectralFunction.sin(1, kind=EXACT)) == pytest.approx(1.0)


# -- single steps ------------------------------------------------------------------------

@pytest.mark.parametrize("sys", [BURGERS, CH, EulerSystem(HELMHOLTZ, 3, B_NONLOCAL), EulerSystem(HELMHOLTZ, 3, B_M_FORM)])
def test_constant_is_fixed_point(sys):
    out = step_rk4(sys, ONE, 0.1, N=8)
    assert out.max_abs_diff(ONE) < 1e-15


def test_ch_energy_drift_per_step():
    u = SIN
    e0 = energy(CH, u)
    for _ in range(5):
        u = step_rk4(CH, u, 1e-3, N=64)
        assert abs(energy(CH, u) - e0) < 1e-12


def test_burgers_step_matches_characteristics():
    N = 32
    errs = []
    for dt in (0.02, 0.01, 0.005):
        num = step_rk4(BURGERS, SIN, dt, N=N).to_array(N)
        ref = grid_coeffs(burgers_exact(dt, 256), N)
        errs.append(np.max(np.abs(num - ref)))
    # local error of a fourth-order scheme scales like dt^5
    for a, b in zip(errs, errs[1:]):
        assert a / b > 25
    assert errs[-1] < 1e-10


def test_step_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        step_rk4(CH, SIN, 0.0)


def test_step_raises_on_overflow():
    big = SpectralFunction.sin(1, 1e300)
    with np.errstate(all="ignore"), pytest.raises(FloatingPointError):
        step_rk4(BURGERS, big, 1.0, N=4)


# -- simulate -------------------------------------------------------------------------------

def test_ch_simulation_conserves_energy():
    rec = simulate(SimulationConfig(CH, SIN, dt=1e-3, t_end=1.0, N=64))
    assert rec.termination == COMPLETED
    assert rec.final_time == pytest.approx(1.0)
    assert rec.relative_energy_drift() < 1e-8


def test_burgers_blowup_near_characteristic_crossing():
    rec = simulate(SimulationConfig(BURGERS, SIN, dt=1e-3, t_end=1.0, N=256, blowup_slope_threshold=50))
    assert rec.termination == BLOWUP
    assert abs(rec.final_time - 1 / 3) < 0.02


def test_burgers_energy_conserved_before_breaking():
    rec = simulate(SimulationConfig(BURGERS, SIN, dt=1e-3, t_end=0.3, N=128, monitor_stride=1))
    e = np.array(rec.energy)
    pre = np.array(rec.max_slope) <= 10
    assert pre.sum() > 100
    assert np.max(np.abs(e[pre] - e[0])) / e[0] < 1e-8


@pytest.mark.parametrize("sys", [BURGERS, CH, EulerSystem(HELMHOLTZ, 3, B_NONLOCAL)])
def test_constant_record(sys):
    rec = simulate(SimulationConfig(sys, ONE, dt=0.01, t_end=0.2, N=4, monitor_stride=1))
    assert rec.termination == COMPLETED
    assert len(set(rec.energy)) == 1
    assert set(rec.max_slope) == {0.0}


def test_b2_forms_agree():
    u0 = SIN + SpectralFunction.cos(2, 0.3)
    states = []
    for sys in (CH, EulerSystem(HELMHOLTZ, 2, B_NONLOCAL), EulerSystem(HELMHOLTZ, 2, B_M_FORM)):
        rec = simulate(SimulationConfig(sys, u0, dt=1e-3, t_end=0.5, N=64))
        states.append(rec.final_state)
    assert states[0].max_abs_diff(states[1]) < 1e-10
    assert states[0].max_abs_diff(states[2]) < 1e-10


@pytest.mark.parametrize("form", [B_NONLOCAL, B_M_FORM])
def test_mean_momentum_conserved_at_b1(form):
    u0 = SIN + SpectralFunction.cos(2, 0.4) + SpectralFunction.constant(0.3)
    rec = simulate(SimulationConfig(EulerSystem(HELMHOLTZ, 1, form), u0, dt=1e-3, t_end=0.5, N=32))
    assert abs(mean_momentum(rec.final_state) - mean_momentum(u0)) < 1e-10


def test_record_invariants_and_csv():
    rec = simulate(SimulationConfig(CH, SIN, dt=1e-2, t_end=0.25, N=16, monitor_stride=3))
    n = len(rec.times)
    assert n == len(rec.energy) == len(rec.max_slope) == len(rec.sup_norm)
    assert all(a < b for a, b in zip(rec.times, rec.times[1:]))
    assert rec.times[-1] == 0.25
    lines = rec.to_csv().splitlines()
    assert lines[0] == "t,energy,max_slope,sup_norm"
    assert len(lines) == n + 1


def test_max_slope_of_sine_is_one():
    rec = simulate(SimulationConfig(CH, SIN, dt=1e-3, t_end=2e-3, N=8))
    assert rec.max_slope[0] == pytest.approx(1.0, abs=1e-12)
    assert rec.sup_norm[0] == pytest.approx(1.0, abs=1e-12)


def test_step_rejected_terminates_cleanly():
    big = SpectralFunction.sin(1, 1e300)
    with np.errstate(all="ignore"):
        rec = simulate(SimulationConfig(BURGERS, big, dt=0.5, t_end=1.0, N=4, blowup_slope_threshold=math.inf))
    assert rec.termination == REJECTED
    assert rec.final_state.max_abs_diff(big) == 0.0


@pytest.mark.parametrize(
    "kw",
    [dict(dt=0), dict(dt=2.0, t_end=1.0), dict(N=0), dict(monitor_stride=0), dict(blowup_slope_threshold=-1)],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SimulationConfig(CH, SIN, **kw)
