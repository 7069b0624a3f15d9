"""Fixed-step RK4 integration of u_t = -B(u,u) and of the b-equation, with
energy / slope / sup-norm monitoring and slope-based wave-breaking detection.

The stepping kernel works on dense coefficient arrays (modes -N..N) and
evaluates quadratic products on a zero-padded FFT grid large enough that no
retained mode is aliased.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    B_M_FORM,
    EULER,
    HELMHOLTZ,
    EulerSystem,
    MultiplierSymbol,
    PerturbedOperator,
    SingularOperatorError,
)
from .spectral import SpectralFunction

__all__ = [
    "SimulationConfig",
    "SimulationRecord",
    "energy",
    "step_rk4",
    "simulate",
    "COMPLETED",
    "BLOWUP",
    "REJECTED",
]

COMPLETED = "completed"
BLOWUP = "blowup-detected"
REJECTED = "step-rejected"


def _next_pow2(n: int) -> int:
    return 1 << max(1, (n - 1).bit_length())


class _Inertia:
    """Dense action of an inertia operator on modes -N..N."""

    def __init__(self, A, N: int):
        self.N = N
        modes = np.arange(-N, N + 1)
        if isinstance(A, MultiplierSymbol):
            self.diag = np.array([float(A(int(n))) for n in modes])
            if np.any(self.diag == 0):
                bad = int(modes[np.argmax(self.diag == 0)])
                raise SingularOperatorError(f"symbol vanishes at mode {bad}", mode=bad)
            self.mat = None
        elif isinstance(A, PerturbedOperator):
            if A.N < N:
                raise ValueError(f"operator window {A.N} smaller than resolution {N}")
            if not A.is_numeric():
                raise TypeError("symbolic operators cannot be time-stepped")
            mat = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
            for (m, n), v in A.entries.items():
                if abs(m) <= N and abs(n) <= N:
                    mat[m + N, n + N] = complex(v)
            self.diag = None
            self.mat = mat
            self.inv = np.linalg.inv(mat)
        else:
            raise TypeError(f"unsupported inertia operator {type(A).__name__}")

    def apply(self, c: np.ndarray) -> np.ndarray:
        return self.diag * c if self.mat is None else self.mat @ c

    def solve(self, c: np.ndarray) -> np.ndarray:
        return c / self.diag if self.mat is None else self.inv @ c


class _Kernel:
    def __init__(self, sys: EulerSystem, N: int, dealias: bool):
        self.sys = sys
        self.N = N
        self.K = (2 * N) // 3 if dealias else N
        self.ik = 1j * np.arange(-N, N + 1)
        # products of two N-limited factors are alias-free on modes |n| <= N
        self.M = _next_pow2(3 * N + 1)
        self.A = _Inertia(sys.inertia, N)
        self.L = _Inertia(HELMHOLTZ, N)
        self.keep = np.abs(np.arange(-N, N + 1)) <= self.K
        self.b = None if sys.b is None else float(sys.b)
        self.evolve_momentum = sys.form == B_M_FORM

    # -- transforms between dense coefficients and the padded grid --------
    def _to_grid(self, c: np.ndarray, M: int | None = None) -> np.ndarray:
        M = self.M if M is None else M
        N = self.N
        buf = np.zeros(M, dtype=complex)
        buf[: N + 1] = c[N:]
        buf[M - N :] = c[:N]
        return np.fft.ifft(buf).real * M

    def _from_grid(self, g: np.ndarray) -> np.ndarray:
        M = self.M
        N = self.N
        coef = np.fft.fft(g) / M
        return np.concatenate([coef[M - N :], coef[: N + 1]])

    def _prod(self, *pairs) -> np.ndarray:
        """Sum of products of coefficient arrays, projected to modes |n| <= N."""
        total = np.zeros(self.M)
        for (a, b) in pairs:
            total = total + self._to_grid(a) * self._to_grid(b)
        return self._from_grid(total)

    def project(self, c: np.ndarray) -> np.ndarray:
        c = np.where(self.keep, c, 0)
        return 0.5 * (c + np.conj(c[::-1]))

    # -- tendencies -------------------------------------------------------
    def velocity_rhs(self, u: np.ndarray) -> np.ndarray:
        ux = self.ik * u
        form = self.sys.form
        if form == EULER:
            Au = self.A.apply(u)
            mom = self._prod((Au, 2 * ux), (u, self.ik * Au))
            return -self.A.solve(mom)
        Lu = self.L.apply(u)
        mom = self._prod((Lu, self.b * ux), (u, self.ik * Lu))
        return -self.L.solve(mom)

    def momentum_rhs(self, m: np.ndarray) -> np.ndarray:
        u = self.L.solve(m)
        return -self._prod((self.ik * m, u), (m, self.b * self.ik * u))

    def rhs(self, state: np.ndarray) -> np.ndarray:
        if self.evolve_momentum:
            return self.momentum_rhs(state)
        return self.velocity_rhs(state)

    def to_state(self, u: np.ndarray) -> np.ndarray:
        return self.L.apply(u) if self.evolve_momentum else u

    def to_velocity(self, state: np.ndarray) -> np.ndarray:
        return self.L.solve(state) if self.evolve_momentum else state

    def step(self, state: np.ndarray, dt: float) -> np.ndarray:
        k1 = self.project(self.rhs(state))
        s2 = self.project(state + 0.5 * dt * k1)
        k2 = self.project(self.rhs(s2))
        s3 = self.project(state + 0.5 * dt * k2)
        k3 = self.project(self.rhs(s3))
        s4 = self.project(state + dt * k3)
        k4 = self.project(self.rhs(s4))
        return self.project(state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))

    # -- monitors ---------------------------------------------------------
    def energy(self, u: np.ndarray) -> float:
        return float(np.real(np.vdot(u, self.A.apply(u))))

    def monitors(self, u: np.ndarray) -> tuple[float, float, float]:
        M = 4 * self.N if self.N > 0 else 4
        M = max(M, 2 * self.N + 1)
        vals = self._to_grid(u, M)
        slope = self._to_grid(self.ik * u, M)
        return self.energy(u), float(np.max(np.abs(slope))), float(np.max(np.abs(vals)))


def energy(sys: EulerSystem, u: SpectralFunction) -> float:
    """rho_A(u, u) = (Au | u) for the system's inertia operator."""
    from .operators import rho

    val = rho(sys.inertia, u.to_double(), u.to_double())
    return float(val.real)


def _as_dense(u: SpectralFunction, N: int) -> np.ndarray:
    if u.N > N and any(abs(n) > N for n in u.modes()):
        raise ValueError(f"initial data has modes beyond resolution N={N}")
    return u.to_array(N)


def step_rk4(sys: EulerSystem, u: SpectralFunction, dt: float, N: int | None = None, dealias: bool = True) -> SpectralFunction:
    """One classical RK4 step; stages are truncated, dealiased and symmetrized."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    N = u.N if N is None else N
    kernel = _Kernel(sys, N, dealias)
    state = kernel.to_state(kernel.project(_as_dense(u, N)))
    with np.errstate(over="ignore", invalid="ignore"):
        new = kernel.step(state, dt)
    if not np.all(np.isfinite(new)):
        raise FloatingPointError("non-finite coefficients after RK4 step")
    return SpectralFunction.from_array(kernel.to_velocity(new))


@dataclass(frozen=True)
class SimulationConfig:
    system: EulerSystem
    initial: SpectralFunction
    dt: float = 1e-3
    t_end: float = 1.0
    N: int = 64
    dealias: bool = True
    monitor_stride: int = 10
    blowup_slope_threshold: float = 1e3

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("dt and t_end must be positive")
        if self.dt >= self.t_end:
            raise ValueError("dt must be smaller than t_end")
        if self.N < max((abs(n) for n in self.initial.modes()), default=0):
            raise ValueError("resolution N below the initial data's max mode")
        if self.monitor_stride < 1:
            raise ValueError("monitor_stride must be a positive integer")
        if not self.blowup_slope_threshold > 0:
            raise ValueError("blowup_slope_threshold must be positive")


@dataclass
class SimulationRecord:
    times: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    max_slope: list[float] = field(default_factory=list)
    sup_norm: list[float] = field(default_factory=list)
    final_state: SpectralFunction | None = None
    termination: str = COMPLETED

    def append(self, t: float, mon: tuple[float, float, float]):
        self.times.append(t)
        self.energy.append(mon[0])
        self.max_slope.append(mon[1])
        self.sup_norm.append(mon[2])

    @property
    def final_time(self) -> float:
        return self.times[-1]

    def relative_energy_drift(self) -> float:
        e0 = self.energy[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return max(abs(e - e0) for e in self.energy) / scale

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "energy", "max_slope", "sup_norm"])
        for row in zip(self.times, self.energy, self.max_slope, self.sup_norm):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def simulate(cfg: SimulationConfig) -> SimulationRecord:
    kernel = _Kernel(cfg.system, cfg.N, cfg.dealias)
    state = kernel.to_state(kernel.project(_as_dense(cfg.initial, cfg.N)))
    rec = SimulationRecord()
    rec.append(0.0, kernel.monitors(kernel.to_velocity(state)))

    n_steps = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    t = 0.0
    for step in range(1, n_steps + 1):
        dt = min(cfg.dt, cfg.t_end - t) if step == n_steps else cfg.dt
        # overflow surfaces as non-finite coefficients and is handled below
        with np.errstate(over="ignore", invalid="ignore"):
            new = kernel.step(state, dt)
        if not np.all(np.isfinite(new)):
            rec.termination = REJECTED
            break
        state = new
        t = cfg.t_end if step == n_steps else step * cfg.dt
        mon = kernel.monitors(kernel.to_velocity(state))
        if mon[1] > cfg.blowup_slope_threshold:
            rec.append(t, mon)
            rec.termination = BLOWUP
            break
        if step % cfg.monitor_stride == 0 or step == n_steps:
            rec.append(t, mon)
    rec.final_state = SpectralFunction.from_array(kernel.to_velocity(state))
    return rec


def mean_momentum(u: SpectralFunction) -> complex:
    """Zero mode of m = u - u_xx (equal to (1/2pi) * integral of m)."""
    return u.to_double().coeff(0)

