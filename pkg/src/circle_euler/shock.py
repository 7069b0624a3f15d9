"""Explicit Degasperis-Procesi shock wave on the period-1 circle.

The profile ``u_c(t, x) = sinh(frac(x) - 1/2) / (t cosh(1/2) + c sinh(1/2))``
jumps at every integer x.  Weak-solution status is probed against the
conservation form

    u_t + (u^2/2)_x + d/dx (1 - d^2/dx^2)^{-1} (3/2 u^2) = 0,

integrated against smooth test functions compactly supported in time.  The
nonlocal term is a periodic convolution with the derivative of the period-1
Green's function ``g(x) = cosh(frac(x) - 1/2) / (2 sinh(1/2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "ShockWave",
    "TestFunction",
    "shock_eval",
    "greens_function",
    "greens_derivative",
    "nonlocal_flux",
    "nonlocal_flux_exact",
    "weak_residual",
    "convergence_study",
    "rankine_hugoniot_check",
    "WEAK_FORM",
]

WEAK_FORM = "u_t + (u^2/2)_x + d/dx (1 - d^2/dx^2)^{-1}(3/2 u^2) = 0, tested against phi (nonlocal term against phi, not phi_x)"

SH = math.sinh(0.5)
CH = math.cosh(0.5)


@dataclass(frozen=True)
class ShockWave:
    c: float
    amplitude: float = 1.0  # != 1 only for negative controls
    period: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("shock parameter c must be positive")
        if self.period != 1.0:
            raise ValueError("the shock profile lives on the period-1 circle")

    def denominator(self, t):
        return t * CH + self.c * SH


def _frac(x):
    return x - np.floor(x)


def shock_eval(w: ShockWave, t, x):
    """u_c(t, x); vectorized over t and x (broadcast)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("shock is evaluated for t >= 0 only")
    val = w.amplitude * np.sinh(_frac(np.asarray(x, dtype=float)) - 0.5) / w.denominator(t)
    return float(val) if np.ndim(val) == 0 else val


def greens_function(x):
    """Period-1 kernel of (1 - d^2/dx^2)^{-1}."""
    return np.cosh(_frac(np.asarray(x, dtype=float)) - 0.5) / (2 * SH)


def greens_derivative(x):
    """g'(x); the jump at integers is replaced by its mean, zero."""
    y = _frac(np.asarray(x, dtype=float))
    out = np.sinh(y - 0.5) / (2 * SH)
    return np.where(y == 0.0, 0.0, out)


def nonlocal_flux(f: np.ndarray) -> np.ndarray:
    """d/dx (1 - d^2/dx^2)^{-1} f for midpoint samples f_j = f((j+1/2)/M).

    Discrete periodic convolution with g' (trapezoidal in the shift variable).
    """
    f = np.asarray(f, dtype=float)
    M = f.shape[-1]
    h = 1.0 / M
    kernel = greens_derivative(np.arange(M) * h)
    conv = np.fft.irfft(np.fft.rfft(f, axis=-1) * np.fft.rfft(kernel), n=M, axis=-1)
    return h * conv


def nonlocal_flux_exact(w: ShockWave, t, x):
    """Closed form of d/dx (1 - d^2/dx^2)^{-1} (3/2 u_c^2) for the unperturbed profile."""
    s = _frac(np.asarray(x, dtype=float)) - 0.5
    D = w.denominator(np.asarray(t, dtype=float))
    return w.amplitude ** 2 * (-0.5 * np.sinh(2 * s) + CH * np.sinh(s)) / D ** 2


def _bump(s):
    """exp(1 - 1/(4 s (1 - s))) on (0, 1): peak 1 at s = 1/2, flat at both ends."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    q = 4 * s[inside] * (1 - s[inside])
    out[inside] = np.exp(1 - 1 / q)
    return out


def _bump_derivative(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    si = s[inside]
    q = 4 * si * (1 - si)
    out[inside] = np.exp(1 - 1 / q) * 4 * (1 - 2 * si) / q ** 2
    return out


@dataclass(frozen=True)
class TestFunction:
    """phi(t, x) = bump((t - t0)/(t1 - t0)) * sum_k p_k e^{2 pi i k x}.

    ``profile`` maps k to the complex coefficient p_k and must describe a
    real function (p_{-k} = conj(p_k)).
    """

    __test__ = False

    profile: Mapping[int, complex] = field(default_factory=lambda: {1: -0.5j, -1: 0.5j})
    t_start: float = 0.0
    t_stop: float = 1.0

    def __post_init__(self):
        if not self.t_stop > self.t_start >= 0:
            raise ValueError("need 0 <= t_start < t_stop")
        for k, p in self.profile.items():
            if abs(complex(self.profile.get(-k, 0)) - complex(p).conjugate()) > 1e-15:
                raise ValueError("test profile must be real-valued")

    @classmethod
    def sine(cls, k: int = 1, t_start: float = 0.0, t_stop: float = 1.0) -> TestFunction:
        return cls({k: -0.5j, -k: 0.5j}, t_start, t_stop)

    @classmethod
    def zero(cls, t_start: float = 0.0, t_stop: float = 1.0) -> TestFunction:
        return cls({}, t_start, t_stop)

    def _span(self):
        return self.t_stop - self.t_start

    def time_factor(self, t):
        return _bump((np.asarray(t) - self.t_start) / self._span())

    def time_factor_dt(self, t):
        return _bump_derivative((np.asarray(t) - self.t_start) / self._span()) / self._span()

    def space_factor(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, p in self.profile.items():
            out = out + (complex(p) * np.exp(2j * np.pi * k * x)).real
        return out

    def space_factor_dx(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, p in self.profile.items():
            out = out + (2j * np.pi * k * complex(p) * np.exp(2j * np.pi * k * x)).real
        return out


def weak_residual(
    w: ShockWave,
    phi: TestFunction,
    resolution: int = 512,
    t_resolution: int | None = None,
    profile: Callable | None = None,
) -> float:
    """|integral integral [u phi_t + u^2/2 phi_x - P[u] phi] dx dt| by midpoint quadrature.

    ``profile(t, x)`` replaces the exact shock (negative controls); the
    nonlocal term P is always computed numerically from the samples.
    """
    if resolution < 256:
        raise ValueError("x quadrature needs at least 256 points per period")
    nt = resolution if t_resolution is None else t_resolution
    if nt < 256:
        raise ValueError("t quadrature needs at least 256 points")
    if not phi.profile:
        return 0.0
    hx = 1.0 / resolution
    ht = (phi.t_stop - phi.t_start) / nt
    x = (np.arange(resolution) + 0.5) * hx
    t = phi.t_start + (np.arange(nt) + 0.5) * ht
    T, X = np.meshgrid(t, x, indexing="ij")
    u = shock_eval(w, T, X) if profile is None else np.asarray(profile(T, X), dtype=float)
    P = nonlocal_flux(1.5 * u * u)

    a, da = phi.time_factor(t)[:, None], phi.time_factor_dt(t)[:, None]
    b, db = phi.space_factor(x)[None, :], phi.space_factor_dx(x)[None, :]
    integrand = u * da * b + 0.5 * u * u * a * db - P * a * b
    # pairwise summation via numpy's reduction keeps the result order-independent of threading
    return float(abs(np.sum(np.sum(integrand, axis=1)) * hx * ht))


def convergence_study(w: ShockWave, phi: TestFunction, resolutions=(256, 512, 1024), profile=None) -> dict:
    """Residuals over refinement levels and the observed order log2(r_k / r_{k+1})."""
    residuals = [weak_residual(w, phi, r, profile=profile) for r in resolutions]
    orders = []
    for (r0, e0), (r1, e1) in zip(zip(resolutions, residuals), zip(resolutions[1:], residuals[1:])):
        orders.append(math.log(e0 / e1) / math.log(r1 / r0) if e0 > 0 and e1 > 0 else float("nan"))
    return {"resolutions": list(resolutions), "residuals": residuals, "orders": orders}


def rankine_hugoniot_check(w: ShockWave, t: float, profile: Callable | None = None) -> tuple[float, float]:
    """Shock speed at x = 0 and the jump discrepancy speed*[u] - [u^2/2].

    The shock is stationary, so the discrepancy is -[u^2/2] with
    [q] = q(0+) - q(1-).  The nonlocal term is continuous and drops out.
    """
    if not t > 0:
        raise ValueError("need t > 0")
    f = (lambda x: shock_eval(w, t, x)) if profile is None else (lambda x: float(profile(t, x)))
    eps = 0.0
    right = f(eps)
    left = f(np.nextafter(1.0, 0.0))
    speed = 0.0
    discrepancy = speed * (right - left) - (0.5 * right * right - 0.5 * left * left)
    return speed, float(discrepancy)
