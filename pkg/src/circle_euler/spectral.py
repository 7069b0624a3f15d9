"""Truncated Fourier series on the 2*pi-periodic circle.

A :class:`SpectralFunction` stores the coefficients of ``e^{inx}`` sparsely,
keyed by mode.  Two scalar kinds exist and are never mixed implicitly:

* ``"exact"``: coefficients in Q(i) (or affine forms over Q(i)),
* ``"double"``: Python complex numbers.

All values are immutable; every operation returns a new function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .exact import GaussianRational, LinearForm, parse_rational, to_exact

__all__ = [
    "SpectralFunction",
    "GridFunction",
    "differentiate",
    "product",
    "truncate",
    "l2_inner",
    "to_grid",
    "from_grid",
    "EXACT",
    "DOUBLE",
]

EXACT = "exact"
DOUBLE = "double"


def _coerce(value, kind: str):
    if kind == EXACT:
        if isinstance(value, (GaussianRational, LinearForm)):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        raise TypeError(
            f"exact SpectralFunction got {type(value).__name__}; convert explicitly with to_exact()"
        )
    if isinstance(value, (GaussianRational, LinearForm)):
        raise TypeError("double SpectralFunction got an exact scalar; convert explicitly with to_double()")
    return complex(value)


def _conj(value):
    return value.conjugate()


class SpectralFunction:
    """Finite Fourier series ``sum_{|n|<=N} c_n e^{inx}``."""

    __slots__ = ("N", "kind", "_coeffs")

    def __init__(self, coeffs: Mapping[int, object] | None = None, N: int | None = None, kind: str = DOUBLE):
        if kind not in (EXACT, DOUBLE):
            raise ValueError(f"unknown scalar kind {kind!r}")
        data = {}
        for n, c in (coeffs or {}).items():
            c = _coerce(c, kind)
            if c:
                data[int(n)] = c
        top = max((abs(n) for n in data), default=0)
        if N is None:
            N = top
        if N < 0:
            raise ValueError("max_mode must be nonnegative")
        if top > N:
            raise ValueError(f"mode {top} outside window [-{N}, {N}]")
        self.N = int(N)
        self.kind = kind
        self._coeffs = data

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, N: int = 0, kind: str = DOUBLE) -> SpectralFunction:
        return cls({}, N, kind)

    @classmethod
    def constant(cls, value=1, N: int = 0, kind: str = DOUBLE) -> SpectralFunction:
        return cls({0: value}, N, kind)

    @classmethod
    def basis(cls, n: int, N: int | None = None, kind: str = EXACT) -> SpectralFunction:
        """The complex exponential u_n = e^{inx} (not real-valued for n != 0)."""
        return cls({n: 1}, abs(n) if N is None else N, kind)

    @classmethod
    def sin(cls, k: int = 1, amplitude=1, kind: str = DOUBLE) -> SpectralFunction:
        if kind == EXACT:
            half = to_exact(amplitude) * GaussianRational(0, Fraction(-1, 2))
            return cls({k: half, -k: -half}, k, kind)
        a = complex(amplitude)
        return cls({k: -0.5j * a, -k: 0.5j * a}, k, kind)

    @classmethod
    def cos(cls, k: int = 1, amplitude=1, kind: str = DOUBLE) -> SpectralFunction:
        if kind == EXACT:
            half = to_exact(amplitude) * Fraction(1, 2)
        else:
            half = 0.5 * complex(amplitude)
        if k == 0:
            return cls({0: half * 2}, 0, kind)
        return cls({k: half, -k: half}, k, kind)

    # -- access -----------------------------------------------------------
    @property
    def coeffs(self) -> dict[int, object]:
        return dict(self._coeffs)

    @property
    def exact(self) -> bool:
        return self.kind == EXACT

    def coeff(self, n: int):
        c = self._coeffs.get(n)
        if c is not None:
            return c
        return GaussianRational() if self.kind == EXACT else 0j

    def modes(self) -> list[int]:
        return sorted(self._coeffs)

    def items(self) -> Iterable[tuple[int, object]]:
        return sorted(self._coeffs.items())

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_real_valued(self, tol: float = 0.0) -> bool:
        """True when c_{-n} = conj(c_n) for all n (within tol in double mode)."""
        for n, c in self._coeffs.items():
            diff = self.coeff(-n) - _conj(c)
            if self.kind == EXACT:
                if diff:
                    return False
            elif abs(diff) > tol:
                return False
        return True

    # -- conversions ------------------------------------------------------
    def to_double(self) -> SpectralFunction:
        if self.kind == DOUBLE:
            return self
        if any(isinstance(c, LinearForm) and not c.is_constant() for c in self._coeffs.values()):
            raise TypeError("cannot convert a symbolic function to double precision")
        conv = {n: complex(c.const if isinstance(c, LinearForm) else c) for n, c in self._coeffs.items()}
        return SpectralFunction(conv, self.N, DOUBLE)

    def to_exact(self) -> SpectralFunction:
        """Exact binary expansion of the double coefficients."""
        if self.kind == EXACT:
            return self
        return SpectralFunction({n: to_exact(c) for n, c in self._coeffs.items()}, self.N, EXACT)

    def to_array(self, N: int | None = None) -> np.ndarray:
        """Dense complex array of coefficients for modes -N..N."""
        N = self.N if N is None else N
        out = np.zeros(2 * N + 1, dtype=complex)
        src = self.to_double()
        for n, c in src._coeffs.items():
            if abs(n) <= N:
                out[n + N] = c
        return out

    @classmethod
    def from_array(cls, arr: np.ndarray) -> SpectralFunction:
        N = (len(arr) - 1) // 2
        return cls({n: arr[n + N] for n in range(-N, N + 1) if arr[n + N] != 0}, N, DOUBLE)

    def symmetrized(self) -> SpectralFunction:
        """Project onto real-valued functions: c_n <- (c_n + conj(c_{-n}))/2."""
        out = {}
        for n in set(self._coeffs) | {-m for m in self._coeffs}:
            out[n] = (self.coeff(n) + _conj(self.coeff(-n))) * (Fraction(1, 2) if self.exact else 0.5)
        return SpectralFunction(out, self.N, self.kind)

    def evaluate(self, x) -> np.ndarray:
        """Pointwise values (complex) at x."""
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x, dtype=complex)
        for n, c in self.to_double().items():
            total = total + c * np.exp(1j * n * x)
        return total

    # -- arithmetic -------------------------------------------------------
    def _check_kind(self, other: SpectralFunction):
        if self.kind != other.kind:
            raise TypeError(f"cannot mix {self.kind} and {other.kind} functions implicitly")

    def __add__(self, other: SpectralFunction) -> SpectralFunction:
        if not isinstance(other, SpectralFunction):
            return NotImplemented
        self._check_kind(other)
        out = dict(self._coeffs)
        for n, c in other._coeffs.items():
            out[n] = out[n] + c if n in out else c
        return SpectralFunction(out, max(self.N, other.N), self.kind)

    def __neg__(self) -> SpectralFunction:
        return SpectralFunction({n: -c for n, c in self._coeffs.items()}, self.N, self.kind)

    def __sub__(self, other: SpectralFunction) -> SpectralFunction:
        if not isinstance(other, SpectralFunction):
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> SpectralFunction:
        if self.exact:
            s = s if isinstance(s, (LinearForm, GaussianRational)) else to_exact(s)
        else:
            s = complex(s)
        return SpectralFunction({n: c * s for n, c in self._coeffs.items()}, self.N, self.kind)

    def __mul__(self, s) -> SpectralFunction:
        if isinstance(s, SpectralFunction):
            return product(self, s)
        return self.scale(s)

    def __rmul__(self, s) -> SpectralFunction:
        return self.scale(s)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectralFunction):
            return NotImplemented
        return self.kind == other.kind and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self._coeffs.items()))))

    def max_abs_diff(self, other: SpectralFunction) -> float:
        """Sup over modes of |c_n - d_n| (double precision)."""
        a, b = self.to_double(), other.to_double()
        modes = set(a._coeffs) | set(b._coeffs)
        return max((abs(a.coeff(n) - b.coeff(n)) for n in modes), default=0.0)

    def __repr__(self):
        body = ", ".join(f"{n}: {c}" for n, c in self.items())
        return f"SpectralFunction({{{body}}}, N={self.N}, kind={self.kind!r})"

    # -- serialization ----------------------------------------------------
    def to_json_obj(self) -> dict:
        rows = []
        for n, c in self.items():
            if self.exact:
                if isinstance(c, LinearForm):
                    raise TypeError("symbolic coefficients are not serializable as a SpectralFunction")
                rows.append([n, str(c.re), str(c.im)])
            else:
                rows.append([n, c.real, c.imag])
        return {"N": self.N, "coeffs": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> SpectralFunction:
        rows = obj.get("coeffs", [])
        exact = any(isinstance(r[1], str) or isinstance(r[2], str) for r in rows)
        if exact:
            coeffs = {int(r[0]): GaussianRational(parse_rational(r[1]), parse_rational(r[2])) for r in rows}
            return cls(coeffs, int(obj["N"]), EXACT)
        return cls({int(r[0]): complex(r[1], r[2]) for r in rows}, int(obj["N"]), DOUBLE)

    @classmethod
    def from_json(cls, text: str) -> SpectralFunction:
        return cls.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class GridFunction:
    """Real samples at x_j = 2*pi*j/M, j = 0..M-1."""

    samples: tuple[float, ...]

    @property
    def M(self) -> int:
        return len(self.samples)

    @property
    def points(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.M) / self.M

    def as_array(self) -> np.ndarray:
        return np.asarray(self.samples, dtype=float)


def differentiate(f: SpectralFunction) -> SpectralFunction:
    if f.exact:
        out = {n: c * GaussianRational(0, n) for n, c in f.items()}
    else:
        out = {n: c * (1j * n) for n, c in f.items()}
    return SpectralFunction(out, f.N, f.kind)


def product(f: SpectralFunction, g: SpectralFunction) -> SpectralFunction:
    """Pointwise product; the result keeps every mode up to N_f + N_g."""
    f._check_kind(g)
    N = f.N + g.N
    if f.exact:
        out: dict[int, object] = {}
        for n, a in f.items():
            for m, b in g.items():
                prod = a * b
                k = n + m
                out[k] = out[k] + prod if k in out else prod
        return SpectralFunction(out, N, f.kind)
    if f.is_zero() or g.is_zero():
        return SpectralFunction.zero(N, f.kind)
    conv = np.convolve(f.to_array(), g.to_array())
    return SpectralFunction({n - N: conv[n] for n in range(2 * N + 1)}, N, f.kind)


def truncate(f: SpectralFunction, N: int) -> SpectralFunction:
    if N < 0:
        raise ValueError("truncation order must be nonnegative")
    return SpectralFunction({n: c for n, c in f.items() if abs(n) <= N}, N, f.kind)


def l2_inner(f: SpectralFunction, g: SpectralFunction):
    """Normalized pairing (1/2pi) * integral f * conj(g), so (u_n|u_n) = 1."""
    f._check_kind(g)
    total = GaussianRational() if f.exact else 0j
    for n, c in f.items():
        d = g._coeffs.get(n)
        if d is not None:
            total = total + c * _conj(d)
    return total


def to_grid(f: SpectralFunction, M: int) -> GridFunction:
    if M < 1:
        raise ValueError("grid needs at least one point")
    if not f.is_real_valued(tol=1e-14 * max(1.0, max((abs(complex(c)) for _, c in f.to_double().items()), default=0))):
        raise ValueError("to_grid requires a real-valued function")
    arr = np.zeros(M, dtype=complex)
    for n, c in f.to_double().items():
        arr[n % M] += c
    samples = np.fft.ifft(arr).real * M
    return GridFunction(tuple(float(s) for s in samples))


def from_grid(g: GridFunction, N: int) -> SpectralFunction:
    M = g.M
    if M < 2 * N + 1:
        raise ValueError(f"need M >= 2N+1 = {2 * N + 1} samples to recover modes up to {N}, got {M}")
    coef = np.fft.fft(g.as_array()) / M
    return SpectralFunction({n: coef[n % M] for n in range(-N, N + 1)}, N, DOUBLE)
