"""Exact scalars: Gaussian rationals and affine forms in formal indeterminates."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Mapping, Union

__all__ = ["GaussianRational", "LinearForm", "I", "parse_rational", "to_exact"]


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` or an integer literal into a Fraction.

    Decimal strings are rejected on purpose: every rational that crosses a
    file or CLI boundary is written as ``p/q``.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))


class GaussianRational:
    """An element re + i*im of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re: Rational | int = 0, im: Rational | int = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _lift(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re * other, self.im * other)
        if not isinstance(other, GaussianRational):
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(i)")
            return GaussianRational(self.re / other, self.im / other)
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def inverse(self) -> GaussianRational:
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussianRational(self.re / norm, -self.im / norm)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, LinearForm):
            return other == self
        o = self._lift(other)
        if o is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def to_json(self) -> list[str]:
        return [str(self.re), str(self.im)]

    @classmethod
    def from_json(cls, pair) -> GaussianRational:
        return cls(parse_rational(pair[0]), parse_rational(pair[1]))


I = GaussianRational(0, 1)

Scalar = Union[GaussianRational, "LinearForm"]


def to_exact(value) -> GaussianRational:
    """Convert int/Fraction/float/complex to Q(i) without rounding."""
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    if isinstance(value, float):
        return GaussianRational(Fraction(value))
    if isinstance(value, complex):
        return GaussianRational(Fraction(value.real), Fraction(value.imag))
    raise TypeError(f"cannot convert {type(value).__name__} to an exact scalar")


def _conj_name(name: str) -> str:
    return name[:-1] if name.endswith("*") else name + "*"


class LinearForm:
    """``const + sum_k coeff_k * sym_k`` over Q(i).

    Symbols are opaque names; the conjugate of symbol ``g`` is ``g*``. Only
    affine operations are allowed: multiplying two non-constant forms raises,
    which keeps every derived coefficient provably degree one.
    """

    __slots__ = ("const", "terms")

    def __init__(self, const=0, terms: Mapping[str, object] | None = None):
        self.const = to_exact(const)
        self.terms = {}
        for name, c in (terms or {}).items():
            c = to_exact(c)
            if c:
                self.terms[name] = c

    @classmethod
    def symbol(cls, name: str) -> LinearForm:
        return cls(0, {name: 1})

    @staticmethod
    def _lift(other):
        if isinstance(other, LinearForm):
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return LinearForm(other)
        return None

    def is_constant(self) -> bool:
        return not self.terms

    def coefficient(self, name: str | None = None) -> GaussianRational:
        """Coefficient of ``name``; the constant term when name is None."""
        if name is None:
            return self.const
        return self.terms.get(name, GaussianRational())

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for k, c in o.terms.items():
            terms[k] = terms.get(k, GaussianRational()) + c
        return LinearForm(self.const + o.const, terms)

    __radd__ = __add__

    def __neg__(self):
        return LinearForm(-self.const, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, LinearForm):
            if other.is_constant():
                other = other.const
            elif self.is_constant():
                return other * self.const
            else:
                raise TypeError("product of two non-constant linear forms is not affine")
        if not isinstance(other, (int, Fraction, GaussianRational)):
            return NotImplemented
        return LinearForm(self.const * other, {k: c * other for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LinearForm):
            if not other.is_constant():
                raise TypeError("division by a non-constant linear form")
            other = other.const
        if not isinstance(other, (int, Fraction, GaussianRational)):
            return NotImplemented
        inv = 1 / to_exact(other)
        return self * inv

    def conjugate(self) -> LinearForm:
        return LinearForm(
            self.const.conjugate(),
            {_conj_name(k): c.conjugate() for k, c in self.terms.items()},
        )

    def __bool__(self):
        return bool(self.const) or bool(self.terms)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.const == o.const and self.terms == o.terms

    def __hash__(self):
        return hash((self.const, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return f"LinearForm({self.const!s}, {{{', '.join(f'{k!r}: {v!s}' for k, v in sorted(self.terms.items()))}}})"

    def to_json(self) -> dict:
        out = {"1": self.const.to_json()}
        for k in sorted(self.terms):
            out[k] = self.terms[k].to_json()
        return out
