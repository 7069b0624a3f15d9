"""Inertia operators, the coadjoint action, the Christoffel operator and the
right-hand sides of the Euler and b-equations on the circle.

Lie bracket convention: ``[u, v] = u_x v - u v_x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Union

from .exact import GaussianRational, LinearForm, parse_rational, to_exact
from .spectral import EXACT, SpectralFunction, differentiate, l2_inner, product

__all__ = [
    "OperatorError",
    "SingularOperatorError",
    "ModeOutOfWindowError",
    "MultiplierSymbol",
    "PerturbedOperator",
    "EulerSystem",
    "EULER",
    "B_M_FORM",
    "B_NONLOCAL",
    "IDENTITY",
    "HELMHOLTZ",
    "apply",
    "invert",
    "bracket",
    "ad_star",
    "christoffel",
    "euler_rhs",
    "b_rhs",
    "b_rhs_m_form",
    "rho",
    "operator_from_json",
]

EULER = "euler-christoffel"
B_M_FORM = "b-equation-m-form"
B_NONLOCAL = "b-equation-nonlocal"
FORMS = (EULER, B_M_FORM, B_NONLOCAL)


class OperatorError(ValueError):
    pass


class SingularOperatorError(OperatorError):
    def __init__(self, message: str, mode: int | None = None):
        super().__init__(message)
        self.mode = mode


class ModeOutOfWindowError(OperatorError):
    def __init__(self, mode: int, window: int):
        super().__init__(f"mode {mode} outside operator window [-{window}, {window}]")
        self.mode = mode
        self.window = window


@dataclass(frozen=True)
class MultiplierSymbol:
    """Fourier multiplier A u_n = a(n) u_n with an even, nonvanishing symbol.

    ``rule`` is ``identity`` (a = 1), ``helmholtz`` (a = 1 + n^2) or
    ``custom`` (explicit table keyed by |n|). ``scale`` multiplies the rule.
    """

    rule: str = "identity"
    table: Mapping[int, Fraction] | None = None
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if self.rule not in ("identity", "helmholtz", "custom"):
            raise OperatorError(f"unknown multiplier rule {self.rule!r}")
        object.__setattr__(self, "scale", Fraction(self.scale))
        if self.scale == 0:
            raise SingularOperatorError("multiplier scale is zero", mode=0)
        if self.rule == "custom":
            if not self.table:
                raise OperatorError("custom multiplier needs a table")
            tab: dict[int, Fraction] = {}
            for n, a in self.table.items():
                a = Fraction(a)
                n = int(n)
                if abs(n) in tab and tab[abs(n)] != a:
                    raise OperatorError(f"symbol is not even at mode {n}")
                tab[abs(n)] = a
            for n, a in tab.items():
                if a == 0:
                    raise SingularOperatorError(f"symbol vanishes at mode {n}", mode=n)
            if 0 not in tab:
                raise OperatorError("custom table must define mode 0")
            object.__setattr__(self, "table", dict(sorted(tab.items())))

    @property
    def n_max(self) -> int | None:
        return max(self.table) if self.rule == "custom" else None

    def __call__(self, n: int) -> Fraction:
        n = abs(n)
        if self.rule == "identity":
            base = Fraction(1)
        elif self.rule == "helmholtz":
            base = Fraction(1 + n * n)
        else:
            if n not in self.table:
                raise ModeOutOfWindowError(n, self.n_max)
            base = self.table[n]
        return self.scale * base

    def scaled(self, s) -> MultiplierSymbol:
        return MultiplierSymbol(self.rule, self.table, self.scale * Fraction(s))

    def to_json_obj(self) -> dict:
        if self.rule == "custom":
            return {
                "kind": "multiplier",
                "rule": "custom",
                "table": [[n, str(self.scale * a)] for n, a in self.table.items()],
            }
        obj = {"kind": "multiplier", "rule": self.rule}
        if self.scale != 1:
            obj["scale"] = str(self.scale)
        return obj


IDENTITY = MultiplierSymbol("identity")
HELMHOLTZ = MultiplierSymbol("helmholtz")


def _scalar_exact(value):
    if isinstance(value, (GaussianRational, LinearForm)):
        return value
    return to_exact(value)


class PerturbedOperator:
    """Operator given by its matrix on the modes -N..N: A u_n = sum_m A[m, n] u_m.

    The matrix must be Hermitian (L2-symmetry). Entries are exact (Q(i) or
    affine forms carrying formal symbols); modes without an entry are zero.
    """

    def __init__(self, N: int, entries: Mapping[tuple[int, int], object], check_invertible: bool = True):
        self.N = int(N)
        ent: dict[tuple[int, int], object] = {}
        for (m, n), v in entries.items():
            if abs(m) > self.N or abs(n) > self.N:
                raise ModeOutOfWindowError(max(abs(m), abs(n)), self.N)
            v = _scalar_exact(v)
            if v:
                ent[(int(m), int(n))] = v
        for (m, n), v in ent.items():
            partner = ent.get((n, m), GaussianRational())
            if partner != v.conjugate():
                raise OperatorError(f"matrix is not Hermitian at ({m}, {n})")
        self.entries = ent
        self._columns: dict[int, list[tuple[int, object]]] = {}
        for (m, n), v in sorted(ent.items()):
            self._columns.setdefault(n, []).append((m, v))
        self._blocks = self._find_blocks()
        if check_invertible and self.is_numeric():
            for block in self._blocks:
                self._factor(block)

    @classmethod
    def from_structure(
        cls,
        N: int,
        beta: Callable[[int], object],
        gammas: Mapping[int, tuple[object, int]] | None = None,
        one: object = 1,
        check_invertible: bool = True,
    ) -> PerturbedOperator:
        """Build A u_n = gamma_n e^{i alpha_n x} + beta_n u_n, A 1 = one.

        ``gammas`` maps n to (gamma_n, alpha_n) with integer alpha_n; the
        Hermitian partner entry is filled in automatically.
        """
        entries: dict[tuple[int, int], object] = {(0, 0): one}
        for n in range(-N, N + 1):
            if n != 0:
                entries[(n, n)] = beta(n)
        for n, (gamma, alpha) in (gammas or {}).items():
            g = _scalar_exact(gamma)
            if (alpha, n) in entries and alpha == n:
                entries[(n, n)] = _scalar_exact(entries[(n, n)]) + g
                continue
            entries[(alpha, n)] = g
            entries[(n, alpha)] = g.conjugate()
        return cls(N, entries, check_invertible=check_invertible)

    def is_numeric(self) -> bool:
        return not any(isinstance(v, LinearForm) and not v.is_constant() for v in self.entries.values())

    def entry(self, m: int, n: int):
        return self.entries.get((m, n), GaussianRational())

    def column(self, n: int) -> list[tuple[int, object]]:
        if abs(n) > self.N:
            raise ModeOutOfWindowError(n, self.N)
        return list(self._columns.get(n, []))

    def _find_blocks(self) -> list[list[int]]:
        parent = {n: n for n in range(-self.N, self.N + 1)}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for m, n in self.entries:
            ra, rb = find(m), find(n)
            if ra != rb:
                parent[ra] = rb
        groups: dict[int, list[int]] = {}
        for n in range(-self.N, self.N + 1):
            groups.setdefault(find(n), []).append(n)
        return sorted(groups.values())

    def block_of(self, n: int) -> list[int]:
        for block in self._blocks:
            if n in block:
                return block
        raise ModeOutOfWindowError(n, self.N)

    def _factor(self, block: list[int]):
        """Check the block is nonsingular by exact elimination."""
        idx = {n: i for i, n in enumerate(block)}
        size = len(block)
        mat = [[GaussianRational() for _ in range(size)] for _ in range(size)]
        for n in block:
            for m, v in self._columns.get(n, []):
                mat[idx[m]][idx[n]] = v
        _gauss_solve(mat, [[GaussianRational()] for _ in range(size)], block)

    def solve_block(self, block: list[int], rhs: list):
        idx = {n: i for i, n in enumerate(block)}
        size = len(block)
        mat = [[GaussianRational() for _ in range(size)] for _ in range(size)]
        for n in block:
            for m, v in self._columns.get(n, []):
                if isinstance(v, LinearForm):
                    if not v.is_constant():
                        raise TypeError(f"cannot invert a block carrying symbolic entries (modes {block})")
                    v = v.const
                mat[idx[m]][idx[n]] = v
        return [row[0] for row in _gauss_solve(mat, [[r] for r in rhs], block)]

    def scaled(self, s) -> PerturbedOperator:
        s = _scalar_exact(s)
        return PerturbedOperator(self.N, {k: v * s for k, v in self.entries.items()})

    def to_json_obj(self) -> dict:
        rows = []
        for (m, n), v in sorted(self.entries.items()):
            if isinstance(v, LinearForm):
                raise TypeError("symbolic operator entries are not serializable")
            rows.append([m, n, str(v.re), str(v.im)])
        return {"kind": "perturbed", "N": self.N, "entries": rows}

    def __repr__(self):
        return f"PerturbedOperator(N={self.N}, nnz={len(self.entries)})"


def _gauss_solve(mat, rhs, labels):
    """Gauss-Jordan elimination over Q(i); rhs columns may hold linear forms."""
    size = len(mat)
    mat = [row[:] for row in mat]
    rhs = [row[:] for row in rhs]
    for col in range(size):
        pivot = next((r for r in range(col, size) if mat[r][col]), None)
        if pivot is None:
            raise SingularOperatorError(f"singular operator: zero pivot at mode {labels[col]}", mode=labels[col])
        mat[col], mat[pivot] = mat[pivot], mat[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = 1 / mat[col][col]
        mat[col] = [v * inv for v in mat[col]]
        rhs[col] = [v * inv for v in rhs[col]]
        for r in range(size):
            if r != col and mat[r][col]:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[col])]
                rhs[r] = [a - f * b for a, b in zip(rhs[r], rhs[col])]
    return rhs


InertiaOperator = Union[MultiplierSymbol, PerturbedOperator]


@dataclass(frozen=True)
class EulerSystem:
    """An inertia operator paired with a b-parameter and an evolution form."""

    inertia: InertiaOperator = field(default=HELMHOLTZ)
    b: Fraction | float | None = None
    form: str = EULER

    def __post_init__(self):
        if self.form not in FORMS:
            raise OperatorError(f"unknown form {self.form!r}")
        if self.form != EULER and self.b is None:
            raise OperatorError(f"form {self.form} needs a value of b")
        if self.b is not None and not isinstance(self.b, Fraction):
            b = float(self.b)
            if b != b or b in (float("inf"), float("-inf")):
                raise OperatorError("b must be finite")


def apply(A: InertiaOperator, u: SpectralFunction) -> SpectralFunction:
    if isinstance(A, MultiplierSymbol):
        if u.exact:
            return SpectralFunction({n: c * A(n) for n, c in u.items()}, u.N, u.kind)
        return SpectralFunction({n: c * float(A(n)) for n, c in u.items()}, u.N, u.kind)
    out: dict[int, object] = {}
    for n, c in u.items():
        for m, v in A.column(n):
            if not u.exact:
                v = complex(v)
            term = v * c
            out[m] = out[m] + term if m in out else term
    return SpectralFunction(out, max(u.N, A.N) if out else u.N, u.kind)


def invert(A: InertiaOperator, f: SpectralFunction) -> SpectralFunction:
    """Solve A v = f."""
    if isinstance(A, MultiplierSymbol):
        out = {}
        for n, c in f.items():
            a = A(n)
            if a == 0:
                raise SingularOperatorError(f"symbol vanishes at mode {n}", mode=n)
            out[n] = c / a if f.exact else c / float(a)
        return SpectralFunction(out, f.N, f.kind)
    for n in f.modes():
        if abs(n) > A.N:
            raise ModeOutOfWindowError(n, A.N)
    out = {}
    done: set[int] = set()
    for n in f.modes():
        if n in done:
            continue
        block = A.block_of(n)
        done.update(block)
        if f.exact:
            rhs = [f.coeff(m) for m in block]
            sol = A.solve_block(block, rhs)
        else:
            sol = _solve_block_double(A, block, [f.coeff(m) for m in block])
        out.update({m: s for m, s in zip(block, sol)})
    return SpectralFunction(out, f.N, f.kind)


def _solve_block_double(A: PerturbedOperator, block, rhs):
    import numpy as np

    idx = {n: i for i, n in enumerate(block)}
    mat = np.zeros((len(block), len(block)), dtype=complex)
    for n in block:
        for m, v in A.column(n):
            mat[idx[m], idx[n]] = complex(v)
    try:
        return list(np.linalg.solve(mat, np.asarray(rhs, dtype=complex)))
    except np.linalg.LinAlgError as exc:
        raise SingularOperatorError(f"singular block at modes {block}", mode=block[0]) from exc


def bracket(u: SpectralFunction, v: SpectralFunction) -> SpectralFunction:
    return product(differentiate(u), v) - product(u, differentiate(v))


def ad_star(A: InertiaOperator, u: SpectralFunction, v: SpectralFunction) -> SpectralFunction:
    """Momentum-space coadjoint term 2 (Av) u_x + u (Av)_x (before A^{-1})."""
    Av = apply(A, v)
    return product(Av, differentiate(u)).scale(2) + product(u, differentiate(Av))


def christoffel(A: InertiaOperator, u: SpectralFunction, v: SpectralFunction) -> SpectralFunction:
    """B(u, v) = 1/2 A^{-1}[2 Au v_x + 2 Av u_x + u (Av)_x + v (Au)_x]."""
    half = Fraction(1, 2) if u.exact else 0.5
    if u is v or u == v:
        moment = ad_star(A, u, u).scale(2)
    else:
        moment = ad_star(A, u, v) + ad_star(A, v, u)
    return invert(A, moment.scale(half))


def rho(A: InertiaOperator, f: SpectralFunction, g: SpectralFunction):
    """Metric pairing rho_A(f, g) = (Af | g)."""
    return l2_inner(apply(A, f), g)


def euler_rhs(sys: EulerSystem, u: SpectralFunction) -> SpectralFunction:
    if sys.form != EULER:
        raise OperatorError(f"euler_rhs needs form {EULER}, got {sys.form}")
    return -christoffel(sys.inertia, u, u)


def _b_value(b, u: SpectralFunction):
    if u.exact:
        return parse_rational(b) if not isinstance(b, Fraction) else b
    return float(b)


def b_rhs(b, u: SpectralFunction) -> SpectralFunction:
    """Nonlocal b-equation velocity: -L^{-1}(b (Lu) u_x + u (Lu)_x), L = 1 - d^2/dx^2."""
    bv = _b_value(b, u)
    Lu = apply(HELMHOLTZ, u)
    inner = product(Lu, differentiate(u)).scale(bv) + product(u, differentiate(Lu))
    return -invert(HELMHOLTZ, inner)


def b_rhs_m_form(b, m: SpectralFunction, u: SpectralFunction) -> SpectralFunction:
    """Momentum tendency -(m_x u + b m u_x)."""
    bv = _b_value(b, u)
    return -(product(differentiate(m), u) + product(m, differentiate(u)).scale(bv))


def system_rhs(sys: EulerSystem, u: SpectralFunction) -> SpectralFunction:
    """Velocity tendency u_t for any form of the system."""
    if sys.form == EULER:
        return euler_rhs(sys, u)
    if sys.form == B_NONLOCAL:
        return b_rhs(sys.b, u)
    m = apply(HELMHOLTZ, u)
    return invert(HELMHOLTZ, b_rhs_m_form(sys.b, m, u))


def operator_from_json(obj: Mapping | str) -> InertiaOperator:
    """Parse ``{"kind": "multiplier", ...}`` or ``{"kind": "perturbed", ...}``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "multiplier":
        rule = obj.get("rule", "identity")
        scale = parse_rational(obj.get("scale", 1))
        if rule == "custom":
            table = {int(n): parse_rational(a) for n, a in obj["table"]}
            return MultiplierSymbol("custom", table, scale)
        return MultiplierSymbol(rule, None, scale)
    if kind == "perturbed":
        entries = {}
        for m, n, re, im in obj["entries"]:
            entries[(int(m), int(n))] = GaussianRational(parse_rational(re), parse_rational(im))
        return PerturbedOperator(int(obj["N"]), entries)
    raise OperatorError(f"unknown operator kind {kind!r}")
