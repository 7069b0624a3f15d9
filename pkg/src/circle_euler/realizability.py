"""Exact replay of the rigidity argument: for which b is the b-equation

    m_t = -(m_x u + b m u_x),   m = u - u_xx,

the Euler equation u_t = -B(u, u) of some regular inertia operator A?

Answer: only b = 2, with A = 1 - d^2/dx^2.  :func:`decide` walks the
argument step by step in exact arithmetic and returns a certificate naming
the step that excludes a given b.  Everything here is exact (Q and Q(i));
floats never enter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .exact import I, GaussianRational, LinearForm, parse_rational
from .operators import (
    HELMHOLTZ,
    EulerSystem,
    InertiaOperator,
    MultiplierSymbol,
    OperatorError,
    PerturbedOperator,
    apply,
    invert,
)
from .spectral import EXACT, SpectralFunction, differentiate, product

__all__ = [
    "InvalidCandidateError",
    "ModeConstants",
    "ModeSolution",
    "EigenrelationResult",
    "DiophantineResult",
    "GammaContradiction",
    "RealizabilityCertificate",
    "mode_constants",
    "residual",
    "euler_side",
    "b_side",
    "normalize_step_a",
    "limit_identity",
    "limit_from_samples",
    "mode_ode_solution",
    "eigenrelation_check",
    "eigenrelation_identity_at_b2",
    "integrality_census",
    "relation",
    "diophantine_obstruction",
    "gamma_contradiction",
    "decide",
    "b_grid",
    "REALIZABLE",
    "NOT_REALIZABLE",
    "RELATION_NOTE",
]

REALIZABLE = "realizable"
NOT_REALIZABLE = "not-realizable"
GAMMA = "gamma"

RELATION_NOTE = (
    "integer relation used: 2p^3 + 3p^2 k + p k^2 + 2p + k = 0, i.e. "
    "p(1+(p+k)^2)k + k(1+p^2)(p+k) = 0 divided by k; the variant with p*k in place "
    "of p*k^2 does not follow from that line and does not factor as (l+2)((l+1)p^2+1) with k = p*l"
)


class InvalidCandidateError(OperatorError):
    """A candidate operator violates the identity at u = 1 (A1 not constant)."""

    def __init__(self, message: str, mode: int):
        super().__init__(message)
        self.mode = mode


def _q(b) -> Fraction:
    return b if isinstance(b, Fraction) else parse_rational(b)


# -- mode constants -----------------------------------------------------------

@dataclass(frozen=True)
class ModeConstants:
    n: int
    alpha: Fraction
    beta: Fraction | None


def alpha(n: int, b) -> Fraction:
    """alpha_n = n + b n / (1 + n^2)."""
    b = _q(b)
    return n + b * n / (1 + n * n)


def beta(n: int, b) -> Fraction:
    """beta_n = 2 (1 + n^2) / b."""
    b = _q(b)
    if b == 0:
        raise ZeroDivisionError("beta_n is undefined for b = 0")
    return Fraction(2 * (1 + n * n)) / b


def mode_constants(n: int, b) -> ModeConstants:
    if n == 0:
        raise ValueError("mode constants are defined for n != 0")
    b = _q(b)
    return ModeConstants(n, alpha(n, b), beta(n, b) if b != 0 else None)


# -- the identity itself ------------------------------------------------------

def _require_exact(u: SpectralFunction):
    if u.kind != EXACT:
        raise TypeError("realizability arithmetic requires exact functions")


def euler_side(A: InertiaOperator, u: SpectralFunction) -> SpectralFunction:
    """A^{-1}(2 (Au) u_x + u (Au)_x), i.e. B(u, u)."""
    _require_exact(u)
    Au = apply(A, u)
    mom = product(Au, differentiate(u)).scale(2) + product(u, differentiate(Au))
    return invert(A, mom)


def b_side(b, u: SpectralFunction) -> SpectralFunction:
    """L^{-1}(b (Lu) u_x + u (Lu)_x)."""
    _require_exact(u)
    Lu = apply(HELMHOLTZ, u)
    mom = product(Lu, differentiate(u)).scale(_q(b)) + product(u, differentiate(Lu))
    return invert(HELMHOLTZ, mom)


def residual(sys: EulerSystem, u: SpectralFunction) -> SpectralFunction:
    """Euler side minus b-equation side; identically zero iff the two agree on u."""
    return euler_side(sys.inertia, u) - b_side(sys.b, u)


def _one() -> SpectralFunction:
    return SpectralFunction.constant(1, 0, EXACT)


def normalize_step_a(A: InertiaOperator) -> InertiaOperator:
    """Rescale A so that A1 = 1; reject A when A1 is not constant."""
    A1 = apply(A, _one())
    bad = [n for n in A1.modes() if n != 0]
    if bad:
        mode = min(bad, key=lambda n: (abs(n), -n))
        raise InvalidCandidateError(f"A1 is not constant: nonzero mode {mode}", mode=abs(mode))
    c = A1.coeff(0)
    if not c:
        raise InvalidCandidateError("A1 = 0, operator is not invertible", mode=0)
    if isinstance(A, MultiplierSymbol):
        return A.scaled(1 / c.re)
    return A.scaled(1 / c)


def _check_normalized(A: InertiaOperator):
    if apply(A, _one()) != _one():
        raise InvalidCandidateError("candidate must satisfy A1 = 1; normalize first", mode=0)


def limit_identity(A: InertiaOperator, u: SpectralFunction, b) -> SpectralFunction:
    """A^{-1}(2 u_x + (Au)_x) - L^{-1}(b u_x + (Lu)_x) for a normalized candidate."""
    _require_exact(u)
    _check_normalized(A)
    ux = differentiate(u)
    lhs = invert(A, ux.scale(2) + differentiate(apply(A, u)))
    rhs = invert(HELMHOLTZ, ux.scale(_q(b)) + differentiate(apply(HELMHOLTZ, u)))
    return lhs - rhs


def limit_from_samples(A: InertiaOperator, u: SpectralFunction, b, lambdas=(1, 2, 4)) -> SpectralFunction:
    """Recover the lambda-linear part of residual(u + lambda) from samples.

    With A1 = 1 the residual at u + lambda is affine in lambda; the slope is
    the limit identity.  Raises if the samples are not affine.
    """
    _check_normalized(A)
    sys = EulerSystem(A, _q(b))
    base = residual(sys, u)
    slopes = []
    for lam in lambdas:
        shifted = u + SpectralFunction.constant(lam, 0, EXACT)
        slopes.append((residual(sys, shifted) - base).scale(Fraction(1, lam)))
    if any(s != slopes[0] for s in slopes[1:]):
        raise ArithmeticError("residual is not affine in the constant shift")
    return slopes[0]


# -- per-mode ODE -------------------------------------------------------------

@dataclass(frozen=True)
class ModeSolution:
    n: int
    classification: str  # resonant-secular | generic
    alpha: Fraction
    beta: Fraction | None
    homogeneous_admissible: bool

    def ode_defect(self) -> GaussianRational:
        """(v' - i alpha v + 2 i n u_n) coefficient for v = beta u_n; zero when beta solves the ODE."""
        if self.beta is None:
            raise ValueError("no periodic particular solution in the resonant case")
        return I * self.n * self.beta - I * self.alpha * self.beta + I * 2 * self.n


def mode_ode_solution(n: int, b) -> ModeSolution:
    """Classify solutions of v' - i alpha_n v = -2 i n u_n.

    b = 0 gives alpha_n = n: the forcing is resonant and every solution
    (c - 2inx) u_n is secular, hence never periodic.
    """
    if n == 0:
        raise ValueError("n must be nonzero")
    b = _q(b)
    a = alpha(n, b)
    if a == n:
        return ModeSolution(n, "resonant-secular", a, None, False)
    return ModeSolution(n, "generic", a, beta(n, b), a.denominator == 1)


# -- eigenrelation ------------------------------------------------------------

@dataclass(frozen=True)
class EigenrelationResult:
    passed: bool
    n: int | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None
    checked: tuple[int, int] | None = None


def _eigen_sides(n: int, b: Fraction) -> tuple[Fraction, Fraction]:
    lhs = 3 * (1 + 4 * n * n) * beta(n, b)
    rhs = (1 + b) * (1 + n * n) * beta(2 * n, b)
    return lhs, rhs


def eigenrelation_check(b, n_range: Iterable[int] = range(1, 65)) -> EigenrelationResult:
    """3(1+4n^2) beta_n == (1+b)(1+n^2) beta_{2n} for all n in range."""
    b = _q(b)
    if b == 0:
        raise ValueError("eigenrelation needs b != 0")
    ns = list(n_range)
    for n in ns:
        lhs, rhs = _eigen_sides(n, b)
        if lhs != rhs:
            return EigenrelationResult(False, n, lhs, rhs, (min(ns), max(ns)))
    return EigenrelationResult(True, checked=(min(ns), max(ns)) if ns else None)


def eigenrelation_identity_at_b2() -> bool:
    """At b = 2 both sides are degree-4 polynomials in n; agreement at 5 nodes proves equality."""
    b = Fraction(2)
    for n in range(5):
        lhs, rhs = _eigen_sides(n, b)
        if lhs != rhs or lhs != 3 * (1 + 4 * n * n) * (1 + n * n):
            return False
    return True


# -- integrality and the diophantine obstruction ------------------------------

def integrality_census(b, p_range: Iterable[int] = range(-1000, 1001)) -> list[tuple[int, int]]:
    """All p != 0 with alpha_p integral, paired with k = alpha_p - p = b p / (1 + p^2)."""
    b = _q(b)
    if b == 0:
        raise ValueError("census needs b != 0")
    out = []
    for p in p_range:
        if p == 0:
            continue
        a = alpha(p, b)
        if a.denominator == 1:
            out.append((p, int(a) - p))
    return out


def census_bound(b) -> int:
    """|p| beyond which alpha_p cannot be integral: |k| >= 1 forces |b||p| >= 1 + p^2."""
    b = _q(b)
    return int(abs(b)) + 1


def relation(p: int, k: int) -> int:
    return 2 * p ** 3 + 3 * p * p * k + p * k * k + 2 * p + k


def _printed_relation(p: int, k: int) -> int:
    return 2 * p ** 3 + 3 * p * p * k + p * k + 2 * p + k


@dataclass(frozen=True)
class DiophantineResult:
    solutions: list[tuple[int, int]]
    all_k_equal_minus_2p: bool
    factorization_confirms_l_minus_2: bool
    printed_variant_solutions: list[tuple[int, int]] = field(default_factory=list)


def diophantine_obstruction(p_range: Iterable[int] = range(-100, 101), k_range: Iterable[int] | None = None) -> DiophantineResult:
    """Brute-force integer solutions of the relation with p, k != 0."""
    ps = [p for p in p_range if p != 0]
    ks = ps if k_range is None else [k for k in k_range if k != 0]
    sols, printed = [], []
    for p in ps:
        for k in ks:
            if relation(p, k) == 0:
                sols.append((p, k))
            if _printed_relation(p, k) == 0:
                printed.append((p, k))
    all_family = all(k == -2 * p for p, k in sols)
    fact_ok = True
    for p, k in sols:
        if k % p:
            fact_ok = False
            continue
        l = k // p
        fact_ok &= (l + 2) * ((l + 1) * p * p + 1) == 0 and l == -2
        fact_ok &= relation(p, k) == p * (l + 2) * ((l + 1) * p * p + 1)
    return DiophantineResult(sols, all_family, fact_ok, printed)


# -- the gamma contradiction --------------------------------------------------

@dataclass(frozen=True)
class GammaContradiction:
    p: int
    k: int
    l: int
    b: Fraction
    alpha_p: Fraction
    beta_p: Fraction
    beta_2p: Fraction
    lhs_one: LinearForm
    rhs_one: LinearForm
    lhs_2p: LinearForm
    rhs_2p: LinearForm

    @property
    def final_coefficient(self) -> GaussianRational:
        """Coefficient of gamma_p in (lhs - rhs) at the constant mode; equals i p."""
        return (self.lhs_one - self.rhs_one).coefficient(GAMMA)

    @property
    def forces_gamma_zero(self) -> bool:
        diff = self.lhs_one - self.rhs_one
        return diff.coefficient(None) == 0 and bool(diff.coefficient(GAMMA)) and set(diff.terms) == {GAMMA}


def gamma_candidate(p: int) -> PerturbedOperator:
    """A u_n = beta_n u_n except A u_{+-p} carries gamma_{+-p} e^{-+ipx}, b = -2(1+p^2)."""
    b = Fraction(-2 * (1 + p * p))
    window = 2 * abs(p) + 1
    g = LinearForm.symbol(GAMMA)
    return PerturbedOperator.from_structure(
        window, lambda n: beta(n, b), {p: (g, int(alpha(p, b)))}, check_invertible=False
    )


def gamma_contradiction(p: int) -> GammaContradiction:
    if p == 0:
        raise ValueError("p must be nonzero")
    b = Fraction(-2 * (1 + p * p))
    A = gamma_candidate(p)
    u = SpectralFunction.basis(p, kind=EXACT)
    lhs = euler_side(A, u)
    rhs = b_side(b, u)

    def lf(x) -> LinearForm:
        return x if isinstance(x, LinearForm) else LinearForm(x)

    return GammaContradiction(
        p=p,
        k=-2 * p,
        l=-2,
        b=b,
        alpha_p=alpha(p, b),
        beta_p=beta(p, b),
        beta_2p=beta(2 * p, b),
        lhs_one=lf(lhs.coeff(0)),
        rhs_one=lf(rhs.coeff(0)),
        lhs_2p=lf(lhs.coeff(2 * p)),
        rhs_2p=lf(rhs.coeff(2 * p)),
    )


# -- certificate ----------------------------------------------------------------

@dataclass
class RealizabilityCertificate:
    b: Fraction
    verdict: str
    witness: dict
    metadata: dict = field(default_factory=dict)

    @property
    def witness_kind(self) -> str:
        return self.witness["kind"]

    @property
    def realizable(self) -> bool:
        return self.verdict == REALIZABLE

    def witness_detail(self) -> str:
        w = self.witness
        kind = w["kind"]
        if kind == "normalized-symbol":
            return ""
        if kind == "resonance-failure":
            return f"n={w['n']}"
        if kind == "eigenrelation-failure":
            return f"n={w['n']} lhs={w['lhs']} rhs={w['rhs']}"
        if kind == "integrality-census":
            ps = " ".join(str(e["p"]) for e in w["census"])
            return f"p=[{ps}] eigen n={w['eigenrelation']['n']}"
        return f"p={w['p']} k={w['k']} l={w['l']}"

    def to_json_obj(self) -> dict:
        return {"b": str(self.b), "verdict": self.verdict, "witness": self.witness, "metadata": self.metadata}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True)


def _gj(x) -> list[str]:
    return GaussianRational(x).to_json() if not isinstance(x, GaussianRational) else x.to_json()


def _eigen_json(res: EigenrelationResult, b: Fraction) -> dict:
    return {
        "n": res.n,
        "lhs": str(res.lhs),
        "rhs": str(res.rhs),
        "beta_n": str(beta(res.n, b)),
        "beta_2n": str(beta(2 * res.n, b)),
    }


def decide(b, scan_depth: int = 64, census_limit: int = 1000) -> RealizabilityCertificate:
    """Run the exclusion pipeline for a rational b."""
    b = _q(b)
    if scan_depth < 8:
        raise ValueError("scan_depth must be at least 8")
    meta = {"relation": RELATION_NOTE, "scan_depth": scan_depth}

    if b == 0:
        sol = mode_ode_solution(1, b)
        witness = {
            "kind": "resonance-failure",
            "n": 1,
            "alpha_n": str(sol.alpha),
            # particular solution (c - 2inx) u_n: coefficient of x u_n
            "secular_coefficient": _gj(GaussianRational(0, -2)),
        }
        return RealizabilityCertificate(b, NOT_REALIZABLE, witness, meta)

    bound = max(census_limit, census_bound(b))
    census = integrality_census(b, range(-bound, bound + 1))
    meta["census_bound"] = bound
    eig = eigenrelation_check(b, range(1, scan_depth + 1))

    resonant = [(p, k) for p, k in census if k == -2 * p]
    entries = []
    for p, k in census:
        m = p + k
        entries.append({"p": p, "k": k, "m": m, "alpha_m": str(alpha(m, b)), "relation": relation(p, k)})

    if resonant:
        p = min((p for p, _ in resonant), key=lambda q: (abs(q), -q))
        gc = gamma_contradiction(p)
        witness = {
            "kind": "gamma-contradiction",
            "p": gc.p,
            "k": gc.k,
            "l": gc.l,
            "b": str(gc.b),
            "alpha_p": str(gc.alpha_p),
            "beta_p": str(gc.beta_p),
            "beta_2p": str(gc.beta_2p),
            "lhs_one_coefficient": gc.lhs_one.to_json(),
            "rhs_one_coefficient": gc.rhs_one.to_json(),
            "final_coefficient": gc.final_coefficient.to_json(),
            "u2p_lhs": gc.lhs_2p.to_json(),
            "u2p_rhs": gc.rhs_2p.to_json(),
            "census": entries,
            "eigenrelation": _eigen_json(eig, b) if not eig.passed else None,
        }
        return RealizabilityCertificate(b, NOT_REALIZABLE, witness, meta)

    if eig.passed:
        witness = {
            "kind": "normalized-symbol",
            "table": [[n, str(1 + n * n)] for n in range(scan_depth + 1)],
            "census": entries,
            "eigenrelation_checked": [1, scan_depth],
            "polynomial_identity": eigenrelation_identity_at_b2() if b == 2 else False,
        }
        return RealizabilityCertificate(b, REALIZABLE, witness, meta)

    if census:
        witness = {"kind": "integrality-census", "census": entries, "eigenrelation": _eigen_json(eig, b)}
    else:
        witness = {"kind": "eigenrelation-failure", "census": [], **_eigen_json(eig, b)}
    return RealizabilityCertificate(b, NOT_REALIZABLE, witness, meta)


def b_grid(limit: int = 20) -> list[Fraction]:
    """All distinct rationals q/r with |q|, |r| <= limit, r != 0, sorted."""
    vals = {Fraction(q, r) for q in range(-limit, limit + 1) for r in range(1, limit + 1)}
    return sorted(vals)

