"""q-difference operators quantizing the G-family, their classical symbols and
quasi-invariance checks.

Shifts are multiplicative: T_i acts by x_i -> q x_i. Every coefficient is kept
as explicit sympy factors (numerator and denominator lists) so that pole
proximity can be tested factor by factor and the q -> 1 limit is a plain
substitution.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .darboux import DarbouxPoint
from .errors import BadParameters, PoleProximity

__all__ = [
    "Term",
    "DiffOperator",
    "TestFunction",
    "op_Dtilde21",
    "op_Htilde21",
    "op_D21",
    "op_macdonald",
    "apply",
    "classical_symbol",
    "QuasiInvarianceReport",
    "quasi_invariance_check",
    "quasi_invariant_function",
    "hyperplane_points",
    "POLE_TOL",
]

POLE_TOL = 1e-10
ROOT_OF_UNITY_ORDER = 64

Q, T, ALPHA, BETA = sp.symbols("q t alpha beta")


def xsyms(n: int) -> tuple[sp.Symbol, ...]:
    return sp.symbols(f"x1:{n + 1}")


@dataclass(frozen=True)
class Term:
    """c(x) * prod_i T_i^{shift_i} with c = prod(numer) / prod(denom)."""

    shift: tuple[int, ...]
    numer: tuple[sp.Expr, ...]
    denom: tuple[sp.Expr, ...] = ()

    @property
    def expr(self) -> sp.Expr:
        return sp.Mul(*self.numer) / sp.Mul(*self.denom)

    def subs(self, mapping) -> "Term":
        return Term(
            self.shift,
            tuple(sp.sympify(f).subs(mapping) for f in self.numer),
            tuple(sp.sympify(f).subs(mapping) for f in self.denom),
        )


@dataclass
class DiffOperator:
    n: int
    terms: list[Term]
    params: dict[str, complex]
    name: str = ""
    _compiled: list | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def q(self) -> complex:
        return self.params["q"]

    @property
    def t(self) -> complex:
        return self.params["t"]

    def compiled(self) -> list[tuple[tuple[int, ...], Callable, Callable]]:
        if self._compiled is None:
            self._compiled = [_compile_term(self.n, term) for term in self.terms]
        return self._compiled

    def _param_values(self, **override) -> tuple[complex, ...]:
        p = {"q": 1.0, "t": 1.0, "alpha": 0.0, "beta": 0.0, **self.params, **override}
        return (complex(p["q"]), complex(p["t"]), complex(p["alpha"]), complex(p["beta"]))

    def coefficients(self, x, **override) -> list[np.ndarray]:
        """Coefficient values at x (shape (n,) or (n, K)); PoleProximity near a pole."""
        x = np.asarray(x, dtype=complex)
        vals = self._param_values(**override)
        out = []
        for shift, num, dens in self.compiled():
            dvals = [np.asarray(v, dtype=complex) for v in dens(*x, *vals)]
            den = np.ones(x.shape[1:], dtype=complex)
            for v in dvals:
                if np.any(np.abs(v) < POLE_TOL):
                    raise PoleProximity(f"coefficient of T^{shift} is within {POLE_TOL:g} of a pole")
                den = den * v
            out.append(np.asarray(num(*x, *vals), dtype=complex) / den)
        return out

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        if self.n != other.n:
            raise ValueError("operators act on different numbers of variables")
        for k in set(self.params) & set(other.params):
            if self.params[k] != other.params[k]:
                raise ValueError(f"parameter {k} differs between summands")
        return DiffOperator(self.n, self.terms + other.terms, {**self.params, **other.params})


@lru_cache(maxsize=None)
def _compile_term(n: int, term: Term) -> tuple[tuple[int, ...], Callable, Callable]:
    args = (*xsyms(n), Q, T, ALPHA, BETA)
    num = sp.lambdify(args, sp.Mul(*term.numer), "numpy")
    dens = sp.lambdify(args, list(term.denom) or [sp.Integer(1)], "numpy")
    return term.shift, num, dens


@lru_cache(maxsize=None)
def _singular_at_q1(term: Term) -> bool:
    return any(sp.simplify(sp.sympify(fac).subs(Q, 1)) == 0 for fac in term.denom)


@dataclass(frozen=True)
class TestFunction:
    """f(x) for x of shape (n, ...) (entrywise numpy arithmetic is expected)."""

    __test__ = False  # not a pytest class

    fn: Callable[[np.ndarray], object]
    symmetric: bool = False
    name: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=complex)), dtype=complex)

    def check_symmetry(self, rng: np.random.Generator, n: int, tol: float = 1e-10) -> bool:
        """Spot check f(x) = f(s x) at three random transpositions."""
        if n < 2:
            return True
        for _ in range(3):
            x = np.exp(rng.uniform(-0.3, 0.3, n) + 1j * rng.uniform(-np.pi, np.pi, n))
            a, b = rng.choice(n, size=2, replace=False)
            y = x.copy()
            y[[a, b]] = y[[b, a]]
            fx, fy = complex(self(x)), complex(self(y))
            if abs(fx - fy) > tol * max(1.0, abs(fx)):
                return False
        return True


def _check_params(q: complex, t: complex) -> None:
    q, t = complex(q), complex(t)
    if t == 0:
        raise BadParameters("t must be nonzero")
    if q == 0 or not np.isfinite(q):
        raise BadParameters("q must be a finite nonzero number")
    if abs(abs(q) - 1) < 1e-12:
        for k in range(1, ROOT_OF_UNITY_ORDER + 1):
            if abs(q**k - 1) < 1e-10:
                raise BadParameters(f"q is (numerically) a root of unity of order {k}")


def _unit(n: int, *idx: int) -> tuple[int, ...]:
    mu = [0] * n
    for i in idx:
        mu[i] += 1
    return tuple(mu)


def _ups_factors(xs, i: int, skip: Sequence[int], c: sp.Expr = sp.Integer(1)):
    """numer/denom factors of prod_{l not in skip} (1 - c t x_i/x_l)/(1 - c x_i/x_l)."""
    num, den = [], []
    for l in range(len(xs)):
        if l in skip:
            continue
        r = xs[i] / xs[l]
        num.append(1 - c * T * r)
        den.append(1 - c * r)
    return num, den


@lru_cache(maxsize=None)
def _dtilde_terms(n: int) -> tuple[Term, ...]:
    xs = xsyms(n)
    terms = []
    for i in range(n):
        n1, d1 = _ups_factors(xs, i, (i,))
        n2, d2 = _ups_factors(xs, i, (i,), Q)
        terms.append(Term(_unit(n, i, i), tuple(n1 + n2), tuple([Q * xs[i]] + d1 + d2)))
    for i, j in itertools.combinations(range(n), 2):
        ni, di = _ups_factors(xs, i, (i, j))
        nj, dj = _ups_factors(xs, j, (i, j))
        num = [(T - 1), (T - Q), (1 / xs[i] + 1 / xs[j])] + ni + nj
        den = [1 - Q * xs[i] / xs[j], 1 - Q * xs[j] / xs[i]] + di + dj
        terms.append(Term(_unit(n, i, j), tuple(num), tuple(den)))
    return tuple(terms)


def op_Dtilde21(n: int, q: complex, t: complex) -> DiffOperator:
    """sum_i a~_i T_i^2 + sum_{i<j} b~_ij T_i T_j (gauge-transformed twisted operator)."""
    _check_params(q, t)
    return DiffOperator(n, list(_dtilde_terms(n)), {"q": complex(q), "t": complex(t)}, "dtilde21")


def op_Htilde21(n: int, q: complex, t: complex, alpha: complex = 0.0, beta: complex = 0.0) -> DiffOperator:
    """D~_{2,1} + alpha sum_i U_i x_i^{-1} T_i + beta sum_i x_i^{-1}."""
    _check_params(q, t)
    xs = xsyms(n)
    terms = list(_dtilde_terms(n))
    for i in range(n):
        num, den = _ups_factors(xs, i, (i,))
        terms.append(Term(_unit(n, i), tuple([ALPHA] + num), tuple([xs[i]] + den)))
    terms.append(Term((0,) * n, (BETA * sum(1 / x for x in xs),)))
    params = {"q": complex(q), "t": complex(t), "alpha": complex(alpha), "beta": complex(beta)}
    return DiffOperator(n, terms, params, "htilde21")


def op_D21(n: int, q: complex, t: complex) -> DiffOperator:
    """Ungauged twisted operator with half-integer powers (principal square roots).

    Conjugate to D~_{2,1} by g = q^{z.z/4}, x = q^z; only meaningful where the
    principal branches of sqrt(x_i), sqrt(q) are consistent with the shifts.
    """
    _check_params(q, t)
    xs = xsyms(n)
    terms = []
    for i in range(n):
        n1, d1 = _ups_factors(xs, i, (i,))
        n2, d2 = _ups_factors(xs, i, (i,), Q)
        terms.append(Term(_unit(n, i, i), tuple(n1 + n2), tuple(d1 + d2)))
    for i, j in itertools.combinations(range(n), 2):
        ni, di = _ups_factors(xs, i, (i, j))
        nj, dj = _ups_factors(xs, j, (i, j))
        ri, rj = sp.sqrt(xs[i]), sp.sqrt(xs[j])
        num = [sp.sqrt(Q), (T - 1), (T - Q), (ri / rj + rj / ri)] + ni + nj
        den = [1 - Q * xs[i] / xs[j], 1 - Q * xs[j] / xs[i]] + di + dj
        terms.append(Term(_unit(n, i, j), tuple(num), tuple(den)))
    return DiffOperator(n, terms, {"q": complex(q), "t": complex(t)}, "d21")


def op_macdonald(n: int, q: complex, t: complex) -> DiffOperator:
    """First Macdonald-Ruijsenaars operator sum_i prod_{j!=i} (1 - t x_i/x_j)/(1 - x_i/x_j) T_i."""
    _check_params(q, t)
    xs = xsyms(n)
    terms = []
    for i in range(n):
        num, den = _ups_factors(xs, i, (i,))
        terms.append(Term(_unit(n, i), tuple(num) or (sp.Integer(1),), tuple(den)))
    return DiffOperator(n, terms, {"q": complex(q), "t": complex(t)}, "macdonald")


def _shifted(x: np.ndarray, mu: Sequence[int], q: complex) -> np.ndarray:
    scale = np.asarray([q**k for k in mu], dtype=complex).reshape((-1,) + (1,) * (x.ndim - 1))
    return x * scale


def apply(D: DiffOperator, f: TestFunction | Callable, x) -> complex | np.ndarray:
    """(D f)(x) = sum_mu c_mu(x) f(q^mu x); x of shape (n,) or (n, K) for a batch."""
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != D.n:
        raise ValueError(f"expected {D.n} coordinates, got {x.shape[0]}")
    coeffs = D.coefficients(x)
    q = D.q
    total = np.zeros(x.shape[1:], dtype=complex)
    for (shift, _, _), c in zip(D.compiled(), coeffs):
        total = total + c * np.asarray(f(_shifted(x, shift, q)), dtype=complex)
    return complex(total) if total.ndim == 0 else total


def classical_symbol(D: DiffOperator, pt: DarbouxPoint) -> complex:
    """sum_mu c_mu(x; q = 1) sigma^mu, the q -> 1 limit with T_i -> sigma_i."""
    if pt.n != D.n:
        raise ValueError("point and operator dimensions differ")
    for term in D.terms:
        if _singular_at_q1(term):
            raise PoleProximity(f"coefficient of T^{term.shift} is singular at q = 1")
    coeffs = D.coefficients(pt.x, q=1.0, t=pt.t)
    total = 0j
    for term, c in zip(D.terms, coeffs):
        total += complex(c) * complex(np.prod(pt.sigma ** np.asarray(term.shift)))
    return total


# --- quasi-invariance -------------------------------------------------------


def quasi_invariant_function(n: int, m: int, q: complex, rng: np.random.Generator) -> TestFunction:
    """A non-symmetric element of Q_m: e_2-style symmetric part plus Delta_m * u.

    Delta_m = prod_{a<b} prod_{j=1..m} (x_a - q^j x_b)(x_b - q^j x_a) vanishes at
    T_a^j x and T_b^j x whenever x_a = x_b, so Delta_m u lies in Q_m for any
    polynomial u. A symmetric f alone would make the check vacuous: the
    operators are permutation invariant, so D f is symmetric and the two sides
    agree by the swap a <-> b for every t.
    """
    cu = rng.normal(size=n) + 1j * rng.normal(size=n)
    qs = [complex(q) ** j for j in range(1, m + 1)]

    def fn(x):
        sym = sum(x[a] * x[b] for a, b in itertools.combinations(range(n), 2)) + sum(x[a] for a in range(n))
        delta = 1.0
        for a, b in itertools.combinations(range(n), 2):
            for qj in qs:
                delta = delta * (x[a] - qj * x[b]) * (x[b] - qj * x[a])
        u = sum(cu[a] * x[a] for a in range(n))
        return sym + delta * u

    return TestFunction(fn, symmetric=False, name=f"Q_{m} element")


def hyperplane_points(rng: np.random.Generator, n: int, count: int, radius: float = 0.3) -> list[np.ndarray]:
    """Generic points of the torus (the pair (a, b) is glued later)."""
    pts = []
    for _ in range(count):
        theta = 2 * np.pi * (np.arange(n) + rng.uniform(-0.25, 0.25, n)) / n + rng.uniform(-np.pi, np.pi)
        pts.append(np.exp(rng.uniform(-radius, radius, n) + 1j * theta))
    return pts


@dataclass
class QuasiInvarianceReport:
    max_residual: float
    tol: float
    m: int
    resonant: bool  # t == q^{-m}
    worst: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "m": self.m,
            "resonant": self.resonant,
            "worst": self.worst,
        }


def _circle_radius(x: np.ndarray, a: int, b: int, q: complex, m: int) -> float:
    # keep the circle x_a = x_b (1 + eps e^{i phi}) away from every other
    # hyperplane x_a = q^k x_c the shifted coefficients can hit
    ks = [k for k in range(-(m + 2), m + 3)]
    dist = [abs(q**k - 1) for k in ks if k != 0]
    for c in range(x.size):
        if c not in (a, b):
            dist += [abs(q**k * x[c] / x[b] - 1) for k in ks]
    return min(1e-2, 0.25 * min(dist))


def quasi_invariance_check(
    D: DiffOperator,
    m: int,
    f: TestFunction,
    samples: Sequence[np.ndarray] | int = 20,
    *,
    rng: np.random.Generator | None = None,
    tol: float = 1e-8,
    nodes: int = 32,
) -> QuasiInvarianceReport:
    """max |T_a^j g - T_b^j g| on x_a = x_b over samples, pairs and j <= m, g = D f.

    The individual terms of g have removable singularities on the glued
    hyperplane, so each side is evaluated as the mean over a small circle
    x_a = x_b (1 + eps e^{i phi}) (trapezoid rule, exact for holomorphic
    functions up to (eps/rho)^nodes). Residuals are divided by
    max(1, max |T_a^j g| on the circle).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if isinstance(samples, int):
        samples = hyperplane_points(rng, D.n, samples)
    if f.symmetric and not f.check_symmetry(rng, D.n):
        raise ValueError(f"test function {f.name!r} is declared symmetric but is not")
    q, n = D.q, D.n
    resonant = bool(abs(D.t - q ** (-m)) <= 1e-12 * max(1.0, abs(D.t)))
    phi = 2 * np.pi * np.arange(nodes) / nodes
    worst_val, worst = 0.0, {}
    g = lambda y: apply(D, f, y)  # noqa: E731
    for s_idx, base in enumerate(samples):
        base = np.asarray(base, dtype=complex)
        for a, b in itertools.combinations(range(n), 2):
            x = base.copy()
            x[a] = x[b]
            eps = _circle_radius(x, a, b, q, m)
            X = np.repeat(x[:, None], nodes, axis=1)
            X[a] = x[b] * (1 + eps * np.exp(1j * phi))
            for j in range(1, m + 1):
                ga = g(_shifted(X, _unit(n, *([a] * j)), q))
                gb = g(_shifted(X, _unit(n, *([b] * j)), q))
                diff = abs(np.mean(ga - gb))
                scale = max(1.0, float(np.max(np.abs(ga))), float(np.max(np.abs(gb))))
                r = diff / scale
                if r >= worst_val:
                    worst_val, worst = r, {"sample": s_idx, "a": a, "b": b, "j": j}
    return QuasiInvarianceReport(float(worst_val), tol, m, resonant, worst)
