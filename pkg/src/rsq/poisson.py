"""Finite-difference Poisson brackets in the log-canonical chart.

The bracket is {f, g} = sum_i x_i sigma_i (df/dx_i dg/dsigma_i - df/dsigma_i dg/dx_i).
Evaluators are holomorphic, so each partial derivative is a central difference
along the real axis of that coordinate; two step sizes give a Richardson value
and an error estimate, and a difference along the imaginary axis checks the
Cauchy-Riemann equations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .darboux import DarbouxPoint, build_cyclic_point, build_tadpole_point, cauchy_B, dual_chart_extract, nu_from_sigma
from .errors import DegenerateSpectrum, NonHolomorphic
from .linalg import Tolerance
from .quiver import QuiverParams, Residuals

__all__ = [
    "ChartFunction",
    "Gradient",
    "BracketValue",
    "DEFAULT_STEP",
    "chart_gradient",
    "canonical_bracket",
    "bracket_from_gradients",
    "coordinate",
    "nu_function",
    "expected_nu_bracket",
    "trace_function",
    "product",
    "verify_involution",
    "verify_xi_poisson",
    "verify_duality",
    "xi_pullbacks",
    "hid_sides",
]

DEFAULT_STEP = 1e-5
EPS = np.finfo(float).eps
SPECTRAL_GAP = 1e-4


@dataclass(frozen=True)
class ChartFunction:
    fn: Callable[[DarbouxPoint], complex]
    name: str = "f"

    def __call__(self, pt: DarbouxPoint) -> complex:
        return complex(self.fn(pt))


class Gradient(NamedTuple):
    """Partial derivatives of a (possibly vector-valued) function; rows index the outputs."""

    dx: np.ndarray
    dsigma: np.ndarray
    err_x: np.ndarray
    err_sigma: np.ndarray
    value: np.ndarray


class BracketValue(NamedTuple):
    value: complex
    error: float


def _shift(pt: DarbouxPoint, which: int, i: int, delta: complex) -> DarbouxPoint:
    if which == 0:
        x = pt.x.copy()
        x[i] += delta
        return pt.replace(x=x)
    s = pt.sigma.copy()
    s[i] += delta
    return pt.replace(sigma=s)


def chart_gradient(fn: Callable[[DarbouxPoint], object], pt: DarbouxPoint, h: float = DEFAULT_STEP) -> Gradient:
    """Richardson-extrapolated partials of ``fn`` at ``pt``.

    The step for coordinate c is h * |c|. Raises NonHolomorphic when the
    real- and imaginary-axis differences disagree by more than 100 times the
    discretization gap predicted from the two real-axis estimates.
    """
    f0 = np.atleast_1d(np.asarray(fn(pt), dtype=complex))
    k, n = f0.size, pt.n
    out = [np.zeros((k, n), dtype=complex) for _ in range(2)]
    err = [np.zeros((k, n)) for _ in range(2)]
    fscale = max(1.0, float(np.max(np.abs(f0))))
    for which, coords in ((0, pt.x), (1, pt.sigma)):
        for i in range(n):
            step = h * max(abs(coords[i]), 1e-8)

            def ev(delta):
                return np.atleast_1d(np.asarray(fn(_shift(pt, which, i, delta)), dtype=complex))

            d1 = (ev(step) - ev(-step)) / (2 * step)
            d2 = (ev(step / 2) - ev(-step / 2)) / step
            di = (ev(1j * step) - ev(-1j * step)) / (2j * step)
            gap = np.abs(d1 - d2)
            rounding = 10 * EPS * fscale / step
            cr = np.abs(d1 - di)
            bad = cr > 100 * (8.0 / 3.0) * gap + rounding
            if np.any(bad):
                raise NonHolomorphic(
                    f"Cauchy-Riemann mismatch {float(np.max(cr)):.3e} in d/d{'x' if which == 0 else 'sigma'}_{i + 1}"
                )
            out[which][:, i] = (4 * d2 - d1) / 3
            err[which][:, i] = gap / 3 + rounding
    return Gradient(out[0], out[1], err[0], err[1], f0)


def bracket_from_gradients(gf: Gradient, gg: Gradient, pt: DarbouxPoint, a: int = 0, b: int = 0) -> tuple[complex, float, float]:
    """({f_a, g_b}, error estimate, cancelling-term scale) from precomputed gradients."""
    w = pt.x * pt.sigma
    # forming p - q before weighting makes {g, f} = -{f, g} exactly
    pq = gf.dx[a] * gg.dsigma[b]
    qp = gf.dsigma[a] * gg.dx[b]
    val = complex(np.sum(w * (pq - qp)))
    t1, t2 = w * pq, w * qp
    aw = np.abs(w)
    e = float(
        np.sum(
            aw
            * (
                gf.err_x[a] * np.abs(gg.dsigma[b])
                + np.abs(gf.dx[a]) * gg.err_sigma[b]
                + gf.err_sigma[a] * np.abs(gg.dx[b])
                + np.abs(gf.dsigma[a]) * gg.err_x[b]
            )
        )
    )
    scale = float(np.sum(np.abs(t1) + np.abs(t2)))
    return val, e, scale


def canonical_bracket(f: ChartFunction, g: ChartFunction, pt: DarbouxPoint, h: float = DEFAULT_STEP) -> BracketValue:
    val, e, _ = bracket_from_gradients(chart_gradient(f, pt, h), chart_gradient(g, pt, h), pt)
    return BracketValue(val, e)


# ---- function library ----------------------------------------------------


def coordinate(kind: str, i: int) -> ChartFunction:
    """x_i or sigma_i (0-based index)."""
    if kind == "x":
        return ChartFunction(lambda pt: pt.x[i], f"x{i + 1}")
    if kind == "sigma":
        return ChartFunction(lambda pt: pt.sigma[i], f"sigma{i + 1}")
    raise ValueError(f"unknown coordinate {kind!r}")


def nu_function(i: int) -> ChartFunction:
    return ChartFunction(lambda pt: nu_from_sigma(pt.x, pt.sigma, pt.t)[i], f"nu{i + 1}")


def expected_nu_bracket(pt: DarbouxPoint, i: int, j: int) -> complex:
    """{nu_i, nu_j} = (1-t)^2 (x_i+x_j) x_i x_j nu_i nu_j / ((x_i-x_j)(x_i-t x_j)(x_j-t x_i))."""
    if i == j:
        return 0j
    x, t = pt.x, pt.t
    nu = nu_from_sigma(x, pt.sigma, t)
    num = (1 - t) ** 2 * (x[i] + x[j]) * x[i] * x[j] * nu[i] * nu[j]
    return complex(num / ((x[i] - x[j]) * (x[i] - t * x[j]) * (x[j] - t * x[i])))


def trace_function(kind: str, m: int = 1, j: int = 1) -> ChartFunction:
    """Chart functions of (A, B) = (diag x, Cauchy matrix).

    kind 'E': tr A^j; 'F': tr B^j; 'G': tr (A^{-1} B^m)^j.
    """
    mp = np.linalg.matrix_power
    if kind == "E":
        return ChartFunction(lambda pt: np.sum(pt.x**j), f"E{j}")
    if kind == "F":
        return ChartFunction(lambda pt: np.trace(mp(cauchy_B(pt), j)), f"F{j}")
    if kind == "G":

        def g(pt):
            M = (cauchy_B(pt) / pt.x[:, None]) @ mp(cauchy_B(pt), m - 1) if m >= 1 else np.diag(1 / pt.x)
            return np.trace(mp(M, j))

        return ChartFunction(g, f"G{m},{j}")
    raise ValueError(f"unknown family {kind!r}")


def product(f: ChartFunction, g: ChartFunction) -> ChartFunction:
    return ChartFunction(lambda pt: f(pt) * g(pt), f"{f.name}*{g.name}")


# ---- verification --------------------------------------------------------


def verify_involution(
    family: Sequence[ChartFunction], pts: Sequence[DarbouxPoint], tol: float = 1e-6, h: float = DEFAULT_STEP
) -> Residuals:
    """Max over points of |{f_i, f_j}| divided by the size of the cancelling terms."""
    values: dict[str, float] = {}
    worst: dict[str, object] = {}
    for pi, pt in enumerate(pts):
        grads = [chart_gradient(f, pt, h) for f in family]
        for a, b in itertools.combinations(range(len(family)), 2):
            key = f"{{{family[a].name},{family[b].name}}}"
            val, _, scale = bracket_from_gradients(grads[a], grads[b], pt)
            r = abs(val) / scale if scale > 0 else abs(val)
            if r >= values.get(key, -1.0):
                values[key] = r
                worst[key] = pi
    return Residuals(values, {k: 0.0 for k in values}, Tolerance(tol, 0.0), worst)


def _block_traces(d, m: int):
    mp = np.linalg.matrix_power
    X, Z = d.X_block, d.Z_block

    def f(a):
        return np.trace(mp(X, a * m))

    def g(b):
        return np.trace(Z @ mp(X, 1 + b * m))

    def hh(r, s):
        return np.trace(Z @ mp(X, 1 + r) @ Z @ mp(X, 1 + s))

    return f, g, hh


def xi_pullbacks(pt: DarbouxPoint, p: QuiverParams, alphas=(1, 2, 3, 4)) -> dict[str, complex]:
    """f_a = tr X^{am} and g_b = tr(Z X^{1+bm}) of the lifted point, keyed 'f1', 'g1', ..."""
    d = build_cyclic_point(pt, p)
    f, g, _ = _block_traces(d, p.m)
    out = {}
    for a in alphas:
        out[f"f{a}"] = complex(f(a))
        out[f"g{a}"] = complex(g(a))
    return out


def hid_sides(pt: DarbouxPoint, p: QuiverParams, beta: int, gamma: int) -> tuple[complex, complex]:
    """Both sides of sum_r h_{r,(b+c)m-r} = tau^2 sum_p tr(B A^p B A^{b+c-p}) for b < c."""
    if not beta < gamma:
        raise ValueError("need beta < gamma")
    m = p.m
    d = build_cyclic_point(pt, p)
    _, _, hh = _block_traces(d, m)
    lhs = sum(hh(r, (beta + gamma) * m - r) for r in range(beta * m, gamma * m))
    A, B = np.diag(pt.x), cauchy_B(pt)
    mp = np.linalg.matrix_power
    tau = np.sum(p.t_partial)
    rhs = tau**2 * sum(np.trace(B @ mp(A, q) @ B @ mp(A, beta + gamma - q)) for q in range(beta, gamma))
    return complex(lhs), complex(rhs)


def verify_xi_poisson(
    p: QuiverParams, pts: Sequence[DarbouxPoint], tol: float = 1e-6, h: float = DEFAULT_STEP, max_index: int = 2
) -> Residuals:
    """Bracket relations of f_a, g_b pulled back through the lift, plus the algebraic identities."""
    if p.m < 2:
        raise ValueError("the lift needs m >= 2")
    m = p.m
    idx = list(range(1, max_index + 1))
    tau = np.sum(p.t_partial)
    values: dict[str, float] = {}
    worst: dict[str, object] = {}

    def record(key, r, where):
        if r >= values.get(key, -1.0):
            values[key] = float(r)
            worst[key] = where

    names = [f"f{a}" for a in idx] + [f"g{b}" for b in idx]
    for pi, pt in enumerate(pts):
        vec = lambda q: np.array([xi_pullbacks(q, p, idx)[k] for k in names])  # noqa: E731
        grad = chart_gradient(vec, pt, h)
        full = xi_pullbacks(pt, p, range(1, 2 * max_index + 1))
        for a in idx:
            fa = names.index(f"f{a}")
            ea = np.sum(pt.x**a) * m
            record("pullback_f", abs(full[f"f{a}"] - ea) / max(1.0, abs(ea)), pi)
            eg = tau * np.trace(cauchy_B(pt) @ np.diag(pt.x**a))
            record("pullback_g", abs(full[f"g{a}"] - eg) / max(1.0, abs(eg)), pi)
            for b in idx:
                fb = names.index(f"f{b}")
                if a < b:
                    val, _, scale = bracket_from_gradients(grad, grad, pt, fa, fb)
                    record("{f,f}", abs(val) / max(scale, 1e-300) if scale else abs(val), pi)
                gb = names.index(f"g{b}")
                val, _, scale = bracket_from_gradients(grad, grad, pt, fa, gb)
                target = a * m * full[f"g{a + b}"]
                record("{f,g}", abs(val - target) / max(scale, abs(target), 1e-300), pi)
        for beta, gamma in itertools.combinations(range(1, max_index + 2), 2):
            lhs, rhs = hid_sides(pt, p, beta, gamma)
            record("h_identity", abs(lhs - rhs) / max(1.0, abs(rhs)), pi)
    return Residuals(values, {k: 0.0 for k in values}, Tolerance(tol, 0.0), worst)


def _dual_coords(reference: np.ndarray):
    def fn(pt: DarbouxPoint):
        dp = dual_chart_extract(build_tadpole_point(pt), pt.t, tol=1e-6)
        # keep the labels of the base point under small perturbations
        order = [int(np.argmin(np.abs(dp.pos - z))) for z in reference]
        return np.concatenate([dp.pos[order], dp.mom[order]])

    return fn


def verify_duality(pt: DarbouxPoint, q0: complex | None = None, tol: float = 1e-5, h: float = DEFAULT_STEP) -> Residuals:
    """{z_i, z_j} = 0, {z_i, theta_j} = -delta_ij z_i theta_j, {theta_i, theta_j} = 0."""
    q0 = pt.t if q0 is None else complex(q0)
    if abs(q0 - pt.t) > 1e-12 * max(1.0, abs(q0)):
        raise ValueError("chart parameter must equal q0")
    n = pt.n
    z = np.linalg.eigvals(cauchy_B(pt))
    if n > 1:
        diff = np.abs(z[:, None] - z[None, :]) + np.diag(np.full(n, np.inf))
        if np.min(diff) < SPECTRAL_GAP * max(1.0, float(np.max(np.abs(z)))):
            raise DegenerateSpectrum("spectral gap of Z below 1e-4; eigen-differentiation is ill-posed")
    base = dual_chart_extract(build_tadpole_point(pt), q0, tol=1e-6)
    grad = chart_gradient(_dual_coords(base.pos), pt, h)
    zs, th = base.pos, base.mom
    values = {"zz": 0.0, "ztheta": 0.0, "thetatheta": 0.0}
    worst: dict[str, object] = {}
    for i in range(n):
        for j in range(n):
            for key, a, b, target in (
                ("zz", i, j, 0j),
                ("ztheta", i, n + j, -zs[i] * th[j] if i == j else 0j),
                ("thetatheta", n + i, n + j, 0j),
            ):
                val, _, scale = bracket_from_gradients(grad, grad, pt, a, b)
                r = float(abs(val - target) / max(scale, abs(target), 1e-300))
                if r > values[key]:
                    values[key] = r
                    worst[key] = (i + 1, j + 1)
    return Residuals(values, {k: 0.0 for k in values}, Tolerance(tol, 0.0), worst)
