from __future__ import annotations

import numpy as np
import pytest

from rsq.darboux import DarbouxPoint, nu_from_sigma
from rsq.errors import DegenerateSpectrum, NonHolomorphic
from rsq.poisson import (
    ChartFunction,
    canonical_bracket,
    coordinate,
    expected_nu_bracket,
    hid_sides,
    nu_function,
    product,
    trace_function,
    verify_duality,
    verify_involution,
    verify_xi_poisson,
    xi_pullbacks,
)
from rsq.sampling import sample_params, sample_point


def _pt(rng, n, t=1.6 - 0.5j):
    return sample_point(rng, n, t)


def test_defining_relations(rng):
    pt = _pt(rng, 3)
    x1, s1, x2 = coordinate("x", 0), coordinate("sigma", 0), coordinate("x", 1)
    b = canonical_bracket(x1, s1, pt)
    assert abs(b.value - pt.x[0] * pt.sigma[0]) <= 1e-9
    assert b.error < 1e-6
    assert canonical_bracket(x1, x2, pt).value == 0
    assert canonical_bracket(s1, coordinate("sigma", 2), pt).value == 0
    assert abs(canonical_bracket(x1, coordinate("sigma", 1), pt).value) <= 1e-12


def test_antisymmetry_is_exact(rng):
    pt = _pt(rng, 3)
    f, g = trace_function("F", j=2), trace_function("G", m=2)
    assert canonical_bracket(f, g, pt).value == -canonical_bracket(g, f, pt).value


@pytest.mark.parametrize("n", [2, 3, 4])
def test_nu_brackets(rng, n):
    pt = _pt(rng, n)
    for i in range(n):
        for j in range(n):
            if i != j:
                got = canonical_bracket(nu_function(i), nu_function(j), pt).value
                want = expected_nu_bracket(pt, i, j)
                assert abs(got - want) <= 1e-6 * abs(want)
        nu = nu_from_sigma(pt.x, pt.sigma, pt.t)
        for j in range(n):
            got = canonical_bracket(coordinate("x", i), nu_function(j), pt).value
            want = pt.x[i] * nu[j] if i == j else 0
            assert abs(got - want) <= 1e-6 * max(1, abs(pt.x[i] * nu[j]))


def test_leibniz_and_jacobi(rng):
    pt = _pt(rng, 2)
    f, g, h = nu_function(0), trace_function("F", j=2), trace_function("E", j=3)
    lhs = canonical_bracket(f, product(g, h), pt).value
    rhs = canonical_bracket(f, g, pt).value * h(pt) + g(pt) * canonical_bracket(f, h, pt).value
    assert abs(lhs - rhs) <= 1e-6 * max(1, abs(rhs))

    # Jacobi on coordinate monomials, nested differences with a coarser outer step
    a = product(coordinate("x", 0), coordinate("sigma", 1))
    b = product(coordinate("x", 1), coordinate("x", 1))
    c = product(coordinate("sigma", 0), coordinate("sigma", 1))

    def br(u, v):
        return ChartFunction(lambda q: canonical_bracket(u, v, q, h=1e-5).value, "br")

    total = 0j
    scale = 0.0
    for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
        term = canonical_bracket(u, br(v, w), pt, h=1e-3).value
        total += term
        scale = max(scale, abs(term))
    assert abs(total) <= 1e-4 * max(1.0, scale)


def test_non_holomorphic_detected(rng):
    pt = _pt(rng, 2)
    bad = ChartFunction(lambda q: np.conj(q.x[0]) * q.sigma[0], "conj")
    with pytest.raises(NonHolomorphic):
        canonical_bracket(bad, coordinate("sigma", 0), pt)
    absval = ChartFunction(lambda q: abs(q.sigma[1]) ** 2, "abs2")
    with pytest.raises(NonHolomorphic):
        canonical_bracket(coordinate("x", 1), absval, pt)


def test_involution_families(rng):
    pts = [_pt(rng, n) for n in (2, 3, 4)]
    e = verify_involution([trace_function("E", j=j) for j in (1, 2, 3)], pts)
    assert e.max_residual == 0
    f = verify_involution([trace_function("F", j=j) for j in (1, 2, 3)], pts)
    assert f.passed and f.max_residual <= 1e-6
    for m in (1, 2, 3):
        g = verify_involution([trace_function("G", m=m, j=1), trace_function("G", m=m, j=2)], pts)
        assert g.passed, g.values


def test_involution_reports_failures(rng):
    pts = [_pt(rng, 2)]
    r = verify_involution([coordinate("x", 0), coordinate("sigma", 0)], pts)
    assert not r.passed
    assert r.worst["{x1,sigma1}"] == 0


def test_xi_pullbacks_algebraic(rng):
    for m in (2, 3):
        p = sample_params(rng, m, 3)
        pt = sample_point(rng, 3, p.t)
        vals = xi_pullbacks(pt, p, (1, 2))
        tau = np.sum(p.t_partial)
        from rsq.darboux import cauchy_B

        B = cauchy_B(pt)
        for a in (1, 2):
            assert abs(vals[f"f{a}"] - m * np.sum(pt.x**a)) <= 1e-12 * max(1, abs(vals[f"f{a}"]))
            want = tau * np.trace(B @ np.diag(pt.x**a))
            assert abs(vals[f"g{a}"] - want) <= 1e-12 * max(1, abs(want))
        for beta, gamma in ((1, 2), (1, 3), (2, 3)):
            lhs, rhs = hid_sides(pt, p, beta, gamma)
            assert abs(lhs - rhs) <= 1e-9 * max(1, abs(rhs))


def test_xi_poisson_small_case(rng):
    p = sample_params(rng, 2, 2)
    pts = [sample_point(rng, 2, p.t) for _ in range(2)]
    r = verify_xi_poisson(p, pts)
    assert r.passed, r.values
    assert r.values["{f,g}"] <= 1e-6
    with pytest.raises(ValueError):
        verify_xi_poisson(sample_params(rng, 1, 2), pts)


def test_duality_scalar():
    pt = DarbouxPoint([1.3 + 0.2j], [0.7 - 0.1j], 2.0)
    r = verify_duality(pt)
    assert r.max_residual <= 1e-9


@pytest.mark.parametrize("n,tol", [(2, 1e-5), (3, 1e-4)])
def test_duality_random(rng, n, tol):
    for _ in range(3):
        r = verify_duality(_pt(rng, n), tol=tol)
        assert r.passed, r.values


def test_duality_degenerate_spectrum():
    # tune sigma_2 so that the 2x2 Cauchy matrix has a double eigenvalue
    t = 2.0
    x = np.array([1.0, -1.0 + 0.0j])
    pt = DarbouxPoint(x, [1.0, 1.0], t)
    from rsq.darboux import cauchy_B

    B = cauchy_B(pt)
    # rescale sigma_2 so that the discriminant vanishes: tr^2 = 4 det
    # tr = a + b s, det = (a b - c) s with a = B11, b = B22, c = B12 B21 at s2 = 1
    a, b, c = B[0, 0], B[1, 1], B[0, 1] * B[1, 0]
    roots = np.roots([b**2, 2 * a * b - 4 * (a * b - c), a**2])
    pt2 = DarbouxPoint(x, [1.0, roots[0]], t)
    with pytest.raises(DegenerateSpectrum):
        verify_duality(pt2)
