from __future__ import annotations

import numpy as np
import pytest

from rsq.darboux import DarbouxPoint, cauchy_B
from rsq.errors import BadParameters, PoleProximity
from rsq.hamiltonians import coord_G, coord_G2_explicit
from rsq.quantum import Q as QSYM
from rsq.quantum import (
    DiffOperator,
    Term,
    TestFunction,
    apply,
    classical_symbol,
    op_D21,
    op_Dtilde21,
    op_Htilde21,
    op_macdonald,
    quasi_invariance_check,
    quasi_invariant_function,
)
from rsq.sampling import sample_point

Q = 0.7 + 0.3j
TT = 0.6 + 0.5j


def test_scalar_dtilde():
    D = op_Dtilde21(1, Q, TT)
    assert len(D.terms) == 1 and D.terms[0].shift == (2,)
    f = TestFunction(lambda x: x[0])
    assert np.isclose(apply(D, f, [1.7 - 0.2j]), Q)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_term_count(n):
    assert len(op_Dtilde21(n, Q, TT).terms) == n + n * (n - 1) // 2


def test_identity_and_linearity(rng):
    ident = DiffOperator(2, [Term((0, 0), (1,))], {"q": Q, "t": TT})
    f = TestFunction(lambda x: x[0] ** 2 + 3 * x[1])
    g = TestFunction(lambda x: x[0] * x[1] - 1)
    x = np.array([1.1 + 0.3j, -0.4 + 0.9j])
    assert apply(ident, f, x) == f(x)
    D = op_Htilde21(2, Q, TT, 0.4, -0.2)
    fg = TestFunction(lambda x: 2 * f(x) - 1j * g(x))
    assert np.isclose(apply(D, fg, x), 2 * apply(D, f, x) - 1j * apply(D, g, x), rtol=1e-13)
    # linear in the operator
    M = op_macdonald(2, Q, TT)
    both = D + M
    assert np.isclose(apply(both, f, x), apply(D, f, x) + apply(M, f, x), rtol=1e-13)


def test_batched_apply_matches_pointwise(rng):
    D = op_Dtilde21(3, Q, TT)
    f = TestFunction(lambda x: x[0] * x[1] + x[2] ** 2)
    X = np.exp(rng.uniform(-0.3, 0.3, (3, 4)) + 1j * rng.uniform(-np.pi, np.pi, (3, 4)))
    batch = apply(D, f, X)
    for k in range(4):
        assert np.isclose(batch[k], apply(D, f, X[:, k]), rtol=1e-14)


def test_free_and_degenerate_couplings():
    x = np.array([1.2 + 0.1j, 0.3 - 0.8j, -0.9 + 0.2j])
    for t in (1.0, Q):
        D = op_Dtilde21(3, Q, t)
        coeffs = D.coefficients(x)
        pairs = [c for term, c in zip(D.terms, coeffs) if sum(1 for k in term.shift if k) == 2]
        assert np.allclose(pairs, 0)
    free = op_Dtilde21(3, Q, 1.0).coefficients(x)[:3]
    assert np.allclose(free, 1 / (Q * x))


def test_bad_parameters():
    with pytest.raises(BadParameters):
        op_Dtilde21(2, Q, 0.0)
    with pytest.raises(BadParameters):
        op_Dtilde21(2, np.exp(2j * np.pi / 5), TT)
    with pytest.raises(BadParameters):
        op_macdonald(2, -1.0, TT)
    op_Dtilde21(2, np.exp(2j * np.pi * np.sqrt(2) / 7), TT)  # irrational angle is fine


def test_pole_proximity():
    D = op_Dtilde21(2, Q, TT)
    f = TestFunction(lambda x: x[0])
    with pytest.raises(PoleProximity):
        apply(D, f, [1.0 + 0j, 1.0 + 1e-12])
    with pytest.raises(PoleProximity):
        apply(D, f, [Q, 1.0])  # 1 - q x_2/x_1 = 0


def test_htilde_reduces():
    x = np.array([1.2 + 0.1j, 0.3 - 0.8j])
    f = TestFunction(lambda x: x[0] ** 2 * x[1])
    assert np.isclose(apply(op_Htilde21(2, Q, TT), f, x), apply(op_Dtilde21(2, Q, TT), f, x))
    al, be = 0.3 - 0.1j, 2.0
    H1 = op_Htilde21(1, Q, TT, al, be)
    y = 0.8 + 0.4j
    g = TestFunction(lambda x: x[0] ** 3)
    assert np.isclose(apply(H1, g, [y]), (Q * y) ** -1 * (Q**2 * y) ** 3 + al / y * (Q * y) ** 3 + be / y * y**3)


def test_macdonald_simple_cases():
    x = np.array([1.2 + 0.1j, 0.3 - 0.8j, 0.5 + 0.5j])
    f = TestFunction(lambda x: x[0] + 2 * x[1] + 3 * x[2])
    assert np.isclose(apply(op_macdonald(1, Q, TT), TestFunction(lambda y: y[0] ** 2), x[:1]), (Q * x[0]) ** 2)
    expected = sum(f(x * np.where(np.arange(3) == i, Q, 1)) for i in range(3))
    assert np.isclose(apply(op_macdonald(3, Q, 1.0), f, x), expected)


def test_b_symmetry():
    D = op_Dtilde21(3, Q, TT)
    x = np.array([1.2 + 0.1j, 0.3 - 0.8j, -0.6 + 0.5j])
    coeffs = dict(zip([t.shift for t in D.terms], D.coefficients(x)))
    for i, j in ((0, 1), (0, 2), (1, 2)):
        sw = x.copy()
        sw[[i, j]] = sw[[j, i]]
        cs = dict(zip([t.shift for t in D.terms], D.coefficients(sw)))
        mu = tuple(1 if k in (i, j) else 0 for k in range(3))
        assert np.isclose(coeffs[mu], cs[mu], rtol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_symbol_matches_classical_hamiltonian(rng, n):
    al, be = 0.7 - 0.2j, -1.1 + 0.4j
    for _ in range(30):
        t = complex(np.exp(rng.uniform(-0.3, 0.3) + 1j * rng.uniform(0.5, 2.5)))
        pt = sample_point(rng, n, t)
        s = classical_symbol(op_Dtilde21(n, Q, t), pt)
        g2 = coord_G(pt, 2)
        assert abs(s - g2) <= 1e-10 * max(1, abs(g2))
        assert abs(s - coord_G2_explicit(pt)) <= 1e-10 * max(1, abs(g2))
        sh = classical_symbol(op_Htilde21(n, Q, t, al, be), pt)
        ref = g2 + al * coord_G(pt, 1) + be * coord_G(pt, 0)
        assert abs(sh - ref) <= 1e-10 * max(1, abs(ref))


def test_scalar_symbol():
    pt = DarbouxPoint([0.8 + 0.1j], [1.3 - 0.2j], TT)
    assert np.isclose(classical_symbol(op_Dtilde21(1, Q, TT), pt), pt.sigma[0] ** 2 / pt.x[0])


def test_macdonald_symbol_is_lax_trace(rng):
    from rsq.darboux import DualPoint
    from rsq.hamiltonians import dual_coord_hams
    from rsq.quiver import QuiverParams

    for n in (2, 3, 4):
        pt = sample_point(rng, n, TT)
        s = classical_symbol(op_macdonald(n, Q, TT), pt)
        assert abs(s - np.trace(cauchy_B(pt))) <= 1e-12 * max(1, abs(s))
        # the dual E-Hamiltonian uses t^{-1}: symbol of the operator at 1/t
        dp = DualPoint(pt.x, pt.sigma, TT)
        E = dual_coord_hams(dp, QuiverParams(1, n, (TT,))).E1
        s_inv = classical_symbol(op_macdonald(n, Q, 1 / TT), pt.replace(t=1 / TT))
        assert abs(s_inv - E) <= 1e-12 * max(1, abs(E))


def test_symbol_rejects_singular_limit():
    D = DiffOperator(1, [Term((1,), (1,), (1 - QSYM,))], {"q": Q, "t": TT})
    with pytest.raises(PoleProximity):
        classical_symbol(D, DarbouxPoint([1.5], [1.0], TT))


def test_gauge_relation_to_ungauged_operator():
    # D~ f = g D (g^{-1} f) with g = q^{z.z/4}, x = q^z, on a branch-safe region
    q, t, n = 1.6, 0.45, 3
    lq = np.log(q)
    x = np.array([1.3, 2.1, 0.7], dtype=complex)

    def g(y):
        z = np.log(y) / lq
        return np.exp(lq * np.sum(z**2, axis=0) / 4)

    f = TestFunction(lambda y: y[0] ** 2 + y[1] * y[2] + 1)
    lhs = apply(op_Dtilde21(n, q, t), f, x)
    rhs = g(x) * apply(op_D21(n, q, t), TestFunction(lambda y: f(y) / g(y)), x)
    assert abs(lhs - rhs) <= 1e-12 * max(1, abs(lhs))


def test_symmetry_flag_is_checked(rng):
    D = op_Dtilde21(2, Q, Q**-1)
    bad = TestFunction(lambda x: x[0], symmetric=True)
    with pytest.raises(ValueError):
        quasi_invariance_check(D, 1, bad, 2, rng=rng)


@pytest.mark.parametrize("m,n", [(1, 2), (1, 3), (2, 2), (2, 3)])
def test_quasi_invariance_preserved(rng, m, n):
    q = complex(np.exp(0.2 + 0.9j))
    f = quasi_invariant_function(n, m, q, rng)
    rep = quasi_invariance_check(op_Dtilde21(n, q, q ** (-m)), m, f, 20, rng=rng)
    assert rep.resonant and rep.passed, rep.as_dict()
    # negative control: generic t breaks quasi-invariance
    ctrl = quasi_invariance_check(op_Dtilde21(n, q, 1.3 * q ** (-m)), m, f, 20, rng=rng)
    assert not ctrl.resonant and not ctrl.passed


def test_quasi_invariance_symmetric_examples(rng):
    q = complex(np.exp(-0.3 + 1.1j))
    f = TestFunction(lambda x: x[0] + x[1], symmetric=True)
    assert quasi_invariance_check(op_Dtilde21(2, q, q**-1), 1, f, 5, rng=rng).passed
    e2 = TestFunction(lambda x: x[0] * x[1] + x[0] * x[2] + x[1] * x[2], symmetric=True)
    assert quasi_invariance_check(op_Dtilde21(3, q, q**-2), 2, e2, 5, rng=rng).passed


def test_quasi_invariant_function_is_in_Qm(rng):
    q = complex(np.exp(0.1 + 0.7j))
    f = quasi_invariant_function(3, 2, q, rng)
    x = np.array([0.9 + 0.2j, 0.9 + 0.2j, -0.5 + 0.4j])
    for j in (1, 2):
        xa, xb = x.copy(), x.copy()
        xa[0] *= q**j
        xb[1] *= q**j
        assert abs(f(xa) - f(xb)) <= 1e-12
    assert not f.check_symmetry(rng, 3)
