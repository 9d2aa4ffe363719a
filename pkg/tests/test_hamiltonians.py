from __future__ import annotations

import numpy as np
import pytest

from rsq.darboux import DarbouxPoint, DualPoint, build_dual_cyclic_point, cauchy_B, permute
from rsq.hamiltonians import (
    ab_reduction,
    coord_G,
    coord_G2_explicit,
    coord_G3_explicit,
    coord_H,
    dual_coord_hams,
    elementary_symmetric,
    ham_normalization,
    ham_trace,
)
from rsq.linalg import random_matrix
from rsq.quiver import QuiverParams, TadpoleData, apply_gauge
from rsq.sampling import sample_dual_point, sample_params, sample_point

from .conftest import random_point, rel_err


def test_scalar_tadpole_values():
    d = TadpoleData([[2.0]], [[2.5]], [[2.0]], [[2.0]])
    assert np.isclose(ham_trace(d, "F", 1), 6.0)
    assert np.isclose(ham_trace(d, "E", 1), 2.0)
    assert np.isclose(ham_trace(d, "H", 1), 2.5)
    assert np.isclose(ham_trace(d, "G", 1), 3.0)
    assert np.isclose(ham_trace(d, "F", -1), 1 / 6)
    with pytest.raises(ValueError):
        ham_trace(d, "E", 0)
    with pytest.raises(ValueError):
        ham_trace(d, "Q", 1)


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("family", ["E", "F", "G", "H"])
def test_cyclic_traces_reduce_to_pair(rng, m, family):
    for _ in range(3):
        p, pt, d = random_point(rng, m, 3)
        A, B = np.diag(pt.x), cauchy_B(pt)
        for j in (1, 2):
            ab = ab_reduction(A, B, p, family, j)
            assert rel_err(ham_trace(d, family, j), ab.scaled) <= 1e-10


def test_normalizations():
    p = QuiverParams(3, 2, (2.0, 0.5, 3.0))
    ts = [2.0, 1.0, 3.0]
    assert ham_normalization(p, "E", 2) == 3
    assert np.isclose(ham_normalization(p, "F", 2), sum(v**2 for v in ts))
    assert np.isclose(ham_normalization(p, "G", 2), 3 * 36)
    assert np.isclose(ham_normalization(p, "H", 1), 3 * 6)


def test_coord_G_small_cases():
    assert np.isclose(coord_G(DarbouxPoint([1.0, 3.0], [1.0, 1.0], 2.0), 0), 4 / 3)
    pt1 = DarbouxPoint([1.7 + 0.2j], [0.4 - 1j], 2.5)
    assert np.isclose(coord_G(pt1, 1), pt1.sigma[0] / pt1.x[0])
    pt = DarbouxPoint([1.0, 3.0], [1.0, 1.0], 2.0)
    B = np.array([[0.5, 1.5], [-0.5, 2.5]])
    expected = np.trace(np.linalg.inv(np.diag([1.0, 3.0])) @ B @ B)
    assert np.isclose(coord_G(pt, 2), expected)
    assert np.isclose(coord_G2_explicit(pt), expected)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
@pytest.mark.parametrize("n", [1, 2, 4, 5])
def test_coord_G_matches_trace(rng, m, n):
    for _ in range(4):
        pt = sample_point(rng, n, sample_params(rng, 1, n).t)
        A, B = np.diag(pt.x), cauchy_B(pt)
        tr = np.trace(np.linalg.inv(A) @ np.linalg.matrix_power(B, m))
        assert rel_err(coord_G(pt, m), tr) <= 1e-10


def test_explicit_codings_agree(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        pt = sample_point(rng, n, sample_params(rng, 1, n).t)
        assert rel_err(coord_G2_explicit(pt), coord_G(pt, 2)) <= 1e-12
        assert rel_err(coord_G3_explicit(pt), coord_G(pt, 3)) <= 1e-12


def test_coord_G_permutation_symmetry(rng):
    pt = sample_point(rng, 4, 1.8 - 0.5j)
    perm = rng.permutation(4)
    for m in (1, 2, 3):
        assert rel_err(coord_G(pt, m), coord_G(permute(pt, perm), m)) <= 1e-12


def test_elementary_symmetric():
    assert elementary_symmetric([2.0, 3.0], 0) == 1
    assert elementary_symmetric([2.0, 3.0], 1) == 5
    assert elementary_symmetric([2.0, 3.0], 2) == 6
    assert elementary_symmetric([2.0, 3.0], 3) == 0


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_coord_H_matches_trace(rng, m):
    for _ in range(5):
        p, pt, d = random_point(rng, m, 3)
        A, B = np.diag(pt.x), cauchy_B(pt)
        h = coord_H(pt, p)
        assert rel_err(h, ab_reduction(A, B, p, "H", 1).value) <= 1e-10
        if m >= 2:
            assert rel_err(h, ham_trace(d, "H", 1) / ham_normalization(p, "H", 1)) <= 1e-10


def test_coord_H_two_block_form(rng):
    p = sample_params(rng, 2, 3)
    pt = sample_point(rng, 3, p.t)
    t0, t1 = p.t_partial
    expected = coord_G(pt, 2) - (1 / t0 + 1 / t1) * coord_G(pt, 1) + coord_G(pt, 0) / (t0 * t1)
    assert rel_err(coord_H(pt, p), expected) <= 1e-12


def test_coord_H_large_t_limit(rng):
    # H tends to G_{2,1} when both partial products grow, with t fixed by the chart
    pt = sample_point(rng, 2, 1.3 + 0.4j)
    for big in (1e4, 1e8):
        q0 = big
        p = QuiverParams(2, 2, (q0, pt.t / q0))
        # t_1 = t stays finite, so only compare the t_0 part of the limit
        expected = coord_G(pt, 2) - coord_G(pt, 1) / pt.t
        assert rel_err(coord_H(pt, p), expected) <= 10 / big


def test_coord_H_scalar_identity():
    p = QuiverParams(2, 1, (1.5, 2.0 + 0.5j))
    pt = DarbouxPoint([1.7], [0.6 + 0.1j], p.t)
    t0, t1 = p.t_partial
    x, s = pt.x[0], pt.sigma[0]
    assert np.isclose(coord_H(pt, p), (s - 1 / t0) * (s - 1 / t1) / x)


def test_dual_hams_scalar():
    p = QuiverParams(2, 1, (1.5, 2.0))
    dp = DualPoint([1.3], [0.7], p.t)
    h = dual_coord_hams(dp, p, j=3)
    assert np.isclose(h.E1, 0.7)
    assert np.isclose(h.F, 1.3**3)
    assert np.isclose(h.H1, (1.3 - 1 / 1.5) * (1.3 - 1 / 3.0) / 0.7)
    assert np.isclose(dual_coord_hams(dp, p, m=0).H1, 1 / 0.7)


@pytest.mark.parametrize("m", [2, 3])
def test_dual_hams_match_traces(rng, m):
    for _ in range(5):
        p = sample_params(rng, m, 3)
        dp = sample_dual_point(rng, 3, p.t)
        d = build_dual_cyclic_point(dp, p)
        for j in (1, 2):
            h = dual_coord_hams(dp, p, j=j)
            assert rel_err(h.F, ham_trace(d, "F", j) / ham_normalization(p, "F", j)) <= 1e-9
        assert rel_err(h.E1, ham_trace(d, "E", 1) / m) <= 1e-9
        assert rel_err(h.H1, ham_trace(d, "H", 1) / ham_normalization(p, "H", 1)) <= 1e-9


@pytest.mark.parametrize("m", [1, 2, 3])
def test_families_are_gauge_invariant(rng, m):
    n = 3
    p, _, d = random_point(rng, m, n)
    g = [np.eye(n) + 0.3 * random_matrix(rng, n) for _ in range(m)]
    dg = apply_gauge(d, g[0] if m == 1 else g)
    for fam in "EFGH":
        for j in (1, 2):
            assert rel_err(ham_trace(d, fam, j), ham_trace(dg, fam, j)) <= 1e-9
