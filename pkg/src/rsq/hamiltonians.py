"""The four commuting families E, F, G, H: matrix traces and chart formulas."""
from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from .darboux import DarbouxPoint, DualPoint, upsilon_products
from .errors import SingularMatrix
from .linalg import mat_inv
from .quiver import QuiverData, QuiverParams

__all__ = [
    "FAMILIES",
    "ham_trace",
    "ham_normalization",
    "ab_reduction",
    "ABValue",
    "coord_G",
    "coord_G2_explicit",
    "coord_G3_explicit",
    "coord_H",
    "elementary_symmetric",
    "DualHams",
    "dual_coord_hams",
]

FAMILIES = ("E", "F", "G", "H")


def _power(m: np.ndarray, k: int) -> np.ndarray:
    if k >= 0:
        return np.linalg.matrix_power(m, k)
    return np.linalg.matrix_power(mat_inv(m), -k)


def ham_trace(d: QuiverData, family: str, j: int) -> complex:
    """E = tr X^{jm}, F = tr (1+XY)^j, G = tr (Y+X^{-1})^{jm}, H = tr Y^{jm} on block operators."""
    m = d.m
    if family == "E":
        if j < 1:
            raise ValueError("E needs j >= 1")
        return complex(np.trace(_power(d.X_block, j * m)))
    if family == "F":
        xy = np.eye(m * d.n) + d.X_block @ d.Y_block
        return complex(np.trace(_power(xy, j)))
    if family == "G":
        return complex(np.trace(_power(d.Z_block, j * m)))
    if family == "H":
        if j < 1:
            raise ValueError("H needs j >= 1")
        return complex(np.trace(_power(d.Y_block, j * m)))
    raise ValueError(f"unknown family {family!r}")


def ham_normalization(p: QuiverParams, family: str, j: int) -> complex:
    """Constant c with ham_trace = c * (the (A, B) expression of ``ab_reduction``)."""
    ts = p.t_partial
    if family == "E":
        return complex(p.m)
    if family == "F":
        return complex(np.sum(ts**j))
    if family in ("G", "H"):
        return complex(p.m * np.prod(ts) ** j)
    raise ValueError(f"unknown family {family!r}")


class ABValue(NamedTuple):
    value: complex
    normalization: complex

    @property
    def scaled(self) -> complex:
        return self.value * self.normalization


def ab_reduction(A: np.ndarray, B: np.ndarray, p: QuiverParams, family: str, j: int) -> ABValue:
    """Family value written through the tadpole pair (A, B).

    E: tr A^j, F: tr B^j, G: tr (A^{-1}B^m)^j, H: tr (A^{-1} prod_s (B - t_s^{-1}))^j,
    each multiplied by ``normalization`` to give the trace on the cycle.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    if family == "E":
        val = np.trace(_power(A, j))
    elif family == "F":
        val = np.trace(_power(B, j))
    elif family == "G":
        val = np.trace(_power(mat_inv(A) @ np.linalg.matrix_power(B, p.m), j))
    elif family == "H":
        P = np.eye(n, dtype=complex)
        for ts in p.t_partial:
            P = P @ (B - np.eye(n) / ts)
        val = np.trace(_power(mat_inv(A) @ P, j))
    else:
        raise ValueError(f"unknown family {family!r}")
    return ABValue(complex(val), ham_normalization(p, family, j))


def _kernel(x: np.ndarray, t: complex) -> np.ndarray:
    # K_ab = (t-1)/(t - x_a/x_b); K_aa = 1
    return (t - 1) / (t - x[:, None] / x[None, :])


def coord_G(pt: DarbouxPoint, m: int) -> complex:
    """G_{m,1} as the explicit sum over index tuples (j_0..j_{m-1}), cyclic j_m = j_0."""
    if m < 0:
        raise ValueError("m must be >= 0")
    x, sigma, t = pt.x, pt.sigma, pt.t
    if m == 0:
        return complex(np.sum(1.0 / x))
    K = _kernel(x, t)
    w = sigma * upsilon_products(x, t)
    total = 0j
    for js in itertools.product(range(pt.n), repeat=m):
        term = 1.0 / x[js[0]]
        for s in range(m):
            term *= w[js[s]] * K[js[s], js[(s + 1) % m]]
        total += term
    return complex(total)


def _ups(x: np.ndarray, t: complex) -> np.ndarray:
    r = x[:, None] / x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (1 - t * r) / (1 - r)
    np.fill_diagonal(u, 1.0)
    return u


def coord_G2_explicit(pt: DarbouxPoint) -> complex:
    """Two-line closed form of G_{2,1}: diagonal terms plus pair terms."""
    x, s, t, n = pt.x, pt.sigma, pt.t, pt.n
    ups = _ups(x, t)
    total = 0j
    for i in range(n):
        total += s[i] ** 2 / x[i] * np.prod(ups[i]) ** 2
    for i in range(n):
        for j in range(i + 1, n):
            rest = [a for a in range(n) if a not in (i, j)]
            prod = np.prod(ups[i, rest]) * np.prod(ups[j, rest])
            num = (t - 1) ** 2 * (1 / x[i] + 1 / x[j])
            den = (1 - x[i] / x[j]) * (1 - x[j] / x[i])
            total += s[i] * s[j] * num / den * prod
    return complex(total)


def coord_G3_explicit(pt: DarbouxPoint) -> complex:
    """Closed form of G_{3,1} grouped by the multiset of indices."""
    x, s, t, n = pt.x, pt.sigma, pt.t, pt.n
    U = upsilon_products(x, t)
    total = 0j
    for i in range(n):
        total += s[i] ** 3 / x[i] * U[i] ** 3
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            num = (t - 1) ** 2 * (1 / x[i] + 2 / x[j])
            den = (t - x[i] / x[j]) * (t - x[j] / x[i])
            total += s[i] * s[j] ** 2 * num / den * U[i] * U[j] ** 2
    for i, j, k in itertools.permutations(range(n), 3):
        den = (t - x[i] / x[j]) * (t - x[j] / x[k]) * (t - x[k] / x[i])
        total += s[i] * s[j] * s[k] * (t - 1) ** 3 / x[i] / den * U[i] * U[j] * U[k]
    return complex(total)


def elementary_symmetric(vals, k: int) -> complex:
    """e_k of the given values (e_0 = 1)."""
    coeffs = np.array([1.0 + 0j])
    for v in vals:
        coeffs = np.convolve(coeffs, [1.0, v])
    return complex(coeffs[k]) if 0 <= k < coeffs.size else 0j


def coord_H(pt: DarbouxPoint, p: QuiverParams) -> complex:
    """H_{m,1} = tr A^{-1} prod_s (B - t_s^{-1}) expanded in G_{l,1}, l = 0..m."""
    if abs(pt.t - p.t) > 1e-12 * max(1.0, abs(p.t)):
        raise ValueError("chart parameter must equal the product of the q_i")
    inv_t = 1.0 / p.t_partial
    m = p.m
    return complex(
        sum((-1) ** (m - l) * elementary_symmetric(inv_t, m - l) * coord_G(pt, l) for l in range(m + 1))
    )


class DualHams(NamedTuple):
    E1: complex
    F: complex
    H1: complex


def dual_coord_hams(dp: DualPoint, p: QuiverParams, m: int | None = None, j: int = 1) -> DualHams:
    """E_{m,1}, F_{m,j}, H_{m,1} in the chart where B = diag(w).

    ``m`` selects how many of the t_k enter the H product (defaults to p.m; 0 gives the empty product).
    """
    m = p.m if m is None else m
    w, u, t = dp.pos, dp.mom, p.t
    e1 = np.sum(upsilon_products(w, 1.0 / t) * u)
    fj = np.sum(w**j)
    prod = np.ones_like(w)
    for tk in p.t_partial[:m]:
        prod = prod * (w - 1.0 / tk)
    h1 = np.sum(upsilon_products(w, t) * prod / u)
    return DualHams(complex(e1), complex(fj), complex(h1))


def safe_ham_trace(d: QuiverData, family: str, j: int) -> complex:
    """ham_trace returning NaN instead of raising when a power needs a singular inverse."""
    try:
        return ham_trace(d, family, j)
    except SingularMatrix:
        return complex("nan")
