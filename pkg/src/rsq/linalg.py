"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays ("CMatrix" in the docs). Every
function here is pure and returns fresh arrays.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg as sla

from .errors import MatrixOverflow, NonConvergence, SingularMatrix

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "cmat",
    "approx_eq",
    "max_norm",
    "mat_inv",
    "numerical_rank",
    "mat_exp",
    "mat_phi",
    "mat_phi_poly",
    "matrix_poly",
    "random_matrix",
]

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    """Combined absolute/relative tolerance: |a-b| <= abs + rel*max(|a|,|b|)."""

    abs: float = 1e-12
    rel: float = 1e-10

    def __post_init__(self) -> None:
        if self.abs < 0 or self.rel < 0:
            raise ValueError("tolerances must be non-negative")

    def bound(self, scale: float) -> float:
        return self.abs + self.rel * scale

    def close(self, a, b) -> bool:
        return approx_eq(a, b, self)


DEFAULT_TOL = Tolerance()


def cmat(data, *, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Build a finite complex 2-D matrix from nested sequences or arrays."""
    m = np.array(data, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(1, -1) if shape is None else m.reshape(shape)
    elif m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of dimension {m.ndim}")
    if shape is not None and m.shape != shape:
        raise ValueError(f"expected shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def max_norm(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def approx_eq(a, b, tol: Tolerance | float = DEFAULT_TOL) -> bool:
    """Entrywise comparison under the combined tolerance (symmetric in a, b)."""
    if not isinstance(tol, Tolerance):
        tol = Tolerance(abs=float(tol), rel=0.0)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    scale = max(max_norm(a), max_norm(b))
    return max_norm(a - b) <= tol.bound(scale)


def mat_inv(m: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix, refusing numerically singular input."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("mat_inv needs a square matrix")
    n = m.shape[0]
    if n == 0:
        return m.copy()
    scale = max_norm(m)
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(m, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < 1e-14 * scale:
        raise SingularMatrix("pivot below 1e-14 of the matrix scale")
    if np.linalg.cond(m) > 1.0 / (100.0 * EPS):
        raise SingularMatrix("condition number too large")
    return sla.lu_solve((lu, piv), np.eye(n, dtype=complex))


def numerical_rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    """Count singular values above ``tol.rel`` times the largest (and above ``tol.abs``)."""
    a = np.asarray(m, dtype=complex)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    smax = float(s[0])
    if smax <= tol.abs:
        return 0
    return int(np.sum(s > max(tol.rel * smax, tol.abs)))


def mat_exp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring via scipy)."""
    m = np.asarray(m, dtype=complex)
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = sla.expm(m)
        except FloatingPointError as exc:
            raise MatrixOverflow("matrix exponential overflowed") from exc
    if not np.all(np.isfinite(out)):
        raise MatrixOverflow("matrix exponential overflowed")
    return out


def matrix_poly(m: np.ndarray, coeffs: Mapping[int, complex]) -> np.ndarray:
    """Evaluate sum_k c_k M^k for non-negative integer keys."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    out = np.zeros((n, n), dtype=complex)
    if not coeffs:
        return out
    power = np.eye(n, dtype=complex)
    top = max(coeffs)
    for k in range(top + 1):
        if k:
            power = power @ m
        c = coeffs.get(k, 0)
        if c:
            out = out + c * power
    return out


def _expm1_over(u: np.ndarray) -> np.ndarray:
    """g(u) = (exp(-u) - 1)/u, accurate near u = 0 (complex u)."""
    u = np.asarray(u, dtype=complex)
    out = np.empty_like(u)
    small = np.abs(u) < 0.5
    big = ~small
    out[big] = (np.exp(-u[big]) - 1.0) / u[big]
    us = u[small]
    term = -np.ones_like(us)
    acc = term.copy()
    for k in range(2, 40):
        term = term * (-us) / k
        acc = acc + term
        if np.all(np.abs(term) <= EPS * np.abs(acc)):
            break
    out[small] = acc
    return out


def _check_poly(coeffs: Mapping[int, complex]) -> dict[int, complex]:
    clean = {int(k): complex(v) for k, v in coeffs.items() if v != 0}
    if any(k < 1 for k in clean):
        raise ValueError("flow polynomial exponents must be >= 1")
    return clean


def mat_phi_poly(
    m: np.ndarray, coeffs: Mapping[int, complex], *, cond_limit: float = 1e8
) -> np.ndarray:
    """phi(M) for phi(z) = (exp(-p(z)) - 1)/z with p(z) = sum_k c_k z^k, k >= 1.

    phi is entire, so the result is defined for singular M. Uses the
    eigendecomposition when the eigenvector matrix is well conditioned and an
    augmented-matrix exponential otherwise.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ValueError("mat_phi needs a square matrix")
    clean = _check_poly(coeffs)
    if not clean or n == 0:
        return np.zeros((n, n), dtype=complex)
    lam, s = np.linalg.eig(m)
    if np.all(np.isfinite(s)) and np.linalg.cond(s) <= cond_limit:
        p = sum(c * lam**k for k, c in clean.items())
        quot = sum(c * lam ** (k - 1) for k, c in clean.items())
        vals = _expm1_over(p) * quot
        return (s * vals) @ np.linalg.inv(s)
    return _phi_augmented(m, clean)


def _phi_augmented(m: np.ndarray, coeffs: dict[int, complex]) -> np.ndarray:
    # phi(M) = -Q(M) * int_0^1 exp(-s P(M)) ds with P = M Q; the integral is the
    # upper-right block of exp([[-P, I], [0, 0]]).
    n = m.shape[0]
    pm = matrix_poly(m, coeffs)
    qm = matrix_poly(m, {k - 1: c for k, c in coeffs.items()})
    big = np.zeros((2 * n, 2 * n), dtype=complex)
    big[:n, :n] = -pm
    big[:n, n:] = np.eye(n)
    integral = mat_exp(big)[:n, n:]
    out = -qm @ integral
    if not np.all(np.isfinite(out)):
        raise NonConvergence("phi evaluation produced non-finite values")
    return out


def mat_phi(m: np.ndarray, k: int, t: complex, *, cond_limit: float = 1e8) -> np.ndarray:
    """phi(M) for phi(z) = z^{-1}(exp(-t z^k) - 1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return mat_phi_poly(m, {k: t}, cond_limit=cond_limit)


def random_matrix(rng: np.random.Generator, n: int, cols: int | None = None) -> np.ndarray:
    """Complex Gaussian matrix, scaled so entries are O(1/sqrt(n))."""
    cols = n if cols is None else cols
    z = rng.standard_normal((n, cols)) + 1j * rng.standard_normal((n, cols))
    return z / math.sqrt(2 * max(n, 1))
