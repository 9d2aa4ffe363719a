"""Log-canonical charts: (x, sigma) -> matrix data, and the dual (z, theta) chart."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartMismatch, DegenerateSpectrum, RegularityViolation
from .linalg import mat_inv, max_norm
from .quiver import CyclicData, QuiverParams, TadpoleData, rank_one_factor, xi_lift

__all__ = [
    "HREG_TOL",
    "DarbouxPoint",
    "DualPoint",
    "check_hreg",
    "upsilon_products",
    "cauchy_matrix",
    "cauchy_B",
    "sigma_from_nu",
    "nu_from_sigma",
    "build_tadpole_point",
    "build_cyclic_point",
    "build_dual_tadpole_point",
    "build_dual_cyclic_point",
    "dual_chart_extract",
    "swap",
    "permute",
]

HREG_TOL = 1e-10


def _vec(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("coordinates must be finite")
    return a


def check_hreg(x: np.ndarray, t: complex, tol: float = HREG_TOL) -> None:
    """Raise RegularityViolation unless x_i != 0, x_i != x_j, x_i != t x_j."""
    x = np.asarray(x, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(x)))) if x.size else 1.0
    if np.any(np.abs(x) <= tol * scale):
        raise RegularityViolation("a coordinate vanishes")
    n = x.size
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            s = max(abs(x[i]), abs(x[j]))
            if abs(x[i] - x[j]) <= tol * s:
                raise RegularityViolation(f"x_{i} = x_{j}")
            if abs(x[i] - t * x[j]) <= tol * max(s, abs(t) * s):
                raise RegularityViolation(f"x_{i} = t x_{j}")


@dataclass(frozen=True)
class DarbouxPoint:
    """Chart point (x, sigma) with Cauchy parameter t."""

    x: np.ndarray
    sigma: np.ndarray
    t: complex
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        x = _vec(self.x)
        s = _vec(self.sigma)
        if x.shape != s.shape:
            raise ValueError("x and sigma must have the same length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "t", complex(self.t))
        if self.check:
            check_hreg(x, self.t)
            if np.any(s == 0):
                raise RegularityViolation("sigma must be nonzero")

    @property
    def n(self) -> int:
        return self.x.size

    def replace(self, x=None, sigma=None, t=None, check: bool = False) -> "DarbouxPoint":
        return DarbouxPoint(
            self.x if x is None else x,
            self.sigma if sigma is None else sigma,
            self.t if t is None else t,
            check=check,
        )


@dataclass(frozen=True)
class DualPoint:
    """Dual chart point: positions z (or w), momenta theta (or u).

    ``t`` is the parameter of the original chart; the Cauchy form in this chart
    uses t^{-1}. ``residual`` records the fit quality when extracted from data.
    """

    pos: np.ndarray
    mom: np.ndarray
    t: complex
    residual: float = field(default=0.0, compare=False)
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        pos = _vec(self.pos)
        mom = _vec(self.mom)
        if pos.shape != mom.shape:
            raise ValueError("pos and mom must have the same length")
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "mom", mom)
        object.__setattr__(self, "t", complex(self.t))
        if self.check:
            check_hreg(pos, 1.0 / self.t)
            if np.any(mom == 0):
                raise RegularityViolation("momenta must be nonzero")

    @property
    def n(self) -> int:
        return self.pos.size


def upsilon_products(x: np.ndarray, t: complex) -> np.ndarray:
    """U_i = prod_{a != i} (1 - t x_i/x_a)/(1 - x_i/x_a)."""
    x = np.asarray(x, dtype=complex)
    r = x[:, None] / x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (1 - t * r) / (1 - r)
    np.fill_diagonal(f, 1.0)
    return np.prod(f, axis=1)


def cauchy_matrix(x, sigma, t: complex) -> np.ndarray:
    """M_ij = sigma_j (t-1)/(t - x_i/x_j) prod_{k != j}(1 - t x_j/x_k)/(1 - x_j/x_k)."""
    x = np.asarray(x, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    c = (t - 1) / (t - x[:, None] / x[None, :])
    return c * (sigma * upsilon_products(x, t))[None, :]


def cauchy_B(pt: DarbouxPoint) -> np.ndarray:
    return cauchy_matrix(pt.x, pt.sigma, pt.t)


def _ratio_products(x: np.ndarray, t: complex) -> np.ndarray:
    # prod_{j != i} (1 - x_i/x_j)/(1 - t x_i/x_j)
    return 1.0 / upsilon_products(x, t)


def sigma_from_nu(x, nu, t: complex) -> np.ndarray:
    x = _vec(x)
    check_hreg(x, t)
    return _vec(nu) * _ratio_products(x, t)


def nu_from_sigma(x, sigma, t: complex) -> np.ndarray:
    x = _vec(x)
    check_hreg(x, t)
    return _vec(sigma) * upsilon_products(x, t)


def _tadpole_from_XZ(X: np.ndarray, Z: np.ndarray, q0: complex) -> TadpoleData:
    n = X.shape[0]
    eye = np.eye(n)
    Y = Z - mat_inv(X)
    # q0 (Id+YX)(Id+XY)^{-1} - Id is the rank-one matrix VW
    R = q0 * (eye + Y @ X) @ mat_inv(eye + X @ Y) - eye
    V, W = rank_one_factor(R)
    return TadpoleData(X, Y, V, W)


def _same_t(a: complex, b: complex) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def build_tadpole_point(pt: DarbouxPoint, q0: complex | None = None) -> TadpoleData:
    """X = diag(x), Z = Cauchy matrix, Y = Z - X^{-1}, framing from the rank-one defect."""
    q0 = pt.t if q0 is None else complex(q0)
    if not _same_t(q0, pt.t):
        raise ValueError("chart parameter must equal q0")
    return _tadpole_from_XZ(np.diag(pt.x), cauchy_B(pt), q0)


def build_cyclic_point(pt: DarbouxPoint, p: QuiverParams) -> CyclicData:
    """A = diag(x), B = Cauchy matrix at t = p.t, lifted to the cycle."""
    if not _same_t(pt.t, p.t):
        raise ValueError("chart parameter must equal the product of the q_i")
    return xi_lift(np.diag(pt.x), cauchy_B(pt), p)


def build_dual_tadpole_point(dp: DualPoint) -> TadpoleData:
    """Z = diag(z), X = Cauchy matrix in (z, theta) with parameter t^{-1}."""
    X = cauchy_matrix(dp.pos, dp.mom, 1.0 / dp.t)
    return _tadpole_from_XZ(X, np.diag(dp.pos), dp.t)


def build_dual_cyclic_point(dp: DualPoint, p: QuiverParams) -> CyclicData:
    """B = diag(w), A = Cauchy matrix in (w, u) with parameter t^{-1}."""
    if not _same_t(dp.t, p.t):
        raise ValueError("chart parameter must equal the product of the q_i")
    A = cauchy_matrix(dp.pos, dp.mom, 1.0 / dp.t)
    return xi_lift(A, np.diag(dp.pos), p)


def _canonical_order(vals: np.ndarray) -> np.ndarray:
    return np.lexsort((vals.imag, vals.real))


def dual_chart_extract(d: TadpoleData, q0: complex, tol: float = 1e-8) -> DualPoint:
    """Read (z, theta) off a tadpole point by diagonalizing Z."""
    q0 = complex(q0)
    Z = d.Z
    n = d.n
    z, S = np.linalg.eig(Z)
    if n > 1:
        diff = np.abs(z[:, None] - z[None, :])
        spread = float(np.max(diff))
        gap = float(np.min(diff + np.diag(np.full(n, np.inf))))
        if gap < 1e-8 * max(spread, 1e-300):
            raise DegenerateSpectrum(f"eigenvalue gap {gap:.3e} too small")
    order = _canonical_order(z)
    z = z[order]
    S = S[:, order]
    Xp = mat_inv(S) @ d.X @ S
    s = 1.0 / q0
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.diag(Xp) / upsilon_products(z, s)
        C = cauchy_matrix(z, theta, s)
        # diagonal gauge from the first column: C_i0 = g_i Xp_i0 / g_0
        g = C[:, 0] / Xp[:, 0]
        g = g / g[0]
        fitted = (g[:, None] * Xp) / g[None, :]
        residual = max_norm(fitted - C) / max(1.0, max_norm(C))
    residual = residual if np.isfinite(residual) else float("inf")
    if not residual <= tol:
        raise ChartMismatch(f"X is not of Cauchy form in the Z eigenbasis (residual {residual:.3e})")
    return DualPoint(z, theta, q0, residual=residual, check=False)


def swap(dp: DualPoint) -> DarbouxPoint:
    """View dual coordinates as an ordinary chart point at parameter t^{-1}."""
    return DarbouxPoint(dp.pos, dp.mom, 1.0 / dp.t, check=False)


def permute(pt: DarbouxPoint, perm) -> DarbouxPoint:
    perm = np.asarray(perm)
    return DarbouxPoint(pt.x[perm], pt.sigma[perm], pt.t, check=False)
