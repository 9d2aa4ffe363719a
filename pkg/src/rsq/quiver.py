"""Representations of the framed cyclic quiver (m >= 2) and the tadpole (m = 1).

Block convention: X_s maps block s+1 to block s and Y_s maps block s to block
s+1, so the big operator X has X_s in block position (s, s+1 mod m) and Y has
Y_s in position (s+1 mod m, s). The framing vectors V, W live at vertex 0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import NotRankOne, RegularityViolation, SingularFactor, SingularMatrix
from .linalg import DEFAULT_TOL, Tolerance, cmat, mat_inv, max_norm, numerical_rank

__all__ = [
    "QuiverParams",
    "TadpoleData",
    "CyclicData",
    "Residuals",
    "RANK_TOL",
    "verify_tadpole_moment",
    "verify_cyclic_moment",
    "verify_moment",
    "xi_lift",
    "rank_one_factor",
    "gauge_fingerprint",
    "fingerprint_words",
    "apply_gauge",
    "expected_dimension",
]

# Rank decisions tolerate more roundoff than equality checks: the rank-one
# defect is assembled from products of inverses.
RANK_TOL = Tolerance(abs=1e-12, rel=1e-8)


@dataclass(frozen=True)
class QuiverParams:
    """Cycle length m, rank n and the parameters q_0..q_{m-1}."""

    m: int
    n: int
    q: tuple[complex, ...]

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be >= 1")
        q = tuple(complex(v) for v in self.q)
        if len(q) != self.m:
            raise ValueError(f"expected {self.m} parameters q, got {len(q)}")
        if any(v == 0 for v in q):
            raise ValueError("all q_i must be nonzero")
        object.__setattr__(self, "q", q)

    @property
    def t_partial(self) -> np.ndarray:
        """t_s = q_0 q_1 ... q_s for s = 0..m-1."""
        return np.cumprod(np.array(self.q, dtype=complex))

    @property
    def t(self) -> complex:
        return complex(self.t_partial[-1])

    @property
    def q_inf(self) -> complex:
        return self.t ** (-self.n)

    def regularity_violations(self, p_max: int | None = None, rel: float = 1e-10) -> list[str]:
        """List the conditions that fail; empty means regular."""
        p_max = 2 * self.n if p_max is None else p_max
        t = self.t
        bad: list[str] = []

        def near(a: complex, b: complex) -> bool:
            return abs(a - b) <= rel * max(abs(a), abs(b), 1.0)

        for p in range(1, p_max + 1):
            if near(t**p, 1.0):
                bad.append(f"t^{p} = 1")
        q = self.q
        for i in range(1, self.m + 1):
            for j in range(i, self.m + 1):
                prod = complex(np.prod(q[i:j])) if j > i else 1.0 + 0j
                for p in range(-p_max, p_max + 1):
                    if i == j and p == 0:
                        continue
                    if near(prod, t**p):
                        bad.append(f"q_{i}..q_{j - 1} = t^{p}")
        return bad

    def is_regular(self, p_max: int | None = None) -> bool:
        return not self.regularity_violations(p_max)

    def require_regular(self) -> None:
        bad = self.regularity_violations()
        if bad:
            raise RegularityViolation("irregular parameters: " + ", ".join(bad))


def _col(v, n: int) -> np.ndarray:
    return cmat(v, shape=(n, 1)) if np.asarray(v).size == n else cmat(v)


def _row(w, n: int) -> np.ndarray:
    return cmat(np.asarray(w).reshape(1, -1), shape=(1, n))


@dataclass(frozen=True)
class TadpoleData:
    """A point (X, Y, V, W) for the tadpole quiver."""

    X: np.ndarray
    Y: np.ndarray
    V: np.ndarray
    W: np.ndarray
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        X = cmat(self.X)
        n = X.shape[0]
        if X.shape != (n, n):
            raise ValueError("X must be square")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", cmat(self.Y, shape=(n, n)))
        object.__setattr__(self, "V", _col(self.V, n))
        object.__setattr__(self, "W", _row(self.W, n))
        if self.check:
            eye = np.eye(n)
            for name, f in (
                ("Id+XY", eye + self.X @ self.Y),
                ("Id+YX", eye + self.Y @ self.X),
                ("Id+VW", eye + self.V @ self.W),
                ("1+WV", 1.0 + self.W @ self.V),
            ):
                try:
                    mat_inv(f)
                except SingularMatrix as exc:
                    raise SingularFactor(f"{name} is not invertible") from exc

    @property
    def m(self) -> int:
        return 1

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def Z(self) -> np.ndarray:
        return self.Y + mat_inv(self.X)

    @property
    def X_block(self) -> np.ndarray:
        return self.X

    @property
    def Y_block(self) -> np.ndarray:
        return self.Y

    @property
    def Z_block(self) -> np.ndarray:
        return self.Z

    @property
    def V_block(self) -> np.ndarray:
        return self.V

    @property
    def W_block(self) -> np.ndarray:
        return self.W

    def holonomy(self) -> np.ndarray:
        return self.X

    def with_X(self, X: np.ndarray) -> "TadpoleData":
        return TadpoleData(X, self.Y, self.V, self.W, check=False)


@dataclass(frozen=True)
class CyclicData:
    """A point of the framed cyclic quiver, stored as (X_s, Y_s, V, W).

    Z_s = Y_s + X_s^{-1} is derived; storing Y keeps points with singular X_s
    (reached by the H-flows) representable.
    """

    X: tuple[np.ndarray, ...]
    Y: tuple[np.ndarray, ...]
    V: np.ndarray
    W: np.ndarray

    def __post_init__(self) -> None:
        xs = tuple(cmat(x) for x in self.X)
        if len(xs) < 2:
            raise ValueError("cyclic data needs m >= 2 blocks")
        n = xs[0].shape[0]
        if any(x.shape != (n, n) for x in xs):
            raise ValueError("all X_s must be n x n")
        ys = tuple(cmat(y, shape=(n, n)) for y in self.Y)
        if len(ys) != len(xs):
            raise ValueError("X and Y must have the same number of blocks")
        object.__setattr__(self, "X", xs)
        object.__setattr__(self, "Y", ys)
        object.__setattr__(self, "V", _col(self.V, n))
        object.__setattr__(self, "W", _row(self.W, n))

    @classmethod
    def from_XZ(cls, X: Sequence, Z: Sequence, V, W) -> "CyclicData":
        xs = [cmat(x) for x in X]
        ys = [cmat(z) - mat_inv(x) for x, z in zip(xs, Z)]
        return cls(tuple(xs), tuple(ys), V, W)

    @property
    def m(self) -> int:
        return len(self.X)

    @property
    def n(self) -> int:
        return self.X[0].shape[0]

    @property
    def Z(self) -> tuple[np.ndarray, ...]:
        return tuple(y + mat_inv(x) for x, y in zip(self.X, self.Y))

    def _assemble(self, blocks: Sequence[np.ndarray], shift: int) -> np.ndarray:
        m, n = self.m, self.n
        out = np.zeros((m * n, m * n), dtype=complex)
        for s, b in enumerate(blocks):
            r, c = (s, (s + 1) % m) if shift == 1 else ((s + 1) % m, s)
            out[r * n : (r + 1) * n, c * n : (c + 1) * n] = b
        return out

    @property
    def X_block(self) -> np.ndarray:
        return self._assemble(self.X, 1)

    @property
    def Y_block(self) -> np.ndarray:
        return self._assemble(self.Y, -1)

    @property
    def Z_block(self) -> np.ndarray:
        return self._assemble(self.Z, -1)

    @property
    def V_block(self) -> np.ndarray:
        out = np.zeros((self.m * self.n, 1), dtype=complex)
        out[: self.n] = self.V
        return out

    @property
    def W_block(self) -> np.ndarray:
        out = np.zeros((1, self.m * self.n), dtype=complex)
        out[:, : self.n] = self.W
        return out

    def holonomy(self) -> np.ndarray:
        """X_0 X_1 ... X_{m-1}, the block of X^m at vertex 0."""
        out = np.eye(self.n, dtype=complex)
        for x in self.X:
            out = out @ x
        return out

    def with_X(self, X: Sequence[np.ndarray]) -> "CyclicData":
        return CyclicData(tuple(X), self.Y, self.V, self.W)


QuiverData = Union[TadpoleData, CyclicData]


@dataclass(frozen=True)
class Residuals:
    """Per-relation absolute max-norm residuals with the scale each is judged at."""

    values: dict[str, float]
    scales: dict[str, float]
    tol: Tolerance = DEFAULT_TOL
    worst: dict[str, object] = field(default_factory=dict)  # where each maximum was attained

    @property
    def max_residual(self) -> float:
        return max(self.values.values(), default=0.0)

    @property
    def failing(self) -> list[str]:
        return [k for k, v in self.values.items() if not v <= self.tol.bound(self.scales.get(k, 1.0))]

    @property
    def passed(self) -> bool:
        return not self.failing

    def relative(self) -> dict[str, float]:
        return {k: v / max(1.0, self.scales.get(k, 1.0)) for k, v in self.values.items()}


def _inv_factor(m: np.ndarray, name: str) -> np.ndarray:
    try:
        return mat_inv(m)
    except SingularMatrix as exc:
        raise SingularFactor(f"{name} is not invertible") from exc


def _record(values, scales, name, lhs, rhs) -> None:
    values[name] = max_norm(np.asarray(lhs) - np.asarray(rhs))
    scales[name] = max(max_norm(lhs), max_norm(rhs))


def verify_tadpole_moment(d: TadpoleData, q0: complex, tol: Tolerance = DEFAULT_TOL) -> Residuals:
    n = d.n
    eye = np.eye(n)
    values: dict[str, float] = {}
    scales: dict[str, float] = {}
    lhs = (eye + d.X @ d.Y) @ _inv_factor(eye + d.Y @ d.X, "Id+YX") @ (eye + d.V @ d.W)
    _record(values, scales, "moment", lhs, q0 * eye)
    wv = complex((d.W @ d.V)[0, 0])
    if 1.0 + wv == 0:
        raise SingularFactor("1+WV vanishes")
    _record(values, scales, "framing", np.array([1.0 / (1.0 + wv)]), np.array([q0 ** (-n)]))
    return Residuals(values, scales, tol)


def verify_cyclic_moment(d: CyclicData, p: QuiverParams, tol: Tolerance = DEFAULT_TOL) -> Residuals:
    """Residuals of the vertex relations, written without inverting X_s.

    (Z_{i-1}X_{i-1})^{-1} X_i Z_i is evaluated as (Id+Y_{i-1}X_{i-1})^{-1}(Id+X_iY_i).
    """
    if p.m != d.m or p.n != d.n:
        raise ValueError("parameters do not match the data shape")
    m, n = d.m, d.n
    eye = np.eye(n)
    values: dict[str, float] = {}
    scales: dict[str, float] = {}
    xz = [eye + d.X[s] @ d.Y[s] for s in range(m)]
    zx = [eye + d.Y[s] @ d.X[s] for s in range(m)]
    for i in range(1, m):
        lhs = _inv_factor(zx[i - 1], f"Z_{i - 1}X_{i - 1}") @ xz[i]
        _record(values, scales, f"vertex_{i}", lhs, p.q[i] * eye)
    lhs0 = _inv_factor(zx[m - 1], f"Z_{m - 1}X_{m - 1}") @ xz[0] @ (eye + d.V @ d.W)
    _record(values, scales, "vertex_0", lhs0, p.q[0] * eye)
    wv = complex((d.W @ d.V)[0, 0])
    if 1.0 + wv == 0:
        raise SingularFactor("1+WV vanishes")
    _record(values, scales, "framing", np.array([1.0 / (1.0 + wv)]), np.array([p.t ** (-n)]))
    return Residuals(values, scales, tol)


def verify_moment(d: QuiverData, p: QuiverParams, tol: Tolerance = DEFAULT_TOL) -> Residuals:
    if isinstance(d, TadpoleData):
        return verify_tadpole_moment(d, p.q[0], tol)
    return verify_cyclic_moment(d, p, tol)


def rank_one_factor(R, tol: Tolerance = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Factor a rank-one matrix as V W.

    V is the dominant left singular vector rotated so its largest entry is real
    positive; W carries the singular value.
    """
    R = np.asarray(R, dtype=complex)
    r = numerical_rank(R, tol)
    if r != 1:
        raise NotRankOne(f"expected rank one, found numerical rank {r}")
    u, s, vh = np.linalg.svd(R)
    col = u[:, 0]
    k = int(np.argmax(np.abs(col)))
    phase = col[k] / abs(col[k])
    V = (col / phase).reshape(-1, 1)
    W = (phase * s[0] * vh[0]).reshape(1, -1)
    return V, W


def xi_lift(A, B, p: QuiverParams, tol: Tolerance = RANK_TOL) -> CyclicData:
    """Lift a tadpole pair (A, B) to the cyclic quiver with m = p.m >= 2 blocks."""
    if p.m < 2:
        raise ValueError("xi_lift needs m >= 2")
    A = cmat(A)
    B = cmat(B)
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n) or n != p.n:
        raise ValueError("A and B must be n x n with n = p.n")
    Ai = mat_inv(A)
    mat_inv(B)
    eye = np.eye(n)
    # The rank-one defect t (ABA^{-1}B^{-1})^{-1} - Id, conjugated by BA, is
    # exactly the V W needed at vertex 0; factoring it in that frame avoids
    # amplifying roundoff by cond(BA).
    R = p.t * np.linalg.solve(A @ B, B @ A) - eye
    V, W = rank_one_factor(R, tol)
    ts = p.t_partial
    xs = [eye.astype(complex) for _ in range(p.m - 1)] + [A]
    ys = [ts[s] * B - eye for s in range(p.m - 1)] + [Ai @ (p.t * B - eye)]
    return CyclicData(tuple(xs), tuple(ys), V, W)


def fingerprint_words(max_len: int) -> list[str]:
    """Canonical enumeration: by length, then lexicographic with X < Z."""
    words: list[str] = []
    for length in range(1, max_len + 1):
        words.extend("".join(w) for w in itertools.product("XZ", repeat=length))
    return words


def gauge_fingerprint(d: QuiverData, max_len: int) -> list[complex]:
    """Gauge-invariant scalars of a point.

    First tr(w) for every word w in {X, Z} of length 1..max_len (order from
    ``fingerprint_words``), then W w V for the empty word and the same words.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    mats = {"X": d.X_block, "Z": d.Z_block}
    dim = mats["X"].shape[0]
    prods: dict[str, np.ndarray] = {"": np.eye(dim, dtype=complex)}
    for w in fingerprint_words(max_len):
        prods[w] = prods[w[:-1]] @ mats[w[-1]]
    words = fingerprint_words(max_len)
    traces = [complex(np.trace(prods[w])) for w in words]
    Vb, Wb = d.V_block, d.W_block
    framed = [complex((Wb @ prods[w] @ Vb)[0, 0]) for w in [""] + words]
    return traces + framed


def apply_gauge(d: QuiverData, g) -> QuiverData:
    """Act by g (one matrix for the tadpole, m matrices for the cycle)."""
    if isinstance(d, TadpoleData):
        g = cmat(g)
        gi = mat_inv(g)
        return TadpoleData(g @ d.X @ gi, g @ d.Y @ gi, g @ d.V, d.W @ gi, check=False)
    m = d.m
    gs = [cmat(x) for x in g]
    if len(gs) != m:
        raise ValueError("need one gauge matrix per vertex")
    gis = [mat_inv(x) for x in gs]
    xs = [gs[i] @ d.X[i] @ gis[(i + 1) % m] for i in range(m)]
    ys = [gs[(i + 1) % m] @ d.Y[i] @ gis[i] for i in range(m)]
    return CyclicData(tuple(xs), tuple(ys), gs[0] @ d.V, d.W @ gis[0])


def expected_dimension(p: QuiverParams) -> int:
    """2 p(alpha) for the framed quiver at dimension vector (1, n, ..., n)."""
    n, m = p.n, p.m
    # vertices: framing vertex with dim 1, cycle vertices with dim n
    dims = [1] + [n] * m
    arrows = [(0, 1)] + [(1 + s, 1 + (s + 1) % m) for s in range(m)]
    pairing = sum(dims[a] * dims[b] for a, b in arrows)
    quad = sum(v * v for v in dims)
    return 2 * (1 + pairing - quad)
