"""Closed-form H- and G-flows and trajectory extraction.

With p(z) = sum_k c_k z^k (every k a multiple of m) the H-flow at unit time is

    cycle:   X -> exp(-p(Y)) X + phi(Y)
    tadpole: X -> X exp(-p(Y)) + phi(Y)

with phi(z) = (exp(-p(z)) - 1)/z, and Y, V, W fixed. The G-flow is
X -> exp(-p(Z)) X (cycle) or X exp(-p(Z)) (tadpole) with Z fixed. The two
orderings differ because the tadpole relation composes (Id+XY)(Id+YX)^{-1}
while the cyclic relations compose (Id+YX)^{-1}(Id+XY).
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BadMultiple
from .hamiltonians import safe_ham_trace
from .linalg import mat_exp, mat_inv, mat_phi_poly, matrix_poly, max_norm
from .quiver import CyclicData, QuiverData, QuiverParams, TadpoleData, verify_moment

__all__ = [
    "flow_H",
    "flow_G",
    "flow_multi",
    "ode_residual",
    "FlowSpec",
    "Trajectory",
    "trajectory",
    "track_eigenvalues",
    "trajectory_csv",
    "flow_time_scale",
]

TRACKING_GAP = 1e-10


def _check_multiples(d: QuiverData, coeffs: Mapping[int, complex]) -> dict[int, complex]:
    clean = {int(k): complex(v) for k, v in coeffs.items()}
    for k in clean:
        if k < 1 or k % d.m:
            raise BadMultiple(f"exponent {k} is not a positive multiple of m = {d.m}")
    return {k: v for k, v in clean.items() if v != 0}


def _split_blocks(d: CyclicData, big: np.ndarray) -> tuple[np.ndarray, ...]:
    m, n = d.m, d.n
    return tuple(big[s * n : (s + 1) * n, ((s + 1) % m) * n : ((s + 1) % m + 1) * n].copy() for s in range(m))


def flow_multi(d: QuiverData, coefficients: Mapping[int, complex], which: str = "H") -> QuiverData:
    """Superposed flow exp(-sum_k t_k ad_k) applied in closed form."""
    coeffs = _check_multiples(d, coefficients)
    if not coeffs:
        return d
    if which == "H":
        Y = d.Y_block
        e = mat_exp(-matrix_poly(Y, coeffs))
        phi = mat_phi_poly(Y, coeffs)
        X0 = d.X_block
        X = (X0 @ e if isinstance(d, TadpoleData) else e @ X0) + phi
        if isinstance(d, TadpoleData):
            return d.with_X(X)
        return CyclicData(_split_blocks(d, X), d.Y, d.V, d.W)
    if which == "G":
        Z = d.Z_block
        e = mat_exp(-matrix_poly(Z, coeffs))
        X0 = d.X_block
        if isinstance(d, TadpoleData):
            X = X0 @ e
            return TadpoleData(X, Z - mat_inv(X), d.V, d.W, check=False)
        X = e @ X0
        xs = _split_blocks(d, X)
        zs = d.Z
        return CyclicData.from_XZ(xs, zs, d.V, d.W)
    raise ValueError(f"unknown flow family {which!r}")


def flow_time_scale(d: QuiverData, k: int, which: str = "H") -> float:
    """1/max(1, spectral radius of Y^k (or Z^k)).

    exp(-t Y^k) has entries of size exp(|t| rho); times beyond a few multiples
    of this scale produce matrices too large for relations to be checked in
    double precision, even though the flow itself is exact.
    """
    M = d.Y_block if which == "H" else d.Z_block
    rho = float(np.max(np.abs(np.linalg.eigvals(np.linalg.matrix_power(M, k)))))
    return 1.0 / max(1.0, rho)


def flow_H(d: QuiverData, k: int, t: complex) -> QuiverData:
    return flow_multi(d, {k: t}, "H")


def flow_G(d: QuiverData, k: int, t: complex) -> QuiverData:
    return flow_multi(d, {k: t}, "G")


def ode_residual(d: QuiverData, k: int, h: float) -> float:
    """max |(X(h) - X(0))/h - v(X(0))| for the H_k vector field v = -Y^{k-1} - Y^k X (cycle) or -Y^{k-1} - X Y^k (tadpole)."""
    if h <= 0:
        raise ValueError("h must be positive")
    X0 = d.X_block
    Y = d.Y_block
    Xh = flow_H(d, k, h).X_block
    yk1 = np.linalg.matrix_power(Y, k - 1)
    yk = yk1 @ Y
    drift = X0 @ yk if isinstance(d, TadpoleData) else yk @ X0
    return max_norm((Xh - X0) / h + yk1 + drift)


@dataclass(frozen=True)
class FlowSpec:
    """Family ('H' or 'G') and weights w_k; at time s the flow uses t_k = s w_k."""

    family: str = "H"
    weights: Mapping[int, complex] = field(default_factory=lambda: {1: 1.0})

    def at(self, s: complex) -> dict[int, complex]:
        return {k: s * w for k, w in self.weights.items()}


@dataclass
class Trajectory:
    times: np.ndarray
    points: list
    positions: np.ndarray  # shape (len(times), n), tracked
    conserved: np.ndarray  # shape (len(times), len(ham_labels))
    ham_labels: list[str]
    residuals: np.ndarray  # max moment residual per time (nan without params)
    ambiguities: list[float]

    def drift(self) -> np.ndarray:
        """max_t |H(t) - H(0)| / max(1, |H(0)|) per conserved column."""
        if self.conserved.size == 0:
            return np.zeros(0)
        base = self.conserved[0]
        return np.max(np.abs(self.conserved - base), axis=0) / np.maximum(1.0, np.abs(base))


def track_eigenvalues(frames: Sequence[np.ndarray], gap: float = TRACKING_GAP) -> tuple[np.ndarray, list[int]]:
    """Match eigenvalues between consecutive frames by minimal total displacement.

    The first frame is sorted by (Re, Im). Returns the tracked array and the
    frame indices where two curves came within ``gap`` of each other.
    """
    out = []
    ambiguous: list[int] = []
    prev = None
    for idx, vals in enumerate(frames):
        vals = np.asarray(vals, dtype=complex)
        if prev is None:
            cur = vals[np.lexsort((vals.imag, vals.real))]
        else:
            cost = np.abs(prev[:, None] - vals[None, :])
            _, cols = linear_sum_assignment(cost)
            cur = vals[cols]
        if cur.size > 1:
            diff = np.abs(cur[:, None] - cur[None, :]) + np.diag(np.full(cur.size, np.inf))
            if np.min(diff) < gap:
                ambiguous.append(idx)
        out.append(cur)
        prev = cur
    return np.array(out), ambiguous


def _positions(d: QuiverData) -> np.ndarray:
    return np.linalg.eigvals(d.holonomy())


def trajectory(
    d: QuiverData,
    spec: FlowSpec,
    grid: Iterable[float],
    *,
    params: QuiverParams | None = None,
    hams: Sequence[tuple[str, int]] = (("H", 1), ("H", 2), ("H", 3)),
    executor: Executor | None = None,
) -> Trajectory:
    """Evaluate the closed-form flow at every grid time (no stepping)."""
    times = np.asarray(list(grid), dtype=float)
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise ValueError("time grid must be non-decreasing")

    def one(s: float):
        pt = flow_multi(d, spec.at(s), spec.family)
        vals = [safe_ham_trace(pt, fam, j) for fam, j in hams]
        res = verify_moment(pt, params).max_residual if params is not None else float("nan")
        return pt, _positions(pt), vals, res

    results = list(executor.map(one, times)) if executor is not None else [one(s) for s in times]
    positions, amb = track_eigenvalues([r[1] for r in results])
    return Trajectory(
        times=times,
        points=[r[0] for r in results],
        positions=positions,
        conserved=np.array([r[2] for r in results], dtype=complex).reshape(len(times), len(hams)),
        ham_labels=[f"{fam}{j}" for fam, j in hams],
        residuals=np.array([r[3] for r in results], dtype=float),
        ambiguities=[float(times[i]) for i in amb],
    )


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text: time, re/im of each position, then re/im of each conserved value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    npos = traj.positions.shape[1] if traj.positions.ndim == 2 else 0
    header = ["time"]
    for i in range(npos):
        header += [f"re_pos_{i + 1}", f"im_pos_{i + 1}"]
    for lab in traj.ham_labels:
        header += [f"re_{lab}", f"im_{lab}"]
    w.writerow(header)
    for r, s in enumerate(traj.times):
        row = [_fmt(s)]
        for v in traj.positions[r]:
            row += [_fmt(v.real), _fmt(v.imag)]
        for v in traj.conserved[r]:
            row += [_fmt(v.real), _fmt(v.imag)]
        w.writerow(row)
    return buf.getvalue()
