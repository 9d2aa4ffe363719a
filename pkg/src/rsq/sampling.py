"""Seeded random draws of regular parameters and chart points."""
from __future__ import annotations

import numpy as np

from .darboux import DarbouxPoint, DualPoint
from .quiver import QuiverParams

__all__ = ["rng_from", "sample_params", "sample_point", "sample_dual_point", "spawn_seeds"]


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent per-task seed sequences; stable for a given (seed, count)."""
    return np.random.SeedSequence(seed).spawn(count)


def _unit_log(rng: np.random.Generator, radius: float) -> complex:
    return complex(np.exp(rng.uniform(-radius, radius) + 1j * rng.uniform(-np.pi, np.pi)))


def sample_params(
    rng: np.random.Generator, m: int, n: int, *, margin: float = 1e-3, t_margin: float = 0.2
) -> QuiverParams:
    """Draw q_i = exp(u + i phi) until the parameters are comfortably regular."""
    for _ in range(10_000):
        q = [_unit_log(rng, 0.3) for _ in range(m)]
        p = QuiverParams(m, n, tuple(q))
        if abs(p.t - 1) < t_margin:
            continue
        if p.regularity_violations(rel=margin):
            continue
        return p
    raise RuntimeError("could not draw regular parameters")


def _spread_ok(x: np.ndarray, t: complex, margin: float) -> bool:
    r = x[:, None] / x[None, :]
    off = ~np.eye(x.size, dtype=bool)
    return bool(np.all(np.abs(1 - r[off]) >= margin) and np.all(np.abs(1 - t * r[off]) >= margin))


def _draw(rng, n, t, margin, radius):
    # Angles on a jittered grid keep the points spread around the circle, which
    # keeps the Cauchy matrices well conditioned.
    for _ in range(10_000):
        theta = 2 * np.pi * (np.arange(n) + rng.uniform(-0.25, 0.25, n)) / n
        theta = theta + rng.uniform(-np.pi, np.pi)
        x = np.exp(rng.uniform(-radius, radius, n) + 1j * theta)
        x = x[rng.permutation(n)]
        if _spread_ok(x, t, margin):
            return x
    raise RuntimeError("could not draw a regular point")


def sample_point(
    rng: np.random.Generator, n: int, t: complex, *, margin: float = 0.25, radius: float = 0.3
) -> DarbouxPoint:
    """Random (x, sigma) with |1 - x_i/x_j| and |1 - t x_i/x_j| at least ``margin``.

    Positions are spread on a jittered angular grid; moduli and momenta are
    log-uniform within ``radius``.
    """
    x = _draw(rng, n, t, margin, radius)
    sigma = np.array([_unit_log(rng, radius) for _ in range(n)])
    return DarbouxPoint(x, sigma, t)


def sample_dual_point(
    rng: np.random.Generator, n: int, t: complex, *, margin: float = 0.25, radius: float = 0.3
) -> DualPoint:
    pos = _draw(rng, n, 1.0 / t, margin, radius)
    mom = np.array([_unit_log(rng, radius) for _ in range(n)])
    return DualPoint(pos, mom, t)
