from __future__ import annotations

import numpy as np
import pytest

from rsq.darboux import build_cyclic_point, build_tadpole_point
from rsq.sampling import sample_params, sample_point


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_point(rng, m: int, n: int):
    """Regular parameters, a chart point and the matrix data built from it."""
    p = sample_params(rng, m, n)
    pt = sample_point(rng, n, p.t)
    d = build_tadpole_point(pt, p.t) if m == 1 else build_cyclic_point(pt, p)
    return p, pt, d


def rel_err(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)), np.max(np.abs(b))))
