"""Acceptance criteria at their stated tolerances and runtime budgets.

Each test prints one line: ``ACCEPT <k> PASS|FAIL <summary> (<seconds> s)``.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from rsq.cli import main
from rsq.darboux import cauchy_B
from rsq.flows import FlowSpec, flow_H, flow_time_scale, ode_residual, trajectory
from rsq.hamiltonians import ab_reduction, coord_G, coord_G2_explicit, coord_H, ham_normalization, ham_trace
from rsq.ncalg import cyclic, run_suite, tadpole
from rsq.poisson import (
    ChartFunction,
    canonical_bracket,
    coordinate,
    expected_nu_bracket,
    nu_function,
    trace_function,
    verify_duality,
    verify_involution,
    verify_xi_poisson,
)
from rsq.quantum import classical_symbol, op_Dtilde21, quasi_invariance_check, quasi_invariant_function
from rsq.quiver import verify_moment
from rsq.sampling import sample_params, sample_point

from .conftest import random_point, rel_err


def _report(capsys, k: int, ok: bool, summary: str, seconds: float, budget: float | None = None) -> None:
    within = budget is None or seconds < budget
    status = "PASS" if ok and within else "FAIL"
    limit = f" / budget {budget:g} s" if budget is not None else ""
    with capsys.disabled():
        print(f"\nACCEPT {k:>2} {status} {summary} ({seconds:.2f} s{limit})")


def test_acceptance_01_moment_construction(capsys):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst, failing = 0.0, []
    for m in range(1, 5):
        for n in range(1, 7):
            for _ in range(50):
                p, _, d = random_point(rng, m, n)
                res = verify_moment(d, p)
                worst = max(worst, max(res.relative().values()))
                if res.max_residual > 1e-10:
                    failing.append((m, n, res.max_residual))
    dt = time.perf_counter() - start
    ok = not failing
    _report(capsys, 1, ok, f"moment residuals over 1200 points, worst relative {worst:.2e}", dt, 30)
    assert ok, failing[:5]
    assert dt < 30


def test_acceptance_02_coordinate_hamiltonians(capsys):
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst_g = worst_h = worst_code = 0.0
    for m in (1, 2, 3):
        for n in range(1, 6):
            for _ in range(30):
                p, pt, d = random_point(rng, m, n)
                A, B = np.diag(pt.x), cauchy_B(pt)
                tr = np.trace(np.linalg.inv(A) @ np.linalg.matrix_power(B, m))
                worst_g = max(worst_g, rel_err(coord_G(pt, m), tr))
                if m == 1:
                    ref = ab_reduction(A, B, p, "H", 1).value
                else:
                    ref = ham_trace(d, "H", 1) / ham_normalization(p, "H", 1)
                worst_h = max(worst_h, rel_err(coord_H(pt, p), ref))
                worst_code = max(worst_code, rel_err(coord_G2_explicit(pt), coord_G(pt, 2)))
    dt = time.perf_counter() - start
    ok = worst_g <= 1e-10 and worst_h <= 1e-10 and worst_code <= 1e-12
    _report(capsys, 2, ok, f"G {worst_g:.1e}, H {worst_h:.1e}, G2 codings {worst_code:.1e}", dt, 30)
    assert ok
    assert dt < 30


def _h_family(p, j):
    return ChartFunction(lambda pt: ab_reduction(np.diag(pt.x), cauchy_B(pt), p, "H", j).value, f"H{j}")


def test_acceptance_03_involutivity(capsys):
    rng = np.random.default_rng(103)
    start = time.perf_counter()
    worst = {}
    for fam in ("E", "F", "G", "H"):
        # 7 + 7 + 6 = 20 points per family, one quiver length per n
        for m, n, count in ((1, 2, 7), (2, 3, 7), (3, 4, 6)):
            p = sample_params(rng, m, n)
            pts = [sample_point(rng, n, p.t) for _ in range(count)]
            if fam == "H":
                family = [_h_family(p, j) for j in (1, 2, 3)]
            else:
                family = [trace_function(fam, m, j) for j in (1, 2, 3)]
            res = verify_involution(family, pts, tol=1e-6)
            worst[fam] = max(worst.get(fam, 0.0), res.max_residual)
    dt = time.perf_counter() - start
    ok = all(v <= 1e-6 for v in worst.values())
    _report(capsys, 3, ok, "involution " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()), dt, 120)
    assert ok, worst
    assert dt < 120


def test_acceptance_04_chart_brackets(capsys):
    rng = np.random.default_rng(104)
    start = time.perf_counter()
    worst_nu = worst_xs = 0.0
    for n in (2, 3, 4):
        for _ in range(5):
            pt = sample_point(rng, n, sample_params(rng, 1, n).t)
            for i in range(n):
                for j in range(n):
                    v = canonical_bracket(coordinate("x", i), coordinate("sigma", j), pt).value
                    want = pt.x[i] * pt.sigma[j] if i == j else 0.0
                    worst_xs = max(worst_xs, rel_err(v, want))
                    if i != j:
                        nv = canonical_bracket(nu_function(i), nu_function(j), pt).value
                        worst_nu = max(worst_nu, rel_err(nv, expected_nu_bracket(pt, i, j)))
    dt = time.perf_counter() - start
    ok = worst_nu <= 1e-6 and worst_xs <= 1e-8
    _report(capsys, 4, ok, f"{{nu,nu}} {worst_nu:.1e}, {{x,sigma}} {worst_xs:.1e}", dt)
    assert ok


def test_acceptance_05_xi_poisson(capsys):
    rng = np.random.default_rng(105)
    start = time.perf_counter()
    worst: dict[str, float] = {}
    for m in (2, 3):
        for n in (1, 2, 3):
            p = sample_params(rng, m, n)
            pts = [sample_point(rng, n, p.t) for _ in range(2)]
            res = verify_xi_poisson(p, pts, tol=1e-6)
            for k, v in res.values.items():
                worst[k] = max(worst.get(k, 0.0), v)
    dt = time.perf_counter() - start
    ok = worst["{f,g}"] <= 1e-6 and worst["{f,f}"] <= 1e-6 and worst["h_identity"] <= 1e-9
    ok = ok and worst["pullback_f"] <= 1e-9 and worst["pullback_g"] <= 1e-9
    _report(capsys, 5, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()), dt)
    assert ok, worst


@pytest.mark.parametrize("n,tol", [(2, 1e-5), (3, 1e-4)])
def test_acceptance_06_duality(capsys, n, tol):
    rng = np.random.default_rng(106 + n)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(5):
        pt = sample_point(rng, n, sample_params(rng, 1, n).t)
        worst = max(worst, verify_duality(pt, tol=tol).max_residual)
    dt = time.perf_counter() - start
    ok = worst <= tol
    _report(capsys, 6, ok, f"duality n={n}: worst {worst:.1e} (tol {tol:g})", dt)
    assert ok


def test_acceptance_07_flows(capsys):
    rng = np.random.default_rng(107)
    start = time.perf_counter()
    drift = resid = semi = 0.0
    ratios = []
    for m in (1, 2, 3):
        for n in (2, 4):
            p, _, d = random_point(rng, m, n)
            for k in (m, 2 * m):
                sc = flow_time_scale(d, k)
                traj = trajectory(d, FlowSpec("H", {k: 1.0}), np.linspace(0, 2 * sc, 100), params=p)
                drift = max(drift, float(np.max(traj.drift())))
                resid = max(resid, float(np.max(traj.residuals)))
                a = flow_H(flow_H(d, k, 0.7 * sc), k, 0.8 * sc).X_block
                b = flow_H(d, k, 1.5 * sc).X_block
                semi = max(semi, float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b)))))
                ratios.append(ode_residual(d, k, 1e-4) / ode_residual(d, k, 5e-5))
    dt = time.perf_counter() - start
    ok = drift <= 1e-8 and resid <= 1e-8 and semi <= 1e-9 and all(1.8 <= r <= 2.2 for r in ratios)
    summary = f"drift {drift:.1e}, moment {resid:.1e}, semigroup {semi:.1e}, ODE ratio [{min(ratios):.3f}, {max(ratios):.3f}]"
    _report(capsys, 7, ok, summary, dt)
    assert ok


def test_acceptance_08_symbolic(capsys):
    start = time.perf_counter()
    results = []
    for sig, deg in ((tadpole(), 4), (cyclic(2), 5), (cyclic(3), 7)):
        for name in ("commuting-powers", "trace-brackets", "flow-lemma"):
            results.append(run_suite(name, sig, deg))
    dt = time.perf_counter() - start
    failed = [f"{r.quiver}/{r.suite}/{c.name}" for r in results for c in r.checks if not c.ok]
    n_checks = sum(len(r.checks) for r in results)
    ok = not failed
    _report(capsys, 8, ok, f"{n_checks} exact identities, {len(failed)} failed", dt, 300)
    assert ok, failed
    assert dt < 300


def test_acceptance_09_quantum(capsys):
    rng = np.random.default_rng(109)
    start = time.perf_counter()
    worst_sym = 0.0
    for k in range(30):
        n = 1 + k % 4
        t = complex(np.exp(rng.uniform(-0.3, 0.3) + 1j * rng.uniform(0.5, 2.5)))
        pt = sample_point(rng, n, t)
        worst_sym = max(worst_sym, rel_err(classical_symbol(op_Dtilde21(n, 0.8 + 0.4j, t), pt), coord_G2_explicit(pt)))
    q = complex(np.exp(0.2 + 0.9j))
    qi, ctrl = [], []
    for m, n in ((1, 2), (1, 3), (2, 2), (2, 3)):
        f = quasi_invariant_function(n, m, q, rng)
        qi.append(quasi_invariance_check(op_Dtilde21(n, q, q ** (-m)), m, f, 20, rng=rng))
        ctrl.append(quasi_invariance_check(op_Dtilde21(n, q, 1.3 * q ** (-m)), m, f, 20, rng=rng))
    dt = time.perf_counter() - start
    worst_qi = max(r.max_residual for r in qi)
    ok = worst_sym <= 1e-10 and all(r.passed for r in qi) and not any(r.passed for r in ctrl)
    summary = (
        f"symbol {worst_sym:.1e}, quasi-invariance {worst_qi:.1e}, "
        f"control min residual {min(r.max_residual for r in ctrl):.1e} (expected fail)"
    )
    _report(capsys, 9, ok, summary, dt, 120)
    assert ok
    assert dt < 120


def test_acceptance_10_determinism(capsys, tmp_path):
    start = time.perf_counter()
    runs = [
        ["verify", "--seed", "42"],
        ["simulate", "--seed", "42", "--csv", "{dir}/traj.csv"],
        ["symbolic", "--quiver", "cyclic:2", "--suite", "all"],
        ["quantum", "--check", "quasi-invariance", "--n", "2", "--m", "2", "--seed", "42"],
    ]
    same = True
    for r, argv in enumerate(runs):
        texts = []
        for rep in range(2):
            d = tmp_path / f"run{r}_{rep}"
            d.mkdir()
            args = [a.format(dir=d) for a in argv] + ["--out", str(d / "report.json")]
            code = main(args)
            assert code == 0
            body = (d / "report.json").read_text().replace(str(d), "<dir>")
            if argv[0] == "simulate":
                body += (d / "traj.csv").read_text()
            texts.append(body)
        same = same and texts[0] == texts[1]
    dt = time.perf_counter() - start
    _report(capsys, 10, same, "repeated CLI runs byte-identical", dt)
    assert same
