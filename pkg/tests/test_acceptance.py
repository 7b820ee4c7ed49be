"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed
even without ``-s``.
"""

import json
import math
import time

import numpy as np
import pytest

from cheegerlab import extrinsic as ex
from cheegerlab import iso_comparison as ic
from cheegerlab import model_space as ms
from cheegerlab.cli import main as cli_main
from cheegerlab.surfaces import generate_surface

Z = ic.BoundingFunction.zero()


def flat_space():
    return ic.construct_W(2, ms.SpaceForm(0.0), Z)


def hyp_space():
    return ic.construct_W(2, ms.SpaceForm(-1.0), Z)


def report(capsys, k, ok, detail, seconds):
    with capsys.disabled():
        print(f"\n[criterion {k}] {'PASS' if ok else 'FAIL'} ({seconds:.1f}s) {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def plane10():
    return generate_surface("plane", 10.0)


@pytest.fixture(scope="module")
def h2_12():
    return generate_surface("h2-in-h3", 12.0)


# 1 -------------------------------------------------------------------------


def test_criterion_1_space_form_sandwich(capsys):
    lines, ok, worst_time = [], True, 0.0
    for m, b in [(2, -1.0), (3, -1.0), (2, -4.0)]:
        t0 = time.perf_counter()
        s = ic.construct_W(m, ms.SpaceForm(b), Z)
        up = ic.cheeger_upper_value(s, 40.0)
        lo = ic.cheeger_lower_value(s, 40.0)
        dt = time.perf_counter() - t0
        worst_time = max(worst_time, dt)
        target = (m - 1) * math.sqrt(-b)
        good = (up.value is not None and lo.value is not None and abs(up.value - target) <= 1e-6
                and abs(lo.value - target) <= 1e-6 and dt < 1.0)
        ok &= good
        lines.append(f"(m={m},b={b:g}) upper={up.value!r} lower={lo.value!r} target={target:g} {dt:.2f}s")
    report(capsys, 1, ok, "; ".join(lines), worst_time)


# 2 -------------------------------------------------------------------------


def test_criterion_2_balance_examples(capsys):
    t0 = time.perf_counter()
    grid = ms.log_grid(1e-3, 50.0, 1000)
    cases = [
        ("w_-1, h=1.5, m=2", ic.construct_W(2, ms.SpaceForm(-1.0), ic.BoundingFunction.constant(1.5)), (True, False)),
        ("exp(r^2)+r-1, h=0, m=2", ic.construct_W(2, ms.analytic_profile("exp-r2"), Z), (False, True)),
        ("w_0, h=0, m=2", ic.construct_W(2, ms.SpaceForm(0.0), Z), (True, True)),
    ]
    ok, lines = True, []
    for name, s, expected in cases:
        v = ic.check_balance(s, grid)
        got = (v.balanced_above, v.balanced_below)
        good = got == expected
        if expected[0] is False:
            w = v.witness_above
            good &= w is not None and w["r"] >= w["first_violation_r"] > 0
            name += f" witness r={w['r']:.4g} >= r0={w['first_violation_r']:.4g}" if w else ""
        ok &= good
        lines.append(f"{name}: above={got[0]} below={got[1]}")
    dt = time.perf_counter() - t0
    ok &= dt < 5.0
    report(capsys, 2, ok, "; ".join(lines), dt)


# 3 -------------------------------------------------------------------------


def _fixture(rng, i):
    wkind = ["form", "form", "exp", "tab"][i % 4]
    if wkind == "form":
        w = ms.SpaceForm(-rng.uniform(0, 4))
    elif wkind == "exp":
        w = ms.analytic_profile("exp-r2")
    else:
        r = np.linspace(0, 60, 6001)
        k = rng.uniform(0.5, 2)
        w = ms.TabulatedWarping(r, np.sinh(k * r) / k)
    hkind = ["constant", "hab", "tab", "hab", "constant"][i % 5]
    if hkind == "constant":
        h = ic.BoundingFunction.constant(rng.uniform(-1, 2))
    elif hkind == "hab":
        b = -rng.uniform(0, 2)
        h = ic.BoundingFunction.hab(b - rng.uniform(0.1, 3), b)
    else:
        r = np.linspace(0, 60, 601)
        h = ic.BoundingFunction.tabulated(r, rng.uniform(0, 1) * np.tanh(r))
    return int(rng.integers(2, 5)), w, h


def test_criterion_3_construction_crosscheck(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(31)
    worst, kinds = 0.0, set()
    for i in range(10):
        m, w, h = _fixture(rng, i)
        kinds.add(h.kind)
        s = ic.construct_W(m, w, h, R=50.0)
        grid = ms.log_grid(1e-3, 49.0, 400)
        rel = np.abs(np.expm1(s.alternate.log_w(grid) - s.W.log_w(grid)))
        worst = max(worst, float(rel.max()), s.crosscheck_error)
    w = ms.SpaceForm(-2.0)
    zero_same = ic.construct_W(3, w, Z).W is w
    ok = worst < 1e-7 and "hab" in kinds and zero_same
    report(capsys, 3, ok, f"max rel closed-form vs ODE {worst:.2e} over kinds {sorted(kinds)}; "
                          f"h=0 returns w itself: {zero_same}", time.perf_counter() - t0)


# 4 -------------------------------------------------------------------------


def test_criterion_4_isoperimetry_on_meshes(capsys, plane10, h2_12):
    t0 = time.perf_counter()
    p = ex.compute_profile(plane10, flat_space(), ex.default_t_grid(plane10))
    f_err = float(np.max(np.abs(p.f - 1)))
    m_err = float(np.max(np.abs(p.ratio - 2 / p.t) / (2 / p.t)))
    dt_plane = time.perf_counter() - t0
    t1 = time.perf_counter()
    q = ex.compute_profile(h2_12, hyp_space(), ex.default_t_grid(h2_12))
    ref = np.sinh(q.t) / (np.cosh(q.t) - 1)
    h_err = float(np.max(np.abs(q.ratio - ref) / ref))
    dt_h2 = time.perf_counter() - t1
    ok = f_err < 1e-3 and m_err < 1e-3 and h_err < 1e-2 and dt_plane < 60 and dt_h2 < 60
    report(capsys, 4, ok,
           f"plane ({plane10.n_faces} faces): max|f-1|={f_err:.2e}, max rel margin={m_err:.2e} ({dt_plane:.1f}s); "
           f"H2 ({h2_12.n_faces} faces): max rel margin={h_err:.2e} ({dt_h2:.1f}s)",
           time.perf_counter() - t0)


# 5 -------------------------------------------------------------------------


def test_criterion_5_catenoid(capsys):
    t0 = time.perf_counter()
    space = flat_space()
    estimates = {}
    for t_max in (20.0, 35.0, 50.0):
        M = generate_surface("catenoid", t_max)
        t = ex.default_t_grid(M, n=200, t_min=1.5)
        p = ex.compute_profile(M, space, t)
        rep = ex.cheeger_estimate(M, space, t, profile=p)
        estimates[t_max] = rep.upper_estimate_from_exhaustion
        if t_max == 50.0:
            sup_f = float(np.max(p.f))
            last = p.t >= p.t[-1] - 10.0
            f_inc = float(p.f[last][-1] - p.f[last][0])
        del M
    e = [estimates[k] for k in (20.0, 35.0, 50.0)]
    dt = time.perf_counter() - t0
    ok = (e[2] < 0.1 and e[0] > e[1] > e[2] and math.isfinite(sup_f) and 0 <= f_inc < 1e-2 and dt < 120)
    report(capsys, 5, ok, f"estimates t=20/35/50: {e[0]:.5f} > {e[1]:.5f} > {e[2]:.5f}; sup f={sup_f:.5f}; "
                          f"f increment over last decade={f_inc:.2e}", dt)


# 6 -------------------------------------------------------------------------


def test_criterion_6_hyperbolic_plane_cheeger(capsys, h2_12):
    t0 = time.perf_counter()
    t = ex.default_t_grid(h2_12)
    rep = ex.cheeger_estimate(h2_12, hyp_space(), t)
    est, lower = rep.upper_estimate_from_exhaustion, rep.model_lower_bound.value
    dt = time.perf_counter() - t0
    ok = abs(est - 1) <= 0.02 and lower is not None and est >= lower - 0.02 and rep.sandwich_verdict and dt < 120
    report(capsys, 6, ok, f"estimate={est:.6f} model lower={lower!r} sandwich={rep.sandwich_verdict}", dt)


# 7 -------------------------------------------------------------------------


def test_criterion_7_monotonicity_and_refinement(capsys):
    t0 = time.perf_counter()
    cases = [("plane", 10.0, 0.0, None), ("h2-in-h3", 12.0, -1.0, None), ("catenoid", 20.0, 0.0, 40),
             ("helicoid", 10.0, 0.0, None)]
    ok, lines = True, []
    for kind, t_max, b, n_rings in cases:
        space = ic.construct_W(2, ms.SpaceForm(b), Z)
        viol = []
        for refine in (0, 1):
            M = generate_surface(kind, t_max, n_theta=1024, n_rings=n_rings, refine=refine)
            t_min = 1.5 if kind == "catenoid" else 0.05 * t_max
            p = ex.compute_profile(M, space, np.linspace(t_min, t_max * (1 - 1e-9), 100))
            r = ex.monotonicity_report(p)
            viol.append((r["f_violation"], r["F_violation"], p.eps_mesh))
            del M
        good = True
        for j in (0, 1):  # f then F
            v0, v1 = viol[0][j], viol[1][j]
            good &= v0 <= viol[0][2] and v1 <= viol[1][2]
            good &= (v0 == 0.0 and v1 == 0.0) or v1 * 1.5 <= v0
        ok &= good
        lines.append(f"{kind}: f {viol[0][0]:.1e}->{viol[1][0]:.1e}, F {viol[0][1]:.1e}->{viol[1][1]:.1e}, "
                     f"eps {viol[0][2]:.1e}->{viol[1][2]:.1e}")
    report(capsys, 7, ok, "; ".join(lines), time.perf_counter() - t0)


# 8 -------------------------------------------------------------------------


def test_criterion_8_discrete_laplacian(capsys, plane10, h2_12):
    t0 = time.perf_counter()
    ok, lines = True, []
    for name, M, space in (("plane", plane10, flat_space()), ("H2", h2_12, hyp_space())):
        r = ex.discrete_laplacian_check(M, space)
        good = r["violation_fraction"] <= 0.05 and r["max_relative_residual"] < 0.05
        ok &= good
        lines.append(f"{name}: {r['vertices']} vertices, violations {r['violation_fraction']:.2%}, "
                     f"residual median {r['median_relative_residual']:.1e} max {r['max_relative_residual']:.1e}")
    report(capsys, 8, ok, "; ".join(lines), time.perf_counter() - t0)


# 9 -------------------------------------------------------------------------


def _run_all(tmp, threads, monkeypatch):
    monkeypatch.setenv("CHEEGERLAB_THREADS", threads)
    d = tmp / f"threads{threads}"
    d.mkdir(exist_ok=True)
    spec = tmp / "hyp.json"
    assert cli_main(["model", "--b", "-1", "--m", "2", "--rmax", "10", "-o", str(d / "model.csv")]) == 0
    assert cli_main(["constellation", str(spec), "-o", str(d / "constellation.json")]) == 0
    assert cli_main(["gen", "--kind", "h2-in-h3", "--tmax", "12", "--n-theta", "1024", "-o", str(d / "h2.off")]) == 0
    assert cli_main(["analyze", str(d / "h2.off"), "-c", str(spec), "--laplacian", "--divergence-t", "6",
                     "--out-dir", str(d / "analysis")]) == 0
    names = ["model.csv", "constellation.json", "h2.off", "analysis/profile.csv", "analysis/report.json"]
    return {n: (d / n).read_bytes() for n in names}


def test_criterion_9_determinism(capsys, tmp_path, monkeypatch):
    t0 = time.perf_counter()
    (tmp_path / "hyp.json").write_text(json.dumps({"m": 2, "ambient": {"b": -1}, "h": {"kind": "zero"}}))
    runs = [_run_all(tmp_path, th, monkeypatch) for th in ("1", "4", "1")]
    same = {n: runs[0][n] == runs[1][n] == runs[2][n] for n in runs[0]}
    capsys.readouterr()
    report(capsys, 9, all(same.values()), "byte-identical across threads 1/4/1: " +
           ", ".join(f"{n}={v}" for n, v in same.items()), time.perf_counter() - t0)
