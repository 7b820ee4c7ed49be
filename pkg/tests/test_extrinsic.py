import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from cheegerlab import extrinsic as ex
from cheegerlab import iso_comparison as ic
from cheegerlab import model_space as ms
from cheegerlab.errors import MeshError
from cheegerlab.surfaces import generate_surface


def space_for(b, m=2):
    return ic.construct_W(m, ms.SpaceForm(b), ic.BoundingFunction.zero())


@pytest.fixture(scope="module")
def plane():
    return generate_surface("plane", 6.0, n_theta=1024)


@pytest.fixture(scope="module")
def h2():
    return generate_surface("h2-in-h3", 6.0, n_theta=1024)


@pytest.fixture(scope="module")
def catenoid():
    return generate_surface("catenoid", 12.0, n_theta=1024, n_rings=60)


def catenoid_V(t):
    return brentq(lambda v: math.cosh(v) ** 2 + v * v - t * t, 0, math.acosh(t))


def test_plane_profile(plane):
    t = ex.default_t_grid(plane, n=40)
    p = ex.compute_profile(plane, space_for(0.0), t)
    np.testing.assert_allclose(p.vol_D, math.pi * t**2, rtol=1e-5)
    np.testing.assert_allclose(p.vol_bdry, 2 * math.pi * t, rtol=1e-5)
    np.testing.assert_allclose(p.f, 1.0, rtol=1e-5)
    assert np.max(np.abs(p.F)) < 1e-4
    assert ex.verify_isoperimetric_inequality(p)["pass"]
    assert ex.coarea_report(p)["max_relative_mismatch"] < 1e-4


def test_h2_profile(h2):
    t = ex.default_t_grid(h2, n=40)
    p = ex.compute_profile(h2, space_for(-1.0), t)
    np.testing.assert_allclose(p.vol_D, 2 * math.pi * (np.cosh(t) - 1), rtol=1e-4)
    np.testing.assert_allclose(p.ratio, np.sinh(t) / (np.cosh(t) - 1), rtol=1e-4)
    np.testing.assert_allclose(p.ref_sphere_ball, np.sinh(t) / (np.cosh(t) - 1), rtol=1e-10)
    assert p.balanced_below is True


def test_catenoid_volume_oracle(catenoid):
    t = np.linspace(2.0, 11.5, 12)
    p = ex.compute_profile(catenoid, space_for(0.0), t)
    ref = np.array([2 * math.pi * V + math.pi * math.sinh(2 * V) for V in map(catenoid_V, t)])
    np.testing.assert_allclose(p.vol_D, ref, rtol=1e-4)
    # f increases towards 2 (two flat ends)
    assert np.all(np.diff(p.f) > 0) and p.f[-1] < 2


def test_closed_sublevel_is_continuous(plane):
    # t equal to a ring radius: the ring belongs to D_t
    clip = ex._Clipper(plane)
    ring = 6.0 * 5 / 15
    v = clip.volume(ring)
    assert abs(clip.volume(np.nextafter(ring, 0)) - v) < 1e-9 * v
    assert abs(clip.volume(np.nextafter(ring, 10)) - v) < 1e-9 * v


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.1, 5.9), b=st.floats(0.1, 5.9))
def test_volume_monotone_in_t(plane, a, b):
    clip = ex._Clipper(plane)
    lo, hi = sorted((a, b))
    assert clip.volume(lo) <= clip.volume(hi) + 1e-12
    assert clip.volume(a) == pytest.approx(math.pi * a * a, rel=1e-4)


def test_profile_errors(plane):
    with pytest.raises(MeshError):
        ex.compute_profile(plane, space_for(0.0), [1.0, 2.0, 6.5])
    with pytest.raises(ValueError):
        ex.compute_profile(plane, space_for(0.0), [1.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        ex.compute_profile(plane, space_for(0.0, m=3), [1.0, 2.0, 3.0])
    with pytest.raises(MeshError):
        ex.divergence_audit(plane, space_for(0.0), 7.0)
    with pytest.raises(MeshError):
        ex.divergence_audit(plane, space_for(0.0), 5.9)  # D_t reaches the boundary ring
    with pytest.raises(MeshError):
        ex.divergence_audit(plane, space_for(0.0), 1e-3)


def _interior(P):
    return P.interior_mask & (P.r > 2 * P.h_max)


def test_laplacian_plane_and_h2(plane, h2):
    lap, _ = ex.cotan_laplacian(plane)
    sel = _interior(plane)
    np.testing.assert_allclose(lap[sel], 1 / plane.r[sel], rtol=1e-3)
    lap, _ = ex.cotan_laplacian(h2)
    sel = _interior(h2)
    rel = np.abs(lap[sel] * np.tanh(h2.r[sel]) - 1)
    assert np.median(rel) < 3e-3
    assert np.isnan(lap[h2.boundary_mask]).all()


def test_laplacian_catenoid_oracle(catenoid):
    # minimal surface in R^3: Delta r = (2 - |grad r|^2) / r
    P = catenoid
    lap, _ = ex.cotan_laplacian(P)
    sel = _interior(P)
    v = P.vertices[sel, 2]
    r = P.r[sel]
    grad2 = (np.cosh(v) * np.sinh(v) + v) ** 2 / (r**2 * np.cosh(v) ** 2)
    ref = (2 - grad2) / r
    rel = np.abs(lap[sel] - ref) / ref
    assert np.median(rel) < 1e-2
    rep = ex.discrete_laplacian_check(P, space_for(0.0))
    assert rep["pass"] and rep["violations"] == 0


def test_laplacian_of_linear_function_vanishes(plane):
    lap, _ = ex.cotan_laplacian(plane, plane.vertices[:, 0] - 2 * plane.vertices[:, 1])
    assert np.nanmax(np.abs(lap)) < 1e-8


@pytest.mark.parametrize("kind", ["plane", "h2"])
def test_divergence_audit(request, kind):
    P = request.getfixturevalue(kind)
    rep = ex.divergence_audit(P, space_for(0.0 if kind == "plane" else -1.0), 3.0)
    assert rep["pass"]
    assert rep["boundary_length"] == pytest.approx(2 * math.pi * (3.0 if kind == "plane" else math.sinh(3.0)), rel=1e-4)


def test_cheeger_estimate_h2(h2):
    t = ex.default_t_grid(h2, n=30)
    rep = ex.cheeger_estimate(h2, space_for(-1.0), t)
    assert rep.sandwich_verdict
    assert rep.model_lower_bound.value == pytest.approx(1.0, abs=1e-6)
    assert rep.upper_estimate_from_exhaustion > 1.0


def test_csv_roundtrip_and_determinism(plane, monkeypatch):
    t = ex.default_t_grid(plane, n=20)
    monkeypatch.setenv("CHEEGERLAB_THREADS", "1")
    a = ex.profile_csv(ex.compute_profile(plane, space_for(0.0), t))
    monkeypatch.setenv("CHEEGERLAB_THREADS", "4")
    p = ex.compute_profile(plane, space_for(0.0), t)
    b = ex.profile_csv(p)
    assert a == b
    lines = b.splitlines()
    assert lines[0] == ",".join(ex.PROFILE_COLUMNS)
    back = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    np.testing.assert_array_equal(back[:, 1], p.vol_D)
    np.testing.assert_array_equal(back[:, 7], p.margin)


def test_json_report(plane, tmp_path):
    import json

    t = ex.default_t_grid(plane, n=10)
    rep = ex.cheeger_estimate(plane, space_for(0.0), t)
    path = tmp_path / "r.json"
    ex.write_json(rep, path)
    d = json.loads(path.read_text())
    assert d["model_lower_bound"]["value"] == pytest.approx(0.0, abs=1e-9)
    assert set(d) >= {"upper_estimate_from_exhaustion", "sandwich_verdict", "model_upper_bound"}
