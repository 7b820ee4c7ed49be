import math

import numpy as np
import pytest
from scipy.optimize import brentq

from cheegerlab.errors import MeshError
from cheegerlab.surfaces import generate_surface


def catenoid_area(t, a=1.0):
    V = brentq(lambda v: (a * math.cosh(v / a)) ** 2 + v * v - t * t, 0, a * math.acosh(t / a))
    # 2 pi a int_{-V}^{V} cosh^2(v/a) dv
    return 2 * math.pi * a * (V + a * math.sinh(2 * V / a) / 2)


@pytest.fixture(scope="module")
def meshes():
    return {
        "plane": generate_surface("plane", 10.0),
        "h2-in-h3": generate_surface("h2-in-h3", 8.0),
        "catenoid": generate_surface("catenoid", 20.0, n_rings=40),
        "helicoid": generate_surface("helicoid", 6.0),
    }


def test_plane_area(meshes):
    assert meshes["plane"].total_area == pytest.approx(math.pi * 100, rel=1e-3)


def test_h2_area_and_model(meshes):
    M = meshes["h2-in-h3"]
    assert M.total_area == pytest.approx(2 * math.pi * (math.cosh(8) - 1), rel=1e-3)
    assert M.ambient.on_model_error(M.vertices).max() < 1e-12


def test_catenoid_area(meshes):
    M = meshes["catenoid"]
    assert M.total_area == pytest.approx(catenoid_area(20.0), rel=1e-3)
    assert M.truncation_radius == pytest.approx(20.0, rel=1e-12)
    assert M.r.min() == pytest.approx(1.0)


def test_helicoid_on_surface(meshes):
    x, y, z = meshes["helicoid"].vertices.T
    # x sin(z) = y cos(z) for pitch 2 pi
    assert np.max(np.abs(x * np.sin(z) - y * np.cos(z))) < 1e-12
    assert meshes["helicoid"].truncation_radius == pytest.approx(6.0, rel=1e-12)


@pytest.mark.parametrize("kind", ["plane", "h2-in-h3", "catenoid", "helicoid"])
def test_gradient_bound(meshes, kind):
    assert meshes[kind].face_grad_norm.max() <= 1 + 1e-6


def test_plane_gradient():
    n = 4096
    M = generate_surface("plane", 4.0, n_theta=n, n_rings=8)
    # the smooth r restricted to each face has unit gradient
    tri = M.coords[M.faces]
    c = tri.mean(axis=1)
    u = c / np.linalg.norm(c, axis=1)[:, None]
    tang = u - np.sum(u * M.normals, axis=1)[:, None] * M.normals
    assert np.max(np.abs(np.linalg.norm(tang, axis=1) - 1)) < 1e-9
    # its linear interpolant over a ring polygon is steeper by exactly 1/cos(pi/n)
    np.testing.assert_allclose(M.face_grad_norm, 1 / math.cos(math.pi / n), rtol=1e-9)


def test_level_set_resolution_guard():
    with pytest.raises(MeshError):
        generate_surface("plane", 10.0, n_theta=64)
    with pytest.raises(MeshError):
        generate_surface("catenoid", 0.5)
    with pytest.raises(ValueError):
        generate_surface("sphere", 1.0)


@pytest.mark.parametrize("kind", ["plane", "h2-in-h3"])
def test_refinement_convergence(kind):
    from cheegerlab import extrinsic as ex
    from cheegerlab import iso_comparison as ic
    from cheegerlab import model_space as ms

    b = 0.0 if kind == "plane" else -1.0
    space = ic.construct_W(2, ms.SpaceForm(b), ic.BoundingFunction.zero())
    t = np.linspace(1.0, 5.0, 9)
    coarse = generate_surface(kind, 6.0, n_theta=512, n_rings=15)
    fine = generate_surface(kind, 6.0, n_theta=512, n_rings=15, refine=1)
    v0 = ex.compute_profile(coarse, space, t).vol_D
    v1 = ex.compute_profile(fine, space, t).vol_D
    assert np.all(np.abs(v1 - v0) / v1 < 10.0 / coarse.n_faces)
