import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheegerlab.ambient import AmbientSpace, extrinsic_distance, face_area, heron_area, minkowski
from cheegerlab.errors import DomainError

E3 = AmbientSpace.euclidean(3)
H3 = AmbientSpace.hyperbolic(3, -1.0)

vec3 = st.lists(st.floats(-4, 4), min_size=3, max_size=3).map(np.array)


def test_euclidean_distance():
    assert extrinsic_distance(E3, np.array([3.0, 4.0, 0.0])) == 5.0
    assert extrinsic_distance(E3, E3.pole) == 0.0


def test_hyperbolic_distance():
    x = np.array([math.cosh(2), math.sinh(2), 0, 0])
    assert extrinsic_distance(H3, x) == pytest.approx(2.0, rel=1e-14)
    assert extrinsic_distance(H3, H3.pole) == 0.0
    assert H3.pole[0] == 1.0


def test_scaled_curvature():
    A = AmbientSpace.hyperbolic(3, -4.0)
    x = A.exp_pole(np.array([1.5, 0, 0]))
    assert A.b * minkowski(x, x) == pytest.approx(1.0, rel=1e-14)
    assert extrinsic_distance(A, x) == pytest.approx(1.5, rel=1e-14)
    # arccosh form for comparison
    assert float(np.arccosh(A.b * minkowski(A.pole, x)) / A.k) == pytest.approx(1.5, rel=1e-10)


def test_off_model_rejected():
    with pytest.raises(DomainError):
        extrinsic_distance(H3, np.array([1.0, 1.0, 0, 0]))
    with pytest.raises(DomainError):
        extrinsic_distance(H3, np.array([-1.0, 0, 0, 0]))
    with pytest.raises(DomainError):
        extrinsic_distance(E3, np.array([1.0, 2.0]))
    with pytest.raises(DomainError):
        AmbientSpace(3, 1.0)


def _mp_exp(v):
    r = mpmath.sqrt(sum(mpmath.mpf(float(a)) ** 2 for a in v))
    s = mpmath.sinh(r) / r if r else mpmath.mpf(1)
    return [mpmath.cosh(r)] + [s * mpmath.mpf(float(a)) for a in v]


@settings(max_examples=60, deadline=None)
@given(v=vec3, w=vec3)
def test_distance_matches_arccosh(v, w):
    with mpmath.workdps(50):
        x, y = _mp_exp(v), _mp_exp(w)
        c = x[0] * y[0] - sum(a * b for a, b in zip(x[1:], y[1:]))
        ref = float(mpmath.acosh(max(c, 1)))
    d = float(H3.distance(H3.exp_pole(v), H3.exp_pole(w)))
    assert d == pytest.approx(ref, rel=1e-9, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(v=vec3)
def test_exp_log_roundtrip(v):
    x = H3.exp_pole(v)
    assert H3.on_model_error(x) < 1e-12
    np.testing.assert_allclose(H3.log_pole(x), v, atol=1e-9 * (1 + np.linalg.norm(v)))
    assert H3.distance_to_pole(x) == pytest.approx(np.linalg.norm(v), rel=1e-12, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(u=vec3, v=vec3, w=vec3)
def test_triangle_inequality(u, v, w):
    x, y, z = H3.exp_pole(u), H3.exp_pole(v), H3.exp_pole(w)
    assert H3.distance(x, z) <= H3.distance(x, y) + H3.distance(y, z) + 1e-9


def test_project():
    x = H3.exp_pole(np.array([[3.0, 1, 2], [0.1, 0, 0]]))
    x[:, 0] *= 1 + 1e-6
    assert np.all(H3.on_model_error(H3.project(x)) < 1e-12)


def test_metric_circle_length():
    # circle of radius rho in normal coordinates has length 2 pi sinh(rho)
    rho = 3.0
    v = np.array([rho, 0, 0])
    tangent = np.array([0, 2 * math.pi * rho, 0])
    assert math.sqrt(H3.metric_norm2(v, tangent)) == pytest.approx(2 * math.pi * math.sinh(rho), rel=1e-12)
    radial = np.array([0.7, 0, 0])
    assert H3.metric_norm2(v, radial) == pytest.approx(0.49)


def test_face_area_euclidean():
    tri = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0.0]])
    assert face_area(E3, tri) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        face_area(E3, np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0.0]]))


def _equilateral(A, side):
    # corners at angles 0, 120, 240 degrees on a circle in the plane z = 0
    k = A.k
    # circumradius R of a hyperbolic equilateral triangle: sinh(a/2) = sinh(R) sin(60)
    R = math.asinh(math.sinh(k * side / 2) / math.sin(math.pi / 3)) / k
    ang = np.array([0, 2 * math.pi / 3, 4 * math.pi / 3])
    v = np.column_stack([R * np.cos(ang), R * np.sin(ang), np.zeros(3)])
    return A.exp_pole(v)


def test_face_area_small_triangle_flat_limit():
    tri = _equilateral(H3, 1e-3)
    sides = [H3.distance(tri[i], tri[(i + 1) % 3]) for i in range(3)]
    np.testing.assert_allclose(sides, 1e-3, rtol=1e-10)
    assert face_area(H3, tri) == pytest.approx(float(heron_area(1e-3, 1e-3, 1e-3)), rel=1e-5)


def test_face_area_large_triangle_below_pi():
    tri = _equilateral(H3, 5.0)
    area = face_area(H3, tri)
    # angle defect via the hyperbolic law of cosines
    alpha = math.acos((math.cosh(5) ** 2 - math.cosh(5)) / math.sinh(5) ** 2)
    assert area == pytest.approx(math.pi - 3 * alpha, rel=1e-10)
    assert area < math.pi


@settings(max_examples=50, deadline=None)
@given(u=vec3, v=vec3, w=vec3)
def test_face_area_matches_law_of_cosines(u, v, w):
    tri = H3.exp_pole(np.stack([u, v, w]))
    a, b, c = (float(H3.distance(tri[i], tri[j])) for i, j in ((1, 2), (0, 2), (0, 1)))
    if min(a, b, c) < 1e-3 or a + b - c < 1e-3 or a + c - b < 1e-3 or b + c - a < 1e-3:
        return

    def angle(opp, s1, s2):
        x = (math.cosh(s1) * math.cosh(s2) - math.cosh(opp)) / (math.sinh(s1) * math.sinh(s2))
        return math.acos(max(-1.0, min(1.0, x)))

    defect = math.pi - angle(a, b, c) - angle(b, a, c) - angle(c, a, b)
    if defect < 1e-6:
        return
    assert face_area(H3, tri) == pytest.approx(defect, rel=1e-6, abs=1e-9)
