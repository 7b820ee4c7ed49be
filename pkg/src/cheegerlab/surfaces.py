"""Ring-structured meshes of classical minimal surfaces.

Every generator lays vertices on rings of constant extrinsic distance where
the geometry allows it (plane, hyperbolic plane, catenoid) so that level
sets of ``r`` follow mesh rings.  The helicoid uses a chart in which the
distance to the pole is the polar radius, with ring vertices placed on the
orthogonal trajectories of the rings.  Rings are not staggered: the
linear interpolant of ``r`` then never steepens past ``1 + O(n_theta^-2)``.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .ambient import AmbientSpace
from .errors import MeshError
from .mesh import SampledSubmanifold

KINDS = ("plane", "catenoid", "helicoid", "h2-in-h3")
DEFAULT_N_THETA = 4096
MIN_LEVEL_FACES = 256


def _ring_faces(n_rings, n_theta, pole):
    """Faces of ``n_rings`` rings of ``n_theta`` vertices, plus a pole fan."""
    off = 1 if pole else 0
    j = np.arange(n_theta)
    jn = (j + 1) % n_theta
    blocks = []
    if pole:
        blocks.append(np.column_stack([np.zeros(n_theta, np.int64), off + j, off + jn]))
    for i in range(n_rings - 1):
        a = off + i * n_theta + j
        b = off + i * n_theta + jn
        c = off + (i + 1) * n_theta + jn
        d = off + (i + 1) * n_theta + j
        blocks.append(np.column_stack([a, b, c]))
        blocks.append(np.column_stack([a, c, d]))
    return np.concatenate(blocks).astype(np.int64)


def _helicoid_angles(radii, n_theta, c):
    """Polar angles of ring vertices carried along orthogonal trajectories of r.

    In the chart ``(s, u) -> (s cos(u/c), s sin(u/c), u)`` the distance to
    the pole is the polar radius but polar angles are far from orthogonal in
    the surface metric ``ds^2 + (1 + s^2/c^2) du^2``.  Following the gradient
    flow keeps each cross-ring edge perpendicular to the level rings.
    """

    def rhs(rho, phi):
        cs, sn = np.cos(phi), np.sin(phi)
        beta = 1.0 + (rho * cs / c) ** 2
        return cs * sn * (1.0 / beta - 1.0) / (rho * (cs * cs + sn * sn / beta))

    phi0 = 2.0 * np.pi * np.arange(n_theta) / n_theta
    sol = solve_ivp(rhs, (radii[0], radii[-1]), phi0, t_eval=radii, method="DOP853", rtol=1e-11, atol=1e-12)
    if not sol.success:
        raise MeshError(f"helicoid trajectory integration failed: {sol.message}")
    return sol.y.T.ravel()


def _polar(radii, n_theta):
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    rho = np.repeat(radii, n_theta)
    th = np.tile(theta, len(radii))
    return rho, th


def _with_pole(xyz, dim):
    return np.vstack([np.zeros((1, dim)), xyz])


def _level_check(mesh, t_max):
    t = 0.5 * t_max
    crossing = int(np.sum((mesh.face_rmin <= t) & (mesh.face_rmax > t)))
    if crossing < MIN_LEVEL_FACES:
        raise MeshError(
            f"resolution too coarse: only {crossing} faces cross the level r = {t:g} (need {MIN_LEVEL_FACES})"
        )
    return mesh


def generate_surface(kind, t_max, n_theta=DEFAULT_N_THETA, n_rings=None, refine=0, a=1.0,
                     pitch=2.0 * math.pi, b=-1.0):
    """Mesh of ``kind`` covering the extrinsic ball of radius ``t_max``.

    ``n_rings`` counts rings per radial direction (per end for the
    catenoid); ``refine`` doubles both ring and angular counts that many
    times.  Defaults: ring spacing 0.4 (plane), 0.2 (helicoid, hyperbolic
    plane), 80 rings per catenoid end.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown surface kind {kind!r}; choose from {KINDS}")
    t_max = float(t_max)
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    n_theta = int(n_theta) * 2**refine
    if n_theta < 3:
        raise MeshError("need at least 3 vertices per ring")
    if n_rings is None:
        step = {"plane": 0.4, "helicoid": 0.2, "h2-in-h3": 0.2}.get(kind)
        n_rings = 80 if kind == "catenoid" else max(2, math.ceil(t_max / step))
    n_rings = int(n_rings) * 2**refine
    label = f"{kind} t_max={t_max!r} n_theta={n_theta} n_rings={n_rings}"

    if kind in ("plane", "h2-in-h3", "helicoid"):
        radii = t_max * np.arange(1, n_rings + 1) / n_rings
        rho, th = _polar(radii, n_theta)
        faces = _ring_faces(n_rings, n_theta, pole=True)
        if kind == "plane":
            A = AmbientSpace(3, 0.0)
            pts = np.column_stack([rho * np.cos(th), rho * np.sin(th), np.zeros_like(rho)])
            verts = _with_pole(pts, 3)
        elif kind == "h2-in-h3":
            A = AmbientSpace(3, b)
            v = _with_pole(np.column_stack([rho * np.cos(th), rho * np.sin(th), np.zeros_like(rho)]), 3)
            verts = A.project(A.exp_pole(v))
        else:
            A = AmbientSpace(3, 0.0)
            c = pitch / (2.0 * math.pi)
            th = _helicoid_angles(radii, n_theta, c)
            s, u = rho * np.cos(th), rho * np.sin(th)
            pts = np.column_stack([s * np.cos(u / c), s * np.sin(u / c), u])
            verts = _with_pole(pts, 3)
            label += f" pitch={pitch!r}"
        mesh = SampledSubmanifold(A, verts, faces, name=label)
        return _level_check(mesh, t_max)

    # catenoid with its neck circle of radius a centred on the pole
    if t_max <= a:
        raise MeshError("catenoid needs t_max larger than the neck radius")
    V = brentq(lambda v: (a * math.cosh(v / a)) ** 2 + v * v - t_max**2, 0.0, a * math.acosh(t_max / a), xtol=1e-14)
    vs = V * np.arange(-n_rings, n_rings + 1) / n_rings
    vv, th = _polar(vs, n_theta)
    rad = a * np.cosh(vv / a)
    verts = np.column_stack([rad * np.cos(th), rad * np.sin(th), vv])
    faces = _ring_faces(2 * n_rings + 1, n_theta, pole=False)
    mesh = SampledSubmanifold(AmbientSpace(3, 0.0), verts, faces, name=label + f" a={a!r}")
    return _level_check(mesh, t_max)
