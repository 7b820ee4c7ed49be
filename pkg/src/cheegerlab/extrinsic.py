"""Extrinsic growth of sampled surfaces and the comparison checks built on it.

For a mesh ``P`` and a comparison space ``M^m_W`` this module measures the
extrinsic balls ``D_t = {r <= t}`` (closed sublevel sets of the linear
interpolant of ``r``), their boundaries, the volume growth quotient
``f(t) = Vol(D_t) / Vol(B^W_t)`` and its logarithmic derivative

    F(t) = Vol(D_t)'/Vol(D_t) - Vol(S^W_t)/Vol(B^W_t),

and compares everything with the model.  It also runs a cotangent-Laplacian
check of ``Delta r >= (m-1) eta_W(r)`` and a discrete divergence audit.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import iso_comparison as ic
from . import model_space as ms
from ._parallel import ordered_map
from .errors import MeshError
from .mesh import DUNAVANT_BARY, DUNAVANT_W, area_density, grad_norm, metric_segment_length, metric_triangle_area

logger = logging.getLogger(__name__)

EPS_MESH_FACTOR = 10.0
SANDWICH_TOL = 0.02
LAPLACIAN_SLACK = 0.05
LAPLACIAN_MAX_FRACTION = 0.05
DIVERGENCE_TOL = 0.02
COAREA_TOL = 0.05
#: central-difference step for Vol(D_t)' as a fraction of the longest edge
DIFF_STEP = 1e-4
#: relative size below which monotonicity defects are floating-point noise
NOISE_FLOOR = 1e-10

PROFILE_COLUMNS = ("t", "vol_D", "vol_bdry", "vol_D_prime", "f", "F", "ref_sphere_ball", "margin")


def eps_mesh(mesh, t_min):
    """Mesh-aware slack ``10 h_max / t_min`` attached to every verdict."""
    return EPS_MESH_FACTOR * mesh.h_max / float(t_min)


# ---------------------------------------------------------------------------
# clipping


class _Clipper:
    """Per-level measurement of ``D_t`` and ``{r = t}`` on one mesh."""

    def __init__(self, mesh):
        self.mesh = mesh
        f = mesh.faces
        rf = mesh.r[f]
        order = np.argsort(rf, axis=1, kind="stable")
        self.sorted_faces = np.take_along_axis(f, order, axis=1)
        self.sorted_r = np.take_along_axis(rf, order, axis=1)
        self.by_rmax = np.argsort(mesh.face_rmax, kind="stable")
        self.rmax_sorted = mesh.face_rmax[self.by_rmax]
        self.cum_area = np.concatenate([[0.0], np.cumsum(mesh.face_areas[self.by_rmax])])

    def straddling(self, t):
        cand = self.by_rmax[np.searchsorted(self.rmax_sorted, t, side="right"):]
        return np.sort(cand[self.mesh.face_rmin[cand] <= t])

    def full_count(self, t):
        return int(np.searchsorted(self.rmax_sorted, t, side="right"))

    def _cut(self, t, idx, values=None):
        """Corner points of the inside pieces and the level segments."""
        mesh = self.mesh
        sf, sr = self.sorted_faces[idx], self.sorted_r[idx]
        p = mesh.coords[sf]
        k = np.sum(sr <= t, axis=1)

        def lerp(i, j):
            # pairs a face does not cut may divide 0/0; those rows are never read
            with np.errstate(divide="ignore", invalid="ignore"):
                a = ((t - sr[:, i]) / (sr[:, j] - sr[:, i]))[:, None]
                return p[:, i] + a * (p[:, j] - p[:, i]), a

        q01, a01 = lerp(0, 1)
        q02, a02 = lerp(0, 2)
        q12, a12 = lerp(1, 2)
        one = k == 1
        seg_a = np.where(one[:, None], q01, q12)
        seg_b = q02
        out = {"k": k, "p": p, "seg": (seg_a, seg_b), "q": (q01, q02, q12)}
        if values is not None:
            v = values[sf]
            with np.errstate(invalid="ignore"):
                v01 = v[:, 0] + a01[:, 0] * (v[:, 1] - v[:, 0])
                v02 = v[:, 0] + a02[:, 0] * (v[:, 2] - v[:, 0])
                v12 = v[:, 1] + a12[:, 0] * (v[:, 2] - v[:, 1])
            out["v"] = (v, v01, v02, v12)
        return out

    def volume(self, t):
        """``Vol(D_t)`` alone (no boundary work)."""
        mesh = self.mesh
        inside = self.cum_area[self.full_count(t)]
        idx = self.straddling(t)
        if len(idx) == 0:
            return inside
        cut = self._cut(t, idx)
        k, p = cut["k"], cut["p"]
        q01, q02, q12 = cut["q"]
        normal = mesh.normals[idx]
        one, two = k == 1, k == 2
        A = mesh.ambient
        part = 0.0
        if np.any(one):
            part += float(np.sum(metric_triangle_area(A, p[one, 0], q01[one], q02[one], normal[one])))
        if np.any(two):
            part += float(np.sum(metric_triangle_area(A, p[two, 0], p[two, 1], q12[two], normal[two])
                                 + metric_triangle_area(A, p[two, 0], q12[two], q02[two], normal[two])))
        return inside + part

    def measure(self, t):
        mesh = self.mesh
        n_full = self.full_count(t)
        inside = self.cum_area[n_full]
        idx = self.straddling(t)
        if n_full == 0 and len(idx) == 0:
            raise MeshError(f"extrinsic ball D_t is empty at t={t!r}")
        if len(idx) == 0:
            return inside, 0.0, 0.0, 0.0
        cut = self._cut(t, idx)
        k, p = cut["k"], cut["p"]
        q01, q02, q12 = cut["q"]
        normal = mesh.normals[idx]
        one = k == 1
        two = ~one
        A = mesh.ambient
        part = np.zeros(len(idx))
        if np.any(one):
            part[one] = metric_triangle_area(A, p[one, 0], q01[one], q02[one], normal[one])
        if np.any(two):
            part[two] = (metric_triangle_area(A, p[two, 0], p[two, 1], q12[two], normal[two])
                         + metric_triangle_area(A, p[two, 0], q12[two], q02[two], normal[two]))
        a, b = cut["seg"]
        length = metric_segment_length(A, a, b)
        g = grad_norm(A, 0.5 * (a + b), mesh.face_grad[idx], normal)
        keep = length > 0
        coarea = float(np.sum(length[keep] / g[keep]))
        flux = float(np.sum(length * g))
        return inside + float(np.sum(part)), float(np.sum(length)), coarea, flux

    def integrate_linear(self, t, values):
        """``int_{D_t}`` of the linear interpolant of per-vertex ``values``."""
        mesh = self.mesh
        A = mesh.ambient
        full = self.by_rmax[: self.full_count(t)]
        if len(full) == 0:
            raise MeshError(f"no face lies inside D_t at t={t!r}")
        total = _linear_integral(A, mesh.coords[mesh.faces[full]], values[mesh.faces[full]], mesh.normals[full])
        idx = self.straddling(t)
        if len(idx):
            cut = self._cut(t, idx, values)
            k, p = cut["k"], cut["p"]
            q01, q02, q12 = cut["q"]
            v, v01, v02, v12 = cut["v"]
            nrm = mesh.normals[idx]
            one = k == 1
            two = ~one
            tris = np.stack([p[:, 0], q01, q02], axis=1)
            vals = np.stack([v[:, 0], v01, v02], axis=1)
            total += _linear_integral(A, tris[one], vals[one], nrm[one])
            t1 = np.stack([p[:, 0], p[:, 1], q12], axis=1)
            t2 = np.stack([p[:, 0], q12, q02], axis=1)
            total += _linear_integral(A, t1[two], np.stack([v[:, 0], v[:, 1], v12], axis=1)[two], nrm[two])
            total += _linear_integral(A, t2[two], np.stack([v[:, 0], v12, v02], axis=1)[two], nrm[two])
        return total


def _linear_integral(A, tris, vals, normals):
    if len(tris) == 0:
        return 0.0
    p0, p1, p2 = tris[:, 0], tris[:, 1], tris[:, 2]
    flat = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=-1)
    pts = DUNAVANT_BARY[:, 0, None, None] * p0 + DUNAVANT_BARY[:, 1, None, None] * p1 + DUNAVANT_BARY[:, 2, None, None] * p2
    fv = DUNAVANT_BARY @ vals.T  # (7, F)
    dens = area_density(A, pts, normals[None])
    return float(np.sum(flat * np.tensordot(DUNAVANT_W, dens * fv, axes=1)))


# ---------------------------------------------------------------------------
# growth profile


@dataclass
class GrowthProfile:
    t: np.ndarray
    vol_D: np.ndarray
    vol_bdry: np.ndarray
    vol_D_prime: np.ndarray
    f: np.ndarray
    F: np.ndarray
    ref_sphere_ball: np.ndarray
    margin: np.ndarray
    coarea: np.ndarray
    flux: np.ndarray
    truncation_radius: float
    eps_mesh: float
    h_max: float
    mesh_name: str = ""
    balanced_below: bool = None
    witness_below: dict = None

    @property
    def ratio(self):
        return self.vol_bdry / self.vol_D

    @property
    def mean_grad_norm(self):
        """Length-weighted mean of ``|grad r|`` on each level set."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.flux / self.vol_bdry

    def columns(self):
        return {c: getattr(self, c) for c in PROFILE_COLUMNS}


def _check_grid(mesh, t_grid):
    t = np.asarray(t_grid, dtype=float).reshape(-1)
    if t.size < 3:
        raise ValueError("t_grid needs at least 3 radii")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise ValueError("t_grid must be positive and strictly increasing")
    if t[-1] > mesh.truncation_radius:
        raise MeshError(
            f"t_grid reaches {t[-1]!r}, beyond the mesh truncation radius {mesh.truncation_radius!r}"
        )
    return t


def _check_dimension(mesh, space):
    if space.m != mesh.m:
        raise ValueError(f"comparison space has m={space.m} but the mesh is {mesh.m}-dimensional")


def compute_profile(P, space, t_grid):
    """Growth profile of ``P`` against the comparison space ``space``."""
    _check_dimension(P, space)
    t = _check_grid(P, t_grid)
    clip = _Clipper(P)
    step = DIFF_STEP * P.h_max
    top = P.truncation_radius

    def row(tk):
        vol, length, coarea, flux = clip.measure(tk)
        lo = clip.volume(tk - step)
        if tk + step <= top:
            deriv = (clip.volume(tk + step) - lo) / (2 * step)
        else:
            deriv = (3 * vol - 4 * lo + clip.volume(tk - 2 * step)) / (2 * step)
        return vol, length, coarea, flux, deriv

    rows = ordered_map(row, list(t))
    vol_D, vol_bdry, coarea, flux, vol_D_prime = (np.array(c) for c in zip(*rows))
    model = space.model
    ball = ms.ball_volume(model, t)
    ref = 1.0 / ms.isoperimetric_quotient(model, t)
    verdict = ic.check_balanced_below(space, ms.log_grid(min(1e-3, t[0]), t[-1], 200))
    with np.errstate(divide="ignore", invalid="ignore"):
        F = vol_D_prime / vol_D - ref
        margin = vol_bdry / vol_D - ref
    return GrowthProfile(
        t=t, vol_D=vol_D, vol_bdry=vol_bdry, vol_D_prime=vol_D_prime, f=vol_D / ball, F=F,
        ref_sphere_ball=ref, margin=margin, coarea=coarea, flux=flux,
        truncation_radius=P.truncation_radius, eps_mesh=eps_mesh(P, t[0]), h_max=P.h_max,
        mesh_name=P.name, balanced_below=verdict.balanced_below, witness_below=verdict.witness_below,
    )


def default_t_grid(P, n=200, t_max=None, t_min=None):
    """Linear grid from past the first full face to just inside the truncation radius.

    The top radius stays a relative 1e-9 below the boundary ring so that
    rounding in vertex radii cannot let a level set leak off the mesh.
    """
    top = P.truncation_radius * (1 - 1e-9) if t_max is None else float(t_max)
    if not math.isfinite(top):
        top = float(P.r.max())
    if t_min is None:
        t_min = max(0.05 * top, float(P.face_rmax.min()))
    return np.linspace(t_min, top, int(n))


# ---------------------------------------------------------------------------
# verdicts


def verify_isoperimetric_inequality(profile):
    """Minimum of ``Vol(dD_t)/Vol(D_t) - Vol(S^W_t)/Vol(B^W_t)`` over the grid."""
    i = int(np.argmin(profile.margin))
    rel = profile.margin / profile.ref_sphere_ball
    out = {
        "min_margin": float(profile.margin[i]),
        "t_at_min": float(profile.t[i]),
        "max_abs_relative_margin": float(np.max(np.abs(rel))),
        "eps_mesh": profile.eps_mesh,
        "pass": bool(profile.margin[i] >= -profile.eps_mesh),
        "balanced_below": profile.balanced_below,
    }
    if profile.balanced_below is False:
        out["note"] = "comparison space is not balanced from below; the inequality is not implied"
    return out


def monotonicity_report(profile):
    """Worst decrease of ``f`` between consecutive radii and worst negative ``F``.

    Defects smaller than ``NOISE_FLOOR`` relative to ``f`` (respectively to
    ``Vol(S^W_t)/Vol(B^W_t)``) are rounding noise and count as zero.
    """
    drops = profile.f[:-1] - profile.f[1:]
    f_violation = float(max(0.0, np.max(drops - NOISE_FLOOR * np.abs(profile.f[1:]))))
    F_violation = float(max(0.0, np.max(-profile.F - NOISE_FLOOR * profile.ref_sphere_ball)))
    return {
        "f_violation": f_violation,
        "f_violation_t": float(profile.t[int(np.argmax(drops)) + 1]),
        "F_violation": F_violation,
        "F_violation_t": float(profile.t[int(np.argmin(profile.F))]),
        "eps_mesh": profile.eps_mesh,
        "noise_floor": NOISE_FLOOR,
        "pass": bool(f_violation <= profile.eps_mesh and F_violation <= profile.eps_mesh),
    }


def coarea_report(profile, min_grad=0.9):
    """Compare ``Vol(D_t)'`` with ``int_{dD_t} 1/|grad r|`` (co-area formula)."""
    ok = profile.mean_grad_norm > min_grad
    rel = np.abs(profile.vol_D_prime - profile.coarea) / profile.coarea
    worst = float(np.max(rel[ok])) if np.any(ok) else float("nan")
    return {"max_relative_mismatch": worst, "points": int(np.sum(ok)), "pass": bool(worst < COAREA_TOL)}


@dataclass
class CheegerReport:
    upper_estimate_from_exhaustion: float
    t_at_estimate: float
    model_upper_bound: ic.LimitEstimate
    model_lower_bound: ic.LimitEstimate
    sandwich_verdict: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "upper_estimate_from_exhaustion": self.upper_estimate_from_exhaustion,
            "t_at_estimate": self.t_at_estimate,
            "model_upper_bound": self.model_upper_bound.to_dict(),
            "model_lower_bound": self.model_lower_bound.to_dict(),
            "sandwich_verdict": self.sandwich_verdict,
            "diagnostics": self.diagnostics,
        }


def cheeger_estimate(P, space, t_grid, profile=None, tol=SANDWICH_TOL, r_max=40.0):
    """Exhaustion estimate ``min_t Vol(dD_t)/Vol(D_t)`` against the model bounds.

    The extrinsic balls are admissible domains, so the estimate bounds the
    Cheeger constant from above; it is consistent with the model iff it is
    not below the model lower bound (up to ``tol``).
    """
    if profile is None:
        profile = compute_profile(P, space, t_grid)
    ratio = profile.ratio
    i = int(np.argmin(ratio))
    est = float(ratio[i])
    r_lim = min(r_max, space.R, space.W.domain_end * (1 - 1e-9))
    upper = ic.cheeger_upper_value(space, r_lim)
    lower = ic.cheeger_lower_value(space, r_lim)
    diag = {"eps_mesh": profile.eps_mesh, "t_max": float(profile.t[-1]), "tol": tol}
    if lower.value is None:
        verdict = False
        diag["note"] = "model lower bound did not converge"
    else:
        verdict = bool(lower.value - tol <= est)
    if upper.value is not None:
        diag["below_model_upper_bound"] = bool(est <= upper.value + tol)
    return CheegerReport(est, float(profile.t[i]), upper, lower, verdict, diag)


# ---------------------------------------------------------------------------
# discrete Laplacian


def _inv_metric(A, x, g1, g2, normal):
    """``g^{-1}(g1, g2)`` for in-plane covectors of a face (Sherman-Morrison)."""
    dot = np.sum(g1 * g2, axis=-1)
    if A.b == 0.0:
        return dot
    r = np.linalg.norm(x, axis=-1)
    lam2 = A.lam(r) ** 2
    safe = np.where(r > 0, r, 1.0)
    u = x / safe[..., None]
    a = u - np.sum(u * normal, axis=-1)[..., None] * normal
    a = np.where((r > 0)[..., None], a, 0.0)
    a2 = np.sum(a * a, axis=-1)
    return (dot - (1 - lam2) * np.sum(g1 * a, -1) * np.sum(g2 * a, -1) / (lam2 + (1 - lam2) * a2)) / lam2


def cotan_laplacian(P, values=None):
    """Cotangent Laplacian of ``values`` (default ``r``) with barycentric cells.

    The edge weights are the entries of the linear finite-element stiffness
    matrix, integrated against the exact metric of each face.  On flat
    faces they reduce to the classical ``(cot a + cot b)/2``; on hyperbolic
    faces they stay valid where triangles built from geodesic edge lengths
    would violate the triangle inequality.  Boundary vertices get NaN.
    """
    f = P.r if values is None else np.asarray(values, float)
    A = P.ambient
    c = P.coords
    p0, p1, p2 = c[P.faces[:, 0]], c[P.faces[:, 1]], c[P.faces[:, 2]]
    e0, e1, e2 = p2 - p1, p0 - p2, p1 - p0  # edge opposite each corner
    n = P.normals
    flat2 = np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=-1)
    # in-plane gradients of the hat functions: rotate opposite edge by 90 degrees
    grads = [np.cross(n, e) / flat2[:, None] for e in (e0, e1, e2)]
    pts = DUNAVANT_BARY[:, 0, None, None] * p0 + DUNAVANT_BARY[:, 1, None, None] * p1 + DUNAVANT_BARY[:, 2, None, None] * p2
    dens = area_density(A, pts, n[None])
    weight = 0.5 * flat2 * DUNAVANT_W[:, None] * dens  # (7, F)

    def stiff(i, j):
        return np.sum(weight * _inv_metric(A, pts, grads[i][None], grads[j][None], n[None]), axis=0)

    # face_edges columns: (v0,v1), (v1,v2), (v2,v0)
    ne = len(P.edges)
    fe = P.face_edges
    w = -(np.bincount(fe[:, 0], stiff(0, 1), ne) + np.bincount(fe[:, 1], stiff(1, 2), ne)
          + np.bincount(fe[:, 2], stiff(2, 0), ne))
    nv = len(P.r)
    cell = np.bincount(P.faces.ravel(), np.repeat(P.face_areas / 3.0, 3), nv)
    i, j = P.edges[:, 0], P.edges[:, 1]
    d = w * (f[j] - f[i])
    lap = (np.bincount(i, d, nv) - np.bincount(j, d, nv)) / cell
    lap[P.boundary_mask] = np.nan
    return lap, cell


def discrete_laplacian_check(P, space, slack=LAPLACIAN_SLACK):
    """Fraction of interior vertices violating ``Delta r >= (m-1) eta_W(r) - delta``.

    ``delta = slack * |bound|``.  Vertices within one ring of the boundary
    and those with ``r < 2 h_max`` are excluded.
    """
    _check_dimension(P, space)
    lap, _ = cotan_laplacian(P)
    sel = P.interior_mask & (P.r > 2.0 * P.h_max)
    if not np.any(sel):
        raise MeshError("no interior vertices away from the pole")
    r = P.r[sel]
    bound = (space.m - 1) * space.W.eta(r)
    val = lap[sel]
    delta = slack * np.abs(bound)
    bad = val < bound - delta
    rel = np.abs(val - bound) / np.abs(bound)
    frac = float(np.mean(bad))
    out = {
        "vertices": int(sel.sum()),
        "violations": int(bad.sum()),
        "violation_fraction": frac,
        "slack_relative": slack,
        "median_relative_residual": float(np.median(rel)),
        "p95_relative_residual": float(np.percentile(rel, 95)),
        "max_relative_residual": float(rel.max()),
        "pass": bool(frac < LAPLACIAN_MAX_FRACTION),
        "h_max": P.h_max,
    }
    if bad.any():
        out["violation_r_median"] = float(np.median(r[bad]))
        out["worst_violation"] = {"r": float(r[np.argmax(bound - val)]), "laplacian": float(val[np.argmax(bound - val)]),
                                  "bound": float(bound[np.argmax(bound - val)])}
    return out


def divergence_audit(P, space, t):
    """Compare ``int_{D_t} Delta r`` with the flux ``int_{dD_t} |grad r|``."""
    _check_dimension(P, space)
    t = float(t)
    if t > P.truncation_radius:
        raise MeshError(f"t={t!r} beyond the truncation radius {P.truncation_radius!r}")
    clip = _Clipper(P)
    lap, _ = cotan_laplacian(P)
    reach = P.faces[P.face_rmin <= t].ravel()
    if np.any(P.boundary_mask[reach]):
        raise MeshError("D_t touches the mesh boundary")
    lhs = clip.integrate_linear(t, np.nan_to_num(lap))
    _, length, _, flux = clip.measure(t)
    mismatch = abs(lhs - flux) / abs(flux)
    return {
        "t": t,
        "integral_laplacian": lhs,
        "boundary_flux": flux,
        "boundary_length": length,
        "relative_mismatch": mismatch,
        "pass": bool(mismatch < DIVERGENCE_TOL),
    }


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    x = float(x)
    return repr(x) if math.isfinite(x) else "nan"


def profile_csv(profile):
    """CSV text; floats in shortest round-trip form, '.' decimal point."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS)
    cols = [np.asarray(getattr(profile, c), float) for c in PROFILE_COLUMNS]
    for row in zip(*cols):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_profile_csv(profile, path):
    with open(path, "w", newline="") as fh:
        fh.write(profile_csv(profile))


def dumps_report(report):
    return json.dumps(ic.jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(report, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_report(report))
