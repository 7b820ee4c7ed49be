"""Triangle meshes of surfaces in a space form, measured intrinsically.

A face is the flat triangle spanned by its corners in the normal
coordinates of the pole, pushed into the ambient by ``exp_o``.  In the
Euclidean case this is the ordinary flat triangle.  In hyperbolic space it
is a smooth surface patch whose induced metric is known in closed form, so
areas and lengths can be integrated to quadrature accuracy on faces far
larger than the curvature radius.  The extrinsic distance ``r = |v|`` is
exact at vertices and interpolated linearly over faces.
"""

import logging
import math
import re

import numpy as np

from .ambient import AmbientSpace
from .errors import MeshError, SpecError

logger = logging.getLogger(__name__)

# 7-point degree-5 rule on the reference triangle (barycentric weights)
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
DUNAVANT_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
DUNAVANT_W = np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
GL_NODES = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W


def unit_normals(p0, p1, p2):
    """Unit normals of flat triangles in 3-D normal coordinates."""
    n = np.cross(p1 - p0, p2 - p0)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def area_density(ambient, x, normal):
    """``sqrt(det g)`` of the face plane at points ``x`` relative to flat area."""
    if ambient.b == 0.0:
        return np.ones(x.shape[:-1])
    r = np.linalg.norm(x, axis=-1)
    lam = ambient.lam(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        un = np.where(r > 0, np.sum(x * normal, axis=-1) / np.where(r > 0, r, 1.0), 0.0)
    tan2 = np.clip(1.0 - un * un, 0.0, 1.0)
    return lam * np.sqrt(lam * lam + (1.0 - lam * lam) * tan2)


def metric_triangle_area(ambient, p0, p1, p2, normal=None):
    """Metric area of flat normal-coordinate triangles (vectorised over rows)."""
    flat = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=-1)
    if ambient.b == 0.0:
        return flat
    if normal is None:
        normal = unit_normals(p0, p1, p2)
    pts = (DUNAVANT_BARY[:, 0, None, None] * p0 + DUNAVANT_BARY[:, 1, None, None] * p1
           + DUNAVANT_BARY[:, 2, None, None] * p2)
    dens = area_density(ambient, pts, normal[None])
    return flat * np.tensordot(DUNAVANT_W, dens, axes=1)


def metric_segment_length(ambient, p, q):
    """Length of straight normal-coordinate segments ``p -> q``."""
    d = q - p
    if ambient.b == 0.0:
        return np.linalg.norm(d, axis=-1)
    pts = p[None] + GL_NODES[:, None, None] * d[None]
    return np.tensordot(GL_WEIGHTS, np.sqrt(ambient.metric_norm2(pts, d[None])), axes=1)


def grad_norm(ambient, x, grad, normal):
    """Metric norm of the in-plane Euclidean gradient ``grad`` at points ``x``.

    Inverts the face metric ``lam^2 I + (1 - lam^2) a a^T`` with
    Sherman-Morrison, ``a`` being the in-plane part of the radial direction.
    """
    g2 = np.sum(grad * grad, axis=-1)
    if ambient.b == 0.0:
        return np.sqrt(g2)
    r = np.linalg.norm(x, axis=-1)
    lam = ambient.lam(r)
    safe = np.where(r > 0, r, 1.0)
    u = x / safe[..., None]
    a = u - np.sum(u * normal, axis=-1)[..., None] * normal
    a = np.where((r > 0)[..., None], a, 0.0)
    a2 = np.sum(a * a, axis=-1)
    ga = np.sum(grad * a, axis=-1)
    l2 = lam * lam
    val = (g2 - (1.0 - l2) * ga * ga / (l2 + (1.0 - l2) * a2)) / l2
    return np.sqrt(np.maximum(val, 0.0))


def plane_gradients(p0, p1, p2, r0, r1, r2):
    """In-plane Euclidean gradient of the linear interpolant of ``r``."""
    e1, e2 = p1 - p0, p2 - p0
    g11 = np.sum(e1 * e1, -1)
    g22 = np.sum(e2 * e2, -1)
    g12 = np.sum(e1 * e2, -1)
    det = g11 * g22 - g12 * g12
    d1, d2 = r1 - r0, r2 - r0
    ca = (g22 * d1 - g12 * d2) / det
    cb = (g11 * d2 - g12 * d1) / det
    return ca[..., None] * e1 + cb[..., None] * e2


class SampledSubmanifold:
    """Immutable triangle mesh of a surface in ``ambient``.

    ``vertices`` are ambient coordinates; ``faces`` index triples.  On
    construction the mesh is checked to be edge-manifold with positive face
    areas and its boundary is located; per-face metric areas and gradient
    norms of ``r`` (at centroids) are cached.
    """

    m = 2

    def __init__(self, ambient, vertices, faces, name="mesh", on_model_tol=1e-9, h_max=None):
        if not isinstance(ambient, AmbientSpace):
            raise TypeError("ambient must be an AmbientSpace")
        vertices = np.ascontiguousarray(vertices, dtype=float)
        faces = np.ascontiguousarray(faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != ambient.coord_dim:
            raise MeshError(f"vertices must be (N, {ambient.coord_dim})")
        if faces.ndim != 2 or faces.shape[1] != 3 or faces.size == 0:
            raise MeshError("faces must be a non-empty (F, 3) index array")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise MeshError("face index out of range")
        if ambient.n != 3:
            raise MeshError("surface meshes are supported in 3-dimensional ambients only")
        try:
            ambient.check_points(vertices, tol=on_model_tol)
        except Exception as exc:
            raise MeshError(str(exc)) from exc
        self.ambient = ambient
        self.name = name
        self.vertices = vertices
        self.faces = faces
        self.coords = ambient.log_pole(vertices)
        self.r = np.linalg.norm(self.coords, axis=-1)
        for arr in (self.vertices, self.faces, self.coords, self.r):
            arr.setflags(write=False)
        self._build_topology()
        self._build_face_data()
        self.h_max = float(self.edge_lengths_flat.max()) if h_max is None else float(h_max)

    # topology

    def _build_topology(self):
        f = self.faces
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise MeshError("face with repeated vertex")
        half = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        key = np.sort(half, axis=1)
        nv = np.int64(len(self.vertices))
        ukey, inverse, counts = np.unique(key[:, 0] * nv + key[:, 1], return_inverse=True, return_counts=True)
        edges = np.column_stack([ukey // nv, ukey % nv])
        if np.any(counts > 2):
            raise MeshError(f"mesh is not edge-manifold ({int(np.sum(counts > 2))} edges with > 2 faces)")
        self.edges = edges
        self.face_edges = inverse.reshape(3, -1).T
        boundary_edges = edges[counts == 1]
        self.boundary_vertices = np.unique(boundary_edges)
        bmask = np.zeros(len(self.vertices), bool)
        bmask[self.boundary_vertices] = True
        near = bmask.copy()
        touching = bmask[edges].any(axis=1)
        near[edges[touching].ravel()] = True
        self.boundary_mask = bmask
        self.interior_mask = ~near
        self.edge_lengths_flat = np.linalg.norm(self.coords[edges[:, 0]] - self.coords[edges[:, 1]], axis=1)

    @property
    def truncation_radius(self):
        """Radius below which the extrinsic balls lie away from the boundary."""
        if len(self.boundary_vertices) == 0:
            return math.inf
        return float(self.r[self.boundary_vertices].min())

    def _build_face_data(self):
        c = self.coords
        p0, p1, p2 = c[self.faces[:, 0]], c[self.faces[:, 1]], c[self.faces[:, 2]]
        cross = np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=-1)
        if np.any(cross <= 0.0):
            raise MeshError(f"{int(np.sum(cross <= 0))} degenerate faces")
        self.normals = unit_normals(p0, p1, p2)
        self.face_areas = metric_triangle_area(self.ambient, p0, p1, p2, self.normals)
        if np.any(~(self.face_areas > 0.0)):
            raise MeshError("non-positive face area")
        rf = self.r[self.faces]
        self.face_grad = plane_gradients(p0, p1, p2, rf[:, 0], rf[:, 1], rf[:, 2])
        centroid = (p0 + p1 + p2) / 3.0
        self.face_grad_norm = grad_norm(self.ambient, centroid, self.face_grad, self.normals)
        self.face_rmin = rf.min(axis=1)
        self.face_rmax = rf.max(axis=1)

    def edge_lengths(self):
        """Metric lengths of all edges (``self.edges`` order)."""
        c = self.coords
        return metric_segment_length(self.ambient, c[self.edges[:, 0]], c[self.edges[:, 1]])

    @property
    def total_area(self):
        return float(np.sum(self.face_areas))

    @property
    def n_faces(self):
        return len(self.faces)

    def summary(self):
        return {
            "name": self.name,
            "ambient": self.ambient.header()[len("#ambient "):],
            "vertices": int(len(self.vertices)),
            "faces": int(len(self.faces)),
            "h_max": self.h_max,
            "truncation_radius": self.truncation_radius,
            "max_grad_norm": float(self.face_grad_norm.max()),
        }


# ---------------------------------------------------------------------------
# OFF files


def write_off(mesh, path):
    """ASCII OFF with an ``#ambient`` header line; floats in 17 digits."""
    with open(path, "w", newline="\n") as fh:
        fh.write("OFF\n")
        fh.write(mesh.ambient.header() + "\n")
        fh.write(f"#name {mesh.name}\n")
        fh.write(f"{len(mesh.vertices)} {len(mesh.faces)} 0\n")
        np.savetxt(fh, mesh.vertices, fmt="%.17g")
        np.savetxt(fh, np.column_stack([np.full(len(mesh.faces), 3), mesh.faces]), fmt="%d")


_AMBIENT_RE = re.compile(r"#ambient\s+(euclidean|hyperboloid)\s+(n|b)=(\S+)")


def parse_ambient_header(line):
    m = _AMBIENT_RE.fullmatch(line.strip())
    if not m:
        raise SpecError(f"bad ambient header {line.strip()!r}")
    kind, key, val = m.groups()
    try:
        if kind == "euclidean":
            if key != "n":
                raise SpecError("euclidean header needs n=")
            return AmbientSpace(int(val), 0.0)
        if key != "b":
            raise SpecError("hyperboloid header needs b=")
        return AmbientSpace(3, float(val))
    except ValueError as exc:
        raise SpecError(f"bad ambient header {line.strip()!r}: {exc}") from exc


def read_off(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read mesh {path}: {exc}") from exc
    lines = text.splitlines()
    ambient, name, body = None, str(path), []
    for ln in lines:
        s = ln.strip()
        if s.startswith("#ambient"):
            ambient = parse_ambient_header(s)
        elif s.startswith("#name "):
            name = s[6:].strip()
        elif s and not s.startswith("#"):
            body.append(s)
    if not body or body[0] != "OFF":
        raise SpecError(f"{path}: not an OFF file")
    if ambient is None:
        raise SpecError(f"{path}: missing '#ambient' header line")
    try:
        nv, nf = (int(t) for t in body[1].split()[:2])
        vrows, frows = body[2:2 + nv], body[2 + nv:2 + nv + nf]
        dim = len(vrows[0].split())
        verts = np.array(" ".join(vrows).split(), dtype=float).reshape(nv, dim)
        ftok = np.array(" ".join(frows).split(), dtype=np.int64)
        if len(frows) != nf or ftok.size != 4 * nf:
            raise ValueError("face rows must read '3 i j k'")
        ftok = ftok.reshape(nf, 4)
    except (IndexError, ValueError) as exc:
        raise SpecError(f"{path}: malformed OFF body ({exc})") from exc
    if np.any(ftok[:, 0] != 3):
        raise SpecError(f"{path}: only triangle faces are supported")
    faces = ftok[:, 1:]
    return SampledSubmanifold(ambient, verts, faces, name=name)
