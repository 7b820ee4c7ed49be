"""Space forms K^n(b), b <= 0, with a pole.

``b = 0`` is Euclidean space with the pole at the origin.  ``b < 0`` uses
the hyperboloid ``<x, x>_L = 1/b, x_0 > 0`` in Minkowski space with
signature ``(-, +, ..., +)`` and pole ``(1/sqrt(-b), 0, ..., 0)``.

Besides distances and geodesic triangle areas, the ambient exposes the
normal coordinates of the pole (``log_pole`` / ``exp_pole``).  In these
coordinates the metric at ``v`` is

    g(xi, xi) = (xi . u)^2 + lam^2 (|xi|^2 - (xi . u)^2),   u = v/|v|,

with ``lam = sinh(k|v|) / (k|v|)`` and ``k = sqrt(-b)``, which the mesh code
uses to measure flat triangles exactly.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model_space import sinhc

ON_MODEL_TOL = 1e-10


def minkowski(x, y):
    """Lorentz product ``-x_0 y_0 + sum x_i y_i`` over the last axis."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


@dataclass(frozen=True)
class AmbientSpace:
    n: int
    b: float = 0.0
    pole: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"ambient dimension must be an integer >= 2, got {self.n!r}")
        if not self.b <= 0.0:
            raise DomainError(f"only space forms with b <= 0 carry a pole, got b={self.b!r}")
        object.__setattr__(self, "b", float(self.b))
        pole = np.zeros(self.coord_dim)
        if self.b < 0:
            pole[0] = self.rho
        object.__setattr__(self, "pole", pole)

    @classmethod
    def euclidean(cls, n=3):
        return cls(n, 0.0)

    @classmethod
    def hyperbolic(cls, n=3, b=-1.0):
        return cls(n, b)

    @property
    def model(self):
        return "euclidean" if self.b == 0.0 else "hyperboloid"

    @property
    def coord_dim(self):
        return self.n if self.b == 0.0 else self.n + 1

    @property
    def k(self):
        return math.sqrt(-self.b)

    @property
    def rho(self):
        """Curvature radius ``1/sqrt(-b)`` (hyperboloid only)."""
        return 1.0 / self.k

    def header(self):
        if self.b == 0.0:
            return f"#ambient euclidean n={self.n}"
        return f"#ambient hyperboloid b={self.b!r}"

    # model membership

    def on_model_error(self, x):
        """Relative violation of the hyperboloid constraint (0 for Euclidean)."""
        x = np.asarray(x, float)
        if self.b == 0.0:
            return np.zeros(x.shape[:-1])
        sq = np.sum(x * x, axis=-1)
        return np.abs(self.b * minkowski(x, x) - 1.0) / (1.0 + abs(self.b) * sq)

    def check_points(self, x, tol=ON_MODEL_TOL):
        x = np.asarray(x, float)
        if x.shape[-1] != self.coord_dim:
            raise DomainError(f"points need {self.coord_dim} coordinates, got {x.shape[-1]}")
        if not np.all(np.isfinite(x)):
            raise DomainError("points must be finite")
        if self.b < 0.0:
            err = self.on_model_error(x)
            if np.any(err > tol) or np.any(x[..., 0] <= 0.0):
                i = int(np.argmax(err))
                raise DomainError(f"point off the hyperboloid (relative error {float(err.reshape(-1)[i]):.3e})")
        return x

    def project(self, x):
        """Snap points onto the model by recomputing ``x_0``."""
        x = np.array(x, float)
        if self.b < 0.0:
            x[..., 0] = np.sqrt(self.rho**2 + np.sum(x[..., 1:] ** 2, axis=-1))
        return x

    # distances

    def distance(self, x, y):
        """Geodesic distance, stable for nearby points."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.b == 0.0:
            return np.linalg.norm(x - y, axis=-1)
        d = x - y
        chord2 = np.maximum(minkowski(d, d), 0.0)
        return 2.0 * self.rho * np.arcsinh(np.sqrt(chord2) / (2.0 * self.rho))

    def distance_to_pole(self, x):
        x = np.asarray(x, float)
        if self.b == 0.0:
            return np.linalg.norm(x, axis=-1)
        return self.rho * np.arcsinh(np.linalg.norm(x[..., 1:], axis=-1) / self.rho)

    # normal coordinates at the pole

    def log_pole(self, x):
        """Normal coordinates ``v`` with ``exp_o(v) = x``; ``|v|`` is the distance."""
        x = np.asarray(x, float)
        if self.b == 0.0:
            return x.copy()
        xs = x[..., 1:]
        s = np.linalg.norm(xs, axis=-1)
        r = self.rho * np.arcsinh(s / self.rho)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(s > 0, r / np.where(s > 0, s, 1.0), 1.0)
        return xs * scale[..., None]

    def exp_pole(self, v):
        v = np.asarray(v, float)
        if self.b == 0.0:
            return v.copy()
        r = np.linalg.norm(v, axis=-1)
        out = np.empty(v.shape[:-1] + (self.n + 1,))
        out[..., 0] = self.rho * np.cosh(r / self.rho)
        out[..., 1:] = v * sinhc(r / self.rho)[..., None]
        return out

    def lam(self, r):
        """Tangential stretch ``w_b(r)/r`` of the normal-coordinate metric."""
        r = np.asarray(r, float)
        if self.b == 0.0:
            return np.ones_like(r)
        return sinhc(self.k * r)

    def metric_norm2(self, v, xi):
        """``g_v(xi, xi)`` in normal coordinates."""
        v, xi = np.asarray(v, float), np.asarray(xi, float)
        sq = np.sum(xi * xi, axis=-1)
        if self.b == 0.0:
            return sq
        r = np.linalg.norm(v, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            rad = np.where(r > 0, np.sum(xi * v, axis=-1) / np.where(r > 0, r, 1.0), 0.0)
        lam = self.lam(r)
        return rad**2 + lam**2 * (sq - rad**2)


def extrinsic_distance(A, x):
    """Distance from the pole, rejecting points off the model."""
    x = A.check_points(x)
    return A.distance_to_pole(x)


def _heron(a, b, c):
    # Kahan's ordering keeps needle triangles accurate
    s = np.sort(np.stack([a, b, c], axis=-1), axis=-1)[..., ::-1]
    a, b, c = s[..., 0], s[..., 1], s[..., 2]
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


def heron_area(a, b, c):
    """Euclidean triangle area from side lengths."""
    return _heron(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))


def face_area(A, tri, tol=1e-300):
    """Area of the geodesic triangle with corners ``tri`` (shape (..., 3, dim)).

    Euclidean triangles use the cross product.  Hyperbolic ones use the
    L'Huilier form of the angle defect, which is well conditioned for both
    tiny and large triangles.
    """
    tri = A.check_points(tri)
    p, q, s = tri[..., 0, :], tri[..., 1, :], tri[..., 2, :]
    if A.b == 0.0:
        e1, e2 = q - p, s - p
        g11 = np.sum(e1 * e1, -1)
        g22 = np.sum(e2 * e2, -1)
        g12 = np.sum(e1 * e2, -1)
        area = 0.5 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))
    else:
        k = A.k
        a = k * A.distance(q, s)
        b = k * A.distance(p, s)
        c = k * A.distance(p, q)
        sp = 0.5 * (a + b + c)
        t = np.tanh(sp / 2) * np.tanh((sp - a) / 2) * np.tanh((sp - b) / 2) * np.tanh((sp - c) / 2)
        area = 4.0 * np.arctan(np.sqrt(np.maximum(t, 0.0))) / k**2
    if np.any(area <= tol):
        raise DomainError("degenerate triangle")
    return area
