"""One-dimensional calculus of rotationally symmetric model spaces.

A model space ``M^m_w`` is the warped product ``dr^2 + w(r)^2 g_{S^{m-1}}``
over ``[0, R)``.  Everything here reduces to scalar functions of the radius:
the warping ``w`` and its derivatives, the mean curvature of distance
spheres ``eta_w = w'/w``, the radial sectional curvature ``K_w = -w''/w``,
and the volumes of metric spheres and balls.

Warping functions expose *raw* vectorised methods (``w``, ``dw``, ``d2w``,
``log_w``, ``eta``, ``eta_prime``, ``curvature``) that perform no domain
checks.  The module-level operations (:func:`eval_w`, :func:`eta_w`, ...)
validate their radii first and are the public entry points.
"""

import csv
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .errors import DomainError, NumericalError, SpecError

logger = logging.getLogger(__name__)

#: smallest radius at which the 1/r-singular quantities are evaluated
R_MIN = 1e-8
#: tolerance of the w(0) = 0, w'(0) = 1 normalisation checks
NORMALISATION_TOL = 1e-6

QUAD_EPSREL = 1e-11
QUAD_LIMIT = 200


# ---------------------------------------------------------------------------
# numerically stable elementary pieces


def log_sinhc(x):
    """``log(sinh(x) / x)`` for ``x >= 0`` without overflow or cancellation."""
    x0 = np.asarray(x, dtype=float)
    x = np.atleast_1d(x0)
    out = np.empty_like(x)
    small = x < 1e-2
    big = x > 20.0
    mid = ~(small | big)
    xs = x[small]
    out[small] = xs**2 / 6.0 - xs**4 / 180.0
    xm = x[mid]
    out[mid] = np.log(np.sinh(xm) / xm)
    xb = x[big]
    out[big] = xb - np.log(2.0 * xb) + np.log1p(-np.exp(-2.0 * xb))
    return out.reshape(x0.shape)


def sinhc(x):
    """``sinh(x) / x`` with the removable singularity filled in."""
    return np.exp(log_sinhc(np.abs(x)))


def coth_minus_inv(x):
    """``coth(x) - 1/x`` for ``x > 0``, series near zero."""
    x0 = np.asarray(x, dtype=float)
    x = np.atleast_1d(x0)
    out = np.empty_like(x)
    small = x < 0.05
    xs = x[small]
    out[small] = xs / 3.0 - xs**3 / 45.0 + 2.0 * xs**5 / 945.0 - xs**7 / 4725.0
    xl = x[~small]
    out[~small] = 1.0 / np.tanh(xl) - 1.0 / xl
    return out.reshape(x0.shape)


def cot_minus_inv(x):
    """``cot(x) - 1/x`` for ``0 < x < pi``, series near zero."""
    x0 = np.asarray(x, dtype=float)
    x = np.atleast_1d(x0)
    out = np.empty_like(x)
    small = x < 0.05
    xs = x[small]
    out[small] = -xs / 3.0 - xs**3 / 45.0 - 2.0 * xs**5 / 945.0 - xs**7 / 4725.0
    xl = x[~small]
    out[~small] = 1.0 / np.tan(xl) - 1.0 / xl
    return out.reshape(x0.shape)


@lru_cache(maxsize=None)
def unit_sphere_volume(m):
    """Volume ``omega_{m-1}`` of the unit (m-1)-sphere in R^m."""
    return 2.0 * math.pi ** (m / 2.0) / special.gamma(m / 2.0)


# ---------------------------------------------------------------------------
# warping functions


class WarpingFunction:
    """Profile ``w: [0, R) -> [0, inf)`` with ``w(0) = 0`` and ``w'(0) = 1``.

    Subclasses implement ``w``, ``dw`` and ``d2w``; the remaining methods have
    generic definitions that subclasses override where a closed form is
    better conditioned.
    """

    domain_end = math.inf
    label = "w"

    def w(self, r):
        raise NotImplementedError

    def dw(self, r):
        raise NotImplementedError

    def d2w(self, r):
        raise NotImplementedError

    def log_w(self, r):
        return np.log(self.w(r))

    def eta(self, r):
        return self.dw(r) / self.w(r)

    def eta_minus_inv(self, r):
        """``eta(r) - 1/r``, which stays bounded as ``r -> 0``."""
        r = np.asarray(r, dtype=float)
        return self.eta(r) - 1.0 / r

    def curvature(self, r):
        return -self.d2w(r) / self.w(r)

    def eta_prime(self, r):
        return -self.curvature(r) - self.eta(r) ** 2

    def check_domain(self, r, singular=False):
        r = np.asarray(r, dtype=float)
        if np.any(~np.isfinite(r)) or np.any(r < 0.0):
            raise DomainError(f"radius must be finite and >= 0 for {self.label}")
        if np.any(r >= self.domain_end):
            raise DomainError(
                f"radius {float(np.max(r))!r} outside [0, {self.domain_end!r}) for {self.label}"
            )
        if singular and np.any(r < R_MIN):
            raise DomainError(f"r = {float(np.min(r))!r} is below r_min = {R_MIN}; quantity is singular at 0")
        return r

    def _check_normalisation(self):
        w0 = float(self.w(np.array([0.0]))[0])
        dw0 = float(self.dw(np.array([R_MIN]))[0])
        if abs(w0) > NORMALISATION_TOL or abs(dw0 - 1.0) > NORMALISATION_TOL:
            raise SpecError(
                f"{self.label}: need w(0)=0 and w'(0)=1, got w(0)={w0!r}, w'(0+)={dw0!r}"
            )

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


class SpaceForm(WarpingFunction):
    """Warping of the simply connected space form of curvature ``b``."""

    def __init__(self, b):
        self.b = float(b)
        self.k = math.sqrt(abs(self.b))
        self.domain_end = math.pi / self.k if self.b > 0 else math.inf
        self.label = f"w_b(b={self.b!r})"

    def w(self, r):
        r = np.asarray(r, dtype=float)
        if self.b < 0:
            return np.sinh(self.k * r) / self.k
        if self.b > 0:
            return np.sin(self.k * r) / self.k
        return r.copy()

    def dw(self, r):
        r = np.asarray(r, dtype=float)
        if self.b < 0:
            return np.cosh(self.k * r)
        if self.b > 0:
            return np.cos(self.k * r)
        return np.ones_like(r)

    def d2w(self, r):
        return -self.b * self.w(r)

    def log_w(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            if self.b < 0:
                return np.log(r) + log_sinhc(self.k * r)
            if self.b > 0:
                return np.log(np.sin(self.k * r) / self.k)
            return np.log(r)

    def eta(self, r):
        r = np.asarray(r, dtype=float)
        if self.b < 0:
            return self.k / np.tanh(self.k * r)
        if self.b > 0:
            return self.k / np.tan(self.k * r)
        return 1.0 / r

    def eta_minus_inv(self, r):
        r = np.asarray(r, dtype=float)
        if self.b < 0:
            return self.k * coth_minus_inv(self.k * r)
        if self.b > 0:
            return self.k * cot_minus_inv(self.k * r)
        return np.zeros_like(r)

    def curvature(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.b)

    def eta_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.b < 0:
            return -(self.k**2) / np.sinh(self.k * r) ** 2
        if self.b > 0:
            return -(self.k**2) / np.sin(self.k * r) ** 2
        return -1.0 / r**2


def _fd_step(r):
    return np.maximum(1e-5, 1e-7 * r)


class AnalyticWarping(WarpingFunction):
    """Closed-form profile given by callables.

    ``dw`` and ``d2w`` fall back to central differences with step
    ``max(1e-5, 1e-7 r)`` when not supplied.  Any of ``log_w``, ``eta``,
    ``curvature`` and ``eta_prime`` may be passed to replace the generic,
    possibly overflowing, ratio formulas.
    """

    def __init__(self, w, dw=None, d2w=None, *, label="analytic", domain_end=math.inf, **overrides):
        self._w = w
        self._dw = dw
        self._d2w = d2w
        self.label = label
        self.domain_end = domain_end
        unknown = set(overrides) - {"log_w", "eta", "curvature", "eta_prime", "eta_minus_inv"}
        if unknown:
            raise TypeError(f"unknown overrides {sorted(unknown)}")
        self._overrides = overrides
        self._check_normalisation()

    def w(self, r):
        return np.asarray(self._w(np.asarray(r, dtype=float)), dtype=float)

    def dw(self, r):
        r = np.asarray(r, dtype=float)
        if self._dw is not None:
            return np.asarray(self._dw(r), dtype=float)
        h = np.minimum(_fd_step(r), 0.5 * r + 1e-12)
        return (self.w(r + h) - self.w(np.maximum(r - h, 0.0))) / (r + h - np.maximum(r - h, 0.0))

    def d2w(self, r):
        r = np.asarray(r, dtype=float)
        if self._d2w is not None:
            return np.asarray(self._d2w(r), dtype=float)
        h = np.minimum(_fd_step(r), 0.5 * r)
        return (self.w(r + h) - 2.0 * self.w(r) + self.w(r - h)) / h**2

    def log_w(self, r):
        f = self._overrides.get("log_w")
        if f is not None:
            return np.asarray(f(np.asarray(r, dtype=float)), dtype=float)
        return super().log_w(r)

    def eta(self, r):
        f = self._overrides.get("eta")
        if f is not None:
            return np.asarray(f(np.asarray(r, dtype=float)), dtype=float)
        return super().eta(r)

    def eta_minus_inv(self, r):
        f = self._overrides.get("eta_minus_inv")
        if f is not None:
            return np.asarray(f(np.asarray(r, dtype=float)), dtype=float)
        return super().eta_minus_inv(r)

    def curvature(self, r):
        f = self._overrides.get("curvature")
        if f is not None:
            return np.asarray(f(np.asarray(r, dtype=float)), dtype=float)
        return super().curvature(r)

    def eta_prime(self, r):
        f = self._overrides.get("eta_prime")
        if f is not None:
            return np.asarray(f(np.asarray(r, dtype=float)), dtype=float)
        return super().eta_prime(r)


def exp_r2_profile():
    """The profile ``w(r) = exp(r^2) + r - 1``.

    Its sphere mean curvature eventually increases, so the model space is
    balanced from below but not from above.  All ratios are evaluated in
    ``exp(-r^2)``-scaled form so radii up to the hundreds stay finite.
    """

    def w(r):
        return np.expm1(r**2) + r

    def dw(r):
        return 2.0 * r * np.exp(r**2) + 1.0

    def d2w(r):
        return (4.0 * r**2 + 2.0) * np.exp(r**2)

    def scaled_w(r):
        # w(r) * exp(-r^2)
        return -np.expm1(-(r**2)) + r * np.exp(-(r**2))

    def log_w(r):
        with np.errstate(divide="ignore"):
            return r**2 + np.log(scaled_w(r))

    def eta(r):
        return (2.0 * r + np.exp(-(r**2))) / scaled_w(r)

    def curvature(r):
        return -(4.0 * r**2 + 2.0) / scaled_w(r)

    def eta_prime(r):
        e = np.exp(-(r**2))
        num = 2.0 * r + e
        den = scaled_w(r)
        dnum = 2.0 - 2.0 * r * e
        dden = e * (1.0 + 2.0 * r - 2.0 * r**2)
        return (dnum * den - num * dden) / den**2

    return AnalyticWarping(
        w, dw, d2w, label="exp-r2", log_w=log_w, eta=eta, curvature=curvature, eta_prime=eta_prime
    )


ANALYTIC_PROFILES = {"exp-r2": exp_r2_profile}


def analytic_profile(name):
    try:
        return ANALYTIC_PROFILES[name]()
    except KeyError:
        raise SpecError(f"unknown analytic profile {name!r}; known: {sorted(ANALYTIC_PROFILES)}") from None


class TabulatedWarping(WarpingFunction):
    """Profile sampled on a grid, interpolated by a C^2 cubic spline.

    Derivatives are those of the interpolant.  Integrals of ``w^p`` are
    computed exactly panel by panel between knots (the integrand is a
    polynomial of degree ``3p`` there).
    """

    def __init__(self, r, w, label="tabulated"):
        r = np.asarray(r, dtype=float)
        w = np.asarray(w, dtype=float)
        if r.ndim != 1 or r.shape != w.shape or r.size < 4:
            raise SpecError("tabulated profile needs matching 1-D r and w columns with >= 4 rows")
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(w)):
            raise SpecError("tabulated profile contains non-finite values")
        if r[0] != 0.0:
            raise SpecError("tabulated r must start at 0")
        if np.any(np.diff(r) <= 0.0):
            raise SpecError("tabulated r must be strictly increasing")
        if np.any(w[1:] <= 0.0):
            raise SpecError("tabulated w must be positive for r > 0")
        self.knots = r
        self.values = w
        self.label = label
        self.domain_end = float(r[-1])
        self._spline = CubicSpline(r, w)
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)
        self._cumulative = {}
        self._check_normalisation()

    def w(self, r):
        return self._spline(np.asarray(r, dtype=float))

    def dw(self, r):
        return self._d1(np.asarray(r, dtype=float))

    def d2w(self, r):
        return self._d2(np.asarray(r, dtype=float))

    def _gauss(self, p):
        n = int(math.ceil((3 * p + 1) / 2.0)) + 1
        return np.polynomial.legendre.leggauss(n)

    def power_integral(self, r, p):
        """Exact ``int_0^r w(t)^p dt`` of the spline, vectorised over ``r``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        x, wts = self._gauss(p)
        if p not in self._cumulative:
            a, b = self.knots[:-1], self.knots[1:]
            half = 0.5 * (b - a)
            nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
            panels = half * np.sum(wts[None, :] * self.w(nodes) ** p, axis=1)
            self._cumulative[p] = np.concatenate([[0.0], np.cumsum(panels)])
        cum = self._cumulative[p]
        idx = np.clip(np.searchsorted(self.knots, r, side="right") - 1, 0, self.knots.size - 2)
        a = self.knots[idx]
        half = 0.5 * (r - a)
        nodes = (0.5 * (a + r))[:, None] + half[:, None] * x[None, :]
        partial = half * np.sum(wts[None, :] * self.w(nodes) ** p, axis=1)
        return cum[idx] + partial


def load_profile_csv(path):
    """Read a two-column ``r,w`` CSV into a :class:`TabulatedWarping`."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SpecError(f"cannot read profile {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["r", "w"]:
        raise SpecError(f"{path}: first line must be the header 'r,w'")
    try:
        data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
    except ValueError as exc:
        raise SpecError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise SpecError(f"{path}: expected exactly two columns")
    return TabulatedWarping(data[:, 0], data[:, 1], label=f"csv:{path}")


# ---------------------------------------------------------------------------
# model spaces


@dataclass(frozen=True)
class ModelSpace:
    m: int
    w: WarpingFunction

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"model dimension must be an integer >= 2, got {self.m!r}")

    @property
    def omega(self):
        return unit_sphere_volume(self.m)


def eval_w(w, r):
    """``w(r)``; raises :class:`DomainError` outside ``[0, R)``."""
    r = w.check_domain(r)
    return _scalar_or_array(w.w(r), r)


def eta_w(w, r):
    """Mean curvature ``w'(r)/w(r)`` of the distance sphere of radius ``r``."""
    r = w.check_domain(r, singular=True)
    return _scalar_or_array(w.eta(r), r)


def curvature_K_w(w, r):
    """Radial sectional curvature ``-w''(r)/w(r)``."""
    r = w.check_domain(r, singular=True)
    return _scalar_or_array(w.curvature(r), r)


def sphere_volume(M, r):
    """``Vol(S^w_r) = omega_{m-1} w(r)^{m-1}``."""
    r = M.w.check_domain(r)
    return _scalar_or_array(M.omega * M.w.w(r) ** (M.m - 1), r)


def ball_volume(M, r):
    """``Vol(B^w_r) = omega_{m-1} int_0^r w^{m-1}`` by adaptive quadrature."""
    r = M.w.check_domain(r)
    grid = np.atleast_1d(r)
    out = M.omega * np.exp(log_power_integrals(M.w, M.m - 1, grid))
    return _scalar_or_array(out, r)


def isoperimetric_quotient(M, r):
    """``q_w(r) = Vol(B^w_r) / Vol(S^w_r)``."""
    r = M.w.check_domain(r)
    return _scalar_or_array(quotient_on_grid(M.w, M.m, np.atleast_1d(r)), r)


def _scalar_or_array(values, like):
    values = np.asarray(values, dtype=float)
    if np.ndim(like) == 0:
        return float(values.reshape(-1)[0])
    return values.reshape(np.shape(like))


def _sorted_positive(grid):
    grid = np.asarray(grid, dtype=float).reshape(-1)
    order = np.argsort(grid, kind="stable")
    if np.any(grid <= 0.0):
        raise DomainError("integration radii must be > 0")
    return grid, order


def _scaled_panel(w, p, a, b, log_wb):
    """``int_a^b (w(t)/w(b))^p dt``, quadrature with error control."""

    def integrand(t):
        return math.exp(p * (float(w.log_w(t)) - log_wb))

    with np.errstate(divide="ignore"):
        val, err, *rest = integrate.quad(
            integrand, a, b, epsabs=1e-14 * (b - a), epsrel=QUAD_EPSREL, limit=QUAD_LIMIT, full_output=1
        )
    if err > 1e-10 * (1.0 + abs(val)) and err > 1e-9 * abs(val):
        raise NumericalError(
            f"quadrature of w^{p} on [{a!r}, {b!r}] did not converge (estimate {err:.3e})", error_estimate=err
        )
    return val


def log_power_integrals(w, p, grid):
    """``log int_0^{r} w(t)^p dt`` for each radius in ``grid``.

    Panels between consecutive sorted radii are integrated in scaled form
    and accumulated in log space, so profiles growing like ``exp(r^2)``
    stay representable.
    """
    grid, order = _sorted_positive(grid)
    if hasattr(w, "power_integral"):
        return np.log(w.power_integral(grid, p))
    out = np.empty_like(grid)
    log_total = -math.inf
    prev = 0.0
    for i in order:
        r = float(grid[i])
        log_wr = float(w.log_w(r))
        if r > prev:
            panel = _scaled_panel(w, p, prev, r, log_wr)
            log_total = float(np.logaddexp(log_total, math.log(panel) + p * log_wr))
        out[i] = log_total
        prev = r
    return out


def quotient_on_grid(w, m, grid):
    """``q_w(r) = int_0^r w^{m-1} / w(r)^{m-1}`` on every radius of ``grid``."""
    grid = np.asarray(grid, dtype=float).reshape(-1)
    p = m - 1
    log_int = log_power_integrals(w, p, grid)
    return np.exp(log_int - p * w.log_w(grid))


def log_grid(r_min, r_max, n):
    """Log-spaced radius grid with ``n`` points."""
    return np.geomspace(float(r_min), float(r_max), int(n))
