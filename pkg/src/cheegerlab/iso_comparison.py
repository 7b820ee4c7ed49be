"""Isoperimetric comparison spaces, balance conditions and Cheeger bounds.

Given an intermediary warping ``w`` (bounding the ambient radial curvature)
and a bounding function ``h`` (bounding the radial mean curvature of the
submanifold), the comparison warping ``W`` solves

    W'/W = eta_w - m/(m-1) h,    W(0) = 0,  W'(0) = 1,

whose solution is ``W(r) = w(r) exp(-m/(m-1) int_0^r h)``.  The closed form
is the working representation; an independent ODE integration is kept as
a cross-check.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import model_space as ms
from .errors import DomainError, NumericalError, SpecError

logger = logging.getLogger(__name__)

INEQUALITY_TOL = 1e-9
CROSSCHECK_TOL = 1e-6
LIMIT_TOL = 1e-6
CONSTRUCTION_TOL = 1e-7
MIN_GRID_POINTS = 100


# ---------------------------------------------------------------------------
# bounding functions


def _dcoth_minus_inv(x):
    """Derivative of ``coth(x) - 1/x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 0.05
    xs = x[small]
    out[small] = 1.0 / 3.0 - xs**2 / 15.0 + 2.0 * xs**4 / 189.0
    xl = x[~small]
    out[~small] = -1.0 / np.sinh(xl) ** 2 + 1.0 / xl**2
    return out


class BoundingFunction:
    """Radial bound ``h(r)`` on the mean curvature of the submanifold.

    Build instances with :meth:`zero`, :meth:`constant`, :meth:`hab` or
    :meth:`tabulated`.  ``value``, ``deriv`` and ``integral`` (from 0) take
    the submanifold dimension ``m`` because the ``hab`` family depends on it.
    """

    def __init__(self, kind, **params):
        self.kind = kind
        self.params = params
        self._spline = None
        if kind == "hab":
            a, b = float(params["a"]), float(params["b"])
            if not a < b <= 0.0:
                raise SpecError(f"hab bounding function needs a < b <= 0, got a={a!r}, b={b!r}")
            self._ka, self._kb = math.sqrt(-a), math.sqrt(-b)
        elif kind == "tabulated":
            r, h = np.asarray(params["r"], float), np.asarray(params["h"], float)
            if r.ndim != 1 or r.shape != h.shape or r.size < 4:
                raise SpecError("tabulated h needs matching 1-D columns with >= 4 rows")
            if r[0] != 0.0 or np.any(np.diff(r) <= 0.0):
                raise SpecError("tabulated h radii must start at 0 and increase strictly")
            if not np.all(np.isfinite(h)):
                raise SpecError("tabulated h must be finite (h(0) in particular)")
            self._spline = CubicSpline(r, h)
            self._antideriv = self._spline.antiderivative()
            self.domain_end = float(r[-1])
        elif kind == "constant":
            if not math.isfinite(float(params["C"])):
                raise SpecError("constant h must be finite")
        elif kind != "zero":
            raise SpecError(f"unknown bounding function kind {kind!r}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, C):
        return cls("constant", C=float(C))

    @classmethod
    def hab(cls, a, b):
        return cls("hab", a=float(a), b=float(b))

    @classmethod
    def tabulated(cls, r, h):
        return cls("tabulated", r=r, h=h)

    @property
    def is_zero(self):
        return self.kind == "zero"

    def _hab_factor(self, m):
        if m is None:
            raise ValueError("hab bounding function needs the dimension m")
        return (m - 1.0) / m

    def value(self, r, m=None):
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "constant":
            return np.full_like(r, self.params["C"])
        if self.kind == "hab":
            ka, kb = self._ka, self._kb
            diff = ka * ms.coth_minus_inv(ka * r) - kb * ms.coth_minus_inv(kb * r)
            return self._hab_factor(m) * diff
        return self._spline(r)

    def deriv(self, r, m=None):
        r = np.asarray(r, dtype=float)
        if self.kind in ("zero", "constant"):
            return np.zeros_like(r)
        if self.kind == "hab":
            ka, kb = self._ka, self._kb
            diff = ka**2 * _dcoth_minus_inv(ka * r).reshape(r.shape) - kb**2 * _dcoth_minus_inv(kb * r).reshape(r.shape)
            return self._hab_factor(m) * diff
        return self._spline.derivative()(r)

    def integral(self, r, m=None):
        """``int_0^r h(s) ds``."""
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "constant":
            return self.params["C"] * r
        if self.kind == "hab":
            return self._hab_factor(m) * (ms.log_sinhc(self._ka * r) - ms.log_sinhc(self._kb * r))
        return self._antideriv(r)

    def describe(self):
        out = {"kind": self.kind}
        if self.kind == "constant":
            out["C"] = self.params["C"]
        elif self.kind == "hab":
            out["a"], out["b"] = self.params["a"], self.params["b"]
        elif self.kind == "tabulated":
            out["points"] = int(np.size(self.params["r"]))
        return out

    def __repr__(self):
        return f"BoundingFunction({self.describe()})"


# ---------------------------------------------------------------------------
# comparison warpings


class ComparisonWarping(ms.WarpingFunction):
    """``W = w exp(-m/(m-1) int_0 h)`` evaluated in closed form."""

    def __init__(self, base, h, m):
        self.base, self.h, self.m = base, h, m
        self.c = m / (m - 1.0)
        self.domain_end = min(base.domain_end, getattr(h, "domain_end", math.inf))
        self.label = f"W[{base.label}, h={h.kind}, m={m}]"

    def log_w(self, r):
        return self.base.log_w(r) - self.c * self.h.integral(r, self.m)

    def w(self, r):
        return self.base.w(r) * np.exp(-self.c * self.h.integral(r, self.m))

    def eta(self, r):
        return self.base.eta(r) - self.c * self.h.value(r, self.m)

    def eta_minus_inv(self, r):
        return self.base.eta_minus_inv(r) - self.c * self.h.value(r, self.m)

    def eta_prime(self, r):
        return self.base.eta_prime(r) - self.c * self.h.deriv(r, self.m)

    def curvature(self, r):
        return -(self.eta_prime(r) + self.eta(r) ** 2)

    def dw(self, r):
        return self.w(r) * self.eta(r)

    def d2w(self, r):
        return -self.w(r) * self.curvature(r)


class OdeWarping(ms.WarpingFunction):
    """``W`` from integrating ``(log(W/r))' = eta_w - 1/r - m/(m-1) h`` numerically."""

    R0 = 1e-6

    def __init__(self, base, h, m, r_end, rtol=1e-12, atol=1e-14):
        self.base, self.h, self.m = base, h, m
        self.c = m / (m - 1.0)
        self.domain_end = r_end
        self.label = f"W_ode[{base.label}, h={h.kind}, m={m}]"

        def rhs(r, z):
            return [float(self._zprime(np.array([r]))[0])]

        z0 = self.R0 * float(self._zprime(np.array([self.R0]))[0])
        sol = solve_ivp(
            rhs, (self.R0, r_end), [z0], method="DOP853", rtol=rtol, atol=atol, dense_output=True
        )
        if not sol.success:
            raise NumericalError(f"ODE integration of W failed: {sol.message}")
        self._sol = sol
        self._z0 = z0

    def _zprime(self, r):
        return self.base.eta_minus_inv(r) - self.c * self.h.value(r, self.m)

    def _z(self, r):
        r = np.asarray(r, dtype=float)
        flat = r.reshape(-1)
        out = np.empty_like(flat)
        near = flat < self.R0
        out[near] = self._z0 * flat[near] / self.R0
        if np.any(~near):
            out[~near] = self._sol.sol(flat[~near])[0]
        return out.reshape(r.shape)

    def log_w(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(r) + self._z(r)

    def w(self, r):
        r = np.asarray(r, dtype=float)
        return r * np.exp(self._z(r))

    def eta(self, r):
        r = np.asarray(r, dtype=float)
        return 1.0 / r + self._zprime(r)

    def eta_prime(self, r):
        return self.base.eta_prime(r) - self.c * self.h.deriv(r, self.m)

    def curvature(self, r):
        return -(self.eta_prime(r) + self.eta(r) ** 2)

    def dw(self, r):
        return self.w(r) * self.eta(r)

    def d2w(self, r):
        return -self.w(r) * self.curvature(r)


@dataclass
class IsoComparisonSpace:
    m: int
    w: ms.WarpingFunction
    h: BoundingFunction
    W: ms.WarpingFunction
    construction_method: str
    R: float
    alternate: Optional[ms.WarpingFunction] = None
    crosscheck_error: float = 0.0

    @property
    def model(self):
        return ms.ModelSpace(self.m, self.W)

    def eta_W(self, r):
        return self.W.eta(np.asarray(r, dtype=float))


def construct_W(m, w, h, R=math.inf, method="closed_form", check_rmax=50.0, tol=CONSTRUCTION_TOL):
    """Build the isoperimetric comparison space from ``(m, w, h)``.

    Both the closed form and the ODE solution are built; the one named by
    ``method`` becomes ``space.W`` and the other is kept as
    ``space.alternate``.  They must agree to ``tol`` (relative) on a log grid
    in ``[1e-3, min(R, check_rmax)]``, otherwise :class:`NumericalError`.
    For ``h = 0`` the result is ``w`` itself, untouched.
    """
    if int(m) != m or m < 2:
        raise ValueError(f"dimension m must be an integer >= 2, got {m!r}")
    m = int(m)
    h0 = float(np.asarray(h.value(np.array([ms.R_MIN]), m)).reshape(-1)[0])
    if not math.isfinite(h0):
        raise SpecError("bounding function must be finite at r = 0")
    if method not in ("closed_form", "ode"):
        raise ValueError(f"unknown construction method {method!r}")
    R = float(R)
    if h.is_zero:
        return IsoComparisonSpace(m, w, h, w, "closed_form", R)

    closed = ComparisonWarping(w, h, m)
    r_end = min(R, closed.domain_end, check_rmax)
    if not math.isfinite(r_end):
        r_end = check_rmax
    if r_end == closed.domain_end:
        r_end *= 1.0 - 1e-9
    ode = OdeWarping(w, h, m, r_end)
    grid = ms.log_grid(1e-3, r_end, 64)
    err = float(np.max(np.abs(np.expm1(ode.log_w(grid) - closed.log_w(grid)))))
    if not err <= tol:
        raise NumericalError(
            f"closed-form and ODE constructions of W disagree by {err:.3e} (tolerance {tol:g})",
            error_estimate=err,
        )
    if method == "closed_form":
        return IsoComparisonSpace(m, w, h, closed, "closed_form", R, ode, err)
    return IsoComparisonSpace(m, w, h, ode, "ode", R, closed, err)


# ---------------------------------------------------------------------------
# balance conditions


@dataclass
class BalanceVerdict:
    balanced_above: Optional[bool] = None
    balanced_below: Optional[bool] = None
    witness_above: Optional[dict] = None
    witness_below: Optional[dict] = None
    grid: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def merge(self, other):
        out = BalanceVerdict(**{k: getattr(self, k) for k in ("balanced_above", "balanced_below",
                                                               "witness_above", "witness_below")})
        for k in ("balanced_above", "witness_above", "balanced_below", "witness_below"):
            if getattr(out, k) is None:
                setattr(out, k, getattr(other, k))
        out.grid = self.grid or other.grid
        out.warnings = list(self.warnings) + list(other.warnings)
        return out

    def to_dict(self):
        return {
            "balanced_above": self.balanced_above,
            "witness_above": self.witness_above,
            "balanced_below": self.balanced_below,
            "witness_below": self.witness_below,
            "grid": self.grid,
            "warnings": list(self.warnings),
        }


def _validate_grid(space, grid):
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size < MIN_GRID_POINTS:
        raise ValueError(f"balance grid needs at least {MIN_GRID_POINTS} points, got {grid.size}")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("balance grid must be strictly increasing")
    if grid[0] <= 0.0 or grid[0] < ms.R_MIN:
        raise DomainError("balance grid must lie in (0, R) above r_min")
    end = min(space.R, space.W.domain_end)
    if grid[-1] > end or grid[-1] >= space.W.domain_end:
        raise DomainError(f"balance grid exceeds the interval end {end!r}")
    return grid


def _grid_info(grid):
    return {"r_min": float(grid[0]), "r_max": float(grid[-1]), "n": int(grid.size)}


def check_balanced_above(space, grid, wrt=None, tol=INEQUALITY_TOL):
    """Decide ``eta_w >= 0`` and ``eta_W' <= 0`` on ``grid``.

    ``wrt`` overrides the intermediary used for ``eta_w`` (default: the
    warping ``space`` was built from).  The equivalent curvature form
    ``-(m-1)(eta_w^2 + K_w) <= m h'`` is evaluated alongside and any
    disagreement above 1e-6 is reported as a warning, not arbitrated.
    """
    grid = _validate_grid(space, grid)
    ref = space.w if wrt is None else wrt
    m = space.m
    eta_ref = ref.eta(grid)
    deta_W = space.W.eta_prime(grid)
    bad = np.maximum(-eta_ref - tol, 0.0) + np.maximum(deta_W - tol, 0.0)
    verdict = BalanceVerdict(grid=_grid_info(grid))
    verdict.balanced_above = bool(np.all(bad <= 0.0))
    if not verdict.balanced_above:
        i = int(np.argmax(bad))
        verdict.witness_above = {
            "r": float(grid[i]),
            "eta_w": float(eta_ref[i]),
            "eta_W_prime": float(deta_W[i]),
            "first_violation_r": float(grid[int(np.argmax(bad > 0.0))]),
        }

    if wrt is None or wrt is space.w:
        eta_w = space.w.eta(grid)
        lhs = -(m - 1) * (eta_w**2 + space.w.curvature(grid))
        rhs = m * space.h.deriv(grid, m)
        form_b = lhs - rhs
        form_a = (m - 1) * deta_W
        scale = 1.0 + np.abs(lhs) + np.abs(rhs)
        gap = np.abs(form_a - form_b) / scale
        sign_flip = (form_a <= tol) != (form_b <= tol)
        if np.max(gap) > CROSSCHECK_TOL or np.any(sign_flip):
            i = int(np.argmax(gap))
            msg = (
                f"eta_W' form and curvature form disagree: max scaled gap {float(gap[i]):.3e} at r={float(grid[i])!r}"
                f", sign flips at {int(np.sum(sign_flip))} radii"
            )
            logger.warning(msg)
            verdict.warnings.append(msg)
    return verdict


def check_balanced_below(space, grid, wrt=None, tol=INEQUALITY_TOL):
    """Decide ``q_W(r) (eta_w(r) - h(r)) >= 1/m`` on ``grid``."""
    grid = _validate_grid(space, grid)
    ref = space.w if wrt is None else wrt
    m = space.m
    q = ms.quotient_on_grid(space.W, m, grid)
    prod = q * (ref.eta(grid) - space.h.value(grid, m))
    bad = (1.0 / m - tol) - prod
    verdict = BalanceVerdict(grid=_grid_info(grid))
    verdict.balanced_below = bool(np.all(bad <= 0.0))
    if not verdict.balanced_below:
        i = int(np.argmax(bad))
        verdict.witness_below = {
            "r": float(grid[i]),
            "q_W_times_eta_minus_h": float(prod[i]),
            "one_over_m": 1.0 / m,
            "first_violation_r": float(grid[int(np.argmax(bad > 0.0))]),
        }
    return verdict


def check_balance(space, grid, wrt=None, tol=INEQUALITY_TOL):
    """Both balance verdicts on the same grid."""
    return check_balanced_above(space, grid, wrt, tol).merge(check_balanced_below(space, grid, wrt, tol))


# ---------------------------------------------------------------------------
# limits and Cheeger bounds


@dataclass
class LimitEstimate:
    """Tail limit of a sampled quantity with its convergence record."""

    value: Optional[float]
    last_value: float
    error_estimate: float
    converged: bool
    radii: list
    samples: list
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "value": self.value,
            "last_value": self.last_value,
            "error_estimate": self.error_estimate,
            "converged": self.converged,
            "radii": list(self.radii),
            "samples": list(self.samples),
            "warnings": list(self.warnings),
        }


def extrapolate_limit(radii, samples, tol=LIMIT_TOL):
    """Estimate ``lim`` of ``samples`` taken at geometrically growing radii.

    An already settled tail is returned as is.  Otherwise the last two
    Aitken delta-squared values must agree to ``tol`` and the successive
    differences must contract; a divergent or oscillating tail gives
    ``value=None``.
    """
    v = np.asarray(samples, dtype=float)
    last = float(v[-1])
    d = np.diff(v)
    if not np.all(np.isfinite(v)):
        return LimitEstimate(None, last, math.inf, False, list(map(float, radii)), v.tolist(),
                             ["non-finite samples in the tail"])
    scale = max(1.0, abs(last))
    if abs(d[-1]) <= tol * scale:
        return LimitEstimate(last, last, float(abs(d[-1])), True, list(map(float, radii)), v.tolist())

    def aitken(i):
        d1, d2 = d[i - 1], d[i]
        den = d2 - d1
        if den == 0.0:
            return float(v[i + 1])
        return float(v[i + 1] - d2 * d2 / den)

    warnings = []
    ratio = d[-1] / d[-2] if d[-2] != 0.0 else math.inf
    a_last, a_prev = aitken(len(d) - 1), aitken(len(d) - 2)
    err = abs(a_last - a_prev)
    if abs(ratio) < 1.0 and ratio >= 0.0 and err <= tol * max(1.0, abs(a_last)):
        return LimitEstimate(a_last, last, float(err), True, list(map(float, radii)), v.tolist())
    if ratio < 0.0:
        warnings.append("tail oscillates")
    if abs(ratio) >= 1.0:
        warnings.append(f"tail differences do not contract (ratio {ratio:.3g}); limit appears not to exist")
    else:
        warnings.append(f"extrapolated values still move by {err:.3e}")
    return LimitEstimate(None, last, float(abs(d[-1])), False, list(map(float, radii)), v.tolist(), warnings)


def _reject_positive_curvature(space):
    if isinstance(space.w, ms.SpaceForm) and space.w.b > 0:
        raise DomainError("Cheeger bounds need a pole-bearing ambient bound b <= 0")


def _probe_radii(space, r_max, n_probe):
    end = min(space.R, space.W.domain_end)
    if r_max > end or r_max >= space.W.domain_end:
        raise DomainError(f"r_max={r_max!r} exceeds the comparison interval end {end!r}")
    return r_max / 2.0 ** np.arange(n_probe - 1, -1, -1)


def cheeger_upper_value(space, r_max=40.0, n_probe=7, check_points=200):
    """Limit of ``Vol(S^W_t)/Vol(B^W_t)``, the upper Cheeger bound value.

    The balance-from-below hypothesis is checked on a log grid up to
    ``r_max`` and a warning is attached if it fails.
    """
    _reject_positive_curvature(space)
    radii = _probe_radii(space, r_max, n_probe)
    warnings = []
    verdict = check_balanced_below(space, ms.log_grid(1e-3, r_max, check_points))
    if not verdict.balanced_below:
        msg = f"comparison space is not balanced from below (witness {verdict.witness_below}); upper bound hypothesis fails"
        logger.warning(msg)
        warnings.append(msg)
    ratio = 1.0 / ms.quotient_on_grid(space.W, space.m, radii)
    est = extrapolate_limit(radii, ratio)
    est.warnings = warnings + est.warnings
    return est


def cheeger_lower_value(space, r_max=40.0, n_probe=7, check_points=200):
    """``(m-1) lim eta_W``, the lower Cheeger bound value."""
    _reject_positive_curvature(space)
    radii = _probe_radii(space, r_max, n_probe)
    warnings = []
    verdict = check_balanced_above(space, ms.log_grid(1e-3, r_max, check_points))
    if not verdict.balanced_above:
        msg = f"comparison space is not balanced from above (witness {verdict.witness_above}); lower bound hypothesis fails"
        logger.warning(msg)
        warnings.append(msg)
    samples = (space.m - 1) * space.W.eta(radii)
    if np.any(np.diff(samples) > INEQUALITY_TOL * np.maximum(1.0, np.abs(samples[1:]))):
        warnings.append("eta_W increases on the probe radii")
    est = extrapolate_limit(radii, samples)
    est.warnings = warnings + est.warnings
    if est.value is not None and est.value < -LIMIT_TOL:
        msg = f"lower bound {est.value!r} is negative and therefore vacuous"
        logger.warning(msg)
        est.warnings.append(msg)
    return est


# ---------------------------------------------------------------------------
# constellations and their file format


@dataclass
class ComparisonConstellation:
    """Ambient bound, submanifold dimension, bounding function and ``M^m_W``."""

    m: int
    w: ms.WarpingFunction
    h: BoundingFunction
    space: IsoComparisonSpace
    ambient_b: Optional[float] = None
    R: float = math.inf
    ambient_spec: dict = field(default_factory=dict)


def build_constellation(m, h, R=math.inf, b=None, w=None):
    if (b is None) == (w is None):
        raise SpecError("give exactly one of an ambient curvature bound b or an intermediary w")
    if w is None:
        w = ms.SpaceForm(b)
    space = construct_W(m, w, h, R)
    return ComparisonConstellation(m, w, h, space, b, R)


def _resolve(path, base_dir):
    return path if os.path.isabs(path) or base_dir is None else os.path.join(base_dir, path)


def bounding_from_spec(spec, base_dir=None):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("'h' must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "zero":
            return BoundingFunction.zero()
        if kind == "constant":
            return BoundingFunction.constant(spec["C"])
        if kind == "hab":
            return BoundingFunction.hab(spec["a"], spec["b"])
        if kind == "csv":
            data = _read_two_column_csv(_resolve(spec["path"], base_dir), ("r", "h"))
            return BoundingFunction.tabulated(data[:, 0], data[:, 1])
    except KeyError as exc:
        raise SpecError(f"h of kind {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad h spec: {exc}") from None
    raise SpecError(f"unknown h kind {kind!r}")


def _read_two_column_csv(path, header):
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    if not lines or [c.strip() for c in lines[0].split(",")] != list(header):
        raise SpecError(f"{path}: header must be {','.join(header)!r}")
    try:
        return np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]], dtype=float)
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc


def constellation_from_spec(spec, base_dir=None):
    """Build a :class:`ComparisonConstellation` from a parsed spec dict.

    ``{"m": 2, "ambient": {"b": -1} | {"w_csv": path} | {"profile": name},
    "h": {"kind": ...}, "R": 50}``
    """
    if not isinstance(spec, dict):
        raise SpecError("constellation spec must be a JSON object")
    try:
        m = spec["m"]
        ambient = spec["ambient"]
    except KeyError as exc:
        raise SpecError(f"constellation spec is missing {exc}") from None
    if not isinstance(m, int) or m < 2:
        raise SpecError("'m' must be an integer >= 2")
    R = float(spec.get("R", math.inf))
    if not R > 0:
        raise SpecError("'R' must be positive")
    h = bounding_from_spec(spec.get("h", {"kind": "zero"}), base_dir)
    if not isinstance(ambient, dict):
        raise SpecError("'ambient' must be an object")
    if "b" in ambient:
        b = float(ambient["b"])
        constellation = build_constellation(m, h, R, b=b)
    elif "w_csv" in ambient:
        constellation = build_constellation(m, h, R, w=ms.load_profile_csv(_resolve(ambient["w_csv"], base_dir)))
    elif "profile" in ambient:
        constellation = build_constellation(m, h, R, w=ms.analytic_profile(ambient["profile"]))
    else:
        raise SpecError("'ambient' needs one of 'b', 'w_csv' or 'profile'")
    if constellation.w.domain_end <= R and math.isfinite(R):
        raise SpecError(f"R={R!r} exceeds the intermediary domain end {constellation.w.domain_end!r}")
    constellation.ambient_spec = dict(ambient)
    return constellation


def load_constellation(path):
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read constellation {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return constellation_from_spec(spec, os.path.dirname(os.path.abspath(path)))


def constellation_report(constellation, grid_points=1000, r_min=1e-3, r_max=None, limit_rmax=40.0):
    """Balance verdicts and both Cheeger values as a JSON-ready dict."""
    space = constellation.space
    end = min(constellation.R, space.W.domain_end)
    if r_max is None:
        r_max = end if math.isfinite(end) else 50.0
    if r_max >= space.W.domain_end:
        r_max = space.W.domain_end * (1.0 - 1e-9)
    grid = ms.log_grid(r_min, r_max, grid_points)
    verdict = check_balance(space, grid)
    limit_r = min(limit_rmax, r_max)
    upper = cheeger_upper_value(space, limit_r)
    lower = cheeger_lower_value(space, limit_r)
    return jsonable({
        "m": constellation.m,
        "ambient": constellation.ambient_spec or ({"b": constellation.ambient_b}),
        "h": constellation.h.describe(),
        "R": constellation.R if math.isfinite(constellation.R) else None,
        "construction": {
            "method": space.construction_method,
            "closed_form_vs_ode_max_rel_error": space.crosscheck_error,
        },
        "balance": verdict.to_dict(),
        "cheeger_upper": upper.to_dict(),
        "cheeger_lower": lower.to_dict(),
    })


def jsonable(obj):
    """Recursively convert numpy scalars and non-finite floats for JSON."""
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj
