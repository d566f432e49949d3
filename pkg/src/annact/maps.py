"""A closed algebra of exact area-preserving annulus maps with analytic lifts.

Families: rigid rotations (x, y) -> (x + a, y), twists (x, y) -> (x + phi(y), y),
compactly supported local disk twists (rigid rotation by angle phi(r) inside a
chart disk, identity outside), plus composition and iteration. Every family
preserves both boundary circles, has unit Jacobian determinant, and carries the
canonical lift that is continuous in parameters and reduces to the identity at
zero parameters.

All evaluation routines are vectorized over numpy arrays; the AnnulusPoint /
LiftedPoint wrappers are thin scalar front ends.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError
from .phase_space import AnnulusPoint, LiftedPoint, wrap_turn


def _wrapped_delta(dx):
    """Signed angular difference in turns, reduced to [-0.5, 0.5)."""
    return (np.asarray(dx, dtype=float) + 0.5) % 1.0 - 0.5


# ---------------------------------------------------------------------------
# twist profiles phi: [0, 1] -> R (turns)
# ---------------------------------------------------------------------------

class TwistProfile:
    """Angular advance phi(y) of a twist, with derivative and action potential.

    potential(y) is the integral of s * phi'(s) over [0, y]; it is the action
    function of the twist with beta = y dx and base point on the lower boundary.
    """

    def phi(self, y):
        raise NotImplementedError

    def dphi(self, y):
        raise NotImplementedError

    def potential(self, y):
        raise NotImplementedError

    def negated(self) -> "TwistProfile":
        return _NegatedTwistProfile(self)

    def to_config(self) -> dict:
        raise NotImplementedError


class LinearProfile(TwistProfile):
    """phi(y) = y: the integrable linear twist."""

    def phi(self, y):
        return np.asarray(y, dtype=float)

    def dphi(self, y):
        return np.ones_like(np.asarray(y, dtype=float))

    def potential(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * y * y

    def to_config(self):
        return {"kind": "linear"}

    def __repr__(self):
        return "LinearProfile()"


class PolyBumpProfile(TwistProfile):
    """phi(y) = 16 c y^2 (1-y)^2: a polynomial bump vanishing at both boundaries.

    The normalization makes phi(1/2) = c. Closed-form potential:
    integral of s phi'(s) = 32 c (y^3/3 - 3 y^4/4 + 2 y^5/5).
    """

    def __init__(self, c: float):
        self.c = float(c)

    def phi(self, y):
        y = np.asarray(y, dtype=float)
        return 16.0 * self.c * (y * (1.0 - y)) ** 2

    def dphi(self, y):
        y = np.asarray(y, dtype=float)
        return 32.0 * self.c * y * (1.0 - y) * (1.0 - 2.0 * y)

    def potential(self, y):
        y = np.asarray(y, dtype=float)
        return 32.0 * self.c * (y**3 / 3.0 - 0.75 * y**4 + 0.4 * y**5)

    def to_config(self):
        return {"kind": "poly_bump", "c": self.c}

    def __repr__(self):
        return f"PolyBumpProfile(c={self.c!r})"


class TabulatedProfile(TwistProfile):
    """Cubic-spline profile through user samples (y_i, phi_i) on [0, 1].

    The potential uses integration by parts, y phi(y) - int_0^y phi, so only the
    spline antiderivative is needed.
    """

    def __init__(self, ys: Iterable[float], phis: Iterable[float]):
        ys = np.asarray(list(ys), dtype=float)
        phis = np.asarray(list(phis), dtype=float)
        if ys.ndim != 1 or ys.size < 4 or ys.shape != phis.shape:
            raise ValueError("need matching 1-d sample arrays with at least 4 points")
        if abs(ys[0]) > 1e-12 or abs(ys[-1] - 1.0) > 1e-12:
            raise ValueError("tabulated profile must cover [0, 1]")
        self._ys = ys
        self._phis = phis
        self._spline = CubicSpline(ys, phis)
        self._dspline = self._spline.derivative()
        self._antider = self._spline.antiderivative()

    def phi(self, y):
        return self._spline(np.asarray(y, dtype=float))

    def dphi(self, y):
        return self._dspline(np.asarray(y, dtype=float))

    def potential(self, y):
        y = np.asarray(y, dtype=float)
        return y * self._spline(y) - (self._antider(y) - self._antider(0.0))

    def to_config(self):
        return {"kind": "tabulated", "y": self._ys.tolist(), "phi": self._phis.tolist()}

    def __repr__(self):
        return f"TabulatedProfile(n={self._ys.size})"


class _NegatedTwistProfile(TwistProfile):
    def __init__(self, base: TwistProfile):
        self._base = base

    def phi(self, y):
        return -self._base.phi(y)

    def dphi(self, y):
        return -self._base.dphi(y)

    def potential(self, y):
        return -self._base.potential(y)

    def negated(self):
        return self._base

    def to_config(self):
        return {"kind": "negated", "base": self._base.to_config()}

    def __repr__(self):
        return f"negated({self._base!r})"


# ---------------------------------------------------------------------------
# radial profiles phi: [0, R] -> R (radians in the local chart)
# ---------------------------------------------------------------------------

class RadialProfile:
    """Chart rotation angle phi(r) of a local disk twist, phi(R) = 0.

    action_radial(r) is (1/2) * integral of s^2 phi'(s) over [r, R]: the
    rotation-invariant part of the twist's action function in its chart, zero
    at the support edge. With the annulus orientation omega = dy ^ dx it is
    nonpositive for phi >= 0, phi' <= 0.
    """

    R: float

    def phi(self, r):
        raise NotImplementedError

    def dphi(self, r):
        raise NotImplementedError

    def dphi_over_r(self, r):
        """phi'(r) / r with the analytic r -> 0 limit where available."""
        r = np.asarray(r, dtype=float)
        safe = np.maximum(r, 1e-9)
        return self.dphi(safe) / safe

    def action_radial(self, r):
        raise NotImplementedError

    def negated(self) -> "RadialProfile":
        return _NegatedRadialProfile(self)

    def monotone_defect(self, n: int = 256) -> float:
        """max(phi', 0) sampled on [0, R]; zero for admissible profiles."""
        rs = np.linspace(0.0, self.R, n)
        return float(np.max(np.maximum(self.dphi(rs), 0.0)))

    def to_config(self) -> dict:
        raise NotImplementedError


class PolyBumpRadial(RadialProfile):
    """phi(r) = c (1 - (r/R)^2)^2, C^1-flat at r = R.

    Closed forms:
      phi'(r)        = -(4c/R^2) r (1 - r^2/R^2)
      phi'(r)/r      = -(4c/R^2) (1 - r^2/R^2)
      action_radial  = -(2c/R^2) (R^4/12 - r^4/4 + r^6/(6 R^2))
    """

    def __init__(self, c: float, R: float):
        if not R > 0:
            raise ValueError("chart radius must be positive")
        self.c = float(c)
        self.R = float(R)

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        t = 1.0 - (r / self.R) ** 2
        return self.c * t * t

    def dphi(self, r):
        r = np.asarray(r, dtype=float)
        return -(4.0 * self.c / self.R**2) * r * (1.0 - (r / self.R) ** 2)

    def dphi_over_r(self, r):
        r = np.asarray(r, dtype=float)
        return -(4.0 * self.c / self.R**2) * (1.0 - (r / self.R) ** 2)

    def action_radial(self, r):
        r = np.asarray(r, dtype=float)
        R = self.R
        return -(2.0 * self.c / R**2) * (R**4 / 12.0 - r**4 / 4.0 + r**6 / (6.0 * R**2))

    def to_config(self):
        return {"kind": "poly_bump", "c": self.c}

    def __repr__(self):
        return f"PolyBumpRadial(c={self.c!r}, R={self.R!r})"


class TabulatedRadial(RadialProfile):
    """Cubic-spline radial profile through samples (r_i, phi_i), phi(R) = 0."""

    def __init__(self, rs: Iterable[float], phis: Iterable[float]):
        rs = np.asarray(list(rs), dtype=float)
        phis = np.asarray(list(phis), dtype=float)
        if rs.ndim != 1 or rs.size < 4 or rs.shape != phis.shape:
            raise ValueError("need matching 1-d sample arrays with at least 4 points")
        if abs(rs[0]) > 1e-12:
            raise ValueError("radial samples must start at r = 0")
        if abs(phis[-1]) > 1e-10:
            raise ValueError("radial profile must vanish at the support edge")
        self.R = float(rs[-1])
        self._rs = rs
        self._phis = phis
        self._spline = CubicSpline(rs, phis, bc_type=((1, 0.0), (1, 0.0)))
        self._dspline = self._spline.derivative()
        # antiderivative of s * phi(s), for action_radial by parts
        self._sphi_antider = CubicSpline(rs, rs * phis).antiderivative()

    def phi(self, r):
        return self._spline(np.asarray(r, dtype=float))

    def dphi(self, r):
        return self._dspline(np.asarray(r, dtype=float))

    def action_radial(self, r):
        # (1/2) int_r^R s^2 phi' = (1/2)[s^2 phi]_r^R - int_r^R s phi
        r = np.asarray(r, dtype=float)
        tail = self._sphi_antider(self.R) - self._sphi_antider(r)
        return -0.5 * r * r * self._spline(r) - tail

    def to_config(self):
        return {"kind": "tabulated", "r": self._rs.tolist(), "phi": self._phis.tolist()}

    def __repr__(self):
        return f"TabulatedRadial(n={self._rs.size}, R={self.R!r})"


class _NegatedRadialProfile(RadialProfile):
    def __init__(self, base: RadialProfile):
        self._base = base
        self.R = base.R

    def phi(self, r):
        return -self._base.phi(r)

    def dphi(self, r):
        return -self._base.dphi(r)

    def dphi_over_r(self, r):
        return -self._base.dphi_over_r(r)

    def action_radial(self, r):
        return -self._base.action_radial(r)

    def negated(self):
        return self._base

    def to_config(self):
        return {"kind": "negated", "base": self._base.to_config()}


# ---------------------------------------------------------------------------
# map expressions
# ---------------------------------------------------------------------------

class MapExpr:
    """Immutable area-preserving map of the annulus with a canonical lift."""

    def apply_lift(self, xt, y):
        """Vectorized lift evaluation: arrays (xt, y) -> (xt', y')."""
        raise NotImplementedError

    def jacobian(self, x, y):
        """Vectorized differential, shape (..., 2, 2); depends on x mod 1 only."""
        raise NotImplementedError

    def leaves(self) -> list["MapExpr"]:
        """Primitive factors in application order (innermost first)."""
        return [self]

    def inverse(self) -> "MapExpr":
        raise NotImplementedError

    def boundary_displacement(self, which: str) -> float:
        """Exact lift displacement of the boundary restriction (a rigid circle
        rotation for every member of this algebra)."""
        raise NotImplementedError

    def is_y_preserving(self) -> bool:
        """True when no factor moves the radial coordinate."""
        return all(not isinstance(m, LocalDiskTwist) for m in self.leaves())

    def describe(self) -> str:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    # conveniences -----------------------------------------------------------

    def __call__(self, p: AnnulusPoint) -> AnnulusPoint:
        return eval_map(self, p)

    def iterate(self, k: int) -> "MapExpr":
        return Iterate(self, k)


class RigidRotation(MapExpr):
    def __init__(self, a: float):
        self.a = float(a)

    def apply_lift(self, xt, y):
        return np.asarray(xt, dtype=float) + self.a, np.asarray(y, dtype=float)

    def jacobian(self, x, y):
        shape = np.broadcast(np.asarray(x, dtype=float), np.asarray(y, dtype=float)).shape
        out = np.zeros(shape + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        return out

    def inverse(self):
        return RigidRotation(-self.a)

    def boundary_displacement(self, which):
        _check_which(which)
        return self.a

    def describe(self):
        return f"rigid(a={self.a!r})"

    def to_config(self):
        return {"variant": "rigid_rotation", "a": self.a}

    def __repr__(self):
        return f"RigidRotation({self.a!r})"


class Twist(MapExpr):
    def __init__(self, profile: TwistProfile):
        self.profile = profile

    def apply_lift(self, xt, y):
        y = np.asarray(y, dtype=float)
        return np.asarray(xt, dtype=float) + self.profile.phi(y), y

    def jacobian(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        out = np.zeros(shape + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 0, 1] = self.profile.dphi(y)
        out[..., 1, 1] = 1.0
        return out

    def inverse(self):
        return Twist(self.profile.negated())

    def boundary_displacement(self, which):
        _check_which(which)
        return float(self.profile.phi(0.0 if which == "lower" else 1.0))

    def describe(self):
        return f"twist({self.profile!r})"

    def to_config(self):
        return {"variant": "twist", "profile": self.profile.to_config()}

    def __repr__(self):
        return f"Twist({self.profile!r})"


class LocalDiskTwist(MapExpr):
    """Rigid rotation by angle phi(r) on each chart circle of radius r < R
    about an interior center; exact identity outside the chart disk.

    The chart uses euclidean offsets (u, v) = (x - cx wrapped, y - cy), which
    is isometric because x is measured in turns. R < min(cy, 1 - cy) <= 1/2
    keeps the disk inside the annulus and away from x-wraparound.
    """

    def __init__(self, center: AnnulusPoint, radius: float, profile: RadialProfile):
        if not isinstance(center, AnnulusPoint):
            center = AnnulusPoint(*center)
        limit = min(center.y, 1.0 - center.y)
        if not 0.0 < radius < limit:
            raise ValueError(f"radius must lie in (0, {limit}) for center y={center.y}")
        if abs(profile.R - radius) > 1e-12 * max(1.0, radius):
            raise ValueError("profile support does not match the chart radius")
        self.center = center
        self.radius = float(radius)
        self.profile = profile

    @staticmethod
    def poly_bump(center, radius: float, c: float) -> "LocalDiskTwist":
        if not isinstance(center, AnnulusPoint):
            center = AnnulusPoint(*center)
        return LocalDiskTwist(center, radius, PolyBumpRadial(c, radius))

    def chart_offsets(self, xt, y):
        u = _wrapped_delta(np.asarray(xt, dtype=float) - self.center.x)
        v = np.asarray(y, dtype=float) - self.center.y
        return u, v

    def apply_lift(self, xt, y):
        xt = np.asarray(xt, dtype=float)
        y = np.asarray(y, dtype=float)
        u, v = self.chart_offsets(xt, y)
        r = np.hypot(u, v)
        inside = r < self.radius
        ang = self.profile.phi(np.minimum(r, self.radius))
        ca, sa = np.cos(ang), np.sin(ang)
        du = np.where(inside, u * ca - v * sa - u, 0.0)
        dv = np.where(inside, u * sa + v * ca - v, 0.0)
        return xt + du, y + dv

    def jacobian(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u, v = self.chart_offsets(x, y)
        r = np.hypot(u, v)
        inside = r < self.radius
        rc = np.minimum(r, self.radius)
        ang = self.profile.phi(rc)
        k = self.profile.dphi_over_r(rc)
        ca, sa = np.cos(ang), np.sin(ang)
        # D = Rot(phi) + (phi'/r) (Rot'(phi) w) w^T, w = (u, v)
        gu = -sa * u - ca * v
        gv = ca * u - sa * v
        shape = np.broadcast(u, v).shape
        out = np.zeros(shape + (2, 2))
        one = np.ones(shape)
        zero = np.zeros(shape)
        out[..., 0, 0] = np.where(inside, ca + k * gu * u, one)
        out[..., 0, 1] = np.where(inside, -sa + k * gu * v, zero)
        out[..., 1, 0] = np.where(inside, sa + k * gv * u, zero)
        out[..., 1, 1] = np.where(inside, ca + k * gv * v, one)
        return out

    def inverse(self):
        return LocalDiskTwist(self.center, self.radius, self.profile.negated())

    def boundary_displacement(self, which):
        _check_which(which)
        return 0.0

    def describe(self):
        return (
            f"disk_twist(cx={self.center.x!r},cy={self.center.y!r},"
            f"R={self.radius!r},{self.profile!r})"
        )

    def to_config(self):
        return {
            "variant": "local_disk_twist",
            "center": [self.center.x, self.center.y],
            "radius": self.radius,
            "profile": self.profile.to_config(),
        }

    def __repr__(self):
        return self.describe()


class Compose(MapExpr):
    """outer o inner: inner is applied first."""

    def __init__(self, outer: MapExpr, inner: MapExpr):
        self.outer = outer
        self.inner = inner

    def apply_lift(self, xt, y):
        xt1, y1 = self.inner.apply_lift(xt, y)
        return self.outer.apply_lift(xt1, y1)

    def jacobian(self, x, y):
        xt1, y1 = self.inner.apply_lift(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        ji = self.inner.jacobian(x, y)
        jo = self.outer.jacobian(xt1, y1)
        return jo @ ji

    def leaves(self):
        return self.inner.leaves() + self.outer.leaves()

    def inverse(self):
        return Compose(self.inner.inverse(), self.outer.inverse())

    def boundary_displacement(self, which):
        return self.inner.boundary_displacement(which) + self.outer.boundary_displacement(which)

    def describe(self):
        return f"({self.outer.describe()} o {self.inner.describe()})"

    def to_config(self):
        return {"variant": "compose", "outer": self.outer.to_config(), "inner": self.inner.to_config()}

    def __repr__(self):
        return f"Compose({self.outer!r}, {self.inner!r})"


class Iterate(MapExpr):
    def __init__(self, base: MapExpr, k: int):
        k = int(k)
        if k < 1:
            raise ValueError("iteration count must be a positive integer")
        self.base = base
        self.k = k

    def apply_lift(self, xt, y):
        xt = np.asarray(xt, dtype=float)
        y = np.asarray(y, dtype=float)
        for _ in range(self.k):
            xt, y = self.base.apply_lift(xt, y)
        return xt, y

    def jacobian(self, x, y):
        xt = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        jac = self.base.jacobian(xt, y)
        for _ in range(self.k - 1):
            xt, y = self.base.apply_lift(xt, y)
            jac = self.base.jacobian(xt, y) @ jac
        return jac

    def leaves(self):
        return self.base.leaves() * self.k

    def inverse(self):
        return Iterate(self.base.inverse(), self.k)

    def boundary_displacement(self, which):
        return self.k * self.base.boundary_displacement(which)

    def describe(self):
        return f"({self.base.describe()})^{self.k}"

    def to_config(self):
        return {"variant": "iterate", "base": self.base.to_config(), "k": self.k}

    def __repr__(self):
        return f"Iterate({self.base!r}, {self.k})"


def compose_chain(factors: list[MapExpr]) -> MapExpr | None:
    """Compose primitive factors given in application order; None for empty."""
    expr = None
    for f in factors:
        expr = f if expr is None else Compose(f, expr)
    return expr


def _check_which(which: str):
    if which not in ("lower", "upper"):
        raise ValueError("boundary selector must be 'lower' or 'upper'")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_map(m: MapExpr, p: AnnulusPoint) -> AnnulusPoint:
    xt, y = m.apply_lift(p.x, p.y)
    frac, _ = wrap_turn(float(xt))
    return AnnulusPoint(frac, float(y))


def eval_lift(m: MapExpr, p: LiftedPoint) -> LiftedPoint:
    xt, y = m.apply_lift(p.xt, p.y)
    return LiftedPoint(float(xt), float(y))


def differential(m: MapExpr, p: AnnulusPoint) -> np.ndarray:
    return m.jacobian(p.x, p.y)


def finite_difference_jacobian(m: MapExpr, xt, y, h: float = 1e-6) -> np.ndarray:
    """Central-difference differential of the lift; oracle for the analytic one."""
    xt = np.asarray(xt, dtype=float)
    y = np.asarray(y, dtype=float)
    yp = np.minimum(y + h, 1.0)
    ym = np.maximum(y - h, 0.0)
    fx1, fy1 = m.apply_lift(xt + h, y)
    fx0, fy0 = m.apply_lift(xt - h, y)
    gx1, gy1 = m.apply_lift(xt, yp)
    gx0, gy0 = m.apply_lift(xt, ym)
    shape = np.broadcast(xt, y).shape
    out = np.empty(shape + (2, 2))
    out[..., 0, 0] = (fx1 - fx0) / (2 * h)
    out[..., 1, 0] = (fy1 - fy0) / (2 * h)
    out[..., 0, 1] = (gx1 - gx0) / (yp - ym)
    out[..., 1, 1] = (gy1 - gy0) / (yp - ym)
    return out


def area_defect(m: MapExpr, n: int = 64) -> float:
    """max |det(differential) - 1| over an n x n audit grid."""
    if n < 2:
        raise ValueError("audit grid needs n >= 2")
    xs = (np.arange(n, dtype=float) + 0.5) / n
    ys = np.linspace(0.0, 1.0, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    jac = m.jacobian(X, Y)
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    return float(np.max(np.abs(det - 1.0)))


@dataclass(frozen=True)
class BoundaryCircleMap:
    """Lifted circle map of a boundary restriction.

    displacement is the exact per-step advance: every member of this algebra
    restricts to a rigid rotation on each boundary circle (rotations and twists
    advance by a constant there, disk twists are the identity, and composition
    adds displacements).
    """

    map: MapExpr
    which: str
    displacement: float

    @property
    def y_boundary(self) -> float:
        return 0.0 if self.which == "lower" else 1.0

    def __call__(self, xt):
        out, _ = self.map.apply_lift(np.asarray(xt, dtype=float), np.full_like(np.asarray(xt, dtype=float), self.y_boundary))
        return out

    def orbit(self, x0: float, n: int) -> np.ndarray:
        """Lifted boundary orbit x_0 .. x_n (n+1 points), computed exactly from
        the rigid displacement."""
        return float(x0) + self.displacement * np.arange(n + 1, dtype=float)


def boundary_circle_map(m: MapExpr, which: str) -> BoundaryCircleMap:
    _check_which(which)
    return BoundaryCircleMap(m, which, m.boundary_displacement(which))


# ---------------------------------------------------------------------------
# construction from configuration dictionaries and CLI shorthand
# ---------------------------------------------------------------------------

def _twist_profile_from_config(cfg: dict) -> TwistProfile:
    kind = cfg.get("kind")
    if kind == "linear":
        return LinearProfile()
    if kind == "poly_bump":
        return PolyBumpProfile(float(cfg["c"]))
    if kind == "tabulated":
        return TabulatedProfile(cfg["y"], cfg["phi"])
    raise ConfigError(f"unknown twist profile kind: {kind!r}")


def _radial_profile_from_config(cfg: dict, radius: float) -> RadialProfile:
    kind = cfg.get("kind")
    if kind == "poly_bump":
        return PolyBumpRadial(float(cfg["c"]), radius)
    if kind == "tabulated":
        return TabulatedRadial(cfg["r"], cfg["phi"])
    raise ConfigError(f"unknown radial profile kind: {kind!r}")


def map_from_config(cfg: dict) -> MapExpr:
    """Build a MapExpr from its JSON configuration (variant tag + parameters)."""
    if not isinstance(cfg, dict):
        raise ConfigError("map configuration must be an object")
    variant = cfg.get("variant")
    try:
        if variant == "rigid_rotation":
            return RigidRotation(float(cfg["a"]))
        if variant == "twist":
            return Twist(_twist_profile_from_config(cfg["profile"]))
        if variant == "local_disk_twist":
            cx, cy = cfg["center"]
            radius = float(cfg["radius"])
            profile = _radial_profile_from_config(cfg["profile"], radius)
            return LocalDiskTwist(AnnulusPoint(float(cx), float(cy)), radius, profile)
        if variant == "compose":
            return Compose(map_from_config(cfg["outer"]), map_from_config(cfg["inner"]))
        if variant == "iterate":
            return Iterate(map_from_config(cfg["base"]), int(cfg["k"]))
    except KeyError as e:
        raise ConfigError(f"map variant {variant!r} is missing field {e.args[0]!r}") from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad parameter for map variant {variant!r}: {e}") from e
    raise ConfigError(f"unknown map variant: {variant!r}")


def map_from_shorthand(text: str) -> MapExpr:
    """Parse the compact CLI syntax.

    Grammar: factors separated by '*' compose left-to-right as outer*inner;
    a trailing '^k' iterates a factor. Factors:
      rigid:a=0.618
      twist:linear | twist:bump,c=0.2 | twist:poly_bump,c=0.2
      disk:cx=0.5,cy=0.5,R=0.35,c=50.85
    """
    def parse_factor(tok: str) -> MapExpr:
        tok = tok.strip()
        power = 1
        if "^" in tok:
            tok, _, ptxt = tok.rpartition("^")
            try:
                power = int(ptxt)
            except ValueError:
                raise ConfigError(f"bad iteration count {ptxt!r}") from None
        if ":" not in tok:
            raise ConfigError(f"map factor {tok!r} needs the form family:params")
        family, _, params = tok.partition(":")
        kv = {}
        flags = []
        for item in params.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" in item:
                k, _, v = item.partition("=")
                try:
                    kv[k.strip()] = float(v)
                except ValueError:
                    raise ConfigError(f"bad numeric value in {item!r}") from None
            else:
                flags.append(item)
        family = family.strip().lower()
        if family == "rigid":
            base = RigidRotation(kv.get("a", 0.0))
        elif family == "twist":
            if "linear" in flags or not (kv or flags):
                base = Twist(LinearProfile())
            elif "bump" in flags or "poly_bump" in flags:
                base = Twist(PolyBumpProfile(kv.get("c", 1.0)))
            else:
                raise ConfigError(f"unknown twist shorthand {params!r}")
        elif family == "disk":
            try:
                base = LocalDiskTwist.poly_bump(
                    AnnulusPoint(kv["cx"], kv["cy"]), kv["R"], kv.get("c", 1.0)
                )
            except KeyError as e:
                raise ConfigError(f"disk shorthand needs cx, cy, R (missing {e.args[0]})") from None
        else:
            raise ConfigError(f"unknown map family {family!r}")
        return base if power == 1 else Iterate(base, power)

    parts = [p for p in text.split("*") if p.strip()]
    if not parts:
        raise ConfigError("empty map expression")
    expr = parse_factor(parts[-1])
    for tok in reversed(parts[:-1]):
        expr = Compose(parse_factor(tok), expr)
    return expr
