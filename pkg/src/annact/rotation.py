"""Rotation numbers of points, boundary circles and invariant measures.

All rotation quantities are scalars in turns per iterate: the annulus reduces
the rotation vector to the pairing with dx, i.e. the average x-advance in the
universal cover. The mean rotation number of the area measure is computed as
a one-step displacement integral, which the invariance of the area measure
makes equivalent to the long-orbit average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import ActionContext, MeasureSpec, measure_action
from .maps import MapExpr, RigidRotation, Twist, boundary_circle_map, eval_map
from .phase_space import AnnulusPoint
from .quadrature import displacement_descriptor, tree_field_integral

ROTATION_TOL = 1e-6


@dataclass(frozen=True)
class RotationValue:
    """A rotation number in turns per iterate with an error estimate.

    exact is True when the value comes from a closed form or integer winding
    bookkeeping, in which case the error estimate is zero.
    """

    value: float
    error_estimate: float
    exact: bool = False

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error estimate must be nonnegative")
        if self.exact and self.error_estimate != 0.0:
            raise ValueError("exact rotation values carry zero error")


def _closed_form_point_rotation(m: MapExpr, p: AnnulusPoint) -> RotationValue | None:
    if isinstance(m, RigidRotation):
        return RotationValue(m.a, 0.0, exact=True)
    if isinstance(m, Twist):
        return RotationValue(float(m.profile.phi(p.y)), 0.0, exact=True)
    q = eval_map(m, p)
    if q.x == p.x and q.y == p.y:
        # a fixed point advances by an exact integer per step
        xt2, _ = m.apply_lift(p.x, p.y)
        return RotationValue(float(np.round(xt2 - p.x)), 0.0, exact=True)
    return None


def rotation_number_point(m: MapExpr, p: AnnulusPoint, n_iter: int = 100_000) -> RotationValue:
    """Average lift displacement along the orbit of p.

    Closed forms are used for rigid rotations, twists, and fixed points; the
    generic path iterates the lift and reports the tail fluctuation (the max
    deviation of the averages at n/2 and 3n/4 from the average at n) as the
    error estimate. Non-convergence is reported through the estimate, not
    raised; callers decide.
    """
    if n_iter < 1000:
        raise ValueError("rotation averages need n_iter >= 1000")
    closed = _closed_form_point_rotation(m, p)
    if closed is not None:
        return closed
    xt, y = float(p.x), float(p.y)
    x0 = xt
    checkpoints = {n_iter // 2: None, (3 * n_iter) // 4: None}
    for j in range(1, n_iter + 1):
        xt2, y2 = m.apply_lift(xt, y)
        xt, y = float(xt2), float(y2)
        if j in checkpoints:
            checkpoints[j] = (xt - x0) / j
    value = (xt - x0) / n_iter
    err = max(abs(v - value) for v in checkpoints.values())
    return RotationValue(value, err, exact=False)


def boundary_rotation_number(m: MapExpr, which: str, n_iter: int | None = None) -> RotationValue:
    """Poincare rotation number of a boundary restriction.

    Every map in this algebra restricts to a rigid circle rotation on each
    boundary (constant lift displacement), so the Birkhoff limit is attained
    exactly; the displacement is read off the factor tree.
    """
    bcm = boundary_circle_map(m, which)
    return RotationValue(bcm.displacement, 0.0, exact=True)


def mean_rotation_area(m: MapExpr, tol: float = 1e-9) -> RotationValue:
    """Mean rotation number of the area measure: the integral of the one-step
    lift displacement over the unit-area annulus."""
    value, err = tree_field_integral(m, displacement_descriptor, tol=tol)
    return RotationValue(value, err, exact=False)


def measure_rotation(m: MapExpr, mu: MeasureSpec, n_iter: int = 100_000) -> RotationValue:
    """Rotation number of an invariant measure."""
    if mu.variant == "area":
        return mean_rotation_area(m)
    if mu.variant == "boundary_lower":
        return boundary_rotation_number(m, "lower")
    if mu.variant == "boundary_upper":
        return boundary_rotation_number(m, "upper")
    if mu.variant == "orbit":
        orbit = mu.orbit
        return RotationValue(orbit.p / orbit.q, 0.0, exact=True)
    if mu.variant == "empirical":
        return rotation_number_point(m, mu.seed, n_iter=max(n_iter, mu.n_iter))
    raise ValueError(f"unknown measure variant {mu.variant!r}")


def lemma_boundary_identity_defect(m: MapExpr, n_iter: int = 1_000_000) -> float:
    """Residual of the boundary identity

        rho(area) = A(mu_lower) - A(mu_upper) + rho_upper

    with the canonical primitive, all four quantities computed independently."""
    ctx = ActionContext.default()
    rho_area = mean_rotation_area(m).value
    a_lower = measure_action(m, ctx, MeasureSpec("boundary_lower", n_iter=n_iter)).value
    a_upper = measure_action(m, ctx, MeasureSpec("boundary_upper", n_iter=n_iter)).value
    rho_upper = boundary_rotation_number(m, "upper").value
    return abs(rho_area - (a_lower - a_upper + rho_upper))
