"""Polar-angle diagnostics of the profile trajectory.

The profile ODE is read as the planar system ``q = w``, ``p = w'`` with
time ``t = x``.  Along the solution the point ``(q, p)`` stays in the
quadrant ``q >= 0, p <= 0``.  Its polar angle runs from ``0`` far upstream
to ``-pi/2`` at the origin, and it never increases along the way.
Non-increase of the angle is equivalent to the concavity-ratio inequality
``(w')^2 >= w w''``.

Since ``p/q = -h`` with ``h = -w'/w`` already part of the trajectory
state, the angle is computed as ``-atan(h)``.  This matches
``atan2(p, q)`` but stays accurate when ``q`` and ``p`` underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profile_ode import WTrajectory


@dataclass
class PolarTrace:
    """Trajectory nodes in polar form, ordered by increasing ``t`` (toward 0)."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    r: np.ndarray
    theta_angle: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if any(len(a) != n for a in (self.q, self.p, self.r, self.theta_angle)):
            raise ValueError("PolarTrace columns must have equal length")
        if n == 0:
            raise ValueError("PolarTrace must not be empty")

    def __len__(self):
        return len(self.t)

    @property
    def rows(self):
        return list(zip(self.t.tolist(), self.q.tolist(), self.p.tolist(),
                        self.r.tolist(), self.theta_angle.tolist()))


@dataclass(frozen=True)
class AngleReport:
    """Outcome of the angle monotonicity check.

    ``max_increment`` is the largest positive step of the angle between
    consecutive rows (0 if none).  ``t_location`` is the ``t`` of the row
    where that step ends (None if none).  ``violations`` lists the ``t``
    values of every step above ``tol``.
    """

    max_increment: float
    t_location: float | None
    index: int | None
    violations: tuple[float, ...]
    tol: float

    @property
    def ok(self) -> bool:
        return not self.violations


def to_polar(traj: WTrajectory) -> PolarTrace:
    """Map each node ``(x, w, w')`` to ``(t, q, p, r, angle)``.

    The origin node is a rest point where ``q = p = 0``.  It gets its
    one-sided limit angle ``-pi/2``.  Other nodes may have ``q`` and ``p``
    underflowed to zero but still carry a well-defined angle.
    """
    if len(traj) < 2:
        raise ValueError("trajectory needs at least two nodes")
    nodes = traj.node_arrays()
    order = np.argsort(nodes["x"], kind="stable")
    x = nodes["x"][order]
    q = nodes["w"][order]
    p = nodes["wprime"][order]
    h = nodes["h"][order]
    origin = ~np.isfinite(h)
    with np.errstate(invalid="ignore"):
        angle = np.where(origin, -0.5 * math.pi, -np.arctan(h))
        r = np.where(origin, 0.0, q * np.hypot(1.0, np.where(origin, 0.0, h)))
    return PolarTrace(t=x, q=q, p=p, r=r, theta_angle=angle)


def angle_monotonicity_report(trace: PolarTrace, tol: float = 1e-8) -> AngleReport:
    """Largest positive increment of the angle as ``t`` increases."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    if len(trace) == 1:
        return AngleReport(0.0, None, None, (), tol)
    d = np.diff(trace.theta_angle)
    k = int(np.argmax(d))
    worst = float(d[k])
    if worst <= 0.0:
        return AngleReport(0.0, None, None, (), tol)
    bad = np.nonzero(d > tol)[0]
    return AngleReport(max_increment=worst, t_location=float(trace.t[k + 1]), index=k + 1,
                       violations=tuple(float(trace.t[i + 1]) for i in bad), tol=tol)


def cross_increments(trace: PolarTrace) -> np.ndarray:
    """Discrete angular momentum ``q_i p_{i+1} - p_i q_{i+1}`` per step.

    It has the sign of the angle increment between the two rows.
    """
    q, p = trace.q, trace.p
    return q[:-1] * p[1:] - p[:-1] * q[1:]
