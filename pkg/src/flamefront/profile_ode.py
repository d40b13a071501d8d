"""Reactant profile ODE on the half line.

Solves

    lam * w'' - w' - w**alpha = 0,   x < 0,      w(0) = w'(0) = 0,

for the unique positive solution, marching outward in ``s = -x``.  The
equation is non-Lipschitz at the origin, so integration starts a small
distance ``eps`` away from it using the leading term of the small-|x|
series.

Internally the state is carried in logarithmic form::

    log_w   = ln w
    h       = -w'/w            (>= 0)
    log_I   = ln I,   I(s) = int_{-s}^0 w(t)**alpha dt
    phi     = K / I,  K(s) = int_{-s}^0 w(t)**alpha exp(-(t + s)) dt

so that nothing under- or overflows even when ``w`` is of order 1e-1000
(alpha close to one) or grows like ``s**(1/(1-alpha))``.  The plain values
``w, w', I, K`` are derived on demand.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import DOP853

ALPHA_MIN = 0.005
ALPHA_MAX = 0.995

# auto seed search: start at AUTO_SEED_START*lam, halve down to AUTO_SEED_FLOOR*lam
AUTO_SEED_START = 1e-4
AUTO_SEED_FLOOR = 1e-9

_EXP_CAP = 700.0


class ParameterError(ValueError):
    """Invalid or out-of-range model parameters."""


class IntegrationError(RuntimeError):
    """The adaptive integrator could not advance (step-size underflow etc.)."""

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


class ConsistencyError(RuntimeError):
    """A computed state violates a property the exact solution must have."""

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the profile ODE plus integration tolerances.

    ``lam`` is the inverse Lewis number and ``alpha`` the reaction order.
    ``seed_offset`` is either a positive float (distance from the origin at
    which the series seed is applied) or ``"auto"``.
    """

    lam: float
    alpha: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    seed_offset: float | str = "auto"

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ParameterError(f"lambda must be positive, got {self.lam!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0,1), got {self.alpha!r}")
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ParameterError("rel_tol and abs_tol must be positive")
        if isinstance(self.seed_offset, str):
            if self.seed_offset != "auto":
                raise ParameterError(
                    f"seed_offset must be a positive number or 'auto', got {self.seed_offset!r}")
        elif not self.seed_offset > 0:
            raise ParameterError(f"seed_offset must be positive, got {self.seed_offset!r}")

    @property
    def series_exponent(self) -> float:
        """Power ``2/(1-alpha)`` of the small-|x| behaviour."""
        return 2.0 / (1.0 - self.alpha)

    @property
    def log_series_coef(self) -> float:
        """``ln C`` with ``C = [(1-alpha)^2 / (2 lam (1+alpha))]^(1/(1-alpha))``."""
        a = self.alpha
        return math.log((1.0 - a) ** 2 / (2.0 * self.lam * (1.0 + a))) / (1.0 - a)

    @property
    def series_coef(self) -> float:
        return math.exp(self.log_series_coef)


def check_guardrails(params: ModelParams, alpha_min: float = ALPHA_MIN,
                     alpha_max: float = ALPHA_MAX) -> None:
    """Reject reaction orders too close to 0 or 1 for the numerical path.

    Outside ``[alpha_min, alpha_max]`` the exponents ``1/(1-alpha)`` and
    ``2/(1-alpha)`` make the problem badly conditioned, while the limits
    themselves have closed forms.
    """
    if params.alpha < alpha_min:
        raise ParameterError(
            f"alpha={params.alpha:g} is below {alpha_min:g}; use the closed-form "
            "limit asymptotics.front_alpha_zero (CLI: compare-asymptotics "
            "--regimes alpha-zero) instead")
    if params.alpha > alpha_max:
        raise ParameterError(
            f"alpha={params.alpha:g} is above {alpha_max:g}; use the closed-form "
            "limit asymptotics.front_alpha_one (CLI: compare-asymptotics "
            "--regimes alpha-one) instead")


def series_seed(params: ModelParams, eps: float) -> tuple[float, float]:
    """Leading-order values ``(w, w')`` at ``x = -eps``.

    ``w = C eps^n`` and ``w' = -C n eps^(n-1)`` with ``n = 2/(1-alpha)``.
    Raises ParameterError when ``w`` is not representable as a double;
    the trajectory itself works in log form and does not need this.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    n = params.series_exponent
    log_w = params.log_series_coef + n * math.log(eps)
    if log_w < math.log(np.finfo(float).tiny) or log_w > math.log(np.finfo(float).max):
        raise ParameterError(
            f"w(-eps) = exp({log_w:.1f}) is not representable for alpha={params.alpha:g}; "
            "the exponent 2/(1-alpha) is too large")
    w = math.exp(log_w)
    return w, -n * w / eps


def _series_state(params: ModelParams, s):
    """Log-form state from the leading series term, for 0 < s <= eps."""
    a = params.alpha
    n = params.series_exponent
    lnc = params.log_series_coef
    ln_s = np.log(s)
    log_w = lnc + n * ln_s
    h = n / s
    log_i = a * lnc + (n - 1.0) * ln_s - math.log(n - 1.0)
    phi = 1.0 - 0.5 * (1.0 - a) * s
    return np.array([log_w, h, log_i, phi], dtype=float)


_ORIGIN_STATE = np.array([-np.inf, np.inf, -np.inf, 1.0])


def _exp(z: float) -> float:
    return math.exp(min(z, _EXP_CAP))


def _make_rhs(lam: float, alpha: float):
    am1 = alpha - 1.0

    def rhs(s, y):
        log_w, h, log_i, phi = y
        rate = _exp(alpha * log_w - log_i)  # w^alpha / I
        return [h,
                (_exp(am1 * log_w) - h) / lam - h * h,
                rate,
                rate * (1.0 - phi) - phi]

    return rhs


class Node(NamedTuple):
    """One accepted integration node."""

    x: float
    log_w: float
    h: float
    log_I: float
    phi: float

    @property
    def w(self) -> float:
        return math.exp(self.log_w)

    @property
    def wprime(self) -> float:
        return -self.h * self.w if self.log_w > -np.inf else 0.0

    @property
    def I(self) -> float:  # noqa: E743
        return math.exp(self.log_I)

    @property
    def K(self) -> float:
        return self.phi * self.I


def _plain(state: np.ndarray) -> tuple[float, float, float, float]:
    log_w, h, log_i, phi = (float(v) for v in state)
    if log_w == -np.inf:
        return 0.0, 0.0, 0.0, 0.0
    w = math.exp(log_w)
    i = math.exp(log_i)
    return w, -h * w, i, phi * i


class WTrajectory:
    """Append-only numerical solution of the profile ODE on ``[reach, 0]``.

    Nodes are ordered by decreasing ``x``.  Node 0 is the origin itself,
    node 1 the series seed at ``x = -seed_offset``; everything after that
    comes from the adaptive integrator, whose dense output is kept for
    evaluation between nodes.

    Extension is guarded by a lock; reads never mutate, so a trajectory can
    be shared between threads once built.
    """

    def __init__(self, params: ModelParams, seed_offset: float):
        if not seed_offset > 0:
            raise ParameterError(f"seed offset must be positive, got {seed_offset!r}")
        self.params = params
        self.seed_offset = float(seed_offset)
        self._s = [0.0, self.seed_offset]
        self._y = [_ORIGIN_STATE.copy(), _series_state(params, self.seed_offset)]
        self._dense = []  # _dense[j] spans [_s[j+1], _s[j+2]]
        self._solver = None
        self._lock = threading.Lock()
        self._s_array = None

    def __repr__(self):
        return (f"WTrajectory(lam={self.params.lam:g}, alpha={self.params.alpha:g}, "
                f"seed_offset={self.seed_offset:.3g}, reach={self.reach:.6g}, "
                f"nodes={len(self._s)})")

    def __len__(self):
        return len(self._s)

    @property
    def reach(self) -> float:
        """Leftmost computed ``x`` (non-positive)."""
        return -self._s[-1]

    @property
    def nodes(self) -> list[Node]:
        return [Node(-s, *map(float, y)) for s, y in zip(self._s, self._y)]

    def node_arrays(self) -> dict[str, np.ndarray]:
        """Node data as arrays keyed by ``x, w, wprime, I, K, log_w, h, log_I, phi``."""
        s = np.array(self._s)
        y = np.array(self._y)
        log_w, h, log_i, phi = y.T
        with np.errstate(invalid="ignore", over="ignore"):
            w = np.exp(log_w)
            wprime = np.where(w > 0, -h * w, 0.0)
            i = np.exp(log_i)
        return {"x": -s, "w": w, "wprime": wprime, "I": i, "K": phi * i,
                "log_w": log_w, "h": h, "log_I": log_i, "phi": phi}

    def extend(self, x_target: float) -> WTrajectory:
        """Integrate further out until ``reach <= x_target``; returns self."""
        s_target = -float(x_target)
        if not math.isfinite(s_target):
            raise ValueError(f"x_target must be finite, got {x_target!r}")
        if s_target <= self._s[-1]:
            return self
        with self._lock:
            if self._solver is None:
                p = self.params
                self._solver = DOP853(_make_rhs(p.lam, p.alpha), self._s[1], self._y[1],
                                      t_bound=np.inf, rtol=p.rel_tol, atol=p.abs_tol)
            solver = self._solver
            h_floor = -10.0 * self.params.abs_tol
            while self._s[-1] < s_target:
                # trial stages may overflow; the error control rejects them
                with np.errstate(over="ignore", invalid="ignore"):
                    message = solver.step()
                if solver.status == "failed":
                    raise IntegrationError(
                        f"integration failed at x={-solver.t:.6g}: {message}", x=-solver.t)
                y = solver.y.copy()
                if not np.all(np.isfinite(y)):
                    raise IntegrationError(f"non-finite state at x={-solver.t:.6g}", x=-solver.t)
                if y[1] < h_floor:
                    raise ConsistencyError(
                        f"w' became positive at x={-solver.t:.6g} (w'/w={-y[1]:.3g})", x=-solver.t)
                if y[3] > 1.0 - h_floor or y[3] < h_floor:
                    raise ConsistencyError(
                        f"K/I left [0,1] at x={-solver.t:.6g} (K/I={y[3]:.6g})", x=-solver.t)
                self._dense.append(solver.dense_output())
                self._y.append(y)
                self._s.append(float(solver.t))
            self._s_array = None
        return self

    def _segment(self, s: float) -> int:
        return bisect.bisect_right(self._s, s) - 1

    def log_state(self, x: float) -> np.ndarray:
        """State ``(ln w, -w'/w, ln I, K/I)`` at a single ``x`` in ``[reach, 0]``."""
        s = -float(x)
        s_end = self._s[-1]
        if not (0.0 <= s <= s_end):
            if s < 0.0 or s > s_end * (1.0 + 1e-14):
                raise ValueError(f"x={x!r} outside the computed range [{-s_end!r}, 0]")
            s = min(max(s, 0.0), s_end)
        i = self._segment(s)
        if self._s[i] == s:
            return self._y[i].copy()
        if i == 0:
            return _series_state(self.params, s)
        return self._dense[i - 1](s)

    def log_states(self, xs) -> np.ndarray:
        """Vectorised :meth:`log_state`; returns an array of shape ``(len(xs), 4)``."""
        s = -np.asarray(xs, dtype=float).ravel()
        s_end = self._s[-1]
        if np.any(s < 0.0) or np.any(s > s_end * (1.0 + 1e-14)):
            raise ValueError(f"some x outside the computed range [{-s_end!r}, 0]")
        s = np.clip(s, 0.0, s_end)
        if self._s_array is None or len(self._s_array) != len(self._s):
            self._s_array = np.array(self._s)
        nodes = self._s_array
        seg = np.searchsorted(nodes, s, side="right") - 1
        out = np.empty((s.size, 4))
        for i in np.unique(seg):
            mask = seg == i
            if i == 0:
                with np.errstate(divide="ignore"):
                    out[mask] = _series_state(self.params, s[mask]).T
            elif i == len(nodes) - 1:
                out[mask] = self._y[i]
            else:
                out[mask] = self._dense[i - 1](s[mask]).T
        exact = nodes[seg] == s
        if np.any(exact):
            out[exact] = np.array(self._y)[seg[exact]]
        return out

    def eval(self, x: float) -> tuple[float, float, float, float]:
        """``(w, w', I, K)`` at ``x`` in ``[reach, 0]``; exact at nodes."""
        return _plain(self.log_state(x))


def build_trajectory(params: ModelParams) -> WTrajectory:
    """Create a trajectory for ``params``, choosing the seed offset if ``"auto"``.

    The automatic choice halves the offset until two successive seeds give
    ``w(x_check)`` values agreeing to ``10 * rel_tol`` (relative), with
    ``x_check = -min(1, lam)``.  The finer of the two trajectories is
    returned, already extended to ``x_check``.
    """
    if params.seed_offset != "auto":
        return WTrajectory(params, float(params.seed_offset))
    x_check = -min(1.0, params.lam)
    eps = AUTO_SEED_START * params.lam
    prev = WTrajectory(params, eps).extend(x_check)
    target = 10.0 * params.rel_tol
    while eps > AUTO_SEED_FLOOR * params.lam:
        eps *= 0.5
        cur = WTrajectory(params, eps).extend(x_check)
        if abs(cur.log_state(x_check)[0] - prev.log_state(x_check)[0]) <= target:
            return cur
        prev = cur
    raise IntegrationError(
        f"seed offset search did not reach agreement {target:.1e} "
        f"down to eps={eps:.1e}", x=x_check)

