"""Front speed, reaction-zone width and profiles from the reactant profile.

With ``w`` the solution of the profile ODE, define for ``x > 0``

    phi(x)  = int_{-x}^0 w^alpha(s) exp(-(s+x)) ds / int_{-x}^0 w^alpha(s) ds
    zeta(x) = (int_{-x}^0 w^alpha(s) ds)^((1-alpha)/2)

``phi`` decreases strictly from 1 to 0, so ``phi(sigma) = theta`` has a
single root ``sigma*``.  Then ``c* = zeta(sigma*)`` and ``R* = sigma*/c*``.
In the reaction zone ``-R* < xi < 0`` the reactant is
``v(xi) = A w(c xi)`` with ``A = c^(-2/(1-alpha))``.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .profile_ode import (ModelParams, ParameterError, WTrajectory, build_trajectory,
                          check_guardrails)

DEFAULT_SIGMA_TOL = 1e-10
DEFAULT_MAX_X = 1e6
MAX_X_ENV = "FLAMEFRONT_MAX_X"

# Gauss-Legendre rule used for per-step quadrature of the dense output
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


class BracketError(RuntimeError):
    """No upper bracket for ``phi(x) = theta`` below the configured ceiling."""

    def __init__(self, message: str, x: float, phi: float):
        super().__init__(message)
        self.x = x
        self.phi = phi


def default_max_x() -> float:
    """Bracket ceiling, overridable through ``FLAMEFRONT_MAX_X``."""
    raw = os.environ.get(MAX_X_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_X
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError(f"{MAX_X_ENV} must be a number, got {raw!r}") from None
    if not value > 0:
        raise ParameterError(f"{MAX_X_ENV} must be positive, got {raw!r}")
    return value


@lru_cache(maxsize=64)
def trajectory_for(params: ModelParams) -> WTrajectory:
    """Shared trajectory per parameter set so repeated solves reuse integration work."""
    check_guardrails(params)
    return build_trajectory(params)


def _check_x(x: float) -> float:
    x = float(x)
    if not x > 0:
        raise ValueError(f"x must be positive, got {x!r}")
    return x


def phi(traj: WTrajectory, x: float) -> float:
    """Ratio of the damped to the plain reaction integral over ``[-x, 0]``."""
    x = _check_x(x)
    traj.extend(-x)
    return float(traj.log_state(-x)[3])


def zeta(traj: WTrajectory, x: float) -> float:
    """``I(x)^((1-alpha)/2)``; increasing in ``x``."""
    x = _check_x(x)
    traj.extend(-x)
    log_i = float(traj.log_state(-x)[2])
    return math.exp(0.5 * (1.0 - traj.params.alpha) * log_i)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 < theta < 1.0:
        raise ParameterError(f"theta must lie in (0,1), got {theta!r}")
    return theta


def solve_sigma(params: ModelParams, theta: float, tol: float = DEFAULT_SIGMA_TOL, *,
                traj: WTrajectory | None = None, max_x: float | None = None) -> float:
    """Root of ``phi(sigma) = theta`` by bracketing bisection.

    The bracket starts at ``[lam/2, lam]`` and is widened by doubling (or
    halving) until it straddles ``theta``; bisection then runs until its
    width is below ``tol`` relative to the upper end.
    """
    theta = _check_theta(theta)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if traj is None:
        traj = trajectory_for(params)
    if max_x is None:
        max_x = default_max_x()

    hi = params.lam
    f_hi = phi(traj, hi)
    if f_hi > theta:
        lo = hi
        while f_hi > theta:
            lo = hi
            if 2.0 * hi > max_x:
                raise BracketError(
                    f"phi stays above theta={theta:g} up to x={hi:.6g} "
                    f"(phi={f_hi:.6g}); raise {MAX_X_ENV}", x=hi, phi=f_hi)
            hi *= 2.0
            f_hi = phi(traj, hi)
    else:
        lo = hi
        f_lo = f_hi
        while f_lo <= theta:
            hi = lo
            lo *= 0.5
            if lo < 1e-300:
                raise BracketError(f"phi stays below theta={theta:g} near x=0", x=lo, phi=f_lo)
            f_lo = phi(traj, lo)

    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        f_mid = phi(traj, mid)
        if f_mid == theta:
            return mid
        if f_mid > theta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FrontSolution:
    """Traveling front for one ``(theta, lam, alpha)``.

    ``sigma_star = c_star * r_star``; ``a_coef`` is the amplitude of the
    upstream reactant deficit ``v = 1 - a exp(c (xi + R) / lam)``.
    """

    theta: float
    params: ModelParams
    sigma_star: float
    c_star: float
    r_star: float
    a_coef: float
    traj: WTrajectory = field(repr=False, compare=False)

    @property
    def log_amplitude(self) -> float:
        """``ln A`` with ``A = c^(-2/(1-alpha))``."""
        return -2.0 / (1.0 - self.params.alpha) * math.log(self.c_star)

    def reactant(self, xi):
        """``(v, v')`` in the reaction zone ``-R <= xi <= 0``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        states = self.traj.log_states(self.c_star * xi)
        log_w, h = states[:, 0], states[:, 1]
        with np.errstate(invalid="ignore"):
            v = np.exp(self.log_amplitude + log_w)
            vprime = np.where(v > 0.0, -self.c_star * h * v, 0.0)
        return v, vprime

    def reaction_rate(self, xi):
        """``v^alpha`` in the reaction zone."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        log_w = self.traj.log_states(self.c_star * xi)[:, 0]
        return np.exp(self.params.alpha * (self.log_amplitude + log_w))

    def upstream(self, xi):
        """``(u, v, u', v')`` ahead of the ignition interface, ``xi <= -R``."""
        xi = np.asarray(xi, dtype=float)
        c, lam = self.c_star, self.params.lam
        eu = np.exp(c * (xi + self.r_star))
        ev = np.exp(c * (xi + self.r_star) / lam)
        return (self.theta * eu, 1.0 - self.a_coef * ev,
                c * self.theta * eu, -c * self.a_coef / lam * ev)


def solve_front(params: ModelParams, theta: float, tol: float = DEFAULT_SIGMA_TOL, *,
                traj: WTrajectory | None = None) -> FrontSolution:
    if traj is None:
        traj = trajectory_for(params)
    sigma = solve_sigma(params, theta, tol, traj=traj)
    state = traj.log_state(-sigma)
    c = math.exp(0.5 * (1.0 - params.alpha) * state[2])
    r = sigma / c
    log_a = -2.0 / (1.0 - params.alpha) * math.log(c)
    a = 1.0 - math.exp(log_a + state[0])
    return FrontSolution(theta=float(theta), params=params, sigma_star=sigma,
                         c_star=c, r_star=r, a_coef=a, traj=traj)


@dataclass
class ProfileTable:
    """Sampled front on ``[xi_min, 0]`` with the interface positions.

    Behind ``xi_tr = 0`` the state is ``u = 1, v = 0``.  ``temperature`` is
    the dense solution ``xi -> (u, u')`` of the reaction-zone temperature
    equation, kept for residual checks.
    """

    xi: np.ndarray
    u: np.ndarray
    v: np.ndarray
    uprime: np.ndarray
    vprime: np.ndarray
    xi_ign: float
    xi_tr: float = 0.0
    temperature: object = field(default=None, repr=False)

    @property
    def rows(self):
        return list(zip(self.xi.tolist(), self.u.tolist(), self.v.tolist(),
                        self.uprime.tolist(), self.vprime.tolist()))

    @property
    def reaction_zone(self) -> np.ndarray:
        return self.xi >= self.xi_ign


def _integrate_temperature(front: FrontSolution):
    """Solve ``u'' - c u' = -v^alpha`` from ``u(0)=1, u'(0)=0`` back to ``-R``."""
    c = front.c_star
    alpha = front.params.alpha
    log_a = front.log_amplitude
    traj = front.traj

    def rhs(xi, y):
        log_w = traj.log_state(c * xi)[0]
        rate = math.exp(alpha * (log_a + log_w)) if log_w > -np.inf else 0.0
        return [y[1], c * y[1] - rate]

    sol = solve_ivp(rhs, (0.0, -front.r_star), [1.0, 0.0], method="DOP853",
                    rtol=max(front.params.rel_tol, 1e-13), atol=front.params.abs_tol,
                    dense_output=True)
    if not sol.success:
        raise RuntimeError(f"temperature integration failed: {sol.message}")
    return sol.sol


def reconstruct_profiles(front: FrontSolution, xi_min: float | None = None,
                         n_points: int = 200) -> ProfileTable:
    """Assemble ``(xi, u, v, u', v')`` over the upstream and reaction regions.

    The reaction zone gets ``n_points`` uniform samples on ``[-R, 0]``, the
    upstream region ``ceil(n_points/2)`` on ``[xi_min, -R)``.  ``xi_min``
    defaults to five upstream e-folding lengths, ``-R - 5/c``.
    """
    if n_points < 16:
        raise ValueError(f"n_points must be at least 16, got {n_points}")
    r, c = front.r_star, front.c_star
    if xi_min is None:
        xi_min = -r - 5.0 / c
    if not xi_min < -r:
        raise ValueError(f"xi_min={xi_min!r} must lie left of the ignition point {-r!r}")

    n_up = math.ceil(n_points / 2)
    xi_up = np.linspace(xi_min, -r, n_up + 1)[:-1]
    u_up, v_up, du_up, dv_up = front.upstream(xi_up)

    xi_rz = np.linspace(-r, 0.0, n_points)
    temperature = _integrate_temperature(front)
    u_rz, du_rz = temperature(xi_rz)
    v_rz, dv_rz = front.reactant(xi_rz)
    # pin the trailing interface exactly
    u_rz[-1], du_rz[-1], v_rz[-1], dv_rz[-1] = 1.0, 0.0, 0.0, 0.0

    return ProfileTable(xi=np.concatenate([xi_up, xi_rz]),
                        u=np.concatenate([u_up, u_rz]),
                        v=np.concatenate([v_up, v_rz]),
                        uprime=np.concatenate([du_up, du_rz]),
                        vprime=np.concatenate([dv_up, dv_rz]),
                        xi_ign=-r, xi_tr=0.0, temperature=temperature)


@dataclass(frozen=True)
class ResidualReport:
    """Maximum absolute residuals of the front conditions.

    res_ign: ``u(-R) = theta`` and ``u'(-R) = c theta``.
    res_flux: ``c (1 - v(-R)) + lam v'(-R) = 0`` (consistency of ``a``).
    res_ode: pointwise residual of both reaction-zone equations.
    res_c_identity: ``c = int v^alpha``.
    res_theta_identity: ``c theta = int v^alpha exp(-c (xi + R))``.
    """

    res_ign: float
    res_flux: float
    res_ode: float
    res_c_identity: float
    res_theta_identity: float

    def max(self) -> float:
        return max(asdict(self).values())

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def reaction_integrals(front: FrontSolution) -> tuple[float, float]:
    """``int v^alpha`` and ``int v^alpha exp(-c (xi + R))`` over the reaction zone.

    Computed by Gauss-Legendre quadrature on every integration step of the
    profile, independently of the running integrals carried by the ODE.
    """
    traj = front.traj
    alpha = front.params.alpha
    sigma = front.sigma_star
    c = front.c_star
    nodes = -traj.node_arrays()["x"]
    cuts = np.concatenate([nodes[nodes < sigma], [sigma]])
    lo, hi = cuts[:-1], cuts[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    s = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    log_rate = alpha * (front.log_amplitude + traj.log_states(-s)[:, 0])
    plain = np.sum(weights * np.exp(log_rate)) / c
    damped = np.sum(weights * np.exp(log_rate - (sigma - s))) / c
    return float(plain), float(damped)


def _ode_residuals(front: FrontSolution, profile: ProfileTable) -> float:
    c, lam, r = front.c_star, front.params.lam, front.r_star
    delta = 1e-5 * r
    xi = profile.xi[profile.reaction_zone]
    xi = xi[(xi > -r + 2 * delta) & (xi < -2 * delta)]
    if xi.size == 0:
        return 0.0
    rate = front.reaction_rate(xi)
    _, dv = front.reactant(xi)
    _, dv_plus = front.reactant(xi + delta)
    _, dv_minus = front.reactant(xi - delta)
    d2v = (dv_plus - dv_minus) / (2 * delta)
    res_v = np.abs(lam * d2v - c * dv - rate)

    temperature = profile.temperature or _integrate_temperature(front)
    du = temperature(xi)[1]
    d2u = (temperature(xi + delta)[1] - temperature(xi - delta)[1]) / (2 * delta)
    res_u = np.abs(d2u - c * du + rate)
    return float(max(res_v.max(), res_u.max()))


def validate_front(front: FrontSolution, profile: ProfileTable) -> ResidualReport:
    """Residuals of every condition the front must satisfy; never raises on bad values."""
    c, lam, r, theta = front.c_star, front.params.lam, front.r_star, front.theta
    temperature = profile.temperature or _integrate_temperature(front)
    u_ign, du_ign = temperature(-r)
    res_ign = max(abs(u_ign - theta), abs(du_ign - c * theta))

    v_ign, dv_ign = front.reactant(-r)
    res_flux = abs(c * (1.0 - v_ign[0]) + lam * dv_ign[0])

    res_ode = _ode_residuals(front, profile)

    plain, damped = reaction_integrals(front)
    return ResidualReport(res_ign=float(res_ign), res_flux=float(res_flux),
                          res_ode=res_ode,
                          res_c_identity=abs(c - plain),
                          res_theta_identity=abs(c * theta - damped))
