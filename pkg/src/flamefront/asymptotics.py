"""Closed-form limits and leading-order asymptotics.

All functions are pure.  They serve as cross-checks for the numerical
solver and as the answer when the reaction order is too close to 0 or 1
for the numerical path.
"""

from __future__ import annotations

import enum
import math

from .profile_ode import ModelParams


class AsymptoticRegime(enum.Enum):
    THETA_NEAR_ONE = "theta_near_one"
    THETA_SMALL = "theta_small"
    ALPHA_ZERO = "alpha_zero"
    ALPHA_ONE = "alpha_one"
    W_SMALL_X = "w_small_x"
    W_LARGE_X = "w_large_x"
    W0_PROFILE = "w0_profile"
    W_UPPER_BOUND = "w_upper_bound"
    PHI_ZETA_SMALL_X = "phi_zeta_small_x"
    PHI_ZETA_LARGE_X = "phi_zeta_large_x"

    @property
    def required(self) -> tuple[str, ...]:
        """Names of the inputs the regime's formula depends on."""
        return _REQUIRED[self]


_REQUIRED = {
    AsymptoticRegime.THETA_NEAR_ONE: ("theta", "lam", "alpha"),
    AsymptoticRegime.THETA_SMALL: ("theta", "alpha"),
    AsymptoticRegime.ALPHA_ZERO: ("theta",),
    AsymptoticRegime.ALPHA_ONE: ("theta", "lam"),
    AsymptoticRegime.W_SMALL_X: ("lam", "alpha", "x"),
    AsymptoticRegime.W_LARGE_X: ("alpha", "x"),
    AsymptoticRegime.W0_PROFILE: ("lam", "x"),
    AsymptoticRegime.W_UPPER_BOUND: ("alpha", "x"),
    AsymptoticRegime.PHI_ZETA_SMALL_X: ("lam", "alpha", "x"),
    AsymptoticRegime.PHI_ZETA_LARGE_X: ("alpha", "x"),
}

SMALL_X = "small_x"
LARGE_X = "large_x"


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha!r}")


def _check_theta(theta: float) -> None:
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0,1), got {theta!r}")


def w_asymptotic(params: ModelParams, x: float, branch: str) -> float:
    """Leading term of ``w`` near the origin (``small_x``) or far from it (``large_x``)."""
    _check_alpha(params.alpha)
    if not x < 0:
        raise ValueError(f"x must be negative, got {x!r}")
    a = params.alpha
    if branch == SMALL_X:
        coef = ((1 - a) ** 2 / (2 * params.lam * (1 + a))) ** (1 / (1 - a))
        return coef * (-x) ** (2 / (1 - a))
    if branch == LARGE_X:
        return (1 - a) ** (1 / (1 - a)) * (-x) ** (1 / (1 - a))
    raise ValueError(f"branch must be {SMALL_X!r} or {LARGE_X!r}, got {branch!r}")


def w0_profile(lam: float, x: float) -> float:
    """Zero-order limit ``-x + lam (exp(x/lam) - 1)`` of the profile."""
    # expm1 keeps the cancellation near x = 0 harmless
    return -x + lam * math.expm1(x / lam)


def w_upper_bound(alpha: float, x: float) -> float:
    """``[(1-alpha)(-x)]^(1/(1-alpha))``, an upper bound for ``w`` on ``x <= 0``."""
    if x > 0:
        raise ValueError(f"x must be non-positive, got {x!r}")
    return ((1 - alpha) * (-x)) ** (1 / (1 - alpha))


def front_theta_near_one(theta: float, lam: float, alpha: float) -> tuple[float, float]:
    """``(c, R)`` for ignition temperatures close to one."""
    _check_theta(theta)
    _check_alpha(alpha)
    d = 1.0 - theta
    c = math.sqrt(2 / (1 + alpha)) * lam ** (-alpha / 2) * d ** ((1 + alpha) / 2)
    r = math.sqrt(2 * (1 + alpha)) / (1 - alpha) * lam ** (alpha / 2) * d ** ((1 - alpha) / 2)
    return c, r


def front_theta_small(theta: float, alpha: float) -> tuple[float, float]:
    """``(c, R)`` for small ignition temperature: ``c = theta^-1/2``, ``R = c/(1-alpha)``."""
    _check_theta(theta)
    c = theta ** -0.5
    return c, c / (1 - alpha)


def front_alpha_one(theta: float, lam: float) -> tuple[float, float]:
    """First-order kinetics: ``(c, inf)``; the reaction zone is unbounded."""
    _check_theta(theta)
    q = theta / (1 - theta)
    return (q + lam * q * q) ** -0.5, math.inf


def alpha_zero_kappa(theta: float, tol: float = 1e-12) -> float:
    """Positive root of ``exp(kappa) = 1/(1 - theta kappa)``.

    Solved as ``theta kappa = 1 - exp(-kappa)`` on ``(0, 1/theta)``, which
    avoids overflow and excludes the trivial root ``kappa = 0``.
    """
    _check_theta(theta)

    def g(k):
        return -math.expm1(-k) - theta * k

    lo = 1e-12 if theta < 1 - 1e-9 else 0.0
    hi = 1.0 / theta
    if not g(lo) > 0:
        # for theta near one the root approaches zero
        lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def front_alpha_zero(theta: float) -> tuple[float, float]:
    """Zero-order kinetics: ``c = R = sqrt(kappa)``."""
    c = math.sqrt(alpha_zero_kappa(theta))
    return c, c


def phi_zeta_asymptotic(params: ModelParams, x: float, branch: str) -> tuple[float, float]:
    """Leading behaviour of ``(phi, zeta)`` for small or large ``x``."""
    if not x > 0:
        raise ValueError(f"x must be positive, got {x!r}")
    a = params.alpha
    if branch == SMALL_X:
        phi = 1 - 0.5 * (1 - a) * x
        zeta = ((2 * params.lam) ** (-a / 2) * (1 - a) ** ((1 + a) / 2)
                / math.sqrt(1 + a) * x ** ((1 + a) / 2))
        return phi, zeta
    if branch == LARGE_X:
        return 1 / ((1 - a) * x), math.sqrt((1 - a) * x)
    raise ValueError(f"branch must be {SMALL_X!r} or {LARGE_X!r}, got {branch!r}")


def closed_form_front(regime: AsymptoticRegime, theta: float, lam: float | None = None,
                      alpha: float | None = None) -> tuple[float, float]:
    """``(c, R)`` from the closed form belonging to a front-level regime."""
    if regime is AsymptoticRegime.THETA_NEAR_ONE:
        return front_theta_near_one(theta, lam, alpha)
    if regime is AsymptoticRegime.THETA_SMALL:
        return front_theta_small(theta, alpha)
    if regime is AsymptoticRegime.ALPHA_ONE:
        return front_alpha_one(theta, lam)
    if regime is AsymptoticRegime.ALPHA_ZERO:
        return front_alpha_zero(theta)
    raise ValueError(f"{regime.value} is not a front-level regime")
