"""Chebyshev polynomials of both kinds, derivatives and monotone inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BranchRangeError, ConfigError

TOL_ROOT = 1e-13
MAX_BISECT = 200
_EDGE = 1e-8


def cheb_T(n: int, x: float) -> float:
    """T_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1.0
    t0, t1 = 1.0, x
    for _ in range(n - 1):
        t0, t1 = t1, 2.0 * x * t1 - t0
    return t1


def cheb_U(n: int, x: float) -> float:
    """U_n(x); at x = +-1 the exact limit (n+1)(+-1)^n is returned."""
    if n < 0:
        # U_{-1} = 0 keeps g_{0} style expressions well defined
        return 0.0
    if x == 1.0:
        return float(n + 1)
    if x == -1.0:
        return float((n + 1) * (-1) ** n)
    u0, u1 = 1.0, 2.0 * x
    if n == 0:
        return 1.0
    for _ in range(n - 1):
        u0, u1 = u1, 2.0 * x * u1 - u0
    return u1


def cheb_T_prime(kappa: int, x: float) -> float:
    return kappa * cheb_U(kappa - 1, x)


def _U_prime_at_edge(n: int, s: float) -> float:
    # d/dx U_n at x = s = +-1
    return s ** (n + 1) * n * (n + 1) * (n + 2) / 3.0


def cheb_U_prime(kappa: int, x: float) -> float:
    """Derivative of U_{kappa-1} at x.

    Within 1e-8 of +-1 the quotient form is 0/0, so a first order Taylor
    step from the endpoint is used instead.
    """
    n = kappa - 1
    for s in (1.0, -1.0):
        if abs(x - s) < _EDGE:
            d1 = _U_prime_at_edge(n, s)
            # second derivative at the edge, from the Chebyshev ODE
            # (1-x^2)U'' - 3xU' + n(n+2)U = 0 differentiated once
            d2 = s ** n * (n - 1) * n * (n + 1) * (n + 2) * (n + 3) / 15.0
            return d1 + d2 * (x - s)
    return (kappa * cheb_T(kappa, x) - x * cheb_U(n, x)) / (x * x - 1.0)


def bracket(fx: float, fy: float, gx: float, gy: float) -> float:
    """[f(x), g(y)] = f(x)g(y) - f(y)g(x)."""
    return fx * gy - fy * gx


@dataclass(frozen=True)
class Well:
    """Interval [cos(j pi/kappa), cos((j-1) pi/kappa)] on which T_kappa is monotone."""

    kappa: int
    j: int

    def __post_init__(self):
        if self.kappa < 1:
            raise ConfigError("kappa must be positive")
        if not 1 <= self.j <= self.kappa:
            raise ConfigError(f"well index {self.j} outside 1..{self.kappa}")

    @property
    def left(self) -> float:
        return math.cos(self.j * math.pi / self.kappa)

    @property
    def right(self) -> float:
        return math.cos((self.j - 1) * math.pi / self.kappa)

    @property
    def endpoints(self) -> tuple[float, float]:
        return self.left, self.right

    @property
    def increasing(self) -> bool:
        return self.j % 2 == 1

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.left - slack <= x <= self.right + slack


def well_of(kappa: int, x: float) -> Well:
    """The well containing x (ties at interior nodes go to the left well)."""
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"{x} outside [-1, 1]")
    theta = math.acos(x)
    j = min(kappa, max(1, math.ceil(theta * kappa / math.pi - 1e-15)))
    return Well(kappa, j)


def inv_T_on_well(well: Well, y: float, tol: float = TOL_ROOT,
                  max_iter: int = MAX_BISECT) -> float:
    """Unique x in ``well`` with T_kappa(x) = y, found by bisection."""
    a, b = well.left, well.right
    # T at the endpoints is exactly +-1
    ta = -1.0 if well.increasing else 1.0
    tb = -ta
    lo, hi = min(ta, tb), max(ta, tb)
    if y < lo - tol or y > hi + tol:
        raise BranchRangeError(f"level {y} outside T range of well j={well.j}")
    if abs(y - ta) <= tol:
        return a
    if abs(y - tb) <= tol:
        return b
    sign = 1.0 if well.increasing else -1.0
    k = well.kappa
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        f = sign * (cheb_T(k, mid) - y)
        if f > 0:
            b = mid
        else:
            a = mid
        if b - a <= 4e-16:
            break
    return 0.5 * (a + b)
