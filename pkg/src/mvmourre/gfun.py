"""Commutator polynomials g_{j kappa}^E in dimensions 2 and 3 and their combinations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cheb import cheb_T, cheb_U
from .errors import ConfigError, DomainError

# slack on |E/x| <= 1 so that chain endpoints such as E/E_n = 1 survive rounding
_SLACK = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    kappa: int
    dimension: int = 2
    tol_root: float = 1e-13
    tol_sign: float = 1e-9
    n_E: int = 2001
    n_x: int = 4001
    n_y: int = 801

    def __post_init__(self):
        check_kappa(self.kappa)
        if self.dimension not in (2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {self.dimension}")
        for name in ("tol_root", "tol_sign"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("n_E", "n_x", "n_y"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be at least 2")


def check_kappa(kappa) -> int:
    if not isinstance(kappa, int) or isinstance(kappa, bool):
        raise ConfigError(f"kappa must be an integer, got {kappa!r}")
    if kappa < 2 or kappa % 2:
        raise ConfigError(f"kappa must be even and >= 2, got {kappa}")
    return kappa


@dataclass(frozen=True)
class ConjugateOperator:
    """Coefficients rho on the multipliers sigma; frequencies are sigma[q]*kappa."""

    kappa: int
    sigma: tuple
    rho: tuple = field(default=None)

    def __post_init__(self):
        check_kappa(self.kappa)
        sigma = tuple(int(s) for s in self.sigma)
        rho = (1.0,) + (0.0,) * (len(sigma) - 1) if self.rho is None else tuple(float(r) for r in self.rho)
        if not sigma:
            raise ConfigError("sigma must be non-empty")
        if sigma[0] != 1:
            raise ConfigError("sigma must start with 1")
        if any(b <= a for a, b in zip(sigma, sigma[1:])):
            raise ConfigError("sigma must be strictly increasing")
        if len(rho) != len(sigma):
            raise ConfigError("rho and sigma lengths differ")
        if rho[0] != 1.0:
            raise ConfigError("rho[0] must be 1")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def trivial(cls, kappa: int) -> "ConjugateOperator":
        return cls(kappa, (1,), (1.0,))

    def scaled(self, lam: float) -> list:
        """Coefficients multiplied by lam (not a normalized operator)."""
        return [lam * r for r in self.rho]

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "sigma": list(self.sigma), "rho": list(self.rho)}

    @classmethod
    def from_dict(cls, d: dict) -> "ConjugateOperator":
        return cls(int(d["kappa"]), tuple(d["sigma"]), tuple(d["rho"]))


def m(x: float) -> float:
    # factored form keeps full relative accuracy next to x = +-1
    return (1.0 - x) * (1.0 + x)


def _ratio(E: float, x: float) -> float:
    if x == 0:
        raise DomainError("x = 0 is not on the energy surface")
    z = E / x
    if abs(z) > 1.0 + _SLACK or abs(x) > 1.0 + _SLACK:
        raise DomainError(f"point outside the surface: x={x}, E/x={z}")
    return z


def g2(E: float, j: int, kappa: int, x: float) -> float:
    z = _ratio(E, x)
    n = j * kappa - 1
    return z * m(x) * cheb_U(n, x) + x * m(z) * cheb_U(n, z)


def g2_prime(E: float, j: int, kappa: int, x: float) -> float:
    z = _ratio(E, x)
    jk = j * kappa
    return (-(E / (x * x)) * cheb_U(jk - 1, x) - jk * z * cheb_T(jk, x)
            + cheb_U(jk - 1, z) + jk * z * cheb_T(jk, z))


def g3(E: float, j: int, kappa: int, x: float, y: float) -> float:
    if y == 0:
        raise DomainError("y = 0 is not on the energy surface")
    if abs(y) > 1.0 + _SLACK or abs(E / y) > 1.0 + _SLACK:
        raise DomainError(f"y={y} outside the surface for E={E}")
    w = E / y
    z = _ratio(w, x)
    n = j * kappa - 1
    return ((E / x) * m(x) * cheb_U(n, x) + w * m(y) * cheb_U(n, y)
            + x * y * m(z) * cheb_U(n, z))


def G(op: ConjugateOperator, E: float, x: float, y: float | None = None) -> float:
    if y is None:
        return sum(r * g2(E, j, op.kappa, x) for j, r in zip(op.sigma, op.rho))
    return sum(r * g3(E, j, op.kappa, x, y) for j, r in zip(op.sigma, op.rho))


def G_prime(op: ConjugateOperator, E: float, x: float) -> float:
    return sum(r * g2_prime(E, j, op.kappa, x) for j, r in zip(op.sigma, op.rho))


def g_point(E: float, j: int, kappa: int, point: Sequence[float]) -> float:
    """g in dimension len(point)+1; point holds the free coordinates."""
    if len(point) == 1:
        return g2(E, j, kappa, point[0])
    if len(point) == 2:
        return g3(E, j, kappa, point[0], point[1])
    raise ConfigError("only dimensions 2 and 3 are supported")
