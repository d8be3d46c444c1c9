"""Band-wise interpolation systems for the rho coefficients and the index-set search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DimensionMismatch, NoValidSigma, RankDeficient
from .gfun import ConjugateOperator, G, G_prime, check_kappa, g2, g2_prime
from .linalg import gauss_solve, matrix_rank
from .solver import ThresholdSolution, solve_J2


@dataclass(frozen=True)
class Endpoint:
    """Energy and chain of a band endpoint; ``coords`` is empty for E_0 = cos(pi/kappa)."""

    n: int
    energy: float
    coords: tuple

    @classmethod
    def from_solution(cls, sol: ThresholdSolution) -> "Endpoint":
        return cls(sol.n, sol.energy, tuple(sol.coords))

    @classmethod
    def top(cls, kappa: int) -> "Endpoint":
        return cls(0, math.cos(math.pi / kappa), ())


@dataclass
class InterpolationSystem:
    kappa: int
    n: int
    sigma: tuple
    rows: list  # (kind, which, q, E, x): kind in {"G", "dG"}, which in {"left", "right"}
    matrix: list
    rhs: list
    rank_estimate: int
    full_matrix: list = field(default_factory=list)


def constraint_rows(n: int, left: Endpoint, right: Endpoint) -> list:
    """Constraint descriptors for band n = (E_n, E_{n-1})."""
    rows = []
    L, R = left, right
    if n % 2:
        rows += [("G", "left", q) for q in range(0, (n - 1) // 2 + 1)]
        rows += [("dG", "left", q) for q in range(1, (n - 1) // 2 + 1)]
        rows += [("G", "right", q) for q in range(0, (n - 3) // 2 + 1)]
        rows += [("dG", "right", q) for q in range(1, (n - 1) // 2 + 1)]
    else:
        rows += [("G", "left", q) for q in range(0, n // 2)]
        rows += [("dG", "left", q) for q in range(1, n // 2 + 1)]
        rows += [("G", "right", q) for q in range(0, n // 2)]
        rows += [("dG", "right", q) for q in range(1, n // 2)]
    out = []
    for kind, which, q in rows:
        ep = L if which == "left" else R
        out.append((kind, which, q, ep.energy, ep.coords[q]))
    return out


def build_system(kappa: int, n: int, left, right, sigma: Sequence[int]) -> InterpolationSystem:
    check_kappa(kappa)
    sigma = tuple(int(s) for s in sigma)
    if len(sigma) != 2 * n:
        raise DimensionMismatch(f"band {n} needs |sigma| = {2 * n}, got {len(sigma)}")
    if sigma[0] != 1:
        raise DimensionMismatch("sigma must start with 1")
    left = left if isinstance(left, Endpoint) else Endpoint.from_solution(left)
    if right is None:
        right = Endpoint.top(kappa)
    right = right if isinstance(right, Endpoint) else Endpoint.from_solution(right)
    rows = constraint_rows(n, left, right)
    full = []
    for kind, _, _, E, x in rows:
        f = g2 if kind == "G" else g2_prime
        full.append([f(E, j, kappa, x) for j in sigma])
    matrix = [r[1:] for r in full]
    rhs = [-r[0] for r in full]
    return InterpolationSystem(kappa, n, sigma, rows, matrix, rhs,
                               matrix_rank(matrix), full)


def solve_rho(system: InterpolationSystem) -> ConjugateOperator:
    expected = 2 * system.n - 1
    if system.rank_estimate < expected:
        raise RankDeficient(system.rank_estimate, expected)
    x, _ = gauss_solve(system.matrix, system.rhs)
    return ConjugateOperator(system.kappa, system.sigma, (1.0,) + tuple(x))


def constraint_defects(system: InterpolationSystem, op: ConjugateOperator) -> list:
    """|G| or |G'| at every constraint row."""
    out = []
    for kind, _, _, E, x in system.rows:
        out.append(abs(G(op, E, x) if kind == "G" else G_prime(op, E, x)))
    return out


def band_endpoints(kappa: int, n: int) -> tuple:
    """(left, right) endpoints of band n, i.e. (E_n, E_{n-1})."""
    left = Endpoint.from_solution(solve_J2(kappa, n))
    right = Endpoint.top(kappa) if n == 1 else Endpoint.from_solution(solve_J2(kappa, n - 1))
    return left, right


def band_operator(kappa: int, n: int, sigma: Sequence[int]) -> ConjugateOperator:
    left, right = band_endpoints(kappa, n)
    return solve_rho(build_system(kappa, n, left, right, sigma))


def pool_order(pool: Iterable[Sequence[int]]) -> list:
    """Lower order first: by (max multiplier, sum of multipliers)."""
    return sorted((tuple(s) for s in pool), key=lambda s: (max(s), sum(s)))


@dataclass
class SigmaOutcome:
    sigma: tuple
    accepted: bool
    reason: str
    operator: ConjugateOperator | None = None
    report: object = None


def evaluate_sigma(kappa: int, n: int, sigma, scan_config=None, jobs: int = 1) -> SigmaOutcome:
    from .scan import ScanConfig, certify_band
    cfg = scan_config or ScanConfig()
    left, right = band_endpoints(kappa, n)
    sigma = tuple(sigma)
    try:
        op = solve_rho(build_system(kappa, n, left, right, sigma))
    except (RankDeficient, DimensionMismatch) as exc:
        return SigmaOutcome(sigma, False, str(exc))
    report = certify_band(op, left.energy, right.energy, cfg, jobs=jobs)
    if report.witness is None:
        return SigmaOutcome(sigma, True, "positive on band interior", op, report)
    E, x, val = report.witness
    return SigmaOutcome(sigma, False, f"G={val:.3e} at E={E:.6f}, x={x:.6f}", op, report)


def search_sigma(kappa: int, n: int, pool, scan_config=None, jobs: int = 1,
                 keep_going: bool = False):
    """First candidate (in pool order) whose operator is positive on the band.

    With keep_going every candidate is evaluated and the outcomes list is
    returned alongside the first accepted one.
    """
    outcomes = []
    accepted = None
    for sigma in pool_order(pool):
        if len(sigma) != 2 * n or sigma[0] != 1:
            outcomes.append(SigmaOutcome(sigma, False, "needs |sigma| = 2n and j_1 = 1"))
            continue
        res = evaluate_sigma(kappa, n, sigma, scan_config, jobs)
        outcomes.append(res)
        if res.accepted and accepted is None:
            accepted = res
            if not keep_going:
                break
    if keep_going:
        return accepted, outcomes
    if accepted is None:
        raise NoValidSigma([(o.sigma, o.reason) for o in outcomes])
    return accepted.sigma, accepted.operator, accepted.report
