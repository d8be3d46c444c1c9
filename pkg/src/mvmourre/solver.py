"""Threshold energies from the ping-pong chain construction, and their omega weights."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .cheb import TOL_ROOT, Well, cheb_T, cheb_U, inv_T_on_well
from .errors import (ConfigError, ConstructionFailure, DegenerateFactor,
                     NoConvergence, ScheduleInfeasible, SingularSystem,
                     UnsupportedPair, ZeroFactor)
from .gfun import check_kappa, g_point, m

ORDER_SLACK = 1e-12
MAX_ENERGY_ITER = 300


class Family(str, Enum):
    J2_DECREASING = "J2Decreasing"
    F_INCREASING = "FIncreasing"
    WELL_DECREASING = "WellDecreasing"
    WELL_INCREASING = "WellIncreasing"
    ALIGNMENT = "Alignment"
    CUSTOM = "Custom"


class Assumption(str, Enum):
    AO1 = "AO1"
    AO2 = "AO2"
    AO3 = "AO3"
    AE1 = "AE1"
    AE2 = "AE2"
    AE3 = "AE3"
    ALIGNMENT_SIGNS = "AlignmentSigns"
    UNKNOWN = "Unknown"


def _cos(kappa: int, j: int) -> float:
    return math.cos(j * math.pi / kappa)


@dataclass(frozen=True)
class PingPongSchedule:
    """Explicit recipe for a chain.

    ``start`` is ``("sqrt",)`` for odd n (X_{(n+1)/2} = sqrt(E)) or
    ``("cos", j)`` for even n (X_{n/2} = cos(j pi/kappa)).
    ``branch_wells`` lists the well used for each equal-level inversion,
    innermost first.  ``terminal`` is ``("cos", j)`` or ``("align", p)``.
    ``outer_wells`` optionally constrains the points produced by X -> E/X
    (None means no constraint beyond |x| <= 1).
    """

    kappa: int
    n: int
    start: tuple
    branch_wells: tuple
    terminal: tuple
    outer_wells: tuple | None = None

    def __post_init__(self):
        steps = (self.n + 1) // 2 if self.n % 2 else self.n // 2
        if len(self.branch_wells) != steps:
            raise ConfigError(
                f"n={self.n} needs {steps} inversion wells, got {len(self.branch_wells)}")
        if self.n % 2 and self.start[0] != "sqrt":
            raise ConfigError("odd n starts at sqrt(E)")
        if self.n % 2 == 0 and self.start[0] != "cos":
            raise ConfigError("even n starts at a cosine level")
        if self.outer_wells is not None and len(self.outer_wells) != steps:
            raise ConfigError("outer_wells length mismatch")

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "n": self.n, "start": list(self.start),
                "branch_wells": list(self.branch_wells), "terminal": list(self.terminal),
                "outer_wells": None if self.outer_wells is None else list(self.outer_wells)}

    @classmethod
    def from_dict(cls, d: dict) -> "PingPongSchedule":
        ow = d.get("outer_wells")
        return cls(int(d["kappa"]), int(d["n"]), tuple(d["start"]), tuple(d["branch_wells"]),
                   tuple(d["terminal"]), None if ow is None else tuple(ow))


def well_schedule(kappa: int, n: int, j: int, increasing: bool) -> PingPongSchedule:
    """Canonical schedule for the decreasing (centre well j) or increasing family."""
    centre, partner = (j + 1, j) if increasing else (j, j + 1)
    steps = (n + 1) // 2 if n % 2 else n // 2
    start = ("sqrt",) if n % 2 else ("cos", j)
    terminal = ("cos", j + 1) if increasing else ("cos", j - 1)
    return PingPongSchedule(kappa, n, start, (partner,) * steps, terminal, (centre,) * steps)


def construct_chain(kappa: int, n: int, schedule: PingPongSchedule, E: float) -> list:
    """Coordinates X_0..X_{n+1} for trial energy E; raises ConstructionFailure."""
    if E <= 0:
        raise ConstructionFailure(0, "energy must be positive")
    X = [None] * (n + 2)
    if n % 2:
        c = (n + 1) // 2
        X[c] = math.sqrt(E)
        seed_idx = c
    else:
        h = n // 2
        X[h] = _cos(kappa, schedule.start[1])
        X[h + 1] = E / X[h]
        seed_idx = h + 1
        if abs(X[h + 1]) > 1.0 + ORDER_SLACK:
            raise ConstructionFailure(h + 1, "E/X leaves [-1, 1]")
    hi = seed_idx
    lo = n - seed_idx
    for k, wj in enumerate(schedule.branch_wells):
        level = cheb_T(kappa, X[hi])
        try:
            X[lo] = inv_T_on_well(Well(kappa, wj), level)
        except Exception as exc:
            raise ConstructionFailure(lo, str(exc)) from None
        nxt = E / X[lo]
        if abs(nxt) > 1.0 + ORDER_SLACK:
            raise ConstructionFailure(hi + 1, "E/X leaves [-1, 1]")
        X[hi + 1] = nxt
        # the terminal point is judged by the residual, not by a well
        if schedule.outer_wells is not None and hi + 1 < n + 1:
            _check_in_well(Well(kappa, schedule.outer_wells[k]), nxt, hi + 1)
        hi += 1
        lo -= 1
    return X


def _check_in_well(well: Well, x: float, idx: int):
    if not well.contains(x, ORDER_SLACK):
        raise ConstructionFailure(idx, f"{x} outside well j={well.j}")


def _terminal_residual(kappa: int, schedule: PingPongSchedule, X: list) -> float:
    kind = schedule.terminal[0]
    if kind == "cos":
        return X[-1] - _cos(kappa, schedule.terminal[1])
    if kind == "align":
        return cheb_T(kappa, X[-1]) - cheb_T(kappa, X[schedule.terminal[1]])
    raise ConfigError(f"unknown terminal {schedule.terminal}")


def chain_residual(kappa: int, schedule: PingPongSchedule, E: float,
                   fail_value: float) -> float:
    try:
        X = construct_chain(kappa, schedule.n, schedule, E)
    except ConstructionFailure:
        return fail_value
    return _terminal_residual(kappa, schedule, X)


def calibrate(kappa: int, schedule: PingPongSchedule, lo: float, hi: float,
              fail_value: float = math.inf, tol: float = TOL_ROOT) -> float:
    """Bisection on E over (lo, hi) for a zero of the terminal residual."""
    f = lambda e: chain_residual(kappa, schedule, e, fail_value)
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if not (flo < 0 < fhi or fhi < 0 < flo):
        raise NoConvergence(f"no sign change on [{lo}, {hi}]: {flo}, {fhi}")
    for _ in range(MAX_ENERGY_ITER):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if hi - lo <= 2.5e-16:
            return 0.5 * (lo + hi)
    raise NoConvergence(f"bisection did not settle on [{lo}, {hi}]")


@dataclass
class ThresholdSolution:
    kappa: int
    n: int
    family: str
    energy: float
    coords: list
    omegas: list = field(default_factory=list)
    residual: float = 0.0
    assumption: str = Assumption.UNKNOWN.value
    schedule: PingPongSchedule | None = None
    well: int | None = None
    p: int | None = None
    dimension: int = 2
    # extra constant coordinates appended by lift_threshold
    lift: tuple = ()

    @property
    def last_index(self) -> int:
        return (self.n + 1) // 2 if self.n % 2 else self.n // 2

    @property
    def n_omegas(self) -> int:
        return self.last_index

    def point(self, q: int) -> tuple:
        return (self.coords[q],) + tuple(self.lift)

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "n": self.n, "family": self.family,
                "energy": self.energy, "coords": list(self.coords),
                "omegas": list(self.omegas), "residual": self.residual,
                "assumption": self.assumption}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _finish(kappa, n, family, schedule, E, well=None, p=None) -> ThresholdSolution:
    X = construct_chain(kappa, n, schedule, E)
    res = _terminal_residual(kappa, schedule, X)
    sol = ThresholdSolution(kappa, n, family, E, X, residual=abs(res),
                            schedule=schedule, well=well, p=p)
    if family == Family.ALIGNMENT.value:
        sol.omegas = omega_matrix_oracle(sol, list(range(1, sol.n_omegas + 1)))
    else:
        sol.omegas = omega_closed_form(sol)
    sol.assumption = classify(sol).value
    return sol


def _shrink(a: float, b: float, eps: float = 1e-9) -> tuple:
    return a + eps, b - eps


def solve_well(kappa: int, j: int, n: int, direction: str = "Decreasing") -> ThresholdSolution:
    check_kappa(kappa)
    if n < 1:
        raise ConfigError("n must be >= 1")
    if not 1 <= j <= kappa // 2:
        raise ConfigError(f"well index must be in 1..{kappa // 2}")
    inc = direction.lower().startswith("inc")
    if inc and j + 1 > kappa:
        raise ConfigError("no well to the left")
    cj, cjm, cjp = _cos(kappa, j), _cos(kappa, j - 1), _cos(kappa, j + 1)
    if inc:
        lo, hi = cj * cjp, cjm * cjp
    else:
        lo, hi = cj * cj, cjm * cj
    # cos(pi/2) only rounds to zero, so compare against a small floor
    if not lo > 1e-12:
        raise ConfigError(f"well {j} of kappa={kappa} does not give a positive energy window")
    sched = well_schedule(kappa, n, j, inc)
    # decreasing: X_{n+1} grows with E; increasing: it shrinks
    E = calibrate(kappa, sched, *_shrink(lo, hi), fail_value=-math.inf if inc else math.inf)
    fam = Family.WELL_INCREASING if inc else Family.WELL_DECREASING
    if j == 1:
        fam = Family.F_INCREASING if inc else Family.J2_DECREASING
    return _finish(kappa, n, fam.value, sched, E, well=j)


def solve_J2(kappa: int, n: int) -> ThresholdSolution:
    check_kappa(kappa)
    if kappa < 4:
        raise ConfigError("the J2 family needs kappa >= 4")
    return solve_well(kappa, 1, n, "Decreasing")


def solve_F(kappa: int, n: int) -> ThresholdSolution:
    check_kappa(kappa)
    if kappa < 6:
        raise ConfigError("the F family needs kappa >= 6")
    return solve_well(kappa, 1, n, "Increasing")


def _mU(kappa: int, x: float) -> float:
    return m(x) * cheb_U(kappa - 1, x)


def classify(sol: ThresholdSolution) -> Assumption:
    """Tag the sign pattern of the pairs (X_q, X_{n-q}); never assumed."""
    k, n, X = sol.kappa, sol.n, sol.coords
    if sol.family == Family.ALIGNMENT.value:
        ok = sol.omegas and all(w < 0 for w in sol.omegas)
        return Assumption.ALIGNMENT_SIGNS if ok else Assumption.UNKNOWN
    top = (n - 1) // 2 if n % 2 else n // 2 - 1
    kinds = set()
    for q in range(top + 1):
        xx = X[q] * X[n - q]
        tt = cheb_U(k - 1, X[q]) * cheb_U(k - 1, X[n - q])
        if xx > 0 and tt < 0:
            kinds.add(1)
        elif xx < 0 and tt > 0:
            kinds.add(2)
        else:
            return Assumption.UNKNOWN
    odd = n % 2 == 1
    if kinds == {1}:
        return Assumption.AO1 if odd else Assumption.AE1
    if kinds == {2}:
        return Assumption.AO2 if odd else Assumption.AE2
    return Assumption.AO3 if odd else Assumption.AE3


def is_certified(sol: ThresholdSolution) -> bool:
    """True when every omega is strictly negative (a nonpositive linear relation)."""
    return bool(sol.omegas) and all(w < 0 for w in sol.omegas)


def omega_closed_form(sol: ThresholdSolution) -> list:
    k, n, X = sol.kappa, sol.n, sol.coords
    if n % 2:
        mid, first, factor = (n - 1) // 2, (n + 1) // 2, 2.0
    else:
        mid, first, factor = n // 2 - 1, n // 2 + 1, 1.0
    out = []
    for q in range(mid + 1):
        num_x = math.prod(X[p] for p in range(q, mid + 1))
        den_x = math.prod(X[p] for p in range(first, n - q + 1))
        num_u = math.prod(_mU(k, X[p]) for p in range(first, n - q + 1))
        den_u = math.prod(_mU(k, X[p]) for p in range(q, mid + 1))
        if abs(den_u) < 1e-12:
            raise DegenerateFactor(f"m*U vanishes on X_{q}..X_{mid}")
        out.append(factor * (-1) ** (mid - q) * (num_x / den_x) * (num_u / den_u))
    return out


def omega_matrix_oracle(sol: ThresholdSolution, j_indices: Sequence[int]) -> list:
    """Solve sum_q w_q g_j(X_q) = g_j(X_last) for the listed multipliers j."""
    mm = sol.n_omegas
    js = list(j_indices)
    if len(js) != mm or len(set(js)) != mm:
        raise ConfigError(f"need {mm} distinct multipliers, got {js}")
    E, k = sol.energy, sol.kappa
    A = np.array([[g_point(E, j, k, sol.point(q)) for q in range(mm)] for j in js])
    b = np.array([g_point(E, j, k, sol.point(mm)) for j in js])
    # columns near X = 1 are tiny; equilibrate before judging singularity
    scale = np.abs(A).max(axis=0)
    if not np.all(scale > 0):
        raise SingularSystem(f"g vanishes at a chain point for j={js}")
    A = A / scale
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise SingularSystem(f"g matrix is singular for j={js}")
    return [float(w) for w in np.linalg.solve(A, b) / scale]


def linear_relation_defect(sol: ThresholdSolution, js: Sequence[int] = range(1, 7)) -> float:
    """max_j |g_j(X_last) - sum_q w_q g_j(X_q)|."""
    E, k, mm = sol.energy, sol.kappa, sol.n_omegas
    worst = 0.0
    for j in js:
        lhs = g_point(E, j, k, sol.point(mm))
        rhs = sum(w * g_point(E, j, k, sol.point(q)) for q, w in enumerate(sol.omegas))
        worst = max(worst, abs(lhs - rhs))
    return worst


ALIGNMENT_PAIRS = {(1, 0), (2, 0), (3, 0), (3, 1), (4, 0), (4, 1)}


def omega_alignment(sol: ThresholdSolution, n: int | None = None, p: int | None = None) -> list:
    n = sol.n if n is None else n
    p = sol.p if p is None else p
    if (n, p) not in ALIGNMENT_PAIRS:
        raise UnsupportedPair(f"no closed form for (n, p) = ({n}, {p})")
    k, X = sol.kappa, sol.coords

    def h(*idx):
        return math.prod(_mU(k, X[i]) / X[i] for i in idx)

    if (n, p) == (1, 0):
        return [2 * h(1) / (h(0) + h(2))]
    if (n, p) == (2, 0):
        return [h(2) / (h(0) + h(3))]
    if (n, p) == (3, 1):
        d = h(0, 1) - h(3, 4)
        return [-2 * h(2, 3) / d, 2 * h(0, 2) / d]
    if (n, p) == (3, 0):
        d = h(0, 1) + h(1, 4)
        return [-2 * h(2, 3) / d, 2 * (h(0, 2) + h(2, 4)) / d]
    if (n, p) == (4, 0):
        d = h(0, 1) + h(1, 5)
        return [-h(3, 4) / d, (h(0, 3) + h(3, 5)) / d]
    d = h(0, 1) - h(4, 5)
    return [-h(3, 4) / d, h(0, 3) / d]


def theta0_set(kappa: int, d: int) -> list:
    """Distinct products of d cosines cos(j pi/kappa), j = 0..kappa."""
    check_kappa(kappa)
    if d not in (2, 3):
        raise ConfigError("d must be 2 or 3")
    cosines = [_cos(kappa, j) for j in range(kappa + 1)]
    values = sorted(math.prod(c) for c in itertools.product(cosines, repeat=d))
    out = []
    for v in values:
        if abs(v) < 1e-15:
            v = 0.0
        if not out or v - out[-1] > 1e-12:
            out.append(v)
    return out


def lift_threshold(sol: ThresholdSolution, j: int) -> ThresholdSolution:
    """Move a solution one dimension up by a constant coordinate cos(j pi/kappa)."""
    k = sol.kappa
    if 2 * j == k:
        raise ZeroFactor("cos(pi/2) = 0 cannot scale an energy")
    c = _cos(k, j)
    if sol.dimension >= 3:
        raise ConfigError("lifting beyond dimension 3 is not supported")
    return replace(sol, energy=sol.energy * c, dimension=sol.dimension + 1,
                   lift=tuple(sol.lift) + (c,), omegas=list(sol.omegas))


def _cf_map(kappa: int, E: float, x: float) -> float:
    z = E / x
    if abs(z) > 1.0:
        raise ConstructionFailure(0, "E/x > 1")
    r = math.sqrt(1.0 - z * z)
    if kappa == 4:
        return r
    return 0.5 * (z + math.sqrt(3.0) * r)


def continued_fraction_solve(kappa: int, n: int, parity: str) -> float:
    """Solve E = f_E^(n)(start) by bisection; even terms start at cos(pi/kappa), odd at sqrt(E).

    Returns E_{2n} for parity 'even' and E_{2n-1} for 'odd'.
    """
    if kappa not in (4, 6):
        raise ConfigError("the one-equation form is available for kappa in {4, 6}")
    if n < 1:
        raise ConfigError("n must be >= 1")
    even = parity.lower().startswith("e")
    c = _cos(kappa, 1)

    def resid(E):
        x = c if even else math.sqrt(E)
        try:
            for _ in range(n):
                x = _cf_map(kappa, E, x)
        except ConstructionFailure:
            return -math.inf
        return x - E

    lo, hi = c * c + 1e-9, c - 1e-9
    flo, fhi = resid(lo), resid(hi)
    if not (flo > 0 > fhi):
        raise NoConvergence(f"no sign change for kappa={kappa}, n={n}: {flo}, {fhi}")
    for _ in range(MAX_ENERGY_ITER):
        mid = 0.5 * (lo + hi)
        if resid(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 2.5e-16:
            break
    return 0.5 * (lo + hi)


@dataclass
class ConvergenceFit:
    kappa: int
    points: list
    slope: float
    intercept: float

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "points": [list(p) for p in self.points],
                "slope": self.slope, "intercept": self.intercept}


def convergence_study(kappa: int, N: int, step: int = 10) -> ConvergenceFit:
    """Least-squares line through (log n, log(E_2n - cos^2(pi/kappa))), n = 10, 20, ..., N."""
    if N < 10:
        raise ConfigError("N must be at least 10")
    limit = _cos(kappa, 1) ** 2
    pts = []
    for n in range(10, N + 1, step):
        E = continued_fraction_solve(kappa, n, "even")
        pts.append((math.log(n), math.log(E - limit)))
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    return ConvergenceFit(kappa, pts, float(slope), float(intercept))


def load_alignment_schedules() -> dict:
    """Documented alignment schedules keyed by name."""
    from importlib import resources
    raw = json.loads(resources.files("mvmourre").joinpath("data/alignment_schedules.json").read_text())
    out = {}
    for d in raw["schedules"]:
        sched = PingPongSchedule(d["kappa"], d["n"], tuple(d["start"]), tuple(d["branch_wells"]),
                                 ("align", d["p"]))
        out[d["name"]] = {"schedule": sched, "window": tuple(d["window"]),
                          "expected": d["expected"]}
    return out


def _degenerate(X: Sequence[float], tol: float = 1e-7) -> bool:
    xs = sorted(X)
    return any(b - a < tol for a, b in zip(xs, xs[1:]))


def alignment_roots(kappa: int, schedule: PingPongSchedule, window: tuple,
                    samples: int = 4001) -> list:
    """Energies in the window where the alignment residual changes sign on a non-degenerate chain."""
    lo, hi = window
    grid = np.linspace(lo + 1e-9, hi - 1e-9, samples)
    vals = [chain_residual(kappa, schedule, e, math.nan) for e in grid]
    roots = []
    f = lambda e: chain_residual(kappa, schedule, e, math.nan)
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        a, b = float(a), float(b)
        if math.isfinite(fa) != math.isfinite(fb):
            # a root can sit right at the edge of the feasible set: move the
            # infinite end onto that edge before testing for a sign change
            good, bad = (a, b) if math.isfinite(fa) else (b, a)
            for _ in range(60):
                mid = 0.5 * (good + bad)
                if math.isfinite(f(mid)):
                    good = mid
                else:
                    bad = mid
            a, b = (a, good) if math.isfinite(fa) else (good, b)
            fa, fb = f(a), f(b)
        if not (math.isfinite(fa) and math.isfinite(fb)) or fa * fb > 0:
            continue
        E = calibrate(kappa, schedule, a, b, math.nan)
        X = construct_chain(kappa, schedule.n, schedule, E)
        if abs(_terminal_residual(kappa, schedule, X)) > 1e-9 or _degenerate(X):
            continue
        roots.append(E)
    return roots


def solve_alignment(kappa: int, n: int, schedule: PingPongSchedule,
                    window: tuple | None = None, root_index: int | None = None) -> ThresholdSolution:
    """Calibrate E so that T(X_{n+1}) = T(X_p); window defaults to (cos^2(2pi/k), cos(2pi/k))."""
    check_kappa(kappa)
    if schedule.terminal[0] != "align":
        raise ConfigError("schedule terminal must be an alignment condition")
    if schedule.n != n or schedule.kappa != kappa:
        raise ConfigError("schedule does not match (kappa, n)")
    p = schedule.terminal[1]
    top = (n - 1) // 2 if n % 2 else n // 2 - 1
    if not 0 <= p <= top:
        raise ConfigError(f"p must lie in 0..{top}")
    if window is None:
        c2 = _cos(kappa, 2)
        window = (c2 * c2, c2)
    roots = alignment_roots(kappa, schedule, window)
    if not roots:
        raise ScheduleInfeasible(f"no aligned chain for this schedule in {window}")
    if root_index is None:
        if len(roots) > 1:
            raise ScheduleInfeasible(f"several aligned energies {roots}; pass root_index")
        root_index = 0
    E = roots[root_index]
    return _finish(kappa, n, Family.ALIGNMENT.value, schedule, E, p=p)


def solve_documented_alignment(name: str) -> ThresholdSolution:
    entry = load_alignment_schedules()[name]
    s = entry["schedule"]
    return solve_alignment(s.kappa, s.n, s, entry["window"])


def solve_schedule(kappa: int, schedule: PingPongSchedule, window: tuple,
                   fail_value: float = math.nan) -> ThresholdSolution:
    """Calibrate an arbitrary cosine-level schedule on an energy window.

    Used for constructions outside the standard families; the omegas come
    from the closed form and the assumption tag says whether they certify.
    """
    if schedule.terminal[0] != "cos":
        raise ConfigError("use solve_alignment for alignment terminals")
    E = calibrate(kappa, schedule, *window, fail_value=fail_value)
    return _finish(kappa, schedule.n, Family.CUSTOM.value, schedule, E)
