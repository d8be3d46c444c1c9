"""Grid scans of G over the constant-energy surface and extraction of positive bands."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gfun import ConjugateOperator

REFINE_ROUNDS = 12


@dataclass(frozen=True)
class ScanConfig:
    n_E: int = 2001
    n_x: int = 4001
    n_y: int = 801
    tol_sign: float = 1e-9
    endpoint_tol: float = 1e-4
    full_domain: bool = False


def _U_columns(orders: Sequence[int], x: np.ndarray) -> dict:
    """U_k(x) for every k in orders, from one recurrence pass."""
    want = set(orders)
    top = max(orders)
    out = {}
    u0 = np.ones_like(x)
    if 0 in want:
        out[0] = u0
    if top == 0:
        return out
    u1 = 2.0 * x
    if 1 in want:
        out[1] = u1
    for k in range(2, top + 1):
        u0, u1 = u1, 2.0 * x * u1 - u0
        if k in want:
            out[k] = u1
    return out


def _mU_sum(op: ConjugateOperator, x: np.ndarray) -> np.ndarray:
    """sum_q rho_q m(x) U_{j_q kappa - 1}(x)."""
    orders = [j * op.kappa - 1 for j in op.sigma]
    cols = _U_columns(orders, x)
    acc = np.zeros_like(x)
    for o, r in zip(orders, op.rho):
        acc += r * cols[o]
    return (1.0 - x) * (1.0 + x) * acc


def G_vec(op: ConjugateOperator, E: float, x, y=None) -> np.ndarray:
    """Vectorized G in dimension 2 (y None) or 3."""
    x = np.asarray(x, dtype=float)
    if y is None:
        z = E / x
        return (E / x) * _mU_sum(op, x) + x * _mU_sum(op, z)
    y = np.asarray(y, dtype=float)
    z = E / (x * y)
    return (E / x) * _mU_sum(op, x) + (E / y) * _mU_sum(op, y) + x * y * _mU_sum(op, z)


def min_G_2d(op: ConjugateOperator, E: float, n_x: int = 4001, sign: float = 1.0) -> tuple:
    """Minimum of G over x in [|E|, 1] (G is even in x) with local x4 refinement.

    With sign=-1 the minimum of -G is returned instead.
    """
    a = abs(E)
    xs = np.linspace(a, 1.0, n_x)
    vals = sign * G_vec(op, E, xs)
    i = int(np.argmin(vals))
    best, arg = float(vals[i]), float(xs[i])
    h = (1.0 - a) / (n_x - 1)
    for _ in range(REFINE_ROUNDS):
        loc = np.clip(np.linspace(arg - h, arg + h, 9), a, 1.0)
        v = sign * G_vec(op, E, loc)
        k = int(np.argmin(v))
        if v[k] < best:
            best, arg = float(v[k]), float(loc[k])
        h /= 4.0
    return best, arg


def _quadrant_min(op, E, n_x, n_y, sx, sy, sign=1.0):
    a = abs(E)
    ys = np.linspace(a, 1.0, n_y)
    s = np.linspace(0.0, 1.0, n_x)

    def pts(yv, sv):
        lo = np.abs(E / yv)
        xv = lo + sv * (1.0 - lo)
        return sx * xv, sy * yv

    Y, S = np.meshgrid(ys, s, indexing="ij")
    X, Yp = pts(Y, S)
    vals = sign * G_vec(op, E, X, Yp)
    i = np.unravel_index(int(np.argmin(vals)), vals.shape)
    best = float(vals[i])
    yb, sb = float(Y[i]), float(S[i])
    hy = (1.0 - a) / (n_y - 1)
    hs = 1.0 / (n_x - 1)
    for _ in range(REFINE_ROUNDS):
        yl = np.clip(np.linspace(yb - hy, yb + hy, 9), a, 1.0)
        sl = np.clip(np.linspace(sb - hs, sb + hs, 9), 0.0, 1.0)
        Yl, Sl = np.meshgrid(yl, sl, indexing="ij")
        Xl, Ylp = pts(Yl, Sl)
        v = sign * G_vec(op, E, Xl, Ylp)
        k = np.unravel_index(int(np.argmin(v)), v.shape)
        if v[k] < best:
            best, yb, sb = float(v[k]), float(Yl[k]), float(Sl[k])
        hy /= 4.0
        hs /= 4.0
    X, Yp = pts(np.array(yb), np.array(sb))
    return best, (float(X), float(Yp))


def min_G_3d(op: ConjugateOperator, E: float, n_x: int = 4001, n_y: int = 801,
             full_domain: bool = False, sign: float = 1.0) -> tuple:
    """Minimum of G over y in [|E|, 1], x in [|E/y|, 1]; full_domain also scans sign flips."""
    quads = [(1.0, 1.0)]
    if full_domain:
        quads += [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)]
    results = [_quadrant_min(op, E, n_x, n_y, sx, sy, sign) for sx, sy in quads]
    return min(results, key=lambda r: r[0])


def min_G(op: ConjugateOperator, E: float, dimension: int, cfg: ScanConfig,
          sign: float = 1.0) -> tuple:
    if dimension == 2:
        return min_G_2d(op, E, cfg.n_x, sign)
    return min_G_3d(op, E, cfg.n_x, cfg.n_y, cfg.full_domain, sign)


def _min_task(args):
    op, E, dim, cfg, sign = args
    return min_G(op, E, dim, cfg, sign)


def scan_energies(op, energies, dimension, cfg: ScanConfig, jobs: int = 1,
                  sign: float = 1.0) -> list:
    tasks = [(op, float(E), dimension, cfg, sign) for E in energies]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_min_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_min_task(t) for t in tasks]


@dataclass
class PositivityReport:
    operator: ConjugateOperator
    dimension: int
    energy_grid: list
    min_G: list
    argmin: list
    bands: list = field(default_factory=list)  # (left, right, verified)
    grid_resolution: tuple = ()
    witness: tuple | None = None  # (E, point, value) with value < -tol_sign

    @property
    def certified(self) -> bool:
        return bool(self.min_G) and self.witness is None and all(
            v > 0 for v in self.min_G)

    def bands_rows(self) -> list:
        rows = []
        for left, right, verified in self.bands:
            inside = [v for E, v in zip(self.energy_grid, self.min_G) if left < E < right]
            rows.append({"kappa": self.operator.kappa, "dim": self.dimension,
                         "sigma": " ".join(map(str, self.operator.sigma)),
                         "left": round(left, 4), "right": round(right, 4),
                         "min_interior_G": min(inside) if inside else float("nan"),
                         "verified": verified})
        return rows


def certify_band(op, E_left: float, E_right: float, cfg: ScanConfig,
                 dimension: int = 2, jobs: int = 1) -> PositivityReport:
    """Scan the open band (E_left, E_right); record the most negative point as witness."""
    lo, hi = sorted((E_left, E_right))
    energies = np.linspace(lo, hi, cfg.n_E + 2)[1:-1]
    res = scan_energies(op, energies, dimension, cfg, jobs)
    mins = [r[0] for r in res]
    args = [r[1] for r in res]
    k = int(np.argmin(mins))
    witness = None
    if mins[k] < -cfg.tol_sign:
        witness = (float(energies[k]), args[k], mins[k])
    ok = all(v > cfg.tol_sign for v in mins)
    bands = [(lo, hi, True)] if ok else []
    return PositivityReport(op, dimension, [float(e) for e in energies], mins, args,
                            bands, _resolution(dimension, cfg), witness)


def _resolution(dimension, cfg):
    return (cfg.n_E, cfg.n_x) if dimension == 2 else (cfg.n_E, cfg.n_x, cfg.n_y)


def find_bands(op, dimension: int = 2, window: tuple = (1e-4, 1 - 1e-4),
               cfg: ScanConfig | None = None, jobs: int = 1,
               definite: bool = False) -> PositivityReport:
    """Maximal runs of grid energies with min G > tol_sign, endpoints refined by bisection.

    With definite=True a run may also be uniformly negative (max G < -tol_sign),
    which is the criterion for the operator or its negative to work.
    """
    cfg = cfg or ScanConfig()
    lo, hi = window
    energies = np.linspace(lo, hi, cfg.n_E)
    res = scan_energies(op, energies, dimension, cfg, jobs)
    mins = [r[0] for r in res]
    pos = [v > cfg.tol_sign for v in mins]
    if definite:
        neg = [r[0] > cfg.tol_sign for r in scan_energies(op, energies, dimension, cfg, jobs, -1.0)]
        pos = [a or b for a, b in zip(pos, neg)]

    def positive(E):
        if min_G(op, E, dimension, cfg)[0] > cfg.tol_sign:
            return True
        return definite and min_G(op, E, dimension, cfg, -1.0)[0] > cfg.tol_sign

    def refine(a, b, a_pos):
        # a and b straddle a sign change; a_pos says which side is positive
        while b - a > cfg.endpoint_tol:
            mid = 0.5 * (a + b)
            if positive(mid) == a_pos:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    bands = []
    i = 0
    N = len(energies)
    while i < N:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < N and pos[j + 1]:
            j += 1
        left = float(energies[0]) if i == 0 else refine(float(energies[i - 1]), float(energies[i]), False)
        right = float(energies[-1]) if j == N - 1 else refine(float(energies[j]), float(energies[j + 1]), True)
        bands.append((left, right, True))
        i = j + 1
    k = int(np.argmin(mins))
    witness = None
    if mins[k] < -cfg.tol_sign:
        witness = (float(energies[k]), res[k][1], mins[k])
    return PositivityReport(op, dimension, [float(e) for e in energies], mins,
                            [r[1] for r in res], bands, _resolution(dimension, cfg), witness)


def profile_rows(op, E: float, n_x: int = 401, n_y: int | None = None) -> list:
    """Rows of (E, x, G) over both signs of x, or (E, x, y, G) on the positive quadrant."""
    a = abs(E)
    if n_y is None:
        xs = np.linspace(a, 1.0, n_x)
        xs = np.concatenate([-xs[::-1], xs])
        return [(E, float(x), float(g)) for x, g in zip(xs, G_vec(op, E, xs))]
    rows = []
    for y in np.linspace(a, 1.0, n_y):
        xs = np.linspace(abs(E / y), 1.0, n_x)
        for x, g in zip(xs, G_vec(op, E, xs, np.full_like(xs, y))):
            rows.append((E, float(x), float(y), float(g)))
    return rows


def emit_profile(op, E: float, sink, n_x: int = 401, n_y: int | None = None) -> int:
    """Write a profile as CSV to a file-like sink; returns the number of data rows."""
    rows = profile_rows(op, E, n_x, n_y)
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(["E", "x", "G"] if n_y is None else ["E", "x", "y", "G"])
    for r in rows:
        w.writerow([repr(v) for v in r])
    return len(rows)
