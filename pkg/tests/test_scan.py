import io
import math
import random

import numpy as np
import pytest

from mvmourre.gfun import G, ConjugateOperator
from mvmourre.interp import band_operator
from mvmourre.scan import (G_vec, ScanConfig, certify_band, emit_profile, find_bands, min_G_2d,
                           min_G_3d, scan_energies)
from mvmourre.solver import solve_J2

E1 = (math.sqrt(5) - 1) / 2
RHO8 = (17 + 8 * math.sqrt(5)) / 62
BAND1 = ConjugateOperator(4, (1, 2), (1.0, RHO8))


def test_vectorized_matches_scalar():
    op = band_operator(4, 3, (1, 2, 3, 4, 5, 6))
    rng = random.Random(3)
    for _ in range(50):
        E = rng.uniform(0.05, 0.95)
        y = rng.uniform(E, 1)
        x = rng.uniform(E / y, 1)
        assert G_vec(op, E, np.array([x]))[0] == pytest.approx(G(op, E, x), abs=1e-12)
        assert G_vec(op, E, np.array([x]), np.array([y]))[0] == pytest.approx(G(op, E, x, y), abs=1e-12)


def test_min_2d_examples():
    v, arg = min_G_2d(BAND1, E1, 4001)
    assert abs(v) < 1e-12 and arg == pytest.approx(E1, abs=1e-3)
    assert min_G_2d(BAND1, 0.66, 4001)[0] > 0
    assert min_G_2d(ConjugateOperator.trivial(4), 0.6, 4001)[0] < 0


def test_min_3d_examples():
    op = band_operator(4, 2, (1, 2, 3, 7))
    E2, E1_ = solve_J2(4, 2).energy, solve_J2(4, 1).energy
    assert min_G_3d(op, 0.59, 201, 201)[0] > 0
    for E in (E2, E1_):
        assert min_G_3d(op, E, 201, 201)[0] >= -1e-8
    assert min_G_3d(ConjugateOperator.trivial(4), 0.5, 101, 101)[0] < 0


def test_quadrant_reduction_matches_full_domain():
    op = band_operator(4, 2, (1, 2, 3, 7))
    for E in (0.3, 0.59, 0.8):
        a = min_G_3d(op, E, 101, 101)[0]
        b = min_G_3d(op, E, 101, 101, full_domain=True)[0]
        assert a == pytest.approx(b, abs=1e-12)


def test_finer_grid_keeps_sign():
    rng = random.Random(5)
    ops = [BAND1, band_operator(6, 2, (1, 2, 3, 4)), ConjugateOperator.trivial(6)]
    for _ in range(10):
        op = rng.choice(ops)
        E = rng.uniform(0.05, 0.95)
        coarse = min_G_2d(op, E, 401)[0]
        fine = min_G_2d(op, E, 4010)[0]
        if abs(coarse) > 1e-9:
            assert (coarse > 0) == (fine > 0)
        assert fine <= coarse + 1e-12


def test_endpoint_tangency():
    op = band_operator(4, 2, (1, 2, 3, 7))
    for n in (1, 2):
        E = solve_J2(4, n).energy
        v, x = min_G_2d(op, E, 4001)
        assert -1e-8 <= v <= 1e-6
        h = 1e-6
        if E + h < x < 1 - h:
            assert abs((G(op, E, x + h) - G(op, E, x - h)) / (2 * h)) <= 1e-5


def test_trivial_bands_kappa6():
    r = find_bands(ConjugateOperator.trivial(6), 2, cfg=ScanConfig(n_E=401, n_x=1001), definite=True)
    got = [(a, b) for a, b, _ in r.bands]
    want = [(0, 0.25), (0.5064, 0.75), (0.8660, 1)]
    assert len(got) == 3
    for (a, b), (c, d) in zip(got, want):
        assert a == pytest.approx(c, abs=1e-3) and b == pytest.approx(d, abs=1e-3)


@pytest.mark.parametrize("kappa,want", [(6, (0.5024, 0.672)), (8, (0.70897, 0.804))])
def test_second_interval_evidence(kappa, want):
    op = band_operator(kappa, 1, (1, 2))
    r = find_bands(op, 2, (0.3, 0.99), ScanConfig(n_E=801, n_x=1001), definite=True)
    assert any(abs(a - want[0]) < 2e-3 and abs(b - want[1]) < 2e-3 for a, b, _ in r.bands)


def test_certify_band_report():
    op = band_operator(4, 2, (1, 2, 3, 7))
    left, right = solve_J2(4, 2).energy, solve_J2(4, 1).energy
    rep = certify_band(op, left, right, ScanConfig(n_E=51, n_x=1001))
    assert rep.certified and rep.witness is None
    assert all(left < e < right for e in rep.energy_grid)
    bad = band_operator(4, 2, (1, 2, 3, 4))
    rep = certify_band(bad, left, right, ScanConfig(n_E=51, n_x=1001))
    assert not rep.certified and rep.witness[2] < 0


def test_parallel_scan_is_deterministic():
    cfg = ScanConfig(n_x=501)
    es = list(np.linspace(0.1, 0.9, 16))
    a = scan_energies(BAND1, es, 2, cfg, jobs=1)
    b = scan_energies(BAND1, es, 2, cfg, jobs=2)
    assert a == b


def test_profile_csv():
    buf = io.StringIO()
    c = math.cos(math.pi / 6)
    op = band_operator(6, 1, (1, 2))
    rows = emit_profile(op, c, buf, n_x=11)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "E,x,G" and len(lines) == rows + 1 == 23
    vals = [tuple(map(float, l.split(","))) for l in lines[1:]]
    gs = [g for _, _, g in vals]
    assert gs == pytest.approx(gs[::-1], abs=1e-14)
    at = {round(x, 12): g for _, x, g in vals}
    assert at[round(c, 12)] == pytest.approx(0, abs=1e-12)
    assert at[1.0] == pytest.approx(0, abs=1e-12)
    buf = io.StringIO()
    emit_profile(op, 0.8, buf, n_x=5, n_y=5)
    assert buf.getvalue().splitlines()[0] == "E,x,y,G"
