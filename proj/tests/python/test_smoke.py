import math
import random

import pytest

cd = pytest.importorskip("_convexdom")


def make_grid():
    return cd.GridSpec(d=1, root_level=0, cell_level=-6)


def rand_function(grid, n=1, m=1, seed=1):
    rng = random.Random(seed)
    f = cd.GridFunction(grid, n, m)
    f.values = [rng.gauss(0, 1) for _ in f.values]
    return f


def test_grid_and_norms():
    g = make_grid()
    assert g.cell_count() == 64
    f = rand_function(g)
    assert cd.lp_norm(f, 2.0) > 0
    mf = cd.maximal_function(f, 2.0, dyadic=True)
    assert all(v >= 0 for v in mf.values)


def test_body_dot_and_reduction():
    g = make_grid()
    f = rand_function(g, n=2, seed=2)
    h = rand_function(g, n=2, seed=3)
    value, method, certified = cd.body_dot(f, h, 2.0, 2.0)
    assert value > 0
    assert certified
    R, rank = cd.reducing_transform(f, 2.0)
    assert rank == 2
    assert len(R) == 2


def test_weights():
    g = make_grid()
    W = cd.weight_generator(g, 2, "scalar_power", alpha=0.5, r=2.0, seed=1)
    a2 = cd.a_r_constant(W, 2.0)
    assert a2 >= 1.0
    assert cd.rh_ts_constant(W, 2.0, 2.0) >= 1.0
    identity = cd.weight_generator(g, 2, "identity")
    assert cd.a_r_constant(identity, 2.0) == pytest.approx(1.0)


def test_family_and_domination():
    g = make_grid()
    fam = cd.make_family("smooth_bump", d=1, level=-2, n1=-4, n2=-2)
    rec = cd.certify(fam, g)
    assert rec["a_circ"] > 0
    assert rec["a_circ_tag"] == "exact"
    f = rand_function(g, n=2, seed=4)
    h = rand_function(g, n=2, seed=5)
    cert = cd.multiscale_dominate(fam, f, h)
    assert cert["passed"]
    assert cert["min_witness_ratio"] >= 0.5
    assert math.isfinite(cert["ratio"])


def test_multiplier_and_commutator_numbers():
    rep = cd.decompose_multiplier()
    assert rep["ok"]
    assert rep["telescoping_error"] <= 1e-12
    assert rep["reconstruction_error"] <= 1e-2
    assert cd.c_qr(4.0, 2.0) == pytest.approx(0.2)
    mn, ok = cd.com_numbers_min(4.0, 2.0)
    assert ok and mn > 0
