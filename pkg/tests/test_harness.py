import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from algflow import harness as hz
from algflow.curve1d import LaurentCurve
from algflow.lattice import Lattice, subgroup_closure
from algflow.linalg import RealSubspace
from conftest import split_lattice

INV = LaurentCurve(1, {-1: [1]})
QUARTER = hz.SampleDomain(0.5, 1.0, 0.0, math.pi / 2, N=20_000)


def test_lambda0_annulus():
    assert math.isclose(hz.lambda0(INV, hz.SampleDomain(0.5, 1.0)), 6 * math.pi, rel_tol=1e-12)


def test_inverse_mass_ratio_is_one():
    res = hz.mass_check(INV, QUARTER, [2.0**-3, 2.0**-6])
    assert all(abs(r["ratio"] - 1) < 1e-9 for r in res["rows"])


def test_empirical_mass_close_to_quadrature():
    mu = hz.sample_mu_a(INV, QUARTER.with_scale(0.1), Lattice.standard(1))
    assert abs(mu.normalized_mass - 1) < 1e-3


def test_empty_sample():
    mu = hz.sample_mu_a(INV, hz.SampleDomain(0.5, 1.0, N=0), Lattice.standard(1))
    assert mu.total_mass == 0 and len(mu.weights) == 0


def test_domain_validation():
    with pytest.raises(ValueError):
        hz.SampleDomain(0.6, 0.5)
    with pytest.raises(ValueError):
        hz.SampleDomain(0.1, 0.5, a=0)


def test_sector_membership_examples():
    spec = hz.SectorSpec(2, 1.0, 0)
    assert hz.sector_membership(0.1 * np.exp(0.004j), spec)
    assert hz.sector_membership(0.1, spec)
    assert not hz.sector_membership(0.1 * np.exp(0.01j), spec)


def test_weyl_point_mass_and_uniform():
    T = Lattice.standard(1)
    H = subgroup_closure(RealSubspace.full(2), [0], T)
    pt = hz.EmpiricalMeasure(np.tile([[0.3, 0.7]], (50, 1)), np.zeros((50, 0)), np.ones(50), 50.0, 50.0)
    rep = hz.weyl_test(pt, H, T, D=2)
    assert all(math.isclose(v, 1.0) for _, v in rep.other)
    rng = np.random.Generator(np.random.PCG64(1))
    N = 1_000_000
    uni = hz.EmpiricalMeasure(rng.random((N, 2)), np.zeros((N, 0)), np.ones(N), float(N), float(N))
    rep = hz.weyl_test(uni, H, T, D=3)
    assert rep.max_other <= 0.01 and rep.passed


def test_weyl_circle_annihilators():
    T = Lattice.standard(1)
    circle = subgroup_closure(RealSubspace.span([[1, 0]], 2), [0], T)
    N = 20_000
    pts = np.stack([(np.arange(N) + 0.5) / N, np.full(N, 0.25)], axis=-1)
    mu = hz.EmpiricalMeasure(pts, np.zeros((N, 0)), np.ones(N), float(N), float(N))
    rep = hz.weyl_test(mu, circle, T, D=2)
    assert rep.passed
    assert all(m[0] == 0 for m, _ in rep.annihilating)
    assert all(math.isclose(v, 1.0) for _, v in rep.annihilating)


def test_determinism_across_workers():
    dom = hz.SampleDomain(0.5, 1.0, 0, math.pi / 2, a=2.0**-4, N=200_003, seed=9)
    f = LaurentCurve(1, {-1: [1], 1: [2]})
    a = hz.sample_mu_a(f, dom, Lattice.standard(1), workers=1)
    b = hz.sample_mu_a(f, dom, Lattice.standard(1), workers=4)
    assert a.total_mass == b.total_mass
    assert np.array_equal(a.compact, b.compact) and np.array_equal(a.weights, b.weights)


def test_seed_changes_samples():
    L = Lattice.standard(1)
    a = hz.sample_mu_a(INV, QUARTER.with_scale(0.1), L)
    dom = hz.SampleDomain(0.5, 1.0, 0.0, math.pi / 2, a=0.1, N=20_000, seed=1)
    assert not np.array_equal(a.compact, hz.sample_mu_a(INV, dom, L).compact)


@given(st.floats(0.01, 0.2), st.floats(-0.4, 0.4), st.floats(0.3, 3.0))
def test_sector_soundness(r, phi, A):
    """Flagged points satisfy |Im H(f(x))| < A, with H evaluated from f directly."""
    f = LaurentCurve(2, {-2: [1, 0], -1: [0, 1]})
    xc = hz.SectorCoordinate(f, split_lattice())
    x = r * np.exp(1j * phi)
    spec = hz.SectorSpec(xc.d, A, 0)
    if hz.sector_membership(xc(x), spec):
        assert abs(xc.H(f.evaluate(np.array([x])))[0].imag) < A * (1 + 1e-9)


def test_sector_mass_constant_small():
    f = LaurentCurve(2, {-2: [1, 0], -1: [0, 1]})
    dom = hz.SampleDomain(0.5, 1.0, N=100_000)
    res = hz.mass_check(f, dom, [2.0**-4, 2.0**-6], split_lattice(), hz.SectorSpec(2, 1.0, 0))
    vals = [r["ratio"] for r in res["rows"]]
    assert all(abs(v - 12) < 0.6 for v in vals)


def test_l1_distance_detects_points_off_the_curve():
    on = np.array([[0, 0, 0], [0, 0, 0]], dtype=complex)
    s = (-1 + np.sqrt(1 + 4 * 0.7 * hz.ROT)) / 2
    on[0, 1] = s
    on[1, 1] = 0.5 + 0.5j
    d = hz.distance_to_C1_T1(on)
    assert d[0] < 1e-8 and d[1] > 0.05


def test_semi_torus_scans_small():
    L3 = Lattice.standard(3, real_only=True)
    r0 = hz.cluster_scan(hz.tau_map, hz.region_both_large(1e3, 0.5), L3, 20_000, 0.5, seed=2)
    assert r0.fraction < 1e-3
    r2 = hz.cluster_scan(hz.tau_map, hz.region_z2_large(1e3, 0.3), L3, 20_000, 1.0, hz.distance_to_T2, hz.grid_cover_T2(), seed=2)
    assert r2.max_distance < 1e-6 and r2.coverage == 1.0
