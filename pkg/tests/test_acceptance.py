"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the summary
section) or directly with ``python tests/test_acceptance.py``.
"""

import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
from scipy.spatial import cKDTree

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, split_lattice  # noqa: E402
from generators import gaussian, sparse_map  # noqa: E402

from algflow import harness as hz  # noqa: E402
from algflow.cones import _sign_ok, brute_force_lambda, verify_certificate  # noqa: E402
from algflow.curve1d import LaurentCurve, limit_set, limit_set_compact, pole_space, stratify  # noqa: E402
from algflow.errors import NoPoles  # noqa: E402
from algflow.lattice import Lattice, realify_float, subgroup_closure  # noqa: E402
from algflow.linalg import Ball, ComplexSubspace, QI, RealSubspace, realify_subspace  # noqa: E402
from algflow.multiflow import (  # noqa: E402
    MultiLaurentMap,
    brute_force_leading,
    compose,
    enumerate_complete_sequences,
    good_disc,
    leading_powers,
    substitute_units,
)


def record(k, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _unit(k, N=4):
    return [Fraction(int(i == k)) for i in range(N)]


# 1 ---------------------------------------------------------------------------


def test_worked_example_exact():
    t = time.perf_counter()
    f = LaurentCurve(2, {-2: [1, 0], -1: [0, 1]})
    L = split_lattice()
    rep = limit_set(f, L)
    from algflow.curve1d import analyze_radii

    ra = analyze_radii(f, L)
    elapsed = time.perf_counter() - t
    real_line = RealSubspace.span([_unit(0), _unit(1), _unit(2)], 4)
    imag_line = RealSubspace.span([_unit(0), _unit(1), _unit(3)], 4)
    checks = [
        ra.kappa == 1,
        abs(complex(ra.lam.mid) - 1) < 1e-60,
        [r.direction.angle_over_pi for r in ra.radii] == [0, Fraction(1, 2), 1, Fraction(3, 2)],
        all(r.is_gamma_radius for r in ra.radii),
        all(r.v_prime.equals(real_line if r.p % 2 == 0 else imag_line) for r in ra.radii),
        rep.kind == "radii" and len(rep.components) == 2,
    ]
    comps = {tuple(c.provenance["radii"]): c.subgroup for c in rep.components}
    checks.append(set(comps) == {(0, 2), (1, 3)})
    if checks[-1]:
        zero = [Fraction(0)] * 4
        checks.append(comps[(0, 2)].same_set(subgroup_closure(real_line, zero, L)))
        checks.append(comps[(1, 3)].same_set(subgroup_closure(imag_line, zero, L)))
    checks.append(elapsed < 1.0)
    record(1, all(checks), f"two semi-tori C* x R/Z and C* x iR/iZ, {sum(checks)}/{len(checks)} checks, {elapsed:.3f}s")


# 2 ---------------------------------------------------------------------------


def test_compact_equidistribution():
    t = time.perf_counter()
    f = LaurentCurve(1, {-1: [1]})
    T = Lattice.standard(1)
    H = subgroup_closure(RealSubspace.full(2), [0], T)
    dom = hz.SampleDomain(0.5, 1.0, 0.0, math.pi / 2, N=1_000_000, seed=0)
    grid = [2.0**-k for k in range(5, 11)]
    reports, mono = hz.weyl_scan(f, dom, T, H, grid, D=3, tol=0.05)
    at8 = reports[grid.index(2.0**-8)]
    elapsed = time.perf_counter() - t
    ok = at8.passed and at8.max_other <= 0.05 and mono and elapsed < 60
    maxes = ", ".join(f"{r.max_other:.4f}" for r in reports)
    record(2, ok, f"max |W(m)| at a=2^-8 is {at8.max_other:.4f}; along grid [{maxes}]; monotone={mono}; {elapsed:.1f}s")


# 3 ---------------------------------------------------------------------------


def test_mass_asymptotics():
    dom = hz.SampleDomain(0.5, 1.0, 0.0, math.pi / 2)
    grid = [2.0**-k for k in range(3, 11)]
    exact = hz.mass_check(LaurentCurve(1, {-1: [1]}), dom, grid)
    dev = max(abs(r["ratio"] - 1) for r in exact["rows"])
    pert = hz.mass_check(LaurentCurve(1, {-2: [1], -1: [1]}), dom, grid)
    band = all(abs(r["ratio"] - 1) <= 5 * r["a"] for r in pert["rows"])
    slope = pert["slope"]
    ok = dev <= 1e-6 and band and slope is not None and abs(slope - 1) <= 0.2
    record(3, ok, f"x^-1 max |ratio-1| = {dev:.2e}; perturbed within 5|a| = {band}; slope = {slope:.3f}")


# 4 ---------------------------------------------------------------------------


def test_sector_mass():
    f = LaurentCurve(2, {-2: [1, 0], -1: [0, 1]})
    dom = hz.SampleDomain(0.5, 1.0, N=1_000_000, seed=0)
    grid = [2.0**-k for k in range(4, 9)]
    res = hz.mass_check(f, dom, grid, split_lattice(), hz.SectorSpec(2, 1.0, 0))
    vals = [r["ratio"] for r in res["rows"]]
    mean = sum(vals) / len(vals)
    spread = (max(vals) - min(vals)) / mean
    record(4, spread <= 0.05, f"normalized sector masses {[round(v, 3) for v in vals]}, relative spread {spread:.3%}")


# 5 ---------------------------------------------------------------------------


def test_leading_power_oracle():
    rng = random.Random(2024)
    agree = robust = 0
    total = 200
    for _ in range(total):
        F = sparse_map(rng, max_terms=12, span=4)
        lp = leading_powers(F)
        agree += lp == brute_force_leading(F)
        units = [gaussian(rng, 4) or QI(1) for _ in range(F.l)]
        robust += leading_powers(substitute_units(F, units)) == lp
    record(5, agree == total and robust == total, f"definition scan agreement {agree}/{total}; unit substitution {robust}/{total}")


# 6 ---------------------------------------------------------------------------


def test_cone_lambda_oracle():
    rng = random.Random(77)
    seqs = []
    while len(seqs) < 100:
        F = sparse_map(rng, n=rng.randint(1, 3), max_terms=6, span=2)
        for s in enumerate_complete_sequences(F, strict=False):
            seqs.append(s)
    seqs = seqs[:100]
    sign = exhaust = cert = 0
    for s in seqs:
        sign += _sign_ok(s.lam, s.betas, s.b_zero, s.b_plus)
        exhaust += brute_force_lambda(s.betas, s.b_zero, s.b_plus, len(s.lam), sum(s.lam)) == s.lam
        cert += verify_certificate(s.sigma_geq, s.sigma_minus, s.certificate)
    n = len(seqs)
    record(6, sign == exhaust == cert == n, f"{n} sequences: sign {sign}, l1-minimal {exhaust}, certificates {cert}")


# 7 ---------------------------------------------------------------------------


def regression_maps():
    h = QI(Fraction(1, 2), 1)
    return [
        ("l=1", MultiLaurentMap(1, 1, {((-1,), ()): [1]}), None),
        ("l=2 independent", MultiLaurentMap(2, 2, {((-1, 0), ()): [1, 0], ((0, -1), ()): [0, 1]}), None),
        ("mixed monomial", MultiLaurentMap(2, 2, {((-1, 1), ()): [1, 0], ((0, 0), ()): [0, h]}), None),
        (
            "perturbed l=2",
            MultiLaurentMap(2, 2, {((-1, 0), ()): [1, 0], ((-1, 1), ()): [0, 1], ((0, -1), ()): [1, 1], ((0, 0), ()): [h, 0]}),
            None,
        ),
        (
            "regular variable",
            MultiLaurentMap(1, 2, {((-1,), (0,)): [1, 0], ((-1,), (1,)): [0, 1], ((0,), (0,)): [h, QI(0, 1)]}),
            None,
        ),
        (
            "l=3 chain",
            MultiLaurentMap(3, 3, {((-2, 0, 0), ()): [1, 0], ((0, -1, 1), ()): [0, 1], ((0, 0, -1), ()): [1, 1]}),
            [QI(2), QI(1), QI(-1)],
        ),
        ("zero-face orbit", MultiLaurentMap(2, 2, {((1, -1), ()): [1, 0], ((-1, 1), ()): [0, 1], ((0, 0), ()): [h, h]}), None),
    ]


def test_good_disc_end_to_end():
    total = strat_ok = closure_ok = 0
    for name, F, alpha in regression_maps():
        L = Lattice.standard(F.n)
        for seq in enumerate_complete_sequences(F):
            total += 1
            disc = good_disc(seq, F, alpha)
            curve = compose(F, disc)
            strat_ok += pole_space(curve) == seq.F
            b = list(disc.target)
            expect = subgroup_closure(realify_subspace(seq.F), b, L)
            try:
                got = limit_set_compact(stratify(curve), L)
            except NoPoles as exc:
                got = subgroup_closure(RealSubspace.zero(2 * F.n), list(exc.value), L)
            closure_ok += got.same_set(expect)
    ok = total > 0 and strat_ok == total and closure_ok == total
    record(7, ok, f"{total} sequences on {len(regression_maps())} maps: pole space {strat_ok}/{total}, closure {closure_ok}/{total}")


# 8 ---------------------------------------------------------------------------


def test_semi_torus_cluster_scans():
    t = time.perf_counter()
    L3 = Lattice.standard(3, real_only=True)
    N = 100_000
    r0 = hz.cluster_scan(hz.tau_map, hz.region_both_large(1e3, 0.5), L3, N, 0.5, seed=10)
    r1 = hz.cluster_scan(hz.tau_map, hz.region_z1_large(1e3, 0.3), L3, N, 1.0, hz.distance_to_C1_T1, seed=11)
    r2 = hz.cluster_scan(
        hz.tau_map, hz.region_z2_large(1e3, 0.3), L3, N, 1.0, hz.distance_to_T2, hz.grid_cover_T2(0.1), seed=12
    )
    elapsed = time.perf_counter() - t
    ok = (
        r0.fraction < 1e-3
        and r1.retained > 0
        and r1.max_distance <= 1e-2
        and r2.coverage == 1.0
        and elapsed < 120
    )
    record(
        8,
        ok,
        f"empty region retained {r0.fraction:.1e}; z1 region {r1.retained} kept, max dist {r1.max_distance:.1e}; "
        f"z2 region coverage {r2.coverage:.2f}; {elapsed:.1f}s",
    )


# 9 ---------------------------------------------------------------------------


def _irrational_subspaces():
    s2, s3, s5 = (Ball.from_mp(mpmath.sqrt(k)) for k in (2, 3, 5))
    gold = Ball.from_mp((1 + mpmath.sqrt(5)) / 2)
    z, one = Ball.exact(0), Ball.exact(1)
    out = []
    for c in (s2, s3, s5, gold):
        out.append((1, [[one, c]]))
        out.append((1, [[c, one]]))
    for c in (s2, s3, s5, gold):
        out.append((2, [[one, c, z, z]]))
        out.append((2, [[z, z, one, c]]))
        out.append((2, [[one, z, c, z], [z, z, z, one]]))
    return out[:20]


def _orbit_check(S, t, L, rng, count=300_000, reach=400.0, n_test=300, delta=0.05):
    H = subgroup_closure(S, t, L)
    rows = S.to_float()
    c = rng.uniform(-reach, reach, size=(count, rows.shape[0]))
    x = np.array([float(v) for v in t]) + c @ rows
    far = float(np.max(H.distance(x)))
    if not H.is_compact:
        return far, True
    comp, _ = L.coords_float(x)
    tree = cKDTree(comp % 1.0, boxsize=1.0)
    probe = H.sample(rng, n_test, spread=reach)
    pc, _ = L.coords_float(probe)
    d, _ = tree.query(pc % 1.0)
    return far, bool(np.max(d) <= delta)


def test_closure_formula_oracle():
    rng = np.random.Generator(np.random.PCG64(5))
    prng = random.Random(5)
    worst = 0.0
    dense = cases = 0
    for _ in range(50):
        n = prng.choice([1, 2])
        N = 2 * n
        dim = prng.randint(1, 2)
        rows = [[Fraction(prng.randint(-2, 2)) for _ in range(N)] for _ in range(dim)]
        if not any(any(r) for r in rows):
            rows[0][0] = Fraction(1)
        S = RealSubspace.span(rows, N)
        t = [Fraction(prng.randint(0, 9), 10) for _ in range(N)]
        far, ok = _orbit_check(S, t, Lattice.standard(n), rng, count=60_000, reach=20.0)
        worst, dense, cases = max(worst, far), dense + ok, cases + 1
    for n, rows in _irrational_subspaces():
        S = RealSubspace.span(rows, 2 * n)
        t = [0.3] * (2 * n)
        far, ok = _orbit_check(S, t, Lattice.standard(n), rng)
        worst, dense, cases = max(worst, far), dense + ok, cases + 1
    record(9, dense == cases and worst <= 1e-9, f"{cases} subspaces: delta-dense {dense}/{cases}, max distance {worst:.1e}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    order = sorted(tests, key=lambda fn: fn.__code__.co_firstlineno)
    failed = 0
    for fn in order:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
