import random

import numpy as np
import pytest

from algflow.cones import _sign_ok, verify_certificate
from algflow.curve1d import LaurentCurve, pole_space, stratify
from algflow.errors import DepthExceeded, SchemaError, TruncationInsufficient
from algflow.lattice import Lattice
from algflow.linalg import ComplexSubspace, QI
from algflow.multiflow import (
    MultiLaurentMap,
    brute_force_leading,
    coefficient_space,
    compose,
    compose_curve,
    enumerate_complete_sequences,
    good_disc,
    leading_powers,
    limit_component,
    orbit_point,
    separation_exponents,
    substitute_units,
)
from generators import sparse_map


def mono_map(betas, n=1, vec=None):
    vec = vec or [1] + [0] * (n - 1)
    return MultiLaurentMap(len(betas[0]), len(betas[0]), {(b, ()): vec for b in betas}, n=n)


def independent_pair():
    return MultiLaurentMap(2, 2, {((-1, 0), ()): [1, 0], ((0, -1), ()): [0, 1]})


def test_leading_powers_examples():
    F = mono_map([(-1, 0), (-1, 1), (0, -2), (1, -1)])
    assert leading_powers(F) == [(-1, 0), (0, -2)]
    assert leading_powers(mono_map([(0, 0), (1, 2)])) == []
    assert leading_powers(mono_map([(-1, -1)])) == [(-1, -1)]


def test_leading_powers_against_definition():
    rng = random.Random(3)
    for _ in range(50):
        F = sparse_map(rng)
        assert leading_powers(F) == brute_force_leading(F)


def test_coefficient_space_examples():
    F = MultiLaurentMap(1, 2, {((-1,), (0,)): [1, 0], ((-1,), (1,)): [0, 1]})
    assert coefficient_space(F, (-1,)).dim == 2
    assert coefficient_space(mono_map([(-1,)], 2, [1, 2]), (-1,)).dim == 1
    G = MultiLaurentMap(1, 2, {((-1,), (0,)): [1, 2], ((-1,), (1,)): [1, 2]})
    assert coefficient_space(G, (-1,)).dim == 1


def test_independent_pair_has_one_complete_sequence():
    seqs = enumerate_complete_sequences(independent_pair())
    assert len(seqs) == 1
    s = seqs[0]
    assert s.betas == [(-1, 0), (0, -1)] and s.F == ComplexSubspace.full(2)
    assert s.b_zero == [] and s.lam == (1, 1)


def test_constant_map_has_empty_sequence():
    seqs = enumerate_complete_sequences(mono_map([(0, 0)]))
    assert len(seqs) == 1 and seqs[0].betas == [] and seqs[0].b_zero == [(0, 0)]


def test_mixed_monomial_two_sequences():
    seqs = enumerate_complete_sequences(mono_map([(-1, 1)]))
    assert [s.betas for s in seqs] == [[], [(-1, 1)]]
    assert seqs[0].b_plus == [(-1, 1)] and seqs[1].b_plus == []
    for s in seqs:
        assert verify_certificate(s.sigma_geq, s.sigma_minus, s.certificate)
        assert _sign_ok(s.lam, s.betas, s.b_zero, s.b_plus)


def test_depth_bound():
    with pytest.raises(DepthExceeded) as info:
        enumerate_complete_sequences(independent_pair(), depth_bound=1)
    assert info.value.partial == []
    assert enumerate_complete_sequences(independent_pair(), depth_bound=1, strict=False) == []


def test_orbit_points():
    s = enumerate_complete_sequences(independent_pair())[0]
    assert not np.any(orbit_point(s, independent_pair(), [], [0.5, 2.0]))
    const = MultiLaurentMap(2, 3, {((0, 0), (0,)): [1, 0], ((0, 0), (1,)): [0, 1], ((-1, 0), (0,)): [1, 0]})
    seq = [x for x in enumerate_complete_sequences(const) if x.betas == [(-1, 0)]][0]
    p1 = orbit_point(seq, const, [2.0], [0.3, 1.7])
    p2 = orbit_point(seq, const, [2.0], [5.0, -1.0])
    assert np.allclose(p1, p2) and np.allclose(p1, [0, 2.0])
    sweep = MultiLaurentMap(2, 2, {((1, -1), ()): [1, 0], ((-1, 1), ()): [0, 1]})
    seq = [x for x in enumerate_complete_sequences(sweep) if x.betas == []][0]
    assert seq.b_zero == [(-1, 1), (1, -1)]
    for z in ([1, 1], [2, 1], [1j, 2]):
        r = z[0] / z[1]
        assert np.allclose(orbit_point(seq, sweep, [], z), [r, 1 / r])


def test_good_disc_one_variable():
    F = mono_map([(-1,)])
    seq = enumerate_complete_sequences(F)[0]
    d = good_disc(seq, F)
    assert d.lam == (1,) and d.N0 == 0 and d.gamma == (1,) and d.M == 1
    curve = compose(F, d)
    assert curve.terms[-1] == (QI(1),)
    assert pole_space(curve) == ComplexSubspace.full(1)


def test_separation_exponents():
    gamma, M = separation_exponents(2, 2)
    assert (gamma, M) == ((3, 4), 9)
    dots = sorted(gamma[0] * a + gamma[1] * b for a in range(3) for b in range(3) if a + b <= 2)
    assert len(set(dots)) == len(dots) and max(dots) < M
    assert min(gamma[0] * a + gamma[1] * b for a in range(4) for b in range(4) if a + b == 3) >= M


def test_bounded_map_gives_pure_monomials():
    F = MultiLaurentMap(1, 1, {((0,), ()): [1], ((2,), ()): [1]})
    seq = enumerate_complete_sequences(F)[0]
    d = good_disc(seq, F)
    assert not d.perturbed
    curve = compose(F, d)
    assert curve.pole_bound == 0


def test_compose_examples():
    f = LaurentCurve(1, {-2: [1]})
    g = compose_curve(f, 1, gamma=1, out_truncation=2)
    assert [g.terms[e][0] for e in (-2, -1, 0, 1)] == [QI(1), QI(-2), QI(3), QI(-4)]
    assert compose_curve(LaurentCurve(1, {-1: [1], 2: [3]}), 1, out_truncation=3).terms == {-1: (QI(1),), 2: (QI(3),)}
    assert compose_curve(LaurentCurve(1, {-1: [1]}), 2).terms == {-2: (QI(1),)}


def test_compose_refuses_when_truncation_leaves_nothing():
    terms = {((-1, 0), (0,)): [1, 0], ((0, -1), (0,)): [0, 1]}
    exact = MultiLaurentMap(2, 3, terms)
    seq = [x for x in enumerate_complete_sequences(exact) if len(x.betas) == 2][0]
    d = good_disc(seq, exact)
    assert pole_space(compose(exact, d)) == seq.F
    vague = MultiLaurentMap(2, 3, terms, trunc_theta=1, pole_bound=5)
    with pytest.raises(TruncationInsufficient):
        compose(vague, d)


def test_truncated_map_needs_pole_bound():
    with pytest.raises(SchemaError):
        MultiLaurentMap(1, 1, {((-1,), ()): [1]}, trunc_beta=2)


def test_limit_component_examples():
    F = independent_pair()
    seq = enumerate_complete_sequences(F)[0]
    rep = limit_component(seq, F, Lattice.standard(2), sample_grid=[[]])
    assert rep.torus.dim == 4 and rep.finite and not rep.heuristic


def test_unit_substitution_keeps_leading_data():
    rng = random.Random(5)
    for _ in range(30):
        F = sparse_map(rng)
        G = substitute_units(F, [QI(rng.randint(1, 3), rng.randint(-2, 2)) for _ in range(F.l)])
        assert leading_powers(G) == leading_powers(F)


def test_map_json_round_trip():
    F = MultiLaurentMap(1, 2, {((-1,), (1,)): [QI(1, 1)]}, trunc_beta=3, trunc_theta=4, pole_bound=2)
    G = MultiLaurentMap.from_json(F.to_json())
    assert G.terms == F.terms and G.pole_bound == 2 and G.trunc_theta == 4
