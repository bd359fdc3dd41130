"""Weyl sums of the push-forward of a small quarter annulus under x -> 1/x on C/(Z+iZ).

Characters that do not annihilate the limit torus should average out as a
shrinks; the noise floor of the lattice rule is printed alongside.
"""

import math

from algflow import harness as hz
from algflow.curve1d import LaurentCurve
from algflow.lattice import Lattice, subgroup_closure
from algflow.linalg import RealSubspace

T = Lattice.standard(1)
f = LaurentCurve(1, {-1: [1]})
H = subgroup_closure(RealSubspace.full(2), [0], T)
dom = hz.SampleDomain(0.5, 1.0, 0.0, math.pi / 2, N=200_000, seed=0)

reports, mono = hz.weyl_scan(f, dom, T, H, [2.0**-k for k in range(5, 11)])
print("      a     max|W|     noise")
for r in reports:
    print(f"{r.meta['a']:9.2e}  {r.max_other:8.5f}  {r.noise:8.5f}")
print("monotone within noise:", mono)

mass = hz.mass_check(f, dom, [2.0**-k for k in range(3, 7)])
print("mass ratios:", [round(r["ratio"], 12) for r in mass["rows"]])
