"""Limit set of t -> (t^2, t) read through the curve f(x) = (x^-2, x^-1).

The group is C^2 / (Z x (Z + iZ)); the first factor is a cylinder, so the
flow is non-compact and the limit set splits along four radii.
"""

from algflow.curve1d import LaurentCurve, analyze_radii, limit_set
from algflow.lattice import Lattice
from algflow.linalg import QI

L = Lattice(2, [[QI(1), QI(0)], [QI(0), QI(1)], [QI(0), QI(0, 1)]])
f = LaurentCurve(2, {-2: [1, 0], -1: [0, 1]})

ra = analyze_radii(f, L)
print(f"kappa = {ra.kappa}, d_kappa = {ra.d_kappa}, lambda ~ {complex(ra.lam.mid):.3f}")
for r in ra.radii:
    kind = "Gamma-radius" if r.is_gamma_radius else "not a Gamma-radius"
    print(f"  radius p={r.p} at angle {r.direction.angle_over_pi}*pi: {kind}, V' rows = "
          f"{[[str(x) for x in row] for row in r.v_prime.rows]}")

rep = limit_set(f, L)
print(f"\n{len(rep.components)} components:")
for c in rep.components:
    print(f"  radii {c.provenance['radii']}: dim {c.subgroup.dim}, compact={c.subgroup.is_compact}")
