"""Cluster values of tau(z) = (e^{i pi/4} z1, z2, z1 z2^2 + z1 z2) in (C/Z)^3.

Three regions of parameter space are scanned. When z1 and z2 both grow,
nothing stays bounded. When only z1 grows, z2 is pinned to the curve
arg(s^2 + s) = pi/4 mod pi. When only z2 grows, the whole 5-dimensional
semi-torus is reached.
"""

from algflow import harness as hz
from algflow.lattice import Lattice

L3 = Lattice.standard(3, real_only=True)
N = 100_000
scans = {
    "z1, z2 large": hz.cluster_scan(hz.tau_map, hz.region_both_large(1e3, 0.5), L3, N, 0.5, seed=1),
    "z1 large": hz.cluster_scan(hz.tau_map, hz.region_z1_large(1e3, 0.3), L3, N, 1.0, hz.distance_to_C1_T1, seed=1),
    "z2 large": hz.cluster_scan(
        hz.tau_map, hz.region_z2_large(1e3, 0.3), L3, N, 1.0, hz.distance_to_T2, hz.grid_cover_T2(), seed=1
    ),
}
for name, rep in scans.items():
    print(f"{name:13s} kept {rep.retained:6d}/{rep.n}  max distance {rep.max_distance}  coverage {rep.coverage}")
