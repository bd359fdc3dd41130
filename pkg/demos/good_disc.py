"""Reduce a two-variable flow to a curve through a good disc.

F(z1, z2) = z1^-1 (1, 0) + z1^-1 z2 (0, 1) + z2^-1 (1, 1) + (1/2, 0)
"""

from fractions import Fraction

from algflow.curve1d import pole_space
from algflow.linalg import QI
from algflow.multiflow import MultiLaurentMap, compose, enumerate_complete_sequences, good_disc

half = QI(Fraction(1, 2))
F = MultiLaurentMap(
    2, 2, {((-1, 0), ()): [1, 0], ((-1, 1), ()): [0, 1], ((0, -1), ()): [1, 1], ((0, 0), ()): [half, 0]}
)
for seq in enumerate_complete_sequences(F):
    disc = good_disc(seq, F)
    curve = compose(F, disc, out_truncation=2)
    print("sequence", seq.betas, "lambda", seq.lam)
    print("  disc", disc.describe(), " gamma", disc.gamma, " M", disc.M)
    print("  composed curve terms:", {e: [str(c) for c in v] for e, v in curve.terms.items()})
    print("  pole space realized:", pole_space(curve) == seq.F)
