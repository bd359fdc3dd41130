"""Seeded random instances shared by the oracle suites."""

import random
from fractions import Fraction

from algflow.linalg import QI
from algflow.multiflow import MultiLaurentMap


def gaussian(rng: random.Random, height=8):
    def q():
        return Fraction(rng.randint(-height, height), rng.randint(1, height))

    return QI(q(), q())


def sparse_map(rng: random.Random, l=None, n=None, max_terms=12, span=4, regular=0):
    """Random MultiLaurentMap with exponents in [-span, span] and nonzero coefficients."""
    l = l or rng.randint(1, 3)
    n = n or rng.randint(1, 3)
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        beta = tuple(rng.randint(-span, span) for _ in range(l))
        theta = tuple(rng.randint(0, 2) for _ in range(regular))
        v = [gaussian(rng) if rng.random() < 0.7 else QI(0) for _ in range(n)]
        if not any(v):
            v[rng.randrange(n)] = QI(1)
        terms[(beta, theta)] = v
    return MultiLaurentMap(l, l + regular, terms, n=n)


def random_cone_gens(rng: random.Random, l, count, span=3):
    return [tuple(rng.randint(-span, span) for _ in range(l)) for _ in range(count)]
