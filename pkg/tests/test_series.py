from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from algflow.linalg import QI
from algflow.series import Series

small = st.integers(-5, 5).map(QI)


@given(st.lists(small, min_size=3, max_size=6))
def test_reversion_inverts_composition(tail):
    prec = len(tail) + 1
    coeffs = {1: QI(1)}
    coeffs.update({k + 2: c for k, c in enumerate(tail) if c})
    s = Series(coeffs, prec + 1)
    r = s.reversion()
    both = s.compose(r)
    for k in range(prec):
        assert both[k] == (QI(1) if k == 1 else QI(0))


@given(st.integers(-4, 4), st.integers(-4, 4), small)
def test_unit_power_is_multiplicative(a, b, c):
    u = Series({0: QI(1), 1: c}, 6)
    lhs = u.unit_power(a) * u.unit_power(b)
    rhs = u.unit_power(a + b)
    for k in range(6):
        assert lhs[k] == rhs[k]


def test_binomial_expansion_of_inverse():
    s = Series({0: QI(1), 1: QI(1)}, 4).unit_power(-2)
    assert [s[k] for k in range(4)] == [QI(1), QI(-2), QI(3), QI(-4)]


def test_fractional_unit_power():
    s = Series({0: QI(1), 1: QI(1)}, 3).unit_power(Fraction(1, 2))
    sq = s * s
    assert sq[0] == QI(1) and sq[1] == QI(1) and sq[2] == QI(0)
