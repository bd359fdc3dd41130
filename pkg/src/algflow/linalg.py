"""Gaussian-rational scalars, ball scalars and subspace algebra.

Vectors of E = C^n are tuples of ``QI``.  Real vectors in R^{2n} use the
interleaved ordering (Re z1, Im z1, ..., Re zn, Im zn).  Real data that is
not rational is carried as ``Ball`` entries (mid/rad enclosures built on
mpmath) and every decision on it is three-valued.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd

import mpmath
from mpmath import mp, mpc, mpf

from .errors import CertificationFailure, DimensionMismatch, Undecided

DEFAULT_BITS = 256
HEIGHT_BOUND = 10**6


# ---------------------------------------------------------------------------
# exact scalars


class QI:
    """Element of Q(i), stored as two reduced Fractions."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @staticmethod
    def coerce(x) -> "QI":
        if isinstance(x, QI):
            return x
        if isinstance(x, complex):
            return QI(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, str):
            return QI.parse(x)
        return QI(x)

    _num = r"[+-]?\d+(?:/\d+)?"
    _full = re.compile(rf"^({_num})?(?:\s*([+-])\s*(\d+(?:/\d+)?)?\s*\*?\s*i)?$")
    _imag_only = re.compile(rf"^([+-]?)(\d+(?:/\d+)?)?\s*\*?\s*i$")

    @classmethod
    def parse(cls, s: str) -> "QI":
        s = s.strip()
        m = cls._imag_only.match(s)
        if m:
            sign = -1 if m.group(1) == "-" else 1
            return QI(0, sign * Fraction(m.group(2) or 1))
        m = cls._full.match(s)
        if not m or s == "":
            raise ValueError(f"not a Gaussian rational: {s!r}")
        re_part = Fraction(m.group(1)) if m.group(1) else Fraction(0)
        im_part = Fraction(0)
        if m.group(2):
            im_part = Fraction(m.group(3) or 1)
            if m.group(2) == "-":
                im_part = -im_part
        return QI(re_part, im_part)

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)} i"

    def __repr__(self):
        return f"QI({self})"

    def __eq__(self, other):
        if not isinstance(other, QI):
            try:
                other = QI.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, o):
        o = QI.coerce(o)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = QI.coerce(o)
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return QI.coerce(o) - self

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return QI(self.re * o, self.im * o)
        o = QI.coerce(o)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, (int, Fraction)):
            return QI(self.re / o, self.im / o)
        o = QI.coerce(o)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return QI((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, o):
        return QI.coerce(o) / self

    def __pow__(self, k: int):
        if k < 0:
            return QI(1) / (self ** (-k))
        out, base = QI(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self):
        return QI(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))


ZERO = QI(0)
ONE = QI(1)
I = QI(0, 1)


def qvec(entries) -> tuple:
    return tuple(QI.coerce(x) for x in entries)


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, v):
    return tuple(c * a for a in v)


def is_zero_vec(v) -> bool:
    return not any(v)


# ---------------------------------------------------------------------------
# ball scalars


def _eps(bits):
    return mpf(2) ** (2 - bits)


def _mpf_to_fraction(x: mpf) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    q = Fraction(int(man)) * Fraction(2) ** exp
    return -q if sign else q


class Ball:
    """Complex disc {z: |z - mid| <= rad} at a working precision of ``bits``.

    Real balls are balls whose midpoint has zero imaginary part.
    """

    __slots__ = ("mid", "rad", "bits")

    def __init__(self, mid, rad=0, bits=DEFAULT_BITS):
        with mp.workprec(bits):
            self.mid = mpc(mid)
            self.rad = mpf(rad)
        self.bits = bits

    @classmethod
    def exact(cls, x, bits=DEFAULT_BITS) -> "Ball":
        """Enclosure of an exact rational or Gaussian-rational value."""
        if isinstance(x, Ball):
            return x
        q = QI.coerce(x)
        with mp.workprec(bits):
            re_ = mpf(q.re.numerator) / q.re.denominator
            im_ = mpf(q.im.numerator) / q.im.denominator
            rad = mpf(0)
            if _mpf_to_fraction(re_) != q.re or _mpf_to_fraction(im_) != q.im:
                rad = (abs(re_) + abs(im_)) * _eps(bits)
            return cls(mpc(re_, im_), rad, bits)

    @classmethod
    def from_mp(cls, value, bits=DEFAULT_BITS, ulps=4) -> "Ball":
        """Wrap an mpmath value computed at (at least) ``bits`` precision."""
        with mp.workprec(bits):
            v = mpc(value)
            return cls(v, abs(v) * mpf(2) ** (ulps - bits), bits)

    @staticmethod
    def _bits(a, b):
        return max(a.bits, b.bits) if isinstance(b, Ball) else a.bits

    def _wrap(self, o):
        return o if isinstance(o, Ball) else Ball.exact(o, self.bits)

    def _finish(self, mid, rad, bits):
        e = _eps(bits)
        return Ball(mid, (rad + abs(mid) * e) * (1 + e), bits)

    def __add__(self, o):
        o = self._wrap(o)
        bits = self._bits(self, o)
        with mp.workprec(bits):
            return self._finish(self.mid + o.mid, self.rad + o.rad, bits)

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.mid, self.rad, self.bits)

    def __sub__(self, o):
        return self + (-self._wrap(o))

    def __rsub__(self, o):
        return self._wrap(o) - self

    def __mul__(self, o):
        o = self._wrap(o)
        bits = self._bits(self, o)
        with mp.workprec(bits):
            mid = self.mid * o.mid
            rad = abs(self.mid) * o.rad + abs(o.mid) * self.rad + self.rad * o.rad
            return self._finish(mid, rad, bits)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._wrap(o)
        bits = self._bits(self, o)
        with mp.workprec(bits):
            den = abs(o.mid) - o.rad
            if den <= 0:
                raise Undecided("division by a ball containing zero")
            mid = self.mid / o.mid
            rad = (self.rad + abs(mid) * o.rad) / den
            return self._finish(mid, rad, bits)

    def __rtruediv__(self, o):
        return self._wrap(o) / self

    def conj(self):
        return Ball(mpmath.conj(self.mid), self.rad, self.bits)

    @property
    def real(self):
        return Ball(self.mid.real, self.rad, self.bits)

    @property
    def imag(self):
        return Ball(self.mid.imag, self.rad, self.bits)

    def abs_upper(self):
        with mp.workprec(self.bits):
            return abs(self.mid) + self.rad

    def contains_zero(self) -> bool:
        with mp.workprec(self.bits):
            return abs(self.mid) <= self.rad

    def contains(self, other: "Ball") -> bool:
        with mp.workprec(max(self.bits, other.bits) + 16):
            return abs(self.mid - other.mid) + other.rad <= self.rad

    def zero_test(self, tol=None):
        """True (numerically zero), False (certified nonzero) or None."""
        with mp.workprec(self.bits):
            if abs(self.mid) > self.rad:
                return False
            if tol is None:
                tol = mpf(2) ** (-(self.bits // 2))
            return True if self.rad <= tol else None

    def __complex__(self):
        return complex(self.mid)

    def __float__(self):
        return float(self.mid.real)

    def __repr__(self):
        return f"Ball({mpmath.nstr(self.mid, 12)} +/- {mpmath.nstr(self.rad, 3)})"

    def to_json(self):
        with mp.workprec(self.bits):
            digits = int(self.bits * 0.30103) + 1
            return {
                "mid": [mpmath.nstr(self.mid.real, digits), mpmath.nstr(self.mid.imag, digits)],
                "rad": mpmath.nstr(self.rad, 6),
                "bits": self.bits,
            }


def reconstruct_rational(x: Ball, height=HEIGHT_BOUND):
    """Rational q with |q - x| inside the ball and denominator <= height, or None."""
    with mp.workprec(x.bits):
        if abs(x.mid.imag) > x.rad:
            return None
        frac = _mpf_to_fraction(x.mid.real).limit_denominator(height)
        tol = x.rad + mpf(2) ** (-(x.bits // 2))
        if abs(mpf(frac.numerator) / frac.denominator - x.mid.real) <= tol:
            return frac
    return None


# ---------------------------------------------------------------------------
# generic row reduction


def _is_zero(x):
    if isinstance(x, Ball):
        return x.zero_test()
    return x == 0


def _zero_like(x):
    if isinstance(x, Ball):
        return Ball(0, 0, x.bits)
    if isinstance(x, QI):
        return ZERO
    return Fraction(0)


def _one_like(x):
    if isinstance(x, Ball):
        return Ball(1, 0, x.bits)
    if isinstance(x, QI):
        return ONE
    return Fraction(1)


def _magnitude(x):
    if isinstance(x, Ball):
        return abs(x.mid)
    if isinstance(x, QI):
        return x.norm2()
    return abs(x)


def rref(rows, ncols):
    """Reduced row echelon form; returns (rows, pivot_columns).

    Exact entries get the canonical first-nonzero pivot; ball entries use
    partial pivoting and raise Undecided when a column cannot be settled.
    """
    rows = [list(r) for r in rows]
    pivots = []
    rank = 0
    for c in range(ncols):
        cand, undecided = [], False
        for i in range(rank, len(rows)):
            z = _is_zero(rows[i][c])
            if z is False:
                cand.append(i)
            elif z is None:
                undecided = True
        if not cand:
            if undecided:
                raise Undecided(f"column {c} undecided")
            for i in range(rank, len(rows)):
                rows[i][c] = _zero_like(rows[i][c])
            continue
        if isinstance(rows[cand[0]][c], Ball):
            best = max(cand, key=lambda i: _magnitude(rows[i][c]))
        else:
            best = cand[0]
        rows[rank], rows[best] = rows[best], rows[rank]
        piv = rows[rank][c]
        rows[rank] = [x / piv for x in rows[rank]]
        rows[rank][c] = _one_like(piv)
        for j in range(len(rows)):
            if j == rank:
                continue
            f = rows[j][c]
            if isinstance(f, Ball) or f != 0:
                rows[j] = [a - f * b for a, b in zip(rows[j], rows[rank])]
                rows[j][c] = _zero_like(f)
        pivots.append(c)
        rank += 1
        if rank == len(rows):
            break
    return rows[:rank], pivots


def nullspace(rows, ncols):
    """Basis of {x : rows . x = 0} (right kernel)."""
    red, piv = rref(rows, ncols) if rows else ([], [])
    sample = red[0][0] if red else (rows[0][0] if rows else Fraction(0))
    zero, one = _zero_like(sample), _one_like(sample)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for fcol in free:
        x = [zero] * ncols
        x[fcol] = one
        for r, pc in zip(red, piv):
            x[pc] = -r[fcol]
        basis.append(x)
    return basis


def _reduce_against(v, rows, pivots):
    v = list(v)
    for r, p in zip(rows, pivots):
        f = v[p]
        if isinstance(f, Ball) or f != 0:
            v = [a - f * b for a, b in zip(v, r)]
            v[p] = _zero_like(f)
    return v


def _membership(residual):
    state = "in"
    for x in residual:
        z = _is_zero(x)
        if z is False:
            return "out"
        if z is None:
            state = "undecided"
    return state


# ---------------------------------------------------------------------------
# subspaces


class ComplexSubspace:
    """Subspace of C^n in canonical reduced row-echelon form over Q(i)."""

    __slots__ = ("n", "rows", "pivots")

    def __init__(self, n, rows=(), _reduced=False):
        self.n = n
        if _reduced:
            self.rows, self.pivots = tuple(tuple(r) for r in rows[0]), tuple(rows[1])
        else:
            red, piv = rref([qvec(r) for r in rows], n) if rows else ([], [])
            self.rows = tuple(tuple(r) for r in red)
            self.pivots = tuple(piv)

    @classmethod
    def span(cls, vectors, n=None):
        vectors = [qvec(v) for v in vectors]
        if n is None:
            if not vectors:
                raise DimensionMismatch("cannot infer ambient dimension of empty span")
            n = len(vectors[0])
        if any(len(v) != n for v in vectors):
            raise DimensionMismatch("vectors of different lengths")
        return cls(n, vectors)

    @classmethod
    def zero(cls, n):
        return cls(n, ())

    @classmethod
    def full(cls, n):
        return cls(n, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @property
    def dim(self):
        return len(self.rows)

    def reduce(self, v):
        v = qvec(v)
        if len(v) != self.n:
            raise DimensionMismatch("vector and subspace dimensions differ")
        return tuple(_reduce_against(v, self.rows, self.pivots))

    def contains(self, v) -> bool:
        return is_zero_vec(self.reduce(v))

    def complement_coords(self):
        return tuple(c for c in range(self.n) if c not in self.pivots)

    def quotient_project(self, v):
        r = self.reduce(v)
        return tuple(r[c] for c in self.complement_coords())

    def lift(self, q):
        """Canonical lift of quotient coordinates (pivot entries zero)."""
        v = [ZERO] * self.n
        for c, x in zip(self.complement_coords(), q):
            v[c] = QI.coerce(x)
        return tuple(v)

    def join(self, other):
        if isinstance(other, ComplexSubspace):
            other = other.rows
        return ComplexSubspace(self.n, list(self.rows) + [qvec(v) for v in other])

    def contains_subspace(self, other) -> bool:
        return all(self.contains(r) for r in other.rows)

    def __eq__(self, other):
        return isinstance(other, ComplexSubspace) and self.n == other.n and self.rows == other.rows

    def __hash__(self):
        return hash((self.n, self.rows))

    def __repr__(self):
        return f"ComplexSubspace(n={self.n}, dim={self.dim})"

    def to_json(self):
        return [[str(x) for x in r] for r in self.rows]


def quotient_project(v, F: ComplexSubspace):
    return F.quotient_project(v)


def span(vectors, field="complex", n=None):
    if field == "complex":
        return ComplexSubspace.span(vectors, n)
    if field == "real":
        return RealSubspace.span(vectors, n)
    raise ValueError("field must be 'real' or 'complex'")


def realify(v):
    """(z1..zn) -> (Re z1, Im z1, ..., Re zn, Im zn)."""
    out = []
    for z in v:
        if isinstance(z, Ball):
            out.extend([z.real, z.imag])
        else:
            z = QI.coerce(z)
            out.extend([z.re, z.im])
    return tuple(out)


def complexify(x):
    """Inverse of realify for exact data."""
    return tuple(QI(x[2 * j], x[2 * j + 1]) for j in range(len(x) // 2))


def times_i(x):
    """Realified multiplication by i: (a, b) -> (-b, a) per coordinate."""
    out = []
    for j in range(0, len(x), 2):
        out.extend([-x[j + 1], x[j]])
    return tuple(out)


def _as_real_entry(x, bits):
    if isinstance(x, Ball):
        return x
    if isinstance(x, QI):
        if x.im != 0:
            raise ValueError("complex entry in a real vector")
        return x.re
    if isinstance(x, float):
        return Ball(x, 0, bits)
    return Fraction(x)


class RealSubspace:
    """Subspace of R^N (N = 2n for realified data), exact or certified.

    Exact mode stores canonical RREF rows of Fractions.  Certified mode
    stores RREF rows of real Balls; ``source`` optionally recomputes the
    spanning vectors at a given precision so callers can escalate.
    """

    __slots__ = ("ambient", "rows", "pivots", "mode", "bits", "source")

    def __init__(self, ambient, rows, pivots, mode, bits=DEFAULT_BITS, source=None):
        self.ambient = ambient
        self.rows = tuple(tuple(r) for r in rows)
        self.pivots = tuple(pivots)
        self.mode = mode
        self.bits = bits
        self.source = source

    @classmethod
    def span(cls, vectors, ambient=None, bits=DEFAULT_BITS, source=None):
        vectors = [[_as_real_entry(x, bits) for x in v] for v in vectors]
        if ambient is None:
            if not vectors:
                raise DimensionMismatch("cannot infer ambient dimension of empty span")
            ambient = len(vectors[0])
        if any(len(v) != ambient for v in vectors):
            raise DimensionMismatch("vectors of different lengths")
        certified = any(isinstance(x, Ball) for v in vectors for x in v)
        if certified:
            vectors = [[x if isinstance(x, Ball) else Ball.exact(x, bits) for x in v] for v in vectors]
        red, piv = rref(vectors, ambient) if vectors else ([], [])
        S = cls(ambient, red, piv, "certified" if certified else "exact", bits, source)
        if certified:
            ex = S.reconstructed()
            if ex is not None:
                return ex
        return S

    @classmethod
    def zero(cls, ambient):
        return cls(ambient, (), (), "exact")

    @classmethod
    def full(cls, ambient):
        return cls.span(
            [[Fraction(int(i == j)) for j in range(ambient)] for i in range(ambient)], ambient
        )

    @property
    def dim(self):
        return len(self.rows)

    @property
    def is_exact(self):
        return self.mode == "exact"

    def at_precision(self, bits):
        if self.is_exact or self.source is None:
            return self
        return RealSubspace.span(self.source(bits), self.ambient, bits, self.source)

    def reconstructed(self, height=HEIGHT_BOUND):
        """Exact subspace whose RREF matches the ball RREF, if one is found."""
        if self.is_exact:
            return self
        rows = []
        for r in self.rows:
            q = [reconstruct_rational(x, height) for x in r]
            if any(x is None for x in q):
                return None
            rows.append(q)
        ex = RealSubspace.span(rows, self.ambient) if rows else RealSubspace.zero(self.ambient)
        if ex.dim != self.dim or ex.pivots != self.pivots:
            return None
        return ex

    def reduce(self, v):
        v = [_as_real_entry(x, self.bits) for x in v]
        if len(v) != self.ambient:
            raise DimensionMismatch("vector and subspace dimensions differ")
        return _reduce_against(v, self.rows, self.pivots)

    def membership(self, v) -> str:
        """'in', 'out' or 'undecided'."""
        return _membership(self.reduce(v))

    def contains(self, v) -> bool:
        m = self.membership(v)
        if m == "undecided":
            raise Undecided("membership undecided")
        return m == "in"

    def contains_subspace(self, other) -> bool:
        return all(self.contains(r) for r in other.rows)

    def join(self, other):
        vecs = list(self.rows) + list(other.rows if isinstance(other, RealSubspace) else other)
        if not vecs:
            return RealSubspace.zero(self.ambient)
        return RealSubspace.span(vecs, self.ambient, max(self.bits, getattr(other, "bits", 0)))

    def intersect(self, other: "RealSubspace") -> "RealSubspace":
        if not self.rows or not other.rows:
            return RealSubspace.zero(self.ambient)
        comp = [c for c in range(self.ambient) if c not in other.pivots]
        cols = [[other.reduce(r)[c] for c in comp] for r in self.rows]
        if not comp:
            return self
        # left kernel of cols: t with sum t_i cols_i = 0
        transposed = [[cols[i][j] for i in range(len(cols))] for j in range(len(comp))]
        ker = nullspace(transposed, len(cols))
        vecs = []
        for t in ker:
            acc = [_zero_like(self.rows[0][0])] * self.ambient
            for ti, r in zip(t, self.rows):
                acc = [a + ti * b for a, b in zip(acc, r)]
            vecs.append(acc)
        if not vecs:
            return RealSubspace.zero(self.ambient)
        return RealSubspace.span(vecs, self.ambient, self.bits)

    def times_i(self):
        return RealSubspace.span([times_i(r) for r in self.rows], self.ambient, self.bits) if self.rows else self

    def equals(self, other) -> bool:
        if self.is_exact and other.is_exact:
            return self.ambient == other.ambient and self.rows == other.rows
        return self.dim == other.dim and self.contains_subspace(other) and other.contains_subspace(self)

    def __eq__(self, other):
        return isinstance(other, RealSubspace) and self.equals(other)

    def __hash__(self):
        return hash((self.ambient, self.dim))

    def to_float(self):
        import numpy as np

        if not self.rows:
            return np.zeros((0, self.ambient))
        return np.array([[float(x) for x in r] for r in self.rows], dtype=float)

    def __repr__(self):
        return f"RealSubspace(N={self.ambient}, dim={self.dim}, {self.mode})"

    def to_json(self):
        if self.is_exact:
            return {"mode": "exact", "rows": [[str(x) for x in r] for r in self.rows]}
        return {
            "mode": "certified",
            "bits": self.bits,
            "rows": [[x.to_json() for x in r] for r in self.rows],
        }


def realify_subspace(F: ComplexSubspace) -> RealSubspace:
    vecs = []
    for r in F.rows:
        vecs.append(realify(r))
        vecs.append(realify(vec_scale(I, r)))
    return RealSubspace.span(vecs, 2 * F.n) if vecs else RealSubspace.zero(2 * F.n)


# ---------------------------------------------------------------------------
# integer lattices


def _lll(int_rows):
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    m = DomainMatrix([[ZZ(int(x)) for x in r] for r in int_rows], (len(int_rows), len(int_rows[0])), ZZ)
    return [[int(x) for x in r] for r in m.lll().to_Matrix().tolist()]


def _lcm(a, b):
    return a * b // gcd(a, b)


def integer_rows(rows):
    """Scale each rational row to a primitive integer row."""
    out = []
    for r in rows:
        den = 1
        for x in r:
            den = _lcm(den, Fraction(x).denominator)
        ints = [int(Fraction(x) * den) for x in r]
        g = 0
        for x in ints:
            g = gcd(g, x)
        out.append([x // g for x in ints] if g else ints)
    return out


def integer_kernel(rows, ncols):
    """Basis of the lattice {m in Z^ncols : rows . m = 0} (rational rows)."""
    rows = [r for r in integer_rows(rows) if any(r)]
    if not rows:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    rank = len(rref([[Fraction(x) for x in r] for r in rows], ncols)[0])
    want = ncols - rank
    if want == 0:
        return []
    weight = 1 + sum(abs(x) for r in rows for x in r) * 2**ncols
    while True:
        basis = [
            [int(i == j) for j in range(ncols)] + [weight * r[i] for r in rows] for i in range(ncols)
        ]
        red = _lll(basis)
        ker = [b[:ncols] for b in red if not any(b[ncols:])]
        if len(ker) == want:
            return ker
        weight *= 2**16


def hnf_rows(int_rows):
    """Row-style Hermite normal form basis of the lattice spanned by int rows."""
    rows = [list(r) for r in int_rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    basis = []
    col = 0
    while rows and col < ncols:
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in rows if r[col] == 0]
        # euclid on column col
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            new = [p]
            for r in nz[1:]:
                q = r[col] // p[col]
                r2 = [a - q * b for a, b in zip(r, p)]
                if r2[col] != 0:
                    new.append(r2)
                elif any(r2):
                    rest.append(r2)
            nz = new
        p = nz[0]
        if p[col] < 0:
            p = [-a for a in p]
        basis.append(p)
        rows = [r for r in rest if any(r)]
        col += 1
    # reduce entries above pivots
    piv = [next(c for c, x in enumerate(r) if x != 0) for r in basis]
    for i in range(len(basis)):
        for j in range(i):
            q = basis[j][piv[i]] // basis[i][piv[i]]
            if q:
                basis[j] = [a - q * b for a, b in zip(basis[j], basis[i])]
    return basis


def _ball_matrix_coords(S: RealSubspace, frame_rows, frame_piv):
    """Coordinates of S's rows in the RREF frame (pivot entries) plus residual check."""
    coords = []
    for r in S.rows:
        res = _reduce_against(list(r), frame_rows, frame_piv)
        if _membership(res) == "out":
            raise ValueError("subspace is not contained in the frame span")
        coords.append([r[p] for p in frame_piv])
    return coords


def rational_saturation(S: RealSubspace, frame, height=HEIGHT_BOUND) -> RealSubspace:
    """Smallest frame-rational subspace containing S (S inside span(frame)).

    ``frame`` is a list of rational vectors spanning the rational structure.
    """
    frame = [[Fraction(x) for x in v] for v in frame]
    frows, fpiv = rref(frame, S.ambient)
    if S.dim == 0:
        return RealSubspace.zero(S.ambient)
    coords = _ball_matrix_coords(S, frows, fpiv)
    r = len(fpiv)
    if S.is_exact:
        return S
    bits = S.bits
    with mp.workprec(bits):
        for row in coords:
            for x in row:
                if x.rad > mpf(2) ** (-(bits // 2)):
                    raise CertificationFailure("ball entries too wide for relation search")
        weight = mpf(2) ** ((3 * bits) // 4)
        lat = []
        for i in range(r):
            tail = [int(mpmath.nint(weight * row[i].mid.real)) for row in coords]
            lat.append([int(i == j) for j in range(r)] + tail)
    relations = []
    for b in _lll(lat):
        m = b[:r]
        if not any(m) or max(abs(x) for x in m) > height:
            continue
        ok = True
        for row in coords:
            acc = Ball(0, 0, bits)
            for mi, x in zip(m, row):
                if mi:
                    acc = acc + x * mi
            if acc.zero_test() is not True:
                ok = False
                break
        if ok:
            relations.append([Fraction(x) for x in m])
    sat_coords = nullspace(relations, r) if relations else [
        [Fraction(int(i == j)) for j in range(r)] for i in range(r)
    ]
    if len(sat_coords) < S.dim:
        raise CertificationFailure("inconsistent integer relations")
    vecs = []
    for c in sat_coords:
        v = [Fraction(0)] * S.ambient
        for ci, fr in zip(c, frows):
            if ci:
                v = [a + ci * b for a, b in zip(v, fr)]
        vecs.append(v)
    return RealSubspace.span(vecs, S.ambient)
