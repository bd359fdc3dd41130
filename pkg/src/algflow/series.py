"""Truncated Laurent series over Q(i) with explicit O(x^prec) bookkeeping."""

from __future__ import annotations

from fractions import Fraction

from .linalg import ONE, QI, ZERO


class Series:
    """sum_{e < prec} c_e x^e, everything from x^prec on unknown."""

    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs, prec):
        self.prec = prec
        self.coeffs = {e: QI.coerce(c) for e, c in coeffs.items() if e < prec and QI.coerce(c)}

    @classmethod
    def monomial(cls, e, c=ONE, prec=None):
        return cls({e: c}, prec if prec is not None else 10**9)

    @property
    def val(self):
        return min(self.coeffs) if self.coeffs else self.prec

    def __getitem__(self, e):
        if e >= self.prec:
            raise IndexError(f"coefficient x^{e} beyond truncation x^{self.prec}")
        return self.coeffs.get(e, ZERO)

    def __add__(self, o):
        prec = min(self.prec, o.prec)
        out = dict(self.coeffs)
        for e, c in o.coeffs.items():
            out[e] = out.get(e, ZERO) + c
        return Series(out, prec)

    def __sub__(self, o):
        return self + o.scale(QI(-1))

    def scale(self, c):
        c = QI.coerce(c)
        return Series({e: c * v for e, v in self.coeffs.items()}, self.prec)

    def shift(self, k):
        return Series({e + k: v for e, v in self.coeffs.items()}, self.prec + k)

    def __mul__(self, o):
        prec = min(self.val + o.prec, o.val + self.prec)
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in o.coeffs.items():
                e = e1 + e2
                if e < prec:
                    out[e] = out.get(e, ZERO) + c1 * c2
        return Series(out, prec)

    def truncate(self, prec):
        return Series(self.coeffs, min(prec, self.prec))

    def unit_power(self, alpha):
        """(1 + g)^alpha for a series 1 + g with g = O(x); alpha rational."""
        alpha = Fraction(alpha)
        if self[0] != ONE or self.val < 0:
            raise ValueError("unit_power expects a series 1 + O(x)")
        g = self - Series({0: ONE}, self.prec)
        out = Series({0: ONE}, self.prec)
        term = Series({0: ONE}, self.prec)
        binom = Fraction(1)
        k = 0
        while True:
            k += 1
            term = term * g
            if term.val >= self.prec:
                break
            binom = binom * (alpha - k + 1) / k
            out = out + term.scale(QI(binom))
        return out

    def power(self, k: int):
        """Integer power of a series with a nonzero leading term."""
        v = self.val
        lead = self[v]
        unit = self.shift(-v).scale(ONE / lead)
        return unit.unit_power(k).scale(lead**k).shift(v * k)

    def compose(self, inner: "Series"):
        """self(inner(x)) for inner = O(x) (valuation >= 1), self a power series."""
        if inner.val < 1:
            raise ValueError("inner series must vanish at 0")
        if self.val < 0:
            raise ValueError("outer series must be a power series")
        prec = self.prec * inner.val if self.prec < 10**8 else 10**9
        positive = [e for e in self.coeffs if e >= 1]
        if positive:
            prec = min(prec, inner.prec + (min(positive) - 1) * inner.val)
        out = Series({}, prec)
        p = Series({0: ONE}, prec)
        for e in range(0, self.prec):
            if e > 0:
                p = p * inner
                if p.val >= prec:
                    break
            c = self.coeffs.get(e)
            if c:
                out = out + p.scale(c)
        return out.truncate(prec)

    def reversion(self):
        """Compositional inverse of x + O(x^2)."""
        if self.val != 1 or self[1] != ONE:
            raise ValueError("reversion expects x + O(x^2)")
        prec = self.prec
        x = Series({1: ONE}, prec)
        ident = Series({1: ONE}, prec)
        for _ in range(prec + 1):
            # x <- x - (phi(x) - xi)
            nxt = x - (self.compose(x) - ident)
            nxt = nxt.truncate(prec)
            if nxt.coeffs == x.coeffs:
                break
            x = nxt
        return x

    def __repr__(self):
        terms = " + ".join(f"({c})x^{e}" for e, c in sorted(self.coeffs.items()))
        return f"{terms or '0'} + O(x^{self.prec})"
