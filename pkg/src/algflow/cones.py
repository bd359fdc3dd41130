"""Rational polyhedral cones: double description, trivial intersections, integer separators."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatch, Infeasible
from .linalg import nullspace, rref


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _primitive(v):
    """Scale a nonzero rational vector to a primitive integer vector."""
    v = [Fraction(x) for x in v]
    den = math.lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints)
    return tuple(Fraction(x // g) for x in ints)


def _rank(rows, l):
    if not rows:
        return 0
    return len(rref([list(r) for r in rows], l)[1])


def _orth_reduce(v, basis):
    """Remove the component of v along span(basis); basis is orthogonal."""
    v = list(v)
    for b in basis:
        c = _dot(v, b) / _dot(b, b)
        v = [x - c * y for x, y in zip(v, b)]
    return v


def _gram_schmidt(vectors):
    out = []
    for v in vectors:
        w = _orth_reduce(v, out)
        if any(w):
            out.append(_primitive(w))
    return out


def double_description(A, l):
    """Extreme rays and lineality basis of {x in Q^l : a.x >= 0 for a in A}.

    Rays are returned primitive integral and orthogonal to the lineality space,
    so the output is canonical up to ordering.
    """
    A = [tuple(Fraction(x) for x in a) for a in A]
    lin = [tuple(Fraction(int(i == j)) for j in range(l)) for i in range(l)]
    rays = []
    done = []
    for a in A:
        if not any(a):
            continue
        k0 = next((k for k, b in enumerate(lin) if _dot(a, b) != 0), None)
        if k0 is not None:
            b0 = lin[k0]
            s = _dot(a, b0)
            if s < 0:
                b0 = tuple(-x for x in b0)
                s = -s
            lin = [tuple(x - (_dot(a, b) / s) * y for x, y in zip(b, b0)) for k, b in enumerate(lin) if k != k0]
            rays = [tuple(x - (_dot(a, r) / s) * y for x, y in zip(r, b0)) for r in rays] + [b0]
            done.append(a)
            continue
        pos = [r for r in rays if _dot(a, r) > 0]
        zer = [r for r in rays if _dot(a, r) == 0]
        neg = [r for r in rays if _dot(a, r) < 0]
        done.append(a)
        target = l - len(_independent(lin, l)) - 1
        new = list(pos) + list(zer)
        for p in pos:
            for q in neg:
                tight = [c for c in done if _dot(c, p) == 0 and _dot(c, q) == 0]
                if _rank(tight, l) < target - 1:
                    continue
                ap, aq = _dot(a, p), _dot(a, q)
                new.append(tuple(ap * y - aq * x for x, y in zip(p, q)))
        rays = _extreme_only(new, done, l, target)
    lin = _gram_schmidt(_independent(lin, l))
    seen = []
    for r in rays:
        r = _orth_reduce(r, lin)
        if any(r):
            r = _primitive(r)
            if r not in seen:
                seen.append(r)
    return sorted(seen), lin


def _independent(vectors, l):
    if not vectors:
        return []
    red, piv = rref([list(v) for v in vectors], l)
    return [tuple(r) for r in red]


def _extreme_only(rays, constraints, l, target):
    out = []
    keys = set()
    for r in rays:
        if not any(r):
            continue
        tight = [c for c in constraints if _dot(c, r) == 0]
        if _rank(tight, l) < target:
            continue
        k = _primitive(r)
        if k not in keys:
            keys.add(k)
            out.append(k)
    return out


ORTHANT = ("none", "nonneg", "nonpos")


@dataclass
class RationalCone:
    """Closed convex cone generated by finitely many rational vectors."""

    l: int
    generators: list
    facets: list  # inequalities a with a.x >= 0 cutting out the cone
    rays: list  # extreme rays modulo lineality
    lineality: list  # basis of the largest subspace inside the cone

    @property
    def is_salient(self):
        return not self.lineality

    @property
    def zero_face(self):
        return list(self.lineality)

    def contains(self, x):
        x = [Fraction(v) for v in x]
        return all(_dot(a, x) >= 0 for a in self.facets)

    def contains_cone(self, other: "RationalCone"):
        return all(self.contains(g) for g in other.generators)

    def equals(self, other):
        return self.contains_cone(other) and other.contains_cone(self)

    def in_zero_face(self, x):
        """Membership in the lineality space."""
        if not self.lineality:
            return not any(x)
        red, piv = rref([list(b) for b in self.lineality] + [list(map(Fraction, x))], self.l)
        return len(piv) == len(self.lineality)

    def negate(self):
        return build_cone([tuple(-x for x in g) for g in self.generators])

    def to_json(self):
        return {
            "l": self.l,
            "generators": [[str(x) for x in g] for g in self.generators],
            "facets": [[str(x) for x in a] for a in self.facets],
            "salient": self.is_salient,
            "zero_face": [[str(x) for x in b] for b in self.lineality],
        }


def build_cone(gens, include_orthant="none", l=None) -> RationalCone:
    gens = [tuple(Fraction(x) for x in g) for g in gens]
    if l is None:
        if not gens:
            raise DimensionMismatch("cannot infer dimension of an empty cone")
        l = len(gens[0])
    if l < 1:
        raise ValueError("cone dimension must be at least 1")
    if any(len(g) != l for g in gens):
        raise DimensionMismatch("generators of different lengths")
    if include_orthant not in ORTHANT:
        raise ValueError(f"include_orthant must be one of {ORTHANT}")
    sign = {"none": 0, "nonneg": 1, "nonpos": -1}[include_orthant]
    full = [g for g in gens if any(g)]
    if sign:
        full += [tuple(Fraction(sign * int(i == j)) for j in range(l)) for i in range(l)]
    seen = []
    for g in full:
        if g not in seen:
            seen.append(g)
    full = seen
    # facets are the extreme rays of the dual cone, plus +-lineality of the dual
    drays, dlin = double_description(full, l)
    facets = list(drays) + list(dlin) + [tuple(-x for x in b) for b in dlin]
    rays, lin = double_description(facets, l)
    return RationalCone(l, full, facets, rays, lin)


def cone_from_inequalities(A, l) -> RationalCone:
    rays, lin = double_description(A, l)
    gens = list(rays) + list(lin) + [tuple(-x for x in b) for b in lin]
    return build_cone(gens, "none", l)


# ---------------------------------------------------------------------------
# trivial intersection


@dataclass
class IntersectionResult:
    trivial: bool
    functional: tuple | None = None  # u with u >= 0 on C1 and u <= 0 on C2
    multipliers: tuple | None = None  # y > 0 with A^T y = 0 over the stacked facets
    witness: tuple | None = None

    def __bool__(self):
        return self.trivial

    def to_json(self):
        return {
            "trivial": self.trivial,
            "functional": None if self.functional is None else [str(x) for x in self.functional],
            "multipliers": None if self.multipliers is None else [str(x) for x in self.multipliers],
            "witness": None if self.witness is None else [str(x) for x in self.witness],
        }


def _simplex_standard(c, A, b):
    """Minimize c.x subject to A x = b, x >= 0, in exact arithmetic.

    Two-phase tableau simplex with Bland's rule. Returns (value, x) or None
    when infeasible. Unbounded problems raise, they never arise here.
    """
    m, n = len(A), len(c)
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]
    # columns n..n+m-1 are artificials
    T = [A[i] + [Fraction(int(i == k)) for k in range(m)] + [b[i]] for i in range(m)]
    basis = list(range(n, n + m))

    def pivot(r, col):
        piv = T[r][col]
        T[r] = [v / piv for v in T[r]]
        for i in range(m):
            if i != r and T[i][col]:
                f = T[i][col]
                T[i] = [x - f * y for x, y in zip(T[i], T[r])]
        basis[r] = col

    def run(cost, allowed):
        while True:
            red = {}
            for j in allowed:
                if j in basis:
                    continue
                rc = cost[j] - sum((cost[basis[i]] * T[i][j] for i in range(m)), Fraction(0))
                if rc < 0:
                    red[j] = rc
            if not red:
                return
            col = min(red)
            rows = [(T[i][-1] / T[i][col], basis[i], i) for i in range(m) if T[i][col] > 0]
            if not rows:
                raise ArithmeticError("unbounded linear program")
            r = min(rows)[2]
            pivot(r, col)

    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    run(phase1, range(n + m))
    if sum((T[i][-1] for i in range(m) if basis[i] >= n), Fraction(0)) != 0:
        return None
    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if T[i][j] != 0), None)
            if col is not None:
                pivot(i, col)
    cost = [Fraction(v) for v in c] + [Fraction(0)] * m
    run(cost, range(n))
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    return sum((cv * xv for cv, xv in zip(cost, x)), Fraction(0)), x


def _lp_min(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), lower=0):
    """Minimize c.x with A_ub x <= b_ub, A_eq x = b_eq and x >= lower."""
    n = len(c)
    lo = Fraction(lower)
    # shift x = lower + t and add one slack per inequality
    k = len(A_ub)
    rows, rhs = [], []
    for idx, (r, v) in enumerate(zip(A_ub, b_ub)):
        rows.append([Fraction(x) for x in r] + [Fraction(int(j == idx)) for j in range(k)])
        rhs.append(Fraction(v) - lo * sum(Fraction(x) for x in r))
    for r, v in zip(A_eq, b_eq):
        rows.append([Fraction(x) for x in r] + [Fraction(0)] * k)
        rhs.append(Fraction(v) - lo * sum(Fraction(x) for x in r))
    res = _simplex_standard([Fraction(x) for x in c] + [Fraction(0)] * k, rows, rhs)
    if res is None:
        return None
    _, t = res
    x = [lo + t[j] for j in range(n)]
    return sum((Fraction(a) * v for a, v in zip(c, x)), Fraction(0)), x


def _positive_kernel_vector(A, l):
    """y > 0 with A^T y = 0, or None (exact LP)."""
    m = len(A)
    A_eq = [[A[i][j] for i in range(m)] for j in range(l)]
    res = _lp_min([Fraction(1)] * m, A_eq=A_eq, b_eq=[Fraction(0)] * l, lower=1)
    return None if res is None else tuple(res[1])


def intersect_trivially(C1: RationalCone, C2: RationalCone) -> IntersectionResult:
    if C1.l != C2.l:
        raise DimensionMismatch("cones of different dimensions")
    l = C1.l
    A = list(C1.facets) + list(C2.facets)
    rays, lin = double_description(A, l)
    if rays or lin:
        return IntersectionResult(False, witness=(lin[0] if lin else rays[0]))
    y = _positive_kernel_vector(A, l)
    if y is None:  # cannot happen when the intersection is {0}
        raise AssertionError("Stiemke certificate missing for a trivial intersection")
    k = len(C1.facets)
    u = tuple(sum((y[i] * A[i][j] for i in range(k)), Fraction(0)) for j in range(l))
    return IntersectionResult(True, functional=u, multipliers=y)


def verify_certificate(C1: RationalCone, C2: RationalCone, res: IntersectionResult) -> bool:
    """Exact re-check of either outcome."""
    l = C1.l
    if not res.trivial:
        w = res.witness
        return any(w) and C1.contains(w) and C2.contains(w)
    A = list(C1.facets) + list(C2.facets)
    y = res.multipliers
    if len(y) != len(A) or any(v <= 0 for v in y):
        return False
    if any(sum((y[i] * A[i][j] for i in range(len(A))), Fraction(0)) != 0 for j in range(l)):
        return False
    if _rank(A, l) != l:
        return False
    k = len(C1.facets)
    u = tuple(sum((y[i] * A[i][j] for i in range(k)), Fraction(0)) for j in range(l))
    return u == tuple(res.functional) and all(_dot(u, g) >= 0 for g in C1.generators) and all(
        _dot(u, g) <= 0 for g in C2.generators
    )


# ---------------------------------------------------------------------------
# separating functional


def _sign_ok(lam, minus, zero, plus):
    return (
        all(x > 0 for x in lam)
        and all(_dot(lam, b) < 0 for b in minus)
        and all(_dot(lam, b) == 0 for b in zero)
        and all(_dot(lam, b) > 0 for b in plus)
    )


def _compositions(total, parts):
    """Positive integer vectors with the given sum, in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def separating_lambda(B_minus, B_zero, B_plus, l=None):
    """Positive integer covector negative on B_minus, zero on B_zero, positive on B_plus.

    Returns the solution of least l1 norm, ties broken lexicographically.
    """
    sets = [list(B_minus), list(B_zero), list(B_plus)]
    if l is None:
        first = next((b for s in sets for b in s), None)
        if first is None:
            raise DimensionMismatch("dimension needed when all sets are empty")
        l = len(first)
    minus, zero, plus = ([tuple(Fraction(x) for x in b) for b in s] for s in sets)
    if any(not any(b) for b in minus + plus):
        raise Infeasible("the zero vector cannot be strictly separated")
    # integer solutions satisfy the strict pattern with unit margins
    A_ub = [list(b) for b in minus] + [[-x for x in b] for b in plus]
    b_ub = [Fraction(-1)] * len(A_ub)
    A_eq = [list(b) for b in zero if any(b)]
    res = _lp_min([Fraction(1)] * l, A_ub, b_ub, A_eq, [Fraction(0)] * len(A_eq), lower=1)
    if res is None:
        raise Infeasible("no positive functional realizes the sign pattern")
    low = res[0]
    start = max(l, math.ceil(low))
    total = start
    while True:
        for lam in _compositions(total, l):
            if _sign_ok(lam, minus, zero, plus):
                return tuple(lam)
        total += 1


def brute_force_lambda(B_minus, B_zero, B_plus, l, bound):
    """Exhaustive l1-ordered search; the independent oracle for separating_lambda."""
    for total in range(l, bound + 1):
        for lam in itertools.product(range(1, total + 1), repeat=l):
            if sum(lam) == total and _sign_ok(lam, B_minus, B_zero, B_plus):
                return lam
    return None
