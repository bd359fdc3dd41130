"""One-variable flows x -> pi(f(x)) for a Laurent curve f near x = 0."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from .errors import CertificationFailure, DimensionMismatch, NoPoles, SchemaError, TruncationInsufficient, Undecided
from .lattice import ClosedSubgroup, Lattice, subgroup_closure
from .linalg import (
    DEFAULT_BITS,
    I,
    ONE,
    ZERO,
    Ball,
    ComplexSubspace,
    QI,
    RealSubspace,
    nullspace,
    qvec,
    rational_saturation,
    realify,
    realify_subspace,
    reconstruct_rational,
    times_i,
    vec_scale,
)
from .series import Series

EXACT = 10**9  # truncation sentinel: no unknown terms


class LaurentCurve:
    """f(x) = sum_e x^e v_e with every exponent >= truncation left unspecified."""

    def __init__(self, n, terms, truncation=None):
        self.n = n
        self.truncation = EXACT if truncation is None else int(truncation)
        clean = {}
        for e, v in dict(terms).items():
            v = qvec(v)
            if len(v) != n:
                raise DimensionMismatch("term vector length differs from n")
            if e >= self.truncation:
                raise ValueError(f"term x^{e} at or beyond truncation {self.truncation}")
            if any(v):
                clean[int(e)] = v
        self.terms = dict(sorted(clean.items()))

    @property
    def pole_bound(self):
        neg = [e for e in self.terms if e < 0]
        return -min(neg) if neg else 0

    def coefficient(self, e):
        if e >= self.truncation:
            raise TruncationInsufficient(f"coefficient of x^{e} is beyond truncation x^{self.truncation}")
        return self.terms.get(e, tuple(ZERO for _ in range(self.n)))

    def evaluate(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros(x.shape + (self.n,), dtype=complex)
        for e, v in self.terms.items():
            out += np.power(x, e)[..., None] * np.array([complex(c) for c in v])
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros(x.shape + (self.n,), dtype=complex)
        for e, v in self.terms.items():
            if e:
                out += (e * np.power(x, e - 1))[..., None] * np.array([complex(c) for c in v])
        return out

    def to_json(self):
        return {
            "n": self.n,
            "terms": [{"e": e, "v": [str(c) for c in v]} for e, v in self.terms.items()],
            "truncation": None if self.truncation == EXACT else self.truncation,
        }

    @classmethod
    def from_json(cls, obj):
        try:
            terms = {}
            for t in obj["terms"]:
                e = int(t["e"])
                v = qvec(QI.parse(str(s)) for s in t["v"])
                terms[e] = tuple(a + b for a, b in zip(terms[e], v)) if e in terms else v
            return cls(int(obj["n"]), terms, obj.get("truncation"))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad curve descriptor: {exc}") from exc


# ---------------------------------------------------------------------------
# stratification


@dataclass
class Stratification:
    n: int
    degrees: list
    vectors: list  # v_1..v_k, then v_{k+1}
    chain: list  # F_1..F_k

    @property
    def k(self):
        return len(self.degrees)

    @property
    def F(self) -> ComplexSubspace:
        return self.chain[-1] if self.chain else ComplexSubspace.zero(self.n)

    @property
    def translate(self):
        return self.vectors[-1]

    def to_json(self):
        return {
            "k": self.k,
            "degrees": self.degrees,
            "vectors": [[str(c) for c in v] for v in self.vectors],
            "F_k": self.F.to_json(),
        }


def stratify(f: LaurentCurve) -> Stratification:
    if not any(e < 0 for e in f.terms):
        if f.truncation < 1:
            raise TruncationInsufficient("constant term is beyond the truncation")
        raise NoPoles(f.coefficient(0))
    if f.truncation < 1:
        raise TruncationInsufficient("stratification needs every coefficient up to x^0")
    F = ComplexSubspace.zero(f.n)
    degrees, vectors, chain = [], [], []
    negatives = sorted(e for e in f.terms if e < 0)
    while True:
        lead = None
        for e in negatives:
            r = F.reduce(f.terms[e])
            if any(r):
                lead = (e, r)
                break
        if lead is None:
            break
        degrees.append(-lead[0])
        vectors.append(lead[1])
        F = F.join([lead[1]])
        chain.append(F)
    vectors.append(F.reduce(f.coefficient(0)))
    return Stratification(f.n, degrees, vectors, chain)


def pole_space(f: LaurentCurve) -> ComplexSubspace:
    """F_k of the stratification; the zero space when f has no pole."""
    try:
        return stratify(f).F
    except NoPoles:
        return ComplexSubspace.zero(f.n)


def classify_compactness(s: Stratification, lattice: Lattice) -> str:
    ok = lattice.gamma_r.contains_subspace(realify_subspace(s.F))
    return "Compact" if ok else "NonCompact"


def limit_set_compact(s: Stratification, lattice: Lattice) -> ClosedSubgroup:
    return subgroup_closure(realify_subspace(s.F), s.translate, lattice)


# ---------------------------------------------------------------------------
# almost-Gamma radii


@dataclass
class Direction:
    p: int
    angle: Ball  # radians, direction of the radius in the x-plane
    angle_over_pi: Fraction | None

    def to_json(self):
        return {
            "p": self.p,
            "angle_over_pi": None if self.angle_over_pi is None else str(self.angle_over_pi),
            "angle": float(self.angle),
        }


@dataclass
class Angles:
    kappa: int
    d_kappa: int
    cs: tuple  # primitive integer pair (c, s) with c*v - s*(i v) in Gamma_R
    lam: Ball
    directions: list
    h_functional: tuple  # H(z) = sum h_j z_j, real on Gamma_R, H((c - i s) v_kappa) = 1


class NoAlmostGammaRadius:
    """Marker result: the flow has no cluster value."""

    def __init__(self, kappa):
        self.kappa = kappa

    def __repr__(self):
        return f"NoAlmostGammaRadius(kappa={self.kappa})"


def _arg_over_pi(c, s):
    """arg(c - i s)/pi when it is a rational multiple of pi, else None."""
    table = {(1, 0): Fraction(0), (0, 1): Fraction(-1, 2), (1, 1): Fraction(-1, 4), (1, -1): Fraction(1, 4)}
    return table.get((c, s))


def kappa_and_angles(s: Stratification, lattice: Lattice, bits=DEFAULT_BITS):
    G = lattice.gamma_r
    kappa = None
    for idx, v in enumerate(s.vectors[:-1], start=1):
        if not (G.contains(realify(v)) and G.contains(realify(vec_scale(I, v)))):
            kappa = idx
            break
    if kappa is None:
        raise ValueError("F_k lies in Gamma_R: the flow is in the compact case")
    v = s.vectors[kappa - 1]
    d = s.degrees[kappa - 1]
    a = G.reduce(realify(v))
    b = G.reduce(realify(vec_scale(I, v)))
    # c*a - s*b = 0 in the quotient by Gamma_R
    system = [[a[j], -b[j]] for j in range(len(a)) if a[j] != 0 or b[j] != 0]
    ker = nullspace(system, 2) if system else [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    if not ker:
        return NoAlmostGammaRadius(kappa)
    c_, s_ = ker[0]
    den = math.lcm(c_.denominator, s_.denominator)
    ci, si = int(c_ * den), int(s_ * den)
    g = math.gcd(ci, si)
    ci, si = ci // g, si // g
    if ci < 0 or (ci == 0 and si < 0):
        ci, si = -ci, -si
    h = _h_functional(lattice, v, ci, si)
    with mp.workprec(bits + 32):
        arg = mpmath.atan2(-si, ci)  # arg(c - i s)
        lam = Ball.from_mp(mpmath.expj(arg / d), bits)
        exact = _arg_over_pi(ci, si)
        dirs = []
        for p in range(2 * d):
            ang = (p * mp.pi - arg) / d
            ang = ang % (2 * mp.pi)
            ex = None
            if exact is not None:
                ex = ((p - exact) / d) % 2
            dirs.append(Direction(p, Ball.from_mp(ang, bits), ex))
    return Angles(kappa, d, (ci, si), lam, dirs, h)


def _h_functional(lattice: Lattice, v, c, s):
    G = lattice.gamma_r
    N = 2 * lattice.n
    w = tuple(QI(c, -s) * x for x in v)  # (c - i s) v, lies in Gamma_R
    iw = times_i(realify(w))
    red = G.reduce(iw)
    comp = [j for j in range(N) if j not in G.pivots]
    col = next(j for j in comp if red[j] != 0)
    gamma = [Fraction(int(k == col)) for k in range(N)]
    for row, p in zip(G.rows, G.pivots):
        gamma[p] -= row[col]
    scale = red[col]
    gamma = [x / scale for x in gamma]
    return tuple(QI(gamma[2 * j + 1], gamma[2 * j]) for j in range(lattice.n))


def apply_h(h, z):
    return sum((hj * QI.coerce(zj) for hj, zj in zip(h, z)), ZERO)


# ---------------------------------------------------------------------------
# radius expansion


@dataclass
class RadiusRecord:
    p: int
    direction: Direction
    deltas: list  # delta_0 > ... > delta_m
    thetas: list  # theta_0..theta_m, theta_{m+1} (realified ball vectors)
    theta_exact: list  # rational reconstructions or None
    chain: list  # F'_0..F'_m (RealSubspace)
    is_gamma_radius: bool
    v_prime: RealSubspace | None
    v_prime_base: tuple | None
    consistent: bool  # F'_m + i F'_m == realify(F_k)
    bits: int

    @property
    def m(self):
        return len(self.deltas) - 1

    def to_json(self):
        return {
            "p": self.p,
            "direction": self.direction.to_json(),
            "deltas": self.deltas,
            "thetas": [
                [str(x) for x in ex] if ex is not None else [float(x) for x in th]
                for th, ex in zip(self.thetas, self.theta_exact)
            ],
            "is_gamma_radius": self.is_gamma_radius,
            "v_prime": None if self.v_prime is None else self.v_prime.to_json(),
            "consistent": self.consistent,
        }


@dataclass
class RadiusAnalysis:
    kappa: int
    d_kappa: int
    cs: tuple
    lam: Ball
    h_functional: tuple
    xprime_series: Series  # phi(x) with x' = |c - i s|^{-1/d} lambda phi(x) (positive real factor dropped)
    reparam: Series  # x as a series in phi
    radii: list = field(default_factory=list)


def _xprime_data(f: LaurentCurve, s: Stratification, ang: Angles):
    d = ang.d_kappa
    T = f.truncation
    h = ang.h_functional
    Hf = {e: apply_h(h, v) for e, v in f.terms.items()}
    lead = Hf.get(-d, ZERO)
    if not lead:
        raise ValueError("H does not see the kappa-th pole")
    prec = T + d if T < EXACT else None
    if prec is None:
        prec = 2 * f.pole_bound + 2 + max([e for e in f.terms] + [0]) + d
    unit = Series({e + d: c / lead for e, c in Hf.items() if e + d < prec}, prec)
    if any(e < 0 for e in unit.coeffs):
        raise ValueError("H(f) has a pole beyond d_kappa")
    phi = unit.unit_power(Fraction(-1, d)).shift(1)
    inv = phi.reversion()
    return phi, inv


def _compose_curve(f: LaurentCurve, inv: Series):
    """f(x(xi)) as a dict exponent -> vector plus its precision."""
    lead = inv.shift(-1)  # x = xi * lead
    prec_rel = lead.prec
    D = f.pole_bound
    out_prec = min(f.truncation, -D + prec_rel) if f.terms else f.truncation
    acc = {}
    for e, v in f.terms.items():
        pw = lead.unit_power(e).shift(e) if e else Series({0: ONE}, 10**9)
        for k, c in pw.coeffs.items():
            if k < out_prec:
                cur = acc.get(k, tuple(ZERO for _ in range(f.n)))
                acc[k] = tuple(a + c * b for a, b in zip(cur, v))
    return acc, out_prec


def radius_expand(f: LaurentCurve, s: Stratification, lattice: Lattice, p: int, bits=DEFAULT_BITS, angles=None):
    """Expansion along the radius of index p; escalates precision once."""
    ang = angles or kappa_and_angles(s, lattice, bits)
    if isinstance(ang, NoAlmostGammaRadius):
        raise ValueError("no almost-Gamma radius")
    phi, inv = _xprime_data(f, s, ang)
    series, prec = _compose_curve(f, inv)
    if prec < 1:
        raise TruncationInsufficient(
            f"radius expansion needs the composed series up to x^0, truncation allows x^{prec - 1}"
        )
    try:
        return _radius_at(series, s, lattice, ang, p, bits)
    except Undecided:
        pass
    try:
        return _radius_at(series, s, lattice, kappa_and_angles(s, lattice, 2 * bits), p, 2 * bits)
    except Undecided as exc:
        raise CertificationFailure(f"radius {p} undecided after precision doubling") from exc


def _radius_at(series, s, lattice, ang, p, bits):
    d = ang.d_kappa
    n = s.n
    direction = ang.directions[p]
    with mp.workprec(bits + 32):
        theta = direction.angle.mid.real
        coeff = {}
        for e, v in series.items():
            if e > 0:
                continue
            rot = Ball.from_mp(mpmath.expj(e * theta), bits)
            coeff[e] = realify([rot * Ball.exact(c, bits) for c in v])
    base = realify_subspace(ComplexSubspace.span(s.vectors[: ang.kappa - 1], n)) if ang.kappa > 1 else RealSubspace.zero(2 * n)
    span_vecs = [list(r) for r in base.rows]
    deltas, thetas, chain = [], [], []
    current = base
    for e in sorted(coeff):
        if e == 0:
            break
        vec = coeff[e]
        m = current.membership(vec)
        if m == "undecided":
            raise Undecided(f"coefficient x^{e} membership")
        if m == "out":
            reduced = current.reduce(vec)
            deltas.append(-e)
            thetas.append(tuple(reduced))
            span_vecs.append(list(reduced))
            current = RealSubspace.span(span_vecs, 2 * n, bits)
            chain.append(current)
    const = coeff.get(0, realify([Ball(0, 0, bits)] * n))
    thetas.append(tuple(current.reduce(const)))
    if not deltas or deltas[0] != d:
        raise ValueError("leading radial exponent differs from d_kappa")
    Fm = chain[-1]
    states = [lattice.gamma_r.membership(r) for r in Fm.rows]
    if "undecided" in states:
        raise Undecided("Gamma_R membership of F'_m")
    is_gamma = all(st == "in" for st in states)
    Fk_real = realify_subspace(s.F)
    both = Fm.join(Fm.times_i())
    consistent = both.dim == Fk_real.dim and Fk_real.contains_subspace(Fm) and both.contains_subspace(Fk_real)
    exact = []
    for th in thetas:
        q = [reconstruct_rational(x) for x in th]
        exact.append(None if any(v is None for v in q) else tuple(q))
    vprime = vbase = None
    if is_gamma:
        vprime = RealSubspace.span([list(times_i(thetas[0]))] + [list(r) for r in Fm.rows], 2 * n, bits)
        vbase = exact[-1] if exact[-1] is not None else tuple(thetas[-1])
    return RadiusRecord(p, direction, deltas, thetas, exact, chain, is_gamma, vprime, vbase, consistent, bits)


def analyze_radii(f: LaurentCurve, lattice: Lattice, bits=DEFAULT_BITS):
    s = stratify(f)
    if classify_compactness(s, lattice) == "Compact":
        raise ValueError("compact case has no radius analysis")
    ang = kappa_and_angles(s, lattice, bits)
    if isinstance(ang, NoAlmostGammaRadius):
        return ang
    phi, inv = _xprime_data(f, s, ang)
    out = RadiusAnalysis(ang.kappa, ang.d_kappa, ang.cs, ang.lam, ang.h_functional, phi, inv)
    for p in range(2 * ang.d_kappa):
        out.radii.append(radius_expand(f, s, lattice, p, bits, ang))
    return out


# ---------------------------------------------------------------------------
# limit sets


@dataclass
class LimitComponent:
    subgroup: ClosedSubgroup
    provenance: dict

    def to_json(self):
        out = self.subgroup.to_json()
        out["provenance"] = self.provenance
        return out


@dataclass
class LimitSetReport:
    kind: str  # point | compact | empty | radii
    components: list
    note: str = ""

    def to_json(self):
        return {"kind": self.kind, "note": self.note, "components": [c.to_json() for c in self.components]}


def limit_set(f: LaurentCurve, lattice: Lattice, bits=DEFAULT_BITS) -> LimitSetReport:
    try:
        s = stratify(f)
    except NoPoles as np_:
        H = ClosedSubgroup(lattice, RealSubspace.zero(2 * f.n), list(realify(np_.value)))
        return LimitSetReport("point", [LimitComponent(H, {"branch": "no-pole"})], "single limit point f(0)")
    if classify_compactness(s, lattice) == "Compact":
        H = limit_set_compact(s, lattice)
        return LimitSetReport("compact", [LimitComponent(H, {"branch": "compact"})])
    ang = kappa_and_angles(s, lattice, bits)
    if isinstance(ang, NoAlmostGammaRadius):
        return LimitSetReport("empty", [], "no almost-Gamma radius")
    phi, inv = _xprime_data(f, s, ang)
    comps = []
    for p in range(2 * ang.d_kappa):
        rec = radius_expand(f, s, lattice, p, bits, ang)
        if not rec.is_gamma_radius:
            continue
        H = subgroup_closure(rec.v_prime, list(rec.v_prime_base), lattice)
        for c in comps:
            if c.subgroup.same_set(H):
                c.provenance["radii"].append(p)
                break
        else:
            comps.append(LimitComponent(H, {"branch": "radius", "radii": [p]}))
    if not comps:
        return LimitSetReport("empty", [], "no Gamma-radius")
    return LimitSetReport("radii", comps)


def alw_hull(F, lattice: Lattice) -> ClosedSubgroup:
    """Smallest sub-semi-torus direction containing F (complex, saturated)."""
    S = realify_subspace(F) if isinstance(F, ComplexSubspace) else F
    for _ in range(2 * lattice.n + 1):
        C = S.join(S.times_i()) if S.dim else S
        inter = C.intersect(lattice.gamma_r)
        sat = rational_saturation(inter, lattice.frame()) if inter.dim else inter
        nxt = C.join(sat) if sat.dim else C
        if not nxt.is_exact:
            nxt = nxt.reconstructed() or nxt
        if nxt.dim == S.dim:
            S = nxt
            break
        S = nxt
    return ClosedSubgroup(lattice, S, None)
