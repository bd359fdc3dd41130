"""Flows of several variables near a normal-crossings stratum.

A map is a finite Laurent sum over singular variables z' (exponents beta,
possibly negative) with polynomial coefficients in regular variables z''
(exponents theta >= 0). The module enumerates complete leading sequences,
builds the separating covector and probe discs, and substitutes a disc
back to obtain a one-variable Laurent curve.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cones import IntersectionResult, RationalCone, build_cone, intersect_trivially, separating_lambda
from .curve1d import EXACT, LaurentCurve
from .errors import AlphaDegenerate, DepthExceeded, DimensionMismatch, RankNotReached, SchemaError, TruncationInsufficient
from .lattice import Lattice, subgroup_closure
from .linalg import ONE, QI, ZERO, ComplexSubspace, qvec, rref, realify_subspace
from .series import Series


def _le(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lt(a, b):
    return a != b and _le(a, b)


class MultiLaurentMap:
    """f(z', z'') = sum over (beta, theta) of z'^beta z''^theta v.

    ``q`` counts all variables; the first ``l`` are singular. Optional
    truncations: every term with beta_1 + ... + beta_l >= trunc_beta, or with
    |theta| >= trunc_theta, is unknown. A truncated map must declare
    ``pole_bound`` D with beta_j >= -D for every term, known or not.
    """

    def __init__(self, l, q, terms, trunc_beta=None, trunc_theta=None, pole_bound=None, n=None):
        if l < 0 or q < l:
            raise DimensionMismatch("need 0 <= l <= q")
        self.l, self.q = int(l), int(q)
        clean = {}
        for (beta, theta), v in dict(terms).items():
            beta, theta = tuple(int(x) for x in beta), tuple(int(x) for x in theta)
            if len(beta) != self.l or len(theta) != self.q - self.l:
                raise DimensionMismatch("exponent lengths must be l and q - l")
            if any(t < 0 for t in theta):
                raise ValueError("regular-variable exponents must be nonnegative")
            v = qvec(v)
            if n is None:
                n = len(v)
            if len(v) != n:
                raise DimensionMismatch("coefficient vectors of different lengths")
            key = (beta, theta)
            if key in clean:
                v = tuple(a + b for a, b in zip(clean[key], v))
            clean[key] = v
        if n is None:
            raise DimensionMismatch("cannot infer target dimension of an empty map")
        self.n = n
        self.terms = {k: v for k, v in sorted(clean.items()) if any(v)}
        self.trunc_beta = trunc_beta
        self.trunc_theta = trunc_theta
        observed = max([0] + [-b for (beta, _) in self.terms for b in beta])
        if pole_bound is None:
            if trunc_beta is not None or trunc_theta is not None:
                raise SchemaError("a truncated map must declare its pole bound")
            pole_bound = observed
        if pole_bound < observed:
            raise ValueError("a term violates the declared pole bound")
        self.pole_bound = int(pole_bound)
        for (beta, theta) in self.terms:
            if trunc_beta is not None and sum(beta) >= trunc_beta:
                raise ValueError(f"term {beta} lies beyond the beta truncation")
            if trunc_theta is not None and sum(theta) >= trunc_theta:
                raise ValueError(f"term {theta} lies beyond the theta truncation")

    @property
    def regular(self):
        return self.q - self.l

    def powers(self, sub: ComplexSubspace | None = None):
        """Exponents beta whose coefficient v_beta(z'') is nonzero modulo sub."""
        out = set()
        for (beta, _), v in self.terms.items():
            if beta in out:
                continue
            if sub is None or not sub.contains(v):
                out.add(beta)
        return sorted(out)

    def coefficients(self, beta):
        return [(theta, v) for (b, theta), v in self.terms.items() if b == beta]

    def to_json(self):
        return {
            "l": self.l,
            "q": self.q,
            "terms": [
                {"beta": list(b), "theta": list(t), "v": [str(c) for c in v]} for (b, t), v in self.terms.items()
            ],
            "trunc": {"beta": self.trunc_beta, "theta": self.trunc_theta},
            "pole_bound": self.pole_bound,
        }

    @classmethod
    def from_json(cls, obj):
        try:
            terms = {}
            n = None
            for t in obj["terms"]:
                v = qvec(QI.parse(str(s)) for s in t["v"])
                n = len(v)
                key = (tuple(t["beta"]), tuple(t.get("theta", [])))
                terms[key] = tuple(a + b for a, b in zip(terms[key], v)) if key in terms else v
            trunc = obj.get("trunc") or {}
            return cls(
                int(obj["l"]),
                int(obj["q"]),
                terms,
                trunc.get("beta"),
                trunc.get("theta"),
                obj.get("pole_bound"),
                obj.get("n", n),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad multi-map descriptor: {exc}") from exc


def leading_powers(F: MultiLaurentMap, sub: ComplexSubspace | None = None):
    """Minimal nonzero exponents having a negative component."""
    P = F.powers(sub)
    return [b for b in P if any(x < 0 for x in b) and not any(_lt(o, b) for o in P)]


def brute_force_leading(F: MultiLaurentMap):
    """Reference scan straight from the definition, for tests."""
    nonzero = {b for (b, _), v in F.terms.items() if any(v)}
    out = []
    for b in nonzero:
        if min(b, default=0) >= 0:
            continue
        if all(not (o != b and all(x <= y for x, y in zip(o, b))) for o in nonzero):
            out.append(b)
    return sorted(out)


def coefficient_space(F: MultiLaurentMap, beta) -> ComplexSubspace:
    coeffs = F.coefficients(tuple(beta))
    if not coeffs:
        raise ValueError(f"v_beta vanishes for beta={beta}")
    if F.trunc_theta is not None:
        # unknown higher Taylor terms could enlarge the span
        raise TruncationInsufficient("coefficient span is not determined by a theta-truncated map")
    return ComplexSubspace.span([v for _, v in coeffs], F.n)


def substitute_units(F: MultiLaurentMap, units, order=2) -> MultiLaurentMap:
    """Apply z_j <- c_j z_j + z_j^2 to the singular variables.

    Each factor (c_j + z_j)^beta_j is expanded to ``order`` extra powers of
    z_j; the dropped tail only touches exponents strictly above some
    exponent already present, which leaves leading data unchanged.
    """
    units = [QI.coerce(c) for c in units]
    if len(units) != F.l or any(not c for c in units):
        raise ValueError("need one nonzero unit per singular variable")
    out = {}
    for (beta, theta), v in F.terms.items():
        factors = []
        for c, b in zip(units, beta):
            ser = Series({0: ONE, 1: ONE / c}, order + 1).unit_power(b)
            factors.append({k: ser[k] * c**b for k in range(order + 1) if ser[k]})
        for combo in itertools.product(*[sorted(fct.items()) for fct in factors]):
            shift = tuple(b + k for b, (k, _) in zip(beta, combo))
            coef = ONE
            for _, cc in combo:
                coef = coef * cc
            key = (shift, theta)
            cur = out.get(key, tuple(ZERO for _ in range(F.n)))
            out[key] = tuple(a + coef * x for a, x in zip(cur, v))
    return MultiLaurentMap(F.l, F.q, out, n=F.n)


# ---------------------------------------------------------------------------
# leading sequences


@dataclass
class LeadingSequence:
    betas: list
    chain: list  # F^(1)..F^(m)
    F: ComplexSubspace
    sigma_minus: RationalCone
    sigma_geq: RationalCone
    complete: bool
    certificate: IntersectionResult | None = None
    b_zero: list = field(default_factory=list)
    b_plus: list = field(default_factory=list)
    lam: tuple | None = None

    @property
    def sigma_zero(self):
        return self.sigma_geq.zero_face

    @property
    def key(self):
        return (
            tuple(tuple(str(x) for x in r) for r in self.F.rows),
            tuple(tuple(int(x) for x in r) for r in self.sigma_minus.rays),
        )

    def to_json(self):
        return {
            "betas": [list(b) for b in self.betas],
            "F": self.F.to_json(),
            "complete": self.complete,
            "sigma_minus": self.sigma_minus.to_json(),
            "sigma_geq": self.sigma_geq.to_json(),
            "b_zero": [list(b) for b in self.b_zero],
            "b_plus": [list(b) for b in self.b_plus],
            "lambda": None if self.lam is None else list(self.lam),
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def build_sequence(F: MultiLaurentMap, betas) -> LeadingSequence | None:
    """Assemble cone data for a candidate sequence; None if (L2) or (L3) fails."""
    betas = [tuple(b) for b in betas]
    l = F.l
    sub = ComplexSubspace.zero(F.n)
    chain = []
    for b in betas:
        if b not in leading_powers(F, sub):
            return None
        sub = sub.join(coefficient_space(F, b))
        chain.append(sub)
    sm = build_cone(betas, "nonpos", l)
    if not sm.is_salient:
        return None
    remaining = F.powers(sub)
    sg = build_cone(remaining, "nonneg", l)
    cert = intersect_trivially(sg, sm)
    seq = LeadingSequence(betas, chain, sub, sm, sg, cert.trivial, cert)
    if cert.trivial:
        seq.b_zero = [b for b in remaining if sg.in_zero_face(b)]
        seq.b_plus = [b for b in remaining if not sg.in_zero_face(b)]
        seq.lam = separating_lambda(betas, seq.b_zero, seq.b_plus, l)
    return seq


def enumerate_complete_sequences(F: MultiLaurentMap, depth_bound=None, strict=True):
    """Depth-first search over leading sequences, emitting complete ones.

    Candidates at each node are the leading powers of the projected map in
    lexicographic order. Each step strictly enlarges F^(j), so depth never
    exceeds n; a smaller ``depth_bound`` that cuts live branches raises
    DepthExceeded carrying the sequences found so far (unless strict=False).
    """
    if F.l == 0:
        raise DimensionMismatch("no singular variables")
    bound = F.n if depth_bound is None else int(depth_bound)
    if bound < 0:
        raise ValueError("depth_bound must be nonnegative")
    found, keys = [], set()
    cut = []

    def visit(prefix):
        seq = build_sequence(F, prefix)
        if seq is None:
            return
        if seq.complete and seq.key not in keys:
            keys.add(seq.key)
            found.append(seq)
        kids = leading_powers(F, seq.F)
        if not kids:
            return
        if len(prefix) >= bound:
            cut.append(tuple(prefix))
            return
        for b in kids:
            visit(prefix + [b])

    visit([])
    if cut and strict:
        raise DepthExceeded(f"depth bound {bound} reached at {len(cut)} node(s)", found)
    return found


def orbit_point(seq: LeadingSequence, F: MultiLaurentMap, a, zprime):
    """Sum over b_zero of z'^beta v_beta(a), reduced modulo F_B (complex array)."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    zp = np.asarray(zprime, dtype=complex).reshape(-1)
    if np.any(zp == 0):
        raise ValueError("z' entries must be nonzero")
    out = np.zeros(F.n, dtype=complex)
    for beta in seq.b_zero:
        mono = complex(np.prod(zp ** np.array(beta, dtype=float))) if beta else 1.0
        for theta, v in F.coefficients(beta):
            red = seq.F.reduce(v)
            w = complex(np.prod(a ** np.array(theta, dtype=float))) if theta else 1.0
            out += mono * w * np.array([complex(c) for c in red])
    return out


# ---------------------------------------------------------------------------
# good discs


def _gen_binom(b, k):
    """binomial(b, k) for integer b (possibly negative) and k >= 0."""
    out = Fraction(1)
    for i in range(k):
        out = out * (b - i) / (i + 1)
    return out


def _simplex_points(dim, N):
    for total in range(N + 1):
        for comb in itertools.combinations_with_replacement(range(dim), total):
            v = [0] * dim
            for c in comb:
                v[c] += 1
            yield tuple(v)


def separation_exponents(q, N):
    """gamma in Z_{>0}^q with min gamma_j = gamma*, gamma_j < (1 + 1/N) gamma*, and
    beta -> gamma.beta injective on {beta >= 0, |beta| <= N}; smallest gamma* then lex."""
    pts = list(set(_simplex_points(q, N)))
    star = 1
    while True:
        hi = star + 1 if N == 0 else -(-(star * (N + 1)) // N)  # exclusive upper bound
        for gamma in itertools.product(range(star, hi), repeat=q):
            if min(gamma) != star:
                continue
            vals = {sum(g * b for g, b in zip(gamma, p)) for p in pts}
            if len(vals) == len(pts):
                return gamma, (N + 1) * star
        star += 1


@dataclass
class GoodDisc:
    gamma: tuple  # positive exponents for all q slots
    M: int
    N0: int
    N: int
    alpha: tuple
    lam: tuple
    l: int
    perturbed: bool = True
    b_lambda: list = field(default_factory=list)
    target: tuple | None = None  # b, reduced modulo F_B

    @property
    def exponents(self):
        return tuple(self.M * x for x in self.lam)

    def describe(self):
        parts = []
        for j in range(self.l):
            ex = self.exponents[j]
            pert = f" + x^{self.gamma[j]}" if self.perturbed else ""
            parts.append(f"x^{ex}*({self.alpha[j]}{pert})")
        for j in range(self.l, len(self.gamma)):
            parts.append(f"x^{self.gamma[j]}")
        return "(" + ", ".join(parts) + ")"

    def evaluate(self, x):
        x = np.asarray(x, dtype=complex)
        out = []
        for j in range(self.l):
            pert = x ** self.gamma[j] if self.perturbed else 0
            out.append(x ** self.exponents[j] * (complex(self.alpha[j]) + pert))
        for j in range(self.l, len(self.gamma)):
            out.append(x ** self.gamma[j])
        return np.stack(out, axis=-1) if out else np.zeros(x.shape + (0,))

    def to_json(self):
        return {
            "gamma": list(self.gamma),
            "M": self.M,
            "N0": self.N0,
            "N": self.N,
            "alpha": [str(a) for a in self.alpha],
            "lambda": list(self.lam),
            "perturbed": self.perturbed,
            "b_lambda": [list(b) for b in self.b_lambda],
            "phi": self.describe(),
            "target": None if self.target is None else [str(c) for c in self.target],
        }


def _rank_qi(rows, ncols):
    if not rows:
        return 0
    return len(rref([[QI.coerce(x) for x in r] for r in rows], ncols)[1])


def good_disc(seq: LeadingSequence, F: MultiLaurentMap, alpha=None, n0_cap=16) -> GoodDisc:
    if not seq.complete:
        raise ValueError("good discs need a complete leading sequence")
    l = F.l
    alpha = tuple(QI.coerce(a) for a in (alpha if alpha is not None else [ONE] * l))
    if len(alpha) != l:
        raise DimensionMismatch("alpha needs one entry per singular variable")
    if any(not a for a in alpha):
        raise AlphaDegenerate("alpha entries must be nonzero")
    lam = seq.lam
    b_lambda = [b for b in F.powers() if sum(x * y for x, y in zip(lam, b)) < 0]
    span_n0 = max([sum(t) for b in b_lambda for t, _ in F.coefficients(b)] + [0])
    N0 = span_n0
    while True:
        if N0 > n0_cap:
            raise RankNotReached(f"rank condition not met for N0 <= {n0_cap}")
        thetas = list(_simplex_points(l, N0))
        rows = []
        for b in b_lambda:
            row = []
            for th in thetas:
                c = QI(1)
                for bj, tj, aj in zip(b, th, alpha):
                    c = c * QI(_gen_binom(bj, tj)) * aj ** (bj - tj)
                row.append(c)
            rows.append(row)
        if _rank_qi(rows, len(thetas)) == len(b_lambda):
            break
        N0 += 1
    N = 2 * N0
    gamma, M = separation_exponents(F.q, N)
    acc = [ZERO] * F.n
    for beta in seq.b_zero:
        for theta, v in F.coefficients(beta):
            if any(theta):
                continue
            mono = ONE
            for a, bj in zip(alpha, beta):
                mono = mono * a**bj
            acc = [x + mono * y for x, y in zip(acc, v)]
    target = seq.F.reduce(acc)
    return GoodDisc(gamma, M, N0, N, alpha, lam, l, bool(b_lambda), b_lambda, target)


def composition_cap(F: MultiLaurentMap, disc: GoodDisc):
    """Smallest x-degree an unknown term of F can reach after substitution."""
    caps = []
    e = disc.exponents
    D = F.pole_bound
    floor_beta = -D * sum(e)
    if F.trunc_beta is not None:
        # sum(beta) >= T' with beta_j >= -D: lowest e.beta puts the surplus on min e
        jmin = min(range(F.l), key=lambda j: e[j])
        surplus = F.trunc_beta + D * F.l
        caps.append(floor_beta + e[jmin] * max(surplus, 0))
    if F.trunc_theta is not None:
        g = min(disc.gamma[F.l :], default=0)
        caps.append(floor_beta + g * F.trunc_theta)
    return min(caps) if caps else None


def compose(F: MultiLaurentMap, disc: GoodDisc, out_truncation=None) -> LaurentCurve:
    """Substitute the disc into F; exact below the returned curve's truncation.

    ``out_truncation`` defaults to 1 (enough for the constant term) and is
    clipped to what the input truncations certify. The curve carries the cap
    in its ``cap`` attribute.
    """
    if disc.l != F.l or len(disc.gamma) != F.q:
        raise DimensionMismatch("disc does not match the map's variable split")
    cap = composition_cap(F, disc)
    T = 1 if out_truncation is None else int(out_truncation)
    if cap is not None:
        T = min(T, cap)
    e = disc.exponents
    known_min = min(
        [sum(a * b for a, b in zip(e, beta)) for (beta, _) in F.terms] or [0]
    )
    if cap is not None and cap <= known_min:
        raise TruncationInsufficient(f"input truncation leaves nothing certain (cap x^{cap})")
    acc = {}
    gl = disc.gamma[: F.l]
    gr = disc.gamma[F.l :]
    for (beta, theta), v in F.terms.items():
        base = sum(a * b for a, b in zip(e, beta)) + sum(a * b for a, b in zip(gr, theta))
        room = T - base
        if room <= 0:
            continue
        ser = Series({0: ONE}, room)
        for aj, gj, bj in zip(disc.alpha, gl, beta):
            if not disc.perturbed:
                ser = ser.scale(aj**bj)
                continue
            unit = Series({0: ONE, gj: ONE / aj}, room).unit_power(bj)
            ser = (ser * unit.scale(aj**bj)).truncate(room)
        for k, c in ser.coeffs.items():
            deg = base + k
            cur = acc.get(deg, tuple(ZERO for _ in range(F.n)))
            acc[deg] = tuple(x + c * y for x, y in zip(cur, v))
    curve = LaurentCurve(F.n, acc, T)
    curve.cap = cap
    return curve


def compose_curve(f: LaurentCurve, exponent, alpha=ONE, gamma=None, out_truncation=None) -> LaurentCurve:
    """One-variable substitution x <- x^exponent (alpha + x^gamma)."""
    terms = {((e,), ()): v for e, v in f.terms.items()}
    F = MultiLaurentMap(1, 1, terms, n=f.n)
    disc = GoodDisc(
        (gamma or 1,), exponent, 0, 0, (QI.coerce(alpha),), (1,), 1, perturbed=gamma is not None
    )
    T = out_truncation if out_truncation is not None else (f.truncation if f.truncation < EXACT else 1)
    if f.truncation < EXACT:
        F.trunc_beta, F.pole_bound = f.truncation, f.pole_bound
    return compose(F, disc, T)


# ---------------------------------------------------------------------------
# components


@dataclass
class ComponentReport:
    sequence: LeadingSequence
    torus: object  # ClosedSubgroup
    heuristic: bool
    finite: bool  # b_zero within {0}: the orbit part is a single point per a
    samples: list

    def to_json(self):
        return {
            "sequence": self.sequence.to_json(),
            "torus": self.torus.to_json(),
            "heuristic": self.heuristic,
            "finite_orbit": self.finite,
            "samples": self.samples,
        }


def limit_component(seq: LeadingSequence, F: MultiLaurentMap, lattice: Lattice, sample_grid=(), zprime_grid=None):
    """Torus part exactly, orbit part sampled at the supplied points a."""
    if lattice.n != F.n:
        raise DimensionMismatch("lattice and map dimensions differ")
    H = subgroup_closure(realify_subspace(seq.F), [0] * (2 * F.n), lattice)
    finite = all(not any(b) for b in seq.b_zero)
    if zprime_grid is None:
        zprime_grid = [np.ones(F.l)] if finite else [np.exp(1j * k) * np.ones(F.l) * s for k in range(3) for s in (0.5, 1.0, 2.0)]
    samples = []
    for a in sample_grid:
        for zp in zprime_grid:
            pt = orbit_point(seq, F, a, zp)
            tp = lattice.reduce(pt)
            samples.append({"a": [str(complex(x)) for x in np.atleast_1d(a)], "point": tp.to_json()})
    return ComponentReport(seq, H, not lattice.is_compact, finite, samples)
