"""Discrete subgroups of C^n, the quotient group, and closed subgroups in it."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CertificationFailure, DimensionMismatch, SchemaError, Undecided
from .linalg import (
    Ball,
    QI,
    RealSubspace,
    hnf_rows,
    integer_kernel,
    integer_rows,
    qvec,
    rational_saturation,
    realify,
    rref,
)


def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


def realify_float(p):
    """Complex array (..., n) -> real array (..., 2n), interleaved."""
    p = np.asarray(p, dtype=complex)
    out = np.empty(p.shape[:-1] + (2 * p.shape[-1],))
    out[..., 0::2] = p.real
    out[..., 1::2] = p.imag
    return out


@dataclass(frozen=True)
class TorusPoint:
    compact: tuple
    transverse: tuple

    def to_json(self):
        return {"compact": [_num_json(x) for x in self.compact],
                "transverse": [_num_json(x) for x in self.transverse]}

    def as_float(self):
        return (np.array([float(x) for x in self.compact]),
                np.array([float(x) for x in self.transverse]))


def _num_json(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Ball):
        return x.to_json()
    return float(x)


class Lattice:
    """Gamma generated by r Gaussian-rational vectors with independent realifications."""

    def __init__(self, n, generators):
        self.n = n
        self.generators = tuple(qvec(g) for g in generators)
        if any(len(g) != n for g in self.generators):
            raise DimensionMismatch("generator length differs from n")
        self.r = len(self.generators)
        G = [list(realify(g)) for g in self.generators]
        red, piv = rref(G, 2 * n) if G else ([], [])
        if len(red) != self.r:
            raise ValueError("lattice generators are not independent over R")
        self.real_generators = G
        self.gamma_r = RealSubspace.span(G, 2 * n) if G else RealSubspace.zero(2 * n)
        self.complement = tuple(c for c in range(2 * n) if c not in piv)
        basis = [list(g) for g in G]
        for c in self.complement:
            basis.append([Fraction(int(j == c)) for j in range(2 * n)])
        self._basis = basis
        self._basis_inv = _inverse(basis)
        self._basis_f = np.array([[float(x) for x in r] for r in basis]).reshape(2 * n, 2 * n)
        self._basis_inv_f = np.array([[float(x) for x in r] for r in self._basis_inv]).reshape(2 * n, 2 * n)
        self._gen_f = self._basis_f[: self.r]
        self._comp_f = self._basis_f[self.r:]

    @property
    def is_compact(self):
        return self.r == 2 * self.n

    def frame(self):
        return [list(g) for g in self.real_generators]

    # coordinates -----------------------------------------------------------
    def coords_exact(self, x):
        """Realified exact vector -> (generator coords, complement coords)."""
        N = 2 * self.n
        y = [sum((x[i] * self._basis_inv[i][j] for i in range(N) if x[i] != 0), Fraction(0)) for j in range(N)]
        return y[: self.r], y[self.r:]

    def coords_float(self, x):
        y = np.asarray(x, dtype=float) @ self._basis_inv_f
        return y[..., : self.r], y[..., self.r:]

    def from_coords_float(self, a, b):
        return np.asarray(a) @ self._gen_f + np.asarray(b) @ self._comp_f

    # projection ----------------------------------------------------------
    def reduce(self, p) -> TorusPoint:
        """pi(p) in split coordinates; p is a complex vector (exact or float)."""
        if _is_exact_vector(p):
            a, b = self.coords_exact(realify(qvec(p)))
            return TorusPoint(tuple(_frac_part(x) for x in a), tuple(b))
        a, b = self.reduce_many(np.asarray(p, dtype=complex)[None, :])
        return TorusPoint(tuple(a[0]), tuple(b[0]))

    def reduce_real(self, x) -> TorusPoint:
        """pi of a realified point."""
        if all(isinstance(v, (int, Fraction)) for v in x):
            a, b = self.coords_exact([Fraction(v) for v in x])
            return TorusPoint(tuple(_frac_part(v) for v in a), tuple(b))
        a, b = self.coords_float(np.array([float(v) for v in x]))
        return TorusPoint(tuple(a - np.floor(a)), tuple(b))

    def reduce_many(self, points):
        """Vectorized reduce of complex points (N, n) -> (compact (N, r), transverse)."""
        a, b = self.coords_float(realify_float(points))
        a = a - np.floor(a)
        a[a >= 1.0] = 0.0
        return a, b

    def in_gamma_r(self, v) -> str:
        if all(isinstance(x, Ball) for x in v) or not _is_exact_vector(v):
            vv = realify([x if isinstance(x, Ball) else Ball(complex(x)) for x in v])
        else:
            vv = realify(qvec(v))
        return self.gamma_r.membership(vv)

    def transverse_distance(self, points):
        """Euclidean size of the complement part (distance-to-Gamma_R proxy)."""
        _, b = self.coords_float(realify_float(points))
        return np.linalg.norm(b @ self._comp_f, axis=-1) if b.shape[-1] else np.zeros(b.shape[:-1])

    def torus_distance(self, p, q):
        """Distance between torus points (or arrays of compact/transverse pairs)."""
        pa, pb = _split(p)
        qa, qb = _split(q)
        d = pa - qa
        d = d - np.round(d)
        tb = (pb - qb) @ self._comp_f if self.r < 2 * self.n else 0.0
        best = None
        for shift in itertools.product((-1, 0, 1), repeat=self.r):
            v = (d + np.array(shift, dtype=float)) @ self._gen_f + tb
            dist = np.linalg.norm(v, axis=-1)
            best = dist if best is None else np.minimum(best, dist)
        return best

    def to_json(self):
        return {"n": self.n, "generators": [[str(x) for x in g] for g in self.generators]}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(int(obj["n"]), [[QI.parse(str(s)) for s in g] for g in obj["generators"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad lattice descriptor: {exc}") from exc

    @classmethod
    def standard(cls, n, real_only=False):
        gens = []
        for j in range(n):
            gens.append([QI(int(i == j)) for i in range(n)])
            if not real_only:
                gens.append([QI(0, int(i == j)) for i in range(n)])
        return cls(n, gens)


def _split(p):
    if isinstance(p, TorusPoint):
        a, b = p.as_float()
        return a, b
    a, b = p
    return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


def _is_exact_vector(p):
    try:
        return all(isinstance(x, (QI, int, Fraction, str)) for x in p)
    except TypeError:
        return False


def _inverse(M):
    N = len(M)
    aug = [list(M[i]) + [Fraction(int(i == j)) for j in range(N)] for i in range(N)]
    red, piv = rref(aug, 2 * N)
    if piv[:N] != list(range(N)):
        raise ValueError("singular basis")
    return [r[N:] for r in red]


# ---------------------------------------------------------------------------
# closed subgroups


class ClosedSubgroup:
    """pi(base + S) with S saturated: S cap Gamma_R is rational in the frame."""

    def __init__(self, lattice: Lattice, direction: RealSubspace, base=None):
        self.lattice = lattice
        self.direction = direction
        N = 2 * lattice.n
        if base is None:
            base = [Fraction(0)] * N
        self.base_vector = tuple(base)
        self._prepare()
        self.base_vector = self._normalize(self.base_vector)
        self.base = lattice.reduce_real(self.base_vector)

    # structure ---------------------------------------------------------------
    def _prepare(self):
        L = self.lattice
        S = self.direction
        N = 2 * L.n
        self._exact = S.is_exact and all(isinstance(x, (int, Fraction)) for x in self.base_vector)
        # rational part T = S cap Gamma_R, in frame coordinates
        inter = S.intersect(L.gamma_r)
        if not inter.is_exact:
            ex = inter.reconstructed()
            inter = ex if ex is not None else inter
        if inter.is_exact and inter.dim:
            t_frame = [L.coords_exact(list(r))[0] for r in inter.rows]
        elif inter.dim:
            t_frame = None
        else:
            t_frame = []
        self._t_frame = t_frame
        r = L.r
        if t_frame is None:
            self._image_basis = None
            return
        # split Z^r = K + W with K = Z^r cap T, via HNF on [M e_i | e_i]
        M = integer_kernel(t_frame, r) if t_frame else [[int(i == j) for j in range(r)] for i in range(r)]
        k = len(M)
        aug = [[M[j][i] for j in range(k)] + [int(i == j) for j in range(r)] for i in range(r)]
        H = hnf_rows(aug)
        W = [h[k:] for h in H if any(h[:k])]
        self._image_gens = W
        # float projector onto S-perp
        Sf = S.to_float()
        if Sf.shape[0]:
            q, _ = np.linalg.qr(Sf.T)
            self._perp = np.eye(N) - q @ q.T
        else:
            self._perp = np.eye(N)
        gens = np.array([np.array(w, dtype=float) @ L._gen_f for w in W]).reshape(len(W), N)
        self._image_basis = gens @ self._perp if len(W) else np.zeros((0, N))
        if self._exact:
            self._setup_exact_quotient(W)

    def _setup_exact_quotient(self, W):
        L = self.lattice
        S = self.direction
        N = 2 * L.n
        comp = [c for c in range(N) if c not in S.pivots]
        self._qcols = comp
        imgs = []
        for w in W:
            v = [Fraction(0)] * N
            for wi, g in zip(w, L.real_generators):
                if wi:
                    v = [a + wi * b for a, b in zip(v, g)]
            red = S.reduce(v)
            imgs.append([red[c] for c in comp])
        self._qbasis = []
        if imgs:
            den = 1
            for im in imgs:
                for x in im:
                    den = den * x.denominator // math.gcd(den, x.denominator)
            ints = [[int(x * den) for x in im] for im in imgs]
            self._qbasis = [[Fraction(x, den) for x in h] for h in hnf_rows(ints)]

    def _quotient(self, x):
        red = self.direction.reduce(list(x))
        return [red[c] for c in self._qcols]

    def _normalize(self, x):
        if not self._exact:
            return tuple(x)
        y = self._quotient(x)
        for h in self._qbasis:
            p = next(c for c, v in enumerate(h) if v != 0)
            k = math.floor(y[p] / h[p])
            if k:
                y = [a - k * b for a, b in zip(y, h)]
        out = [Fraction(0)] * (2 * self.lattice.n)
        for c, v in zip(self._qcols, y):
            out[c] = v
        return tuple(out)

    @property
    def dim(self):
        return self.direction.dim

    @property
    def is_compact(self):
        return self.lattice.gamma_r.contains_subspace(self.direction)

    def contains_vector_exact(self, x) -> bool:
        if not self._exact:
            raise ValueError("exact membership needs exact data")
        y = self._quotient([Fraction(a) - Fraction(b) for a, b in zip(x, self.base_vector)])
        for h in self._qbasis:
            p = next(c for c, v in enumerate(h) if v != 0)
            k = y[p] / h[p]
            if k.denominator != 1:
                return False
            y = [a - k * b for a, b in zip(y, h)]
        return not any(y)

    def distance(self, x):
        """Distance of realified points x (..., N) to base + S + Gamma."""
        if self._image_basis is None:
            raise CertificationFailure("rational part of direction not reconstructed")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        base = np.array([float(v) for v in self.base_vector])
        y = (x - base) @ self._perp
        B = self._image_basis
        if B.shape[0] == 0:
            return np.linalg.norm(y, axis=-1)
        c, *_ = np.linalg.lstsq(B.T, y.T, rcond=None)
        c0 = np.floor(c.T)
        best = None
        for shift in itertools.product((0, 1, -1, 2), repeat=B.shape[0]):
            v = y - (c0 + np.array(shift, dtype=float)) @ B
            d = np.linalg.norm(v, axis=-1)
            best = d if best is None else np.minimum(best, d)
        return best

    def distance_torus(self, compact, transverse):
        x = self.lattice.from_coords_float(compact, transverse)
        return self.distance(x)

    def same_set(self, other: "ClosedSubgroup", tol=1e-9) -> bool:
        if not self.direction.equals(other.direction):
            return False
        if self._exact and other._exact:
            return self.contains_vector_exact(other.base_vector)
        return float(self.distance([float(v) for v in other.base_vector])[0]) <= tol

    def key(self):
        if self._exact:
            return (self.direction.rows, self.base_vector)
        return None

    def sample(self, rng, count, spread=1.0):
        """Random realified points of base + S (coefficients uniform in [-spread, spread])."""
        Sf = self.direction.to_float()
        base = np.array([float(v) for v in self.base_vector])
        u = rng.uniform(-spread, spread, size=(count, Sf.shape[0]))
        return base + u @ Sf

    def to_json(self):
        return {
            "dim": self.dim,
            "compact": self.is_compact,
            "direction": self.direction.to_json(),
            "base": self.base.to_json(),
        }

    def __repr__(self):
        return f"ClosedSubgroup(dim={self.dim}, compact={self.is_compact})"


def _with_escalation(fn, F):
    try:
        return fn(F)
    except Undecided:
        if F.is_exact or F.source is None:
            raise CertificationFailure("undecided at working precision and no source to refine")
    try:
        return fn(F.at_precision(2 * F.bits))
    except Undecided as exc:
        raise CertificationFailure(f"undecided after precision doubling: {exc}") from exc


def closure_direction(F: RealSubspace, lattice: Lattice) -> RealSubspace:
    def run(S):
        inter = S.intersect(lattice.gamma_r)
        sat = rational_saturation(inter, lattice.frame()) if inter.dim else inter
        out = S.join(sat) if sat.dim else S
        if not out.is_exact:
            ex = out.reconstructed()
            if ex is not None:
                return ex
        return out

    return _with_escalation(run, F)


def subgroup_closure(F: RealSubspace, t, lattice: Lattice) -> ClosedSubgroup:
    """Closure of pi(t + F): pi(t + F + sat(F cap Gamma_R))."""
    direction = closure_direction(F, lattice)
    if t is None:
        base = None
    elif len(t) == lattice.n:
        base = list(realify(t)) if _is_exact_vector(t) else list(realify_float(np.asarray(t))[...])
    else:
        base = list(t)
    if base is not None and any(isinstance(x, Ball) for x in base):
        base = [x if not isinstance(x, Ball) else _ball_to_value(x) for x in base]
    return ClosedSubgroup(lattice, direction, base)


def _ball_to_value(x: Ball):
    from .linalg import reconstruct_rational

    q = reconstruct_rational(x)
    return q if q is not None else float(x)


def dual_annihilator(H: ClosedSubgroup, lattice: Lattice, degree_bound: int):
    """Split characters |m_i| <= D into annihilators of H and the rest (with witnesses)."""
    S = H.direction
    r = lattice.r
    if S.is_exact:
        dirs = [lattice.coords_exact(list(row))[0] for row in S.rows]
    else:
        dirs = []
        for row in S.rows:
            vals = []
            for j in range(r):
                acc = Ball(0, 0, S.bits)
                for i in range(2 * lattice.n):
                    c = lattice._basis_inv[i][j]
                    if c:
                        acc = acc + row[i] * c
                vals.append(acc)
            dirs.append(vals)
    ann, rest = [], []
    rng = range(-degree_bound, degree_bound + 1)
    for m in itertools.product(rng, repeat=r):
        witness = None
        for idx, d in enumerate(dirs):
            val = sum((mi * di for mi, di in zip(m, d) if mi), Fraction(0) if S.is_exact else Ball(0))
            z = (val == 0) if S.is_exact else val.zero_test()
            if z is None:
                raise CertificationFailure("character test undecided")
            if not z:
                witness = idx
                break
        if witness is None:
            ann.append(m)
        else:
            rest.append((m, witness))
    return ann, rest
