"""Monte-Carlo and quadrature checks of the measure-level statements.

Samples come from a randomly shifted rank-1 (Kronecker) lattice rule in
polar coordinates, so every cell has the same area. All sums are reduced
chunk by chunk in a fixed order, which keeps reports bit-identical for a
given seed and sample count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .curve1d import LaurentCurve, kappa_and_angles, stratify
from .errors import DimensionMismatch
from .lattice import ClosedSubgroup, Lattice, dual_annihilator

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
CHUNK = 1 << 16


@dataclass
class SampleDomain:
    """Annulus sector {r0 < |x| < r1, theta0 <= arg x <= theta1} scaled by a."""

    r0: float
    r1: float
    theta0: float = 0.0
    theta1: float = 2 * math.pi
    a: complex = 1.0
    N: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.r0 < self.r1 <= 1):
            raise ValueError("need 0 < r0 < r1 <= 1")
        if not self.theta1 > self.theta0:
            raise ValueError("need theta1 > theta0")
        if self.a == 0:
            raise ValueError("scale a must be nonzero")

    @property
    def area(self):
        return 0.5 * (self.theta1 - self.theta0) * (self.r1**2 - self.r0**2)

    def with_scale(self, a, N=None):
        return SampleDomain(self.r0, self.r1, self.theta0, self.theta1, a, self.N if N is None else N, self.seed)


def lattice_points(N, seed, start=0, stop=None):
    """Shifted Kronecker rule in the unit square, points start..stop-1."""
    stop = N if stop is None else stop
    shift = np.random.Generator(np.random.PCG64(seed)).random(2)
    k = np.arange(start, stop, dtype=np.float64)
    u = (k / N + shift[0]) % 1.0
    v = (k * GOLDEN + shift[1]) % 1.0
    return u, v


def _polar(u, v, r0, r1, t0, t1):
    r = np.sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0))
    th = t0 + v * (t1 - t0)
    return r * np.exp(1j * th)


def _chunks(N):
    for s in range(0, N, CHUNK):
        yield s, min(N, s + CHUNK)


# ---------------------------------------------------------------------------
# measures


@dataclass
class EmpiricalMeasure:
    compact: np.ndarray
    transverse: np.ndarray
    weights: np.ndarray
    total_mass: float
    normalization: float
    meta: dict = field(default_factory=dict)

    @property
    def normalized_mass(self):
        return self.total_mass / self.normalization if self.normalization else float("nan")

    def noise(self):
        s = float(np.sum(self.weights))
        return math.sqrt(float(np.sum(self.weights**2))) / s if s > 0 else float("nan")

    def to_csv(self, handle, limit=None, points=None):
        cols = ["x_re", "x_im", "weight"] + [f"c{j}" for j in range(self.compact.shape[1])]
        cols += [f"t{j}" for j in range(self.transverse.shape[1])]
        handle.write(",".join(cols) + "\n")
        n = len(self.weights) if limit is None else min(limit, len(self.weights))
        for i in range(n):
            x = points[i] if points is not None else complex("nan")
            row = [x.real, x.imag, self.weights[i], *self.compact[i], *self.transverse[i]]
            handle.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _pole_data(f: LaurentCurve):
    d = f.pole_bound
    if d == 0:
        raise ValueError("curve has no pole")
    v1 = np.array([complex(c) for c in f.terms[-d]])
    return d, float(np.vdot(v1, v1).real)


def lambda0(f: LaurentCurve, dom: SampleDomain):
    """d^2 |v_1|^2 times the integral of |x|^(-2d-2) (i dx ^ dx-bar) over U.

    i dx ^ dx-bar is twice the area form, hence the leading factor 2.
    """
    d, nv = _pole_data(f)
    radial, _ = integrate.quad(lambda r: r ** (-2 * d - 1), dom.r0, dom.r1, epsabs=0, epsrel=1e-13)
    return 2.0 * d * d * nv * (dom.theta1 - dom.theta0) * radial


def _mu_chunk(f, lattice, dom, cell, s, e):
    u, v = lattice_points(dom.N, dom.seed, s, e)
    x = complex(dom.a) * _polar(u, v, dom.r0, dom.r1, dom.theta0, dom.theta1)
    w = 2.0 * np.sum(np.abs(f.derivative(x)) ** 2, axis=-1) * cell
    c, t = lattice.reduce_many(f.evaluate(x))
    return x, c, t, w


def sample_mu_a(f: LaurentCurve, dom: SampleDomain, lattice: Lattice, keep_points=False, workers=1) -> EmpiricalMeasure:
    """Weighted push-forward of U_a: weight 2|f'(x)|^2 times the cell area.

    Chunks may be evaluated on several threads; results are combined in
    chunk order, so the output does not depend on ``workers``.
    """
    if lattice.n != f.n:
        raise DimensionMismatch("lattice and curve dimensions differ")
    N = dom.N
    norm = lambda0(f, dom) * abs(dom.a) ** (-2 * f.pole_bound)
    if N == 0:
        return EmpiricalMeasure(np.zeros((0, lattice.r)), np.zeros((0, 2 * lattice.n - lattice.r)), np.zeros(0), 0.0, norm)
    cell = abs(complex(dom.a)) ** 2 * dom.area / N
    spans = list(_chunks(N))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda se: _mu_chunk(f, lattice, dom, cell, *se), spans))
    else:
        parts = [_mu_chunk(f, lattice, dom, cell, s, e) for s, e in spans]
    total = 0.0
    for p in parts:
        total += float(np.sum(p[3]))
    mu = EmpiricalMeasure(
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
        np.concatenate([p[3] for p in parts]),
        total,
        norm,
    )
    a = complex(dom.a)
    mu.meta = {"a": [a.real, a.imag], "N": N, "seed": dom.seed}
    if keep_points:
        mu.meta["points"] = np.concatenate([p[0] for p in parts])
    return mu


def quadrature_mass(f: LaurentCurve, dom: SampleDomain, a):
    """Mass of f_*[U_a] ^ omega by adaptive quadrature in polar coordinates."""
    a = complex(a)

    def integrand(r, th):
        x = a * r * np.exp(1j * th)
        fp = f.derivative(np.array([x]))[0]
        return 2.0 * float(np.sum(np.abs(fp) ** 2)) * abs(a) ** 2 * r

    val, _ = integrate.dblquad(integrand, dom.theta0, dom.theta1, dom.r0, dom.r1, epsabs=0, epsrel=1e-11)
    return val


# ---------------------------------------------------------------------------
# sectors


@dataclass
class SectorSpec:
    d_kappa: int
    A: float
    p: int
    rho: float = 1.0


def sector_membership(xprime, spec: SectorSpec):
    """Is x' = r e^{i(theta + p pi)/d} with |theta| <= pi/2 and |sin theta| < A r^d ?"""
    xp = np.asarray(xprime, dtype=complex)
    r = np.abs(xp)
    theta = spec.d_kappa * np.angle(xp) - spec.p * math.pi
    theta = (theta + math.pi) % (2 * math.pi) - math.pi
    inside = (r > 0) & (r < spec.rho) & (np.abs(theta) <= math.pi / 2)
    inside &= np.abs(np.sin(theta)) < spec.A * r**spec.d_kappa
    return bool(inside) if inside.ndim == 0 else inside


class SectorCoordinate:
    """x -> x' with H(f(x)) = x'^(-d_kappa), on the branch x' ~ lambda x."""

    def __init__(self, f: LaurentCurve, lattice: Lattice):
        s = stratify(f)
        ang = kappa_and_angles(s, lattice)
        self.d = ang.d_kappa
        c, si = ang.cs
        mod = math.hypot(c, si)
        self.h = np.array([complex(x) for x in ang.h_functional]) * mod
        self.lam = complex(ang.lam.mid)
        self.directions = [float(dr.angle) for dr in ang.directions]
        self.f = f

    def H(self, z):
        return np.asarray(z, dtype=complex) @ self.h

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        lx = self.lam * x
        u = self.H(self.f.evaluate(x)) * lx**self.d
        return lx * u ** (-1.0 / self.d)


def sector_mass(f: LaurentCurve, dom: SampleDomain, lattice: Lattice, spec: SectorSpec, a, N=None, seed=None):
    """Monte-Carlo mass of f_*[U_a] ^ omega inside Omega_{A,p}.

    Samples an angular window around the radius L_p; the window starts from
    the leading-order width and doubles whenever flagged samples reach its
    outer tenth.
    """
    xc = SectorCoordinate(f, lattice)
    a = complex(a)
    N = dom.N if N is None else N
    seed = dom.seed if seed is None else seed
    center = xc.directions[spec.p] - math.atan2(a.imag, a.real)
    base = math.asin(min(1.0, spec.A * (abs(a) * dom.r1) ** xc.d)) / xc.d
    w = 1.25 * base + 2.0 * abs(a) * dom.r1 / xc.d
    full = dom.theta1 - dom.theta0 >= 2 * math.pi - 1e-15
    for _ in range(30):
        w = min(w, math.pi)
        cell = abs(a) ** 2 * (2 * w) * 0.5 * (dom.r1**2 - dom.r0**2) / N
        total, sq, edge = 0.0, 0.0, 0.0
        flagged = 0
        for s, e in _chunks(N):
            u, v = lattice_points(N, seed, s, e)
            y = _polar(u, v, dom.r0, dom.r1, center - w, center + w)
            if not full:
                ang = (np.angle(y) - dom.theta0) % (2 * math.pi)
                ok = ang <= dom.theta1 - dom.theta0
            else:
                ok = np.ones(y.shape, dtype=bool)
            x = a * y
            inside = ok & sector_membership(xc(x), spec)
            wt = np.where(inside, 2.0 * np.sum(np.abs(f.derivative(x)) ** 2, axis=-1) * cell, 0.0)
            total += float(np.sum(wt))
            sq += float(np.sum(wt**2))
            flagged += int(np.sum(inside))
            off = np.abs(((np.angle(y) - center) + math.pi) % (2 * math.pi) - math.pi)
            if np.any(inside):
                edge = max(edge, float(np.max(off[inside])))
        if w >= math.pi or edge <= 0.9 * w:
            return {"mass": total, "noise": math.sqrt(sq) / total if total else float("nan"), "window": w, "flagged": flagged}
        w *= 2.0
    raise RuntimeError("sector window did not stabilize")


def mass_check(f: LaurentCurve, dom: SampleDomain, a_grid, lattice: Lattice | None = None, sector: SectorSpec | None = None):
    """Normalized masses per a plus a log-log slope of the error term.

    Without a sector: ratio = mass / (lambda0 |a|^(-2d)) by quadrature.
    With a sector: a^(2d - d_kappa) times the Monte-Carlo sector mass.
    """
    d = f.pole_bound
    rows = []
    if sector is None:
        lam = lambda0(f, dom)
        for a in a_grid:
            m = quadrature_mass(f, dom, a)
            rows.append({"a": float(abs(a)), "mass": m, "ratio": m / (lam * abs(a) ** (-2 * d))})
        errs = [(r["a"], abs(r["ratio"] - 1.0)) for r in rows]
    else:
        if lattice is None:
            raise ValueError("sector masses need the lattice")
        for a in a_grid:
            res = sector_mass(f, dom, lattice, sector, a)
            val = abs(a) ** (2 * d - sector.d_kappa) * res["mass"]
            rows.append({"a": float(abs(a)), "mass": res["mass"], "ratio": val, "noise": res["noise"]})
        ref = rows[-1]["ratio"]
        errs = [(r["a"], abs(r["ratio"] - ref)) for r in rows[:-1]]
    slope = _loglog_slope(errs)
    return {"rows": rows, "slope": slope, "lambda0": lambda0(f, dom)}


def _loglog_slope(pairs):
    pts = [(math.log(a), math.log(e)) for a, e in pairs if a > 0 and e > 0]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# Weyl sums


@dataclass
class WeylReport:
    annihilating: list  # (m, |W(m)|)
    other: list
    noise: float
    passed: bool
    tolerance: float
    meta: dict = field(default_factory=dict)

    @property
    def max_other(self):
        return max((v for _, v in self.other), default=0.0)

    @property
    def min_annihilating(self):
        vals = [v for m, v in self.annihilating if any(m)]
        return min(vals, default=1.0)

    def to_json(self):
        return {
            "annihilating": [{"m": list(m), "abs": v} for m, v in self.annihilating],
            "non_annihilating": [{"m": list(m), "abs": v} for m, v in self.other],
            "max_non_annihilating": self.max_other,
            "noise": self.noise,
            "tolerance": self.tolerance,
            "pass": self.passed,
            **self.meta,
        }


def weyl_sums(compact, weights, characters):
    """|sum w chi_m(p)| / sum w for each character m, reduced in chunk order."""
    total = float(np.sum(weights))
    M = np.array(characters, dtype=float).reshape(len(characters), -1)
    acc = np.zeros(len(characters), dtype=complex)
    for s, e in _chunks(len(weights)):
        ph = np.exp(2j * math.pi * (compact[s:e] @ M.T))
        acc += weights[s:e] @ ph
    return np.abs(acc) / total if total > 0 else np.full(len(characters), np.nan)


def weyl_test(mu: EmpiricalMeasure, H: ClosedSubgroup, lattice: Lattice, D=3, tol=0.05) -> WeylReport:
    if lattice.r == 0:
        raise ValueError("no compact directions, hence no characters")
    if D < 1:
        raise ValueError("D must be at least 1")
    ann, rest = dual_annihilator(H, lattice, D)
    ann = [m for m in ann if any(m)]
    ms = ann + [m for m, _ in rest]
    vals = weyl_sums(mu.compact, mu.weights, ms) if ms else np.zeros(0)
    A = [(m, float(v)) for m, v in zip(ann, vals[: len(ann)])]
    O = [(m, float(v)) for m, v in zip([m for m, _ in rest], vals[len(ann) :])]
    ok = all(v <= tol for _, v in O) and all(v >= 1 - tol for _, v in A)
    return WeylReport(A, O, mu.noise(), ok, tol, {"D": D, "N": len(mu.weights)})


def weyl_scan(f: LaurentCurve, dom: SampleDomain, lattice: Lattice, H: ClosedSubgroup, a_grid, D=3, tol=0.05):
    """Weyl reports along a decreasing a-grid plus the monotonicity verdict."""
    reports = []
    for a in a_grid:
        mu = sample_mu_a(f, dom.with_scale(a), lattice)
        rep = weyl_test(mu, H, lattice, D, tol)
        rep.meta["a"] = float(abs(a))
        reports.append(rep)
    mono = all(
        reports[k + 1].max_other <= reports[k].max_other + 2 * max(reports[k].noise, reports[k + 1].noise)
        for k in range(len(reports) - 1)
    )
    return reports, mono


# ---------------------------------------------------------------------------
# cluster scans


@dataclass
class ClusterReport:
    n: int
    retained: int
    max_distance: float | None
    coverage: float | None
    bound: float
    meta: dict = field(default_factory=dict)

    @property
    def fraction(self):
        return self.retained / self.n if self.n else 0.0

    def to_json(self):
        return {
            "n": self.n,
            "retained": self.retained,
            "retained_fraction": self.fraction,
            "max_distance": self.max_distance,
            "coverage": self.coverage,
            "bound": self.bound,
            **self.meta,
        }


def cluster_scan(evaluate, sampler, lattice: Lattice, N, bound, distance=None, cover=None, seed=0):
    """Keep samples whose image stays within ``bound`` of Gamma_R, then score them.

    ``sampler(rng, N)`` draws parameters, ``evaluate`` maps them to C^n,
    ``distance(points)`` measures torus distance to the predicted set and
    ``cover(points)`` returns the covered fraction of a reference grid.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    z = sampler(rng, N)
    pts = evaluate(z)
    keep = lattice.transverse_distance(pts) <= bound
    kept = pts[keep]
    maxd = cov = None
    if distance is not None and len(kept):
        maxd = float(np.max(distance(kept)))
    if cover is not None:
        cov = float(cover(kept)) if len(kept) else 0.0
    return ClusterReport(N, int(np.sum(keep)), maxd, cov, bound)


# The semi-torus example: tau(z) = (e^{i pi/4} z1, z2, z1 z2^2 + z1 z2) in (C/Z)^3.

ROT = np.exp(1j * math.pi / 4)


def tau_map(z):
    z1, z2 = z[:, 0], z[:, 1]
    return np.stack([ROT * z1, z2, z1 * z2 * z2 + z1 * z2], axis=-1)


def region_both_large(R, B):
    """z1, z2 -> infinity together, first two coordinates kept near Gamma_R."""

    def draw(rng, N):
        t1 = rng.choice([-1.0, 1.0], N) * R * (1 + rng.random(N))
        s1 = B * (2 * rng.random(N) - 1)
        X = rng.choice([-1.0, 1.0], N) * R * (1 + rng.random(N))
        Y = B * (2 * rng.random(N) - 1)
        return np.stack([np.conj(ROT) * (t1 + 1j * s1), X + 1j * Y], axis=-1)

    return draw


def region_z1_large(R, B, re_box=(-2.0, 1.0), im_box=0.5):
    """z1 -> infinity with bounded first coordinate image, z2 uniform in a box."""

    def draw(rng, N):
        t1 = rng.choice([-1.0, 1.0], N) * R * (1 + rng.random(N))
        s1 = B * (2 * rng.random(N) - 1)
        x2 = re_box[0] + (re_box[1] - re_box[0]) * rng.random(N)
        z2 = x2 + 1j * im_box * (2 * rng.random(N) - 1)
        return np.stack([np.conj(ROT) * (t1 + 1j * s1), z2], axis=-1)

    return draw


def region_z2_large(R, B, eps=0.05):
    """z2 -> infinity; z1 = u / (z2^2 + z2) so the third coordinate is u."""

    def draw(rng, N):
        X = rng.choice([-1.0, 1.0], N) * R * (1 + rng.random(N))
        Y = B * (2 * rng.random(N) - 1)
        z2 = X + 1j * Y
        u = 4.0 * rng.random(N) + 1j * eps * (2 * rng.random(N) - 1)
        return np.stack([u / (z2 * z2 + z2), z2], axis=-1)

    return draw


def _curve_L_distance(z):
    """Distance from z to L = {s : Im(e^{-i pi/4}(s^2 + s)) = 0}."""
    w = np.conj(ROT) * (z * z + z)
    t0 = w.real
    best = np.inf
    for sign in (1.0, -1.0):
        def dist(t, sign=sign):
            s = (-1.0 + sign * np.sqrt(1.0 + 4.0 * t * ROT)) / 2.0
            return abs(z - s)

        span = 2.0 + 4.0 * abs(w.imag)
        res = optimize.minimize_scalar(dist, bounds=(t0 - span, t0 + span), method="bounded",
                                       options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return best


def distance_to_C1_T1(points):
    """Torus distance to pi(C_1) + T_1: only the second coordinate matters."""
    z2 = points[:, 1]
    shifted = z2.real - np.floor(z2.real) + 1j * z2.imag
    out = np.empty(len(z2))
    for i, z in enumerate(shifted):
        out[i] = min(_curve_L_distance(z + k) for k in (-2, -1, 0, 1))
    return out


def distance_to_T2(points):
    """Distance to T_2 = {Re w1 - Im w1 in Z} (other coordinates free)."""
    w1 = points[:, 0]
    g = w1.real - w1.imag
    return np.abs(g - np.round(g)) / math.sqrt(2.0)


def grid_cover_T2(delta=0.1, size=10):
    """Fraction of a size x size grid in (Re w2, Re w3) mod 1 that retained samples delta-cover."""
    gx, gy = np.meshgrid((np.arange(size) + 0.5) / size, (np.arange(size) + 0.5) / size, indexing="ij")
    grid = np.stack([gx.ravel(), gy.ravel()], axis=-1)

    def cover(points):
        p = np.stack([points[:, 1].real % 1.0, points[:, 2].real % 1.0], axis=-1)
        hit = np.zeros(len(grid), dtype=bool)
        for s in range(0, len(p), 4096):
            d = grid[:, None, :] - p[None, s : s + 4096, :]
            d = d - np.round(d)
            hit |= np.min(np.hypot(d[..., 0], d[..., 1]), axis=1) <= delta
        return float(np.mean(hit))

    return cover
