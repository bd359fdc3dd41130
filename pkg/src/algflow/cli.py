"""Command-line front end: read a problem file, run one command, print a report.

Problem file (JSON, ``"schema_version": 1``)::

    {
      "schema_version": 1,
      "lattice": {"n": 2, "generators": [["1", "0"], ["0", "1"], ["0", "i"]]},
      "curve": {"n": 2, "terms": [{"e": -2, "v": ["1", "0"]}, ...]},
      "map":   {"l": 2, "q": 2, "terms": [{"beta": [-1, 0], "theta": [], "v": [...]}]},
      "harness": {"domain": {"r0": 0.5, "r1": 1.0, "theta0": 0, "theta1": 1.5708},
                  "a_grid": [0.03125], "N": 100000, "seed": 0, "tolerance": 0.05,
                  "D": 3, "sector": {"A": 1, "p": 0}, "alpha": ["1", "1"],
                  "cluster": {"example": "semi-torus", "region": "z1", "R": 1000, "B": 0.3,
                              "bound": 1.0}}
    }

Exactly one of ``curve`` and ``map`` is allowed. Flags override harness fields.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import harness as hz
from .curve1d import (
    LaurentCurve,
    NoAlmostGammaRadius,
    alw_hull,
    analyze_radii,
    classify_compactness,
    kappa_and_angles,
    limit_set,
    pole_space,
    stratify,
)
from .errors import AlgflowError, NoPoles, SchemaError
from .lattice import Lattice, realify_float
from .linalg import DEFAULT_BITS, realify_subspace
from .multiflow import (
    MultiLaurentMap,
    compose,
    enumerate_complete_sequences,
    good_disc,
    leading_powers,
    limit_component,
)

SCHEMA_VERSION = 1
COMMANDS = (
    "analyze-curve",
    "radii",
    "limit-set",
    "leading-powers",
    "sequences",
    "good-disc",
    "verify-equidist",
    "mass-check",
    "cluster-scan",
    "alw-hull",
)


class Problem:
    def __init__(self, obj):
        if not isinstance(obj, dict):
            raise SchemaError("problem file must hold a JSON object")
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"schema_version must be {SCHEMA_VERSION}")
        if "lattice" not in obj:
            raise SchemaError("missing lattice descriptor")
        self.lattice = Lattice.from_json(obj["lattice"])
        self.harness = obj.get("harness") or {}
        if not isinstance(self.harness, dict):
            raise SchemaError("harness must be an object")
        has_curve, has_map = "curve" in obj, "map" in obj
        named = isinstance(self.harness.get("cluster"), dict) and "example" in self.harness["cluster"]
        if has_curve and has_map or not (has_curve or has_map or named):
            raise SchemaError("give exactly one of 'curve' and 'map'")
        self.curve = LaurentCurve.from_json(obj["curve"]) if has_curve else None
        self.map = MultiLaurentMap.from_json(obj["map"]) if has_map else None
        if has_curve or has_map:
            n = self.curve.n if has_curve else self.map.n
            if n != self.lattice.n:
                raise SchemaError(f"map targets C^{n} but the lattice lives in C^{self.lattice.n}")

    def need_curve(self):
        if self.curve is None:
            raise SchemaError("this command needs a 'curve'")
        return self.curve

    def need_map(self):
        if self.map is None:
            raise SchemaError("this command needs a 'map'")
        return self.map


def parse_scale(text):
    """'2^-5', '0.03125' or '1/32' -> float."""
    t = str(text).strip()
    if "^" in t:
        b, e = t.split("^", 1)
        return float(b) ** float(e)
    return float(Fraction(t))


def _settings(prob: Problem, args):
    h = dict(prob.harness)
    if args.seed is not None:
        h["seed"] = args.seed
    if args.samples is not None:
        h["N"] = args.samples
    if args.a_grid is not None:
        h["a_grid"] = args.a_grid
    if args.tolerance is not None:
        h["tolerance"] = args.tolerance
    if args.precision_bits is not None:
        h["precision_bits"] = args.precision_bits
    try:
        h["a_grid"] = [parse_scale(a) for a in h.get("a_grid", [2.0**-k for k in range(5, 11)])]
        h["N"] = int(h.get("N", 100_000))
        h["seed"] = int(h.get("seed", 0))
        h["tolerance"] = float(h.get("tolerance", 0.05))
        h["precision_bits"] = int(h.get("precision_bits", DEFAULT_BITS))
        h["D"] = int(h.get("D", 3))
        d = h.get("domain", {})
        h["domain"] = hz.SampleDomain(
            float(d.get("r0", 0.5)),
            float(d.get("r1", 1.0)),
            float(d.get("theta0", 0.0)),
            float(d.get("theta1", 2 * math.pi)),
            1.0,
            h["N"],
            h["seed"],
        )
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad harness settings: {exc}") from exc
    return h


# ---------------------------------------------------------------------------
# commands


def cmd_analyze_curve(prob, args):
    f = prob.need_curve()
    out = {"curve": f.to_json()}
    try:
        s = stratify(f)
    except NoPoles as exc:
        out.update({"kind": "point", "note": "single limit point f(0)", "value": [str(c) for c in exc.value]})
        return out
    out["stratification"] = s.to_json()
    case = classify_compactness(s, prob.lattice)
    out["case"] = case
    if case != "Compact":
        ang = kappa_and_angles(s, prob.lattice, _bits(args))
        if isinstance(ang, NoAlmostGammaRadius):
            out["kappa"] = ang.kappa
            out["almost_gamma_radii"] = []
        else:
            out["kappa"] = ang.kappa
            out["d_kappa"] = ang.d_kappa
            out["cs"] = list(ang.cs)
            out["lambda"] = ang.lam.to_json()
            out["almost_gamma_radii"] = [d.to_json() for d in ang.directions]
    return out


def _bits(args):
    return args.precision_bits or DEFAULT_BITS


def cmd_radii(prob, args):
    f = prob.need_curve()
    res = analyze_radii(f, prob.lattice, _bits(args))
    if isinstance(res, NoAlmostGammaRadius):
        return {"kappa": res.kappa, "radii": [], "note": "no almost-Gamma radius"}
    return {
        "kappa": res.kappa,
        "d_kappa": res.d_kappa,
        "cs": list(res.cs),
        "lambda": res.lam.to_json(),
        "radii": [r.to_json() for r in res.radii],
    }


def cmd_limit_set(prob, args):
    if prob.curve is not None:
        return limit_set(prob.curve, prob.lattice, _bits(args)).to_json()
    F = prob.map
    seqs = enumerate_complete_sequences(F, args.depth)
    comps = []
    for seq in seqs:
        rep = limit_component(seq, F, prob.lattice)
        item = rep.to_json()
        item["provenance"] = {"sequence_key": [list(map(list, seq.key[0])), list(map(list, seq.key[1]))]}
        comps.append(item)
    return {"kind": "multi", "components": comps}


def cmd_leading_powers(prob, args):
    F = prob.need_map()
    return {"leading_powers": [list(b) for b in leading_powers(F)]}


def cmd_sequences(prob, args):
    F = prob.need_map()
    return {"sequences": [s.to_json() for s in enumerate_complete_sequences(F, args.depth)]}


def cmd_good_disc(prob, args):
    F = prob.need_map()
    alpha = prob.harness.get("alpha")
    out = []
    for seq in enumerate_complete_sequences(F, args.depth):
        disc = good_disc(seq, F, alpha)
        curve = compose(F, disc)
        realized = pole_space(curve)
        out.append(
            {
                "sequence": [list(b) for b in seq.betas],
                "disc": disc.to_json(),
                "composed": curve.to_json(),
                "pole_space_matches": realized == seq.F,
            }
        )
    return {"discs": out}


def _limit_subgroups(f, lattice, bits):
    rep = limit_set(f, lattice, bits)
    return rep, [c.subgroup for c in rep.components]


def cmd_verify_equidist(prob, args):
    f = prob.need_curve()
    h = _settings(prob, args)
    rep, subs = _limit_subgroups(f, prob.lattice, h["precision_bits"])
    if rep.kind == "point":
        raise SchemaError("curve has no pole: nothing equidistributes")
    if not subs:
        return {"kind": rep.kind, "note": rep.note, "reports": []}
    H = subs[0]
    reports, mono = hz.weyl_scan(f, h["domain"], prob.lattice, H, h["a_grid"], h["D"], h["tolerance"])
    return {
        "kind": rep.kind,
        "subgroup": H.to_json(),
        "heuristic": rep.kind != "compact",
        "monotone": mono,
        "pass": mono and reports[-1].passed,
        "reports": [r.to_json() for r in reports],
    }


def cmd_mass_check(prob, args):
    f = prob.need_curve()
    h = _settings(prob, args)
    sector = None
    if "sector" in h:
        s = stratify(f)
        ang = kappa_and_angles(s, prob.lattice, h["precision_bits"])
        if isinstance(ang, NoAlmostGammaRadius):
            raise SchemaError("sector masses need an almost-Gamma radius")
        sector = hz.SectorSpec(ang.d_kappa, float(h["sector"].get("A", 1.0)), int(h["sector"].get("p", 0)))
    res = hz.mass_check(f, h["domain"], h["a_grid"], prob.lattice, sector)
    res["sector"] = None if sector is None else {"A": sector.A, "p": sector.p, "d_kappa": sector.d_kappa}
    return res


SEMI_TORUS_REGIONS = {
    "both": lambda R, B: (hz.region_both_large(R, B), None, None),
    "z1": lambda R, B: (hz.region_z1_large(R, B), hz.distance_to_C1_T1, None),
    "z2": lambda R, B: (hz.region_z2_large(R, B), hz.distance_to_T2, hz.grid_cover_T2()),
}


def cmd_cluster_scan(prob, args):
    h = _settings(prob, args)
    cfg = h.get("cluster", {})
    bound = float(cfg.get("bound", 1.0))
    if cfg.get("example") == "semi-torus":
        region = cfg.get("region", "z1")
        if region not in SEMI_TORUS_REGIONS:
            raise SchemaError(f"unknown region {region!r}")
        smp, dist, cover = SEMI_TORUS_REGIONS[region](float(cfg.get("R", 1e3)), float(cfg.get("B", 0.3)))
        rep = hz.cluster_scan(hz.tau_map, smp, prob.lattice, h["N"], bound, dist, cover, h["seed"])
        out = rep.to_json()
        out["region"] = region
        return out
    f = prob.need_curve()
    _, subs = _limit_subgroups(f, prob.lattice, h["precision_bits"])
    dom = h["domain"]
    a = min(h["a_grid"])

    def sampler(rng, N):
        r = np.sqrt(dom.r0**2 + rng.random(N) * (dom.r1**2 - dom.r0**2))
        th = dom.theta0 + rng.random(N) * (dom.theta1 - dom.theta0)
        return a * r * np.exp(1j * th)

    def distance(points):
        if not subs:
            return np.full(len(points), np.inf)
        x = realify_float(points)
        return np.min(np.stack([H.distance(x) for H in subs]), axis=0)

    rep = hz.cluster_scan(f.evaluate, sampler, prob.lattice, h["N"], bound, distance, None, h["seed"])
    out = rep.to_json()
    out["a"] = a
    return out


def cmd_alw_hull(prob, args):
    if prob.curve is not None:
        F = pole_space(prob.curve)
        return {"hull": alw_hull(realify_subspace(F), prob.lattice).to_json()}
    out = []
    for seq in enumerate_complete_sequences(prob.map, args.depth):
        out.append({"sequence": [list(b) for b in seq.betas], "hull": alw_hull(realify_subspace(seq.F), prob.lattice).to_json()})
    return {"hulls": out}


DISPATCH = {
    "analyze-curve": cmd_analyze_curve,
    "radii": cmd_radii,
    "limit-set": cmd_limit_set,
    "leading-powers": cmd_leading_powers,
    "sequences": cmd_sequences,
    "good-disc": cmd_good_disc,
    "verify-equidist": cmd_verify_equidist,
    "mass-check": cmd_mass_check,
    "cluster-scan": cmd_cluster_scan,
    "alw-hull": cmd_alw_hull,
}


# ---------------------------------------------------------------------------
# output


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _table(report):
    """Row-shaped part of a report, if it has one (mass rows, Weyl scans)."""
    if "rows" in report:
        return report["rows"]
    if "reports" in report and report["reports"]:
        return [
            {"a": r.get("a"), "max_non_annihilating": r["max_non_annihilating"], "noise": r["noise"], "pass": r["pass"]}
            for r in report["reports"]
        ]
    return None


def render(report, fmt):
    report = _plain(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    rows = _table(report)
    w = csv.writer(buf, lineterminator="\n")
    if rows:
        keys = sorted({k for r in rows for k in r})
        w.writerow(keys)
        for r in rows:
            w.writerow([r.get(k) for k in keys])
    else:
        w.writerow(["key", "value"])
        for k, v in _flatten(report):
            w.writerow([k, v])
    return buf.getvalue()


def build_parser():
    p = argparse.ArgumentParser(prog="algflow", description="Limit sets of algebraic flows in semi-tori.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("problem", help="JSON problem file, or - for stdin")
    p.add_argument("--seed", type=int)
    p.add_argument("--precision-bits", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--a-grid", type=lambda s: [x for x in s.split(",") if x.strip()])
    p.add_argument("--tolerance", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def run(command, problem_obj, args):
    """Run one command on a parsed problem; returns (report, exit code)."""
    prob = Problem(problem_obj)
    report = DISPATCH[command](prob, args)
    report = dict(report)
    report["schema_version"] = SCHEMA_VERSION
    report["command"] = command
    return report, 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = sys.stdin.read() if args.problem == "-" else open(args.problem, encoding="utf-8").read()
    except OSError as exc:
        print(f"algflow: cannot read problem file: {exc}", file=sys.stderr)
        return 2
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"algflow: malformed JSON: {exc}", file=sys.stderr)
        return 2
    try:
        report, code = run(args.command, obj, args)
    except AlgflowError as exc:
        print(f"algflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        partial = getattr(exc, "partial", None)
        if partial:
            sys.stdout.write(render({"partial": [s.to_json() for s in partial], "error": type(exc).__name__}, args.format))
        return exc.exit_code
    except ValueError as exc:
        print(f"algflow: invalid input: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render(report, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
