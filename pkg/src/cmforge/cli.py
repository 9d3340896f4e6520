"""``cmforge <suite>``: run verification suites over the instance catalog.

Reports are JSON with sorted keys.  Integers inside witnesses are written as
decimal strings so that nothing is lost to a float-based reader.  Exit codes:
0 when every check passes, 1 on a verification failure, 2 on a configuration
error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from typing import Callable, Optional

from .catalog import SCHEMA_VERSION, ConfigError, InstanceCatalogEntry, load_catalog
from .classfield import InstanceRejected, divisors, k_ideal, verify_instance
from .cmmodel import (InadmissibleTwist, classification_roundtrip, everywhere_good_reduction_test,
                      good_reduction, isogeny_degree, non_shimura_twist, shimura_construct,
                      shimura_type_test, torsion_submodules)
from .descent import (build_t, hilbert90_solve, minimal_model_verdict, synthetic_datum,
                      trivial_datum)
from .froblift import NotShimuraType, build_family, build_lift, family_implies_shimura, perturb
from .order import Elt, Ideal
from .picocycle import SEARCH_CAP, FullL
from .quadfield import ImagQuadField, class_number_by_ideals, reduced_forms

REPORT_SCHEMA = 1
SUITES = ["classgroup", "rayclass", "serre", "reduction", "shimura", "froblift", "picocycle", "descent"]


def plain(x):
    """JSON-ready form with integers as decimal strings."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Elt):
        return {"coords": [str(c) for c in x.c], "den": str(x.d)}
    if isinstance(x, Ideal):
        return {"hnf": [[str(c) for c in r] for r in x.h], "den": str(x.den)}
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    return str(x)


class Checks:
    def __init__(self):
        self.items: list[dict] = []

    def add(self, name: str, ok: bool, **witness) -> bool:
        self.items.append({"name": name, "pass": bool(ok), "witness": plain(witness)})
        return ok

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.items)


class Context:
    """Per-run caches so that ``all`` builds each instance and curve once."""

    def __init__(self, bound: Optional[int], search_cap: Optional[int], e: int):
        self.bound, self.search_cap, self.e = bound, search_cap, e
        self._inst: dict = {}
        self._con: dict = {}
        self._full: dict = {}

    def b(self, default: int) -> int:
        return self.bound if self.bound is not None else default

    def instance(self, entry: InstanceCatalogEntry):
        if entry.label not in self._inst:
            try:
                self._inst[entry.label] = verify_instance(entry)
            except InstanceRejected as exc:
                self._inst[entry.label] = exc
        v = self._inst[entry.label]
        if isinstance(v, InstanceRejected):
            raise v
        return v

    def construction(self, entry):
        if entry.label not in self._con:
            self._con[entry.label] = shimura_construct(self.instance(entry), e=self.e)
        return self._con[entry.label]

    def full(self, entry):
        if entry.label not in self._full:
            self._full[entry.label] = FullL(self.instance(entry), cap=self.search_cap or SEARCH_CAP)
        return self._full[entry.label]


# ---------------------------------------------------------------------------
# suites

def suite_classgroup(entry, ctx, ck: Checks) -> None:
    K = ImagQuadField(entry.d)
    forms = reduced_forms(K.D)
    h = K.class_number
    ck.add("forms_vs_ideal_oracle", h == class_number_by_ideals(K), h=h, forms=forms)
    ck.add("group_order_is_form_count", h == len(forms), invariants=K.class_group.group.invariants)


def suite_rayclass(entry, ctx, ck: Checks) -> None:
    K = ImagQuadField(entry.d)
    bound = ctx.b(200)
    for gens in entry.ray_moduli:
        f = k_ideal(K, gens)
        R = K.ray_class_group(f)
        gen = len(R.generated_by_primes(bound))
        ck.add(f"order_mod_{f.norm()}", R.order == R.formula_order() == gen, modulus=f,
               order=R.order, formula=R.formula_order(), generated=gen, invariants=R.group.invariants)


def suite_serre(entry, ctx, ck: Checks) -> None:
    K = ImagQuadField(entry.d)
    bad = [a for a in K.ideals_up_to(ctx.b(50)) if isogeny_degree(K, a) != a.norm()]
    ck.add("isogeny_degree_is_norm", not bad, bound=ctx.b(50), counterexamples=bad)
    for m in (2, 3, 4, 6):
        subs = {a for _, a in torsion_submodules(K, m)}
        divs = set(divisors(K, K.ideal(m)))
        ck.add(f"torsion_submodules_{m}", subs == divs, count=len(subs), divisors=len(divs))


def suite_shimura(entry, ctx, ck: Checks) -> None:
    con = ctx.construction(entry)
    curve = con.curve
    ck.add("qualifying_prime", con.prime.norm() <= 200, prime=con.prime, aux=con.aux,
           modulus_norm=curve.space.m.norm())
    ck.add("admissible", bool(curve.rho.certify()), e=curve.rho.e)
    ck.add("shimura_type", shimura_type_test(curve))
    back = classification_roundtrip(curve.rho, curve.c)
    ck.add("classification_roundtrip", back.rho == curve.rho and back.c == curve.c)
    try:
        tw, vals, x = non_shimura_twist(curve)
    except InadmissibleTwist as exc:
        ck.add("non_shimura_twist", ctx.instance(entry).degree == 1, note=str(exc))
    else:
        ck.add("non_shimura_twist", not shimura_type_test(tw), kernel_element=x, values=vals)


def suite_reduction(entry, ctx, ck: Checks) -> None:
    con = ctx.construction(entry)
    curve, p = con.curve, con.prime
    ext = ctx.instance(entry).ext
    pO = ext.extend_ideal(p)
    bad_outside, bad_above = [], []
    for P in ext.primes_up_to(ctx.b(100)):
        if not good_reduction(curve, P):
            (bad_above if P.contains_ideal(pO) else bad_outside).append(P)
    ck.add("good_away_from_p", not bad_outside, counterexamples=bad_outside)
    ck.add("bad_at_some_prime_above_p", bool(bad_above), bad=bad_above)
    rep = everywhere_good_reduction_test(curve, p, ctx.b(100))
    ck.add("everywhere_good_criterion", rep.implication_holds, verdict=rep.verdict, reason=rep.reason,
           bad_dividing_f=rep.bad_dividing_f)


def suite_froblift(entry, ctx, ck: Checks) -> None:
    curve = ctx.construction(entry).curve
    fam = build_family(curve, ctx.b(100), generate=True)
    ck.add("lifts_and_commutativity", True, lifts=len(fam.lifts), certificates=len(fam.certificates),
           g=fam.g, bound=fam.bound)
    ck.add("family_implies_shimura", family_implies_shimura(fam))
    rg = curve.space.res.group
    if rg.rank:
        p = fam.primes()[0]
        delta = tuple(int(i == 0) for i in range(rg.rank))
        ck.add("perturbed_family_rejected", not family_implies_shimura(perturb(fam, p, delta)),
               prime=p, delta=delta)
    try:
        tw = non_shimura_twist(curve)[0]
    except InadmissibleTwist as exc:
        ck.add("twist_has_no_lift", ctx.instance(entry).degree == 1, note=str(exc))
        return
    failed_at = None
    for q in fam.primes():
        try:
            build_lift(tw, q, fam.g)
        except NotShimuraType:
            failed_at = q
            break
    ck.add("twist_has_no_lift", failed_at is not None, prime=failed_at)


def _test_ideals(full, count: int = 20, bound: int = 50) -> list:
    return [a for a in full.inst.K.ideals_up_to(bound) if full.partial._coprime(a)][:count]


def suite_picocycle(entry, ctx, ck: Checks) -> None:
    full = ctx.full(entry)
    ck.add("witnesses", True, **full.witness_dump())
    ideals = _test_ideals(full)
    values = {str(a.h): full(a) for a in ideals}
    cases: dict = {}
    for a in ideals:
        for b in ideals:
            r = full.cocycle_verify(a, b)
            cases[r["case"]] = cases.get(r["case"], 0) + 1
    ck.add("cocycle_pairs", True, pairs=len(ideals) ** 2, cases=cases, values=values)


def suite_descent(entry, ctx, ck: Checks) -> None:
    full = ctx.full(entry)
    inst = full.inst
    f = inst.conductor
    cap = ctx.search_cap or 8
    triv = trivial_datum(full)
    cy = build_t(triv)
    v = minimal_model_verdict(triv, f, hilbert90_solve(cy), cap)
    ck.add("trivial_datum", cy.is_trivial() and v.generator == 1, verdict=v.status)
    rng = random.Random(inst.K.d)
    bases = _test_ideals(full, 10, 30)
    for k in range(10):
        b0 = inst.L.O.zero
        while b0.is_zero():
            b0 = inst.L.O.elt([rng.randint(-4, 4) for _ in range(inst.L.n)])
        datum = synthetic_datum(full, b0, bases[k % len(bases)])
        beta = hilbert90_solve(build_t(datum))
        v = minimal_model_verdict(datum, f, beta, cap)
        ck.add(f"synthetic_{k}", v.found and inst.ext.in_base(beta * b0), beta0=b0, beta=beta,
               verdict=v.status, generator=v.generator)


RUNNERS: dict[str, Callable] = {
    "classgroup": suite_classgroup, "rayclass": suite_rayclass, "serre": suite_serre,
    "shimura": suite_shimura, "reduction": suite_reduction, "froblift": suite_froblift,
    "picocycle": suite_picocycle, "descent": suite_descent,
}
NEEDS_INSTANCE = {"shimura", "reduction", "froblift", "picocycle", "descent"}


def run_suite(name: str, entry: InstanceCatalogEntry, ctx: Context, timing: bool = True) -> dict:
    ck = Checks()
    out = {"suite": name, "instance": entry.label}
    t0 = time.perf_counter()
    try:
        if name in NEEDS_INSTANCE:
            ctx.instance(entry)
        RUNNERS[name](entry, ctx, ck)
        out["status"] = "pass" if ck.passed else "fail"
    except InstanceRejected as exc:
        out["status"] = "skipped"
        out["reason"] = f"instance rejected: {exc}"
    except Exception as exc:     # every failure is reported with its values
        ck.add("exception", False, type=type(exc).__name__, args=[repr(a) for a in exc.args])
        out["status"] = "fail"
    out["checks"] = ck.items
    if timing:
        out["seconds"] = f"{time.perf_counter() - t0:.3f}"
    return out


def emit_report(report: dict, path: Optional[str]) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_report(suite: str, entries: list, ctx: Context, timing: bool = True) -> dict:
    names = SUITES if suite == "all" else [suite]
    results = [run_suite(n, e, ctx, timing) for n in names for e in entries]
    summary = {s: sum(r["status"] == s for r in results) for s in ("pass", "fail", "skipped")}
    return {"schema": REPORT_SCHEMA, "catalog_schema": SCHEMA_VERSION, "suite": suite,
            "convention_e": ctx.e, "results": results, "summary": summary}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmforge", description=__doc__.splitlines()[0])
    ap.add_argument("suite", choices=SUITES + ["all"])
    ap.add_argument("--catalog", help="catalog TOML (default: bundled catalog)")
    ap.add_argument("--instance", action="append", help="restrict to this label (repeatable)")
    ap.add_argument("--bound", type=int, help="override the suite's norm bound")
    ap.add_argument("--search-cap", type=int, help="override search caps")
    ap.add_argument("--report", help="write the JSON report here instead of stdout")
    ap.add_argument("--no-timing", action="store_true", help="omit timing fields")
    ap.add_argument("--convention", default="e=-1", choices=["e=-1", "e=+1", "e=1"])
    return ap


def main(argv: Optional[list] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        entries = load_catalog(args.catalog)
        if args.instance:
            known = {e.label for e in entries}
            missing = [x for x in args.instance if x not in known]
            if missing:
                raise ConfigError(f"unknown instance labels {missing}")
            entries = [e for e in entries if e.label in args.instance]
        for name, val in (("--bound", args.bound), ("--search-cap", args.search_cap)):
            if val is not None and val < 1:
                raise ConfigError(f"{name} must be positive")
    except ConfigError as exc:
        print(f"cmforge: config error: {exc}", file=sys.stderr)
        return 2
    e = -1 if args.convention == "e=-1" else 1
    ctx = Context(args.bound, args.search_cap, e)
    report = build_report(args.suite, entries, ctx, timing=not args.no_timing)
    emit_report(report, args.report)
    return 1 if report["summary"]["fail"] else 0


if __name__ == "__main__":
    sys.exit(main())
