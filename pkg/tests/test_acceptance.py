"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line (shown in the terminal summary) and then
asserts.  Oracles are written out here from first principles rather than
taken from the package: information terms are expanded by hand into rank
coordinates, elemental inequalities are enumerated directly, and closed forms
are typed in.

Criterion 6 runs under a time budget (``BOOKINEQ_C6_BUDGET`` seconds,
default 900).  When the budget runs out it checks the downgraded form.
"""

import io
import itertools
import os
import random
import time
from collections import Counter
from fractions import Fraction

from conftest import ACCEPTANCE, load

from bookineq.book import (
    extend_over_cosingleton,
    extend_over_singleton,
    is_book_extension,
    lift_tight_extension,
    tighten_extension,
)
from bookineq.bookcone import (
    assemble_cone,
    base_coordinates,
    base_restriction,
    book_layout,
    exists_extension,
    project_base,
    sample_cone_point,
)
from bookineq.cli import run
from bookineq.core import LinExpr, canonical_form, validate_polymatroid
from bookineq.inequalities import (
    ABCD,
    coeff_vector,
    combination_certificate,
    enumerate_ideals,
    generate_family,
    ineq_from_triple,
    parse_inequality,
    remove_redundant,
    t_set,
    transpose,
    u_set,
    v_set,
)
from bookineq.ops import min_extend, tighten
from bookineq.polyhedra import BudgetExceeded, is_implied
from bookineq.proofcheck import certificates_to_json, verify_certificate_file, verify_proof
from bookineq.sampling import random_polymatroid


def record(k, ok, detail, seconds):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} ({seconds:.1f} s) {detail}"
    ACCEPTANCE[k] = line
    print(line)


# ---------------------------------------------------------------- oracles


def _m(s):
    return ABCD.mask(s) if s else 0


def H(terms):
    """Linear combination of ranks, e.g. H({"ab": 1, "a": -1})."""
    out = {}
    for s, v in terms.items():
        m = _m("".join(sorted(s)))
        if m:
            out[m] = out.get(m, 0) + v
    return LinExpr(ABCD, {m: v for m, v in out.items() if v})


def I(x, y, z=""):
    """Conditional mutual information I(x;y|z) in ranks."""
    u = lambda *p: "".join(sorted(set("".join(p))))  # noqa: E731
    return H({u(x, z): 1}) + H({u(y, z): 1}) - H({u(x, y, z): 1}) - H({u(z): 1})


def zy_classic(A, B, C, D):
    """I(A;B) + I(A;CD) + 3 I(C;D|A) + I(C;D|B) - 2 I(C;D) >= 0."""
    return I(A, B) + I(A, C + D) + I(C, D, A) * 3 + I(C, D, B) - I(C, D) * 2


ZY_ALL = {canonical_form(zy_classic(*p)) for p in itertools.permutations("abcd")}


def swap(e, perm):
    """Relabel an expression on abcd by a letter permutation given as a dict."""
    out = {}
    for m, v in e.coeffs.items():
        s = "".join(perm.get(x, x) for x in ABCD.elements(m))
        out[ABCD.mask(s)] = v
    return LinExpr(ABCD, out)


SWAPS = [{}, {"a": "b", "b": "a"}, {"c": "d", "d": "c"}, {"a": "b", "b": "a", "c": "d", "d": "c"}]


def shannon_oracle():
    """Elemental inequalities of abcd, enumerated directly."""
    out = set()
    for x in "abcd":
        rest = "".join(y for y in "abcd" if y != x)
        out.add(canonical_form(H({"abcd": 1, rest: -1})))
    for x, y in itertools.combinations("abcd", 2):
        rest = [z for z in "abcd" if z not in (x, y)]
        for r in range(len(rest) + 1):
            for K in itertools.combinations(rest, r):
                out.add(canonical_form(I(x, y, "".join(K))))
    return out


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue()


def zy_swap_set():
    """Closure of the n=2 family under the swaps, each checked to be a ZY instance."""
    base = [canonical_form(parse_inequality(line)) for line in cli("ineq", "gen", "--pages", "2")[1].splitlines()]
    return {canonical_form(swap(e, p)) for e in base for p in SWAPS}


# ---------------------------------------------------------------- criteria


def test_criterion_1_two_page_family():
    t = time.monotonic()
    code, out = cli("ineq", "gen", "--pages", "2")
    lines = out.splitlines()
    plain = [parse_inequality(x) for x in lines]
    code_s, out_s = cli("ineq", "gen", "--pages", "2", "--swaps")
    swapped = {parse_inequality(x) for x in out_s.splitlines()}
    canonical = all(canonical_form(e) == e for e in plain) and all(canonical_form(e) == e for e in swapped)
    zy = all(e in ZY_ALL for e in plain) and swapped <= ZY_ALL
    closure = swapped == {canonical_form(swap(e, p)) for e in plain for p in SWAPS}
    secs = time.monotonic() - t
    ok = code == 0 and code_s == 0 and len(lines) == 2 and canonical and zy and closure and len(swapped) == 4 and secs < 1
    record(
        1,
        ok,
        f"plain lines={len(lines)} (want 2), all ZY instances={zy}, canonical={canonical}; "
        f"with --swaps {len(swapped)} distinct (want 4)",
        secs,
    )
    assert ok


def test_criterion_2_closed_forms():
    t = time.monotonic()
    bad = []
    for n in range(2, 13):
        want = {
            "u": (n - 1, n * (n - 1) // 2, 0),
            "v": (n - 1, n - 1, (n - 1) * (n - 2) // 2),
            "t": (2 ** (n - 1) - 1, (n - 1) * 2 ** (n - 2), (n - 2) * 2 ** (n - 2) + 1),
        }
        got = {"u": coeff_vector(u_set(n)), "v": coeff_vector(v_set(n)), "t": coeff_vector(t_set(n))}
        bad += [(k, n, got[k], want[k]) for k in want if got[k] != want[k]]
    ideals = enumerate_ideals(8)
    for s in ideals:
        x, y, z = coeff_vector(s)
        if coeff_vector(transpose(s)) != (x, z + x, y - x):
            bad.append(("transpose", s))
    secs = time.monotonic() - t
    ok = not bad and secs < 10
    kinds = Counter(b[0] for b in bad)
    detail = f"n=2..12 closed forms and transpose identity on {len(ideals)} ideals of S_8; mismatches={dict(kinds) or 0}"
    if kinds.get("t"):
        # every t_n mismatch is confined to the third component, which is
        # pinned down independently: t_n is its own transpose, so the
        # transpose identity forces z = y - x = (n-3)2^(n-2) + 1
        third_only = all(b[2][:2] == b[3][:2] for b in bad if b[0] == "t")
        forced = all(b[2][2] == (b[1] - 3) * 2 ** (b[1] - 2) + 1 for b in bad if b[0] == "t" and b[1] >= 2)
        detail += f"; t_n differs only in z={third_only}, computed z equals (n-3)2^(n-2)+1 forced by self-transpose={forced}"
    record(2, ok, detail, secs)
    assert ok, bad[:5]


def test_criterion_3_small_ideals():
    t = time.monotonic()
    four = enumerate_ideals(4)
    three = {tuple(sorted(s.points)) for s in enumerate_ideals(3)}
    outside = [s for s in four if tuple(sorted(s.points)) not in three]
    got = Counter(coeff_vector(s) for s in outside)
    want = Counter([(3, 3, 3), (4, 5, 3), (6, 9, 5), (7, 12, 5), (6, 11, 3), (4, 7, 1), (3, 6, 0), (5, 8, 3), (5, 8, 3)])
    avg = ineq_from_triple(5, 8, 3) * 2 == ineq_from_triple(4, 5, 3) + ineq_from_triple(6, 11, 3)
    cert = combination_certificate(ineq_from_triple(5, 8, 3), [ineq_from_triple(4, 5, 3), ineq_from_triple(6, 11, 3)])
    half = cert is not None and sorted(y for name, y in cert if name.startswith("member")) == [Fraction(1, 2)] * 2
    secs = time.monotonic() - t
    ok = len(four) == 13 and len(outside) == 9 and got == want and avg and half and secs < 10
    record(3, ok, f"|S_4 ideals|={len(four)}, outside S_3={len(outside)}, triplets match={got == want}, (5,8,3) = average={avg and half}", secs)
    assert ok


def test_criterion_4_extension_iff_zy():
    t = time.monotonic()
    zy = zy_swap_set()
    rng = random.Random(4)
    pts = [("U24", load("U24.json")), ("V", load("V.json")), ("free", load("free.json"))]
    pts += [(f"modular{i}", random_polymatroid(ABCD, rng, "modular")) for i in range(5)]
    pts += [(f"random{i}", random_polymatroid(ABCD, rng)) for i in range(200)]
    disagree = []
    sides = Counter()
    for name, g in pts:
        res = exists_extension(g, 2)
        holds = all(e(g) >= 0 for e in zy)
        sides[holds] += 1
        if res.exists != holds:
            disagree.append(name)
        if not res.exists and not res.separating(g) < 0:
            disagree.append(name + " (separating inequality not violated)")
    secs = time.monotonic() - t
    ok = not disagree and secs < 300 and zy <= ZY_ALL
    record(
        4,
        ok,
        f"{len(pts)} polymatroids, {sides[True]} extendable / {sides[False]} not, agreement with the "
        f"{len(zy)} swap-closed ZY instances: {len(pts) - len(disagree)}/{len(pts)}",
        secs,
    )
    assert ok, disagree[:5]


def test_criterion_5_projection_two_pages():
    t = time.monotonic()
    facets = set(project_base(2))
    expected = shannon_oracle() | zy_swap_set()
    secs = time.monotonic() - t
    ok = facets == expected and secs < 600
    record(
        5,
        ok,
        f"{len(facets)} facets; expected {len(expected)} (Shannon {len(shannon_oracle())} + ZY {len(zy_swap_set())}); "
        f"missing={len(expected - facets)} extra={len(facets - expected)}",
        secs,
    )
    assert ok


def test_criterion_6_projection_three_pages():
    budget = float(os.environ.get("BOOKINEQ_C6_BUDGET", "900"))
    t = time.monotonic()
    expected = shannon_oracle() | set(remove_redundant(generate_family(3, True)))
    try:
        facets = set(project_base(3, budget_seconds=budget))
    except BudgetExceeded as e:
        # downgraded form
        inv = {v: k for k, v in base_coordinates().items()}
        found = set()
        if e.partial is not None:
            for c in e.partial.inequalities:
                if c.coeffs and all(k in inv for k in c.coeffs):
                    found.add(canonical_form(LinExpr(ABCD, {ABCD.mask(inv[k]): v for k, v in c.coeffs.items()})))
        cone = assemble_cone(3).cone
        fwd = base_coordinates()
        valid = [bool(is_implied({fwd[ABCD.label(m)]: v for m, v in f.coeffs.items()}, cone)) for f in expected]
        members = found <= expected
        secs = time.monotonic() - t
        ok = members and all(valid)
        record(
            6,
            ok,
            f"DOWNGRADED (budget {budget:.0f} s exceeded): {len(found)} base facets found, all expected={members}; "
            f"{sum(valid)}/{len(expected)} expected facets certified valid for the 3-page cone",
            secs,
        )
        assert ok
        return
    secs = time.monotonic() - t
    ok = facets == expected
    record(6, ok, f"full projection: {len(facets)} facets, expected {len(expected)}, missing={len(expected - facets)} extra={len(facets - expected)}", secs)
    assert ok


def test_criterion_7_necessity_proof():
    t = time.monotonic()
    lines = []
    ok = True
    for n in range(2, 10):
        r = verify_proof(n)
        res = verify_certificate_file(certificates_to_json(n, r.members))
        good = r.ok and res and all(x.ok for x in res)
        lines.append(f"n={n}:{'ok' if good else 'FAIL'}")
        ok = ok and good
    secs = time.monotonic() - t
    ok = ok and secs < 1800
    record(7, ok, "ledgers, telescopes and re-verified certificates " + " ".join(lines), secs)
    assert ok


def _polymatroid_ok(g):
    """Direct axiom check over all elemental pairs (independent of core)."""
    r = g.rank
    k = len(g.ground)
    full = (1 << k) - 1
    if r[0] != 0:
        return False
    for i in range(k):
        if r[full] < r[full & ~(1 << i)]:
            return False
        for j in range(i + 1, k):
            rest = full & ~(1 << i) & ~(1 << j)
            K = rest
            while True:
                if r[K | 1 << i] + r[K | 1 << j] < r[K | 1 << i | 1 << j] + r[K]:
                    return False
                if K == 0:
                    break
                K = (K - 1) & rest
    return True


def test_criterion_8_constructions():
    t = time.monotonic()
    rng = random.Random(8)
    failures = []
    trials = 100
    for trial in range(trials):
        # a one-element ground set has no proper non-empty spine
        size = rng.randint(2, 4)
        ground = "abcd"[:size]
        g = random_polymatroid(ground, rng)
        n = rng.randint(2, 4)
        a = rng.choice(ground)
        h, L = extend_over_singleton(g, a, n)
        if not (is_book_extension(h, g, L).ok and _polymatroid_ok(h)):
            failures.append(("singleton", trial))
        h, L = extend_over_cosingleton(g, a, n)
        if not (is_book_extension(h, g, L).ok and _polymatroid_ok(h)):
            failures.append(("cosingleton", trial))
        tt = g(a) * Fraction(rng.randint(0, 4), 4)
        if not validate_polymatroid(min_extend(g, a, tt)).ok:
            failures.append(("min_extend", trial))
        ta = tighten(g, a)
        if tighten(ta, a) != ta:
            failures.append(("idempotent", trial))
        b = rng.choice(ground)
        if tighten(tighten(g, a), b) != tighten(tighten(g, b), a):
            failures.append(("commute", trial))
    # round trips; free and U24 + free have a non-zero tight gap
    fixtures = {name: load(name + ".json") for name in ("U24", "V", "free")}
    fixtures["U24+free"] = fixtures["U24"] + fixtures["free"]
    roundtrips = 0
    for name, g in fixtures.items():
        for n in (2, 3):
            for h, L in (extend_over_singleton(g, "a", n), extend_over_cosingleton(g, "d", n)):
                for x in "abcd":
                    ht = tighten_extension(h, g, L, x)
                    if not is_book_extension(ht, tighten(g, x), L).ok:
                        failures.append(("tightened extension", name, n, x))
                    back = lift_tight_extension(g, ht, L, x)
                    if name in ("U24", "V", "free") and back != h:
                        failures.append(("lift after tighten", name, n, x))
                    # in general only the reverse composition is the identity:
                    # min_extend on the spine can forget part of h
                    if tighten_extension(back, g, L, x) != ht:
                        failures.append(("tighten after lift", name, n, x))
                    roundtrips += 1
    secs = time.monotonic() - t
    ok = not failures and secs < 600
    record(8, ok, f"{trials} random polymatroids on <= 4 elements, n <= 4, {roundtrips} fixture round trips; failures={len(failures)}", secs)
    assert ok, failures[:5]


def test_criterion_9_sampling():
    t = time.monotonic()
    bad = []
    count = 0
    for n in (2, 3):
        fam = generate_family(n, True)
        L = book_layout(n)
        for seed in range(50):
            h = sample_cone_point(n, seed)
            g = base_restriction(h, n)
            count += 1
            if not (_polymatroid_ok(h) and is_book_extension(h, g, L).ok):
                bad.append((n, seed, "not an extension"))
            vals = [e(g) for e in fam]
            if not all(isinstance(v, Fraction) and v >= 0 for v in vals):
                bad.append((n, seed, min(vals)))
    secs = time.monotonic() - t
    ok = not bad and secs < 600
    record(9, ok, f"{count} sampled extensions (50 each for n=2,3) satisfy their families exactly; failures={len(bad)}", secs)
    assert ok, bad[:5]
