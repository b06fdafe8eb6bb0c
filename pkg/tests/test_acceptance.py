"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy

from lenscontact.contact_form import coefficients, from_periods, from_triple, total_volume
from lenscontact.contactomorphism import (build_psi_map, classify_pair, strict_equivalence_predicate,
                                          verify_cocycle, verify_pullback)
from lenscontact.lens_atlas import TWO_PI, ChartPoint, circle_distance, make_lens, mod1_distance, torus_action, \
    transition, transition_inverse
from lenscontact.metric_curvature import curvature_report, reeb_invariance_check, verify_compatibility
from lenscontact.profile import bumped_profile, flat_end_profile
from lenscontact.reeb_dynamics import (classify, first_return_time, monodromy_rotation, monodromy_rotation_fd,
                                       reeb_residuals)
from lenscontact.spectral import convergence_study, heat_coeffs_quasiregular, seifert_data

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n} ({title}): {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def coprime_q(rng, p):
    while True:
        q = int(rng.integers(-p, 2 * p + 1))
        if math.gcd(p, q) == 1:
            return q


def test_1_volume_identity(report):
    rng = np.random.default_rng(1)
    worst_rel, worst_t = 0.0, 0.0
    for p in (1, 2, 7, 8, 1, 2, 7, 8, 7, 8):
        lens = make_lens(p, coprime_q(rng, p))
        t0, t1 = rng.uniform(1.0, 2.0, 2)
        form = from_periods(lens, t0, t1)
        vol, dt = timed(total_volume, form)
        worst_rel = max(worst_rel, abs(vol - p * t0 * t1) / (p * t0 * t1))
        worst_t = max(worst_t, dt)
    report(1, "volume = p tau0 tau1", worst_rel < 1e-8 and worst_t < 0.1,
           f"10 sets, max rel err {worst_rel:.2e} (< 1e-8), max time {worst_t:.3f}s (< 0.1s)")


def test_2_total_curvature(report):
    forms = [from_periods(make_lens(7, 3), 1.0, SQRT2), from_periods(make_lens(1, 0), 1.0, 1.0),
             from_periods(make_lens(8, 3), 1.3, 1.7), from_periods(make_lens(2, 1), 2.0, 1.1),
             from_periods(make_lens(5, -2), 1.5, 1.5)]
    worst_rel, worst_t = 0.0, 0.0
    for form in forms:
        rep, dt = timed(curvature_report, form)
        worst_rel = max(worst_rel, abs(rep.quadrature - TWO_PI * (form.tau0 + form.tau1))
                        / (TWO_PI * (form.tau0 + form.tau1)))
        worst_t = max(worst_t, dt)
    l73 = curvature_report(forms[0]).quadrature
    ok = worst_rel < 1e-6 and worst_t < 0.5 and abs(l73 - 15.168951183496318) < 1e-5
    report(2, "total curvature = 2 pi (tau0 + tau1)", ok,
           f"5 forms, max rel err {worst_rel:.2e} (< 1e-6), L(7,3) {l73:.6f}, max time {worst_t:.3f}s (< 0.5s)")


def test_3_rotation_numbers(report):
    rng = np.random.default_rng(3)
    worst, worst_fd, worst_t = 0.0, 0.0, 0.0
    for k in range(20):
        p = int(rng.choice([1, 2, 3, 5, 7, 8]))
        lens = make_lens(p, coprime_q(rng, p))
        t0, t1 = rng.uniform(1.0, 2.0, 2)
        form = from_periods(lens, t0, t1)
        t_start = time.perf_counter()
        r0 = monodromy_rotation(form, 0)
        r1 = monodromy_rotation(form, 1)
        worst_t = max(worst_t, time.perf_counter() - t_start)
        worst = max(worst, mod1_distance(r0, (t0 / t1 - lens.q) / p), mod1_distance(r1, (t1 / t0 - lens.s) / p))
        if k >= 5:
            continue
        # nonlinear return map, differentiated numerically (slow, so a subset)
        worst_fd = max(worst_fd, mod1_distance(monodromy_rotation_fd(form, 0), r0),
                       mod1_distance(monodromy_rotation_fd(form, 1), r1))
    ok = worst < 1e-8 and worst_fd < 1e-8 and worst_t < 1.0
    report(3, "monodromy rotation numbers", ok,
           f"20 forms, max mod-1 err {worst:.2e} (< 1e-8), return-map route on 5 {worst_fd:.2e} (< 1e-8), "
           f"max time {worst_t:.3f}s (< 1s)")


def test_4_two_orbit_dichotomy(report):
    irrational = [(7, 3, 1.0, SQRT2), (1, 0, 1.0, math.sqrt(3)), (8, 3, 1.0, math.pi / 2),
                  (2, 1, math.e / 2, 1.0), (5, 2, 1.0, (1 + math.sqrt(5)) / 2)]
    rational = [(1, 0, 1.0, 2.0), (2, 1, 1.0, 1.5), (5, 2, 1.2, 1.8), (7, 3, 1.0, 1.25), (8, 3, 2.0, 1.6)]
    irr_ok = 0
    for p, q, t0, t1 in irrational:
        v = classify(from_periods(make_lens(p, q), t0, t1))
        core_only = all(o.periodic == o.is_core for o in v.orbits)
        irr_ok += v.kind == "irregular" and v.periodic_count == 2 and core_only
    worst = 0.0
    rat_ok = 0
    for p, q, t0, t1 in rational:
        form = from_periods(make_lens(p, q), t0, t1)
        v = classify(form)
        period = Fraction(form.phi0).limit_denominator(1000).denominator * t0
        ret = first_return_time(form, ChartPoint(0, 0.5, 0.1, 0.2), period * 1.2)
        err = max(abs(ret - period), abs(v.generic_period - period)) if v.generic_period else math.inf
        worst = max(worst, err)
        rat_ok += v.kind == "quasi-regular" and err < 1e-9
    report(4, "two-orbit dichotomy", irr_ok == 5 and rat_ok == 5,
           f"irregular {irr_ok}/5, quasi-regular {rat_ok}/5, max period err {worst:.2e} (< 1e-9)")


def test_5_quasi_regular_expansion(report):
    form = from_periods(make_lens(1, 0), 2.0, 3.0)
    s = seifert_data(form)
    c = heat_coeffs_quasiregular(s)
    curv = curvature_report(form).quadrature
    ok = ((s.a0, s.a1) == (3, 2) and s.tau == 6.0 and s.chi_orb == Fraction(5, 6)
          and s.e_volume == -1.0 and abs(c.C1 - 10 * math.pi) < 1e-12 and abs(curv - c.C1) / c.C1 < 1e-6)
    report(5, "L(1,0) (2,3) quasi-regular data", ok,
           f"a=({s.a0},{s.a1}) tau={s.tau} chi_orb={s.chi_orb} e={s.e_volume} C1={c.C1:.12f} "
           f"curvature rel err {abs(curv - c.C1) / c.C1:.2e} (< 1e-6)")


def test_6_deformation_convergence(report):
    form = from_periods(make_lens(7, 3), 1.0, SQRT2)
    rows, dt = timed(convergence_study, form, 6)
    steps = rows[1:]
    V = 7 * SQRT2
    kinds = all(r["kind"] == "quasi-regular" for r in steps)
    tau_err = max(abs(r["tau1_eps"] - SQRT2 / (1 + r["epsilon"] * V)) for r in steps)
    res = [r["resid_C1"] for r in steps]
    decreasing = all(b < a for a, b in zip(res, res[1:]))
    ok = len(steps) >= 6 and kinds and tau_err < 1e-10 and decreasing and res[-1] < 1e-3 and dt < 30
    report(6, "deformation convergence", ok,
           f"{len(steps)} steps, all quasi-regular {kinds}, tau1_eps err {tau_err:.2e} (< 1e-10), "
           f"final C1 residual {res[-1]:.2e} (< 1e-3), time {dt:.1f}s (< 30s)")


def test_7_contactomorphism(report):
    L73 = make_lens(7, 3)
    base = from_periods(L73, 1.0, SQRT2)
    pairs = [(base, from_triple(flat_end_profile(L73, 1.0, SQRT2, d), 1.0, base.phi0, L73)) for d in (5, 7, 9)]
    pairs.append((base, from_triple(bumped_profile(base.profile, -0.5, 1), 1.0, base.phi0, L73)))
    l10 = from_periods(make_lens(1, 0), 1.0, math.sqrt(3))
    pairs.append((l10, from_triple(bumped_profile(l10.profile, 0.05, 0), l10.tau0, l10.phi0, l10.lens)))
    worst = 0.0
    for A, B in pairs:
        psi = build_psi_map(A, B)
        worst = max(worst, verify_pullback(psi, A, B), verify_cocycle(psi))
    swapped = strict_equivalence_predicate(base, from_periods(L73, SQRT2, 1.0))
    n83 = classify_pair(make_lens(8, 3), sympy.Integer(1), sympy.sqrt(2)).count
    n73 = classify_pair(L73, sympy.Integer(1), sympy.sqrt(2)).count
    ok = worst < 1e-8 and swapped is False and n83 == 1 and n73 == 2
    report(7, "strict contactomorphisms", ok,
           f"5 pairs, max pullback/cocycle residual {worst:.2e} (< 1e-8), swapped L(7,3) equivalent={swapped}, "
           f"count L(8,3)={n83}, L(7,3)={n73}")


def _points(rng, chart, n):
    return ChartPoint(chart, rng.uniform(1e-6, 1 - 1e-6, n), rng.uniform(0, TWO_PI, n), rng.uniform(0, TWO_PI, n))


def _distance(a, b):
    return max(np.max(np.abs(a.r - b.r)), np.max(circle_distance(a.theta, b.theta)),
               np.max(circle_distance(a.z, b.z)))


def test_8_structural(report):
    rng = np.random.default_rng(8)
    atlas = 0.0
    for p, q in ((7, 3), (1, 0), (8, 3), (5, 2)):
        lens = make_lens(p, q)
        pts = _points(rng, 1, 1000)
        atlas = max(atlas, _distance(transition_inverse(lens, transition(lens, pts)), pts))
        ang = (rng.uniform(0, TWO_PI, 1000), rng.uniform(0, TWO_PI, 1000))
        atlas = max(atlas, _distance(transition(lens, torus_action(lens, ang, pts)),
                                     torus_action(lens, ang, transition(lens, pts))))
    reeb = compat = inv = 0.0
    for p, q, t0, t1 in ((7, 3, 1.0, SQRT2), (1, 0, 2.0, 3.0), (8, 3, 1.3, 1.7)):
        form = from_periods(make_lens(p, q), t0, t1)
        r = rng.uniform(0.0, 1.0, 1000)
        for chart in (0, 1):
            res = reeb_residuals(coefficients(form, chart), None, r)
            reeb = max(reeb, max(res.values()))
        comp = verify_compatibility(form)
        compat = max(compat, comp["g(R,.)-alpha"], comp["sqrt(det g)-density"])
        inv = max(inv, reeb_invariance_check(form))
    ok = atlas < 1e-12 and reeb < 1e-10 and compat < 1e-10 and inv < 1e-8
    report(8, "structural residuals", ok,
           f"atlas {atlas:.2e} (< 1e-12), Reeb {reeb:.2e} (< 1e-10), compatibility {compat:.2e} (< 1e-10), "
           f"invariance {inv:.2e} (< 1e-8); suite time in the session summary")
