"""Strict contactomorphisms between triple forms and the classification count.

Two triple forms with the same (tau0, phi0) differ only in their profiles a
and b, which share boundary values.  The map (r, theta, z) -> (rho(r), theta,
z) with rho = b^-1 o a pulls beta back to alpha in each chart.  The chart-1
map is built independently from the chart-1 profiles and must agree with the
chart-0 map through the transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import sympy

from .contact_form import ContactForm, coefficients
from .errors import NotComparableError, NumericError, WrongClassError
from .lens_atlas import TWO_PI, ChartPoint, LensParams, mod1_distance, transition, transition_inverse
from .reeb_dynamics import DMAX, TOL, rational_detect

BISECT_WIDTH = 1e-6
NEWTON_TOL = 1e-13


def invert_monotone(prof, y, max_newton: int = 60):
    """x in [0, 1] with prof(x) = y for an increasing profile with jet
    evaluator ``prof.jet``: bisection to width 1e-6, then Newton.  Values
    outside [prof(0), prof(1)] are pinned to the endpoints.

    Near the ends the profile is quadratic, so x is only determined to about
    sqrt(eps) and Newton may jitter there; after the iteration budget the
    result is accepted if the residual is at rounding level.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    y0, y1 = prof.jet(0.0)[0], prof.jet(1.0)[0]
    # rounding level of prof(x); chart-1 profiles are const - c a(1 - r)
    floor = 64 * np.finfo(float).eps * max(abs(y0), abs(y1))
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    n_bisect = int(math.ceil(math.log2(1.0 / BISECT_WIDTH)))
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        below = prof.jet(mid)[0] < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(max_newton):
        J = prof.jet(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (J[0] - y) / J[1]
        step = np.where(np.isfinite(step), step, 0.0)
        new = np.clip(x - step, lo, hi)
        moved = np.max(np.abs(new - x))
        x = new
        if moved < NEWTON_TOL:
            break
    else:
        worst = float(np.max(np.abs(prof.jet(x)[0] - y)))
        if worst > floor:
            raise NumericError(f"Newton polish stalled with residual {worst:.3g}")
    x = np.where(y <= y0, 0.0, np.where(y >= y1, 1.0, x))
    return x


@dataclass
class RadialMap:
    """Per-chart radial reparametrizations; the angles are left alone."""

    lens: LensParams
    rho0: Callable
    rho1: Callable

    def apply(self, pt: ChartPoint) -> ChartPoint:
        rho = self.rho0 if pt.chart == 0 else self.rho1
        return ChartPoint(pt.chart, rho(pt.r), pt.theta, pt.z)

    def then(self, other: "RadialMap") -> "RadialMap":
        """Composite: first self, then other."""
        return RadialMap(self.lens, lambda r: other.rho0(self.rho0(r)), lambda r: other.rho1(self.rho1(r)))

    def sample(self, n: int = 101) -> list:
        r = np.linspace(0.0, 1.0, n)
        return list(zip(r.tolist(), self.rho0(r).tolist(), self.rho1(r).tolist()))


def _same_triple(A: ContactForm, B: ContactForm) -> bool:
    return (A.lens == B.lens and abs(A.tau0 - B.tau0) < 1e-12 and abs(A.phi0 - B.phi0) < 1e-12)


def build_psi_map(formA: ContactForm, formB: ContactForm) -> RadialMap:
    """Radial map Psi with Psi^* beta = alpha (alpha from A, beta from B)."""
    if not _same_triple(formA, formB):
        raise NotComparableError("forms differ in lens, tau0 or phi0")
    a0, b0 = formA.chart_profile(0), formB.chart_profile(0)
    a1, b1 = formA.chart_profile(1), formB.chart_profile(1)

    def rho0(r):
        r = np.asarray(r, dtype=float)
        out = invert_monotone(b0, a0.jet(r)[0]).reshape(r.shape)
        return _pin(r, out)

    def rho1(r):
        r = np.asarray(r, dtype=float)
        out = invert_monotone(b1, a1.jet(r)[0]).reshape(r.shape)
        return _pin(r, out)
    return RadialMap(formA.lens, rho0, rho1)


def _pin(r, out):
    out = np.where(r == 0.0, 0.0, np.where(r == 1.0, 1.0, out))
    return float(out) if out.ndim == 0 else out


def verify_pullback(psi: RadialMap, formA: ContactForm, formB: ContactForm,
                    n_samples: int = 1000, seed: int = 0) -> float:
    """Max difference between the coefficients of beta at Psi(r) and those
    of alpha at r, over both charts."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for chart, rho in ((0, psi.rho0), (1, psi.rho1)):
        r = np.concatenate([[0.0, 1.0], rng.uniform(0.0, 1.0, n_samples)])
        FA, GA = coefficients(formA, chart).jet(r)
        FB, GB = coefficients(formB, chart).jet(rho(r))
        worst = max(worst, float(np.max(np.abs(FB[0] - FA[0]))), float(np.max(np.abs(GB[0] - GA[0]))))
    return worst


def verify_cocycle(psi: RadialMap, n_samples: int = 1000, seed: int = 0) -> float:
    """Max distance between transition^-1 o Psi_0 o transition and Psi_1 on
    random chart-1 overlap points."""
    rng = np.random.default_rng(seed)
    pts = ChartPoint(1, rng.uniform(1e-6, 1 - 1e-6, n_samples),
                     rng.uniform(0, TWO_PI, n_samples), rng.uniform(0, TWO_PI, n_samples))
    lhs = transition_inverse(psi.lens, psi.apply(transition(psi.lens, pts)))
    rhs = psi.apply(pts)
    return float(np.max(lhs.distance(rhs)))


@dataclass
class EquivalenceVerdict:
    count: int
    q_squared_mod_p: int
    candidates: list
    coincide: bool
    exact: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"count": self.count, "q_squared_mod_p": self.q_squared_mod_p,
                "candidates": [str(c) for c in self.candidates], "coincide": self.coincide,
                "exact": self.exact, **self.detail}


def classify_pair(lens: LensParams, tau0, tau1) -> EquivalenceVerdict:
    """Number of strict-contactomorphism classes of irregular forms whose
    cores have periods {tau0, tau1}: 1 if q^2 = 1 mod p, else 2.

    Periods may be sympy expressions (e.g. sympy.sqrt(2)); then the
    irrationality hypothesis is decided exactly.  Floats go through
    :func:`rational_detect`.
    """
    exact = isinstance(tau0, sympy.Basic) or isinstance(tau1, sympy.Basic)
    if exact:
        x = sympy.nsimplify(sympy.sympify(tau0) / sympy.sympify(tau1))
        rational = x.is_rational
        if rational is None:
            raise WrongClassError(f"cannot decide whether {x} is rational")
        if rational:
            raise WrongClassError(f"period ratio {x} is rational; the forms are quasi-regular")
    else:
        x = float(tau0) / float(tau1)
        if rational_detect(x, DMAX, TOL) is not None:
            raise WrongClassError(f"period ratio {x!r} is rational at (Dmax={DMAX}, tol={TOL})")
    p, q, s = lens.p, lens.q, lens.s
    # rotation number of the core with period tau0, for the two ways of
    # placing that core (as l0 or as l1)
    cand_q = (x - q) / p
    cand_s = (x - s) / p
    # their difference (s - q)/p is rational, so coincidence mod 1 is exact
    diff = Fraction(s - q, p)
    coincide = diff.denominator == 1
    count = 1 if (q * q - 1) % p == 0 else 2
    if coincide != (count == 1):
        raise AssertionError("q^2 = 1 mod p must coincide with q = s mod p")
    if exact:
        candidates = [sympy.simplify(cand_q), sympy.simplify(cand_s)]
        detail = {"numeric_gap_mod1": mod1_distance(float(cand_q), float(cand_s))}
    else:
        candidates = [cand_q % 1.0, cand_s % 1.0]
        detail = {"numeric_gap_mod1": mod1_distance(cand_q, cand_s)}
    return EquivalenceVerdict(count, (q * q) % p, candidates, coincide, exact, detail)


def _cores(form: ContactForm):
    return [(form.tau0, form.phi0), (form.tau1, form.phi1)]


def strict_equivalence_predicate(formA: ContactForm, formB: ContactForm, tol: float = 1e-10) -> bool:
    """True iff some core of A and some core of B share period and rotation
    number mod 1."""
    if formA.lens != formB.lens:
        raise NotComparableError("forms live on different lens spaces")
    for form in (formA, formB):
        if rational_detect(form.phi0, DMAX, TOL) is not None:
            raise WrongClassError("strict equivalence is decided here for irregular forms only")
    for tA, pA in _cores(formA):
        for tB, pB in _cores(formB):
            if abs(tA - tB) < tol and mod1_distance(pA, pB) < tol:
                return True
    return False
