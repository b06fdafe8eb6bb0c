"""Contact forms on L(p, q) associated to a triple (a, tau0, phi0).

In chart 0 the form is (tau0/2pi - phi0 a(r)) dz + a(r) dtheta; in chart 1
it is (tau1/2pi - phi1 g1(r)) dz + g1(r) dtheta with g1 the induced chart-1
profile.  Both charts write alpha = f(r) dz + g(r) dtheta, and everything
downstream (Reeb fields, metrics, deformations) only sees (f, g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidProfileError, InvalidRotationError, NotContactError
from .lens_atlas import TWO_PI, ChartPoint, LensParams, transition
from .profile import (BoundaryData, ProfileSpec, default_profile, eval_profile,
                      induced_a1, validate_monotone, validate_smoothness)
from .quadrature import integrate_smooth


class FormCoefficients:
    """alpha = f(r) dz + g(r) dtheta in one chart.

    ``jet(r)`` returns the pair of order-4 jets (F, G); ``f`` and ``g`` are
    evaluators with the ``(r, order=0)`` calling convention.
    """

    def __init__(self, chart: int, jet: Callable):
        self.chart = chart
        self._jet = jet

    def jet(self, r):
        return self._jet(r)

    def f(self, r, order: int = 0):
        v = self._jet(r)[0][order]
        return float(v) if np.ndim(v) == 0 else v

    def g(self, r, order: int = 0):
        v = self._jet(r)[1][order]
        return float(v) if np.ndim(v) == 0 else v

    def wronskian(self, r):
        """f g' - g f', the density of alpha ^ d alpha in dr dtheta dz."""
        F, G = self._jet(r)
        return F[0] * G[1] - G[0] * F[1]

    def shifted(self, df: float = 0.0, dg: float = 0.0) -> "FormCoefficients":
        """Copy with constants added to f and g (for sensitivity checks)."""
        def jet(r):
            F, G = self._jet(r)
            F, G = F.copy(), G.copy()
            F[0] = F[0] + df
            G[0] = G[0] + dg
            return F, G
        return FormCoefficients(self.chart, jet)


@dataclass(frozen=True)
class ContactForm:
    lens: LensParams
    tau0: float
    phi0: float
    profile: ProfileSpec

    @property
    def rotation_factor(self) -> float:
        return self.lens.q + self.lens.p * self.phi0

    @property
    def tau1(self) -> float:
        return self.tau0 / self.rotation_factor

    @property
    def phi1(self) -> float:
        return (self.lens.m - self.lens.s * self.phi0) / self.rotation_factor

    @property
    def boundary(self) -> BoundaryData:
        return BoundaryData(self.lens, self.tau0, self.phi0)

    def core_periods(self) -> tuple:
        return self.tau0, self.tau1

    def rotation_numbers(self) -> tuple:
        return self.phi0, self.phi1

    # closed-form rotation numbers carry only rounding error
    rotation_tolerance = 1e-12

    def coefficients(self, chart: int) -> FormCoefficients:
        return coefficients(self, chart)

    def chart_profile(self, chart: int):
        return self.profile if chart == 0 else induced_a1(self.profile)

    def chart_period(self, chart: int) -> float:
        return self.tau0 if chart == 0 else self.tau1

    def chart_phi(self, chart: int) -> float:
        return self.phi0 if chart == 0 else self.phi1


def from_triple(profile: ProfileSpec, tau0: float, phi0: float, lens: LensParams,
                validate: bool = True) -> ContactForm:
    """Build and (by default) validate the form of a triple.

    The stored profile is rebound to the boundary data of (tau0, phi0, lens).
    """
    if not lens.q + lens.p * phi0 > 0:
        raise InvalidRotationError(f"p*phi0 + q must be positive, got {lens.q + lens.p * phi0!r}")
    bd = BoundaryData(lens, float(tau0), float(phi0))
    if profile.boundary is not None and validate:
        other = profile.boundary
        if (other.lens != lens or abs(other.tau0 - tau0) > 1e-12 * max(1.0, abs(tau0))
                or abs(other.phi0 - phi0) > 1e-12 * max(1.0, abs(phi0))):
            raise InvalidProfileError("profile was built for different boundary data")
    spec = ProfileSpec(profile.coeffs, bd)
    if validate:
        report = validate_smoothness(spec)
        if not report.passed:
            raise InvalidProfileError(f"smoothness conditions fail: {report.failures()}")
        if not validate_monotone(spec):
            raise NotContactError("a' is not safely positive on (0, 1)")
    return ContactForm(lens, float(tau0), float(phi0), spec)


def from_periods(lens: LensParams, tau0: float, tau1: float) -> ContactForm:
    """Form whose cores have minimal periods tau0 and tau1 (default profile)."""
    prof = default_profile(lens, tau0, tau1)
    return from_triple(prof, tau0, prof.boundary.phi0, lens)


def coefficients(form: ContactForm, chart: int) -> FormCoefficients:
    if chart == 0:
        prof, tau, phi = form.profile, form.tau0, form.phi0
    elif chart == 1:
        prof, tau, phi = induced_a1(form.profile), form.tau1, form.phi1
    else:
        raise ValueError(f"chart must be 0 or 1, got {chart}")

    def jet(r):
        G = prof.jet(r)
        F = -phi * G
        F[0] = F[0] + tau / TWO_PI
        return F, G
    return FormCoefficients(chart, jet)


def volume_density(form: ContactForm, chart: int, r):
    """(tau_chart/2pi) w(r), with w the derivative of the chart profile."""
    w = form.chart_profile(chart).jet(r)[1]
    v = form.chart_period(chart) / TWO_PI * w
    return float(v) if np.ndim(v) == 0 else v


def total_volume(form: ContactForm) -> float:
    """(2pi)^2 times the chart-0 integral of the density; chart 0 has full
    measure."""
    value, _ = integrate_smooth(lambda r: volume_density(form, 0, r))
    return TWO_PI ** 2 * value


def volume_of_coefficients(coeffs: FormCoefficients) -> float:
    """Volume from a chart-0 (f, g) pair via the Wronskian density."""
    value, _ = integrate_smooth(lambda r: float(coeffs.wronskian(r)))
    return TWO_PI ** 2 * value


def pull_to_chart1(lens: LensParams, F0, G0):
    """Chart-0 (f, g) values pulled back along the chart-1 -> chart-0 map.

    dz0 = p dtheta1 + s dz1 and dtheta0 = -q dtheta1 + m dz1.
    """
    return lens.s * F0 + lens.m * G0, lens.p * F0 - lens.q * G0


def pull_to_chart0(lens: LensParams, F1, G1):
    """Inverse direction: dz1 = p dtheta0 + q dz0, dtheta1 = -s dtheta0 + m dz0."""
    return lens.q * F1 + lens.m * G1, lens.p * F1 - lens.s * G1


def overlap_consistency(form: ContactForm, n_samples: int = 1000, seed: int = 0,
                        coeffs0: Optional[FormCoefficients] = None,
                        coeffs1: Optional[FormCoefficients] = None) -> float:
    """Max |pullback of the chart-0 coefficients - chart-1 coefficients| at
    random overlap points."""
    rng = np.random.default_rng(seed)
    c0 = coeffs0 or coefficients(form, 0)
    c1 = coeffs1 or coefficients(form, 1)
    r1 = rng.uniform(0.0, 1.0, n_samples)
    r1 = np.clip(r1, 1e-9, 1 - 1e-9)
    pts = ChartPoint(1, r1, rng.uniform(0, TWO_PI, n_samples), rng.uniform(0, TWO_PI, n_samples))
    img = transition(form.lens, pts)
    F0, G0 = c0.jet(img.r)
    F1, G1 = c1.jet(pts.r)
    fz, gt = pull_to_chart1(form.lens, F0[0], G0[0])
    return float(max(np.max(np.abs(fz - F1[0])), np.max(np.abs(gt - G1[0]))))


def dual_form(form: ContactForm) -> ContactForm:
    """The same form described from chart 1 as a triple form on L(p, s).

    Its chart-0 data are (tau1, phi1, g1) and its Bezout pair is (m, q).
    g1(r) = c (P(1) - P(1 - u)) with c = q + p phi0, so g1 is again a
    polynomial in u without constant term.
    """
    lens = form.lens
    P = np.concatenate([[0.0], form.profile.coeffs])
    # constant term c (P(1) - P(1)) = 0
    Q = -form.rotation_factor * _compose_one_minus(P)
    Q[0] = 0.0
    dual_lens = LensParams(lens.p, lens.s, lens.m, lens.q)
    spec = ProfileSpec(tuple(float(c) for c in Q[1:]), None)
    return from_triple(spec, form.tau1, form.phi1, dual_lens, validate=False)


def _compose_one_minus(P):
    """Coefficients of u -> P(1 - u)."""
    out = np.zeros(len(P))
    base = np.array([1.0])
    for c in P:
        out[: len(base)] += c * base
        base = npoly.polymul(base, [1.0, -1.0])
    return out


def chart_symmetry_residual(form: ContactForm, n_samples: int = 200, seed: int = 0) -> float:
    """Rebuild the form from its chart-1 data, pull the rebuilt chart-0
    coefficients back to the original chart 0, compare."""
    dual = dual_form(form)
    rng = np.random.default_rng(seed)
    r = rng.uniform(1e-6, 1 - 1e-6, n_samples)
    Fd, Gd = coefficients(dual, 0).jet(1.0 - r)
    fz, gt = pull_to_chart0(form.lens, Fd[0], Gd[0])
    F0, G0 = coefficients(form, 0).jet(r)
    return float(max(np.max(np.abs(fz - F0[0])), np.max(np.abs(gt - G0[0]))))
