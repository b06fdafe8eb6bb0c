"""Reeb-invariant compatible metric and the curvature of the Reeb quotient.

In chart i the metric is

    dr^2 + w(r)^2 (dtheta - phi_i dz)^2 + alpha (x) alpha,

with w the derivative of the chart profile.  Since d alpha = w dr ^ (dtheta -
phi_i dz), the first two terms give the area form d alpha on ker alpha, so
the metric is compatible: g(R, .) = alpha and vol_g = alpha ^ d alpha.  The
quotient by the Reeb flow is locally dr^2 + w^2 dpsi^2, with Gaussian
curvature kappa = -w''/w.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .contact_form import ContactForm, coefficients, volume_density
from .errors import MetricGaugeError
from .lens_atlas import TWO_PI, ChartPoint
from .quadrature import integrate_smooth
from .reeb_dynamics import flow, reeb_field

R_MIN = 1e-3
SERIES_DEGREE = 14
GAUGE_TOL = 1e-8


@dataclass(frozen=True)
class ChartMetric:
    chart: int
    phi: float
    profile: object   # chart profile; w is its first derivative

    def w(self, r, order: int = 0):
        return self.profile.jet(r)[order + 1]


def chart_metric(form: ContactForm, chart: int) -> ChartMetric:
    return ChartMetric(chart, form.chart_phi(chart), form.chart_profile(chart))


def gram_polar(form: ContactForm, chart: int, r, w_factor: float = 1.0) -> np.ndarray:
    """Gram matrices in the (d/dr, d/dtheta, d/dz) frame, shape (..., 3, 3)."""
    r = np.asarray(r, dtype=float)
    F, G = coefficients(form, chart).jet(r)
    w = w_factor * form.chart_profile(chart).jet(r)[1]
    phi = form.chart_phi(chart)
    zero = np.zeros_like(r)
    one = np.ones_like(r)
    beta = np.stack([zero, one, -phi * one], axis=-1)
    alpha = np.stack([zero, G[0], F[0]], axis=-1)
    er = np.stack([one, zero, zero], axis=-1)
    outer = lambda v: v[..., :, None] * v[..., None, :]
    return outer(er) + (w ** 2)[..., None, None] * outer(beta) + outer(alpha)


def metric_at(form: ContactForm, pt: ChartPoint) -> np.ndarray:
    """Gram matrix at a scalar point; on the core r = 0 the Cartesian
    (d/dx, d/dy, d/dz) frame is used, where the metric is diag(1, 1, f(0)^2)."""
    r = float(pt.r)
    if r == 0.0:
        f0 = coefficients(form, pt.chart).f(0.0)
        return np.diag([1.0, 1.0, f0 * f0])
    return gram_polar(form, pt.chart, r)


def _reeb_vector(form: ContactForm, chart: int):
    wt, wz = reeb_field(form, chart).analytic
    return np.array([0.0, wt, wz])


def verify_compatibility(form: ContactForm, n_samples: int = 1000, seed: int = 0,
                         w_factor: float = 1.0) -> dict:
    """Max residuals of g(R, .) = alpha and sqrt(det g) = contact density,
    both charts, at random radii in (0, 1).

    The density vanishes at the cores, so the relative volume residual is
    reported only for r in [0.01, 0.99]; the absolute one covers all samples.
    """
    rng = np.random.default_rng(seed)
    out = {"g(R,.)-alpha": 0.0, "g(R,dr)": 0.0, "sqrt(det g)-density": 0.0,
           "sqrt(det g)/density-1": 0.0, "min_eig": math.inf}
    for chart in (0, 1):
        r = rng.uniform(1e-6, 1 - 1e-6, n_samples)
        Gm = gram_polar(form, chart, r, w_factor)
        R = _reeb_vector(form, chart)
        GR = Gm @ R
        F, G = coefficients(form, chart).jet(r)
        alpha = np.stack([np.zeros_like(r), G[0], F[0]], axis=-1)
        dens = volume_density(form, chart, r)
        out["g(R,.)-alpha"] = max(out["g(R,.)-alpha"], float(np.max(np.abs(GR - alpha))))
        out["g(R,dr)"] = max(out["g(R,dr)"], float(np.max(np.abs(GR[:, 0]))))
        vol = np.sqrt(np.linalg.det(Gm))
        inner = (r >= 0.01) & (r <= 0.99)
        out["sqrt(det g)-density"] = max(out["sqrt(det g)-density"], float(np.max(np.abs(vol - dens))))
        out["sqrt(det g)/density-1"] = max(out["sqrt(det g)/density-1"],
                                           float(np.max(np.abs(vol[inner] / dens[inner] - 1.0))))
        np.linalg.cholesky(Gm)   # raises if not positive definite
        out["min_eig"] = min(out["min_eig"], float(np.min(np.linalg.eigvalsh(Gm))))
    return out


def reeb_invariance_check(form: ContactForm, n_samples: int = 200, h: float = 1e-4,
                          seed: int = 0, gram: Optional[Callable] = None,
                          direction: str = "reeb") -> float:
    """Max entry of the symmetric-difference Lie derivative of the metric
    along the Reeb flow (or along d/dtheta with ``direction="theta"``).

    ``gram(chart, r, theta, z)`` overrides the metric, for sensitivity
    checks.  The flows here are translations in (theta, z) at fixed r, so
    their differential is the identity and the pullback only moves the base
    point.
    """
    if not 0 < h <= 1e-3:
        raise ValueError("h must lie in (0, 1e-3]")
    if gram is None:
        gram = lambda chart, r, theta, z: gram_polar(form, chart, r)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for chart in (0, 1):
        for _ in range(n_samples):
            pt = ChartPoint(chart, rng.uniform(0.01, 0.99), rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI))
            if direction == "reeb":
                fwd, bwd = flow(form, pt, h), flow(form, pt, -h)
            else:
                fwd = ChartPoint(chart, pt.r, pt.theta + h, pt.z)
                bwd = ChartPoint(chart, pt.r, pt.theta - h, pt.z)
            L = (gram(chart, fwd.r, fwd.theta, fwd.z) - gram(chart, bwd.r, bwd.theta, bwd.z)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(L))))
    return worst


def check_gauge(form: ContactForm, chart: int, tol: float = GAUGE_TOL):
    """w(r)/r -> 1 at the core of ``chart``, i.e. the chart profile has unit
    second derivative there."""
    w1 = form.chart_profile(chart).jet(0.0)[2]
    if abs(w1 - 1.0) > tol:
        raise MetricGaugeError(
            f"chart-{chart} metric is singular at the core: w'(0) = {w1!r}, expected 1")


def _series_kappa(taylor: np.ndarray, r):
    """-w''/w from Taylor coefficients t_k of the chart profile at the core.

    w = sum k t_k r^(k-1) and w'' = sum k(k-1)(k-2) t_k r^(k-3); both are odd
    in r, so the common factor r cancels."""
    r = np.asarray(r, dtype=float)
    k = np.arange(len(taylor))
    w_over_r = np.polynomial.polynomial.polyval(r, np.where(k >= 2, k * taylor, 0.0)[2:])
    w2_over_r = np.polynomial.polynomial.polyval(r, (k * (k - 1) * (k - 2) * taylor)[4:]) if len(k) > 4 else 0.0
    return -w2_over_r / w_over_r


def kappa_from_width(w_jet: Callable, r):
    """-w''/w for a width function given as a jet evaluator (w, w', w'', ...)."""
    J = w_jet(r)
    return -J[2] / J[0]


def kappa(form: ContactForm, chart: int, r, r_min: float = R_MIN):
    """Quotient curvature -w''/w in the given chart, with series limits near
    both cores (near r = 1 the other chart's core)."""
    check_gauge(form, 0)
    check_gauge(form, 1)
    r = np.asarray(r, dtype=float)
    other = 1 - chart
    prof = form.chart_profile(chart)
    J = prof.jet(np.clip(r, r_min, 1 - r_min))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = -J[3] / J[1]
    near = _series_kappa(prof.taylor(0, SERIES_DEGREE), np.minimum(r, r_min))
    far = _series_kappa(form.chart_profile(other).taylor(0, SERIES_DEGREE), np.minimum(1.0 - r, r_min))
    out = np.where(r < r_min, near, np.where(r > 1.0 - r_min, far, direct))
    return float(out) if out.ndim == 0 else out


@dataclass
class CurvatureReport:
    quadrature: float
    telescoped: float
    closed_form: float

    @property
    def rel_error(self) -> float:
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)

    @property
    def telescope_error(self) -> float:
        return abs(self.quadrature - self.telescoped)

    def to_dict(self) -> dict:
        return {"quadrature": self.quadrature, "telescoped": self.telescoped,
                "closed_form": self.closed_form, "rel_error": self.rel_error,
                "telescope_error": self.telescope_error}


def curvature_report(form: ContactForm) -> CurvatureReport:
    """(2pi)^2 times the chart-0 integral of kappa * density.

    Chart 0 is used up to r = 1/2 and chart 1 beyond (kappa_0(r) =
    kappa_1(1 - r)), so both ends are handled by their own core series.
    Compared with 2pi tau0 (a''(0) - a''(1)), to which the integral
    telescopes, and with 2pi (tau0 + tau1).
    """
    def integrand(r):
        if r <= 0.5:
            k = kappa(form, 0, r)
        else:
            k = kappa(form, 1, 1.0 - r)
        return k * volume_density(form, 0, r)
    half1, _ = integrate_smooth(integrand, 0.0, 0.5)
    half2, _ = integrate_smooth(integrand, 0.5, 1.0)
    quad = TWO_PI ** 2 * (half1 + half2)
    a = form.profile
    tele = TWO_PI * form.tau0 * (a(0.0, 2) - a(1.0, 2))
    return CurvatureReport(quad, tele, TWO_PI * (form.tau0 + form.tau1))


def total_curvature(form: ContactForm) -> float:
    return curvature_report(form).quadrature


def curvature_csv(form: ContactForm, n: int = 101) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "kappa", "density"])
    for r in np.linspace(0.0, 1.0, n):
        w.writerow([repr(float(r)), repr(float(kappa(form, 0, r))), repr(float(volume_density(form, 0, r)))])
    return buf.getvalue()
