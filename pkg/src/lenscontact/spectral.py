"""Leading heat-trace coefficients, Seifert data, and the quasi-regular
deformation pipeline.

The small-time trace of the sub-Riemannian heat kernel is
(C0 + C1 t) / (16 t^2) + O(1).  For every form here C0 = p tau0 tau1 and
C1 = 2 pi (tau0 + tau1); quasi-regular forms also give C1 = 2 pi tau chi_orb.
Irregular forms are reached as limits of the quasi-regular deformations
alpha / (1 + eps mu) with mu = 2 pi tau0 a the tube-volume function.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .contact_form import (ContactForm, FormCoefficients, coefficients, total_volume,
                           volume_of_coefficients)
from .errors import DeformationPipelineError, InvalidDeformationError, WrongClassError
from .jets import jet_mul, jet_recip
from .lens_atlas import TWO_PI
from .metric_curvature import total_curvature
from .reeb_dynamics import (DMAX, MARGIN, _convergents, classify, monodromy_rotation,
                            rational_detect)

DEFORMED_TOL = 1e-9


@dataclass
class HeatTraceCoefficients:
    C0: float
    C1: float
    source: str
    checks: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.C0 > 0:
            raise ValueError("C0 must be positive")

    def to_dict(self) -> dict:
        return {"C0": self.C0, "C1": self.C1, "source": self.source, "checks": self.checks}


def heat_trace_eval(coeffs: HeatTraceCoefficients, t: float) -> float:
    """(C0 + C1 t) / (16 t^2)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return (coeffs.C0 + coeffs.C1 * t) / (16.0 * t * t)


def _relative(a, b):
    return abs(a - b) / abs(b)


def heat_coeffs_irregular(form: ContactForm, cross_check: bool = True) -> HeatTraceCoefficients:
    verdict = classify(form)
    if verdict.kind != "irregular":
        raise WrongClassError("form is quasi-regular; use heat_coeffs_quasiregular(seifert_data(form))")
    C0 = form.lens.p * form.tau0 * form.tau1
    C1 = TWO_PI * (form.tau0 + form.tau1)
    checks = {}
    if cross_check:
        checks["volume_rel"] = _relative(total_volume(form), C0)
        checks["curvature_rel"] = _relative(total_curvature(form), C1)
    return HeatTraceCoefficients(C0, C1, "closed-form", checks)


@dataclass(frozen=True)
class SeifertData:
    tau: float
    a0: int
    a1: int
    chi_orb: Fraction
    e_volume: float
    form: Optional[ContactForm] = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "a0": self.a0, "a1": self.a1,
                "chi_orb": str(self.chi_orb), "e_volume": self.e_volume}


def seifert_data(form) -> SeifertData:
    """Orders of the exceptional fibres, generic period, chi_orb, and
    e_volume = -vol/tau."""
    verdict = classify(form)
    if verdict.kind != "quasi-regular":
        raise WrongClassError("form is irregular; Seifert data exist only for quasi-regular forms")
    a0, a1 = verdict.orders
    tau0, tau1 = form.core_periods()
    tau = a0 * tau0
    vol = form.lens.p * tau0 * tau1
    return SeifertData(tau, a0, a1, Fraction(1, a0) + Fraction(1, a1), -vol / tau,
                       form if isinstance(form, ContactForm) else None)


def heat_coeffs_quasiregular(data: SeifertData, cross_check: bool = True) -> HeatTraceCoefficients:
    C0 = -data.tau * data.e_volume
    C1 = TWO_PI * data.tau * float(data.chi_orb)
    checks = {}
    if cross_check and data.form is not None:
        checks["volume_rel"] = _relative(total_volume(data.form), C0)
        checks["curvature_rel"] = _relative(total_curvature(data.form), C1)
    return HeatTraceCoefficients(C0, C1, "closed-form", checks)


def heat_coeffs(form) -> HeatTraceCoefficients:
    """Coefficients through whichever class the form belongs to."""
    if classify(form).kind == "irregular":
        return heat_coeffs_irregular(form)
    return heat_coeffs_quasiregular(seifert_data(form))


class DeformedForm:
    """alpha / (1 + eps mu), mu = 2 pi tau0 a (chart 0) = 2 pi tau0 a(1 - r)
    (chart 1).  Lives in the generic (f, g) representation; rotation numbers
    come from monodromy."""

    rotation_tolerance = DEFORMED_TOL

    def __init__(self, base: ContactForm, epsilon: float):
        V = base.lens.p * base.tau0 * base.tau1
        if not 1.0 + epsilon * V > 0:
            raise InvalidDeformationError(f"1 + eps*vol = {1.0 + epsilon * V!r} must be positive")
        self.base = base
        self.epsilon = float(epsilon)
        self.lens = base.lens
        self._cache = {}

    def mu_jet(self, chart: int, r):
        r = np.asarray(r, dtype=float)
        c = TWO_PI * self.base.tau0
        if chart == 0:
            return c * self.base.profile.jet(r)
        signs = np.array([1.0, -1.0, 1.0, -1.0, 1.0]).reshape((-1,) + (1,) * r.ndim)
        return c * signs * self.base.profile.jet(1.0 - r)

    def coefficients(self, chart: int) -> FormCoefficients:
        base = coefficients(self.base, chart)
        eps = self.epsilon

        def jet(r):
            F, G = base.jet(r)
            scale = eps * self.mu_jet(chart, r)
            scale[0] = scale[0] + 1.0
            inv = jet_recip(scale)
            return jet_mul(F, inv), jet_mul(G, inv)
        return FormCoefficients(chart, jet)

    def core_periods(self) -> tuple:
        return tuple(TWO_PI * self.coefficients(c).f(0.0) for c in (0, 1))

    def rotation_numbers(self) -> tuple:
        if "rot" not in self._cache:
            self._cache["rot"] = (monodromy_rotation(self, 0), monodromy_rotation(self, 1))
        return self._cache["rot"]

    def volume(self) -> float:
        return volume_of_coefficients(self.coefficients(0))


def deform(form: ContactForm, epsilon: float) -> DeformedForm:
    return DeformedForm(form, epsilon)


def rational_approximants(form: ContactForm, count: int) -> list:
    """(eps_n, r_n) for the first ``count`` convergents r_n of tau0/tau1 with
    denominator > 1; eps_n makes the deformed period ratio exactly r_n."""
    if count < 1:
        raise ValueError("count must be >= 1")
    x = form.tau0 / form.tau1
    V = form.lens.p * form.tau0 * form.tau1
    out = []
    for n, d in _convergents(Fraction(x)):
        if d == 1:
            continue
        r_n = Fraction(n, d)
        eps = (float(r_n) * form.tau1 / form.tau0 - 1.0) / V
        if not 1.0 + eps * V > 0:
            continue
        out.append((eps, r_n))
        if len(out) == count:
            break
    return out


CONVERGENCE_COLUMNS = ["n", "epsilon", "ratio_n_num", "ratio_n_den", "a0", "a1", "tau",
                       "C0", "C1", "resid_C0", "resid_C1"]


def convergence_study(form: ContactForm, count: int = 6) -> list:
    """One row per deformation eps_n (plus the undeformed row n = 0).

    Each deformed form is classified from monodromy rotation numbers; its
    quasi-regular coefficients are C0 = -tau e_volume and C1 = 2 pi tau chi_orb.
    """
    if classify(form).kind != "irregular":
        raise WrongClassError("convergence study needs an irregular form")
    C0_ref = form.lens.p * form.tau0 * form.tau1
    C1_ref = TWO_PI * (form.tau0 + form.tau1)
    rows = [{"n": 0, "epsilon": 0.0, "ratio_n_num": None, "ratio_n_den": None, "a0": None,
             "a1": None, "tau": None, "C0": C0_ref, "C1": C1_ref, "resid_C0": 0.0, "resid_C1": 0.0,
             "kind": "irregular"}]
    for i, (eps, r_n) in enumerate(rational_approximants(form, count), start=1):
        dform = deform(form, eps)
        verdict = classify(dform, Dmax=DMAX, tol=DEFORMED_TOL, margin=MARGIN)
        if verdict.kind != "quasi-regular":
            raise DeformationPipelineError(f"deformation eps={eps!r} (ratio {r_n}) classified irregular")
        data = seifert_data(dform)
        coeffs = heat_coeffs_quasiregular(data, cross_check=False)
        t0, t1 = dform.core_periods()
        rows.append({"n": i, "epsilon": eps, "ratio_n_num": r_n.numerator, "ratio_n_den": r_n.denominator,
                     "a0": data.a0, "a1": data.a1, "tau": data.tau, "C0": coeffs.C0, "C1": coeffs.C1,
                     "resid_C0": abs(coeffs.C0 - C0_ref), "resid_C1": abs(coeffs.C1 - C1_ref),
                     "kind": verdict.kind, "tau0_eps": t0, "tau1_eps": t1,
                     "phi0_eps": dform.rotation_numbers()[0], "phi1_eps": dform.rotation_numbers()[1]})
    return rows


def convergence_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONVERGENCE_COLUMNS)
    for row in rows:
        w.writerow(["" if row[k] is None else (repr(row[k]) if isinstance(row[k], float) else row[k])
                    for k in CONVERGENCE_COLUMNS])
    return buf.getvalue()
