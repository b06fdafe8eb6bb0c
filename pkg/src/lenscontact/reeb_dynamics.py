"""Reeb fields, flows, rotation numbers and the periodic/non-periodic split.

For alpha = f(r) dz + g(r) dtheta the Reeb field has no radial part and

    R = (g' dz - f' dtheta) / (f g' - g f')      (components on d/dz, d/dtheta)

so every flow preserves r.  On the core r = 0 the field is the limit
dz/dt = 1/f(0), dtheta/dt = -f''(0) / (f(0) g''(0)).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .contact_form import ContactForm, FormCoefficients
from .errors import ModelViolationError, NotContactError, NumericError
from .lens_atlas import TWO_PI, ChartPoint, circle_distance

log = logging.getLogger(__name__)

DMAX = 10 ** 6
TOL = 1e-12
MARGIN = 1e-3
MONODROMY_STEPS = 10 ** 4


def reeb_generic(f, g, r):
    """(dtheta/dt, dz/dt) of the Reeb field of f dz + g dtheta at radius r.

    ``f`` and ``g`` are evaluators ``fn(r, order)``; alternatively pass a
    :class:`FormCoefficients` as ``f`` and None as ``g``.  Vectorized over r.
    """
    r_arr = np.asarray(r, dtype=float)
    if isinstance(f, FormCoefficients):
        coeffs = f
        F, G = coeffs.jet(r_arr)
        f0, f1, g0, g1 = F[0], F[1], G[0], G[1]
        f, g = coeffs.f, coeffs.g
    else:
        f0, f1, g0, g1 = (np.asarray(f(r_arr, 0), dtype=float), np.asarray(f(r_arr, 1), dtype=float),
                          np.asarray(g(r_arr, 0), dtype=float), np.asarray(g(r_arr, 1), dtype=float))
    W = f0 * g1 - g0 * f1
    scale = np.abs(f0 * g1) + np.abs(g0 * f1)
    core = r_arr == 0.0
    bad = ~core & ((W == 0.0) | (np.abs(W) <= 1e-15 * scale) | ~np.isfinite(W))
    if np.any(bad):
        raise NotContactError(f"degenerate Wronskian f g' - g f' at r = {r_arr[bad].ravel()[:3]}")
    with np.errstate(divide="ignore", invalid="ignore"):
        rz = g1 / W
        rt = -f1 / W
    if np.any(core):
        fc, f2, g2 = f(0.0, 0), f(0.0, 2), g(0.0, 2)
        if fc == 0.0 or g2 == 0.0:
            raise NotContactError("core limit undefined: f(0) or g''(0) vanishes")
        rz = np.where(core, 1.0 / fc, rz)
        rt = np.where(core, -f2 / (fc * g2), rt)
    if rz.ndim == 0:
        return float(rt), float(rz)
    return rt, rz


def reeb_residuals(f: Callable, g: Callable, r) -> dict:
    """|alpha(R) - 1| and |d alpha(R, X)| for X in (d/dr, d/dtheta, d/dz).

    d alpha = f' dr^dz + g' dr^dtheta.
    """
    rt, rz = reeb_generic(f, g, r)
    if isinstance(f, FormCoefficients):
        f, g = f.f, f.g
    f0, f1, g0, g1 = f(r, 0), f(r, 1), g(r, 0), g(r, 1)
    R = (0.0, rt, rz)   # (r, theta, z) components

    def dalpha(X, Y):
        return f1 * (X[0] * Y[2] - X[2] * Y[0]) + g1 * (X[0] * Y[1] - X[1] * Y[0])
    return {
        "alpha(R)-1": float(np.max(np.abs(f0 * rz + g0 * rt - 1.0))),
        "dalpha(R,dr)": float(np.max(np.abs(dalpha(R, (1.0, 0.0, 0.0))))),
        "dalpha(R,dtheta)": float(np.max(np.abs(dalpha(R, (0.0, 1.0, 0.0))))),
        "dalpha(R,dz)": float(np.max(np.abs(dalpha(R, (0.0, 0.0, 1.0))))),
    }


@dataclass(frozen=True)
class ReebField:
    chart: int
    coefficients: FormCoefficients
    # constant velocity (dtheta/dt, dz/dt) when known in closed form
    analytic: Optional[tuple] = None

    def velocity(self, r):
        if self.analytic is not None:
            return self.analytic
        return reeb_generic(self.coefficients.f, self.coefficients.g, r)


def reeb_field(form: ContactForm, chart: int) -> ReebField:
    """For a triple form R = (2pi/tau_i)(d/dz + phi_i d/dtheta) in chart i."""
    tau, phi = form.chart_period(chart), form.chart_phi(chart)
    return ReebField(chart, form.coefficients(chart), (TWO_PI * phi / tau, TWO_PI / tau))


def flow(form: ContactForm, pt: ChartPoint, t) -> ChartPoint:
    """Exact Reeb flow of a triple form; broadcasts over array t."""
    wt, wz = reeb_field(form, pt.chart).analytic
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    theta = pt.theta + wt * t
    if isinstance(t, np.ndarray):
        r = np.broadcast_to(np.asarray(pt.r, dtype=float), t.shape)
        return ChartPoint(pt.chart, r, np.asarray(theta), np.asarray(pt.z + wz * t))
    return ChartPoint(pt.chart, pt.r, theta, pt.z + wz * t)


def rk4(field: Callable, y0: np.ndarray, t: float, dt: float, max_steps: int = 10 ** 7,
        wrap: Optional[Callable] = None) -> np.ndarray:
    """Fixed-step classical Runge-Kutta for an autonomous field; the step is
    shrunk so that an integer number of steps lands on t (negative t runs
    backwards)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = int(math.ceil(abs(t) / dt - 1e-9))
    if n > max_steps:
        raise NumericError(f"{n} steps exceed the budget of {max_steps}")
    y = np.array(y0, dtype=float)
    if n == 0:
        return y
    h = t / n
    for _ in range(n):
        k1 = field(y)
        k2 = field(y + 0.5 * h * k1)
        k3 = field(y + 0.5 * h * k2)
        k4 = field(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if wrap is not None:
            y = wrap(y)
    return y


def flow_ode(f, g, pt: ChartPoint, t: float, dt: float, max_steps: int = 10 ** 7) -> ChartPoint:
    """RK4 integration of the Reeb field of f dz + g dtheta from a scalar
    point.  State (theta, z); r is carried unchanged.

    The field depends on r only, so its value is memoized per radius.
    """
    cache = {}

    def velocity(r):
        if r not in cache:
            cache[r] = np.array(reeb_generic(f, g, r))
        return cache[r]
    r = float(pt.r)
    y = rk4(lambda y: velocity(r), np.array([pt.theta, pt.z]), t, dt, max_steps,
            wrap=lambda y: np.mod(y, TWO_PI))
    return ChartPoint(pt.chart, r, y[0], y[1])


def _core_data(f, g):
    """Angular velocity of the linearized field and the period at the core."""
    rt, rz = reeb_generic(f, g, 0.0)
    return rt, TWO_PI / rz


def _rotation_of(M: np.ndarray) -> float:
    orth = float(np.max(np.abs(M.T @ M - np.eye(2))))
    if orth > 1e-8 or np.linalg.det(M) <= 0:
        raise ModelViolationError(f"return map is not a rotation (|M^T M - I| = {orth:.3g})")
    return (math.atan2(M[1, 0], M[0, 0]) / TWO_PI) % 1.0


def monodromy_matrix(f, g=None, n_steps: int = MONODROMY_STEPS) -> np.ndarray:
    """Linearized return map on the (x, y) plane transverse to the core.

    In Cartesian coordinates x = r cos(theta), y = r sin(theta) the field is
    (-y Rt(r), x Rt(r), Rz(r)); its Jacobian at the core acting on (x, y) is
    the constant matrix [[0, -Rt(0)], [Rt(0), 0]].  The variational equation
    is integrated with RK4 over one period; for a constant Jacobian every
    step is the same matrix.
    """
    omega, period = _core_data(f, g)
    J = np.array([[0.0, -omega], [omega, 0.0]])
    hJ = J * (period / n_steps)
    step = np.eye(2)
    term = np.eye(2)
    for k in range(1, 5):
        term = term @ hJ / k
        step = step + term
    return np.linalg.matrix_power(step, n_steps)


def monodromy_rotation(form_or_coeffs, chart: int = 0, n_steps: int = MONODROMY_STEPS) -> float:
    """Rotation number (mod 1) of the core of ``chart``."""
    coeffs = form_or_coeffs.coefficients(chart) if hasattr(form_or_coeffs, "coefficients") else form_or_coeffs
    return _rotation_of(monodromy_matrix(coeffs, n_steps=n_steps))


def _cartesian_field(f, g):
    def field(Y):
        x, y = Y[0], Y[1]
        r = np.hypot(x, y)
        rt, rz = reeb_generic(f, g, r)
        return np.stack([-y * rt, x * rt, np.broadcast_to(rz, np.shape(x))])
    return field


def monodromy_rotation_fd(form_or_coeffs, chart: int = 0, delta: float = 1e-3,
                          n_steps: int = 1000) -> float:
    """Independent check: Jacobian of the nonlinear first-return map at the
    core, by central differences of RK4 flows of the Cartesian field with one
    Richardson step."""
    coeffs = form_or_coeffs.coefficients(chart) if hasattr(form_or_coeffs, "coefficients") else form_or_coeffs
    _, period = _core_data(coeffs, None)
    field = _cartesian_field(coeffs, None)
    ds = (delta, delta / 2)
    starts = np.zeros((3, 8))
    for i, d in enumerate(ds):
        starts[0, 4 * i: 4 * i + 2] = (d, -d)
        starts[1, 4 * i + 2: 4 * i + 4] = (d, -d)
    end = rk4(field, starts, period, period / n_steps)

    def jac(i):
        e, d = end[:2, 4 * i: 4 * i + 4], ds[i]
        return np.column_stack([(e[:, 0] - e[:, 1]) / (2 * d), (e[:, 2] - e[:, 3]) / (2 * d)])
    M = (4.0 * jac(1) - jac(0)) / 3.0
    return _rotation_of(M)


def _convergents(x: Fraction):
    """Continued-fraction convergents of an exact rational."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield h1, k1
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def rational_detect(x: float, Dmax: int = DMAX, tol: float = TOL,
                    margin: Optional[float] = MARGIN):
    """Reduced (n, d) with d <= Dmax and |x - n/d| < tol, or None.

    Walks the convergents of the exact binary value of x.  With ``margin``
    set, a candidate must also satisfy d^2 |x - n/d| < margin: a genuine
    rational computed in floating point misses n/d by rounding error only,
    while a convergent of an irrational misses by about 1/(a d^2) with a the
    next partial quotient.  ``margin=None`` applies the bare tolerance test.
    """
    if Dmax < 1:
        raise ValueError("Dmax must be >= 1")
    X = Fraction(x)
    for n, d in _convergents(X):
        if d > Dmax:
            return None
        err = abs(X - Fraction(n, d))
        if err < tol and (margin is None or d * d * err < margin):
            return n, d
    return None


def convergent_certificate(x: float, Dmax: int = DMAX, keep: int = 4) -> list:
    """Last few convergents with d <= Dmax and their errors (for reports)."""
    out = []
    X = Fraction(x)
    for n, d in _convergents(X):
        if d > Dmax:
            break
        out.append({"n": n, "d": d, "error": float(abs(X - Fraction(n, d)))})
    return out[-keep:]


def first_return_time(form: ContactForm, pt: ChartPoint, t_max: float, dt: float = 1e-3,
                      tol: float = 1e-9, exclusion: Optional[float] = None) -> Optional[float]:
    """Smallest t in (exclusion, t_max] with flow(pt, t) back at pt, found by
    scanning sampled distances and polishing local minima; None if the orbit
    does not close up to ``tol``."""
    if exclusion is None:
        exclusion = 0.5 * form.chart_period(pt.chart)
    wt, wz = reeb_field(form, pt.chart).analytic
    speed = abs(wt) + abs(wz)

    def dist(t):
        q = flow(form, pt, t)
        return circle_distance(q.theta, pt.theta) + circle_distance(q.z, pt.z)
    ts = np.arange(exclusion, t_max + dt, dt)
    d = dist(ts)
    idx = np.nonzero((d[1:-1] <= d[:-2]) & (d[1:-1] <= d[2:]) & (d[1:-1] < 2 * speed * dt))[0] + 1
    for i in idx:
        res = minimize_scalar(dist, bounds=(ts[i - 1], ts[i + 1]), method="bounded",
                              options={"xatol": 1e-14})
        if res.fun < tol:
            return float(res.x)
    return None


def recurrence_gap(form: ContactForm, pt: ChartPoint, horizon: float, dt: float = 1e-3,
                   exclusion: Optional[float] = None) -> float:
    """min over sample times t in (exclusion, horizon] of the distance
    between flow(pt, t) and pt."""
    if not 0.0 < float(pt.r) < 1.0:
        raise ValueError("recurrence is measured off the cores (0 < r < 1)")
    if exclusion is None:
        exclusion = 0.5 * form.chart_period(pt.chart)
    best = math.inf
    start = exclusion
    chunk = 10 ** 6 * dt
    while start < horizon:
        stop = min(horizon, start + chunk)
        ts = np.arange(start, stop, dt) if stop < horizon else np.append(np.arange(start, stop, dt), horizon)
        q = flow(form, pt, ts)
        d = circle_distance(q.theta, pt.theta) + circle_distance(q.z, pt.z)
        best = min(best, float(np.min(d)))
        start = stop
    return best


@dataclass
class OrbitClassification:
    periodic: bool
    minimal_period: Optional[float]
    rotation_number: Optional[float]
    is_core: bool
    radius: float
    chart: int
    certificate: dict = field(default_factory=dict)


@dataclass
class RegularityVerdict:
    kind: str
    evidence: dict
    orbits: list
    generic_period: Optional[float] = None
    orders: Optional[tuple] = None

    @property
    def periodic_count(self) -> Optional[int]:
        """Number of periodic orbits, or None when all orbits are periodic."""
        if self.kind == "quasi-regular":
            return None
        return sum(1 for o in self.orbits if o.periodic)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["orders"] = list(self.orders) if self.orders else None
        return d

    def summary(self) -> str:
        if self.kind == "irregular":
            return (f"irregular; {self.periodic_count} periodic orbits; "
                    f"certificate Dmax={self.evidence['Dmax']:.0e}")
        n, d = self.evidence["n"], self.evidence["d"]
        return (f"quasi-regular; phi0 = {n}/{d}; generic period {self.generic_period!r}; "
                f"orders {self.orders}")


def classify(form, Dmax: int = DMAX, tol: Optional[float] = None,
             margin: Optional[float] = MARGIN, probe_radius: float = 0.5,
             horizon_periods: float = 100.0) -> RegularityVerdict:
    """Quasi-regular iff phi0 is rational at (Dmax, tol).

    ``form`` provides ``core_periods()``, ``rotation_numbers()`` and
    ``rotation_tolerance`` (triple forms and deformed forms both do).
    """
    tol = form.rotation_tolerance if tol is None else tol
    tau0, tau1 = form.core_periods()
    phi0, phi1 = form.rotation_numbers()
    cores = [OrbitClassification(True, tau0, phi0 % 1.0, True, 0.0, 0),
             OrbitClassification(True, tau1, phi1 % 1.0, True, 0.0, 1)]
    hit = rational_detect(phi0, Dmax, tol, margin)
    if hit is None:
        evidence = {"phi0": phi0, "Dmax": Dmax, "tol": tol, "margin": margin,
                    "convergents": convergent_certificate(phi0, Dmax)}
        cert = {}
        if isinstance(form, ContactForm):
            pt = ChartPoint(0, probe_radius, 0.0, 0.0)
            horizon = horizon_periods * tau0
            cert = {"horizon": horizon, "dt": 1e-3 * tau0,
                    "gap": recurrence_gap(form, pt, horizon, 1e-3 * tau0)}
        generic = OrbitClassification(False, None, None, False, probe_radius, 0, cert)
        return RegularityVerdict("irregular", evidence, cores + [generic])
    n, d = hit
    hit1 = rational_detect(phi1, Dmax, tol, margin)
    if hit1 is None:
        raise ModelViolationError(f"phi0 = {n}/{d} is rational but phi1 = {phi1!r} is not")
    a0, a1 = d, hit1[1]
    tau = a0 * tau0
    if abs(a1 * tau1 - tau) > 1e-9 * tau:
        raise ModelViolationError(f"a0 tau0 = {tau!r} but a1 tau1 = {a1 * tau1!r}")
    generic = OrbitClassification(True, tau, None, False, probe_radius, 0)
    evidence = {"n": n, "d": d, "phi0": phi0, "Dmax": Dmax, "tol": tol, "margin": margin}
    return RegularityVerdict("quasi-regular", evidence, cores + [generic], tau, (a0, a1))


def orbit_samples(form: ContactForm, pt: ChartPoint, t_max: float, dt: float) -> list:
    """Rows (t, chart, r, theta, z) along the exact flow."""
    ts = np.arange(0.0, t_max + 0.5 * dt, dt)
    q = flow(form, pt, ts)
    r = np.broadcast_to(q.r, ts.shape)
    return [(float(t), pt.chart, float(rr), float(th), float(z))
            for t, rr, th, z in zip(ts, r, q.theta, q.z)]


def samples_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "chart", "r", "theta", "z"])
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def verdict_json(verdict: RegularityVerdict) -> str:
    return json.dumps(verdict.to_dict(), indent=2, default=float)
