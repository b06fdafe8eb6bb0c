"""Radial profile functions a: [0, 1] -> R.

A profile is stored as a polynomial P without constant term composed with
u(r) = (1 - cos(pi r)) / 2, so a(r) = P(u(r)).  Since u is even about both
r = 0 and r = 1, every odd derivative of a vanishes at both ends by
construction; the only smoothness conditions left to check are the boundary
values a(0) = 0 and a(1) = a_end.

Metric gauge used by :func:`default_profile`: a''(0) = 1 and
a''(1) = -tau1/tau0.  With it the chart-1 profile also has unit second
derivative at its core, which is what makes dr^2 + a'(r)^2 dpsi^2 smooth at
both core circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (InvalidRotationError, ProfileConstructionError,
                     UnsupportedOrderError)
from .lens_atlas import TWO_PI, LensParams

PI = math.pi
MAX_ORDER = 4


@dataclass(frozen=True)
class BoundaryData:
    lens: LensParams
    tau0: float
    phi0: float

    def __post_init__(self):
        if not self.tau0 > 0:
            raise ValueError(f"tau0 must be positive, got {self.tau0}")
        if not self.rotation_factor > 0:
            raise InvalidRotationError(
                f"p*phi0 + q must be positive, got {self.rotation_factor!r}")

    @property
    def rotation_factor(self) -> float:
        """q + p*phi0 (= tau0/tau1)."""
        return self.lens.q + self.lens.p * self.phi0

    @property
    def tau1(self) -> float:
        return self.tau0 / self.rotation_factor

    @property
    def a_end(self) -> float:
        return self.lens.p * self.tau0 / (TWO_PI * self.rotation_factor)

    @property
    def app0(self) -> float:
        return 1.0

    @property
    def app1(self) -> float:
        return -self.tau1 / self.tau0


def u_jet(r):
    """u(r) = (1 - cos(pi r))/2 and its first four derivatives, stacked."""
    r = np.asarray(r, dtype=float)
    c = np.cos(PI * r)
    s = np.sin(PI * r)
    # sin^2 form avoids the cancellation in 1 - cos near r = 0
    return np.stack([np.sin(PI * r / 2.0) ** 2,
                     PI / 2.0 * s,
                     PI ** 2 / 2.0 * c,
                     -PI ** 3 / 2.0 * s,
                     -PI ** 4 / 2.0 * c])


def compose_jet(pd, uj):
    """Chain rule to order 4: derivatives of P(u(r)) from P^(k)(u) and u^(k)."""
    P0, P1, P2, P3, P4 = pd
    u, u1, u2, u3, u4 = uj
    return np.stack([
        P0,
        P1 * u1,
        P2 * u1 ** 2 + P1 * u2,
        P3 * u1 ** 3 + 3.0 * P2 * u1 * u2 + P1 * u3,
        P4 * u1 ** 4 + 6.0 * P3 * u1 ** 2 * u2 + P2 * (3.0 * u2 ** 2 + 4.0 * u1 * u3) + P1 * u4,
    ])


def _u_taylor(center: int, n: int) -> np.ndarray:
    """Taylor coefficients of h -> u(center + h) up to degree n."""
    c = np.zeros(n + 1)
    for k in range(1, n // 2 + 1):
        c[2 * k] = (-1) ** (k + 1) * PI ** (2 * k) / (2.0 * math.factorial(2 * k))
    if center == 1:
        c = -c
        c[0] = 1.0
    return c


@dataclass(frozen=True)
class ProfileSpec:
    """a(r) = sum_j coeffs[j-1] * u(r)**j.

    ``boundary`` carries the triple data the profile was built for; it may be
    None for free-standing profiles used in tests.
    """

    coeffs: tuple
    boundary: Optional[BoundaryData] = None
    _poly: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) == 0:
            raise ValueError("a profile needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_poly", np.concatenate([[0.0], coeffs]))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def poly_derivs(self, u):
        """P, P', ..., P'''' at u."""
        out = []
        c = self._poly
        for _ in range(MAX_ORDER + 1):
            out.append(npoly.polyval(u, c) if len(c) else np.zeros_like(np.asarray(u, dtype=float)))
            c = npoly.polyder(c) if len(c) > 1 else np.zeros(1)
        return np.stack([np.asarray(v, dtype=float) for v in out])

    def jet(self, r):
        """Array of a, a', ..., a'''' at r (shape (5,) + shape(r))."""
        uj = u_jet(r)
        return compose_jet(self.poly_derivs(uj[0]), uj)

    def __call__(self, r, order: int = 0):
        return eval_profile(self, r, order)

    def taylor(self, center: int, n: int = 12) -> np.ndarray:
        """Taylor coefficients of h -> a(center + h), center in {0, 1}."""
        U = _u_taylor(center, n)
        out = np.zeros(n + 1)
        power = np.zeros(n + 1)
        power[0] = 1.0
        for c in self.coeffs:
            power = npoly.polymul(power, U)[: n + 1]
            out[: len(power)] += c * power
        return out

    def dP(self, u):
        return npoly.polyval(u, npoly.polyder(self._poly))

    def to_dict(self) -> dict:
        return {"type": "poly-in-u", "coeffs": list(self.coeffs)}


def eval_profile(profile, r, order: int = 0):
    """d^k a / dr^k at r for k = order <= 4, by the chain rule through u."""
    if not 0 <= order <= MAX_ORDER:
        raise UnsupportedOrderError(f"analytic derivatives go up to order {MAX_ORDER}, got {order}")
    v = profile.jet(r)[order]
    return float(v) if np.ndim(v) == 0 else v


def fd_weights(offsets: Sequence[float], order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at 0 on the
    given (unit-spaced) offsets."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    A = np.vander(x, n, increasing=True).T
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


def high_derivative(profile: ProfileSpec, r: float, order: int, h: float = 1e-4) -> float:
    """Derivatives of order > 4.

    At r = 0 and r = 1 these come from the exact Taylor expansion.  Inside,
    central differences of the analytic fourth derivative with one
    Richardson step; ``h`` is the step for order 5 and grows 30-fold per
    extra order (capped at 1e-2) to keep roundoff below truncation error.
    Uses the analytic extension of a(r) = P(u(r)) beyond [0, 1].
    """
    if order <= MAX_ORDER:
        return eval_profile(profile, r, order)
    if r in (0.0, 1.0) and hasattr(profile, "taylor"):
        return float(profile.taylor(int(r), order)[order] * math.factorial(order))
    k = order - MAX_ORDER
    step0 = min(h * 30.0 ** (k - 1), max(h, 1e-2))
    npts = k + 1 + (k + 1) % 2 + 2
    half = npts // 2
    offs = np.arange(-half, half + 1, dtype=float)
    w = fd_weights(offs, k)

    def est(step):
        vals = profile.jet(r + offs * step)[MAX_ORDER]
        return float(w @ vals) / step ** k

    coarse, fine = est(step0), est(step0 / 2.0)
    acc = len(offs) - k  # formal accuracy order of a centered stencil (even)
    return (2 ** acc * fine - coarse) / (2 ** acc - 1)


def _quadratic_profile(c0, c1, A):
    """The unique cubic P with P'(0) = c0, P'(1) = c1, P(1) = A."""
    gamma = c0 + c1 - 2.0 * A
    beta = 3.0 * A - 2.0 * c0 - c1
    return (c0, beta, gamma)


def _flat_end_profile(c0, c1, A, degree):
    """P of odd degree >= 5 with P'(0) = c0, P'(1) = c1, P''(0) = P''(1) = 0
    and P(1) = A, written as P' = c0*B(u) + c1*B(1-u) + lam*u^2 (1-u)^2 with
    B(u) = (1-u)^k (1 + k u) >= 0.  Returns None unless lam > 0, which makes
    P' strictly positive."""
    k = degree - 2
    B0 = npoly.polymul(npoly.polypow([1.0, -1.0], k), [1.0, float(k)])
    B1 = npoly.polymul(npoly.polypow([0.0, 1.0], k), [1.0 + k, -float(k)])
    bump = npoly.polypow([0.0, 1.0, -1.0], 2)
    lam = 30.0 * (A - 2.0 * (c0 + c1) / (k + 2))
    if not lam > 0:
        return None
    dP = npoly.polyadd(npoly.polyadd(c0 * B0, c1 * B1), lam * bump)
    P = npoly.polyint(dP)
    return tuple(float(c) for c in P[1: degree + 1])


def min_dP(coeffs) -> tuple:
    """(min, max) of P' over u in [0, 1], exact up to root finding."""
    c = np.concatenate([[0.0], coeffs])
    d1 = npoly.polyder(c)
    cand = [0.0, 1.0]
    if len(d1) > 1:
        d2 = npoly.polyder(d1)
        if np.any(d2 != 0):
            for root in npoly.polyroots(d2):
                if abs(root.imag) < 1e-12 and 0.0 < root.real < 1.0:
                    cand.append(root.real)
    vals = npoly.polyval(np.array(cand), d1)
    return float(np.min(vals)), float(np.max(vals))


MONOTONE_MARGIN = 1e-3


def default_profile(lens: LensParams, tau0: float, tau1: float,
                    max_degree: int = 9, margin: float = MONOTONE_MARGIN) -> ProfileSpec:
    """Canonical profile for prescribed core periods.

    Tries the cubic fixed by P(1) = a_end and the metric gauge
    P'(0) = 2/pi^2, P'(1) = 2 tau1/(pi^2 tau0); if its derivative is not
    safely positive, switches to flat-ended profiles of degree 5, 7, 9.
    """
    if not (tau0 > 0 and tau1 > 0):
        raise ValueError("periods must be positive")
    phi0 = (tau0 / tau1 - lens.q) / lens.p
    bd = BoundaryData(lens, tau0, phi0)
    A = bd.a_end
    c0 = 2.0 / PI ** 2 * bd.app0
    c1 = -2.0 / PI ** 2 * bd.app1
    coeffs = _quadratic_profile(c0, c1, A)
    lo, hi = min_dP(coeffs)
    if lo > margin * hi:
        return ProfileSpec(coeffs, bd)
    for degree in range(5, max_degree + 1, 2):
        coeffs = _flat_end_profile(c0, c1, A, degree)
        if coeffs is not None:
            lo, hi = min_dP(coeffs)
            if lo > margin * hi:
                return ProfileSpec(coeffs, bd)
    raise ProfileConstructionError(
        f"no monotone profile up to degree {max_degree} for tau0={tau0}, tau1={tau1} on L({lens.p},{lens.q})")


def flat_end_profile(lens: LensParams, tau0: float, tau1: float, degree: int) -> ProfileSpec:
    """Flat-ended profile of the given odd degree (>= 5) for the same data
    as :func:`default_profile`; an alternative profile for the same triple."""
    if degree < 5 or degree % 2 == 0:
        raise ValueError("degree must be odd and >= 5")
    phi0 = (tau0 / tau1 - lens.q) / lens.p
    bd = BoundaryData(lens, tau0, phi0)
    coeffs = _flat_end_profile(2.0 / PI ** 2, 2.0 / PI ** 2 * tau1 / tau0, bd.a_end, degree)
    if coeffs is None:
        raise ProfileConstructionError(f"degree {degree} cannot be made monotone for these periods")
    return ProfileSpec(coeffs, bd)


def bumped_profile(profile: ProfileSpec, delta: float, power: int = 0) -> ProfileSpec:
    """Add delta * u^(2+power) (1-u)^2 to P.

    The added term leaves P(1), P'(0) and P'(1) unchanged, so the result
    shares boundary data and metric gauge with ``profile``.
    """
    extra = npoly.polymul(npoly.polypow([0.0, 1.0], 2 + power), npoly.polypow([1.0, -1.0], 2))
    c = npoly.polyadd(np.concatenate([[0.0], profile.coeffs]), delta * extra)
    return ProfileSpec(tuple(float(x) for x in c[1:]), profile.boundary)


@dataclass
class ValidationReport:
    passed: bool
    checks: dict = field(default_factory=dict)
    gauge: dict = field(default_factory=dict)

    def failures(self) -> list:
        return [name for name, c in self.checks.items() if not c["passed"]]


def _check(value, tol):
    return {"value": float(value), "tol": tol, "passed": bool(abs(value) < tol)}


def one_sided_derivative(fn: Callable, x0: float, order: int, h: float, direction: int,
                         npts: int = 9) -> float:
    """One-sided finite difference of a plain callable at a domain endpoint."""
    offs = np.arange(npts, dtype=float)
    w = fd_weights(offs, order)
    vals = np.array([fn(x0 + direction * j * h) for j in range(npts)], dtype=float)
    return float(w @ vals) / (direction * h) ** order


def central_derivative(fn: Callable, x0: float, order: int, h: float, npts: int = 7) -> float:
    """Centered finite difference; needs fn defined on both sides of x0."""
    half = npts // 2
    offs = np.arange(-half, half + 1, dtype=float)
    w = fd_weights(offs, order)
    vals = np.array([fn(x0 + j * h) for j in offs], dtype=float)
    return float(w @ vals) / h ** order


def _fd_estimator(fn: Callable, h: float):
    """Central differences if fn extends past [0, 1], else one-sided ones.

    One-sided stencils lose about eps * |a| / h^3 to roundoff at r = 1,
    which is far above 1e-8 for any usable h; profiles written in
    u = (1 - cos pi r)/2 extend smoothly, so they get the centered form.
    """
    try:
        probe = [fn(-3 * h), fn(1 + 3 * h)]
        extends = all(math.isfinite(float(v)) for v in probe)
    except (ValueError, ArithmeticError):
        extends = False
    if extends:
        return lambda x0, k, direction: central_derivative(fn, x0, k, h)
    return lambda x0, k, direction: one_sided_derivative(fn, x0, k, h, direction)


def validate_smoothness(profile, K: int = 3, h: float = 1e-2,
                        a_end: Optional[float] = None) -> ValidationReport:
    """Boundary values and odd derivatives at r = 0 and r = 1.

    ``profile`` is a :class:`ProfileSpec` (analytic derivatives up to order
    4, tolerance 1e-12; higher odd orders via :func:`high_derivative`,
    tolerance 1e-8) or a plain callable a(r) together with ``a_end``
    (finite differences with step ``h``, tolerance 1e-8; centered when the
    callable extends past [0, 1]).
    K is the highest derivative order examined.
    """
    analytic = isinstance(profile, ProfileSpec)
    if a_end is None:
        if not analytic or profile.boundary is None:
            raise ValueError("a_end is required when the profile carries no boundary data")
        a_end = profile.boundary.a_end
    checks = {}
    scale = max(1.0, abs(a_end))
    if analytic:
        checks["a(0)"] = _check(profile(0.0), 1e-12)
        checks["a(1)-a_end"] = _check(profile(1.0) - a_end, 1e-12 * scale)
        for k in range(1, K + 1, 2):
            for end in (0.0, 1.0):
                if k <= MAX_ORDER:
                    checks[f"a^({k})({end:g})"] = _check(profile(end, k), 1e-12 * scale)
                else:
                    checks[f"a^({k})({end:g})"] = _check(high_derivative(profile, end, k), 1e-8 * scale)
        gauge = {
            "a''(0)": float(profile(0.0, 2)),
        }
        if profile.boundary is not None:
            gauge["a''(0)-1"] = gauge["a''(0)"] - profile.boundary.app0
            gauge["a''(1)-target"] = float(profile(1.0, 2)) - profile.boundary.app1
            gauge["passed"] = bool(abs(gauge["a''(0)-1"]) < 1e-10 and abs(gauge["a''(1)-target"]) < 1e-10)
    else:
        fn = profile
        deriv = _fd_estimator(fn, h)
        checks["a(0)"] = _check(fn(0.0), 1e-12)
        checks["a(1)-a_end"] = _check(fn(1.0) - a_end, 1e-12 * scale)
        for k in range(1, K + 1, 2):
            checks[f"a^({k})(0)"] = _check(deriv(0.0, k, +1), 1e-8 * scale)
            checks[f"a^({k})(1)"] = _check(deriv(1.0, k, -1), 1e-8 * scale)
        gauge = {"a''(0)": deriv(0.0, 2, +1)}
        gauge["a''(0)-1"] = gauge["a''(0)"] - 1.0
        gauge["passed"] = bool(abs(gauge["a''(0)-1"]) < 1e-6)
    passed = all(c["passed"] for c in checks.values())
    return ValidationReport(passed, checks, gauge)


def chebyshev_nodes(n: int) -> np.ndarray:
    """n Chebyshev points of the first kind mapped to (0, 1)."""
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos((2 * k + 1) * PI / (2 * n)))


def validate_monotone(profile: ProfileSpec, N: int = 200, margin: float = MONOTONE_MARGIN) -> bool:
    """a' > 0 at N Chebyshev samples, with a safety margin.

    a'(r) vanishes like sin(pi r) at both ends, so the margin is applied to
    a'(r)/sin(pi r) (i.e. to P'(u) up to a constant): its minimum must
    exceed ``margin`` times its maximum.
    """
    if N < 100:
        raise ValueError("need at least 100 samples")
    r = chebyshev_nodes(N)
    d = profile(r, 1)
    if not np.all(d > 0):
        return False
    scaled = d / np.sin(PI * r)
    return bool(scaled.min() > margin * scaled.max())


class ChartOneProfile:
    """g1(r) = p tau0/(2 pi) - (q + p phi0) a(1 - r), the profile seen from
    chart 1."""

    def __init__(self, profile: ProfileSpec):
        if profile.boundary is None:
            raise ValueError("the chart-1 profile needs boundary data")
        self.base = profile
        bd = profile.boundary
        self.const = bd.lens.p * bd.tau0 / TWO_PI
        self.factor = bd.rotation_factor
        self._signs = np.array([1.0, -1.0, 1.0, -1.0, 1.0])

    def jet(self, r):
        r = np.asarray(r, dtype=float)
        base = self.base.jet(1.0 - r)
        signs = self._signs.reshape((-1,) + (1,) * r.ndim)
        out = -self.factor * signs * base
        out[0] = out[0] + self.const
        return out

    def __call__(self, r, order: int = 0):
        return eval_profile(self, r, order)

    def taylor(self, center: int, n: int = 12) -> np.ndarray:
        """Taylor coefficients of h -> g1(center + h)."""
        base = self.base.taylor(1 - center, n)
        t = -self.factor * base * (-1.0) ** np.arange(n + 1)
        t[0] += self.const
        return t


def induced_a1(profile: ProfileSpec) -> ChartOneProfile:
    return ChartOneProfile(profile)
