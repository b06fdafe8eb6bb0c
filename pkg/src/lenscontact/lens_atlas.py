"""Arithmetic and chart structure of the lens space L(p, q).

L(p, q) is covered by two open solid tori (charts 0 and 1) with cylindrical
coordinates (r, theta, z), r in [0, 1), and 2*pi-periodic angles.  On the
overlap 0 < r < 1 the chart-1 coordinates map to chart 0 by

    (r, theta, z) -> (1 - r, -q*theta + m*z, p*theta + s*z),   m*p + s*q = 1.

Points may carry numpy arrays in their r/theta/z fields; all maps here
broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidLensError, NotInOverlapError

TWO_PI = 2.0 * math.pi

Real = Union[float, np.ndarray]


def reduce_angle(x):
    """Reduce to [0, 2*pi).  Idempotent, also for the float edge case where
    ``x % 2pi`` rounds up to exactly 2pi."""
    if isinstance(x, np.ndarray):
        y = np.mod(x, TWO_PI)
        return np.where(y >= TWO_PI, 0.0, y)
    y = math.fmod(float(x), TWO_PI)
    if y < 0.0:
        y += TWO_PI
    if y >= TWO_PI:
        y = 0.0
    return y


def circle_distance(a, b):
    """Distance between angles measured on the circle."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), TWO_PI))
    d = np.minimum(d, TWO_PI - d)
    return float(d) if np.ndim(d) == 0 else d


def mod1_distance(x, y):
    """Distance between two reals viewed in R/Z."""
    d = abs(math.fmod(x - y, 1.0))
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class LensParams:
    p: int
    q: int
    m: int
    s: int

    def __post_init__(self):
        if self.p < 1:
            raise InvalidLensError(f"p must be >= 1, got {self.p}")
        if math.gcd(self.p, self.q) != 1:
            raise InvalidLensError(f"gcd(p, q) must be 1, got gcd({self.p}, {self.q}) = {math.gcd(self.p, self.q)}")
        if self.m * self.p + self.s * self.q != 1:
            raise InvalidLensError(f"m*p + s*q must equal 1, got {self.m * self.p + self.s * self.q}")

    @property
    def angular_block(self) -> np.ndarray:
        """Integer matrix of the chart 1 -> chart 0 map acting on (theta, z)."""
        return np.array([[-self.q, self.m], [self.p, self.s]], dtype=np.int64)

    @property
    def inverse_angular_block(self) -> np.ndarray:
        return np.array([[-self.s, self.m], [self.p, self.q]], dtype=np.int64)

    @property
    def q_squared_is_one(self) -> bool:
        return (self.q * self.q - 1) % self.p == 0

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "m": self.m, "s": self.s}


def make_lens(p: int, q: int) -> LensParams:
    """Validate (p, q) and pick the canonical Bezout pair.

    s is the inverse of q modulo p with 0 <= s < p, and m = (1 - s*q)/p.
    For p = 1 this gives (m, s) = (1, 0).
    """
    p, q = int(p), int(q)
    if p < 1:
        raise InvalidLensError(f"p must be >= 1, got {p}")
    if math.gcd(p, q) != 1:
        raise InvalidLensError(f"p and q must be coprime, got gcd({p}, {q}) = {math.gcd(p, q)}")
    s = 0 if p == 1 else pow(q, -1, p)
    m, rem = divmod(1 - s * q, p)
    assert rem == 0
    return LensParams(p, q, m, s)


@dataclass(frozen=True)
class ChartPoint:
    chart: int
    r: Real
    theta: Real
    z: Real

    def __post_init__(self):
        if self.chart not in (0, 1):
            raise ValueError(f"chart must be 0 or 1, got {self.chart}")
        r = np.asarray(self.r, dtype=float)
        if np.any(r < 0.0) or np.any(r > 1.0) or np.any(np.isnan(r)):
            raise ValueError("r must lie in [0, 1]")
        theta = reduce_angle(self.theta)
        # the angular coordinate is meaningless on the core circle
        if isinstance(theta, np.ndarray) or isinstance(self.r, np.ndarray):
            theta = np.where(r == 0.0, 0.0, theta)
        elif float(self.r) == 0.0:
            theta = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "z", reduce_angle(self.z))

    def distance(self, other: "ChartPoint"):
        """Coordinate distance to a point in the same chart (r plus circle
        distances of both angles)."""
        if other.chart != self.chart:
            raise ValueError("points live in different charts")
        return (np.abs(np.asarray(self.r) - np.asarray(other.r))
                + circle_distance(self.theta, other.theta)
                + circle_distance(self.z, other.z))


def _check_overlap(pt: ChartPoint, chart: int):
    if pt.chart != chart:
        raise ValueError(f"expected a chart-{chart} point, got chart {pt.chart}")
    r = np.asarray(pt.r)
    if np.any(r <= 0.0) or np.any(r >= 1.0):
        raise NotInOverlapError("transition maps are defined only for 0 < r < 1")


def transition(lens: LensParams, pt: ChartPoint) -> ChartPoint:
    """Chart-1 point -> the same manifold point in chart-0 coordinates."""
    _check_overlap(pt, 1)
    return ChartPoint(0, 1.0 - pt.r,
                      -lens.q * pt.theta + lens.m * pt.z,
                      lens.p * pt.theta + lens.s * pt.z)


def transition_inverse(lens: LensParams, pt: ChartPoint) -> ChartPoint:
    """Chart-0 point -> chart-1 coordinates; inverse of :func:`transition`."""
    _check_overlap(pt, 0)
    return ChartPoint(1, 1.0 - pt.r,
                      -lens.s * pt.theta + lens.m * pt.z,
                      lens.p * pt.theta + lens.q * pt.z)


def torus_action(lens: LensParams, angles, pt: ChartPoint) -> ChartPoint:
    """Act by (theta', z') in T^2.

    Chart 0 translates the angles; chart 1 uses the conjugate action
    (theta - s*theta' + m*z', z + p*theta' + q*z').
    """
    dtheta, dz = angles
    if pt.chart == 0:
        return ChartPoint(0, pt.r, pt.theta + dtheta, pt.z + dz)
    return ChartPoint(1, pt.r,
                      pt.theta - lens.s * dtheta + lens.m * dz,
                      pt.z + lens.p * dtheta + lens.q * dz)


def canonicalize(lens: LensParams, pt: ChartPoint) -> ChartPoint:
    """Representation with r <= 1/2; r == 1/2 resolves to chart 0.

    Scalar points only.  A chart point with r == 1 lies on the other core;
    its angle there is undefined and stored as 0.
    """
    r = float(pt.r)
    if pt.chart == 0:
        if r <= 0.5:
            return pt
        if r == 1.0:
            return ChartPoint(1, 0.0, 0.0, lens.p * pt.theta + lens.q * pt.z)
        return transition_inverse(lens, pt)
    if r < 0.5:
        return pt
    if r == 1.0:
        return ChartPoint(0, 0.0, 0.0, lens.p * pt.theta + lens.s * pt.z)
    return transition(lens, pt)
