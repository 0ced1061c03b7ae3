"""Poincare disk primitives: points, distances, Mobius maps, polar charts.

Conventions. The disk carries the metric (2 / (1 - |z|^2))^2 |dz|^2, which
has constant Gaussian curvature -1.  Distances are d(a, b) =
2 artanh |(a - b) / (1 - conj(a) b)|, a ball of hyperbolic radius R has
area 2 pi (cosh R - 1), and the Laplacian in geodesic polar coordinates
(r, theta) about any point is

    d^2/dr^2 + (cosh r / sinh r) d/dr + (1 / sinh^2 r) d^2/dtheta^2.

All operations here are pure; values are immutable and freely shareable.
"""

import cmath
import math
from dataclasses import dataclass

from .errors import ConstructionError, DomainError, PrecisionError, RangeError

# Disk points this close to |z| = 1 are treated as numerically on the
# boundary by mobius_apply.
BOUNDARY_GUARD = 1e-14


@dataclass(frozen=True)
class DiskPoint:
    """A point strictly inside the unit disk."""

    x: float
    y: float

    def __post_init__(self):
        if not (self.x * self.x + self.y * self.y < 1.0):
            raise DomainError(
                f"point ({self.x}, {self.y}) is not strictly inside the unit disk"
            )

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(z.real, z.imag)


def _as_complex(p) -> complex:
    if isinstance(p, DiskPoint):
        return p.z
    z = complex(p)
    if not abs(z) < 1.0:
        raise DomainError(f"point {z} is not strictly inside the unit disk")
    return z


def disk_distance(p, q) -> float:
    """Hyperbolic distance between two disk points (curvature -1)."""
    a = _as_complex(p)
    b = _as_complex(q)
    t = abs(a - b) / abs(1.0 - a.conjugate() * b)
    return 2.0 * math.atanh(t)


def poincare_factor(p) -> float:
    """Conformal factor 2 / (1 - |z|^2) of the disk metric at p."""
    z = _as_complex(p)
    return 2.0 / (1.0 - (z.real * z.real + z.imag * z.imag))


def ball_area_hyp(R: float) -> float:
    """Area 2 pi (cosh R - 1) of a hyperbolic ball of radius R.

    Evaluated as 4 pi sinh^2(R/2), which is exact for tiny R where
    cosh R rounds to 1.
    """
    if R < 0:
        raise DomainError(f"ball radius must be nonnegative, got {R}")
    s = math.sinh(0.5 * R)
    return 4.0 * math.pi * s * s


def hyperbolic_midpoint(p, q) -> complex:
    """Midpoint of the geodesic segment between two disk points."""
    a = _as_complex(p)
    b = _as_complex(q)
    # Translate a to the origin, halve the (now straight) segment, pull back.
    w = (b - a) / (1.0 - a.conjugate() * b)
    r = abs(w)
    if r == 0.0:
        return a
    m = w * (math.tanh(0.5 * math.atanh(r)) / r)
    return (m + a) / (1.0 + a.conjugate() * m)


class MobiusTransform:
    """Disk-preserving Mobius map z -> (a z + b) / (c z + d).

    Coefficients are normalized to determinant 1.  After normalization a
    disk isometry satisfies d = conj(a) and c = conj(b) up to sign, which
    the constructor validates; the trace 2 Re(a) is then real.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        det = a * d - b * c
        if det == 0:
            raise ConstructionError("Mobius coefficients have zero determinant")
        s = cmath.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        scale = max(abs(a), abs(b), 1.0)
        if abs(d - a.conjugate()) > 1e-9 * scale or abs(c - b.conjugate()) > 1e-9 * scale:
            raise ConstructionError(
                "coefficients do not define a disk-preserving transform"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    def __setattr__(self, *_):
        raise AttributeError("MobiusTransform is immutable")

    def __repr__(self):
        return f"MobiusTransform({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def rotation(cls, theta: float) -> "MobiusTransform":
        """Rotation by theta about the origin."""
        h = cmath.exp(0.5j * theta)
        return cls(h, 0.0, 0.0, h.conjugate())

    @classmethod
    def x_translation(cls, t: float) -> "MobiusTransform":
        """Hyperbolic translation by length t along the real axis."""
        ch = math.cosh(0.5 * t)
        sh = math.sinh(0.5 * t)
        return cls(ch, sh, sh, ch)

    @classmethod
    def origin_to(cls, p) -> "MobiusTransform":
        """The translation z -> (z + w) / (1 + conj(w) z) taking 0 to p."""
        w = _as_complex(p)
        g = 1.0 / math.sqrt(1.0 - abs(w) ** 2)
        return cls(g, w * g, w.conjugate() * g, g)

    def apply_z(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply(self, p) -> DiskPoint:
        z = self.apply_z(_as_complex(p))
        if abs(z) >= 1.0 - BOUNDARY_GUARD:
            raise PrecisionError(f"image {z} is numerically on the disk boundary")
        return DiskPoint(z.real, z.imag)

    def apply_many(self, z):
        """Vectorized apply on a complex numpy array."""
        return (self.a * z + self.b) / (self.c * z + self.d)

    def compose(self, other: "MobiusTransform") -> "MobiusTransform":
        """self after other: (self.compose(other))(z) = self(other(z))."""
        return MobiusTransform(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusTransform":
        return MobiusTransform(self.d, -self.b, -self.c, self.a)

    def trace(self) -> float:
        return (self.a + self.d).real

    def translation_length(self) -> float:
        """Length 2 arccosh(|tr| / 2) of a hyperbolic element's translation."""
        t = abs(self.trace())
        if t <= 2.0 + 1e-12:
            raise ConstructionError(
                f"transform is not hyperbolic (|trace| = {t} <= 2)"
            )
        return 2.0 * math.acosh(0.5 * t)


def mobius_apply(T: MobiusTransform, p) -> DiskPoint:
    """Apply a disk-preserving transform to a point."""
    return T.apply(p)


@dataclass(frozen=True)
class PolarChart:
    """Geodesic polar coordinates (r, theta) about a center point.

    r is the hyperbolic distance from the center; theta is the direction,
    measured after translating the center to the origin.
    """

    center: DiskPoint
    max_radius: float
    grid: tuple = (1024, 1024)

    def __post_init__(self):
        if not self.max_radius > 0:
            raise DomainError(f"max_radius must be positive, got {self.max_radius}")
        n_r, n_t = self.grid
        if n_r < 8 or n_t < 8:
            raise DomainError(f"grid {self.grid} too coarse, need at least 8x8")

    def _translate(self) -> MobiusTransform:
        return MobiusTransform.origin_to(self.center)

    def to_disk_z(self, r, theta):
        """Disk coordinate(s) of chart point(s); r, theta may be arrays."""
        import numpy as np

        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.max_radius):
            raise RangeError("radius outside chart")
        w = np.tanh(0.5 * r) * np.exp(1j * np.asarray(theta, dtype=float))
        return self._translate().apply_many(w)

    def to_disk(self, r: float, theta: float) -> DiskPoint:
        z = complex(self.to_disk_z(r, theta))
        return DiskPoint(z.real, z.imag)

    def from_disk(self, p) -> tuple:
        """Chart coordinates (r, theta) of a disk point."""
        z = _as_complex(p)
        w = self._translate().inverse().apply_z(z)
        r = 2.0 * math.atanh(abs(w))
        if r > self.max_radius:
            raise RangeError(f"point at radius {r} outside chart ({self.max_radius})")
        return r, cmath.phase(w) if abs(w) > 0 else 0.0


def polar_laplacian(field, chart: PolarChart, r: float, theta: float, h: float = 1e-3) -> float:
    """Central-difference Laplacian of field(r, theta) in a polar chart.

    The stencil is O(h^2).  For r < 10 h the coth r coefficient is stiff,
    so the five-point Euclidean-limit stencil on local Cartesian offsets is
    used instead (the metric is Euclidean to O(r^2) near the center).
    """
    if r < 0 or r > chart.max_radius:
        raise RangeError(f"evaluation radius {r} outside chart")
    if r < 10.0 * h:
        # Local Cartesian coordinates (xi, eta) = (r cos t, r sin t).
        xi = r * math.cos(theta)
        eta = r * math.sin(theta)

        def at(x, y):
            rr = math.hypot(x, y)
            tt = math.atan2(y, x)
            return field(rr, tt)

        c = field(r, theta)
        return (
            at(xi + h, eta) + at(xi - h, eta) + at(xi, eta + h) + at(xi, eta - h) - 4.0 * c
        ) / (h * h)
    if r - h <= 0 or r + h > chart.max_radius:
        raise RangeError("finite-difference stencil leaves the chart")
    f0 = field(r, theta)
    frp = field(r + h, theta)
    frm = field(r - h, theta)
    ftp = field(r, theta + h)
    ftm = field(r, theta - h)
    f_rr = (frp - 2.0 * f0 + frm) / (h * h)
    f_r = (frp - frm) / (2.0 * h)
    f_tt = (ftp - 2.0 * f0 + ftm) / (h * h)
    sh = math.sinh(r)
    return f_rr + (math.cosh(r) / sh) * f_r + f_tt / (sh * sh)
