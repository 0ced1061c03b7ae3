"""Explicit deformation families: collar shrinker, spike stretcher,
double-spike dumbbell, an always-nonpositively-curved radial family, and
a standalone warped-product cylinder profile.

All conformal families are built from one C-infinity plateau bump

    bump(t; a) = q(s1) / (q(s1) + q(s2)),   q(s) = exp(-1/s) for s > 0,

with s1 = (a - |t|)/(a/2) and s2 = (|t| - a/2)/(a/2): identically 1 on
[-a/2, a/2], identically 0 outside (-a, a).  Its first two derivatives
come from the same closed forms, so curvature formulas are analytic.

Each family solves for its normalization constant by bisection on the
exact (zone-quadrature) area functional, then freezes the constant into
the emitted descriptor so reloads skip the solve.
"""

import math

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from . import accel, conformal
from .errors import ConstructionError, DomainError, ParameterError, UsageError
from .surface import HyperbolicSurface

TWO_PI = 2.0 * math.pi

# exp(-1/s) underflows below s ~ 1/745; treat the whole tail as exact 0
_Q_FLOOR = 1.4e-3


def _q_jet(s, slope):
    """Value and first two x-derivatives of q(s(x)) for affine s, s' = slope."""
    s = np.asarray(s, dtype=float)
    v = np.zeros_like(s)
    d1 = np.zeros_like(s)
    d2 = np.zeros_like(s)
    ok = s > _Q_FLOOR
    si = s[ok]
    e = np.exp(-1.0 / si)
    v[ok] = e
    d1[ok] = e / si**2 * slope
    d2[ok] = e * (1.0 / si**4 - 2.0 / si**3) * (slope * slope)
    return v, d1, d2


def bump_jet(x, a):
    """(phi, phi', phi'') of the plateau bump at x >= 0, half-width a."""
    x = np.asarray(x, dtype=float)
    phi = np.zeros_like(x)
    d1 = np.zeros_like(x)
    d2 = np.zeros_like(x)
    inner = x <= 0.5 * a
    phi[inner] = 1.0
    mid = ~inner & (x < a)
    if np.any(mid):
        xm = x[mid]
        half = 0.5 * a
        n, nd, ndd = _q_jet((a - xm) / half, -1.0 / half)
        q2, q2d, q2dd = _q_jet((xm - half) / half, 1.0 / half)
        den = n + q2
        dend = nd + q2d
        dendd = ndd + q2dd
        first = (nd * den - n * dend) / den**2
        phi[mid] = n / den
        d1[mid] = first
        d2[mid] = (ndd * den - n * dendd) / den**2 - 2.0 * dend * first / den
    return phi, d1, d2


def bump(t, a):
    """C-infinity plateau bump: 1 on |t| <= a/2, 0 on |t| >= a."""
    if a <= 0:
        raise DomainError(f"bump half-width must be positive, got {a}")
    t = np.asarray(t, dtype=float)
    phi, _, _ = bump_jet(np.abs(t), a)
    if phi.ndim == 0:
        return float(phi)
    return phi


def _simpson_linear(fn, lo, hi, n=1025):
    x = np.linspace(lo, hi, n)
    return float(simpson(fn(x), x=x))


def _simpson_log(fn, lo, hi, n=2049):
    """Simpson in log r of fn(r) dr; handles intervals spanning decades."""
    x = np.linspace(math.log(lo), math.log(hi), n)
    r = np.exp(x)
    return float(simpson(fn(r) * r, x=x))


def _coth_minus_inv(r):
    """coth(r) - 1/r, stable near 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < 1e-4
    out = np.empty_like(r)
    rs = r[small]
    out[small] = rs / 3.0 - rs**3 / 45.0
    rb = r[~small]
    out[~small] = 1.0 / np.tanh(rb) - 1.0 / rb
    return out


def _dist_to_point(x, y, px, py):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    xf = np.broadcast_to(x, shape).ravel()
    yf = np.broadcast_to(y, shape).ravel()
    d = accel.pair_distances(
        xf, yf, np.full(xf.shape, px), np.full(yf.shape, py)
    )
    return d.reshape(shape)


def _dist_grad_z(z, p):
    """d/dz of the hyperbolic distance to anchor p; 0 where z == p."""
    m = (z - p) / (1.0 - np.conj(p) * z)
    mabs = np.abs(m)
    dm = (1.0 - abs(p) ** 2) / (1.0 - np.conj(p) * z) ** 2
    safe = np.where(mabs > 0, mabs, 1.0)
    return np.where(
        mabs > 0, (1.0 / (1.0 - mabs**2)) * (np.conj(m) / safe) * dm, 0.0
    )


def _ray_points(anchor, radii):
    """Disk points at the given hyperbolic radii from the anchor.

    Radial profiles have rotationally symmetric curvature, so one ray
    samples every value the sign scan could see.
    """
    from .hyp import MobiusTransform

    pts = MobiusTransform.origin_to(anchor).apply_many(
        np.tanh(0.5 * np.asarray(radii, dtype=float)).astype(complex)
    )
    return pts.real, pts.imag


# ---------------------------------------------------------------------------
# collar shrinker


class ShrinkerField(conformal.ScalarField):
    """u = -log(sys/eps) * phi(|r|; delta) + C (1 - phi), |r| the collar
    coordinate (signed distance from the systole geodesic)."""

    analytic_laplacian = True

    def __init__(self, sys_length, base_area, eps, delta, C):
        self.sys = float(sys_length)
        self.base_area = float(base_area)
        self.eps = float(eps)
        self.delta = float(delta)
        self.C = float(C)
        self.depth = math.log(self.sys / self.eps)  # u on the geodesic is -depth

    def _r_abs(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.abs(np.arcsinh(2.0 * y / (1.0 - x * x - y * y)))

    def _profile_jet(self, r_abs):
        phi, d1, d2 = bump_jet(r_abs, self.delta)
        amp = self.depth + self.C
        return (
            self.C - amp * phi,
            -amp * d1,
            -amp * d2,
        )

    def values(self, x, y):
        v, _, _ = self._profile_jet(self._r_abs(x, y))
        return v

    def laplacian(self, x, y):
        r = self._r_abs(x, y)
        _, g1, g2 = self._profile_jet(r)
        return g2 + np.tanh(r) * g1

    def grad_z(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = x + 1j * y
        q = 2.0 * y / (1.0 - x * x - y * y)
        r = np.arcsinh(q)
        _, g1, _ = self._profile_jet(np.abs(r))
        qz = -1j * (1.0 - np.conj(z) ** 2) / (1.0 - z * np.conj(z)) ** 2
        return g1 * np.sign(r) * qz / np.sqrt(1.0 + q * q)

    def bounds(self):
        return min(-self.depth, self.C), max(-self.depth, self.C)

    def exp_integral(self, power):
        def fn(r):
            v, _, _ = self._profile_jet(r)
            return np.exp(power * v) * np.cosh(r)

        collar = 2.0 * self.sys * _simpson_linear(fn, 0.0, self.delta, n=4097)
        outside = self.base_area - 2.0 * self.sys * math.sinh(self.delta)
        return collar + math.exp(power * self.C) * outside

    def laplacian_integral(self):
        def fn(r):
            _, g1, g2 = self._profile_jet(r)
            return (g2 + np.tanh(r) * g1) * np.cosh(r)

        return 2.0 * self.sys * _simpson_linear(fn, 0.0, self.delta, n=4097)

    def sign_probe_points(self):
        r = np.linspace(0.0, self.delta, 2049)
        return np.zeros_like(r), np.tanh(0.5 * r)


def systole_shrinker(surface, gamma, eps, delta) -> conformal.ConformalMetric:
    """Metric that shrinks the systole geodesic to g-length eps."""
    sys_length = gamma.length
    if not 0.0 < eps <= sys_length:
        raise ParameterError(
            f"shrinker needs 0 < eps <= systole {sys_length:.6f}, got {eps}"
        )
    if delta <= 0.0 or delta > gamma.chart.half_width:
        raise ParameterError(
            f"collar half-width {delta} outside the embedded range "
            f"(0, {gamma.chart.half_width}]"
        )
    collar_area = 2.0 * sys_length * math.sinh(delta)
    if collar_area > 0.5 * surface.total_area:
        raise ParameterError(
            f"collar too large: sigma-area {collar_area:.4f} exceeds half "
            f"the surface area {surface.total_area:.4f}"
        )

    def area_of_C(C):
        return ShrinkerField(sys_length, surface.total_area, eps, delta, C).exp_integral(2)

    C = conformal.normalize_area(area_of_C, surface.total_area, -1.0, 1.0)
    return _build_shrinker(surface, eps, delta, C)


def _build_shrinker(surface, eps, delta, C):
    field = ShrinkerField(surface.systole, surface.total_area, eps, delta, C)
    return conformal.make_metric(
        surface, field, "shrinker", {"eps": eps, "delta": delta}, C
    )


# ---------------------------------------------------------------------------
# spike stretcher and dumbbell

# below this delta the squared conformal factor overflows double precision
MIN_SPIKE_DELTA = 0.003


class _PowerSpike:
    """Radial profile rho(r): inner plateau, r^{-(1-delta/2)} power zone on
    [exp(-1/delta), eps/2], constant C past eps; conformal factor e^u = rho."""

    def __init__(self, base_area, eps, delta, C):
        self.base_area = base_area
        self.eps = eps
        self.delta = delta
        self.C = C
        self.p_exp = 1.0 - 0.5 * delta
        self.r1 = math.exp(-1.0 / delta)
        self.log_amp = -0.5 * delta * math.log(0.5 * eps) + 0.5 * math.log(
            base_area * delta / (16.0 * math.pi)
        )
        self.log_inner = self.log_amp + self.p_exp * (math.log(2.0) + 1.0 / delta)

    def rho_jet(self, r):
        r = np.asarray(r, dtype=float)
        pe, pe1, pe2 = bump_jet(r, self.eps)
        p1, p11, p12 = bump_jet(r, self.r1)
        cv = np.zeros_like(r)
        cd = np.zeros_like(r)
        cdd = np.zeros_like(r)
        m = r > 0.5 * self.r1
        rm = r[m]
        cv[m] = np.exp(self.log_amp - self.p_exp * np.log(rm))
        cd[m] = -self.p_exp / rm * cv[m]
        cdd[m] = self.p_exp * (self.p_exp + 1.0) / rm**2 * cv[m]
        inner = math.exp(self.log_inner)
        bv = inner * p1 + (1.0 - p1) * cv
        bd = inner * p11 + (1.0 - p1) * cd - p11 * cv
        bdd = inner * p12 + (1.0 - p1) * cdd - 2.0 * p11 * cd - p12 * cv
        rv = pe * bv + (1.0 - pe) * self.C
        rd = pe1 * bv + pe * bd - pe1 * self.C
        rdd = pe2 * bv + 2.0 * pe1 * bd + pe * bdd - pe2 * self.C
        return rv, rd, rdd

    def u_values(self, r):
        rv, _, _ = self.rho_jet(r)
        return np.log(rv)

    def u_slope(self, r):
        rv, rd, _ = self.rho_jet(r)
        return rd / rv

    def laplacian(self, r):
        """u'' + coth(r) u' for the radial profile u = log rho."""
        r = np.asarray(r, dtype=float)
        rv, rd, rdd = self.rho_jet(r)
        u1 = rd / rv
        u2 = rdd / rv - u1 * u1
        coth_term = np.zeros_like(r)
        m = (u1 != 0.0) & (r > 0.0)
        coth_term[m] = u1[m] / np.tanh(r[m])
        return u2 + coth_term

    # -- zone quadratures -------------------------------------------------

    def _zones(self, lo_split=True):
        r1, eps = self.r1, self.eps
        zones = []
        if lo_split:
            zones.append((0.5 * r1, r1, "log"))
        zones.append((r1, 0.5 * eps, "log"))
        zones.append((0.5 * eps, eps, "lin"))
        return zones

    def _integrate_zones(self, fn):
        total = 0.0
        for lo, hi, kind in self._zones():
            if kind == "log":
                total += _simpson_log(fn, lo, hi)
            else:
                total += _simpson_linear(fn, lo, hi, n=2049)
        return total

    def ball_exp_integral(self, power):
        """Integral of e^{power u} over the sigma-ball of radius eps."""
        plateau = math.exp(power * self.log_inner) * (
            4.0 * math.pi * math.sinh(0.25 * self.r1) ** 2
        )

        def fn(r):
            rv, _, _ = self.rho_jet(r)
            return rv**power * TWO_PI * np.sinh(r)

        return plateau + self._integrate_zones(fn)

    def ball_laplacian_integral(self):
        def fn(r):
            return self.laplacian(r) * TWO_PI * np.sinh(r)

        return self._integrate_zones(fn)

    def radial_segment_length(self):
        """Quadrature g-length of the radial segment r in [r1, eps/2]."""

        def fn(r):
            rv, _, _ = self.rho_jet(r)
            return rv

        return _simpson_log(fn, self.r1, 0.5 * self.eps, n=8193)

    def radial_length_bound(self):
        """Closed-form lower bound for the power-zone radial g-length."""
        shrink = (0.5 * self.eps) ** (-0.5 * self.delta) * math.exp(-0.5)
        return (
            (1.0 / math.sqrt(self.delta))
            * math.sqrt(self.base_area / (4.0 * math.pi))
            * (1.0 - shrink)
        )

    def ramp_values(self, r):
        """Linear-in-g-radius test ramp: 1 inside r1, 0 outside eps/2."""
        top = (0.5 * self.eps) ** (0.5 * self.delta)
        t = (top - np.power(np.asarray(r, dtype=float), 0.5 * self.delta)) / (
            top - math.exp(-0.5)
        )
        return np.clip(t, 0.0, 1.0)

    def ramp_energy(self):
        """Continuum Dirichlet energy of the ramp over the annulus.

        Two-dimensional Dirichlet energy is conformally invariant, so the
        g-energy equals the sigma-quadrature of the squared radial slope.
        """
        top = (0.5 * self.eps) ** (0.5 * self.delta)
        norm = top - math.exp(-0.5)
        half_d = 0.5 * self.delta

        def fn(r):
            slope = half_d * np.power(r, half_d - 1.0) / norm
            return slope * slope * TWO_PI * np.sinh(r)

        return _simpson_log(fn, self.r1, 0.5 * self.eps, n=8193)

    def annulus_area(self):
        """g-area of the ramp annulus [r1, eps/2].

        The ramp is linear in the g-radial coordinate there, so this area
        divided by the squared radial length IS the ramp's exact Dirichlet
        energy; ramp_energy() recovers it through an independent route.
        """

        def fn(r):
            rv, _, _ = self.rho_jet(r)
            return rv * rv * TWO_PI * np.sinh(r)

        return _simpson_log(fn, self.r1, 0.5 * self.eps, n=8193)

    def sampled_min_u(self):
        r = np.concatenate(
            [
                np.geomspace(0.5 * self.r1, 0.5 * self.eps, 4097),
                np.linspace(0.5 * self.eps, self.eps, 4097),
            ]
        )
        return float(min(np.min(self.u_values(r)), math.log(self.C)))

    def probe_radii(self):
        """Radii resolving the inner and outer transition zones."""
        return np.concatenate(
            [
                np.geomspace(0.25 * self.r1, 0.5 * self.eps, 4097),
                np.linspace(0.5 * self.eps, self.eps, 1025)[1:],
            ]
        )


def _spike_checks(surface, eps, delta, anchors):
    if eps <= 0.0:
        raise ParameterError(f"spike radius eps must be positive, got {eps}")
    if delta <= 0.0 or delta * math.log(2.0 / eps) >= 1.0:
        raise ParameterError(
            f"need 0 < delta < 1/log(2/eps) = {1.0 / math.log(2.0 / eps):.4f}, "
            f"got {delta}"
        )
    if delta < MIN_SPIKE_DELTA:
        raise ParameterError(
            f"delta {delta} below {MIN_SPIKE_DELTA}: conformal factor would "
            "overflow double precision"
        )
    r_in = surface.domain.in_radius
    for p in anchors:
        d0 = 2.0 * math.atanh(abs(p))
        if d0 + eps > r_in:
            raise ParameterError(
                f"eps-ball around {p} leaves the fundamental domain "
                f"(needs distance-to-center + eps <= {r_in:.4f})"
            )


class StretcherField(conformal.ScalarField):
    """u = log rho(d_sigma(. , p)) for the power-spike profile."""

    analytic_laplacian = True

    def __init__(self, base_area, p, eps, delta, C):
        self.base_area = float(base_area)
        self.p = complex(p)
        self.eps = float(eps)
        self.delta = float(delta)
        self.C = float(C)
        self.spike = _PowerSpike(self.base_area, self.eps, self.delta, self.C)

    def _r(self, x, y):
        return _dist_to_point(x, y, self.p.real, self.p.imag)

    def values(self, x, y):
        return self.spike.u_values(self._r(x, y))

    def laplacian(self, x, y):
        return self.spike.laplacian(self._r(x, y))

    def grad_z(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = x + 1j * y
        r = self._r(x, y)
        return self.spike.u_slope(r) * _dist_grad_z(z, self.p)

    def bounds(self):
        return self.spike.sampled_min_u(), self.spike.log_inner

    def exp_integral(self, power):
        ball_sigma = 4.0 * math.pi * math.sinh(0.5 * self.eps) ** 2
        return self.spike.ball_exp_integral(power) + self.C**power * (
            self.base_area - ball_sigma
        )

    def laplacian_integral(self):
        return self.spike.ball_laplacian_integral()

    def radial_segment_length(self):
        return self.spike.radial_segment_length()

    def radial_length_bound(self):
        return self.spike.radial_length_bound()

    def sign_probe_points(self):
        return _ray_points(self.p, self.spike.probe_radii())


def diameter_stretcher(surface, p, eps, delta) -> conformal.ConformalMetric:
    """Metric growing a long thin spike at p (diameter blows up as delta->0)."""
    pz = complex(p.z) if hasattr(p, "z") else complex(p)
    _spike_checks(surface, eps, delta, [pz])

    def area_of_C(C):
        return StretcherField(surface.total_area, pz, eps, delta, C).exp_integral(2)

    C = conformal.normalize_area_positive(area_of_C, surface.total_area, 1e-6, 10.0)
    return _build_stretcher(surface, pz, eps, delta, C)


def _build_stretcher(surface, pz, eps, delta, C):
    field = StretcherField(surface.total_area, pz, eps, delta, C)
    return conformal.make_metric(
        surface,
        field,
        "stretcher",
        {"eps": eps, "delta": delta, "p": [pz.real, pz.imag]},
        C,
    )


class DumbbellField(conformal.ScalarField):
    """Two disjoint power spikes at p and q over a constant background."""

    analytic_laplacian = True

    def __init__(self, base_area, p, q, eps, delta, C):
        self.base_area = float(base_area)
        self.anchors = (complex(p), complex(q))
        self.eps = float(eps)
        self.delta = float(delta)
        self.C = float(C)
        self.spike = _PowerSpike(self.base_area, self.eps, self.delta, self.C)

    @property
    def delta_R(self):
        return self.spike.radial_length_bound()

    def ramp_values(self, r):
        return self.spike.ramp_values(r)

    def _radii(self, x, y):
        return [
            _dist_to_point(x, y, a.real, a.imag) for a in self.anchors
        ]

    def values(self, x, y):
        rp, rq = self._radii(x, y)
        up = self.spike.u_values(rp)
        uq = self.spike.u_values(rq)
        logC = math.log(self.C)
        # spikes have disjoint supports: combine deviations from the background
        return logC + (up - logC) + (uq - logC)

    def laplacian(self, x, y):
        rp, rq = self._radii(x, y)
        return self.spike.laplacian(rp) + self.spike.laplacian(rq)

    def grad_z(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = x + 1j * y
        rp, rq = self._radii(x, y)
        return self.spike.u_slope(rp) * _dist_grad_z(
            z, self.anchors[0]
        ) + self.spike.u_slope(rq) * _dist_grad_z(z, self.anchors[1])

    def bounds(self):
        return self.spike.sampled_min_u(), self.spike.log_inner

    def exp_integral(self, power):
        ball_sigma = 4.0 * math.pi * math.sinh(0.5 * self.eps) ** 2
        return 2.0 * self.spike.ball_exp_integral(power) + self.C**power * (
            self.base_area - 2.0 * ball_sigma
        )

    def laplacian_integral(self):
        return 2.0 * self.spike.ball_laplacian_integral()

    def ramp_energy(self):
        return self.spike.ramp_energy()

    def annulus_area(self):
        return self.spike.annulus_area()

    def sign_probe_points(self):
        radii = self.spike.probe_radii()
        rays = [_ray_points(a, radii) for a in self.anchors]
        return (
            np.concatenate([x for x, _ in rays]),
            np.concatenate([y for _, y in rays]),
        )


def default_dumbbell_anchors(surface):
    """Opposite points on the real axis that are raw vertices of every
    mesh of level >= 2 (so the spike plateau mass is captured exactly)."""
    half_x = 0.5 * surface.domain.vertices[0].x
    return complex(-half_x, 0.0), complex(half_x, 0.0)


def dumbbell(surface, p, q, eps, delta) -> conformal.ConformalMetric:
    """Metric with two stretched bulbs joined by a thin neck (lambda_1 -> 0)."""
    pz = complex(p.z) if hasattr(p, "z") else complex(p)
    qz = complex(q.z) if hasattr(q, "z") else complex(q)
    _spike_checks(surface, eps, delta, [pz, qz])
    from .hyp import DiskPoint, disk_distance

    sep = disk_distance(DiskPoint(pz.real, pz.imag), DiskPoint(qz.real, qz.imag))
    if sep <= 2.0 * eps:
        raise ParameterError(
            f"anchors at distance {sep:.4f} overlap: need d(p, q) > 2 eps = {2 * eps}"
        )

    def area_of_C(C):
        return DumbbellField(
            surface.total_area, pz, qz, eps, delta, C
        ).exp_integral(2)

    C = conformal.normalize_area_positive(area_of_C, surface.total_area, 1e-6, 10.0)
    return _build_dumbbell(surface, pz, qz, eps, delta, C)


def _build_dumbbell(surface, pz, qz, eps, delta, C):
    field = DumbbellField(surface.total_area, pz, qz, eps, delta, C)
    return conformal.make_metric(
        surface,
        field,
        "dumbbell",
        {
            "eps": eps,
            "delta": delta,
            "p": [pz.real, pz.imag],
            "q": [qz.real, qz.imag],
        },
        C,
    )


# ---------------------------------------------------------------------------
# nonpositively curved radial family

RADIAL_SUPPORT = 1.2      # bump half-width in r around the center
RADIAL_CENTER_MAX = 0.3   # keep the support ball inside the octagon


class RadialSlopeField(conformal.ScalarField):
    """u'(r) = -tanh(r/2) s(r) with s = amplitude * bump(r; 1.2).

    Then 1 + L_sigma u = (1 - s) - tanh(r/2) s' >= 0 pointwise for
    amplitude in [0, 1], since s <= 1 and s' <= 0: the metric is
    nonpositively curved by construction.
    """

    analytic_laplacian = True
    curvature_sign_certificate = True

    def __init__(self, base_area, center, amplitude, C):
        self.base_area = float(base_area)
        self.center = complex(center)
        self.amplitude = float(amplitude)
        self.C = float(C)
        r = np.linspace(0.0, RADIAL_SUPPORT, 32769)
        phi, _, _ = bump_jet(r, RADIAL_SUPPORT)
        slope = -np.tanh(0.5 * r) * self.amplitude * phi
        self._table_r = r
        self._table_w = cumulative_trapezoid(slope, r, initial=0.0)

    def _r(self, x, y):
        return _dist_to_point(x, y, self.center.real, self.center.imag)

    def _w(self, r):
        return np.interp(np.asarray(r, dtype=float), self._table_r, self._table_w)

    def values(self, x, y):
        return self.C + self._w(self._r(x, y))

    def laplacian(self, x, y):
        r = self._r(x, y)
        phi, d1, _ = bump_jet(r, RADIAL_SUPPORT)
        s = self.amplitude * phi
        return -s - np.tanh(0.5 * r) * self.amplitude * d1

    def curvature_excess(self, r):
        """1 + L_sigma u as a function of the radial coordinate."""
        r = np.asarray(r, dtype=float)
        phi, d1, _ = bump_jet(r, RADIAL_SUPPORT)
        return (1.0 - self.amplitude * phi) - np.tanh(0.5 * r) * self.amplitude * d1

    def grad_z(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = x + 1j * y
        r = self._r(x, y)
        phi, _, _ = bump_jet(r, RADIAL_SUPPORT)
        slope = -np.tanh(0.5 * r) * self.amplitude * phi
        return slope * _dist_grad_z(z, self.center)

    def bounds(self):
        return self.C + float(self._table_w[-1]), self.C

    def exp_integral(self, power):
        w = self._table_w
        r = self._table_r
        inside = float(
            simpson(np.exp(power * w) * TWO_PI * np.sinh(r), x=r)
        )
        ball_sigma = 4.0 * math.pi * math.sinh(0.5 * RADIAL_SUPPORT) ** 2
        outside = math.exp(power * float(w[-1])) * (self.base_area - ball_sigma)
        return math.exp(power * self.C) * (inside + outside)

    def laplacian_integral(self):
        r = self._table_r
        phi, d1, _ = bump_jet(r, RADIAL_SUPPORT)
        lap = -self.amplitude * phi - np.tanh(0.5 * r) * self.amplitude * d1
        return float(simpson(lap * TWO_PI * np.sinh(r), x=r))


def nonpositive_radial(surface, center, amplitude) -> conformal.ConformalMetric:
    """Nonpositively curved test metric bulging around a center point."""
    cz = complex(center.z) if hasattr(center, "z") else complex(center)
    if not 0.0 <= amplitude <= 1.0:
        raise ParameterError(
            f"amplitude must lie in [0, 1] for the sign certificate, got {amplitude}"
        )
    if 2.0 * math.atanh(abs(cz)) > RADIAL_CENTER_MAX:
        raise ParameterError(
            f"center must stay within sigma-distance {RADIAL_CENTER_MAX} of the "
            "origin so the support ball embeds"
        )

    def area_of_C(C):
        return RadialSlopeField(surface.total_area, cz, amplitude, C).exp_integral(2)

    C = conformal.normalize_area(area_of_C, surface.total_area, -1.0, 1.0)
    metric = _build_nonpositive_radial(surface, cz, amplitude, C)
    scan = metric.field.curvature_excess(np.linspace(0.0, RADIAL_SUPPORT + 0.1, 20001))
    if float(np.min(scan)) < -1e-12:
        raise ConstructionError(
            f"radial curvature constraint violated: min(1 + lap u) = {np.min(scan):.3e}"
        )
    return metric


def _build_nonpositive_radial(surface, cz, amplitude, C):
    field = RadialSlopeField(surface.total_area, cz, amplitude, C)
    return conformal.make_metric(
        surface,
        field,
        "nonpositive_radial",
        {"center": [cz.real, cz.imag], "amplitude": amplitude},
        C,
    )


# ---------------------------------------------------------------------------
# warped-product cylinder profile (not conformal to sigma)


class CylinderMetric:
    """Rotationally symmetric metric dr^2 + f(r)^2 dtheta^2 on a cylinder.

    f is even and convex with f(0) = neck and f(r) = a cosh(r) beyond the
    match radius, so the curvature -f''/f is nonpositive everywhere, -1
    in the matched zone, and nearly 0 on the central plateau.
    """

    family = "cylinder"

    def __init__(self, a, neck, match_radius, grid_r, f2_table, f1_table, f_table,
                 plateau_width, params):
        self.a = a
        self.neck = neck
        self.match_radius = match_radius
        self.grid_r = grid_r
        self._f2 = f2_table
        self._f1 = f1_table
        self._f = f_table
        self.plateau_width = plateau_width
        self.params = params

    def _split(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return r, r > self.match_radius

    def profile(self, r):
        r, outside = self._split(r)
        vals = np.interp(r, self.grid_r, self._f)
        vals = np.where(outside, self.a * np.cosh(r), vals)
        return vals if vals.ndim else float(vals)

    def profile_slope(self, r):
        rr = np.asarray(r, dtype=float)
        sign = np.sign(rr)
        r, outside = self._split(rr)
        vals = np.interp(r, self.grid_r, self._f1)
        vals = np.where(outside, self.a * np.sinh(r), vals)
        vals = sign * vals
        return vals if vals.ndim else float(vals)

    def profile_convexity(self, r):
        r, outside = self._split(r)
        vals = np.interp(r, self.grid_r, self._f2)
        vals = np.where(outside, self.a * np.cosh(r), vals)
        return vals if vals.ndim else float(vals)

    def curvature(self, r):
        """Gauss curvature -f''(r)/f(r); exactly -1 where f = a cosh r."""
        r, outside = self._split(r)
        vals = -np.interp(r, self.grid_r, self._f2) / np.interp(r, self.grid_r, self._f)
        vals = np.where(outside, -1.0, vals)
        return vals if vals.ndim else float(vals)


def cylinder_profile(a, target_neck, match_radius) -> CylinderMetric:
    """Convex even profile interpolating a flat-ish neck into a cosh r.

    f'' is a sum of three nonnegative bumps: a tiny plateau bump at the
    center (keeps f strictly convex without bending the neck), a free
    bump whose amplitude and position absorb the slope and value matching
    conditions at the match radius, and a smoothly switched-on a cosh r.
    Both matching conditions are linear in the unknowns because the free
    bump is symmetric about its center.
    """
    if a <= 0.0:
        raise ParameterError(f"profile scale a must be positive, got {a}")
    if match_radius <= 0.0:
        raise ParameterError(f"match radius must be positive, got {match_radius}")
    if not 0.0 < target_neck < a:
        raise ParameterError(
            f"need 0 < target_neck < a = {a}, got {target_neck}"
        )
    m = match_radius
    n_grid = 32769
    t = np.linspace(0.0, m, n_grid)

    b0, _, _ = bump_jet(t, 0.45 * m)
    b2 = 1.0 - bump_jet(t, m)[0]
    eta = 1e-3 * target_neck  # keeps |K| <= 1e-3 on the plateau for any neck

    slope_target = a * math.sinh(m)
    value_target = a * math.cosh(m) - target_neck

    i0 = float(simpson(b0, x=t))
    i2 = float(simpson(np.cosh(t) * b2, x=t))
    j0 = float(simpson((m - t) * b0, x=t))
    j2 = float(simpson((m - t) * np.cosh(t) * b2, x=t))

    # The free bump is even about its center w, so its slope contribution
    # is M * i1 and its value contribution exactly (m - w) * M * i1: the
    # equations are linear and w does not depend on the bump width at all.
    bump_slope = slope_target - eta * i0 - a * i2
    if bump_slope <= 0.0:
        raise ParameterError(
            "infeasible convex interpolation: matching slope needs a negative bump"
        )
    w = m - (value_target - eta * j0 - a * j2) / bump_slope
    margin = 0.01 * m
    if not (margin <= w <= m - margin):
        raise ParameterError(
            f"infeasible convex interpolation: free bump lands at {w:.4f}, "
            f"outside [{margin:.4f}, {m - margin:.4f}]"
        )
    width1 = min(0.18 * m, 0.95 * (m - w), 0.9 * w)
    unit = _simpson_linear(lambda s: bump_jet(np.abs(s), 1.0)[0], -1.0, 1.0, n=4097)
    i1 = width1 * unit
    M = bump_slope / i1

    b1 = bump_jet(np.abs(t - w), width1)[0]
    f2 = eta * b0 + M * b1 + a * np.cosh(t) * b2
    f1 = cumulative_trapezoid(f2, t, initial=0.0)
    f = target_neck + cumulative_trapezoid(f1, t, initial=0.0)

    if abs(f[-1] - a * math.cosh(m)) > 1e-6 or abs(f1[-1] - a * math.sinh(m)) > 1e-6:
        raise ConstructionError(
            f"profile integration mismatch at match radius: f error "
            f"{f[-1] - a * math.cosh(m):.2e}, slope error "
            f"{f1[-1] - a * math.sinh(m):.2e}"
        )
    return CylinderMetric(
        a=a,
        neck=target_neck,
        match_radius=m,
        grid_r=t,
        f2_table=f2,
        f1_table=f1,
        f_table=f,
        plateau_width=w - width1,
        params={"a": a, "neck": target_neck, "match_radius": m},
    )


# ---------------------------------------------------------------------------
# registry

FAMILY_NAMES = (
    "base",
    "shrinker",
    "stretcher",
    "dumbbell",
    "nonpositive_radial",
    "cylinder",
)


def make(surface, family, **params):
    """Build a family member from keyword parameters (CLI entry point)."""
    if family == "base":
        return conformal.base_metric(surface)
    if family == "shrinker":
        return systole_shrinker(
            surface,
            surface.systole_geodesic(),
            params["eps"],
            params["delta"],
        )
    if family == "stretcher":
        return diameter_stretcher(
            surface, params.get("p", 0j), params["eps"], params["delta"]
        )
    if family == "dumbbell":
        p = params.get("p")
        q = params.get("q")
        if p is None or q is None:
            p, q = default_dumbbell_anchors(surface)
        return dumbbell(surface, p, q, params["eps"], params["delta"])
    if family == "nonpositive_radial":
        return nonpositive_radial(
            surface, params.get("center", 0j), params["amplitude"]
        )
    if family == "cylinder":
        a = params.get("a", surface.systole / TWO_PI)
        return cylinder_profile(
            a, params.get("neck", 0.5 * a), params.get("match_radius", 2.5)
        )
    raise ParameterError(f"unknown family '{family}' (choose from {FAMILY_NAMES})")


def from_descriptor(doc, surface=None):
    """Rebuild a metric from its descriptor, reusing the stored constant."""
    version = doc.get("version")
    if version != 1:
        raise UsageError(f"unsupported descriptor version {version!r}")
    if surface is None:
        surface = HyperbolicSurface()
    family = doc.get("family")
    params = doc.get("params", {})
    if family == "base":
        return conformal.base_metric(surface)
    if family == "cylinder":
        return cylinder_profile(
            params["a"], params["neck"], params["match_radius"]
        )
    if family not in FAMILY_NAMES:
        raise ParameterError(f"unknown family '{family}' in descriptor")
    C = doc["C"]
    if family == "shrinker":
        return _build_shrinker(surface, params["eps"], params["delta"], C)
    if family == "stretcher":
        px, py = params["p"]
        return _build_stretcher(
            surface, complex(px, py), params["eps"], params["delta"], C
        )
    if family == "dumbbell":
        px, py = params["p"]
        qx, qy = params["q"]
        return _build_dumbbell(
            surface, complex(px, py), complex(qx, qy),
            params["eps"], params["delta"], C,
        )
    if family == "nonpositive_radial":
        cx, cy = params["center"]
        return _build_nonpositive_radial(
            surface, complex(cx, cy), params["amplitude"], C
        )
    raise ParameterError(f"unknown family '{family}' in descriptor")
