"""Curves, geodesics, diameters, and the integral identities of the
deformation profile (circle and region integrals, Green-type residuals,
the conjugate-point diameter quantity).

Curves are sampled in disk coordinates.  Collar computations use the
normal-coordinate chart of the systole geodesic: r is the signed
distance from the axis, s the position along it, with base metric
dr^2 + cosh(r)^2 ds^2 and area element cosh(r).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .errors import DomainError, RangeError, TopologyError
from .hyp import MobiusTransform

TWO_PI = 2.0 * math.pi


@dataclass
class Curve:
    samples: np.ndarray                 # (n, 2) disk coordinates
    closed: bool = False
    velocities: np.ndarray = field(default=None, repr=False)  # (n,) complex

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 2:
            raise DomainError(f"curve samples must be (n, 2), got {self.samples.shape}")
        if self.samples.shape[0] < 2:
            raise DomainError("a curve needs at least two samples")

    @property
    def n(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class CylinderChart:
    """Normal coordinates around a closed geodesic of length core_length.

    Valid as an embedded collar for |r| <= half_width; the coordinate
    formulas extend to the whole disk and are periodic in s with period
    core_length under the gluing along the geodesic.
    """

    core_length: float
    half_width: float
    grid: tuple = (512, 512)

    def __post_init__(self):
        if self.core_length <= 0.0:
            raise DomainError(f"core length must be positive, got {self.core_length}")
        if self.half_width <= 0.0:
            raise DomainError(f"half width must be positive, got {self.half_width}")
        if min(self.grid) < 8:
            raise DomainError(f"grid {self.grid} too coarse")

    def to_disk_z(self, r, s):
        """Disk point at signed distance r from the axis, arclength s along it."""
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        w = 1j * np.tanh(0.5 * r)
        t = np.tanh(0.5 * s)
        return (w + t) / (1.0 + t * w)

    def from_disk(self, x, y):
        """(r, s) coordinates of disk points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        nrm = x * x + y * y
        r = np.arcsinh(2.0 * y / (1.0 - nrm))
        s = np.arctanh(2.0 * x / (1.0 + nrm))
        return r, s

    def area_element(self, r):
        return np.cosh(np.asarray(r, dtype=float))


def _check_in_disk(samples):
    if np.any(np.sum(samples**2, axis=1) >= 1.0):
        raise RangeError("curve sample outside the unit disk")


def _segment_data(metric, curve):
    """Per-segment sigma-lengths and u at Euclidean segment midpoints."""
    pts = curve.samples
    _check_in_disk(pts)
    a, b = pts[:-1], pts[1:]
    seg = accel.pair_distances(a[:, 0], a[:, 1], b[:, 0], b[:, 1])
    mid = 0.5 * (a + b)
    u_mid = np.asarray(metric.u_at(mid[:, 0], mid[:, 1]), dtype=float)
    return seg, u_mid


def curve_length(metric, curve: Curve) -> float:
    """g-length of a sampled curve: sum of e^{u(midpoint)} sigma-lengths."""
    seg, u_mid = _segment_data(metric, curve)
    return float(np.sum(np.exp(u_mid) * seg))


def jensen_lower_bound(metric, curve: Curve):
    """(l_g, l_sigma * exp(mean of u along the curve)); AM-GM gives >=."""
    seg, u_mid = _segment_data(metric, curve)
    l_sigma = float(np.sum(seg))
    if l_sigma == 0.0:
        raise DomainError("curve has zero sigma-length")
    l_g = float(np.sum(np.exp(u_mid) * seg))
    mean_u = float(np.sum(u_mid * seg)) / l_sigma
    return l_g, l_sigma * math.exp(mean_u)


def curve_to_csv(metric, curve: Curve) -> str:
    """Sample table with cumulative g-arclength, coordinates, u, speed."""
    pts = curve.samples
    seg, u_mid = _segment_data(metric, curve)
    s = np.concatenate([[0.0], np.cumsum(np.exp(u_mid) * seg)])
    u = np.asarray(metric.u_at(pts[:, 0], pts[:, 1]), dtype=float)
    if curve.velocities is not None:
        w = u + np.log(2.0 / (1.0 - np.sum(pts**2, axis=1)))
        speed = np.exp(w) * np.abs(curve.velocities)
    else:
        speed = np.gradient(s, 1.0 / (curve.n - 1))
    lines = ["s, x, y, u, speed"]
    for i in range(curve.n):
        lines.append(
            f"{s[i]:.12g}, {pts[i, 0]:.17g}, {pts[i, 1]:.17g}, "
            f"{u[i]:.12g}, {speed[i]:.12g}"
        )
    return "\n".join(lines) + "\n"


def geodesic_shoot(metric, start, direction, length, step=1e-3) -> Curve:
    """g-geodesic of given g-length by classical RK4 at fixed arclength step.

    The metric is conformally Euclidean with total factor e^{2w},
    w = u + log(2/(1-|z|^2)); the trajectory solves z'' = -2 w_z (z')^2
    with g-unit initial speed, so the parameter is g-arclength.
    """
    if length <= 0.0:
        raise DomainError(f"shoot length must be positive, got {length}")
    z = complex(start.z) if hasattr(start, "z") else complex(start)
    d = complex(direction)
    if d == 0:
        raise DomainError("direction must be nonzero")
    d /= abs(d)

    def w_z(zz):
        x = np.array([zz.real])
        y = np.array([zz.imag])
        base = np.conj(zz) / (1.0 - abs(zz) ** 2)
        return complex(np.asarray(metric.field.grad_z(x, y)).ravel()[0] + base)

    def w_val(zz):
        u = float(np.asarray(metric.u_at(np.array([zz.real]), np.array([zz.imag]))).ravel()[0])
        return u + math.log(2.0 / (1.0 - abs(zz) ** 2))

    v = d * math.exp(-w_val(z))
    n_steps = max(1, int(math.ceil(length / step)))
    h = length / n_steps
    zs = np.empty(n_steps + 1, dtype=complex)
    vs = np.empty(n_steps + 1, dtype=complex)
    zs[0], vs[0] = z, v

    def acc(zz, vv):
        return -2.0 * w_z(zz) * vv * vv

    for i in range(n_steps):
        k1z, k1v = v, acc(z, v)
        k2z, k2v = v + 0.5 * h * k1v, acc(z + 0.5 * h * k1z, v + 0.5 * h * k1v)
        k3z, k3v = v + 0.5 * h * k2v, acc(z + 0.5 * h * k2z, v + 0.5 * h * k2v)
        k4z, k4v = v + h * k3v, acc(z + h * k3z, v + h * k3v)
        z = z + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if abs(z) >= 1.0 - 1e-6:
            raise RangeError(
                f"trajectory left the disk chart at step {i + 1} (|z| = {abs(z):.8f})"
            )
        zs[i + 1], vs[i + 1] = z, v

    return Curve(
        samples=np.column_stack([zs.real, zs.imag]), closed=False, velocities=vs
    )


def _edge_weights(metric, mesh, samples_per_edge):
    """g-lengths of mesh edges by midpoint (or k-point) sampling of e^u."""
    a = mesh.xy[mesh.edges[:, 0], 0] + 1j * mesh.xy[mesh.edges[:, 0], 1]
    b = mesh.xy[mesh.edges[:, 1], 0] + 1j * mesh.xy[mesh.edges[:, 1], 1]
    w = (b - a) / (1.0 - np.conj(a) * b)
    dist = np.arctanh(np.abs(w))  # half the sigma-length
    unit = w / np.abs(w)
    total = np.zeros(len(a))
    k = samples_per_edge
    for j in range(k):
        t = (j + 0.5) / k
        m = unit * np.tanh(t * dist)
        zt = (m + a) / (1.0 + np.conj(a) * m)
        u = np.asarray(metric.u_at(zt.real, zt.imag), dtype=float)
        total += np.exp(u)
    return mesh.edge_len_sigma / k * total


def diameter_estimate(metric, mesh, samples_per_edge=1) -> float:
    """Max over vertex pairs of graph distance with g-weighted edges."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    weights = _edge_weights(metric, mesh, samples_per_edge)
    r0 = mesh.rep[mesh.edges[:, 0]]
    r1 = mesh.rep[mesh.edges[:, 1]]
    lo = np.minimum(r0, r1)
    hi = np.maximum(r0, r1)
    keys = lo.astype(np.int64) * mesh.n_rep + hi
    order = np.lexsort((weights, keys))
    keys_sorted = keys[order]
    first = np.concatenate([[True], keys_sorted[1:] != keys_sorted[:-1]])
    sel = order[first]  # duplicate glued edges keep their minimum weight
    graph = csr_matrix(
        (weights[sel], (lo[sel], hi[sel])), shape=(mesh.n_rep, mesh.n_rep)
    )
    dist = dijkstra(graph, directed=False)
    if not np.all(np.isfinite(dist)):
        raise TopologyError("mesh graph is disconnected")
    return float(dist.max())


def _circle_points(center, R, n_theta):
    cz = complex(center.z) if hasattr(center, "z") else complex(center)
    theta = np.arange(n_theta) * (TWO_PI / n_theta)
    ring = math.tanh(0.5 * R) * np.exp(1j * theta)
    T = MobiusTransform.origin_to(cz)
    return T.apply_many(ring)


def _check_embedded(center, R, label):
    cz = complex(center.z) if hasattr(center, "z") else complex(center)
    in_radius = math.acosh(1.0 + math.sqrt(2.0))
    if R <= 0.0:
        raise RangeError(f"{label} radius must be positive, got {R}")
    if 2.0 * math.atanh(abs(cz)) + R > in_radius:
        raise RangeError(
            f"{label} of radius {R} around {cz} is not contained in the "
            "fundamental domain"
        )


def circle_integral_u(metric, center, R, n_theta=1024) -> float:
    """Integral of u over the sigma-circle of radius R (against dl_sigma)."""
    _check_embedded(center, R, "circle")
    pts = _circle_points(center, R, n_theta)
    u = np.asarray(metric.u_at(pts.real, pts.imag), dtype=float)
    return math.sinh(R) * float(np.mean(u)) * TWO_PI


def circle_lower_bound(max_u, R) -> float:
    """At-max circle bound: 2 pi sinh R (max u - 2 log cosh(R/2))."""
    return TWO_PI * math.sinh(R) * (max_u - 2.0 * math.log(math.cosh(0.5 * R)))


def region_integral_u(metric, center, R, grid=(1024, 1024)):
    """(ball integral of u against dv_sigma, closed-form at-max lower bound).

    The bound -2 pi - 4 pi ((cosh R + 1) log cosh(R/2) - cosh R / 2)
    applies when u attains a maximum >= 0 at the center and the metric is
    nonpositively curved.
    """
    _check_embedded(center, R, "ball")
    n_r, n_t = grid
    cz = complex(center.z) if hasattr(center, "z") else complex(center)
    r = np.linspace(0.0, R, n_r)
    theta = np.arange(n_t) * (TWO_PI / n_t)
    ring = np.tanh(0.5 * r)[:, None] * np.exp(1j * theta)[None, :]
    T = MobiusTransform.origin_to(cz)
    pts = T.apply_many(ring.ravel()).reshape(ring.shape)
    u = np.asarray(metric.u_at(pts.real, pts.imag), dtype=float)
    ring_means = np.mean(u, axis=1) * TWO_PI
    lhs = float(np.trapezoid(ring_means * np.sinh(r), r))
    rhs = -TWO_PI - 4.0 * math.pi * (
        (math.cosh(R) + 1.0) * math.log(math.cosh(0.5 * R)) - 0.5 * math.cosh(R)
    )
    return lhs, rhs


def circle_derivative_check(metric, center, rho, covering_number, n_theta=1024):
    """(d/dr of the circle mean integral at rho, A N(rho) / sinh rho)."""
    _check_embedded(center, rho, "circle")
    h = 1e-4

    def G(r):
        pts = _circle_points(center, r, n_theta)
        u = np.asarray(metric.u_at(pts.real, pts.imag), dtype=float)
        return float(np.mean(u)) * TWO_PI

    lhs = (G(rho + h) - G(rho - h)) / (2.0 * h)
    rhs = metric.surface.total_area * covering_number / math.sinh(rho)
    return lhs, rhs


def at_max_green_residual(metric, center, rho, grid=(512, 512)) -> float:
    """|ball integral of lap u - flux through the boundary circle|.

    Everything is discretized on one polar grid: second-order finite
    differences for the derivatives, trapezoid/periodic-rectangle rules
    for the integrals, so the residual decays at second order.
    """
    _check_embedded(center, rho, "ball")
    n_r, n_t = grid
    h = rho / n_r
    r_ext = np.linspace(0.0, rho + h, n_r + 2)
    theta = np.arange(n_t) * (TWO_PI / n_t)
    cz = complex(center.z) if hasattr(center, "z") else complex(center)
    ring = np.tanh(0.5 * r_ext)[:, None] * np.exp(1j * theta)[None, :]
    T = MobiusTransform.origin_to(cz)
    pts = T.apply_many(ring.ravel()).reshape(ring.shape)
    U = np.asarray(metric.u_at(pts.real, pts.imag), dtype=float)

    u_r = (U[2:] - U[:-2]) / (2.0 * h)
    u_rr = (U[2:] - 2.0 * U[1:-1] + U[:-2]) / (h * h)
    h_t = TWO_PI / n_t
    u_tt = (np.roll(U, -1, axis=1) - 2.0 * U + np.roll(U, 1, axis=1))[1:-1] / (h_t * h_t)

    r_in = r_ext[1:-1]
    integrand = (
        u_rr * np.sinh(r_in)[:, None]
        + u_r * np.cosh(r_in)[:, None]
        + u_tt / np.sinh(r_in)[:, None]
    )
    per_ring = np.mean(integrand, axis=1) * TWO_PI
    # the integrand vanishes at r = 0 (lap u bounded, sinh r -> 0)
    lhs = float(np.trapezoid(np.concatenate([[0.0], per_ring]),
                             np.concatenate([[0.0], r_in])))
    flux = math.sinh(rho) * float(np.mean(u_r[-1])) * TWO_PI
    return abs(lhs - flux)


def collar_green_residual(metric, chart: CylinderChart, eps, rho, grid=None) -> float:
    """Green identity residual on the half-collar r in [-rho, -eps].

    Compares the area integral of lap u against the flux difference
    cosh(eps) F'(-eps) - cosh(rho) F'(-rho), F(r) the sidewise integral
    of u, with all derivatives by grid-tied central differences.
    """
    if not 0.0 < eps < rho:
        raise RangeError(f"need 0 < eps < rho, got eps={eps}, rho={rho}")
    if rho >= chart.half_width:
        raise RangeError(
            f"rho = {rho} reaches beyond the embedded collar width "
            f"{chart.half_width}"
        )
    n_r, n_s = grid if grid is not None else chart.grid
    h = (rho - eps) / (n_r - 1)
    r_ext = np.linspace(-rho - h, -eps + h, n_r + 2)
    period = chart.core_length
    s = np.arange(n_s) * (period / n_s)
    pts = chart.to_disk_z(r_ext[:, None], s[None, :])
    U = np.asarray(metric.u_at(pts.real, pts.imag), dtype=float)

    u_r = (U[2:] - U[:-2]) / (2.0 * h)
    u_rr = (U[2:] - 2.0 * U[1:-1] + U[:-2]) / (h * h)
    h_s = period / n_s
    u_ss = (np.roll(U, -1, axis=1) - 2.0 * U + np.roll(U, 1, axis=1))[1:-1] / (h_s * h_s)

    r_in = r_ext[1:-1]
    lap = u_rr + np.tanh(r_in)[:, None] * u_r + u_ss / np.cosh(r_in)[:, None] ** 2
    per_row = np.mean(lap * np.cosh(r_in)[:, None], axis=1) * period
    lhs = float(np.trapezoid(per_row, r_in))

    F = np.mean(U, axis=1) * period
    F_eps = (F[-1] - F[-3]) / (2.0 * h)
    F_rho = (F[2] - F[0]) / (2.0 * h)
    rhs = math.cosh(eps) * F_eps - math.cosh(rho) * F_rho
    return abs(lhs - rhs)


def conjugate_free_diameter_bound(max_det_factor, eps, A) -> float:
    """3 sqrt(max factor) sqrt(2 pi A / eps): diameter control for metrics
    without conjugate points."""
    return 3.0 * math.sqrt(max_det_factor) * math.sqrt(TWO_PI * A / eps)
