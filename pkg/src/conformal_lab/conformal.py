"""Conformal deformations g = exp(2u) sigma of the base hyperbolic metric.

A deformation is described by a scalar profile u, well defined on the
quotient surface.  Profiles expose pointwise values, an analytic
Laplacian where one exists, extrema over the fundamental domain, and
(for the built-in families) dedicated quadrature rules for integrals of
exp(p*u) against the base area element.  Those rules matter: the
interesting profiles vary over dozens of orders of magnitude inside
regions far smaller than any mesh triangle, so mesh quadrature alone
would be useless for area normalization.

Curvature bookkeeping uses the conformal change formula
K_g = -exp(-2u) * (1 + L_sigma u), with L_sigma the Laplacian of the
curvature -1 base metric.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NormalizationError, UsageError
from .surface import HyperbolicSurface


class ScalarField:
    """Deformation profile u on the surface (abstract base)."""

    #: True when laplacian() evaluates a closed-form expression.
    analytic_laplacian = False
    #: True when the family proves 1 + L_sigma u >= 0 by construction.
    curvature_sign_certificate = False

    def values(self, x, y):
        """u at disk points, vectorized over numpy arrays."""
        raise NotImplementedError

    def laplacian(self, x, y):
        """Base-metric Laplacian of u at disk points."""
        raise UsageError(f"{type(self).__name__} has no analytic Laplacian")

    def grad_z(self, x, y):
        """Wirtinger derivative du/dz = (u_x - i u_y)/2.

        Default is a central difference; families override with chain
        rules through their radial profiles.
        """
        h = 1e-6
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ux = (self.values(x + h, y) - self.values(x - h, y)) / (2.0 * h)
        uy = (self.values(x, y + h) - self.values(x, y - h)) / (2.0 * h)
        return 0.5 * (ux - 1j * uy)

    def bounds(self):
        """(min u, max u) over the surface."""
        raise NotImplementedError

    def exp_integral(self, power):
        """Integral of exp(power*u) over the surface against the base area.

        Returns None when the profile has no dedicated quadrature rule;
        callers then fall back to mesh quadrature.
        """
        return None

    def sign_probe_points(self):
        """Extra (x, y) samples for the curvature sign scan, or None.

        Families whose curvature concentrates below mesh resolution
        (power-law spikes transition at radius e^{-1/delta}) must expose
        the zones themselves or the scan would miss them entirely.
        """
        return None

    def laplacian_integral(self):
        """Integral of L_sigma u over the surface; None without a rule."""
        return None


class ConstantField(ScalarField):
    """u identically constant (the base metric when the constant is 0)."""

    analytic_laplacian = True
    curvature_sign_certificate = True

    def __init__(self, value, base_area):
        self.value = float(value)
        self.base_area = float(base_area)

    def values(self, x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, self.value)

    def laplacian(self, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def grad_z(self, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=complex)

    def bounds(self):
        return self.value, self.value

    def exp_integral(self, power):
        return self.base_area * math.exp(power * self.value)

    def laplacian_integral(self):
        return 0.0


@dataclass
class ConformalMetric:
    """A normalized deformation together with its provenance.

    `C` is the family's normalization constant (solved so the total area
    matches the base area); storing it makes descriptors reload to the
    bit-identical field without re-running the solve.
    """

    surface: HyperbolicSurface
    field: ScalarField
    family: str
    params: dict
    C: float
    area: float
    u_min: float
    u_max: float

    def u_at(self, x, y):
        return self.field.values(x, y)

    def factor_at(self, x, y):
        """Conformal factor exp(2u)."""
        return np.exp(2.0 * self.field.values(x, y))

    def u_raw(self, mesh):
        """u sampled at the raw mesh vertices."""
        return np.asarray(self.field.values(mesh.xy[:, 0], mesh.xy[:, 1]), dtype=float)


AREA_MATCH_TOL = 1e-8


def make_metric(surface, field, family, params, C):
    """Package a normalized field, checking the area invariant."""
    area = field.exp_integral(2)
    if area is None:
        raise UsageError(f"family '{family}' provides no area rule")
    if abs(area - surface.total_area) > AREA_MATCH_TOL * max(1.0, surface.total_area):
        raise NormalizationError(
            f"family '{family}': area {area!r} misses target "
            f"{surface.total_area!r} beyond {AREA_MATCH_TOL}"
        )
    lo, hi = field.bounds()
    return ConformalMetric(
        surface=surface,
        field=field,
        family=family,
        params=dict(params),
        C=float(C),
        area=float(area),
        u_min=float(lo),
        u_max=float(hi),
    )


def base_metric(surface: HyperbolicSurface) -> ConformalMetric:
    field = ConstantField(0.0, surface.total_area)
    return make_metric(surface, field, "base", {}, 0.0)


def normalize_area(area_of_C, target, lo, hi, *, tol=1e-10, max_iter=200):
    """Solve area(C) = target for the normalization constant by bisection.

    area_of_C must be continuous and increasing on [lo, hi]; the bracket
    is expanded geometrically if it does not straddle the target.
    """
    f_lo = area_of_C(lo) - target
    f_hi = area_of_C(hi) - target
    grow = 0
    while f_lo > 0.0 and grow < 60:
        lo -= max(1.0, hi - lo)
        f_lo = area_of_C(lo) - target
        grow += 1
    while f_hi < 0.0 and grow < 120:
        hi += max(1.0, hi - lo)
        f_hi = area_of_C(hi) - target
        grow += 1
    if f_lo > 0.0 or f_hi < 0.0:
        raise NormalizationError(
            f"no normalization bracket: area({lo})={f_lo + target}, "
            f"area({hi})={f_hi + target}, target={target}"
        )
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = area_of_C(mid) - target
        if f_mid == 0.0:
            return mid
        if f_mid < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            return 0.5 * (lo + hi)
    raise NormalizationError(
        f"bisection stalled after {max_iter} iterations, bracket [{lo}, {hi}]"
    )


def normalize_area_positive(area_of_C, target, lo, hi, *, tol=1e-14, max_iter=200):
    """normalize_area variant for constants constrained to (0, inf).

    Bisects in log C so the bracket can shrink toward 0 without crossing it.
    """
    if lo <= 0.0 or hi <= lo:
        raise DomainError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    log_C = normalize_area(
        lambda t: area_of_C(math.exp(t)),
        target,
        math.log(lo),
        math.log(hi),
        tol=tol,
        max_iter=max_iter,
    )
    return math.exp(log_C)


def total_area(metric, mesh=None, method="auto"):
    """Total area of g, by the field's own rule or by mesh quadrature.

    Mesh methods: 'three_point' averages exp(2u) over triangle corners,
    'centroid' evaluates at the Euclidean centroid of the raw corners.
    """
    if method in ("auto", "chart"):
        val = metric.field.exp_integral(2)
        if val is not None:
            return float(val)
        if method == "chart":
            raise UsageError(f"family '{metric.family}' has no chart area rule")
        method = "three_point"
    if mesh is None:
        raise UsageError(f"mesh quadrature '{method}' needs a mesh")
    w = metric.factor_at(mesh.xy[:, 0], mesh.xy[:, 1])
    if method == "three_point":
        per_tri = np.mean(w[mesh.tris], axis=1)
    elif method == "centroid":
        cx = np.mean(mesh.xy[mesh.tris, 0], axis=1)
        cy = np.mean(mesh.xy[mesh.tris, 1], axis=1)
        per_tri = metric.factor_at(cx, cy)
    else:
        raise UsageError(f"unknown area method '{method}'")
    return float(np.sum(mesh.tri_area_sigma * per_tri))


def gaussian_curvature(metric, x, y):
    """Curvature of g at disk points (needs an analytic Laplacian)."""
    if not metric.field.analytic_laplacian:
        raise UsageError(f"family '{metric.family}' has no analytic Laplacian")
    lap = metric.field.laplacian(x, y)
    return -np.exp(-2.0 * metric.field.values(x, y)) * (1.0 + lap)


@dataclass(frozen=True)
class NonpositivityResult:
    nonpositive: bool
    min_excess: float     # min over samples of 1 + L_sigma u
    tol: float
    method: str           # 'analytic' or 'mesh'
    certified: bool       # family carries an analytic sign proof


ANALYTIC_SIGN_TOL = 1e-6
MESH_SIGN_TOL = 1e-2


def nonpositivity_check(metric, mesh) -> NonpositivityResult:
    """Decide whether K_g <= 0 by sampling 1 + L_sigma u.

    With an analytic Laplacian the samples are the raw mesh vertices plus
    triangle centroids and the tolerance is tight; otherwise the Laplacian
    is approximated by the lumped stiffness action and the tolerance is
    loose (second-order consistency only at interior regular vertices).
    """
    x, y = mesh.xy[:, 0], mesh.xy[:, 1]
    if metric.field.analytic_laplacian:
        cx = np.mean(mesh.xy[mesh.tris, 0], axis=1)
        cy = np.mean(mesh.xy[mesh.tris, 1], axis=1)
        parts = [
            np.asarray(metric.field.laplacian(x, y), dtype=float).ravel(),
            np.asarray(metric.field.laplacian(cx, cy), dtype=float).ravel(),
        ]
        probes = metric.field.sign_probe_points()
        if probes is not None:
            px, py = probes
            parts.append(
                np.asarray(metric.field.laplacian(px, py), dtype=float).ravel()
            )
        ex = 1.0 + np.concatenate(parts)
        tol, method = ANALYTIC_SIGN_TOL, "analytic"
    else:
        from .spectral import cotangent_stiffness, sigma_vertex_mass

        K = cotangent_stiffness(mesh)
        m = sigma_vertex_mass(mesh)
        u = metric.u_raw(mesh)
        u_rep = np.zeros(mesh.n_rep)
        u_rep[mesh.rep] = u
        ex = 1.0 - (K @ u_rep) / m
        tol, method = MESH_SIGN_TOL, "mesh"
    min_excess = float(np.min(ex))
    return NonpositivityResult(
        nonpositive=bool(min_excess >= -tol),
        min_excess=min_excess,
        tol=tol,
        method=method,
        certified=bool(metric.field.curvature_sign_certificate),
    )


def schwarz_upper_bound(inj_radius: float) -> float:
    """Upper bound for max u over nonpositively curved normalized g."""
    if inj_radius <= 0.0:
        raise DomainError(f"injectivity radius must be positive, got {inj_radius}")
    return -math.log(math.tanh(0.5 * inj_radius))


@dataclass(frozen=True)
class GaussBonnetResult:
    value: float
    expected: float
    rel_error: float
    method: str


def gauss_bonnet(metric, mesh, method="auto") -> GaussBonnetResult:
    """Total curvature of g against the exact target 2 pi chi.

    The integral reduces to -(base area) - integral of L_sigma u.  The
    'chart' path evaluates the Laplacian integral by the family rule;
    the 'mesh' path uses the identity that the all-ones vector lies in
    the kernel of the stiffness matrix, so the discrete Laplacian
    integral is the (tiny) accumulated round-off of 1^T K u.
    """
    expected = 2.0 * math.pi * mesh.euler_characteristic()
    base_area = mesh.total_area_sigma()
    if method == "auto":
        method = "chart" if metric.field.laplacian_integral() is not None else "mesh"
    if method == "chart":
        lap_int = metric.field.laplacian_integral()
        if lap_int is None:
            raise UsageError(f"family '{metric.family}' has no Laplacian rule")
    elif method == "mesh":
        from .spectral import cotangent_stiffness

        K = cotangent_stiffness(mesh)
        u = metric.u_raw(mesh)
        u_rep = np.zeros(mesh.n_rep)
        u_rep[mesh.rep] = u
        lap_int = -float(np.sum(K @ u_rep))
    else:
        raise UsageError(f"unknown Gauss-Bonnet method '{method}'")
    value = -base_area - lap_int
    return GaussBonnetResult(
        value=float(value),
        expected=float(expected),
        rel_error=float(abs(value - expected) / abs(expected)),
        method=method,
    )


def to_descriptor(metric) -> dict:
    doc = {
        "version": 1,
        "family": metric.family,
        "params": dict(metric.params),
    }
    if isinstance(metric, ConformalMetric):
        doc.update(
            C=metric.C,
            area=metric.area,
            min_u=metric.u_min,
            max_u=metric.u_max,
        )
    return doc


def save_descriptor(metric, path):
    with open(path, "w") as fh:
        json.dump(to_descriptor(metric), fh, indent=2)
        fh.write("\n")


def load_descriptor(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def from_descriptor(doc, surface=None):
    """Rebuild a metric from a descriptor dict (or path), bit-stable."""
    if isinstance(doc, (str, bytes)):
        doc = load_descriptor(doc)
    from . import families

    return families.from_descriptor(doc, surface=surface)
