"""Discrete Laplace spectra of conformal metrics on the glued mesh.

The Dirichlet energy of a 2-D conformal metric does not see the
conformal factor, so one cotangent stiffness matrix (assembled from the
raw Euclidean disk coordinates) serves every metric on a mesh; it is
cached on the mesh.  The metric enters only through the lumped mass
matrix, whose vertex weights carry exp(2u).  Generalized eigenvalues
come from ARPACK shift-invert iteration around -1e-3, which factors the
positive definite matrix K + 1e-3 M once; the known constant kernel
vector seeds the iteration.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConstructionError,
    DomainError,
    MeshQualityError,
    NumericError,
    ParameterError,
    UsageError,
)

log = logging.getLogger(__name__)

GLUE_VALUE_TOL = 1e-8  # max disagreement of u across raw copies of a vertex
DENSE_CUTOFF = 600     # below this many unknowns just use a dense solve


def cotangent_stiffness(mesh) -> sp.csr_matrix:
    """Cotangent stiffness on representative vertices, cached on the mesh."""
    if mesh._stiffness is not None:
        return mesh._stiffness
    x = mesh.xy[:, 0]
    y = mesh.xy[:, 1]
    t = mesh.tris
    rows = []
    cols = []
    vals = []
    negatives = 0
    for local in range(3):
        i = t[:, local]
        j = t[:, (local + 1) % 3]
        k = t[:, (local + 2) % 3]  # corner opposite edge (i, j)
        ax, ay = x[i] - x[k], y[i] - y[k]
        bx, by = x[j] - x[k], y[j] - y[k]
        cross = ax * by - ay * bx
        if np.any(np.abs(cross) < 1e-30):
            raise MeshQualityError("degenerate triangle in stiffness assembly")
        w = 0.5 * (ax * bx + ay * by) / cross
        negatives += int(np.sum(w < 0))
        ri, rj = mesh.rep[i], mesh.rep[j]
        rows.extend([ri, rj, ri, rj])
        cols.extend([rj, ri, ri, rj])
        vals.extend([-w, -w, w, w])
    if negatives:
        log.debug("stiffness: %d negative cotangent weights tolerated", negatives)
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_rep, mesh.n_rep),
    ).tocsr()
    mesh._stiffness = K
    return K


def sigma_vertex_mass(mesh) -> np.ndarray:
    """Lumped base-metric vertex masses (one third of adjacent areas)."""
    if mesh._sigma_vertex_mass is not None:
        return mesh._sigma_vertex_mass
    m = np.zeros(mesh.n_rep)
    third = mesh.tri_area_sigma / 3.0
    for local in range(3):
        np.add.at(m, mesh.rep[mesh.tris[:, local]], third)
    mesh._sigma_vertex_mass = m
    return m


@dataclass
class SpectralSystem:
    stiffness: sp.csr_matrix
    mass: np.ndarray          # diagonal entries
    dimension: int
    mesh: object
    metric: object

    def mass_matrix(self) -> sp.dia_matrix:
        return sp.diags(self.mass)


def assemble(metric, mesh) -> SpectralSystem:
    """Stiffness plus exp(2u)-weighted lumped mass for a metric on a mesh."""
    K = cotangent_stiffness(mesh)
    u = metric.u_raw(mesh)

    # u must agree across the raw copies of each glued vertex.
    u_lo = np.full(mesh.n_rep, np.inf)
    u_hi = np.full(mesh.n_rep, -np.inf)
    np.minimum.at(u_lo, mesh.rep, u)
    np.maximum.at(u_hi, mesh.rep, u)
    spread = float(np.max(u_hi - u_lo))
    if spread > GLUE_VALUE_TOL * max(1.0, float(np.max(np.abs(u)))):
        worst = int(np.argmax(u_hi - u_lo))
        raise ConstructionError(
            f"field is not well defined on the quotient: u differs by "
            f"{spread:.3e} across copies of representative {worst}"
        )

    weight = np.exp(2.0 * u)
    mass = np.zeros(mesh.n_rep)
    third = mesh.tri_area_sigma / 3.0
    for local in range(3):
        idx = mesh.tris[:, local]
        np.add.at(mass, mesh.rep[idx], third * weight[idx])
    if not np.all(mass > 0.0) or not np.all(np.isfinite(mass)):
        raise NumericError(
            f"mass lumping produced a nonpositive or nonfinite entry "
            f"(min {mass.min():.3e}); the conformal factor overflows this mesh"
        )
    return SpectralSystem(
        stiffness=K, mass=mass, dimension=mesh.n_rep, mesh=mesh, metric=metric
    )


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray      # nondecreasing, length k+1
    vectors: np.ndarray          # (dimension, k+1), M-orthonormal columns
    residuals: np.ndarray        # ||K v - lambda M v|| / ||v||
    backward_errors: np.ndarray  # residual scaled by matrix norms
    level: int
    dimension: int

    def to_csv(self) -> str:
        lines = ["k, lambda, residual, level"]
        for i, (lam, res) in enumerate(zip(self.eigenvalues, self.residuals)):
            lines.append(f"{i}, {lam:.17g}, {res:.6e}, {self.level}")
        return "\n".join(lines) + "\n"


def _residuals(K, mass, vals, vecs):
    norm_K = float(np.max(np.abs(K).sum(axis=1)))
    norm_M = float(np.max(mass))
    raw = np.empty(len(vals))
    scaled = np.empty(len(vals))
    for j, lam in enumerate(vals):
        v = vecs[:, j]
        r = float(np.linalg.norm(K @ v - lam * (mass * v)))
        nv = float(np.linalg.norm(v))
        raw[j] = r / nv
        scaled[j] = r / ((norm_K + abs(lam) * norm_M) * nv)
    return raw, scaled


def eigenvalues(system: SpectralSystem, k: int, *, maxiter=500) -> SpectralResult:
    """Smallest k+1 generalized eigenvalues of (K, M)."""
    n = system.dimension
    if k < 0:
        raise DomainError(f"need k >= 0, got {k}")
    if k + 1 > n:
        raise DomainError(f"requested {k + 1} eigenvalues of a {n}-dim system")
    K = system.stiffness
    mass = system.mass

    if n <= DENSE_CUTOFF or k + 1 >= n - 1:
        import scipy.linalg as la

        scale = 1.0 / np.sqrt(mass)
        A = (K.toarray() * scale[None, :]) * scale[:, None]
        A = 0.5 * (A + A.T)
        vals, vecs_w = la.eigh(A)
        vals = vals[: k + 1]
        vecs = vecs_w[:, : k + 1] * scale[:, None]
    else:
        ncv = min(n - 1, max(40, 4 * (k + 1)))
        v0 = np.full(n, 1.0 / math.sqrt(n))
        try:
            vals, vecs = spla.eigsh(
                K,
                k=k + 1,
                M=sp.diags(mass).tocsc(),
                sigma=-1e-3,
                which="LM",
                mode="normal",
                v0=v0,
                ncv=ncv,
                maxiter=maxiter,
                tol=0,
            )
        except spla.ArpackNoConvergence as exc:
            raise NumericError(
                f"eigensolver failed to converge within {maxiter} iterations"
            ) from exc
        order = np.argsort(vals)
        vals = vals[order]
        vecs = vecs[:, order]

    raw, scaled = _residuals(K, mass, vals, vecs)
    return SpectralResult(
        eigenvalues=np.asarray(vals, dtype=float),
        vectors=vecs,
        residuals=raw,
        backward_errors=scaled,
        level=system.mesh.level,
        dimension=n,
    )


def rayleigh(system: SpectralSystem, f) -> float:
    """Rayleigh quotient f'Kf / f'Mf on representative vertices."""
    f = np.asarray(f, dtype=float)
    if f.shape != (system.dimension,):
        raise UsageError(
            f"vector of length {f.shape} against a {system.dimension}-dim system"
        )
    den = float(f @ (system.mass * f))
    if den == 0.0:
        raise DomainError("Rayleigh quotient of the zero vector")
    return float(f @ (system.stiffness @ f)) / den


@dataclass(frozen=True)
class DumbbellBound:
    rayleigh_1: float
    rayleigh_2: float
    total: float          # R(f1) + R(f2), the eigenvalue bound
    analytic_bound: float  # A / (4 (R2 - R1)^2)
    delta_R: float
    ramp_energy_pair: float  # continuum Dirichlet energy of both ramps


def dumbbell_test_bound(metric, mesh) -> DumbbellBound:
    """Min-Max upper bound for lambda_1 of a dumbbell member.

    Builds the two plateau-and-ramp test functions supported in the
    deformation balls (1 on the stretched core, falling linearly in the
    g-radial distance across the power-law annulus, 0 outside) and
    returns the sum of their Rayleigh quotients together with the
    closed-form annulus energy bound.
    """
    if getattr(metric, "family", None) != "dumbbell":
        raise ParameterError(
            f"dumbbell bound asked of family {getattr(metric, 'family', None)!r}"
        )
    field = metric.field
    system = assemble(metric, mesh)
    fs = []
    for anchor in field.anchors:
        r = _distances_to(mesh, anchor)
        f_raw = field.ramp_values(r)
        f = np.zeros(mesh.n_rep)
        f[mesh.rep] = f_raw
        fs.append(f)
    if np.any((fs[0] != 0.0) & (fs[1] != 0.0)):
        raise ParameterError("dumbbell test-function supports overlap")
    r1 = rayleigh(system, fs[0])
    r2 = rayleigh(system, fs[1])
    dR = field.delta_R
    return DumbbellBound(
        rayleigh_1=r1,
        rayleigh_2=r2,
        total=r1 + r2,
        analytic_bound=metric.surface.total_area / (4.0 * dR * dR),
        delta_R=dR,
        ramp_energy_pair=2.0 * field.ramp_energy(),
    )


def _distances_to(mesh, anchor):
    from . import accel

    n = mesh.n_raw
    ax = np.full(n, anchor.real)
    ay = np.full(n, anchor.imag)
    return accel.pair_distances(mesh.xy[:, 0], mesh.xy[:, 1], ax, ay)


@dataclass(frozen=True)
class SandwichResult:
    lower: np.ndarray
    upper: np.ndarray
    deformed: np.ndarray
    base: np.ndarray
    violations: int
    worst_margin: float   # most negative slack, >= 0 when all hold

    @property
    def holds(self) -> bool:
        return self.violations == 0


def conformal_eigen_sandwich(
    metric, mesh, base_result: SpectralResult, k: int, deformed_result=None
) -> SandwichResult:
    """Two-sided eigenvalue comparison against the base spectrum.

    The lumped mass matrices satisfy exp(2 min u) M_sigma <= M_g <=
    exp(2 max u) M_sigma entrywise with extrema taken over vertex values
    of u, so exp(-2 max u) lambda_k(sigma) <= lambda_k(g) <=
    exp(-2 min u) lambda_k(sigma) holds at matrix level; only round-off
    guards appear here.
    """
    if base_result.level != mesh.level:
        raise UsageError(
            f"base spectrum from level {base_result.level}, mesh level {mesh.level}"
        )
    if deformed_result is None:
        deformed_result = eigenvalues(assemble(metric, mesh), k)
    if deformed_result.level != base_result.level:
        raise UsageError("spectra computed on different mesh levels")
    m = min(k + 1, len(base_result.eigenvalues), len(deformed_result.eigenvalues))
    base = base_result.eigenvalues[:m]
    lam = deformed_result.eigenvalues[:m]
    u = metric.u_raw(mesh)
    lower = math.exp(-2.0 * float(np.max(u))) * base
    upper = math.exp(-2.0 * float(np.min(u))) * base
    # Round-off envelope: both solvers carry absolute noise of order
    # eps * ||pencil|| (visible on the zero eigenvalue), and the bounds
    # multiply the base spectrum by up to exp(-2 min u), so the guard
    # scales the same way.  True violations live at the relative scale
    # of the eigenvalues and stay far above this.
    scale = max(
        1.0,
        math.exp(-2.0 * float(np.min(u))),
        math.exp(-2.0 * float(np.max(u))),
    )
    atol = 1e-10 * scale * max(1.0, float(np.max(np.abs(base))))
    lo_slack = lam - (lower - 1e-9 * np.abs(lower) - atol)
    hi_slack = (upper + 1e-9 * np.abs(upper) + atol) - lam
    slack = np.minimum(lo_slack, hi_slack)
    violations = int(np.sum(slack < 0.0))
    return SandwichResult(
        lower=lower,
        upper=upper,
        deformed=lam,
        base=base,
        violations=violations,
        worst_margin=float(np.min(slack)),
    )
