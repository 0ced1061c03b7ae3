"""Closed-form entropy bounds attached to a conformal deformation.

Three independent quantities live here: the conformal-average factor that
squeezes measure entropy down and topological entropy up, the curvature
gap sqrt(2 pi |chi| / A) separating the two, and a covering-number bound
on topological entropy from the volume of a small coordinate ball.

Everything is a pure function of scalars or of quadratures the families
already provide; no dynamics is simulated.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, UsageError

__all__ = [
    "EntropyBounds",
    "katok_bounds",
    "universal_gap",
    "coding_ball_count",
    "coding_entropy_bound",
]


@dataclass(frozen=True)
class EntropyBounds:
    """Entropy bounds for one normalized metric.

    katok_factor is the area-normalized mean of e^u; by Cauchy-Schwarz
    against the fixed total area of e^{2u} it never exceeds 1, so the
    measure-entropy bound sits at or below the base value and the
    topological-entropy bound at or above it.
    """

    katok_factor: float
    h_mu_upper: float
    h_top_lower: float
    universal_gap: float
    coding_upper: float = None

    def to_dict(self) -> dict:
        out = {
            "katok_factor": self.katok_factor,
            "h_mu_upper": self.h_mu_upper,
            "h_top_lower": self.h_top_lower,
            "universal_gap": self.universal_gap,
        }
        if self.coding_upper is not None:
            out["coding_upper"] = self.coding_upper
        return out


def _mean_exp_u(metric, mesh):
    """Quadrature of e^u over the surface divided by the base area."""
    val = metric.field.exp_integral(1)
    if val is None:
        if mesh is None:
            raise UsageError(
                f"family '{metric.family}' has no chart rule for the "
                "e^u integral and no mesh was supplied"
            )
        w = np.exp(metric.u_raw(mesh))
        per_tri = np.mean(w[mesh.tris], axis=1)
        val = float(np.sum(mesh.tri_area_sigma * per_tri))
    return float(val) / metric.surface.total_area


def katok_bounds(metric, mesh=None, *, base_entropy=1.0) -> EntropyBounds:
    """Entropy bounds for an area-normalized conformal metric.

    The base metric has curvature -1, so its measure and topological
    entropies coincide at 1; `base_entropy` overrides that common value
    when a differently normalized base is in play.
    """
    if base_entropy <= 0.0:
        raise ParameterError(f"base entropy must be positive, got {base_entropy}")
    factor = _mean_exp_u(metric, mesh)
    if not 0.0 < factor:
        raise DomainError(f"conformal average came out nonpositive: {factor}")
    return EntropyBounds(
        katok_factor=factor,
        h_mu_upper=base_entropy * factor,
        h_top_lower=base_entropy / factor,
        universal_gap=universal_gap(
            metric.surface.total_area, metric.surface.euler
        ),
    )


def universal_gap(area: float, chi: int) -> float:
    """The curvature-free separator sqrt(2 pi |chi| / area).

    Any metric of that area and Euler characteristic has measure entropy
    at most this value and topological entropy at least this value.
    """
    if area <= 0.0:
        raise DomainError(f"area must be positive, got {area}")
    if chi >= 0:
        raise DomainError(f"Euler characteristic must be negative, got {chi}")
    return math.sqrt(2.0 * math.pi * abs(chi) / area)


def coding_ball_count(volume: float, dim: int, rho: float) -> int:
    """Number of disjoint rho/4-balls that fit by volume alone."""
    if volume <= 0.0:
        raise ParameterError(f"volume must be positive, got {volume}")
    if int(dim) != dim or dim < 2:
        raise ParameterError(f"dimension must be an integer >= 2, got {dim}")
    if rho <= 0.0:
        raise ParameterError(f"separation rho must be positive, got {rho}")
    eps = 0.25 * rho
    nu = (eps * math.sqrt(math.pi)) ** dim / math.gamma(0.5 * dim + 1.0)
    return int(math.floor(volume / nu))


def coding_entropy_bound(volume: float, dim: int, rho: float) -> float:
    """Upper bound (ln N)/eps on topological entropy from ball packing.

    eps is rho/4 and N counts euclidean eps-balls fitting in the volume;
    a manifold whose systole keeps orbits rho-separated cannot code more
    than N symbols per eps of time.
    """
    count = coding_ball_count(volume, dim, rho)
    if count < 2:
        raise ParameterError(
            f"a ball of radius {0.25 * rho} outweighs the volume {volume} "
            f"(count {count}); no coding bound below two symbols"
        )
    return math.log(count) / (0.25 * rho)
