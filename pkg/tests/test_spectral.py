"""FEM assembly, eigenvalue solves, sandwich and dumbbell bounds."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conformal_lab import families
from conformal_lab.conformal import base_metric
from conformal_lab.errors import ConstructionError, ParameterError, UsageError
from conformal_lab.spectral import (
    assemble,
    conformal_eigen_sandwich,
    cotangent_stiffness,
    dumbbell_test_bound,
    eigenvalues,
    rayleigh,
)
from conformal_lab.surface import base_spectrum


def test_stiffness_kernel_contains_constants(mesh3):
    K = cotangent_stiffness(mesh3)
    ones = np.ones(mesh3.n_rep)
    assert np.max(np.abs(K @ ones)) < 1e-12


def test_mass_total_equals_quadrature_area(surface, mesh3):
    base = assemble(base_metric(surface), mesh3)
    assert np.sum(base.mass) == pytest.approx(4.0 * math.pi, rel=1e-12)
    shr = assemble(families.make(surface, "shrinker", eps=0.2, delta=0.1), mesh3)
    # Normalized families keep the continuum area at 4 pi; the lumped mass
    # reproduces it only to quadrature accuracy.
    assert np.sum(shr.mass) == pytest.approx(4.0 * math.pi, rel=5e-3)


def test_base_spectrum_level3(surface, mesh3):
    res = base_spectrum(surface, mesh3, 6)
    lam = res.eigenvalues
    assert lam[0] == pytest.approx(0.0, abs=1e-8)
    assert lam[1] == pytest.approx(3.789328558, rel=1e-8)
    # The octagon's symmetry forces a double eigenvalue right above.
    assert lam[2] == pytest.approx(lam[3], rel=1e-10)
    assert np.all(np.diff(lam) >= -1e-10)
    assert res.residuals.max() < 1e-10


def test_base_spectrum_level4_uses_sparse_path(surface, mesh4):
    res = base_spectrum(surface, mesh4, 3)
    assert res.dimension == 1022  # above the dense-solver cutoff
    assert res.eigenvalues[0] == pytest.approx(0.0, abs=1e-8)
    assert res.eigenvalues[1] == pytest.approx(3.828939995, rel=1e-6)
    assert res.residuals.max() < 1e-8


def test_eigenvalue_csv_header(surface, mesh3):
    res = base_spectrum(surface, mesh3, 2)
    lines = res.to_csv().splitlines()
    assert lines[0] == "k, lambda, residual, level"
    assert lines[1].startswith("0, ")
    assert lines[1].rstrip().endswith(", 3")


def test_rayleigh_of_constant_is_zero(surface, mesh3):
    system = assemble(base_metric(surface), mesh3)
    val = rayleigh(system, np.ones(mesh3.n_rep))
    assert abs(val) < 1e-12


def test_assemble_rejects_non_quotient_field(surface, mesh3):
    class BrokenMetric:
        family = "broken"

        def u_raw(self, mesh):
            return mesh.xy[:, 0]  # x is not invariant under the gluing

    with pytest.raises(ConstructionError):
        assemble(BrokenMetric(), mesh3)


@pytest.mark.parametrize(
    "family, params",
    [
        ("shrinker", {"eps": 0.2, "delta": 0.1}),
        ("stretcher", {"eps": 0.2, "delta": 0.05}),
        ("dumbbell", {"eps": 0.2, "delta": 0.01}),
        ("nonpositive_radial", {"amplitude": 1.0}),
    ],
)
def test_sandwich_holds_for_extreme_members(surface, mesh3, family, params):
    metric = families.make(surface, family, **params)
    base_res = base_spectrum(surface, mesh3, 10)
    res = conformal_eigen_sandwich(metric, mesh3, base_res, 10)
    assert res.holds
    assert res.violations == 0
    assert res.worst_margin >= 0.0
    assert np.all(res.lower <= res.upper)


def test_sandwich_level_mismatch_rejected(surface, mesh3, mesh4):
    metric = families.make(surface, "shrinker", eps=0.2, delta=0.1)
    base_res = base_spectrum(surface, mesh3, 5)
    with pytest.raises(UsageError):
        conformal_eigen_sandwich(metric, mesh4, base_res, 5)


def test_dumbbell_bound_controls_lambda1(surface, mesh3):
    metric = families.make(surface, "dumbbell", eps=0.2, delta=0.1)
    bound = dumbbell_test_bound(metric, mesh3)
    lam1 = eigenvalues(assemble(metric, mesh3), 1).eigenvalues[1]
    assert lam1 <= bound.total + 1e-8
    # Symmetric anchors give identical Rayleigh quotients.
    assert bound.rayleigh_1 == pytest.approx(bound.rayleigh_2, rel=1e-6)


def test_dumbbell_bound_decreases_with_delta(surface, mesh3):
    totals = []
    for delta in (0.2, 0.1, 0.05, 0.01):
        metric = families.make(surface, "dumbbell", eps=0.2, delta=delta)
        totals.append(dumbbell_test_bound(metric, mesh3).total)
    assert all(b < a for a, b in zip(totals, totals[1:]))
    assert totals[-1] < 1e-80  # the neck strangles the coupling completely


def test_dumbbell_ramp_energy_below_analytic_cap(surface, mesh3):
    for delta in (0.2, 0.1, 0.05):
        metric = families.make(surface, "dumbbell", eps=0.2, delta=delta)
        bound = dumbbell_test_bound(metric, mesh3)
        assert bound.ramp_energy_pair <= bound.analytic_bound
        assert bound.analytic_bound == pytest.approx(
            4.0 * math.pi / (4.0 * bound.delta_R**2), rel=1e-9
        )


def test_dumbbell_bound_rejects_other_families(surface, mesh3):
    with pytest.raises(ParameterError):
        dumbbell_test_bound(base_metric(surface), mesh3)
