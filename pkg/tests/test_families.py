"""Deformation families: profiles, normalization constants, guards."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conformal_lab import families
from conformal_lab.errors import ParameterError, UsageError
from conformal_lab.families import (
    FAMILY_NAMES,
    MIN_SPIKE_DELTA,
    bump,
    bump_jet,
    cylinder_profile,
    default_dumbbell_anchors,
    dumbbell,
    systole_shrinker,
)
from conformal_lab.geom import curve_length
from conformal_lab.hyp import disk_distance

SYSTOLE = 3.0571418389619947


# ---------------------------------------------------------------------------
# bump profile


@given(st.floats(-3.0, 3.0), st.floats(0.05, 2.0))
def test_bump_range_and_support(t, a):
    v = bump(t, a)
    assert 0.0 <= v <= 1.0
    if abs(t) <= 0.5 * a:
        assert v == 1.0
    if abs(t) >= a:
        assert v == 0.0


@given(st.floats(0.0, 2.0), st.floats(0.1, 1.5), st.floats(0.5, 3.0))
def test_bump_scale_invariance(t, a, s):
    assert bump(t, a) == pytest.approx(bump(t * s, a * s), rel=1e-11, abs=1e-12)


def test_bump_monotone_on_shoulder():
    a = 1.0
    t = np.linspace(0.5, 1.0, 200)
    v = bump(t, a)
    assert np.all(np.diff(v) <= 1e-15)


def test_bump_jet_derivatives_match_finite_differences():
    a = 0.8
    h = 1e-6
    for x in (0.45, 0.55, 0.6, 0.7):
        phi, d1, d2 = bump_jet(np.array([x]), a)
        up = bump_jet(np.array([x + h]), a)[0][0]
        dn = bump_jet(np.array([x - h]), a)[0][0]
        assert d1[0] == pytest.approx((up - dn) / (2 * h), abs=5e-6)
        assert d2[0] == pytest.approx((up - 2 * phi[0] + dn) / (h * h), abs=5e-4)


def test_bump_rejects_bad_width():
    from conformal_lab.errors import DomainError

    with pytest.raises(DomainError):
        bump(0.1, 0.0)


# ---------------------------------------------------------------------------
# shrinker


def test_shrinker_axis_value_hits_target(surface):
    metric = families.make(surface, "shrinker", eps=0.2, delta=0.1)
    # e^{u} sigma-length of the systole must equal eps, so on the axis
    # u = log(eps / systole).
    assert metric.u_at(0.0, 0.0) == pytest.approx(math.log(0.2 / SYSTOLE), rel=1e-14)
    assert metric.u_min == pytest.approx(math.log(0.2 / SYSTOLE), rel=1e-14)


def test_shrinker_systole_length(surface):
    metric = families.make(surface, "shrinker", eps=0.2, delta=0.1)
    curve = surface.systole_geodesic().curve(n=4097)
    assert curve_length(metric, curve) == pytest.approx(0.2, rel=1e-9)


def test_shrinker_area_is_normalized(surface):
    metric = families.make(surface, "shrinker", eps=0.3, delta=0.15)
    assert metric.area == pytest.approx(4.0 * math.pi, rel=1e-10)
    assert 0.0 < metric.C < 0.1  # mild inflation outside the collar


def test_shrinker_parameter_guards(surface):
    gamma = surface.systole_geodesic()
    with pytest.raises(ParameterError):
        systole_shrinker(surface, gamma, 0.0, 0.1)
    with pytest.raises(ParameterError):
        systole_shrinker(surface, gamma, SYSTOLE + 0.1, 0.1)
    with pytest.raises(ParameterError):
        systole_shrinker(surface, gamma, 0.2, 0.0)
    with pytest.raises(ParameterError):
        systole_shrinker(surface, gamma, 0.2, 0.5)  # beyond embedded collar


# ---------------------------------------------------------------------------
# stretcher


@pytest.mark.parametrize(
    "delta, u_max, seg",
    [
        (0.2, 3.85622483502636, 0.5286582112763774),
        (0.05, 18.042369811033858, 1.5989233908037044),
        (0.01, 97.20546209656813, 3.8644604625599737),
    ],
)
def test_stretcher_peak_and_segment_oracles(surface, delta, u_max, seg):
    metric = families.make(surface, "stretcher", eps=0.2, delta=delta)
    assert metric.u_max == pytest.approx(u_max, rel=1e-9)
    field = metric.field
    assert field.radial_segment_length() == pytest.approx(seg, rel=1e-9)
    # The power zone is an exact log profile, so the quadrature length and
    # the closed-form lower bound coincide to roundoff.
    assert field.radial_segment_length() == pytest.approx(
        field.radial_length_bound(), rel=1e-12
    )


def test_stretcher_peak_formula(surface):
    eps, delta = 0.2, 0.1
    metric = families.make(surface, "stretcher", eps=eps, delta=delta)
    spike = metric.field.spike
    expected = spike.log_amp + (1.0 - 0.5 * delta) * (math.log(2.0) + 1.0 / delta)
    assert metric.u_max == pytest.approx(expected, rel=1e-12)


def test_stretcher_area_normalized(surface):
    metric = families.make(surface, "stretcher", eps=0.2, delta=0.05)
    assert metric.area == pytest.approx(4.0 * math.pi, rel=1e-10)
    assert 0.9 < metric.C < 1.0


def test_spike_parameter_guards(surface):
    with pytest.raises(ParameterError):
        families.make(surface, "stretcher", eps=0.0, delta=0.1)
    with pytest.raises(ParameterError):
        # delta * log(2/eps) >= 1 makes the power zone empty
        families.make(surface, "stretcher", eps=0.2, delta=0.5)
    with pytest.raises(ParameterError):
        families.make(surface, "stretcher", eps=0.2, delta=0.5 * MIN_SPIKE_DELTA)
    with pytest.raises(ParameterError):
        # eps-ball pokes out of the fundamental domain
        families.make(surface, "stretcher", p=0.6 + 0j, eps=0.3, delta=0.1)


# ---------------------------------------------------------------------------
# dumbbell


def test_dumbbell_default_anchors(surface):
    p, q = default_dumbbell_anchors(surface)
    assert p == -q
    assert p.real == pytest.approx(-0.38844349350750934, rel=1e-15)
    assert disk_distance(p, q) == pytest.approx(1.6398625052515055, rel=1e-12)


def test_dumbbell_anchors_are_mesh_vertices(surface, mesh3):
    p, q = default_dumbbell_anchors(surface)
    d = np.hypot(mesh3.xy[:, 0] - p.real, mesh3.xy[:, 1] - p.imag)
    assert d.min() < 1e-15
    d = np.hypot(mesh3.xy[:, 0] - q.real, mesh3.xy[:, 1] - q.imag)
    assert d.min() < 1e-15


@pytest.mark.parametrize(
    "delta, delta_R",
    [(0.2, 0.5286582113), (0.1, 1.0102256697), (0.05, 1.5989233908)],
)
def test_dumbbell_separation_oracles(surface, delta, delta_R):
    metric = families.make(surface, "dumbbell", eps=0.2, delta=delta)
    assert metric.field.delta_R == pytest.approx(delta_R, rel=1e-9)


def test_dumbbell_profile_is_symmetric(surface):
    metric = families.make(surface, "dumbbell", eps=0.2, delta=0.1)
    xs = np.linspace(-0.45, 0.45, 101)
    u = metric.u_at(xs, np.zeros_like(xs))
    assert np.allclose(u, u[::-1], atol=1e-12)


def test_dumbbell_spikes_have_disjoint_supports(surface):
    eps = 0.2
    metric = families.make(surface, "dumbbell", eps=eps, delta=0.1)
    p, q = (complex(*metric.params["p"]), complex(*metric.params["q"]))
    # Outside both eps-balls u is the constant log C.
    mid = metric.u_at(0.0, 0.0)
    far = metric.u_at(0.0, 0.3)
    assert mid == pytest.approx(math.log(metric.C), rel=1e-12)
    assert far == pytest.approx(mid, rel=1e-12)
    assert disk_distance(p, q) > 2.0 * eps


def test_dumbbell_ramp_identity(surface):
    # The ramp is linear in the g-radial coordinate, so its Dirichlet
    # energy equals annulus area / delta_R^2 exactly (conformal invariance
    # reduces both to the same sigma quadrature).
    metric = families.make(surface, "dumbbell", eps=0.2, delta=0.1)
    field = metric.field
    energy = field.ramp_energy()
    area = field.annulus_area()
    dR = field.delta_R
    assert energy == pytest.approx(area / (dR * dR), rel=1e-12)


def test_dumbbell_overlapping_anchors_rejected(surface):
    with pytest.raises(ParameterError):
        dumbbell(surface, -0.05 + 0j, 0.05 + 0j, 0.2, 0.1)


# ---------------------------------------------------------------------------
# nonpositive radial


def test_radial_bounds_and_sign(surface):
    metric = families.make(surface, "nonpositive_radial", amplitude=1.0)
    assert metric.u_max == pytest.approx(0.173556, abs=1e-5)
    assert metric.u_max < 0.4406867935097715  # Schwarz cap, strict
    excess = metric.field.curvature_excess(np.linspace(0.0, 1.3, 10001))
    assert excess.min() >= 0.0
    # Full amplitude touches zero at the center.
    assert metric.field.curvature_excess(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-15)


def test_radial_area_normalized(surface):
    for amp in (0.25, 0.5, 1.0):
        metric = families.make(surface, "nonpositive_radial", amplitude=amp)
        assert metric.area == pytest.approx(4.0 * math.pi, rel=1e-10)


def test_radial_amplitude_guards(surface):
    with pytest.raises(ParameterError):
        families.make(surface, "nonpositive_radial", amplitude=-0.1)
    with pytest.raises(ParameterError):
        families.make(surface, "nonpositive_radial", amplitude=1.1)
    with pytest.raises(ParameterError):
        families.make(surface, "nonpositive_radial", amplitude=0.5, center=0.4 + 0j)


# ---------------------------------------------------------------------------
# cylinder profile


def test_cylinder_neck_value_exact():
    metric = cylinder_profile(1.0, 0.5, 2.5)
    assert metric.profile(0.0) == 0.5
    assert metric.neck == 0.5


def test_cylinder_profile_is_convex_everywhere():
    metric = cylinder_profile(1.0, 0.5, 2.5)
    r = np.linspace(0.0, 4.0, 4001)
    assert metric.profile_convexity(r).min() > 0.0


def test_cylinder_curvature_nonpositive_and_matched():
    metric = cylinder_profile(1.0, 0.5, 2.5)
    r = np.linspace(0.0, 5.0, 5001)
    K = metric.curvature(r)
    assert K.max() <= 0.0
    # Central plateau: nearly flat.
    plateau = np.linspace(0.0, metric.plateau_width, 257)
    assert np.max(np.abs(metric.curvature(plateau))) <= 0.1
    # Matched zone: exactly a cosh r, K = -1 within quadrature error.
    outer = np.linspace(2.5, 4.5, 257)
    assert np.max(np.abs(metric.curvature(outer) + 1.0)) <= 1e-6


def test_cylinder_seam_is_continuous():
    metric = cylinder_profile(1.0, 0.5, 2.5)
    m = metric.match_radius
    assert metric.profile(m - 1e-9) == pytest.approx(1.0 * math.cosh(m), rel=1e-6)
    assert metric.profile_slope(m - 1e-9) == pytest.approx(math.sinh(m), rel=1e-6)


def test_cylinder_profile_is_even():
    metric = cylinder_profile(1.0, 0.5, 2.5)
    r = np.linspace(0.0, 3.0, 31)
    assert np.allclose(metric.profile(-r), metric.profile(r), atol=0.0)
    assert np.allclose(metric.profile_slope(-r), -metric.profile_slope(r), atol=0.0)


def test_cylinder_curvature_matches_finite_differences():
    metric = cylinder_profile(1.0, 0.5, 2.5)
    h = 4e-3
    for r0 in (0.9, 1.4, 2.0):
        f0 = metric.profile(r0)
        fpp = (metric.profile(r0 + h) - 2.0 * f0 + metric.profile(r0 - h)) / (h * h)
        assert metric.curvature(r0) == pytest.approx(-fpp / f0, abs=5e-3)


def test_cylinder_parameter_guards():
    with pytest.raises(ParameterError):
        cylinder_profile(0.0, 0.5, 2.5)
    with pytest.raises(ParameterError):
        cylinder_profile(1.0, 1.5, 2.5)  # neck must sit below a
    with pytest.raises(ParameterError):
        cylinder_profile(1.0, 0.0, 2.5)
    with pytest.raises(ParameterError):
        cylinder_profile(1.0, 0.5, 0.0)


# ---------------------------------------------------------------------------
# registry


def test_make_rejects_unknown_family(surface):
    with pytest.raises(ParameterError):
        families.make(surface, "moebius_strip")


def test_family_names_registry():
    assert FAMILY_NAMES == (
        "base",
        "shrinker",
        "stretcher",
        "dumbbell",
        "nonpositive_radial",
        "cylinder",
    )


def test_from_descriptor_rejects_unknown_family(surface):
    with pytest.raises(ParameterError):
        families.from_descriptor({"version": 1, "family": "torus"}, surface=surface)


def test_from_descriptor_rejects_bad_version(surface):
    with pytest.raises(UsageError):
        families.from_descriptor({"version": 0, "family": "base"}, surface=surface)
