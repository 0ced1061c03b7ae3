"""Shared fixtures: one surface and its meshes, built once per session.

Mesh construction at level 4 takes a couple of seconds, so everything that
can share a mesh does.  Tests that mutate nothing may use these freely;
tests that need a different level build their own.
"""

from __future__ import annotations

import pytest

from conformal_lab import HyperbolicSurface, build_mesh


@pytest.fixture(scope="session")
def surface():
    return HyperbolicSurface()


@pytest.fixture(scope="session")
def mesh2(surface):
    return build_mesh(surface.domain, 2)


@pytest.fixture(scope="session")
def mesh3(surface):
    return build_mesh(surface.domain, 3)


@pytest.fixture(scope="session")
def mesh4(surface):
    return build_mesh(surface.domain, 4)
