"""Batch kernels for disk distances and triangle areas, with optional numba.

Backend selection: the environment variable CONFORMAL_LAB_NUMBA picks the
implementation at import time ("1"/"true" forces numba, "0"/"false" forces
pure numpy).  The default is numpy: benchmarks/bench_kernels.py shows the
vectorized path beating the jitted loops at every size these pipelines
use (the kernels are memory-bound one-pass maps), so the jit exists as a
measured alternative, not the default.  set_backend() switches at runtime.
Both paths compute the same quantities; tests compare them directly.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


_use_numba = False


def set_backend(mode="auto"):
    """Select the kernel backend: "1"/"on"/"numba" for the jitted loops,
    anything else (including "auto") for vectorized numpy."""
    global _use_numba
    mode = str(mode).strip().lower()
    if mode in ("1", "true", "yes", "on", "numba"):
        _use_numba = HAVE_NUMBA
    else:
        _use_numba = False
    return backend_name()


def backend_name():
    return "numba" if _use_numba else "numpy"


def pair_distances_numpy(ax, ay, bx, by):
    """Hyperbolic distances between point arrays in the unit disk.

    Uses d = 2 artanh |a - b| / |1 - conj(a) b| on disk coordinates,
    the curvature -1 normalization.
    """
    dx = bx - ax
    dy = by - ay
    num = dx * dx + dy * dy
    re = 1.0 - ax * bx - ay * by
    im = ax * by - ay * bx
    den = re * re + im * im
    t = np.sqrt(num / den)
    return 2.0 * np.arctanh(t)


@njit(cache=True)
def pair_distances_numba(ax, ay, bx, by):  # pragma: no cover - agreement tested
    n = ax.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        dx = bx[i] - ax[i]
        dy = by[i] - ay[i]
        num = dx * dx + dy * dy
        re = 1.0 - ax[i] * bx[i] - ay[i] * by[i]
        im = ax[i] * by[i] - ay[i] * bx[i]
        t = np.sqrt(num / (re * re + im * im))
        out[i] = 2.0 * np.arctanh(t)
    return out


def _corner_angles(za, zb, zc):
    # Translate za to the origin; geodesics through 0 are straight, so the
    # corner angle is the Euclidean angle between the translated images.
    u = (zb - za) / (1.0 - np.conj(za) * zb)
    v = (zc - za) / (1.0 - np.conj(za) * zc)
    dot = u.real * v.real + u.imag * v.imag
    norm = np.abs(u) * np.abs(v)
    return np.arccos(np.clip(dot / norm, -1.0, 1.0))


def tri_areas_numpy(x, y, tris):
    """Hyperbolic areas of geodesic triangles via the angle deficit.

    Each row of ``tris`` indexes three disk points; the area is
    pi - (sum of the three corner angles), exact for geodesic sides.
    """
    z = x + 1j * y
    za = z[tris[:, 0]]
    zb = z[tris[:, 1]]
    zc = z[tris[:, 2]]
    ang = _corner_angles(za, zb, zc)
    ang += _corner_angles(zb, zc, za)
    ang += _corner_angles(zc, za, zb)
    return np.pi - ang


@njit(cache=True)
def tri_areas_numba(x, y, tris):  # pragma: no cover - agreement tested
    m = tris.shape[0]
    out = np.empty(m, dtype=np.float64)
    for t in range(m):
        s = 0.0
        for k in range(3):
            ia = tris[t, k]
            ib = tris[t, (k + 1) % 3]
            ic = tris[t, (k + 2) % 3]
            za = complex(x[ia], y[ia])
            zb = complex(x[ib], y[ib])
            zc = complex(x[ic], y[ic])
            u = (zb - za) / (1.0 - np.conj(za) * zb)
            v = (zc - za) / (1.0 - np.conj(za) * zc)
            dot = u.real * v.real + u.imag * v.imag
            norm = abs(u) * abs(v)
            c = dot / norm
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            s += np.arccos(c)
        out[t] = np.pi - s
    return out


def pair_distances(ax, ay, bx, by):
    ax = np.ascontiguousarray(ax, dtype=np.float64)
    ay = np.ascontiguousarray(ay, dtype=np.float64)
    bx = np.ascontiguousarray(bx, dtype=np.float64)
    by = np.ascontiguousarray(by, dtype=np.float64)
    if _use_numba:
        return pair_distances_numba(ax, ay, bx, by)
    return pair_distances_numpy(ax, ay, bx, by)


def tri_areas(x, y, tris):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    tris = np.ascontiguousarray(tris, dtype=np.int64)
    if _use_numba:
        return tri_areas_numba(x, y, tris)
    return tri_areas_numpy(x, y, tris)


set_backend(os.environ.get("CONFORMAL_LAB_NUMBA", "auto"))
