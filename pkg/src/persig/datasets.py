"""Seeded synthetic point clouds: the orbit and shape benchmarks.

All randomness comes from numpy's PCG64 bit generator seeded with the
user-supplied integer, so streams are reproducible across platforms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORBIT_PARAMETERS = (2.5, 3.5, 4.0, 4.1, 4.3)
SHAPE_KINDS = ("random", "circle", "sphere", "clusters", "clusters-of-clusters", "torus")

TORUS_RADII = (1.0, 0.4)
N_CLUSTERS = 5
CLUSTER_BOX = 1.5
N_GROUPS, N_SUBCLUSTERS = 3, 3
GROUP_BOX, SUBCLUSTER_OFFSET = 3.0, 0.6


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class OrbitSpec:
    r: float
    n_points: int = 1000
    seed: int | np.random.SeedSequence = 0
    sequential: bool = False


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    n_points: int = 500
    noise_sd: float = 0.1
    seed: int | np.random.SeedSequence = 0


def orbit(r: float, x0: float, y0: float, n_points: int, sequential: bool = False) -> np.ndarray:
    """Iterate the linked twist map from ``(x0, y0)``.

    ``x' = x + r y (1 - y) mod 1`` and ``y' = y + r x (1 - x) mod 1``. By
    default the ``y`` update uses the old ``x``; ``sequential=True`` uses the
    freshly updated one instead.
    """
    out = np.empty((n_points, 2))
    x, y = float(x0), float(y0)
    for n in range(n_points):
        out[n] = x, y
        x_new = (x + r * y * (1.0 - y)) % 1.0
        xs = x_new if sequential else x
        y = (y + r * xs * (1.0 - xs)) % 1.0
        x = x_new
    return out


def generate_orbit(spec: OrbitSpec) -> np.ndarray:
    if spec.n_points < 2:
        raise ValueError("an orbit needs at least 2 points")
    rng = make_rng(spec.seed)
    x0, y0 = rng.uniform(0.0, 1.0, size=2)
    return orbit(spec.r, x0, y0, spec.n_points, spec.sequential)


def _on_sphere(rng, n, dim=3):
    v = rng.normal(size=(n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _on_torus(rng, n, big, small):
    # rejection sampling so that points are uniform with respect to area
    out = np.empty((0, 3))
    while len(out) < n:
        u = rng.uniform(0, 2 * np.pi, size=2 * n)
        v = rng.uniform(0, 2 * np.pi, size=2 * n)
        w = rng.uniform(0, 1, size=2 * n)
        ok = w <= (big + small * np.cos(v)) / (big + small)
        u, v = u[ok], v[ok]
        ring = big + small * np.cos(v)
        pts = np.column_stack([ring * np.cos(u), ring * np.sin(u), small * np.sin(v)])
        out = np.vstack([out, pts])
    return out[:n]


def generate_shape(spec: ShapeSpec) -> np.ndarray:
    """Sample the named object, then add isotropic Gaussian noise."""
    if spec.noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    rng = make_rng(spec.seed)
    n = spec.n_points
    kind = spec.kind
    if kind == "random":
        pts = rng.uniform(0.0, 1.0, size=(n, 3))
    elif kind == "circle":
        theta = rng.uniform(0.0, 2 * np.pi, size=n)
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
    elif kind == "sphere":
        pts = _on_sphere(rng, n)
    elif kind == "torus":
        pts = _on_torus(rng, n, *TORUS_RADII)
    elif kind == "clusters":
        centers = rng.uniform(-CLUSTER_BOX, CLUSTER_BOX, size=(N_CLUSTERS, 3))
        pts = centers[rng.integers(0, N_CLUSTERS, size=n)]
    elif kind == "clusters-of-clusters":
        groups = rng.uniform(-GROUP_BOX, GROUP_BOX, size=(N_GROUPS, 1, 3))
        offsets = rng.uniform(-SUBCLUSTER_OFFSET, SUBCLUSTER_OFFSET, size=(N_GROUPS, N_SUBCLUSTERS, 3))
        centers = (groups + offsets).reshape(-1, 3)
        pts = centers[rng.integers(0, len(centers), size=n)]
    else:
        raise ValueError(f"unknown shape kind {kind!r}; expected one of {SHAPE_KINDS}")
    return pts + rng.normal(0.0, spec.noise_sd, size=pts.shape)


def orbit_dataset(per_class: int, n_points: int, seed: int = 0, sequential: bool = False):
    """Balanced orbit clouds and labels ``0..4`` (one per parameter ``r``)."""
    seeds = np.random.SeedSequence(seed).spawn(per_class * len(ORBIT_PARAMETERS))
    clouds, labels = [], []
    for label, r in enumerate(ORBIT_PARAMETERS):
        for i in range(per_class):
            s = seeds[label * per_class + i]
            clouds.append(generate_orbit(OrbitSpec(r, n_points, s, sequential)))
            labels.append(label)
    return clouds, np.array(labels)


def shape_dataset(per_class: int, n_points: int, noise_sd: float = 0.1, seed: int = 0):
    """Balanced shape clouds and labels ``0..5`` in :data:`SHAPE_KINDS` order."""
    seeds = np.random.SeedSequence(seed).spawn(per_class * len(SHAPE_KINDS))
    clouds, labels = [], []
    for label, kind in enumerate(SHAPE_KINDS):
        for i in range(per_class):
            s = seeds[label * per_class + i]
            clouds.append(generate_shape(ShapeSpec(kind, n_points, noise_sd, s)))
            labels.append(label)
    return clouds, np.array(labels)
