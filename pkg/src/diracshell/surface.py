"""Quadrature meshes on the two admissible surface classes.

Spheres get a Fibonacci-spiral layout with equal-area weights; locally
deformed planes get a cell-centered tensor grid on a truncation disk,
lifted by the graph map (x1, x2) -> (x1, x2, nu*phi) with the metric
Jacobian sqrt(1 + nu^2 |grad phi|^2) folded into the weights.  Normals
point outwards of the upper region (towards x3 < nu*phi for graphs).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class BumpProfile:
    """Compactly supported radial bump of a given radius and amplitude.

    The default profile A * exp(1 - 1/(1 - (r/R)^2)) is smooth and vanishes
    with all derivatives at r = R, which avoids quadrature artifacts at the
    support edge.  A custom profile(r) may be supplied; it must vanish with
    two derivatives for r >= radius.
    """

    radius: float
    amplitude: float
    profile: Optional[Callable] = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("bump radius must be positive")

    def height(self, r):
        r = np.asarray(r, dtype=float)
        if self.profile is not None:
            return np.asarray(self.profile(r), dtype=float)
        out = np.zeros_like(r)
        inside = r < self.radius
        q = (r[inside] / self.radius) ** 2
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - q))
        return out

    def height_xy(self, x1, x2):
        return self.height(np.hypot(x1, x2))

    def gradient(self, x1, x2, step=None):
        """Planar gradient of the height, by central differences.

        The default step 1e-6*radius keeps the truncation error far below
        the quadrature error of any realistic mesh.
        """
        hs = step if step is not None else 1e-6 * self.radius
        gx = (self.height_xy(x1 + hs, x2) - self.height_xy(x1 - hs, x2)) / (2 * hs)
        gy = (self.height_xy(x1, x2 + hs) - self.height_xy(x1, x2 - hs)) / (2 * hs)
        return gx, gy


@dataclass(frozen=True)
class SurfaceMesh:
    nodes: np.ndarray        # (n, 3)
    normals: np.ndarray      # (n, 3), unit, outward of the upper region
    weights: np.ndarray      # (n,), positive surface-measure weights
    h: float                 # mesh size: max nearest-neighbor distance
    kind: str                # "sphere" or "graph"
    radius: float = 0.0      # sphere radius (sphere kind)
    nu: float = 0.0          # deformation strength (graph kind)
    r_trunc: float = 0.0     # truncation radius (graph kind)
    flat_mask: Optional[np.ndarray] = None   # graph kind: node on the flat part F

    def __post_init__(self):
        for name in ("nodes", "normals", "weights"):
            getattr(self, name).setflags(write=False)
        if self.flat_mask is not None:
            self.flat_mask.setflags(write=False)

    @property
    def n(self):
        return len(self.nodes)

    def dump(self, path):
        """Plain-text table: x y z nx ny nz w flat_flag, one node per line."""
        flat = self.flat_mask if self.flat_mask is not None else np.ones(self.n, dtype=bool)
        with open(path, "w") as f:
            for p, nrm, w, fl in zip(self.nodes, self.normals, self.weights, flat):
                f.write("%.17g %.17g %.17g %.17g %.17g %.17g %.17g %d\n"
                        % (p[0], p[1], p[2], nrm[0], nrm[1], nrm[2], w, int(fl)))


def _max_nearest_neighbor(nodes):
    d2 = ((nodes[:, None, :] - nodes[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min(axis=1)).max())


def make_sphere(radius, n):
    """Fibonacci-spiral quadrature mesh on the sphere of given radius.

    Nodes are quasi-uniform with equal-area weights 4 pi R^2 / n; the i-th
    node sits at colatitude arccos(1 - 2(i+1/2)/n) and longitude
    pi (1+sqrt(5)) i.  Normals are x/R.
    """
    if n < 8:
        raise ValueError("need at least 8 nodes on the sphere")
    if not radius > 0:
        raise ValueError("sphere radius must be positive")
    i = np.arange(n) + 0.5
    colat = np.arccos(1 - 2 * i / n)
    lon = np.pi * (1 + np.sqrt(5.0)) * i
    nodes = radius * np.stack([np.cos(lon) * np.sin(colat),
                               np.sin(lon) * np.sin(colat),
                               np.cos(colat)], axis=1)
    normals = nodes / radius
    weights = np.full(n, 4 * np.pi * radius * radius / n)
    h = _max_nearest_neighbor(nodes)
    return SurfaceMesh(nodes=nodes, normals=normals.copy(), weights=weights,
                       h=h, kind="sphere", radius=float(radius))


def make_graph(nu, bump, n_core, r_trunc):
    """Tensor quadrature on the truncation disk, lifted by the graph map.

    A cell-centered uniform grid with about n_core points covers the square
    [-r_trunc, r_trunc]^2 and is restricted to the disk of radius r_trunc.
    The weight of a node over base point (x1, x2) is cell_area * J_nu with
    J_nu = sqrt(1 + nu^2 |grad phi|^2); the normal is (nu gx, nu gy, -1)/J_nu,
    i.e. it points towards x3 < nu*phi.
    """
    if not r_trunc > bump.radius:
        raise ValueError("truncation radius must exceed the bump radius")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    side = max(4, int(round(np.sqrt(n_core))))
    dx = 2 * r_trunc / side
    c = (np.arange(side) + 0.5) * dx - r_trunc
    X1, X2 = np.meshgrid(c, c, indexing="ij")
    x1 = X1.ravel()
    x2 = X2.ravel()
    keep = np.hypot(x1, x2) <= r_trunc
    x1, x2 = x1[keep], x2[keep]
    gx, gy = bump.gradient(x1, x2)
    jac = np.sqrt(1.0 + nu * nu * (gx * gx + gy * gy))
    nodes = np.stack([x1, x2, nu * bump.height_xy(x1, x2)], axis=1)
    normals = np.stack([nu * gx, nu * gy, -np.ones_like(x1)], axis=1) / jac[:, None]
    weights = dx * dx * jac
    flat = np.hypot(x1, x2) >= bump.radius
    return SurfaceMesh(nodes=nodes, normals=normals, weights=weights,
                       h=dx, kind="graph", nu=float(nu), r_trunc=float(r_trunc),
                       flat_mask=flat)


def default_truncation_radius(bump_radius, m, a_max):
    """R_b + 6/sqrt(m^2 - a_max^2): kernel decay makes the discarded tail negligible."""
    if not abs(a_max) < m:
        raise ValueError("a_max must lie inside the gap")
    return bump_radius + 6.0 / np.sqrt(m * m - a_max * a_max)


def mesh_tolerance(mesh, coeff=0.32):
    """Discretization tolerance c*h, c calibrated on the unit-sphere identity suite.

    The default c makes the n=512 unit sphere pass the squared-Cauchy
    identity check at 5e-2.
    """
    return coeff * mesh.h
