"""W-invariant regions on the compact dual torus.

A region is a finite union of Weyl-orbit balls; each ball is stored once by
its center and expanded to the orbit on demand.  Distances use the Killing
metric written in simple-root coordinates, so they are Weyl invariant and
well defined modulo the covering lattice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from weylamp.invariant import torus_metric, torus_weyl_matrices
from weylamp.rootdata import RootDatum

__all__ = ["Region", "torus_orbit", "orbit_ball_distance", "SubtorusProjector"]

_SHIFTS_CACHE: dict = {}


def _shift_window(r: int, width: int = 1) -> np.ndarray:
    key = (r, width)
    if key not in _SHIFTS_CACHE:
        rng = range(-width, width + 1)
        _SHIFTS_CACHE[key] = np.array(list(itertools.product(rng, repeat=r)), dtype=np.float64)
    return _SHIFTS_CACHE[key]


def torus_orbit(rd: RootDatum, center) -> np.ndarray:
    """Distinct Weyl images of a compact-torus point, reduced mod 1."""
    mats = torus_weyl_matrices(rd)
    c = np.asarray(center, dtype=np.float64)
    pts = np.mod(mats @ c, 1.0)
    return np.unique(np.round(pts, 12), axis=0)


def orbit_ball_distance(rd: RootDatum, thetas: np.ndarray, center) -> np.ndarray:
    """Torus-metric distance from each theta to the Weyl orbit of center."""
    metric = torus_metric(rd)
    orbit = torus_orbit(rd, center)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    best = np.full(thetas.shape[0], np.inf)
    shifts = _shift_window(rd.rank)
    for c in orbit:
        d = np.mod(thetas - c + 0.5, 1.0) - 0.5  # nearest representative componentwise
        for s in shifts:
            v = d + s
            best = np.minimum(best, np.einsum("ij,jk,ik->i", v, metric, v))
    return np.sqrt(np.maximum(best, 0.0))


@dataclass
class Region:
    """Finite union of W-orbit balls {d(theta, W c_i) <= r_i} on the torus."""

    rd: RootDatum
    centers: list
    radii: list

    def __post_init__(self):
        self.centers = [np.asarray(c, dtype=np.float64) for c in self.centers]
        self.radii = [float(r) for r in self.radii]
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii length mismatch")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")

    @classmethod
    def ball(cls, rd, center, radius):
        return cls(rd, [center], [radius])

    @property
    def empty(self) -> bool:
        return len(self.centers) == 0

    def distances(self, thetas: np.ndarray) -> np.ndarray:
        """Signed distance to the region: negative inside, positive outside."""
        thetas = np.atleast_2d(thetas)
        out = np.full(thetas.shape[0], np.inf)
        for c, r in zip(self.centers, self.radii):
            out = np.minimum(out, orbit_ball_distance(self.rd, thetas, c) - r)
        return out

    def contains(self, thetas: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Membership; margin > 0 shrinks the region (conservative inside)."""
        return self.distances(thetas) <= -margin

    def shrink(self, factor: float) -> "Region":
        return Region(self.rd, list(self.centers), [r * factor for r in self.radii])

    def grow(self, delta: float) -> "Region":
        return Region(self.rd, list(self.centers), [r + delta for r in self.radii])

    def describe(self) -> dict:
        return {
            "centers": [list(map(float, c)) for c in self.centers],
            "radii": self.radii,
        }


class SubtorusProjector:
    """Quotient-metric distance machinery for a Levi dual subtorus.

    The subtorus direction is the span of the Levi's simple-root coordinate
    axes; distances between translates of the subtorus reduce to distances
    of metric-orthogonal projections.
    """

    def __init__(self, rd: RootDatum, subset: tuple[int, ...]):
        self.rd = rd
        self.subset = tuple(subset)
        metric = torus_metric(rd)
        r = rd.rank
        if self.subset:
            s = np.zeros((r, len(self.subset)))
            for k, j in enumerate(self.subset):
                s[j, k] = 1.0
            inner = s.T @ metric @ s
            self.proj_metric = metric - metric @ s @ np.linalg.inv(inner) @ s.T @ metric
        else:
            self.proj_metric = metric

    def orbit_distance(self, thetas: np.ndarray, center) -> np.ndarray:
        """Quotient distance from thetas*T^M to the orbit-ball center*T^M."""
        orbit = torus_orbit(self.rd, center)
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        best = np.full(thetas.shape[0], np.inf)
        shifts = _shift_window(self.rd.rank)
        for c in orbit:
            d = np.mod(thetas - c + 0.5, 1.0) - 0.5
            for s in shifts:
                v = d + s
                best = np.minimum(best, np.einsum("ij,jk,ik->i", v, self.proj_metric, v))
        return np.sqrt(np.maximum(best, 0.0))

    def set_distance(self, c1, c2) -> float:
        """Quotient distance between the subtorus-saturated orbits of c1, c2."""
        orbit1 = torus_orbit(self.rd, c1)
        return float(np.min(self.orbit_distance(orbit1, c2)))
