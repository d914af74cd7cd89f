"""Macdonald's p-adic Plancherel measure on the compact dual torus.

The unnormalized density at t is ``prod_{a > 0} |1 - t^a|^2 / |1 - t^a/p|^2``
over the positive roots of the dual group, with the Sato-Tate limit (drop
the denominator) at p = infinity.  The normalization constant is computed
numerically; the probability-mass invariant is the self-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from weylamp import _kernels
from weylamp.invariant import InvariantFunction
from weylamp.regions import Region
from weylamp.rootdata import RootDatum

__all__ = ["PlancherelQuadrature", "PlancherelMeasure", "QuadratureError", "SATO_TATE"]

SATO_TATE = math.inf


class QuadratureError(RuntimeError):
    pass


def torus_grid(rank: int, n: int) -> np.ndarray:
    """Uniform product grid on [0,1)^rank, deterministic ij order."""
    axes = [np.arange(n) / n] * rank
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, rank)


@dataclass
class PlancherelQuadrature:
    """Product trapezoid rule on the torus: n nodes per axis, uniform weights."""

    n: int = 48
    max_doublings: int = 3
    tol: float = 1e-8

    def nodes(self, rank: int, n: int | None = None) -> np.ndarray:
        return torus_grid(rank, n or self.n)


class PlancherelMeasure:
    """mu_pl,p for a finite prime, or the Sato-Tate measure at p = infinity."""

    def __init__(self, rd: RootDatum, p, quad: PlancherelQuadrature | None = None):
        if p != SATO_TATE:
            p = int(p)
            if p < 2:
                raise ValueError("p must be a prime >= 2 or SATO_TATE")
        self.rd = rd
        self.dd = rd.dual()
        self.p = p
        self.quad = quad or PlancherelQuadrature()
        self._alphas = np.array(
            [[float(c) for c in root] for root in self.dd.positive_roots], dtype=np.float64
        )
        self._dens_cache: dict[int, np.ndarray] = {}
        self.z_residual = None
        self._z = None

    @property
    def pinv(self) -> float:
        return 0.0 if self.p == SATO_TATE else 1.0 / self.p

    # -- density ---------------------------------------------------------------

    def density(self, thetas: np.ndarray) -> np.ndarray:
        """Unnormalized Macdonald density at compact-torus points."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        return _kernels.macdonald_grid(self._alphas, thetas, self.pinv)

    def density_grid(self, n: int) -> np.ndarray:
        if n not in self._dens_cache:
            self._dens_cache[n] = self.density(self.quad.nodes(self.rd.rank, n))
        return self._dens_cache[n]

    def normalization(self) -> float:
        """Mean unnormalized density, stabilized by grid doubling."""
        if self._z is None:
            n = self.quad.n
            z = float(np.mean(self.density_grid(n)))
            for _ in range(self.quad.max_doublings):
                z2 = float(np.mean(self.density_grid(2 * n)))
                if abs(z2 - z) <= self.quad.tol * max(1.0, abs(z2)):
                    self.z_residual = abs(z2 - z)
                    self._z = z2
                    self._zn = 2 * n
                    return self._z
                n *= 2
                z = z2
            raise QuadratureError(
                f"normalization did not stabilize for {self.rd.key()}, p={self.p}"
            )
        return self._z

    def grid_weights(self, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(nodes, probability weights) on a fixed grid; weights sum to 1."""
        self.normalization()
        n = n or self._zn
        dens = self.density_grid(n)
        return self.quad.nodes(self.rd.rank, n), dens / float(np.sum(dens))

    # -- integration -------------------------------------------------------------

    def _values(self, f, thetas: np.ndarray) -> np.ndarray:
        if isinstance(f, InvariantFunction):
            return f.eval_theta(thetas)
        if callable(f):
            return np.asarray(f(thetas))
        return np.full(thetas.shape[0], complex(f))

    def integrate(self, f, tol: float | None = None) -> complex:
        """mu_pl,p(f) by normalized quadrature with adaptive doubling."""
        tol = tol or self.quad.tol
        z = self.normalization()
        n = self.quad.n
        prev = None
        for _ in range(self.quad.max_doublings + 1):
            nodes = self.quad.nodes(self.rd.rank, n)
            dens = self.density_grid(n)
            vals = self._values(f, nodes)
            cur = complex(np.mean(vals * dens) / z)
            if prev is not None and abs(cur - prev) <= tol * (1.0 + abs(cur)):
                return cur
            prev = cur
            n *= 2
        raise QuadratureError(
            f"integral did not converge to {tol} after {self.quad.max_doublings} doublings"
        )

    def l2_norm(self, f, tol: float | None = None) -> float:
        val = self.integrate(lambda th: np.abs(self._values(f, th)) ** 2, tol)
        return math.sqrt(max(val.real, 0.0))

    def open_set_mass(self, u: Region, n: int | None = None) -> float:
        """Mass of a union of W-orbit balls (0 with a warning for empty U)."""
        if u.empty:
            return 0.0
        nodes, w = self.grid_weights(n)
        inside = u.contains(nodes)
        return float(np.sum(w[inside]))
