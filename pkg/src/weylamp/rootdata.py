"""Exact root-system, weight-lattice and Weyl-group combinatorics.

Conventions used throughout the package:

* weights of the group live in the fundamental-weight basis, so the j-th
  simple root has coordinates ``cartan[:, j]`` and ``cartan[i][j]`` is the
  pairing of the j-th simple root with the i-th simple coroot;
* elements of the coweight side live in the simple-coroot basis, so the
  canonical pairing of a weight with a coweight is the plain dot product;
* the metric is the Killing form ``B(x, y) = sum_{roots a} a(x) a(y)``
  restricted to the split Cartan; its inverse is the inner product on the
  weight side (``gram``).

All lattice arithmetic is done with ``fractions.Fraction``; floats only
appear in the analytic helpers (``d_factor``, ``spectral_gap``).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction as Q
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
SUPPORTED = {("A", 1), ("A", 2), ("A", 3), ("B", 2), ("C", 2), ("G", 2)}
WEYL_ORDER_CAP = 10**6

_DUAL_SERIES = {"A": "A", "B": "C", "C": "B", "D": "D", "E": "E", "F": "F", "G": "G"}


class RootDatumError(ValueError):
    pass


def cartan_matrix(series: str, rank: int) -> list[list[int]]:
    """Cartan matrix with entry [i][j] = <alpha_j, alpha_i_check> (Bourbaki order)."""
    a = [[2 * (i == j) for j in range(rank)] for i in range(rank)]
    for i in range(rank - 1):
        a[i][i + 1] = -1
        a[i + 1][i] = -1
    if series == "A":
        pass
    elif series == "B":
        # last simple root short: <alpha_{r-1}, alpha_r_check> = -2
        if rank < 2:
            raise RootDatumError("B-series needs rank >= 2")
        a[rank - 1][rank - 2] = -2
    elif series == "C":
        if rank < 2:
            raise RootDatumError("C-series needs rank >= 2")
        a[rank - 2][rank - 1] = -2
    elif series == "G":
        if rank != 2:
            raise RootDatumError("G-series has rank 2 only")
        a = [[2, -3], [-1, 2]]
    elif series == "D":
        if rank < 3:
            raise RootDatumError("D-series needs rank >= 3")
        a = [[2 * (i == j) for j in range(rank)] for i in range(rank)]
        for i in range(rank - 2):
            a[i][i + 1] = -1
            a[i + 1][i] = -1
        a[rank - 3][rank - 1] = -1
        a[rank - 1][rank - 3] = -1
    else:
        raise RootDatumError(f"unsupported series {series!r}")
    return a


# ---------------------------------------------------------------------------
# small exact linear algebra


def _mat_inv_q(m: list[list[Q]]) -> list[list[Q]]:
    """Inverse of a small rational matrix by Gauss-Jordan elimination."""
    n = len(m)
    aug = [[Q(m[i][j]) for j in range(n)] + [Q(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise RootDatumError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Q(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _matvec_q(m, v):
    return tuple(sum(m[i][j] * v[j] for j in range(len(v))) for i in range(len(m)))


@dataclass(frozen=True)
class Weight:
    """Exact weight: coordinates in the fundamental-weight basis of its lattice.

    ``lattice`` is "group" for X*(T0) weights and "dual" for characters of
    the dual torus (coordinates then refer to the dual group's fundamental
    weights).
    """

    coords: tuple[Q, ...]
    lattice: str = "dual"

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Q(c) for c in self.coords))
        if self.lattice not in ("group", "dual"):
            raise RootDatumError(f"unknown lattice tag {self.lattice!r}")

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def __add__(self, other):
        return Weight(tuple(a + b for a, b in zip(self.coords, other.coords)), self.lattice)

    def __sub__(self, other):
        return Weight(tuple(a - b for a, b in zip(self.coords, other.coords)), self.lattice)

    def __neg__(self):
        return Weight(tuple(-a for a in self.coords), self.lattice)


def coords_of(w, lattice="dual") -> tuple[Q, ...]:
    if isinstance(w, Weight):
        return w.coords
    return tuple(Q(c) for c in w)


@dataclass(frozen=True)
class StandardLevi:
    """Standard Levi subgroup given by a subset of simple-root indices."""

    subset: tuple[int, ...]
    positive_roots: tuple[tuple[int, ...], ...]  # fw coords, subset-supported
    root_indices: tuple[int, ...]  # indices into rd.positive_roots
    dual_subtorus_basis: tuple[tuple[int, ...], ...]  # theta-coordinate unit vectors


class WeylGroup:
    """Materialized Weyl group acting on fundamental-weight coordinates."""

    def __init__(self, gens: list[np.ndarray], cap: int = WEYL_ORDER_CAP):
        self.generators = [g.astype(np.int64) for g in gens]
        r = gens[0].shape[0] if gens else 0
        seen = {}
        ident = np.eye(r, dtype=np.int64)
        frontier = [ident]
        seen[ident.tobytes()] = ident
        while frontier:
            nxt = []
            for m in frontier:
                for g in self.generators:
                    prod = g @ m
                    key = prod.tobytes()
                    if key not in seen:
                        seen[key] = prod
                        nxt.append(prod)
            frontier = nxt
            if len(seen) > cap:
                raise RootDatumError(f"Weyl group exceeds cap {cap}")
        self.elements = sorted(seen.values(), key=lambda m: m.tobytes())
        self.order = len(self.elements)
        self.stack = np.stack(self.elements) if self.elements else np.zeros((0, r, r), np.int64)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return self.order


class RootDatum:
    """Root datum of a split simple group with a fixed isogeny type."""

    def __init__(self, series: str, rank: int, isogeny: str, _cartan=None):
        if isogeny not in ("sc", "adjoint"):
            raise RootDatumError(f"isogeny must be 'sc' or 'adjoint', got {isogeny!r}")
        if (series, rank) not in SUPPORTED:
            raise RootDatumError(f"unsupported type {series}{rank} (v1 supports {sorted(SUPPORTED)})")
        self.series = series
        self.rank = rank
        self.isogeny = isogeny
        self.cartan = _cartan if _cartan is not None else cartan_matrix(series, rank)
        self._build()

    # -- construction -------------------------------------------------------

    def _build(self):
        r = self.rank
        a = self.cartan
        self.cartan_np = np.array(a, dtype=np.int64)
        self.cartan_inv = _mat_inv_q([[Q(a[i][j]) for j in range(r)] for i in range(r)])

        gens = []
        for i in range(r):
            s = np.eye(r, dtype=np.int64)
            for k in range(r):
                s[k, i] -= a[k][i]
            gens.append(s)
        self.weyl = WeylGroup(gens)

        # simultaneous closure of (root, coroot) pairs under simple reflections
        pairs = {}
        frontier = []
        for i in range(r):
            root = tuple(a[k][i] for k in range(r))
            coroot = tuple(int(j == i) for j in range(r))
            pairs[root] = coroot
            frontier.append((root, coroot))
        while frontier:
            nxt = []
            for root, coroot in frontier:
                for i in range(r):
                    nr = tuple(root[k] - root[i] * a[k][i] for k in range(r))
                    pairing = sum(a[j][i] * coroot[j] for j in range(r))
                    nc = tuple(coroot[k] - pairing * int(k == i) for k in range(r))
                    if nr not in pairs:
                        pairs[nr] = nc
                        nxt.append((nr, nc))
            frontier = nxt
        all_roots = sorted(pairs)
        pos = []
        for root in all_roots:
            rc = _matvec_q(self.cartan_inv, [Q(c) for c in root])
            if all(c >= 0 for c in rc):
                pos.append(root)
        if 2 * len(pos) != len(all_roots):
            raise RootDatumError("root enumeration failed to split into +/-")
        self.positive_roots = tuple(pos)
        self.positive_coroots = tuple(pairs[root] for root in pos)
        self.n_pos = len(pos)
        self.dim_d = self.n_pos + r

        self.rho = tuple(Q(1) for _ in range(r))  # fw coords
        self.rho_root_coords = _matvec_q(self.cartan_inv, self.rho)

        # Killing form on the Cartan, coroot basis
        bmat = [[Q(0)] * r for _ in range(r)]
        for root in all_roots:
            for k in range(r):
                for l in range(r):
                    bmat[k][l] += Q(root[k] * root[l])
        self.killing = bmat
        self.gram_q = _mat_inv_q(bmat)  # inner product on weight side, fw basis
        self.gram = np.array([[float(v) for v in row] for row in self.gram_q])
        self.killing_np = np.array([[float(v) for v in row] for row in bmat])

        w0 = None
        neg = set()
        for root in pos:
            neg.add(tuple(-c for c in root))
        for m in self.weyl:
            if all(tuple(int(v) for v in m @ np.array(root)) in neg for root in pos):
                w0 = m
                break
        if w0 is None:
            raise RootDatumError("no longest element found")
        self.w0 = w0

        self.levis = self._build_levis()
        self._orbit_cache: dict[tuple, np.ndarray] = {}
        self._dual: RootDatum | None = None

    def _build_levis(self):
        r = self.rank
        out = []
        for mask in range(1 << r):
            subset = tuple(i for i in range(r) if mask >> i & 1)
            if len(subset) == r:
                continue  # proper Levis only
            idx = []
            roots = []
            for k, root in enumerate(self.positive_roots):
                rc = _matvec_q(self.cartan_inv, [Q(c) for c in root])
                if all(rc[j] == 0 for j in range(r) if j not in subset):
                    idx.append(k)
                    roots.append(root)
            basis = tuple(tuple(int(i == j) for i in range(r)) for j in subset)
            out.append(StandardLevi(subset, tuple(roots), tuple(idx), basis))
        return out

    # -- exact pairings ------------------------------------------------------

    def pair(self, weight, coweight) -> Q:
        """Canonical pairing <weight, coweight> (fw coords x coroot coords)."""
        wc = coords_of(weight)
        return sum(Q(a) * Q(b) for a, b in zip(wc, coweight))

    def pairings_with_coroots(self, weight) -> list[Q]:
        wc = coords_of(weight)
        return [sum(Q(a) * Q(b) for a, b in zip(wc, cr)) for cr in self.positive_coroots]

    def gram_pair(self, lam, mu) -> Q:
        lc, mc = coords_of(lam), coords_of(mu)
        return sum(lc[i] * self.gram_q[i][j] * mc[j] for i in range(self.rank) for j in range(self.rank))

    def norm(self, lam) -> float:
        return math.sqrt(float(self.gram_pair(lam, lam)))

    def root_coords(self, weight) -> tuple[Q, ...]:
        """Coordinates of a weight in the simple-root basis."""
        return _matvec_q(self.cartan_inv, coords_of(weight))

    def dominant(self, weight) -> bool:
        return all(c >= 0 for c in coords_of(weight))

    def dominant_rep(self, coords) -> tuple[tuple[Q, ...], int]:
        """Dominant Weyl-orbit representative and the orbit stabilizer order."""
        v = list(coords_of(coords))
        changed = True
        while changed:
            changed = False
            for i in range(self.rank):
                if v[i] < 0:
                    ci = v[i]
                    for k in range(self.rank):
                        v[k] -= ci * self.cartan[k][i]
                    changed = True
        dom = tuple(v)
        return dom, self.stabilizer_order(dom)

    def stabilizer_order(self, coords) -> int:
        return self.weyl.order // len(self.orbit(coords))

    def orbit(self, coords) -> list[tuple[Q, ...]]:
        """Distinct Weyl images of a weight (exact)."""
        start = coords_of(coords)
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for v in frontier:
                for i in range(self.rank):
                    w = tuple(v[k] - v[i] * self.cartan[k][i] for k in range(self.rank))
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        return sorted(seen)

    # -- the dual datum ------------------------------------------------------

    def dual(self) -> "RootDatum":
        """Dual root datum: transposed Cartan matrix, flipped isogeny."""
        if self._dual is None:
            r = self.rank
            at = [[self.cartan[j][i] for j in range(r)] for i in range(r)]
            self._dual = RootDatum(
                _DUAL_SERIES[self.series],
                r,
                "adjoint" if self.isogeny == "sc" else "sc",
                _cartan=at,
            )
        return self._dual

    def dual_weight_lattice_ok(self, weight) -> bool:
        """Integrality of a dual-torus character for this isogeny type.

        The dual of a simply connected group is adjoint: characters of its
        torus form the root lattice of the dual group.
        """
        c = coords_of(weight)
        if any(q.denominator != 1 for q in c):
            return False
        if self.isogeny == "sc":
            rc = self.dual().root_coords(c)
            return all(q.denominator == 1 for q in rc)
        return True

    # -- named operations ----------------------------------------------------

    def dominance_leq(self, lam, mu, integral: bool = True) -> bool:
        """True iff mu - lam is a nonnegative (integral) sum of simple roots."""
        lc, mc = coords_of(lam), coords_of(mu)
        if len(lc) != len(mc):
            raise RootDatumError("lattice mismatch in dominance_leq")
        diff = tuple(b - a for a, b in zip(lc, mc))
        coeffs = _matvec_q(self.cartan_inv, diff)
        if any(c < 0 for c in coeffs):
            return False
        if integral and any(c.denominator != 1 for c in coeffs):
            return False
        return True

    def dT(self, t_coords) -> float:
        """d(T) = min over simple roots of <alpha, T> (T in coroot coords)."""
        t = [Q(c) if not isinstance(c, float) else c for c in t_coords]
        vals = []
        for i in range(self.rank):
            vals.append(sum(float(self.cartan[j][i]) * float(t[j]) for j in range(self.rank)))
        return min(vals)

    # analytic helpers on i*a0^* (imaginary spectral parameters, fw coords)

    def _abs_pairings(self, im_coords) -> np.ndarray:
        im = np.asarray(im_coords, dtype=np.float64)
        cr = np.array([[float(q) for q in c] for c in self.positive_coroots])
        return np.abs(cr @ im)

    def d_factor(self, im_coords) -> float:
        """Levi-minimized root-pairing product D(lambda) of the geometric bound."""
        u = self._abs_pairings(im_coords)
        lam_norm = math.sqrt(float(np.asarray(im_coords) @ self.gram @ np.asarray(im_coords)))
        classical = self.series in ("A", "B", "C", "D")
        best = math.inf
        for levi in self.levis:
            inside = set(levi.root_indices)
            outside = [k for k in range(self.n_pos) if k not in inside]
            vals = np.sqrt(1.0 + u[outside])
            if classical:
                best = min(best, float(np.prod(vals)))
            else:
                take = 2 * self.rank
                if len(vals) < take:
                    continue
                top = np.sort(vals)[::-1][:take]
                best = min(best, float(np.prod(top)))
        if not classical:
            best /= math.log(2.0 + lam_norm)
        return best

    def spectral_gap(self, im_coords, tol: float = 1e-10) -> float:
        """min_{w != 1} ||w mu - mu||, cross-checked against the root formula."""
        im = np.asarray(im_coords, dtype=np.float64)
        orbit_min = math.inf
        for m in self.weyl:
            if np.array_equal(m, np.eye(self.rank, dtype=np.int64)):
                continue
            d = m @ im - im  # matrices act on column fw coords
            orbit_min = min(orbit_min, math.sqrt(float(d @ self.gram @ d)))
        u = self._abs_pairings(im)
        root_norms = [self.norm(root) for root in self.positive_roots]
        wall_min = min(u[k] * root_norms[k] for k in range(self.n_pos))
        if not (abs(orbit_min - wall_min) <= tol * (1.0 + abs(orbit_min))):
            raise RootDatumError(
                f"spectral gap formulas disagree: {orbit_min} vs {wall_min}"
            )
        return wall_min

    # -- serialization -------------------------------------------------------

    def key(self) -> str:
        return f"{self.series}{self.rank}{'sc' if self.isogeny == 'sc' else 'adj'}"

    def to_json(self) -> dict:
        def qs(v):
            return str(Q(v))

        return {
            "schema_version": SCHEMA_VERSION,
            "series": self.series,
            "rank": self.rank,
            "isogeny": self.isogeny,
            "cartan": self.cartan,
            "simple_roots": [[self.cartan[k][i] for k in range(self.rank)] for i in range(self.rank)],
            "simple_coroots": [list(c) for c in np.eye(self.rank, dtype=int).tolist()],
            "fundamental_weights": np.eye(self.rank, dtype=int).tolist(),
            "positive_roots": [list(map(int, root)) for root in self.positive_roots],
            "positive_coroots": [list(map(int, c)) for c in self.positive_coroots],
            "rho": [qs(c) for c in self.rho],
            "gram": [[qs(v) for v in row] for row in self.gram_q],
            "dim_d": self.dim_d,
            "weyl_order": self.weyl.order,
            "levis": [list(l.subset) for l in self.levis],
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------


def cache_dir() -> Path:
    return Path(os.environ.get("CHEVALLEY_CACHE_DIR", "./cache"))


def build_root_datum(series: str, rank: int, isogeny: str, cache: bool = True) -> RootDatum:
    """Construct (and JSON-cache) a root datum; validates all invariants."""
    rd = RootDatum(series, rank, isogeny)
    if cache:
        try:
            d = cache_dir()
            d.mkdir(parents=True, exist_ok=True)
            path = d / f"rootdatum_{rd.key()}.json"
            if not path.exists():
                path.write_text(json.dumps(rd.to_json(), sort_keys=True, indent=1))
        except OSError:
            pass
    return rd


_GROUP_ALIASES = {"sc": "sc", "adj": "adjoint", "adjoint": "adjoint"}


def parse_group(spec: str) -> RootDatum:
    """Parse compact group labels like 'A1sc', 'A2adj', 'B2sc'."""
    spec = spec.strip()
    series = spec[0].upper()
    i = 1
    while i < len(spec) and spec[i].isdigit():
        i += 1
    rank = int(spec[1:i])
    iso = _GROUP_ALIASES.get(spec[i:].lower())
    if iso is None:
        raise RootDatumError(f"cannot parse isogeny in group spec {spec!r}")
    return build_root_datum(series, rank, iso)
