"""The commutative *-algebra of Weyl-invariant functions on the dual torus.

Elements are stored sparsely over dominant characters of the dual torus in
one of two bases: orbit averages ``e_lam = |W|^{-1} sum_w t^{w lam}`` or
Weyl characters ``h_lam`` (traces of irreducible representations of the
dual group, expanded through Freudenthal's multiplicity recursion).

Coefficients are exact rational pairs ``(re, im)`` whenever possible and
complex doubles otherwise; the representation is tagged by ``exact``.

Torus points are kept in log coordinates ``t = exp(x + 2*pi*i*theta)``
with x, theta written in the simple-root basis of the group, which is the
basis dual to the dual group's fundamental weights.  Pairings with dual
characters are then plain dot products and theta is periodic mod 1
componentwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction as Q
from pathlib import Path

import numpy as np

from weylamp import _kernels
from weylamp.rootdata import RootDatum, RootDatumError, Weight, cache_dir, coords_of

__all__ = [
    "InvariantFunction",
    "TorusPoint",
    "orbit_average",
    "weyl_character",
    "to_character_basis",
    "to_orbit_basis",
    "evaluate",
    "star",
    "exponent_A",
    "l1_norm_bound",
    "support_radius",
    "char_table",
    "weyl_dimension",
    "rho_p_point",
    "h_at_rho_p",
    "height_drop_histogram",
    "l1_coefficient_bound",
    "constant",
    "multiply",
    "torus_weyl_matrices",
    "torus_metric",
    "hermitian_components",
]


# ---------------------------------------------------------------------------
# exact complex coefficients: (Q, Q) pairs when exact, Python complex otherwise


def _cx(v):
    if isinstance(v, tuple):
        return (Q(v[0]), Q(v[1]))
    if isinstance(v, (int, Q)):
        return (Q(v), Q(0))
    if isinstance(v, float):
        return (Q(v), Q(0))
    return complex(v)


def _cadd(a, b):
    if isinstance(a, tuple) and isinstance(b, tuple):
        return (a[0] + b[0], a[1] + b[1])
    return _cfloat(a) + _cfloat(b)


def _cmul(a, b):
    if isinstance(a, tuple) and isinstance(b, tuple):
        return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])
    return _cfloat(a) * _cfloat(b)


def _cscale(a, s):
    if isinstance(a, tuple) and isinstance(s, (int, Q)):
        return (a[0] * s, a[1] * s)
    return _cfloat(a) * complex(s)


def _cconj(a):
    if isinstance(a, tuple):
        return (a[0], -a[1])
    return a.conjugate()


def _cfloat(a):
    if isinstance(a, tuple):
        return complex(float(a[0]), float(a[1]))
    return complex(a)


def _cabs(a):
    if isinstance(a, tuple):
        if a[1] == 0:
            return abs(a[0])
        return abs(_cfloat(a))
    return abs(a)


def _ciszero(a):
    if isinstance(a, tuple):
        return a[0] == 0 and a[1] == 0
    return a == 0


# ---------------------------------------------------------------------------
# torus coordinates


def torus_weyl_matrices(rd: RootDatum) -> np.ndarray:
    """Weyl action on simple-root coordinates of a0^* (integer matrices)."""
    if not hasattr(rd, "_torus_weyl"):
        a = np.array(rd.cartan, dtype=float)
        ainv = np.linalg.inv(a)
        mats = []
        for s in rd.weyl:
            m = ainv @ s @ a
            mi = np.rint(m).astype(np.int64)
            if not np.allclose(m, mi, atol=1e-9):
                raise RootDatumError("torus Weyl matrix is not integral")
            mats.append(mi)
        rd._torus_weyl = np.stack(mats)
    return rd._torus_weyl


def torus_metric(rd: RootDatum) -> np.ndarray:
    """Killing metric written in simple-root coordinates (A^T gram A)."""
    a = np.array(rd.cartan, dtype=float)
    return a.T @ rd.gram @ a


@dataclass
class TorusPoint:
    """Point t = exp(x + 2*pi*i*theta) of the (covering) dual torus."""

    rd: RootDatum
    x: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64).reshape(self.rd.rank)
        self.theta = np.mod(np.asarray(self.theta, dtype=np.float64).reshape(self.rd.rank), 1.0)

    @classmethod
    def compact(cls, rd, theta):
        return cls(rd, np.zeros(rd.rank), theta)

    @property
    def on_compact(self) -> bool:
        return bool(np.all(np.abs(self.x) < 1e-14))

    def power(self, lam) -> complex:
        """t^lam for a dual character lam (fw coordinates of the dual group)."""
        lamf = np.array([float(Q(c)) for c in coords_of(lam)])
        return complex(np.exp(float(lamf @ self.x) + 2j * np.pi * float(lamf @ self.theta)))

    def conj_inv_mismatch(self, w_index: int) -> float:
        """How far w(conj t) * t is from 1, for the w-th torus Weyl matrix."""
        mats = torus_weyl_matrices(self.rd)
        m = mats[w_index]
        dx = m @ self.x + self.x
        dth = m @ self.theta - self.theta
        dth = np.abs(dth - np.rint(dth))
        return float(np.max(np.abs(dx)) + np.max(dth))

    def hermitian_witness(self, tol: float = 1e-12):
        """Index of a Weyl element w with w(conj t) = t^{-1}, or None."""
        mats = torus_weyl_matrices(self.rd)
        for i in range(len(mats)):
            if self.conj_inv_mismatch(i) <= tol:
                return i
        return None


def rho_p_point(rd: RootDatum, p: int) -> TorusPoint:
    """The point p^rho of the dual torus (Satake parameter of the identity)."""
    x = math.log(p) * np.array([float(c) for c in rd.rho_root_coords])
    return TorusPoint(rd, x, np.zeros(rd.rank))


# ---------------------------------------------------------------------------
# hermitian components of the dual torus

_RESIDUE_RESOLUTION = 24


@dataclass(frozen=True)
class HermitianComponent:
    """One stratum { exp(x + 2*pi*i*theta) : w(conj t) = t^{-1} } of the witness w.

    x runs over ker(T_w + 1), theta over an affine set residue + ker(T_w - 1).
    """

    w_index: int
    x_basis: tuple[tuple[Q, ...], ...]
    theta_residues: tuple[tuple[Q, ...], ...]
    theta_basis: tuple[tuple[Q, ...], ...]


def _rational_kernel(m: np.ndarray) -> list[tuple[Q, ...]]:
    """Basis of the rational kernel of an integer matrix (exact elimination)."""
    rows = [[Q(int(v)) for v in row] for row in m]
    n = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = Q(1) / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Q(0)] * n
        v[fc] = Q(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(tuple(v))
    return basis


def hermitian_components(rd: RootDatum) -> list[HermitianComponent]:
    """Strata of the hermitian set, one per Weyl element with solutions.

    theta residues are enumerated exactly at resolution 1/q on the covering
    torus; q = 24 covers every elementary divisor of w - 1 for the supported
    ranks.
    """
    if hasattr(rd, "_herm_components"):
        return rd._herm_components
    mats = torus_weyl_matrices(rd)
    r = rd.rank
    q = _RESIDUE_RESOLUTION
    comps = []
    grids = np.stack(np.meshgrid(*([np.arange(q)] * r), indexing="ij"), axis=-1).reshape(-1, r)
    for wi, m in enumerate(mats):
        xb = _rational_kernel(m + np.eye(r, dtype=np.int64))
        if wi != 0 and not xb:
            # no noncompact directions and theta-residues are measure zero
            # inside the compact torus, which is sampled separately
            continue
        mm = (m - np.eye(r, dtype=np.int64)).astype(np.int64)
        ok = np.all((grids @ mm.T) % q == 0, axis=1)
        sols = grids[ok]
        tb = _rational_kernel(mm)
        # drop residues that differ by a kernel direction at this resolution
        keep = []
        seen = set()
        tbq = [np.array([float(v) for v in b]) for b in tb]
        for s in sols:
            keep_key = tuple(int(v) for v in s)
            red = _reduce_mod_kernel(s / q, tbq, q)
            if red not in seen:
                seen.add(red)
                keep.append(tuple(Q(int(v), q) for v in s))
        comps.append(
            HermitianComponent(
                wi,
                tuple(xb),
                tuple(keep),
                tuple(tb),
            )
        )
    rd._herm_components = comps
    return comps


def _reduce_mod_kernel(theta, kernel_vectors, q):
    v = np.asarray(theta, dtype=float)
    for b in kernel_vectors:
        # subtract the integer-resolution multiple along b with smallest support
        nz = np.nonzero(np.abs(b) > 1e-12)[0]
        if len(nz) == 0:
            continue
        c = v[nz[0]] / b[nz[0]]
        v = v - c * b
    v = np.mod(np.rint(v * q), q)
    return tuple(int(x) for x in v)


# ---------------------------------------------------------------------------
# invariant functions


class InvariantFunction:
    """Sparse W-invariant function on the dual torus.

    ``basis`` is "e" (orbit averages) or "h" (Weyl characters); ``coeffs``
    maps dominant dual weights (fw coordinates of the dual group, exact
    rationals) to coefficients.
    """

    def __init__(self, rd: RootDatum, coeffs: dict, basis: str = "e"):
        if basis not in ("e", "h"):
            raise RootDatumError(f"unknown basis {basis!r}")
        self.rd = rd
        self.dd = rd.dual()
        self.basis = basis
        self.coeffs = {}
        for lam, c in coeffs.items():
            lam = coords_of(lam)
            if not self.dd.dominant(lam):
                raise RootDatumError(f"support weight {lam} is not dominant")
            c = _cx(c)
            if not _ciszero(c):
                self.coeffs[lam] = c
        self._exp_cache = None

    # -- bookkeeping ---------------------------------------------------------

    @property
    def exact(self) -> bool:
        return all(isinstance(c, tuple) for c in self.coeffs.values())

    def support(self):
        return sorted(self.coeffs)

    def copy(self):
        return InvariantFunction(self.rd, dict(self.coeffs), self.basis)

    def __add__(self, other):
        if isinstance(other, (int, float, Q)):
            other = constant(self.rd, other, self.basis)
        if other.basis != self.basis:
            raise RootDatumError("basis mismatch in addition")
        out = dict(self.coeffs)
        for lam, c in other.coeffs.items():
            out[lam] = _cadd(out.get(lam, (Q(0), Q(0))), c)
        return InvariantFunction(self.rd, out, self.basis)

    def __sub__(self, other):
        return self + (other * -1)

    def __mul__(self, scalar):
        if isinstance(scalar, InvariantFunction):
            return multiply(self, scalar)
        if isinstance(scalar, (int, Q)):
            return InvariantFunction(
                self.rd, {l: _cscale(c, Q(scalar)) for l, c in self.coeffs.items()}, self.basis
            )
        return InvariantFunction(
            self.rd, {l: _cfloat(c) * complex(scalar) for l, c in self.coeffs.items()}, self.basis
        )

    __rmul__ = __mul__

    def __repr__(self):
        terms = ", ".join(f"{self.basis}[{tuple(map(str, l))}]*{c}" for l, c in list(self.coeffs.items())[:4])
        more = "..." if len(self.coeffs) > 4 else ""
        return f"<InvariantFunction {self.rd.key()} {terms}{more}>"

    # -- expansion to exponential sums ----------------------------------------

    def exp_dict(self) -> dict:
        """Full (non-dominant) expansion {exponent: coefficient}, exact kept."""
        f = self if self.basis == "e" else to_orbit_basis(self)
        out = {}
        worder = self.dd.weyl.order
        for lam, c in f.coeffs.items():
            orb = self.dd.orbit(lam)
            # e_lam = (|Stab|/|W|) * sum over distinct orbit exponents
            per = _cscale(c, Q(worder // len(orb), worder))
            for nu in orb:
                out[nu] = _cadd(out.get(nu, (Q(0), Q(0))), per)
        return out

    def exp_terms(self):
        """(freqs, coeffs) arrays for the grid kernels."""
        if self._exp_cache is None:
            d = self.exp_dict()
            freqs = np.array([[float(q) for q in nu] for nu in sorted(d)], dtype=np.float64)
            coeffs = np.array([_cfloat(d[nu]) for nu in sorted(d)], dtype=np.complex128)
            if len(d) == 0:
                freqs = np.zeros((0, self.rd.rank))
                coeffs = np.zeros(0, dtype=np.complex128)
            self._exp_cache = (freqs, coeffs)
        return self._exp_cache

    # -- evaluation ------------------------------------------------------------

    def eval_theta(self, thetas: np.ndarray) -> np.ndarray:
        """Evaluate on compact-torus points (M, r)."""
        freqs, coeffs = self.exp_terms()
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        return _kernels.exp_sums(freqs, coeffs, thetas)

    def eval_log(self, xs: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        freqs, coeffs = self.exp_terms()
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        return _kernels.exp_sums(freqs, coeffs, thetas, xs)

    def __call__(self, t: TorusPoint) -> complex:
        return complex(self.eval_log(t.x[None, :], t.theta[None, :])[0])


def constant(rd: RootDatum, value, basis: str = "e") -> InvariantFunction:
    zero = tuple(Q(0) for _ in range(rd.rank))
    return InvariantFunction(rd, {zero: _cx(value)}, basis)


def orbit_average(rd: RootDatum, lam) -> InvariantFunction:
    """e_lam, the averaged Weyl-orbit exponential sum."""
    lam = coords_of(lam)
    if not rd.dual().dominant(lam):
        raise RootDatumError(f"{lam} is not dominant on the dual side")
    return InvariantFunction(rd, {lam: 1}, "e")


# ---------------------------------------------------------------------------
# Freudenthal character tables


def weyl_dimension(dd: RootDatum, lam) -> int:
    """Dimension of the dual-group irreducible with highest weight lam."""
    lam = coords_of(lam)
    num, den = Q(1), Q(1)
    rho = dd.rho
    for cr in dd.positive_coroots:
        num *= dd.pair(tuple(a + b for a, b in zip(lam, rho)), cr)
        den *= dd.pair(rho, cr)
    val = num / den
    if val.denominator != 1:
        raise RootDatumError("Weyl dimension is not an integer")
    return int(val)


_char_cache: dict = {}


def _char_cache_path(dd: RootDatum, lam) -> Path:
    tag = "_".join(str(c) for c in lam)
    return cache_dir() / f"char_{dd.key()}_{dd.content_hash()}_{tag}.json"


def char_table(dd: RootDatum, lam) -> dict:
    """Weight multiplicities of the irreducible rep with highest weight lam.

    Returns {dominant weight (fw coords): multiplicity} via Freudenthal's
    recursion with exact rational arithmetic.
    """
    lam = tuple(Q(c) for c in coords_of(lam))
    if any(c.denominator != 1 for c in lam) or not dd.dominant(lam):
        raise RootDatumError(f"{lam} is not dominant integral")
    key = (dd.key(), lam)
    if key in _char_cache:
        return _char_cache[key]
    path = _char_cache_path(dd, lam)
    if path.exists():
        try:
            data = json.loads(path.read_text())
            table = {tuple(Q(c) for c in mu): int(m) for mu, m in data["mults"]}
            _char_cache[key] = table
            return table
        except (ValueError, KeyError):
            pass

    r = dd.rank
    # box enumeration of dominant weights lam - A n, n in [0, nmax]
    w0lam = tuple(int(v) for v in (dd.w0 @ np.array([int(c) for c in lam])))
    nmax = dd.root_coords(tuple(a - b for a, b in zip(lam, w0lam)))
    nmax = [int(v) for v in nmax]
    dom = []
    def rec(idx, n):
        if idx == r:
            mu = list(lam)
            for j in range(r):
                for k in range(r):
                    mu[k] -= n[j] * dd.cartan[k][j]
            mu = tuple(mu)
            if dd.dominant(mu):
                dom.append(mu)
            return
        for v in range(nmax[idx] + 1):
            rec(idx + 1, n + [v])
    rec(0, [])

    rho = dd.rho
    hlam = sum(Q(a) * Q(b) for a, b in zip(lam, dd.rho_root_coords))
    dom.sort(key=lambda mu: (-(sum(Q(a) * Q(b) for a, b in zip(mu, dd.rho_root_coords))), mu))
    lam_rho = tuple(a + b for a, b in zip(lam, rho))
    nlam = dd.gram_pair(lam_rho, lam_rho)
    mult = {lam: Q(1)}
    pos_roots = [tuple(Q(v) for v in root) for root in dd.positive_roots]
    for mu in dom:
        if mu == lam:
            continue
        mu_rho = tuple(a + b for a, b in zip(mu, rho))
        denom = nlam - dd.gram_pair(mu_rho, mu_rho)
        if denom == 0:
            raise RootDatumError("Freudenthal denominator vanished")
        acc = Q(0)
        hmu = sum(Q(a) * Q(b) for a, b in zip(mu, dd.rho_root_coords))
        for root in pos_roots:
            hroot = sum(Q(a) * Q(b) for a, b in zip(root, dd.rho_root_coords))
            k = 1
            while hmu + k * hroot <= hlam:
                nu = tuple(a + k * b for a, b in zip(mu, root))
                nud, _ = dd.dominant_rep(nu)
                m = mult.get(nud, Q(0))
                if m:
                    acc += m * dd.gram_pair(nu, root)
                k += 1
        val = 2 * acc / denom
        if val.denominator != 1:
            raise RootDatumError("Freudenthal produced a non-integer multiplicity")
        if val:
            mult[mu] = val
    table = {mu: int(m) for mu, m in mult.items()}

    dim = weyl_dimension(dd, lam)
    total = sum(m * len(dd.orbit(mu)) for mu, m in table.items())
    if total != dim:
        raise RootDatumError(f"character table of {lam} sums to {total}, expected {dim}")

    _char_cache[key] = table
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(
                {
                    "schema_version": 1,
                    "group": dd.key(),
                    "lam": [str(c) for c in lam],
                    "mults": [[[str(c) for c in mu], m] for mu, m in sorted(table.items())],
                },
                sort_keys=True,
            )
        )
    except OSError:
        pass
    return table


def weyl_character(rd: RootDatum, lam) -> InvariantFunction:
    """h_lam as an exact integer combination of orbit averages."""
    dd = rd.dual()
    lam = coords_of(lam)
    if not rd.dual_weight_lattice_ok(lam):
        raise RootDatumError(f"{lam} is not a character of the dual torus for isogeny {rd.isogeny}")
    table = char_table(dd, lam)
    worder = dd.weyl.order
    coeffs = {mu: Q(m) * Q(worder, dd.stabilizer_order(mu)) for mu, m in table.items()}
    return InvariantFunction(rd, coeffs, "e")


def to_orbit_basis(f: InvariantFunction) -> InvariantFunction:
    """Expand a character-basis element into orbit averages (exact)."""
    if f.basis == "e":
        return f
    out = {}
    for lam, c in f.coeffs.items():
        h = weyl_character(f.rd, lam)
        for mu, hc in h.coeffs.items():
            out[mu] = _cadd(out.get(mu, (Q(0), Q(0))), _cmul(c, hc))
    return InvariantFunction(f.rd, out, "e")


def to_character_basis(f: InvariantFunction) -> InvariantFunction:
    """Triangular elimination along dominance order onto the h_lam basis."""
    if f.basis == "h":
        return f
    dd = f.dd
    remaining = dict(f.coeffs)
    out = {}
    height = lambda mu: sum(Q(a) * Q(b) for a, b in zip(mu, dd.rho_root_coords))  # noqa: E731
    while remaining:
        mu = max(remaining, key=lambda m: (height(m), m))
        c = remaining.pop(mu)
        if _ciszero(c):
            continue
        lead = Q(dd.weyl.order, dd.stabilizer_order(mu))
        d = _cscale(c, Q(1) / lead) if isinstance(c, tuple) else _cfloat(c) / float(lead)
        out[mu] = d
        h = weyl_character(f.rd, mu)
        for nu, hc in h.coeffs.items():
            if nu == mu:
                continue
            remaining[nu] = _cadd(remaining.get(nu, (Q(0), Q(0))), _cmul(d, _cscale(hc, -1)))
        remaining = {k: v for k, v in remaining.items() if not _ciszero(v)}
    return InvariantFunction(f.rd, out, "h")


# ---------------------------------------------------------------------------
# algebra operations


def multiply(f: InvariantFunction, g: InvariantFunction) -> InvariantFunction:
    """Product via exponential-sum convolution, recollected into e_lam."""
    fd, gd = f.exp_dict(), g.exp_dict()
    dd = f.dd
    conv = {}
    for nu1, c1 in fd.items():
        for nu2, c2 in gd.items():
            nu = tuple(a + b for a, b in zip(nu1, nu2))
            conv[nu] = _cadd(conv.get(nu, (Q(0), Q(0))), _cmul(c1, c2))
    out = {}
    worder = dd.weyl.order
    for nu, c in conv.items():
        if not dd.dominant(nu):
            continue
        out[nu] = _cscale(c, Q(worder, dd.stabilizer_order(nu))) if isinstance(c, tuple) else _cfloat(
            c
        ) * (worder / dd.stabilizer_order(nu))
    return InvariantFunction(f.rd, out, "e")


def star(f: InvariantFunction) -> InvariantFunction:
    """Involution: conjugate coefficients, lam -> -w0(lam)."""
    dd = f.dd
    w0 = dd.w0
    out = {}
    for lam, c in f.coeffs.items():
        lam_star = tuple(-sum(Q(int(w0[k, j])) * lam[j] for j in range(dd.rank)) for k in range(dd.rank))
        out[lam_star] = _cadd(out.get(lam_star, (Q(0), Q(0))), _cconj(c))
    return InvariantFunction(f.rd, out, f.basis)


def evaluate(f: InvariantFunction, t: TorusPoint) -> complex:
    return f(t)


def exponent_A(f: InvariantFunction) -> Q:
    """max <lam, rho> over the character-basis support (0 for f = 0)."""
    h = to_character_basis(f)
    if not h.coeffs:
        return Q(0)
    rho_rc = f.rd.rho_root_coords
    return max(sum(Q(a) * Q(b) for a, b in zip(lam, rho_rc)) for lam in h.coeffs)


_HIST_CACHE: dict = {}


def height_drop_histogram(rd: RootDatum, lam) -> dict[int, int]:
    """{k: number of weights of V_lam at height <lam - weight, rho> = k}.

    Heights drop from the top in integer steps, so h_lam(p^rho) equals
    p^{<lam, rho>} times sum_k N_k p^{-k}.
    """
    lam = coords_of(lam)
    key = (rd.key(), lam)
    if key not in _HIST_CACHE:
        dd = rd.dual()
        table = char_table(dd, lam)
        rho_rc = rd.rho_root_coords
        top = sum(Q(a) * Q(b) for a, b in zip(lam, rho_rc))
        hist: dict[int, int] = {}
        for mu, m in table.items():
            for nu in dd.orbit(mu):
                drop = top - sum(Q(a) * Q(b) for a, b in zip(nu, rho_rc))
                if drop.denominator != 1 or drop < 0:
                    raise RootDatumError("weight height drop must be a nonnegative integer")
                hist[int(drop)] = hist.get(int(drop), 0) + m
        _HIST_CACHE[key] = hist
    return _HIST_CACHE[key]


def h_at_rho_p(rd: RootDatum, lam, p: int):
    """h_lam(p^rho) as (top exponent, exact tail sum_k N_k p^{-k}).

    The value is p^top * tail; the tail is an exact rational in [1, dim].
    """
    rho_rc = rd.rho_root_coords
    top = sum(Q(a) * Q(b) for a, b in zip(coords_of(lam), rho_rc))
    hist = height_drop_histogram(rd, lam)
    tail = sum((Q(m, p**k) for k, m in hist.items()), Q(0))
    return top, tail


def l1_norm_bound(f: InvariantFunction, p: int) -> float:
    """Lemma-style L1 bound: sum over the h-basis of |c_lam| h_lam(p^rho)."""
    h = to_character_basis(f)
    total = 0.0
    for lam, c in h.coeffs.items():
        top, tail = h_at_rho_p(f.rd, lam, p)
        total += float(_cabs(c)) * (p ** float(top)) * float(tail)
    return total


def l1_coefficient_bound(f: InvariantFunction) -> float:
    """B with ||S^-1 f||_1 <= B p^{A(f)} for every p: sum |c_lam| dim V_lam."""
    h = to_character_basis(f)
    return float(sum(_cabs(c) * weyl_dimension(f.dd, lam) for lam, c in h.coeffs.items()))


def support_radius(f: InvariantFunction) -> Q:
    """Height a(f): max over e-support and group roots of |<root, lam-cochar>|."""
    g = to_orbit_basis(f)
    if not g.coeffs:
        return Q(0)
    rd = f.rd
    dd = f.dd
    best = Q(0)
    for lam in g.coeffs:
        cochar = dd.root_coords(lam)  # coordinates in the simple-coroot basis of rd
        for root in rd.positive_roots:
            v = abs(sum(Q(a) * Q(b) for a, b in zip(root, cochar)))
            best = max(best, v)
    return best
