"""Integer lattices with exact symmetric bilinear forms.

A lattice here is a free Z-module of finite rank with an integer Gram matrix,
possibly indefinite and possibly degenerate.  The constructions cover the
standard K3-flavored blocks: the hyperbolic plane U, the negative E8 lattice,
the rank-22 two-form lattice U^3 + E8(-1)^2, its rank-24 extension by one more
U factor, and the (r, D, s) lattice H0 + NS + H4 whose pairing is
    <(r1,D1,s1),(r2,D2,s2)> = D1.D2 - r1*s2 - r2*s1.

All invariants (signature, discriminant) are computed exactly: signature by
symmetric congruence reduction over Fractions, discriminant by fraction-free
(Bareiss) elimination.  Floating point appears only in orthobasis_extension,
which feeds the Monte Carlo module and is honest about being approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InputError

Vec = tuple  # vectors are plain int tuples


def _as_int_vector(v, rank=None):
    try:
        out = tuple(int(x) for x in v)
    except (TypeError, ValueError) as exc:
        raise InputError("expected an integer vector, got %r" % (v,)) from exc
    if rank is not None and len(out) != rank:
        raise InputError("vector length %d does not match rank %d" % (len(out), rank))
    return out


def _as_gram(rows):
    """Validate and freeze a symmetric integer matrix."""
    gram = tuple(tuple(int(x) for x in row) for row in rows)
    n = len(gram)
    for row in gram:
        if len(row) != n:
            raise InputError("gram matrix must be square")
    for i in range(n):
        for j in range(i + 1, n):
            if gram[i][j] != gram[j][i]:
                raise InputError("gram matrix must be symmetric")
    return gram


def bareiss_determinant(rows) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    a = [list(map(int, row)) for row in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def signature_of(rows) -> tuple:
    """(n_plus, n_minus, n_zero) of a symmetric rational matrix, exactly.

    Symmetric congruence (Lagrange) reduction: repeatedly pick a nonzero
    diagonal pivot and clear its row and column.  When every remaining
    diagonal entry is zero but some off-diagonal a = M[i][j] is not, the basis
    change b_i <- b_i + b_j puts 2a on the diagonal and reduction continues.
    Congruence preserves signature (Sylvester), so the pivot signs are the
    answer.  No floating point: unimodular lattices of large rank have
    ill-conditioned floating spectra.
    """
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    active = list(range(n))
    n_plus = n_minus = n_zero = 0
    while active:
        k = next((i for i in active if m[i][i] != 0), None)
        if k is None:
            pair = next(
                ((i, j) for i in active for j in active if i < j and m[i][j] != 0),
                None,
            )
            if pair is None:
                n_zero += len(active)
                break
            i, j = pair
            for t in range(n):
                m[i][t] += m[j][t]
            for t in range(n):
                m[t][i] += m[t][j]
            continue
        d = m[k][k]
        if d > 0:
            n_plus += 1
        else:
            n_minus += 1
        active.remove(k)
        for i in active:
            f = m[i][k] / d
            if f:
                for j in range(n):
                    m[i][j] -= f * m[k][j]
        for i in active:
            f = m[k][i] / d
            if f:
                for j in range(n):
                    m[j][i] -= f * m[j][k]
    return (n_plus, n_minus, n_zero)


@dataclass(frozen=True)
class IntegerLattice:
    gram: tuple
    label: str = ""

    def __init__(self, gram, label=""):
        object.__setattr__(self, "gram", _as_gram(gram))
        object.__setattr__(self, "label", str(label))

    @property
    def rank(self) -> int:
        return len(self.gram)

    def pairing(self, u, v) -> int:
        u = _as_int_vector(u, self.rank)
        v = _as_int_vector(v, self.rank)
        total = 0
        for i, ui in enumerate(u):
            if ui:
                row = self.gram[i]
                total += ui * sum(row[j] * v[j] for j in range(self.rank) if v[j])
        return total

    def norm(self, v) -> int:
        """Self-pairing <v, v>."""
        return self.pairing(v, v)

    def signature(self) -> tuple:
        return _signature_cached(self.gram)

    def discriminant(self) -> int:
        return _discriminant_cached(self.gram)

    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def direct_sum(self, other: "IntegerLattice", label="") -> "IntegerLattice":
        n, m = self.rank, other.rank
        gram = [[0] * (n + m) for _ in range(n + m)]
        for i in range(n):
            for j in range(n):
                gram[i][j] = self.gram[i][j]
        for i in range(m):
            for j in range(m):
                gram[n + i][n + j] = other.gram[i][j]
        return IntegerLattice(gram, label or (self.label + "+" + other.label))

    def to_json(self) -> dict:
        return {"rank": self.rank, "gram": [list(row) for row in self.gram], "label": self.label}

    @staticmethod
    def from_json(doc) -> "IntegerLattice":
        try:
            gram = doc["gram"]
        except (KeyError, TypeError) as exc:
            raise InputError("lattice document needs a 'gram' field") from exc
        lat = IntegerLattice(gram, doc.get("label", ""))
        if "rank" in doc and int(doc["rank"]) != lat.rank:
            raise InputError("declared rank %s does not match gram size %d" % (doc["rank"], lat.rank))
        return lat


@lru_cache(maxsize=256)
def _signature_cached(gram):
    return signature_of(gram)


@lru_cache(maxsize=256)
def _discriminant_cached(gram):
    return bareiss_determinant(gram)


def pairing(L: IntegerLattice, u, v) -> int:
    return L.pairing(u, v)


def signature(L: IntegerLattice) -> tuple:
    return L.signature()


def discriminant(L: IntegerLattice) -> int:
    return L.discriminant()


# ---------------------------------------------------------------------------
# standard constructions

_U_GRAM = ((0, 1), (1, 0))

# E8 Cartan matrix in Bourbaki numbering: chain 1-3-4-5-6-7-8 with node 2
# attached to node 4.  Determinant 1, positive definite, even.
_E8_EDGES = ((1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4))


def _e8_gram(sign=1):
    g = [[0] * 8 for _ in range(8)]
    for i in range(8):
        g[i][i] = 2 * sign
    for a, b in _E8_EDGES:
        g[a - 1][b - 1] = -sign
        g[b - 1][a - 1] = -sign
    return g


def standard_lattice(name: str) -> IntegerLattice:
    """Named even lattices: "U", "E8_negative", "K3" (= U^3 + E8(-1)^2, rank 22)
    and "Mukai" (= U^4 + E8(-1)^2, rank 24).

    Basis order fixes U blocks first, then the two E8(-1) blocks.
    """
    if name == "U":
        return IntegerLattice(_U_GRAM, "U")
    if name == "E8_negative":
        return IntegerLattice(_e8_gram(-1), "E8(-1)")
    if name in ("K3", "Mukai"):
        copies = 3 if name == "K3" else 4
        lat = IntegerLattice(_U_GRAM, "U")
        for _ in range(copies - 1):
            lat = lat.direct_sum(IntegerLattice(_U_GRAM, "U"))
        for _ in range(2):
            lat = lat.direct_sum(IntegerLattice(_e8_gram(-1), "E8(-1)"))
        return IntegerLattice(lat.gram, name)
    raise InputError("unknown standard lattice %r" % (name,))


def hyperbolic_sum(ns_gram) -> IntegerLattice:
    """The rank rho+2 lattice H0 + NS + H4 in coordinates (r, D_1..D_rho, s).

    The pairing is <(r1,D1,s1),(r2,D2,s2)> = D1.D2 - r1 s2 - r2 s1, so the Gram
    matrix is NS bordered by a -1 hyperbolic pair in the (r, s) corners.  NS
    must be nondegenerate and even: the counting semantics downstream
    (primitive classes of square >= -2, spherical classes of square -2) only
    make sense for an even pairing.
    """
    ns = _as_gram(ns_gram)
    rho = len(ns)
    if rho == 0:
        raise InputError("NS gram must have rank >= 1")
    if bareiss_determinant(ns) == 0:
        raise InputError("NS gram is degenerate")
    if any(ns[i][i] % 2 != 0 for i in range(rho)):
        raise InputError("NS gram must be even (all diagonal entries even)")
    n = rho + 2
    gram = [[0] * n for _ in range(n)]
    for i in range(rho):
        for j in range(rho):
            gram[1 + i][1 + j] = ns[i][j]
    gram[0][n - 1] = -1
    gram[n - 1][0] = -1
    return IntegerLattice(gram, "H0+NS+H4")


# ---------------------------------------------------------------------------
# sublattices


@dataclass(frozen=True)
class Sublattice:
    """A saturated sublattice given by a basis in ambient coordinates.

    The induced Gram matrix is the ambient pairing restricted to the basis.
    Saturation means no ambient integer vector outside the Z-span lies in the
    Q-span of the basis; the constructions in this module guarantee it by
    deriving bases from unimodular column operations.
    """

    ambient: IntegerLattice
    basis: tuple

    def __init__(self, ambient, basis):
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(
            self, "basis", tuple(_as_int_vector(b, ambient.rank) for b in basis)
        )

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def gram(self) -> tuple:
        return _induced_gram(self.ambient.gram, self.basis)

    def lattice(self, label="") -> IntegerLattice:
        """The sublattice as a standalone IntegerLattice in basis coordinates."""
        return IntegerLattice(self.gram, label or (self.ambient.label + "-sub"))

    def embed(self, coords) -> tuple:
        """Map basis coordinates to an ambient vector."""
        coords = _as_int_vector(coords, self.rank)
        amb = [0] * self.ambient.rank
        for c, b in zip(coords, self.basis):
            if c:
                for i, bi in enumerate(b):
                    amb[i] += c * bi
        return tuple(amb)

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient.to_json(),
            "basis": [list(b) for b in self.basis],
            "gram": [list(row) for row in self.gram],
        }


@lru_cache(maxsize=256)
def _induced_gram(ambient_gram, basis):
    L = IntegerLattice(ambient_gram)
    return tuple(
        tuple(L.pairing(bi, bj) for bj in basis) for bi in basis
    )


def _clear_denominators(values):
    fracs = [Fraction(x) for x in values]
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    return [int(f * den) for f in fracs], den


def orthogonal_complement(L: IntegerLattice, w) -> Sublattice:
    """Saturated sublattice {v : <v, w> = 0} for a nonzero rational vector w.

    The condition is a single integer linear form a.v = 0 with a = gram.w
    (denominators cleared).  A unimodular sequence of column operations on the
    identity reduces a to (g, 0, ..., 0); the columns mapped to the zero
    entries are then a basis of the kernel, and saturation is automatic
    because the transformation is invertible over Z.  If gram.w = 0 the form
    vanishes identically and the full lattice is returned.
    """
    n = L.rank
    wf = [Fraction(x) for x in w]
    if len(wf) != n:
        raise InputError("vector length %d does not match rank %d" % (len(wf), n))
    if all(x == 0 for x in wf):
        raise InputError("w must be nonzero")
    row = [sum(Fraction(L.gram[i][j]) * wf[j] for j in range(n)) for i in range(n)]
    a, _ = _clear_denominators(row)
    if all(x == 0 for x in a):
        ident = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
        return Sublattice(L, ident)

    # columns of V track the basis; reduce a*V to (g, 0, ..., 0)
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    vals = list(a)
    pivot = next(i for i in range(n) if vals[i] != 0)
    for j in range(n):
        if j == pivot or vals[j] == 0:
            continue
        g, u, v = _xgcd(vals[pivot], vals[j])
        p_over, j_over = vals[pivot] // g, vals[j] // g
        for i in range(n):
            cp, cj = V[i][pivot], V[i][j]
            V[i][pivot] = u * cp + v * cj
            V[i][j] = -j_over * cp + p_over * cj
        vals[pivot], vals[j] = g, 0
    basis = [
        tuple(V[i][j] for i in range(n)) for j in range(n) if j != pivot
    ]
    return Sublattice(L, basis)


def _xgcd(a, b):
    """g, x, y with a*x + b*y = g = gcd(a, b), g > 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def primitive_decompose(v):
    """Split a nonzero integer vector as m * v0 with m > 0 and v0 primitive."""
    v = _as_int_vector(v)
    m = 0
    for x in v:
        m = math.gcd(m, x)
    if m == 0:
        raise InputError("cannot decompose the zero vector")
    return m, tuple(x // m for x in v)


# ---------------------------------------------------------------------------
# floating-point basis completion (feeds the Monte Carlo module)


def orthobasis_extension(N: IntegerLattice, re_phi, im_phi):
    """Complete a positive 2-plane to the basis used by the volume computation.

    Given real vectors re_phi, im_phi spanning a positive-definite 2-plane in
    N (x) R, returns (w_basis, det_A): vectors w_1..w_{n-2} spanning the
    orthogonal complement with <w_i, w_j> = -delta_ij, and the absolute
    determinant of the change of basis from the standard basis to
    (re_phi, im_phi, w_1, ..).  For the (r, D, s) lattice of a phase-1 charge
    this determinant is omega^2 / sqrt(|Disc NS|).

    This is the one floating-point routine in the lattice layer; tolerances
    are 1e-9 on pivot decisions.  Inputs may be rational or float vectors
    (im_phi is typically t * (0, h, B.h) with t irrational).
    """
    n = N.rank
    G = np.array(N.gram, dtype=float)
    p1 = np.array([float(x) for x in re_phi], dtype=float)
    p2 = np.array([float(x) for x in im_phi], dtype=float)
    if p1.shape != (n,) or p2.shape != (n,):
        raise InputError("plane vectors must have length %d" % n)
    g11 = p1 @ G @ p1
    g12 = p1 @ G @ p2
    g22 = p2 @ G @ p2
    if not (g11 > 1e-9 and g11 * g22 - g12 * g12 > 1e-9):
        raise InputError("re_phi, im_phi do not span a positive-definite 2-plane")

    plane = [p1, p2]
    plane_gram = np.array([[g11, g12], [g12, g22]])
    plane_inv = np.linalg.inv(plane_gram)

    def project_out(v):
        u = np.array([p @ G @ v for p in plane])
        c = plane_inv @ u
        return v - c[0] * p1 - c[1] * p2

    ws = []
    for i in range(n):
        c = project_out(np.eye(n)[i])
        for w in ws:
            c = c + (w @ G @ c) * w  # <w,w> = -1, so projection adds
        nrm = c @ G @ c
        if nrm > 1e-9:
            raise InputError("orthogonal complement of the 2-plane is not negative definite")
        if nrm > -1e-9:
            continue  # numerically dependent on what we have already
        ws.append(c / math.sqrt(-nrm))
        if len(ws) == n - 2:
            break
    if len(ws) != n - 2:
        raise InputError("could not complete a basis of the orthogonal complement")
    A = np.vstack([p1, p2] + ws)
    det_A = abs(np.linalg.det(A))
    return ws, det_A
