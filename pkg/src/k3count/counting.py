"""Exact lattice-point counting behind the semistable and Lagrangian counts.

The regions being counted live on indefinite lattices, so they are never
ellipsoids themselves; finiteness comes from a positive-definite majorant.
For a charge with 2-plane (Re phi, Im phi) of norm omega^2 the majorant is

    Q+(v) = 2 |Z(v)|^2 / omega^2  -  <v, v>,

which in the orthogonal coordinates v = alpha_1 Re phi + alpha_2 Im phi + beta
equals omega^2 (alpha_1^2 + alpha_2^2) + |beta|^2, hence is positive definite.
Every v with |Z(v)| <= R and v^2 >= -2 satisfies Q+(v) <= 2 R^2/omega^2 + 2,
so enumerating that ellipsoid and filtering exactly gives the count.

Enumeration is Fincke-Pohst over the exact LDL^T factorization, scaled to
integers once up front: with G * Q(x) = sum_i P_i (M_i x_i + sum_{j>i} C_ij
x_j)^2 all quantities in the recursion are Python ints and every window is an
exact integer square-root interval.  No membership decision is ever made in
floating point: the only float in this module is the point-count estimate
used for budget refusals.

Counting semantics (Bayer-Macri criterion): a nonzero v is semistable iff its
primitive part v0 has v0^2 >= -2, equivalently v^2 >= 0 or v^2 = -2 m^2.  The
report splits the total into the v^2 >= 0 term and the spherical-multiple
term.  A spherical class with Z(delta) = 0 means the charge sits on a wall;
such a class lies inside every enumeration window, so the wall check runs for
free during counting and refuses with the witness.

Thread parallelism partitions the outermost recursion coordinate into
contiguous chunks merged in chunk order, so reports are identical for every
schedule and thread count (with CPython threads this buys determinism and a
stable service contract, not speed).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .charges import StabilityCharge
from .errors import BudgetError, InputError, WallViolationError
from .lattices import IntegerLattice
from .rationals import Surd, format_rational, parse_rational, surd_le

DEFAULT_POINT_BUDGET = 10**9
BOX_POINT_BUDGET = 10**8


class _NotPositiveDefinite(Exception):
    pass


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def ldl_decompose(rows):
    """Exact LDL^T of a symmetric rational matrix, pivots in order.

    Returns (d, l) with Q(x) = sum_i d[i] * (x_i + sum_{j>i} l[i][j] x_j)^2.
    Raises _NotPositiveDefinite on a nonpositive pivot, which doubles as the
    exact positive-definiteness test.
    """
    n = len(rows)
    a = [[Fraction(x) for x in row] for row in rows]
    d = [Fraction(0)] * n
    l = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        di = a[i][i]
        if di <= 0:
            raise _NotPositiveDefinite("pivot %d is %s" % (i, di))
        d[i] = di
        for j in range(i + 1, n):
            l[i][j] = a[i][j] / di
        for j in range(i + 1, n):
            lij = l[i][j]
            if lij:
                for k in range(j, n):
                    a[j][k] -= di * lij * l[i][k]
            # k<j entries are never read again
    return d, l


def is_positive_definite(rows) -> bool:
    try:
        ldl_decompose(rows)
        return True
    except _NotPositiveDefinite:
        return False


def fraction_inverse(rows):
    """Exact inverse of a square rational matrix (Gauss-Jordan)."""
    n = len(rows)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise InputError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


# ---------------------------------------------------------------------------
# majorant forms and the integer enumeration core


@dataclass(frozen=True)
class MajorantForm:
    """A positive-definite rational form dominating a counting region.

    bound_for(R) = r_sq_factor * R^2 + slack; the slack 2 absorbs the
    v^2 >= -2 tail, and for twisted charges r_sq_factor carries a rational
    upper bound for the twist eigenvalue (windows may only widen; the
    membership filter downstream is exact either way).
    """

    gram_q: tuple
    r_sq_factor: Fraction
    slack: Fraction

    def bound_for(self, R) -> Fraction:
        R = parse_rational(R)
        if R < 0:
            raise InputError("R must be >= 0")
        return self.r_sq_factor * R * R + self.slack


@dataclass(frozen=True)
class _EnumPrep:
    """Integerized LDL data: G*Q(x) = sum P[i]*(M[i]*x_i + sum_{j>i} C[i][j]*x_j)^2."""

    n: int
    P: tuple
    M: tuple
    C: tuple
    G: int
    det_q: Fraction


@lru_cache(maxsize=128)
def _prepare(gram_q) -> _EnumPrep:
    d, l = ldl_decompose(gram_q)  # raises if not positive definite
    n = len(d)
    M = []
    C = []
    for i in range(n):
        mi = 1
        for j in range(i + 1, n):
            mi = mi * l[i][j].denominator // math.gcd(mi, l[i][j].denominator)
        M.append(mi)
        C.append(tuple(int(l[i][j] * mi) if j > i else 0 for j in range(n)))
    G = 1
    for i in range(n):
        q = (d[i] / (M[i] * M[i])).denominator
        G = G * q // math.gcd(G, q)
    P = tuple(int(G * d[i] / (M[i] * M[i])) for i in range(n))
    det_q = math.prod(d, start=Fraction(1))
    return _EnumPrep(n, P, tuple(M), tuple(C), G, det_q)


def _root_window(prep: _EnumPrep, budget: int):
    i = prep.n - 1
    hw = math.isqrt(budget // prep.P[i]) if budget >= 0 else -1
    if hw < 0:
        return 1, 0
    mi = prep.M[i]
    return -(hw // mi), hw // mi


def _iter_ellipsoid(prep: _EnumPrep, budget: int, half=False, outer_range=None):
    """Yield all integer x != 0 with the integerized Q(x) <= budget.

    Coordinates are assigned from the last down to the first; emission order
    is lexicographic in (x_{n-1}, ..., x_0), canonical across platforms.  With
    half=True only vectors whose outermost nonzero coordinate is positive are
    produced (counts double them; the regions here are symmetric under v -> -v).
    outer_range restricts the outermost coordinate, which is how thread chunks
    are carved out.
    """
    n = prep.n
    if n == 0 or budget < 0:
        return
    P, M, C = prep.P, prep.M, prep.C
    coords = [0] * n

    def rec(i, rem, allzero):
        Pi = P[i]
        mi = M[i]
        Ci = C[i]
        t = 0
        for j in range(i + 1, n):
            cj = coords[j]
            if cj:
                t += Ci[j] * cj
        hw = math.isqrt(rem // Pi)
        lo = -((hw + t) // mi)
        hi = (hw - t) // mi
        if half and allzero and lo < 0:
            lo = 0
        if outer_range is not None and i == n - 1:
            lo = max(lo, outer_range[0])
            hi = min(hi, outer_range[1])
        if i == 0:
            for x in range(lo, hi + 1):
                if x == 0 and allzero:
                    continue
                coords[0] = x
                yield tuple(coords)
            coords[0] = 0
            return
        for x in range(lo, hi + 1):
            nv = mi * x + t
            coords[i] = x
            yield from rec(i - 1, rem - Pi * nv * nv, allzero and x == 0)
        coords[i] = 0

    yield from rec(n - 1, budget, True)


def enumerate_majorant(Q: MajorantForm, bound):
    """Stream of all integer v != 0 with Q+(v) <= bound, in canonical order."""
    bound = parse_rational(bound)
    if bound < 0:
        raise InputError("bound must be >= 0")
    try:
        prep = _prepare(Q.gram_q)
    except _NotPositiveDefinite as exc:
        raise RuntimeError("majorant form is not positive definite: %s" % exc) from exc
    budget = math.floor(Fraction(prep.G) * bound)
    return _iter_ellipsoid(prep, budget)


def estimate_point_count(gram_q, bound) -> float:
    """Ellipsoid-volume estimate of how many integer points Q <= bound holds.

    Used only for budget refusals, so float precision is ample; computed in
    logs to survive rank-21 bounds without overflow.
    """
    prep = _prepare(tuple(tuple(Fraction(x) for x in row) for row in gram_q))
    bound = Fraction(bound)
    if bound <= 0:
        return 1.0
    n = prep.n
    log_vol = (
        0.5 * n * math.log(math.pi * float(bound))
        - math.lgamma(0.5 * n + 1)
        - 0.5 * (math.log(prep.det_q.numerator) - math.log(prep.det_q.denominator))
    )
    if log_vol > 700:
        return math.inf
    return math.exp(log_vol)


def _ensure_budget(gram_q, bound, budget):
    if budget is None:
        return
    est = estimate_point_count(gram_q, bound)
    if est > budget:
        raise BudgetError(min(est, 1e18), budget)


# ---------------------------------------------------------------------------
# charge-region counting (|Z(v)| <= R with the square condition)


@dataclass(frozen=True)
class _ABData:
    """One counting problem: region |a(v) + i t b(v)|^2 <= R^2 on a lattice.

    gram is the enumeration lattice, a_form/b_form the rational linear forms,
    d = t^2 the radicand, k_sq the 2-plane norm (omega^2, or K_Omega for the
    Lagrangian count), twist an optional GL+ matrix acting on (a, t b).
    """

    gram: tuple
    a_form: tuple
    b_form: tuple
    d: Fraction
    k_sq: Fraction
    twist: tuple = None
    approx_twist: bool = False


def ab_data_for_charge(sigma: StabilityCharge) -> _ABData:
    return _ABData(
        gram=sigma.mukai_lattice().gram,
        a_form=sigma.re_form(),
        b_form=sigma.im_form(),
        d=sigma.t_sq,
        k_sq=sigma.omega_sq,
        twist=sigma.twist.matrix if sigma.twist is not None else None,
        approx_twist=bool(sigma.twist.approx) if sigma.twist is not None else False,
    )


def _gershgorin_twist_factor(twist) -> Fraction:
    """Rational upper bound for the largest eigenvalue of (M M^T)^-1."""
    if twist is None:
        return Fraction(1)
    (a, b), (c, dd) = twist
    mmt = [[a * a + b * b, a * c + b * dd], [a * c + b * dd, c * c + dd * dd]]
    inv = fraction_inverse(mmt)
    return max(inv[0][0] + abs(inv[0][1]), inv[1][1] + abs(inv[1][0]))


def _majorant_gram(data: _ABData):
    n = len(data.gram)
    two_over_k = Fraction(2) / data.k_sq
    a, b, d = data.a_form, data.b_form, data.d
    gram_q = tuple(
        tuple(
            two_over_k * (a[i] * a[j] + d * b[i] * b[j]) - data.gram[i][j]
            for j in range(n)
        )
        for i in range(n)
    )
    return gram_q


def build_majorant(sigma: StabilityCharge) -> MajorantForm:
    """Positive-definite Q+(v) = 2|Z(v)|^2/omega^2 - v^2 plus its radius map."""
    return _build_majorant_ab(ab_data_for_charge(sigma))


def _build_majorant_ab(data: _ABData) -> MajorantForm:
    gram_q = _majorant_gram(data)
    try:
        _prepare(gram_q)
    except _NotPositiveDefinite as exc:
        raise RuntimeError(
            "majorant is not positive definite (corrupt charge data): %s" % exc
        ) from exc
    factor = 2 * _gershgorin_twist_factor(data.twist) / data.k_sq
    return MajorantForm(gram_q=gram_q, r_sq_factor=factor, slack=Fraction(2))


def _integerize_forms(data: _ABData, R: Fraction):
    """Integer leaf data for the exact membership test.

    Returns (A, B, P, Q, S, D, C, T): integer coefficient vectors A, B with
    denominators folded in, such that for xA = A.v, xB = B.v membership
    |Z'(v)|^2 <= R^2 is equivalent to

        P*xA^2 + Q*xB^2 + S*xA*xB*sqrt(D) <= C

    and T is the overall scale with |Z'(v)|^2 = (P xA^2 + Q xB^2 + S xA xB
    sqrt(D)) / T.
    """
    dA = 1
    for f in data.a_form:
        dA = dA * f.denominator // math.gcd(dA, f.denominator)
    dB = 1
    for f in data.b_form:
        dB = dB * f.denominator // math.gcd(dB, f.denominator)
    A = tuple(int(f * dA) for f in data.a_form)
    B = tuple(int(f * dB) for f in data.b_form)
    dn, dd = data.d.numerator, data.d.denominator
    if data.twist is None:
        u, w, z, dM = Fraction(1), Fraction(1), Fraction(0), 1
    else:
        (m00, m01), (m10, m11) = data.twist
        u = m00 * m00 + m01 * m01
        w = m10 * m10 + m11 * m11
        z = m00 * m10 + m01 * m11
        dM = 1
        for f in (m00, m01, m10, m11):
            dM = dM * f.denominator // math.gcd(dM, f.denominator)
    p, q = R.numerator, R.denominator
    T = q * q * dA * dA * dB * dB * dd * dM * dM

    def as_int(frac):
        assert frac.denominator == 1, frac
        return frac.numerator

    P = as_int(Fraction(T) * u / (dA * dA))
    Q = as_int(Fraction(T) * dn * w / (dd * dB * dB))
    S = as_int(Fraction(T) * 2 * z / (dd * dA * dB))
    D = dn * dd
    C = p * p * dA * dA * dB * dB * dd * dM * dM
    return A, B, P, Q, S, D, C, T


def _mult_in_region(lhs: int, s: int, D: int, C: int) -> int:
    """Largest m >= 1 with m^2 * (lhs + s*sqrt(D)) <= C.

    Spherical multiples m*delta satisfy (m*delta)^2 = -2m^2 < -2 for m >= 2,
    so they fall outside the enumerated ellipsoid and are counted here by
    multiplicity at the primitive class delta.  The caller guarantees
    lhs + s*sqrt(D) > 0 (delta is off the wall) and m = 1 fits.
    """
    lo, hi = 1, 2
    while surd_le(hi * hi * lhs, hi * hi * s, D, C):
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if surd_le(mid * mid * lhs, mid * mid * s, D, C):
            lo = mid
        else:
            hi = mid
    return lo


def _count_ab_chunk(prep, budget, outer_range, leaf):
    """Run one enumeration chunk, feeding every candidate to the leaf filter."""
    for v in _iter_ellipsoid(prep, budget, half=True, outer_range=outer_range):
        leaf(v)


class _ABLeaf:
    """Leaf filter: exact membership, square classification, wall detection.

    primitive_mode selects the Bayer-Macri semantics (primitive part of
    square >= -2, spherical multiples split out, wall refusal).  Otherwise
    the direct bound v^2 >= floor is applied, which is the Lagrangian-count
    reading of the same machinery.
    """

    __slots__ = (
        "gram_rows", "A", "B", "P", "Q", "S", "D", "C", "T",
        "primitive_mode", "floor", "nonneg", "negpart", "warnings",
        "need_min", "min_pair", "approx", "float_c", "wall",
    )

    def __init__(self, data: _ABData, ints, floor=-2, primitive_mode=True, need_min=False):
        self.gram_rows = data.gram
        (self.A, self.B, self.P, self.Q, self.S, self.D, self.C, self.T) = ints
        self.primitive_mode = primitive_mode
        self.floor = floor
        self.nonneg = 0
        self.negpart = 0
        self.warnings = []
        self.need_min = need_min
        self.min_pair = None
        self.approx = data.approx_twist
        self.float_c = float(self.C) if self.approx else 0.0
        self.wall = None

    def __call__(self, v):
        xa = 0
        xb = 0
        for ai, bi, vi in zip(self.A, self.B, v):
            if vi:
                xa += ai * vi
                xb += bi * vi
        # square of v under the ambient form
        v2 = 0
        for i, vi in enumerate(v):
            if vi:
                row = self.gram_rows[i]
                v2 += vi * sum(row[j] * vj for j, vj in enumerate(v) if vj)

        if self.primitive_mode and xa == 0 and xb == 0:
            # Z(v) = 0 exactly (twist-invariant); a wall iff the primitive
            # part is spherical
            g = 0
            for vi in v:
                g = math.gcd(g, vi)
            if v2 == -2 * g * g:
                if self.wall is None:
                    self.wall = tuple(vi // g for vi in v)
                return

        lhs = self.P * xa * xa + self.Q * xb * xb
        m = self.S * xa * xb
        if not surd_le(lhs, m, self.D, self.C):
            return
        if self.approx:
            approx_val = float(lhs) + float(m) * math.sqrt(self.D)
            if abs(approx_val - self.float_c) <= 1e-12 * max(1.0, abs(self.float_c)):
                self.warnings.append(
                    "borderline point %s under float-approximated twist" % (v,)
                )

        if self.primitive_mode:
            if v2 >= 0:
                self.nonneg += 2
            else:
                g = 0
                for vi in v:
                    g = math.gcd(g, vi)
                if g != 1 or v2 != -2:
                    # multiples m*delta are accounted for at their primitive
                    # class below; other negative squares are excluded
                    return
                self.negpart += 2 * _mult_in_region(lhs, m, self.D, self.C)
        else:
            if v2 >= 0:
                self.nonneg += 2
            elif v2 >= self.floor:
                self.negpart += 2
            else:
                return
        if self.need_min:
            pair = (lhs, m)
            if self.min_pair is None or _pair_lt(pair, self.min_pair, self.D):
                self.min_pair = pair

    def min_surd(self):
        if self.min_pair is None:
            return None
        lhs, m = self.min_pair
        return Surd(Fraction(lhs, self.T), Fraction(m, self.T), Fraction(self.D))


def _pair_lt(p1, p2, D):
    # a1 + s1 sqrt(D) < a2 + s2 sqrt(D)
    return _surd_pair_lt(p1[0] - p2[0], p1[1] - p2[1], D)


def _surd_pair_lt(a, s, D):
    if s == 0 or D == 0:
        return a < 0
    if s > 0:
        return a < 0 and s * s * D < a * a
    return a < 0 or s * s * D > a * a


def _run_chunked(prep, budget, threads, make_leaf):
    """Partition the outermost coordinate, run chunks, merge in chunk order."""
    lo, hi = _root_window(prep, budget)
    lo = max(lo, 0)  # half-enumeration: outermost coordinate >= 0
    threads = max(1, int(threads))
    if hi < lo:
        return [make_leaf()]
    nchunks = min(threads, hi - lo + 1)
    if nchunks <= 1:
        leaf = make_leaf()
        _count_ab_chunk(prep, budget, None, leaf)
        return [leaf]
    edges = [lo + (hi - lo + 1) * k // nchunks for k in range(nchunks + 1)]
    ranges = [(edges[k], edges[k + 1] - 1) for k in range(nchunks)]
    leaves = [make_leaf() for _ in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_count_ab_chunk, prep, budget, rng, leaf)
            for rng, leaf in zip(ranges, leaves)
        ]
        for fut in futures:
            fut.result()
    return leaves


def _count_ab_region(data: _ABData, R: Fraction, *, primitive_mode=True, floor=-2,
                     threads=1, budget=None, need_min=False):
    mj = _build_majorant_ab(data)
    bound = mj.bound_for(R)
    _ensure_budget(mj.gram_q, bound, budget)
    prep = _prepare(mj.gram_q)
    int_budget = math.floor(Fraction(prep.G) * bound)
    ints = _integerize_forms(data, R)

    def make_leaf():
        return _ABLeaf(data, ints, floor=floor, primitive_mode=primitive_mode,
                       need_min=need_min)

    leaves = _run_chunked(prep, int_budget, threads, make_leaf)
    for leaf in leaves:
        if leaf.wall is not None:
            raise WallViolationError(leaf.wall)
    nonneg = sum(leaf.nonneg for leaf in leaves)
    negpart = sum(leaf.negpart for leaf in leaves)
    warnings = [w for leaf in leaves for w in leaf.warnings]
    min_surd = None
    if need_min:
        for leaf in leaves:
            cand = leaf.min_surd()
            if cand is not None and (min_surd is None or not (min_surd <= cand)):
                min_surd = cand
    return nonneg, negpart, warnings, min_surd


# ---------------------------------------------------------------------------
# reports and public counting operations


@dataclass(frozen=True)
class CountReport:
    """One exact count: total = square_nonneg + spherical_multiples, with the
    normalization total / R^dimension used for convergence tables."""

    R: Fraction
    total: int
    square_nonneg: int
    spherical_multiples: int
    normalized: float
    dimension: int
    wall_warnings: tuple
    elapsed_ms: int

    def to_json(self, elapsed=True) -> dict:
        doc = {
            "R": format_rational(self.R),
            "total": self.total,
            "square_nonneg": self.square_nonneg,
            "spherical_multiples": self.spherical_multiples,
            "normalized": self.normalized,
            "dimension": self.dimension,
            "wall_warnings": list(self.wall_warnings),
            "elapsed_ms": self.elapsed_ms if elapsed else 0,
        }
        return doc


def _make_report(R, nonneg, negpart, dimension, warnings, t0) -> CountReport:
    total = nonneg + negpart
    normalized = float(total) / float(R) ** dimension if R > 0 else 0.0
    return CountReport(
        R=R,
        total=total,
        square_nonneg=nonneg,
        spherical_multiples=negpart,
        normalized=normalized,
        dimension=dimension,
        wall_warnings=tuple(warnings),
        elapsed_ms=int((time.perf_counter() - t0) * 1000),
    )


def count_semistable(sigma: StabilityCharge, R, threads=1, budget=None) -> CountReport:
    """N_sigma(R): nonzero v with |Z(v)| <= R whose primitive part has square
    >= -2, counted exactly; refuses with the witness if sigma sits on a wall."""
    t0 = time.perf_counter()
    R = parse_rational(R)
    if R < 0:
        raise InputError("R must be >= 0")
    data = ab_data_for_charge(sigma)
    nonneg, negpart, warnings, _ = _count_ab_region(
        data, R, primitive_mode=True, threads=threads, budget=budget
    )
    return _make_report(R, nonneg, negpart, sigma.rho + 2, warnings, t0)


def min_abs_sq_in_region(sigma: StabilityCharge, R) -> Surd:
    """Exact minimum of |Z(v)|^2 over the counted region, or None if empty."""
    R = parse_rational(R)
    if R < 0:
        raise InputError("R must be >= 0")
    data = ab_data_for_charge(sigma)
    _, _, _, min_surd = _count_ab_region(
        data, R, primitive_mode=True, threads=1, need_min=True
    )
    return min_surd


# -- generic positive-form regions ------------------------------------------


def _integerize_psd(W, R: Fraction):
    n = len(W)
    dW = 1
    for row in W:
        for x in row:
            dW = dW * x.denominator // math.gcd(dW, x.denominator)
    Wint = tuple(tuple(int(x * dW) for x in row) for row in W)
    p, q = R.numerator, R.denominator
    # membership: q^2 * (v^T Wint v) <= p^2 * dW
    return Wint, q * q, p * p * dW


def _psd_leaf_factory(gram, Wint, scale, cap, floor, split):
    class _Leaf:
        __slots__ = ("nonneg", "negpart")

        def __init__(self):
            self.nonneg = 0
            self.negpart = 0

        def __call__(self, v):
            val = 0
            for i, vi in enumerate(v):
                if vi:
                    row = Wint[i]
                    val += vi * sum(row[j] * vj for j, vj in enumerate(v) if vj)
            if scale * val > cap:
                return
            v2 = 0
            for i, vi in enumerate(v):
                if vi:
                    row = gram[i]
                    v2 += vi * sum(row[j] * vj for j, vj in enumerate(v) if vj)
            if floor is not None and v2 < floor:
                return
            if split and v2 < 0:
                self.negpart += 2
            else:
                self.nonneg += 2

    return _Leaf


def _psd_region_majorant(gram, W, floor):
    """PD majorant for {P(v) <= R^2, v^2 >= floor}: a*P - G by doubling a.

    Positive definiteness of a*P - G is monotone in a (P is PSD), so doubling
    finds a witness whenever one exists; failure up to 2^40 means the region
    really is unbounded in some direction and is refused.
    """
    n = len(W)
    if floor is None:
        if not is_positive_definite(W):
            raise InputError("form is not positive definite and no square floor was given: region unbounded")
        return W, Fraction(1), Fraction(0)
    a = Fraction(1)
    for _ in range(41):
        cand = tuple(
            tuple(a * W[i][j] - gram[i][j] for j in range(n)) for i in range(n)
        )
        if is_positive_definite(cand):
            return cand, a, Fraction(-floor)
        a *= 2
    raise InputError("could not build a positive-definite majorant: region unbounded")


def _count_psd_region(L: IntegerLattice, W, R: Fraction, floor, threads, budget, split):
    W = tuple(tuple(Fraction(x) for x in row) for row in W)
    n = L.rank
    if len(W) != n or any(len(row) != n for row in W):
        raise InputError("form size does not match lattice rank")
    for i in range(n):
        for j in range(n):
            if W[i][j] != W[j][i]:
                raise InputError("form must be symmetric")
    gram_q, a_scale, slack = _psd_region_majorant(L.gram, W, floor)
    bound = a_scale * R * R + slack
    _ensure_budget(gram_q, bound, budget)
    prep = _prepare(gram_q)
    int_budget = math.floor(Fraction(prep.G) * bound)
    Wint, scale, cap = _integerize_psd(W, R)
    factory = _psd_leaf_factory(L.gram, Wint, scale, cap, floor, split)
    leaves = _run_chunked(prep, int_budget, threads, factory)
    return sum(l.nonneg for l in leaves), sum(l.negpart for l in leaves)


def count_region(L: IntegerLattice, psd_form, R, square_floor=None, threads=1,
                 budget=None) -> int:
    """#{v in Z^n, v != 0 : P(v) <= R^2, <v,v> >= square_floor}, exactly.

    P is a rational positive-semidefinite form; without a square floor it must
    itself be positive definite (otherwise the region is unbounded and the
    call is refused).
    """
    R = parse_rational(R)
    if R < 0:
        raise InputError("R must be >= 0")
    floor = None if square_floor is None else int(square_floor)
    nonneg, negpart = _count_psd_region(L, psd_form, R, floor, threads, budget, split=False)
    return nonneg + negpart


# -- the independent box oracle ---------------------------------------------


def brute_force_box_count(sigma: StabilityCharge, R) -> CountReport:
    """Same semantics as count_semistable by exhaustive scan of an integer box.

    The box provably contains the region: for Q+(v) <= b every coordinate
    satisfies v_i^2 <= b * (Q+^-1)_ii.  Membership is then decided point by
    point straight from the definition (exact charge evaluation in
    Q(sqrt(t_sq))), a deliberately different route from the engine's
    integerized forms.  Refuses boxes above 1e8 points.
    """
    t0 = time.perf_counter()
    R = parse_rational(R)
    if R < 0:
        raise InputError("R must be >= 0")
    mj = build_majorant(sigma)
    bound = mj.bound_for(R)
    qinv = fraction_inverse(mj.gram_q)
    n = len(mj.gram_q)
    widths = []
    points = 1
    for i in range(n):
        hw = math.isqrt(math.floor(bound * qinv[i][i]))
        widths.append(hw)
        points *= 2 * hw + 1
    if points > BOX_POINT_BUDGET:
        raise BudgetError(points, BOX_POINT_BUDGET)

    lat = sigma.mukai_lattice()
    rr = R * R
    nonneg = 0
    negpart = 0
    wall = None
    import itertools

    for v in itertools.product(*(range(-w, w + 1) for w in widths)):
        if not any(v):
            continue
        a, b = sigma._ab(v)
        v2 = lat.norm(v)
        if a == 0 and b == 0:
            g = 0
            for vi in v:
                g = math.gcd(g, vi)
            if v2 == -2 * g * g:
                wall = tuple(vi // g for vi in v)
                break
        if not (sigma.evaluate(v).abs_sq <= rr):
            continue
        if v2 >= 0:
            nonneg += 1
        else:
            g = 0
            for vi in v:
                g = math.gcd(g, vi)
            if g == 1 and v2 == -2:
                # multiples m*v drift out of the box as m grows; walk them
                # straight from the definition until |Z| leaves the disc
                m = 1
                while sigma.evaluate(tuple(m * vi for vi in v)).abs_sq <= rr:
                    m += 1
                negpart += m - 1
    if wall is not None:
        raise WallViolationError(wall)
    return _make_report(R, nonneg, negpart, sigma.rho + 2, [], t0)


# -- convergence sweeps ------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    reports: tuple
    coefficient: object  # analytic.CoefficientResult

    def rows(self):
        """Report rows joined with the analytic coefficient and relative error."""
        c = self.coefficient.value
        out = []
        for rep in self.reports:
            rel = abs(rep.normalized - c) / c if c else math.inf
            row = rep.to_json()
            row["analytic_C"] = c
            row["rel_err"] = rel
            out.append(row)
        return out


def convergence_sweep(sigma: StabilityCharge, R_list, threads=1, budget=None) -> SweepResult:
    """count_semistable across an increasing R list plus the predicted leading
    coefficient (phase-1 closed form, or the GL-twisted value when sheared)."""
    from . import analytic

    Rs = [parse_rational(R) for R in R_list]
    if not Rs:
        raise InputError("R_list must be nonempty")
    if any(R <= 0 for R in Rs):
        raise InputError("R values must be positive")
    if any(b <= a for a, b in zip(Rs, Rs[1:])):
        raise InputError("R_list must be strictly increasing")
    disc = abs(IntegerLattice(sigma.ns_gram).discriminant())
    base = analytic.coefficient_phase1(sigma.rho, sigma.omega_sq, disc)
    if sigma.twist is None:
        coeff = base
    else:
        coeff = analytic.coefficient_gl(base, sigma.twist, sigma.rho, sigma.omega_sq, disc)
    reports = []
    for R in Rs:
        reports.append(count_semistable(sigma, R, threads=threads, budget=budget))
    totals = [r.total for r in reports]
    if any(b < a for a, b in zip(totals, totals[1:])):
        raise RuntimeError("counts are not monotone across nested regions: %s" % totals)
    return SweepResult(tuple(reports), coeff)
