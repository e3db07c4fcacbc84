"""Lagrangian class lattices, holomorphic-form counting data, and
twistor-plane seminorm counts.

A Kaehler class omega carves the Lagrangian classes Lag = {gamma : gamma .
omega = 0} out of an even lattice of signature (3, n); on Lag the form has
signature (2, n - 1) and a normalized holomorphic 2-form Omega = Re Omega +
i Im Omega spans the positive 2-plane.  Candidate special-Lagrangian classes
satisfy gamma^2 >= -2 and |gamma . Omega| <= R, which is the same kind of
region the charge engine enumerates, with K = (Re Omega)^2 = (Im Omega)^2
playing the role of omega^2.

A twistor plane P is a positive definite 3-plane in the real lattice; the
seminorm |gamma|_P is the length of the orthogonal projection onto P, and
counts of {gamma^2 >= -2, |gamma|_P <= R} are (in the limit) independent of
the choice of P.  This module verifies that invariance both exactly (under
integer isometries) and statistically (under real isometries, by Monte
Carlo).
"""

from __future__ import annotations

import itertools
import math
import time
import warnings as _warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .counting import (
    BOX_POINT_BUDGET,
    DEFAULT_POINT_BUDGET,
    CountReport,
    _ABData,
    _count_ab_region,
    _count_psd_region,
    _make_report,
    _psd_region_majorant,
    fraction_inverse,
    is_positive_definite,
)
from .errors import BudgetError, InputError
from .lattices import IntegerLattice, Sublattice, orthogonal_complement
from .rationals import format_rational, parse_rational


def _lift(x) -> Fraction:
    """Fraction from a rational-like or (exactly) from a float."""
    if isinstance(x, float):
        return Fraction(x)
    return parse_rational(x)


def _form_apply(gram, vec):
    """The linear form gamma -> gamma . vec, as coefficients gram @ vec."""
    n = len(gram)
    return tuple(sum(gram[i][j] * vec[j] for j in range(n)) for i in range(n))


def _quad(gram, u, v):
    n = len(gram)
    return sum(u[i] * gram[i][j] * v[j] for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# Lagrangian lattices and the Omega data


def lagrangian_lattice(L: IntegerLattice, omega) -> Sublattice:
    """The saturated sublattice of classes pairing to zero with omega.

    For a K3-type ambient lattice and omega of positive square the result has
    signature (2, rank - 3); the caller reads it off via .lattice().signature().
    A degenerate omega direction (gram . omega = 0) makes the orthogonality
    condition vacuous and returns the full lattice with a warning.
    """
    omega = tuple(parse_rational(x) for x in omega)
    if all(x == 0 for x in omega):
        raise InputError("omega must be nonzero")
    sub = orthogonal_complement(L, omega)
    if sub.rank == L.rank:
        _warnings.warn(
            "omega pairs to zero with the whole lattice; the orthogonality "
            "condition is vacuous and Lag is the full lattice",
            stacklevel=2,
        )
    return sub


@dataclass(frozen=True)
class SlagForm:
    """Holomorphic-form data on a Lagrangian lattice, in lag coordinates.

    Im Omega is supplied as a rational ray and a square scale: Im Omega =
    sqrt(im_t_sq) * im_ray.  This covers period points whose Im Omega is
    itself irrational while keeping every pairing gamma . Omega inside
    Q(sqrt(im_t_sq)), where membership tests stay exact.  The normalization
    (Re Omega)^2 = (Im Omega)^2 = K_Omega > 0 and Re Omega . Im Omega = 0 is
    enforced; K_Omega may be passed to be checked, or omitted and derived.
    """

    lag: Sublattice
    re_omega_form: tuple
    im_ray: tuple
    im_t_sq: Fraction
    K_Omega: Optional[Fraction] = None

    def __post_init__(self):
        n = self.lag.rank
        re = tuple(parse_rational(x) for x in self.re_omega_form)
        ray = tuple(parse_rational(x) for x in self.im_ray)
        if len(re) != n or len(ray) != n:
            raise InputError("Omega data must be given in lag coordinates")
        t_sq = parse_rational(self.im_t_sq)
        if t_sq <= 0:
            raise InputError("im_t_sq must be positive")
        gram = self.lag.gram
        re_sq = _quad(gram, re, re)
        im_sq = t_sq * _quad(gram, ray, ray)
        cross = _quad(gram, re, ray)
        if re_sq <= 0:
            raise InputError("(Re Omega)^2 must be positive")
        if im_sq != re_sq:
            raise InputError(
                "(Im Omega)^2 = %s differs from (Re Omega)^2 = %s"
                % (im_sq, re_sq)
            )
        if cross != 0:
            raise InputError("Re Omega . Im Omega must vanish")
        if self.K_Omega is not None and parse_rational(self.K_Omega) != re_sq:
            raise InputError("K_Omega does not match (Re Omega)^2")
        object.__setattr__(self, "re_omega_form", re)
        object.__setattr__(self, "im_ray", ray)
        object.__setattr__(self, "im_t_sq", t_sq)
        object.__setattr__(self, "K_Omega", re_sq)

    def to_json(self) -> dict:
        return {
            "lag": self.lag.to_json(),
            "re_omega_form": [format_rational(x) for x in self.re_omega_form],
            "im_ray": [format_rational(x) for x in self.im_ray],
            "im_t_sq": format_rational(self.im_t_sq),
            "K_Omega": format_rational(self.K_Omega),
        }


def slag_count(S: SlagForm, R, threads: int = 1,
               budget: Optional[int] = DEFAULT_POINT_BUDGET) -> CountReport:
    """#{gamma in lag, gamma != 0 : gamma^2 >= -2, |gamma . Omega| <= R}.

    Exact, via the charge engine's machinery with K_Omega in place of
    omega^2.  The square bound applies to gamma itself (no primitive-part
    reduction): the candidate special-Lagrangian classes form a subset of
    this region, so the count is the upper-bound set of the asymptotic
    SL(R) <= C R^rank.  Signature (2, n) is required; anything else leaves
    the region unbounded and is refused.
    """
    t0 = time.perf_counter()
    R = parse_rational(R)
    if R < 0:
        raise InputError("R must be >= 0")
    lag_lat = S.lag.lattice()
    pos, neg, zero = lag_lat.signature()
    if pos != 2 or zero != 0:
        raise InputError(
            "slag_count needs a nondegenerate lag of signature (2, n); got "
            "(%d, %d) at rank %d" % (pos, neg, lag_lat.rank)
        )
    gram = lag_lat.gram
    data = _ABData(
        gram=gram,
        a_form=_form_apply(gram, S.re_omega_form),
        b_form=_form_apply(gram, S.im_ray),
        d=S.im_t_sq,
        k_sq=S.K_Omega,
    )
    try:
        nonneg, negpart, warns, _ = _count_ab_region(
            data, R, primitive_mode=False, floor=-2, threads=threads, budget=budget
        )
    except RuntimeError as exc:
        raise InputError(
            "Omega does not span the positive 2-plane of lag: %s" % exc
        ) from exc
    return _make_report(R, nonneg, negpart, lag_lat.rank, warns, t0)


# ---------------------------------------------------------------------------
# twistor planes and the P-seminorm


class TwistorPlane:
    """A positive definite plane P = span(basis) inside a lattice.

    basis holds the spanning vectors in ambient coordinates (by convention
    omega, Re Omega, Im Omega for the twistor 3-plane, but any number of
    independent positive vectors is accepted).  gram_p is the induced Gram
    and weight the matrix of the squared seminorm:

        |gamma|_P^2 = gamma^T weight gamma,
        weight = U^T gram_p^{-1} U,  U rows = gram . b_i,

    which equals sum_i (gamma . e_i)^2 over any basis e_i of P orthonormal
    for the ambient form; the stored form avoids the irrationalities of
    explicit orthonormalization.  Float input vectors are lifted exactly to
    rationals and flagged approx; approx planes are good for Monte Carlo but
    are refused by the exact counters.
    """

    __slots__ = ("ambient", "basis", "gram_p", "weight", "approx")

    def __init__(self, ambient: IntegerLattice, basis: Sequence):
        if not isinstance(ambient, IntegerLattice):
            ambient = IntegerLattice(ambient)
        vecs = []
        approx = False
        for b in basis:
            row = []
            for x in b:
                if isinstance(x, float) and x != int(x):
                    approx = True
                row.append(_lift(x))
            if len(row) != ambient.rank:
                raise InputError("plane vectors must have the ambient rank")
            vecs.append(tuple(row))
        if not vecs:
            raise InputError("a plane needs at least one spanning vector")
        m = len(vecs)
        gram = ambient.gram
        gram_p = tuple(
            tuple(_quad(gram, vecs[i], vecs[j]) for j in range(m)) for i in range(m)
        )
        if not is_positive_definite(gram_p):
            raise InputError(
                "plane vectors must be independent with positive definite "
                "induced Gram"
            )
        ginv = fraction_inverse(gram_p)
        forms = [_form_apply(gram, v) for v in vecs]  # rows of U
        n = ambient.rank
        weight = tuple(
            tuple(
                sum(forms[a][i] * ginv[a][b] * forms[b][j]
                    for a in range(m) for b in range(m))
                for j in range(n)
            )
            for i in range(n)
        )
        self.ambient = ambient
        self.basis = tuple(vecs)
        self.gram_p = gram_p
        self.weight = weight
        self.approx = approx

    @property
    def dim(self) -> int:
        return len(self.basis)

    def is_normalized(self) -> bool:
        """Whether the stored basis is already orthonormal for the ambient form."""
        m = self.dim
        return all(
            self.gram_p[i][j] == (1 if i == j else 0)
            for i in range(m) for j in range(m)
        )

    def orthonormalized(self):
        """(orthonormal basis, transform) with basis'_i = sum_j T[i][j] basis_j.

        Gram-Schmidt in the ambient form; the result is float-valued in
        general, which is why the exact machinery works with `weight`
        instead.
        """
        m = self.dim
        gp = [[float(x) for x in row] for row in self.gram_p]
        T = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
        for i in range(m):
            for k in range(i):
                proj = sum(T[i][a] * gp[a][b] * T[k][b]
                           for a in range(m) for b in range(m))
                for j in range(m):
                    T[i][j] -= proj * T[k][j]
            norm = math.sqrt(sum(T[i][a] * gp[a][b] * T[i][b]
                                 for a in range(m) for b in range(m)))
            for j in range(m):
                T[i][j] /= norm
        basis = tuple(
            tuple(sum(T[i][j] * float(self.basis[j][k]) for j in range(m))
                  for k in range(self.ambient.rank))
            for i in range(m)
        )
        return basis, tuple(tuple(row) for row in T)

    def transformed(self, matrix) -> "TwistorPlane":
        """The image plane under v -> matrix . v (columns convention)."""
        n = self.ambient.rank
        rows = [[_lift(x) for x in row] for row in matrix]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise InputError("transform must be a square matrix of ambient rank")
        new_basis = [
            tuple(sum(rows[k][j] * b[j] for j in range(n)) for k in range(n))
            for b in self.basis
        ]
        return TwistorPlane(self.ambient, new_basis)

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient.to_json(),
            "basis": [[format_rational(x) for x in b] for b in self.basis],
            "gram_p": [[format_rational(x) for x in row] for row in self.gram_p],
            "approx": self.approx,
        }


def twistor_seminorm_sq(P: TwistorPlane, gamma) -> Fraction:
    """Exact |gamma|_P^2 = gamma^T weight gamma."""
    gamma = tuple(_lift(x) for x in gamma)
    if len(gamma) != P.ambient.rank:
        raise InputError("gamma must have the ambient rank")
    return _quad(P.weight, gamma, gamma)


def twistor_seminorm(P: TwistorPlane, gamma) -> float:
    """|gamma|_P, the length of the orthogonal projection of gamma onto P."""
    return math.sqrt(twistor_seminorm_sq(P, gamma))


def twistor_count(L: IntegerLattice, P: TwistorPlane, R, threads: int = 1,
                  budget: Optional[int] = DEFAULT_POINT_BUDGET) -> CountReport:
    """#{gamma in L, gamma != 0 : gamma^2 >= -2, |gamma|_P <= R}, exactly.

    The report normalizes by R^rank (the ambient rank drives the growth).
    P must dominate the positive directions of L or the region is unbounded
    and the call is refused; float-valued planes are refused too, since the
    membership contract is exact.
    """
    t0 = time.perf_counter()
    R = parse_rational(R)
    if R < 0:
        raise InputError("R must be >= 0")
    if P.approx:
        raise InputError(
            "exact twistor counts need a rational plane; use mc_volume for "
            "real planes"
        )
    if P.ambient.gram != L.gram:
        raise InputError("plane was built on a different ambient lattice")
    nonneg, negpart = _count_psd_region(
        L, P.weight, R, -2, threads, budget, split=True
    )
    return _make_report(R, nonneg, negpart, L.rank, [], t0)


def brute_force_twistor_count(L: IntegerLattice, P: TwistorPlane, R) -> CountReport:
    """twistor_count semantics by exhaustive scan of a provably containing box.

    Independent oracle: membership is decided with plain Fraction arithmetic
    on the definition, no integerized forms.  Refuses boxes above 1e8 points.
    """
    t0 = time.perf_counter()
    R = parse_rational(R)
    if R < 0:
        raise InputError("R must be >= 0")
    if P.approx:
        raise InputError("the box oracle needs a rational plane")
    gram_q, a_scale, slack = _psd_region_majorant(L.gram, P.weight, -2)
    bound = a_scale * R * R + slack
    qinv = fraction_inverse(gram_q)
    widths = []
    points = 1
    for i in range(L.rank):
        hw = math.isqrt(math.floor(bound * qinv[i][i]))
        widths.append(hw)
        points *= 2 * hw + 1
    if points > BOX_POINT_BUDGET:
        raise BudgetError(points, BOX_POINT_BUDGET)
    rr = R * R
    nonneg = 0
    negpart = 0
    for v in itertools.product(*(range(-w, w + 1) for w in widths)):
        if not any(v):
            continue
        v2 = L.norm(v)
        if v2 < -2:
            continue
        if _quad(P.weight, v, v) <= rr:
            if v2 >= 0:
                nonneg += 1
            else:
                negpart += 1
    return _make_report(R, nonneg, negpart, L.rank, [], t0)


# ---------------------------------------------------------------------------
# independence of the plane


@dataclass(frozen=True)
class PlaneInvarianceReport:
    """Outcome of comparing counts (or MC volumes) for P versus its image."""

    mode: str  # "exact" for integer isometries, "mc" for real ones
    rows: tuple
    ok: bool

    def to_json(self) -> dict:
        return {"mode": self.mode, "rows": [list(r) for r in self.rows],
                "ok": self.ok}


def _is_exact_matrix(matrix) -> bool:
    for row in matrix:
        for x in row:
            if isinstance(x, float) and x != int(x):
                return False
    return True


def plane_invariance_check(L: IntegerLattice, P: TwistorPlane, g, R_list=(),
                           samples: int = 1_000_000, seed: int = 1,
                           threads: int = 1) -> PlaneInvarianceReport:
    """Verify that moving P by an isometry g of L (x) R leaves counts alone.

    Rational g: twistor_count must agree exactly at every R in R_list
    (rows are (R, count_P, count_gP)).  Real-valued g: the seminorm-region
    volumes for P and gP are Monte Carlo estimated and must agree within
    three combined standard errors (a single row (est_P, se_P, est_gP,
    se_gP)); R_list is not used, volumes are taken at radius 1.  A g that
    does not preserve the form is refused.
    """
    from .analytic import SeminormRegionSpec, mc_volume

    exact = _is_exact_matrix(g)
    rows_g = [[_lift(x) for x in row] for row in g]
    n = L.rank
    if len(rows_g) != n or any(len(r) != n for r in rows_g):
        raise InputError("g must be a square matrix of the ambient rank")
    # g^T gram g = gram, exactly for rational g, to 1e-12 otherwise
    for i in range(n):
        for j in range(n):
            val = sum(rows_g[a][i] * L.gram[a][b] * rows_g[b][j]
                      for a in range(n) for b in range(n))
            if exact:
                if val != L.gram[i][j]:
                    raise InputError("g is not an isometry of the lattice form")
            elif abs(float(val) - L.gram[i][j]) > 1e-12:
                raise InputError("g does not preserve the form within 1e-12")
    moved = P.transformed(rows_g)
    if exact:
        rows = []
        ok = True
        for R in R_list:
            c1 = twistor_count(L, P, R)
            c2 = twistor_count(L, moved, R)
            rows.append((format_rational(parse_rational(R)), c1.total, c2.total))
            ok = ok and c1.total == c2.total
        return PlaneInvarianceReport("exact", tuple(rows), ok)
    e1, s1 = mc_volume(SeminormRegionSpec(L.gram, P.weight), samples, seed,
                       threads=threads)
    e2, s2 = mc_volume(SeminormRegionSpec(L.gram, moved.weight), samples, seed,
                       threads=threads)
    ok = abs(e1 - e2) <= 3.0 * math.hypot(s1, s2)
    return PlaneInvarianceReport("mc", ((e1, s1, e2, s2),), ok)
