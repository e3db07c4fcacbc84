"""Exact counting engine against frozen values and the definitional oracle.

The small-radius totals below were frozen from brute_force_box_count, which
walks an axis box and applies the definition of the count directly; R = 5 was
additionally checked by hand (the 32 spherical multiples decompose as
2 * (10 + 2 + 2 + 1 + 1) over the five primitive spherical classes with
|Z| <= 5 at multiplicity 1).
"""

import math
from fractions import Fraction

import pytest

from k3count.counting import (
    BOX_POINT_BUDGET,
    MajorantForm,
    brute_force_box_count,
    build_majorant,
    convergence_sweep,
    count_region,
    count_semistable,
    enumerate_majorant,
    estimate_point_count,
    is_positive_definite,
    ldl_decompose,
    min_abs_sq_in_region,
)
from k3count.errors import BudgetError, InputError
from k3count.lattices import IntegerLattice

# (R, total, square_nonneg, spherical_multiples)
FROZEN_SMALL = [
    (Fraction(1, 4), 0, 0, 0),
    (Fraction(1, 2), 2, 0, 2),
    (Fraction(1), 6, 2, 4),
    (Fraction(2), 14, 6, 8),
    (Fraction(5), 118, 86, 32),
]

FROZEN_LARGE = [
    (10, 710, 626, 84),
    (20, 4926, 4730, 196),
    (40, 37514, 37066, 448),
]


@pytest.mark.parametrize("R,total,nonneg,sph", FROZEN_SMALL)
def test_frozen_small_counts(sigma, R, total, nonneg, sph):
    rep = count_semistable(sigma, R)
    assert (rep.total, rep.square_nonneg, rep.spherical_multiples) == (total, nonneg, sph)
    assert rep.dimension == 3
    assert rep.normalized == float(total) / float(R) ** 3


@pytest.mark.parametrize("R,total,nonneg,sph", FROZEN_SMALL)
def test_box_oracle_agrees(sigma, R, total, nonneg, sph):
    rep = brute_force_box_count(sigma, R)
    assert (rep.total, rep.square_nonneg, rep.spherical_multiples) == (total, nonneg, sph)


@pytest.mark.parametrize("R,total,nonneg,sph", FROZEN_LARGE)
def test_frozen_large_counts(sigma, R, total, nonneg, sph):
    rep = count_semistable(sigma, Fraction(R), threads=2)
    assert (rep.total, rep.square_nonneg, rep.spherical_multiples) == (total, nonneg, sph)


def test_counts_monotone_in_R(sigma):
    prev = -1
    for R in (Fraction(1, 2), 1, 2, 3, 4, 5):
        total = count_semistable(sigma, Fraction(R)).total
        assert total >= prev
        prev = total


def test_thread_count_does_not_change_totals(sigma):
    a = count_semistable(sigma, Fraction(20), threads=1)
    b = count_semistable(sigma, Fraction(20), threads=5)
    assert (a.total, a.square_nonneg, a.spherical_multiples) == \
        (b.total, b.square_nonneg, b.spherical_multiples)


def test_min_abs_sq(sigma):
    smallest = min_abs_sq_in_region(sigma, Fraction(2))
    assert smallest.is_rational()
    assert smallest.as_fraction() == Fraction(1, 4)
    assert min_abs_sq_in_region(sigma, Fraction(1, 10)) is None


def test_budget_refusal(sigma):
    with pytest.raises(BudgetError) as info:
        count_semistable(sigma, Fraction(5), budget=10)
    assert info.value.budget == 10
    assert info.value.estimated_points > 10


def test_box_oracle_budget_cap(sigma):
    with pytest.raises(BudgetError):
        brute_force_box_count(sigma, Fraction(10**6))


def test_report_json_shape(sigma):
    rep = count_semistable(sigma, Fraction(5))
    doc = rep.to_json()
    assert doc["R"] == "5"
    assert doc["total"] == 118
    assert doc["square_nonneg"] + doc["spherical_multiples"] == 118
    assert doc["wall_warnings"] == []
    assert "elapsed_ms" in doc
    bare = rep.to_json(elapsed=False)
    assert bare["elapsed_ms"] == 0  # suppressed for byte-stable artifacts


def test_invalid_radius(sigma):
    with pytest.raises(InputError):
        count_semistable(sigma, Fraction(-1))


def test_ldl_and_positive_definiteness():
    ok = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(2)]]
    d, l = ldl_decompose(ok)
    assert d == [2, Fraction(3, 2)]
    assert l[0][1] == Fraction(1, 2)
    assert is_positive_definite(ok)
    assert not is_positive_definite([[Fraction(0), Fraction(1)],
                                     [Fraction(1), Fraction(0)]])


def test_enumerate_majorant_unit_ball():
    # the closed unit ball of the identity form: six unit vectors, no zero
    gram = tuple(tuple(Fraction(int(i == j)) for j in range(3)) for i in range(3))
    Q = MajorantForm(gram, Fraction(1), Fraction(0))
    assert Q.bound_for(1) == 1
    pts = sorted(enumerate_majorant(Q, Fraction(1)))
    assert len(pts) == 6
    assert all(sum(x * x for x in p) == 1 for p in pts)


def test_estimate_point_count_tracks_volume():
    gram = tuple(tuple(Fraction(int(i == j)) for j in range(2)) for i in range(2))
    est = estimate_point_count(gram, Fraction(100))  # disk of radius 10
    assert est == pytest.approx(math.pi * 100, rel=0.25)


def test_majorant_contains_counting_region(sigma):
    # every class with |Z| <= R and v^2 >= -2 must satisfy Q(v) <= bound
    mj = build_majorant(sigma)
    R = Fraction(3)
    bound = mj.bound_for(R)

    def quad(v):
        return sum(mj.gram_q[i][j] * v[i] * v[j]
                   for i in range(3) for j in range(3))
    rr = R * R
    lat = sigma.mukai_lattice()
    hits = 0
    for r in range(-8, 9):
        for d in range(-8, 9):
            for s in range(-8, 9):
                v = (r, d, s)
                if v == (0, 0, 0):
                    continue
                if lat.norm(v) < -2:
                    continue
                if sigma.evaluate(v).abs_sq_rational <= rr:
                    hits += 1
                    assert quad(v) <= bound
    assert hits > 0


def test_gauss_circle_via_count_region():
    # x^2 + y^2 <= 100 has 317 integer points; count_region drops the origin
    L = IntegerLattice([[1, 0], [0, 1]])
    psd = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    assert count_region(L, psd, Fraction(1)) == 4
    assert count_region(L, psd, Fraction(10)) == 316


def test_convergence_sweep_shape(sigma):
    res = convergence_sweep(sigma, [Fraction(10), Fraction(20)], threads=2)
    rows = res.rows()
    assert [r["total"] for r in rows] == [710, 4926]
    assert rows[0]["analytic_C"] == pytest.approx(0.5700221467386062, abs=1e-12)
    assert rows[0]["rel_err"] > rows[1]["rel_err"]
    with pytest.raises(InputError):
        convergence_sweep(sigma, [])
    with pytest.raises(InputError):
        convergence_sweep(sigma, [Fraction(2), Fraction(1)])


def test_box_budget_constant_sane():
    assert BOX_POINT_BUDGET <= 10**8
