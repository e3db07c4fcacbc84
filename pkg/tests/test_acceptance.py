"""Acceptance gate: eleven end-to-end criteria, one test (one pass/fail
line under pytest -v) per criterion, with the tolerance stated inline.

Exact criteria compare the counting engine against the definitional box
oracle or against itself under exact symmetries; convergence criteria
compare normalized counts at desk scale against the closed-form leading
coefficients; stochastic criteria use seeded Monte Carlo and three combined
standard errors.
"""

import json
import math
import time
from fractions import Fraction

import pytest

from k3count import (
    SlagForm,
    StabilityCharge,
    TwistorPlane,
    brute_force_box_count,
    coefficient_gl,
    coefficient_phase1,
    coefficient_slag_general,
    count_semistable,
    mc_volume,
    plane_invariance_check,
    shear_integral,
    shear_integral_rho2,
    slag_count,
    twistor_count,
)
from k3count.analytic import StabilityRegionSpec
from k3count.charges import GLPlusElement, apply_gl
from k3count.cli import main as cli_main
from k3count.errors import BudgetError
from k3count.lattices import IntegerLattice, orthogonal_complement, standard_lattice

RUNNING_CHARGE_DOC = {"ns_gram": [[2]], "B": ["0"],
                      "omega_ray": ["1"], "t_sq": "3/2"}


@pytest.fixture(scope="module")
def big_reports(sigma):
    """Counts at R in {10, 20, 40, 80} for the running charge, timed once."""
    t0 = time.perf_counter()
    reports = {R: count_semistable(sigma, Fraction(R), threads=4)
               for R in (10, 20, 40, 80)}
    return reports, time.perf_counter() - t0


def test_01_exact_engine_matches_box_oracle_small_radii(sigma):
    # tolerance: none (exact equality), wall clock < 10 s
    t0 = time.perf_counter()
    for R in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5)):
        fast = count_semistable(sigma, R)
        slow = brute_force_box_count(sigma, R)
        assert (fast.total, fast.square_nonneg, fast.spherical_multiples) == \
            (slow.total, slow.square_nonneg, slow.spherical_multiples), \
            "engine and oracle disagree at R = %s" % R
    assert time.perf_counter() - t0 < 10.0


def test_02_normalized_counts_converge_to_closed_form(sigma, big_reports):
    # tolerance: |N(R)/R^3 - C| / C < 5% at R = 80, gap strictly decreasing
    # across R in {10, 20, 40, 80}; wall clock < 60 s
    reports, elapsed = big_reports
    C = coefficient_phase1(sigma.rho, sigma.omega_sq, 2).value
    gaps = [abs(reports[R].normalized - C) for R in (10, 20, 40, 80)]
    assert gaps[3] / C < 0.05, "relative error %.4f at R = 80" % (gaps[3] / C)
    assert gaps[0] > gaps[1] > gaps[2] > gaps[3], "gaps not decreasing: %r" % gaps
    assert elapsed < 60.0


def test_03_counts_independent_of_b_field(big_reports):
    # tolerance: normalized counts at R = 40 for B = h/2 versus B = 0
    # differ by < 3% (the closed form has no B dependence)
    reports, _ = big_reports
    shifted = StabilityCharge([[2]], [Fraction(1, 2)], [1], Fraction(3, 2))
    with_b = count_semistable(shifted, Fraction(40), threads=4).normalized
    without_b = reports[40].normalized
    rel = abs(with_b - without_b) / without_b
    assert rel < 0.03, "B-field moved the normalized count by %.4f" % rel


def test_04_gl_action_scale_rotation_shear(sigma):
    # (a) scale g = 2: count(R, g sigma) == count(R/2, sigma) exactly,
    #     R in {2, 4, 8}
    doubled = apply_gl(sigma, GLPlusElement.scaling(2))
    for R in (2, 4, 8):
        lhs = count_semistable(doubled, Fraction(R)).total
        rhs = count_semistable(sigma, Fraction(R, 2)).total
        assert lhs == rhs, "scale mismatch at R = %d: %d != %d" % (R, lhs, rhs)

    # (b) rotation (3/5, 4/5): identical counts exactly
    rot = GLPlusElement([[Fraction(3, 5), Fraction(-4, 5)],
                         [Fraction(4, 5), Fraction(3, 5)]])
    rotated = apply_gl(sigma, rot)
    for R in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5), Fraction(10)):
        assert count_semistable(rotated, R).total == \
            count_semistable(sigma, R).total, "rotation changed count at R = %s" % R

    # (c) shear kappa = 1, lambda = 2: normalized count at R = 80 within 6%
    #     of the quadrature coefficient
    shear = GLPlusElement([[1, 1], [0, 2]])
    sheared = apply_gl(sigma, shear)
    norm = count_semistable(sheared, Fraction(80), threads=4).normalized
    base = coefficient_phase1(sigma.rho, sigma.omega_sq, 2)
    target = coefficient_gl(base, shear, sigma.rho, sigma.omega_sq, 2).value
    rel = abs(norm - target) / target
    assert rel < 0.06, "sheared count off by %.4f (%.6f vs %.6f)" % (rel, norm, target)


def test_05_spherical_term_is_lower_order(big_reports):
    # tolerance: none; spherical_multiples / R^3 strictly decreasing over
    # R in {10, 20, 40, 80}
    reports, _ = big_reports
    ratios = [reports[R].spherical_multiples / R**3 for R in (10, 20, 40, 80)]
    assert ratios[0] > ratios[1] > ratios[2] > ratios[3], \
        "spherical/R^3 not decreasing: %r" % ratios


def test_06_mc_volumes_match_closed_form_within_3_sigma():
    # tolerance: |estimate - C| <= 3 * stderr, 10^6 samples, seeds {1, 2, 3},
    # (rho, omega^2, |disc|) in {(1,3,2), (2,2,4), (3,2,8)}; wall < 30 s
    t0 = time.perf_counter()
    for rho, omega_sq, disc in ((1, 3, 2), (2, 2, 4), (3, 2, 8)):
        C = coefficient_phase1(rho, Fraction(omega_sq), disc).value
        for seed in (1, 2, 3):
            spec = StabilityRegionSpec(rho, Fraction(omega_sq), disc)
            est, se = mc_volume(spec, 1_000_000, seed=seed, threads=4)
            assert abs(est - C) <= 3 * se, \
                "MC (%d,%d,%d) seed %d: %.5f vs %.5f (se %.5f)" % \
                (rho, omega_sq, disc, seed, est, C, se)
    assert time.perf_counter() - t0 < 30.0


def test_07_shear_quadrature_sanity():
    # tolerance: 1e-10 against the untwisted coefficient for rho in {1..6},
    # and 1e-10 against the rho = 2 trigonometric closed form
    for rho in range(1, 7):
        base = coefficient_phase1(rho, Fraction(3), 2)
        trivial = coefficient_gl(base, GLPlusElement.shear(0, 1),
                                 rho, Fraction(3), 2)
        assert abs(trivial.value - base.value) <= 1e-10 * base.value
        val, _ = shear_integral(rho, 0.0, 1.0)
        assert abs(val - 2 * math.pi) <= 1e-10
    for kappa, lam in ((1.0, 2.0), (0.3, 0.9)):
        quad, _ = shear_integral(2, kappa, lam)
        assert abs(quad - shear_integral_rho2(kappa, lam)) <= 1e-10


def test_08_slag_surrogate_converges_and_rank21_refused(slag_surrogate):
    # tolerance: rank-3 surrogate with K = 3, |disc| = 2: normalized count at
    # R = 80 within 5% of the closed form; the rank-21 problem must be
    # refused by the point budget, not attempted
    rep = slag_count(slag_surrogate, Fraction(80), threads=4)
    C = coefficient_slag_general(3, Fraction(3), 2).value
    rel = abs(rep.normalized - C) / C
    assert rel < 0.05, "slag surrogate off by %.4f" % rel

    K3 = standard_lattice("K3")
    lag21 = orthogonal_complement(K3, (1, 1) + (0,) * 20)
    re_form = [0] * 21
    re_form[1] = re_form[2] = 1
    im_ray = [0] * 21
    im_ray[3] = im_ray[4] = 1
    with pytest.raises(BudgetError):
        slag_count(SlagForm(lag21, re_form, im_ray, 1), Fraction(80))


def test_09_twistor_counts_invariant_under_isometry():
    # tolerance: exact equality at R in {1..6} for an integer isometry;
    # three combined standard errors for a real one
    L = IntegerLattice([[2, 0, 0, 0, 0], [0, 2, 0, 0, 0], [0, 0, 2, 0, 0],
                        [0, 0, 0, -2, 0], [0, 0, 0, 0, -2]])
    P = TwistorPlane(L, [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 2, 1, 0]])
    flip = [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0],
            [0, 0, 0, -1, 0], [0, 0, 0, 0, 1]]
    exact = plane_invariance_check(L, P, flip,
                                   R_list=[Fraction(k) for k in range(1, 7)])
    assert exact.mode == "exact" and exact.ok, "exact rows: %r" % (exact.rows,)
    for _, a, b in exact.rows:
        assert a == b

    c, s = math.cosh(0.5), math.sinh(0.5)
    boost = [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, c, s, 0],
             [0, 0, s, c, 0], [0, 0, 0, 0, 1]]
    mc = plane_invariance_check(L, P, boost, samples=400_000, seed=3, threads=4)
    assert mc.mode == "mc" and mc.ok, "mc row: %r" % (mc.rows,)


def test_10_wall_charge_rejected_with_witness_exit_3(tmp_path, capsys):
    # tolerance: none; omega^2 = 2 on NS = <2> must exit 3 with the witness
    # class (1, 0, 1)
    config = tmp_path / "wall.json"
    config.write_text(json.dumps({
        "schema_version": 1, "mode": "count", "R": "5",
        "charge": {"ns_gram": [[2]], "B": ["0"], "omega_ray": ["1"],
                   "t_sq": "1"},
    }))
    code = cli_main(["--config", str(config)])
    assert code == 3, "expected exit code 3, got %d" % code
    diag = json.loads(capsys.readouterr().err.splitlines()[-1])
    assert diag["code"] == "wall_violation"
    assert diag["witness"] == [1, 0, 1]


def test_11_sweep_reports_byte_identical_and_thread_independent(tmp_path):
    # tolerance: none; rerun with identical config produces identical bytes,
    # and thread count must not appear anywhere in the artifact
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({
        "schema_version": 1, "mode": "sweep", "R_list": ["10", "20"],
        "charge": RUNNING_CHARGE_DOC,
    }))
    paths = [tmp_path / name for name in ("a.csv", "b.csv", "c.csv")]
    assert cli_main(["--config", str(config), "--output", str(paths[0])]) == 0
    assert cli_main(["--config", str(config), "--output", str(paths[1])]) == 0
    assert cli_main(["--config", str(config), "--output", str(paths[2]),
                     "--threads", "4"]) == 0
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1], "rerun changed the report bytes"
    assert blobs[0] == blobs[2], "thread count changed the report bytes"
