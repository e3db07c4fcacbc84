"""Central charge values, GL+ twists, genericity scans.

Hand values for the running charge (NS = <2>, B = 0, omega^2 = 3):
Z(r, D, s) = r omega^2 / 2 - s + i t (h.D), so Z(1,0,1) = 1/2 and
Z(0,1,0) = i t * 2 with t^2 = 3/2.
"""

import math
import random
from fractions import Fraction

import pytest

from k3count.charges import (
    GLPlusElement,
    StabilityCharge,
    apply_gl,
    central_charge,
    decompose_gl,
    gl_shear_params,
    genericity_check,
    mukai_vector,
    recompose_gl,
    systole_estimate,
)
from k3count.errors import InputError, WallViolationError
from k3count.counting import count_semistable


def test_mukai_vector_convention():
    v = mukai_vector(2, (3,), 5)
    assert v.coords == (2, 3, 3)  # s = chi - rk
    assert tuple(v) == (2, 3, 3)


def test_charge_value_on_hand_examples(sigma):
    z = sigma.evaluate((1, 0, 1))
    assert z.re_rational == Fraction(1, 2)
    assert z.im_coeff == 0
    assert z.abs_sq_rational == Fraction(1, 4)

    z = sigma.evaluate((0, 1, 0))
    assert z.re_rational == 0
    assert z.im_coeff == 2  # h.D with h = 1 against the <2> form
    assert z.abs_sq_rational == Fraction(3, 2) * 4

    assert central_charge(sigma, (1, 0, 1)).abs_sq_rational == Fraction(1, 4)


def test_omega_sq_property(sigma):
    assert sigma.omega_sq == 3
    via = StabilityCharge.from_omega_sq([[2]], [0], [1], 3)
    assert via.t_sq == Fraction(3, 2)


def test_charge_validation():
    with pytest.raises(InputError):
        StabilityCharge([[2]], [0], [1], 0)  # t^2 must be positive
    with pytest.raises(InputError):
        StabilityCharge([[2]], [0, 0], [1], 1)  # B length
    with pytest.raises(InputError):
        StabilityCharge([[-2]], [0], [1], 1)  # omega^2 < 0


def test_gl_element_validation():
    with pytest.raises(InputError):
        GLPlusElement([[1, 0], [0, -1]])  # det < 0
    with pytest.raises(InputError):
        GLPlusElement([[1, 2], [2, 4]])  # det = 0
    g = GLPlusElement([[1, 0.5], [0, 2]])
    assert g.approx  # float entries flag the element as approximate
    assert not GLPlusElement([[1, "1/2"], [0, 2]]).approx


def test_identity_twist_is_dropped(sigma):
    twisted = apply_gl(sigma, GLPlusElement.identity())
    assert twisted.twist is None


def test_gl_shear_params_exact():
    r_sq, kappa, lam = gl_shear_params(GLPlusElement([[1, 1], [0, 2]]))
    assert (r_sq, kappa, lam) == (1, 1, 2)
    r_sq, kappa, lam = gl_shear_params(
        GLPlusElement([[Fraction(3, 5), Fraction(-4, 5)],
                       [Fraction(4, 5), Fraction(3, 5)]]))
    assert (r_sq, kappa, lam) == (1, 0, 1)  # rotations have no shear part


def test_decompose_recompose_round_trip():
    rng = random.Random(20260823)
    for _ in range(25):
        while True:
            entries = [rng.uniform(-3, 3) for _ in range(4)]
            if entries[0] * entries[3] - entries[1] * entries[2] > 0.05:
                break
        g = GLPlusElement([entries[:2], entries[2:]])
        back = recompose_gl(*decompose_gl(g))
        for row, brow in zip(g.matrix, back):
            for x, y in zip(row, brow):
                assert math.isclose(float(x), y, abs_tol=1e-9)


def test_compose_order():
    a = GLPlusElement.scaling(2)
    b = GLPlusElement.shear(1, 2)
    ab = a.compose(b)
    assert ab.matrix == ((Fraction(2), Fraction(2)), (Fraction(0), Fraction(4)))


def test_wall_detection_and_witness():
    on_wall = StabilityCharge([[2]], [0], [1], 1)  # omega^2 = 2
    with pytest.raises(WallViolationError) as info:
        count_semistable(on_wall, Fraction(5))
    assert info.value.witness == (1, 0, 1)

    found = genericity_check(on_wall, 2)
    assert any(tuple(v) == (1, 0, 1) for v, _ in found)


def test_genericity_check_clean_charge(sigma):
    assert genericity_check(sigma, 1) == []


def test_genericity_check_refuses_twists(sigma):
    twisted = apply_gl(sigma, GLPlusElement.scaling(2))
    with pytest.raises(InputError):
        genericity_check(twisted, 1)


def test_systole_of_running_charge(sigma):
    # the class (1, 0, 1) realizes the minimum |Z| = 1/2
    assert systole_estimate(sigma, 2) == Fraction(1, 2)
    assert systole_estimate(sigma, Fraction(1, 10)) is None
