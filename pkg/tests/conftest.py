"""Shared fixtures: the running rank-1 charge, twistor data, slag surrogate."""

import json
from fractions import Fraction

import pytest

from k3count import SlagForm, StabilityCharge, TwistorPlane
from k3count.lattices import IntegerLattice, Sublattice, hyperbolic_sum


@pytest.fixture(scope="session")
def sigma():
    """NS = <2>, B = 0, omega = t*h with t^2 = 3/2, so omega^2 = 3."""
    return StabilityCharge([[2]], [0], [1], Fraction(3, 2))


@pytest.fixture(scope="session")
def twistor_pair():
    """Definite-plus-one-negative ambient with the obvious definite 3-plane."""
    L = IntegerLattice([[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, -2]])
    P = TwistorPlane(L, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])
    return L, P


@pytest.fixture(scope="session")
def slag_surrogate():
    """Rank-3 Lagrangian surrogate carrying the same region as the running
    charge: ambient = hyperbolic extension of <2>, identity sublattice,
    Re Omega dual to (r - (3/2) s), Im Omega along the divisor direction."""
    amb = hyperbolic_sum([[2]])
    lag = Sublattice(amb, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    return SlagForm(lag, [Fraction(1), 0, Fraction(-3, 2)], [0, 1, 0],
                    Fraction(3, 2))


@pytest.fixture
def write_config(tmp_path):
    """Factory dropping a config JSON into tmp_path; returns the path."""

    def _write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return _write


CHARGE_DOC = {"ns_gram": [[2]], "B": ["0"], "omega_ray": ["1"], "t_sq": "3/2"}


@pytest.fixture(scope="session")
def charge_doc():
    return dict(CHARGE_DOC)
