"""Transport schemas for the HTTP service.

These models carry wire-level types only: rationals travel as "p/q" strings
(or plain ints), matrices as nested lists.  Conversion to the exact domain
objects happens in the endpoint handlers, so pydantic stays a thin validation
layer and the exactness contract lives in the library.
"""

from __future__ import annotations

from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field

Rational = Union[int, str]
Entry = Union[int, str, float]


class TwistDoc(BaseModel):
    """A GL+(2,R) element by its 2x2 matrix; floats mark approximate twists."""

    matrix: List[List[Entry]]


class ChargeDoc(BaseModel):
    """A stability charge: NS Gram, B-field, Kaehler ray, and the scale.

    Exactly one of t_sq (omega = sqrt(t_sq) * omega_ray) or omega_sq
    (omega^2 = t_sq * ray^2) must be given.
    """

    ns_gram: List[List[int]]
    B: List[Rational]
    omega_ray: List[int]
    t_sq: Optional[Rational] = None
    omega_sq: Optional[Rational] = None
    twist: Optional[TwistDoc] = None


class LatticeDoc(BaseModel):
    """A lattice by name (U, E8_negative, K3, Mukai), by Gram matrix, or as
    the hyperbolic extension H0 + NS + H4 of an NS Gram."""

    name: Optional[str] = None
    gram: Optional[List[List[int]]] = None
    hyperbolic_ns: Optional[List[List[int]]] = None


class LatticeInfoRequest(BaseModel):
    lattice: LatticeDoc


class CountRequest(BaseModel):
    charge: ChargeDoc
    R: Rational
    threads: int = 1
    budget: Optional[int] = Field(default=10**9, description="point budget; null disables")


class SweepRequest(BaseModel):
    charge: ChargeDoc
    R_list: List[Rational]
    threads: int = 1
    budget: Optional[int] = 10**9


class CoefficientRequest(BaseModel):
    formula: Literal["phase1", "gl", "slag", "slag_general"]
    rho: Optional[int] = None
    omega_sq: Optional[Rational] = None
    disc: Optional[int] = None
    twist: Optional[TwistDoc] = None
    rank_lag: Optional[int] = None
    K_Omega: Optional[Rational] = None


class StabilityRegionDoc(BaseModel):
    kind: Literal["stability"] = "stability"
    rho: int
    omega_sq: Rational
    disc: int
    radius: Rational = 1


class SeminormRegionDoc(BaseModel):
    kind: Literal["seminorm"] = "seminorm"
    gram: List[List[Rational]]
    weight: Optional[List[List[Rational]]] = None
    plane: Optional[List[List[Entry]]] = None
    radius: Rational = 1


class VolumeRequest(BaseModel):
    region: Union[StabilityRegionDoc, SeminormRegionDoc] = Field(discriminator="kind")
    samples: int = 10**6
    seed: int = 1
    threads: int = 1


class TwistorRequest(BaseModel):
    gram: List[List[int]]
    plane: List[List[Entry]]
    R: Rational
    threads: int = 1
    budget: Optional[int] = 10**9


class SlagDoc(BaseModel):
    """Lagrangian data: the ambient Gram plus either an explicit lag basis or
    an omega vector whose orthogonal complement is taken; Omega in lag
    coordinates."""

    ambient_gram: List[List[int]]
    lag_basis: Optional[List[List[int]]] = None
    omega: Optional[List[Rational]] = None
    re_omega_form: List[Rational]
    im_ray: List[Rational]
    im_t_sq: Rational = 1


class SlagRequest(BaseModel):
    slag: SlagDoc
    R: Rational
    threads: int = 1
    budget: Optional[int] = 10**9
