"""Central charges Z = <exp(B + i omega), -> on (r, D, s) lattices.

The charge of a phase-1 geometric datum (B, omega) on a Neron-Severi lattice
NS is Z(v) = <Re phi, v> + i <Im phi, v> with

    phi = exp(B + i omega) = (1, B, (B^2 - omega^2)/2) + i (0, omega, B.omega).

omega is stored as t * h with h an integer ray and t^2 a positive rational.
That makes <Re phi, v> rational, <Im phi, v> = t * (integer form), and
|Z(v)|^2 = a(v)^2 + t^2 b(v)^2 rational for every integer v, which is what the
counting engine needs for exact region membership.

A charge may carry a GL+(2,R) twist g acting by post-composition on the value
(Re Z, Im Z).  We use the row convention: the twisted value is the row vector
(Re Z, Im Z) times the stored matrix, so for g = ((1, kappa), (0, lambda)) the
new value is Re Z + i (kappa Re Z + lambda Im Z), a shear by kappa + i lambda.
Matrix entries are stored as exact Fractions; entries supplied as floats are
converted exactly to their binary64 rationals and the element is flagged
approximate so counting can attach guard-band warnings near boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import InputError
from .lattices import IntegerLattice, hyperbolic_sum, primitive_decompose
from .rationals import Surd, parse_rational, format_rational, sqrt_exact

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MukaiVector:
    r: int
    D: tuple
    s: int

    def __init__(self, r, D, s):
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "D", tuple(int(x) for x in D))
        object.__setattr__(self, "s", int(s))

    @property
    def coords(self) -> tuple:
        return (self.r,) + self.D + (self.s,)

    @staticmethod
    def from_coords(coords) -> "MukaiVector":
        coords = tuple(int(x) for x in coords)
        if len(coords) < 3:
            raise InputError("Mukai coordinates need length >= 3 (r, D, s)")
        return MukaiVector(coords[0], coords[1:-1], coords[-1])

    def __iter__(self):
        return iter(self.coords)


def mukai_vector(rk: int, c1, chi: int) -> MukaiVector:
    """(rk, c1, chi) -> (rk, c1, chi - rk), the numerical class of a sheaf."""
    return MukaiVector(rk, c1, int(chi) - int(rk))


# ---------------------------------------------------------------------------
# GL+(2, R)


def _entry(x):
    if isinstance(x, float):
        return Fraction(x), True
    return parse_rational(x), False


@dataclass(frozen=True)
class GLPlusElement:
    matrix: tuple
    approx: bool = False

    def __init__(self, matrix, approx=None):
        rows = tuple(matrix)
        if len(rows) != 2 or any(len(tuple(r)) != 2 for r in rows):
            raise InputError("GL+ element needs a 2x2 matrix")
        seen_float = False
        out = []
        for row in rows:
            new = []
            for x in row:
                val, was_float = _entry(x)
                seen_float = seen_float or was_float
                new.append(val)
            out.append(tuple(new))
        m = tuple(out)
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        if det <= 0:
            raise InputError("GL+ element must have positive determinant")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "approx", seen_float if approx is None else bool(approx))

    @property
    def det(self) -> Fraction:
        m = self.matrix
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]

    def is_identity(self) -> bool:
        return self.matrix == ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))

    def compose(self, other: "GLPlusElement") -> "GLPlusElement":
        """Matrix product self * other (apply self first, then other)."""
        a, b = self.matrix, other.matrix
        prod = tuple(
            tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2))
            for i in range(2)
        )
        return GLPlusElement(prod, approx=self.approx or other.approx)

    # -- constructors ------------------------------------------------------
    @staticmethod
    def identity() -> "GLPlusElement":
        return GLPlusElement(((1, 0), (0, 1)))

    @staticmethod
    def scaling(c) -> "GLPlusElement":
        c = parse_rational(c)
        if c <= 0:
            raise InputError("scale must be positive")
        return GLPlusElement(((c, 0), (0, c)))

    @staticmethod
    def shear(kappa, lam) -> "GLPlusElement":
        lam = parse_rational(lam)
        if lam <= 0:
            raise InputError("shear needs lambda > 0")
        return GLPlusElement(((1, parse_rational(kappa)), (0, lam)))

    @staticmethod
    def rotation(theta: float) -> "GLPlusElement":
        """Row-action rotation by theta (counterclockwise on (Re, Im))."""
        c, s = math.cos(theta), math.sin(theta)
        return GLPlusElement(((c, s), (-s, c)))

    @staticmethod
    def rotation_exact(c, s) -> "GLPlusElement":
        """Rotation from an exact point on the unit circle, e.g. (3/5, 4/5)."""
        c, s = parse_rational(c), parse_rational(s)
        if c * c + s * s != 1:
            raise InputError("rotation_exact needs c^2 + s^2 = 1 exactly")
        return GLPlusElement(((c, s), (-s, c)))

    def to_json(self) -> dict:
        return {"matrix": [[format_rational(x) for x in row] for row in self.matrix]}

    @staticmethod
    def from_json(doc) -> "GLPlusElement":
        if doc is None:
            return GLPlusElement.identity()
        return GLPlusElement(tuple(tuple(x for x in row) for row in doc["matrix"]))


def decompose_gl(g: GLPlusElement):
    """Unique factorization g = scale * R(theta) * ((1, kappa), (0, lambda)).

    R(theta) = ((cos, sin), (-sin, cos)) in the row-action convention and
    lambda > 0; theta is reported in [0, 2*pi).  Returned as floats; the
    recomposition error is at rounding level.
    """
    (m00, m01), (m10, m11) = (tuple(map(float, row)) for row in g.matrix)
    det = m00 * m11 - m01 * m10
    r = math.hypot(m00, m10)
    theta = math.atan2(-m10, m00)
    if theta < 0:
        theta += TWO_PI
    kappa = (m00 * m01 + m10 * m11) / (r * r)
    lam = det / (r * r)
    return r, theta, kappa, lam


def recompose_gl(scale: float, theta: float, kappa: float, lam: float):
    """Inverse of decompose_gl, for round-trip checks."""
    c, s = math.cos(theta), math.sin(theta)
    return (
        (scale * c, scale * (c * kappa + s * lam)),
        (scale * (-s), scale * (-s * kappa + c * lam)),
    )


def gl_shear_params(g: GLPlusElement):
    """Exact rational (scale^2, kappa, lambda) of the decomposition.

    Only theta is irrational in general; these three are rational whenever the
    matrix is, which is what the analytic module wants for the shear integral.
    """
    (m00, m01), (m10, m11) = g.matrix
    r_sq = m00 * m00 + m10 * m10
    kappa = (m00 * m01 + m10 * m11) / r_sq
    lam = g.det / r_sq
    return r_sq, kappa, lam


# ---------------------------------------------------------------------------
# stability charges


@dataclass(frozen=True)
class ChargeValue:
    """Exact value of a (possibly twisted) charge at one vector.

    All three components live in Q(sqrt(t_sq)): re and im are the real and
    imaginary parts, abs_sq = re^2 + im^2.  For untwisted charges re and
    abs_sq are plain rationals and im = im_coeff * t.
    """

    re: Surd
    im: Surd
    abs_sq: Surd

    def __iter__(self):
        return iter((self.re, self.im, self.abs_sq))

    @property
    def re_rational(self) -> Fraction:
        return self.re.as_fraction()

    @property
    def im_coeff(self) -> Fraction:
        """The t-free part of Im Z (Im Z = t * im_coeff); untwisted charges only."""
        if self.im.p != 0:
            raise InputError("im_coeff undefined: Im Z has a rational part under this twist")
        return self.im.q

    @property
    def abs_sq_rational(self) -> Fraction:
        return self.abs_sq.as_fraction()


@dataclass(frozen=True)
class StabilityCharge:
    ns_gram: tuple
    B: tuple
    omega_ray: tuple
    t_sq: Fraction
    twist: GLPlusElement = None

    def __init__(self, ns_gram, B, omega_ray, t_sq, twist=None):
        lat = hyperbolic_sum(ns_gram)  # validates symmetry, evenness, nondegeneracy
        ns = tuple(tuple(int(x) for x in row) for row in ns_gram)
        rho = len(ns)
        B = tuple(parse_rational(x) for x in B)
        h = tuple(int(x) for x in omega_ray)
        if len(B) != rho or len(h) != rho:
            raise InputError("B and omega_ray must have length rho = %d" % rho)
        t_sq = parse_rational(t_sq)
        if t_sq <= 0:
            raise InputError("t_sq must be positive")
        h_sq = sum(h[i] * ns[i][j] * h[j] for i in range(rho) for j in range(rho))
        if t_sq * h_sq <= 0:
            raise InputError("omega^2 = t_sq * h.h must be positive (got %s)" % (t_sq * h_sq,))
        if twist is not None and not isinstance(twist, GLPlusElement):
            twist = GLPlusElement(twist)
        if twist is not None and twist.is_identity():
            twist = None
        object.__setattr__(self, "ns_gram", ns)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "omega_ray", h)
        object.__setattr__(self, "t_sq", t_sq)
        object.__setattr__(self, "twist", twist)
        object.__setattr__(self, "_lattice", lat)

    @classmethod
    def from_omega_sq(cls, ns_gram, B, omega_ray, omega_sq, twist=None):
        """Convenience: fix t_sq so that omega^2 hits the requested value."""
        ns = [list(map(int, row)) for row in ns_gram]
        h = [int(x) for x in omega_ray]
        rho = len(ns)
        h_sq = sum(h[i] * ns[i][j] * h[j] for i in range(rho) for j in range(rho))
        if h_sq <= 0:
            raise InputError("omega_ray must have positive square")
        return cls(ns_gram, B, omega_ray, parse_rational(omega_sq) / h_sq, twist=twist)

    # -- derived data ------------------------------------------------------
    @property
    def rho(self) -> int:
        return len(self.ns_gram)

    def mukai_lattice(self) -> IntegerLattice:
        return self._lattice

    @property
    def omega_sq(self) -> Fraction:
        return self.t_sq * self._h_sq()

    def _h_sq(self) -> int:
        h, ns, rho = self.omega_ray, self.ns_gram, self.rho
        return sum(h[i] * ns[i][j] * h[j] for i in range(rho) for j in range(rho))

    def _ns_dot(self, x, y) -> Fraction:
        ns, rho = self.ns_gram, self.rho
        return sum(Fraction(x[i]) * ns[i][j] * y[j] for i in range(rho) for j in range(rho))

    @property
    def b_sq(self) -> Fraction:
        return self._ns_dot(self.B, self.B)

    @property
    def b_dot_h(self) -> Fraction:
        return self._ns_dot(self.B, self.omega_ray)

    def re_phi(self) -> tuple:
        """Re phi = (1, B, (B^2 - omega^2)/2) as exact rationals."""
        return (Fraction(1),) + self.B + ((self.b_sq - self.omega_sq) / 2,)

    def im_ray(self) -> tuple:
        """Im phi / t = (0, h, B.h); the stored ray of the imaginary direction."""
        return (Fraction(0),) + tuple(Fraction(x) for x in self.omega_ray) + (self.b_dot_h,)

    def re_form(self) -> tuple:
        """Coefficients of a(v) = <Re phi, v> on (r, D, s) coordinates."""
        return _re_form(self)

    def im_form(self) -> tuple:
        """Coefficients of b(v), where <Im phi, v> = t * b(v)."""
        return _im_form(self)

    def untwisted(self) -> "StabilityCharge":
        if self.twist is None:
            return self
        return StabilityCharge(self.ns_gram, self.B, self.omega_ray, self.t_sq)

    # -- evaluation --------------------------------------------------------
    def _ab(self, v) -> tuple:
        coords = v.coords if isinstance(v, MukaiVector) else tuple(v)
        if len(coords) != self.rho + 2:
            raise InputError("vector length %d does not match rank %d" % (len(coords), self.rho + 2))
        a = sum(c * x for c, x in zip(self.re_form(), coords))
        b = sum(c * x for c, x in zip(self.im_form(), coords))
        return a, b

    def evaluate(self, v) -> ChargeValue:
        """Exact Z(v) (twist applied) with components in Q(sqrt(t_sq))."""
        a, b = self._ab(v)
        d = self.t_sq
        if self.twist is None:
            re = Surd(a, Fraction(0), d)
            im = Surd(Fraction(0), b, d)
            abs_sq = Surd(a * a + d * b * b, Fraction(0), d)
            return ChargeValue(re, im, abs_sq)
        (m00, m01), (m10, m11) = self.twist.matrix
        re = Surd(m00 * a, m10 * b, d)
        im = Surd(m01 * a, m11 * b, d)
        return ChargeValue(re, im, re * re + im * im)

    def untwisted_abs_sq(self, v) -> Fraction:
        a, b = self._ab(v)
        return a * a + self.t_sq * b * b

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        doc = {
            "ns_gram": [list(row) for row in self.ns_gram],
            "B": [format_rational(x) for x in self.B],
            "omega_ray": list(self.omega_ray),
            "t_sq": format_rational(self.t_sq),
        }
        if self.twist is not None:
            doc["twist"] = self.twist.to_json()
        return doc

    @staticmethod
    def from_json(doc) -> "StabilityCharge":
        try:
            return StabilityCharge(
                doc["ns_gram"],
                doc["B"],
                doc["omega_ray"],
                doc["t_sq"],
                twist=GLPlusElement.from_json(doc.get("twist")) if doc.get("twist") else None,
            )
        except (KeyError, TypeError) as exc:
            raise InputError("malformed charge document: %s" % (exc,)) from exc


@lru_cache(maxsize=256)
def _re_form(sigma: StabilityCharge) -> tuple:
    # a(v) = <(1, B, (B^2-w^2)/2), (r, D, s)> = B.D - s - r*(B^2-w^2)/2
    ns, B, rho = sigma.ns_gram, sigma.B, sigma.rho
    gb = [sum(Fraction(ns[i][j]) * B[j] for j in range(rho)) for i in range(rho)]
    return (-(sigma.b_sq - sigma.omega_sq) / 2,) + tuple(gb) + (Fraction(-1),)


@lru_cache(maxsize=256)
def _im_form(sigma: StabilityCharge) -> tuple:
    # b(v) = <(0, h, B.h), (r, D, s)> = h.D - r*(B.h)
    ns, h, rho = sigma.ns_gram, sigma.omega_ray, sigma.rho
    gh = [sum(Fraction(ns[i][j]) * h[j] for j in range(rho)) for i in range(rho)]
    return (-sigma.b_dot_h,) + tuple(gh) + (Fraction(0),)


def central_charge(sigma: StabilityCharge, v) -> ChargeValue:
    """Evaluate Z(v) exactly; see ChargeValue for the component layout."""
    return sigma.evaluate(v)


def apply_gl(sigma: StabilityCharge, g: GLPlusElement) -> StabilityCharge:
    """Post-compose the charge by g: the new value is (Re Z, Im Z) . g."""
    if not isinstance(g, GLPlusElement):
        g = GLPlusElement(g)
    current = sigma.twist if sigma.twist is not None else GLPlusElement.identity()
    return StabilityCharge(
        sigma.ns_gram, sigma.B, sigma.omega_ray, sigma.t_sq, twist=current.compose(g)
    )


def genericity_check(sigma: StabilityCharge, search_bound):
    """Bounded wall scan: spherical classes delta (delta^2 = -2) with
    |Z(delta)| <= search_bound whose charge value vanishes (hard failure) or
    is real-negative with r > 0.

    The scan is complete up to the bound but the wall structure is globally
    infinite, so an empty answer certifies nothing beyond the bound; callers
    treat it as a heuristic.  Requires the untwisted (phase-1) form: walls are
    twist-invariant, so there is nothing to gain from scanning a twist.
    """
    from . import counting

    if sigma.twist is not None:
        raise InputError("genericity_check expects an untwisted charge")
    bound = parse_rational(search_bound)
    if bound < 0:
        raise InputError("search_bound must be >= 0")
    mj = counting.build_majorant(sigma)
    out = []
    bb = bound * bound
    for v in counting.enumerate_majorant(mj, mj.bound_for(bound)):
        if sigma.mukai_lattice().norm(v) != -2:
            continue
        a, b = sigma._ab(v)
        abs_sq = a * a + sigma.t_sq * b * b
        if abs_sq > bb:
            continue
        hard = a == 0 and b == 0
        real_negative = b == 0 and a < 0 and v[0] > 0
        if hard or real_negative:
            out.append((MukaiVector.from_coords(v), abs_sq))
    return out


def systole_estimate(sigma: StabilityCharge, R):
    """min |Z(v)| over nonzero classes with primitive part of square >= -2 and
    |Z(v)| <= R; None when the region is empty.

    Exact when the minimum of |Z|^2 is a perfect rational square (so e.g. on
    untwisted charges with rational |Z|^2 values this returns a Fraction);
    otherwise the float square root.
    """
    from . import counting

    R = parse_rational(R)
    min_sq = counting.min_abs_sq_in_region(sigma, R)
    if min_sq is None:
        return None
    if min_sq.is_rational():
        frac = min_sq.as_fraction()
        root = sqrt_exact(frac)
        if root is not None:
            return root
        return math.sqrt(float(frac))
    return math.sqrt(float(min_sq))
