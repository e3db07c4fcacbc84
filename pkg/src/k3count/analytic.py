"""Closed-form leading coefficients and Monte Carlo volume estimates.

Normalized lattice counts N(R)/R^d converge to the volume of the region
{|Z| <= 1, square >= 0}, which has the closed form

    C = 2 pi^{(rho+2)/2} / ((rho+2) Gamma(rho/2+1) (omega^2)^{(rho+2)/2}
        sqrt|disc NS|)

in the untwisted phase-1 case, transforms simply under scale and rotation
twists, and picks up a trigonometric integral under shears.  This module
evaluates all of those, keeps Gamma at half-integers symbolic (a rational
times sqrt(pi), never a libm call), and estimates the same volumes by
hit-or-miss Monte Carlo as an independent cross-check.

Reals are IEEE doubles (53 significant bits, rounded to nearest), which
clears the 1e-10 tolerances used throughout with margin.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .charges import GLPlusElement, gl_shear_params
from .errors import InputError
from .rationals import format_rational, parse_rational

TWO_PI = 2.0 * math.pi

# Monte Carlo chunking is fixed independently of the thread count so that the
# merged estimate is schedule independent.
MC_CHUNK = 1 << 16
MIN_MC_SAMPLES = 10_000


# ---------------------------------------------------------------------------
# exact Gamma at half-integers


@dataclass(frozen=True)
class GammaHalf:
    """Exact Gamma(n/2) as rational * sqrt(pi)^sqrt_pi_power."""

    rational: Fraction
    sqrt_pi_power: int  # 0 for integer arguments, 1 for odd n

    def __float__(self) -> float:
        v = float(self.rational)
        if self.sqrt_pi_power:
            v *= math.sqrt(math.pi)
        return v

    def to_json(self) -> dict:
        return {
            "rational": format_rational(self.rational),
            "sqrt_pi_power": self.sqrt_pi_power,
        }


def gamma_half(n: int) -> GammaHalf:
    """Exact Gamma(n/2) for integer n >= 1.

    Even n gives the factorial (n/2 - 1)!; odd n unwinds the recursion
    Gamma(x+1) = x Gamma(x) down to Gamma(1/2) = sqrt(pi).
    """
    if not isinstance(n, int) or n <= 0:
        raise InputError("gamma_half expects a positive integer numerator")
    if n % 2 == 0:
        return GammaHalf(Fraction(math.factorial(n // 2 - 1)), 0)
    acc = Fraction(1)
    x = Fraction(n, 2) - 1
    while x > 0:
        acc *= x
        x -= 1
    return GammaHalf(acc, 1)


def ball_volume(rho: int, r) -> float:
    """Volume pi^{rho/2} r^rho / Gamma(rho/2+1) of the rho-ball of radius r."""
    if not isinstance(rho, int) or rho < 0:
        raise InputError("rho must be a nonnegative integer")
    r = float(r)
    if r < 0:
        raise InputError("radius must be >= 0")
    g = gamma_half(rho + 2)  # Gamma(rho/2 + 1)
    # the sqrt(pi) carried by odd rho cancels into an integer power of pi
    pi_exp = (rho - g.sqrt_pi_power) / 2.0
    return math.pi ** pi_exp * r ** rho / float(g.rational)


# ---------------------------------------------------------------------------
# leading coefficients


@dataclass(frozen=True)
class CoefficientResult:
    """A leading coefficient with provenance: which formula, which inputs."""

    value: float
    formula_id: str  # phase1 | scale | rotation | shear | slag | twistor_mc
    inputs: dict
    quadrature_error: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "formula_id": self.formula_id,
            "inputs": dict(self.inputs),
            "quadrature_error": self.quadrature_error,
        }


def _positive_rho(rho) -> int:
    if not isinstance(rho, int) or rho < 1:
        raise InputError("rho must be a positive integer")
    return rho


def _closed_form(rho: int, scale_sq: Fraction, disc: int, extra: float = 1.0) -> float:
    """2 pi^{(rho+2)/2} * extra / ((rho+2) Gamma(rho/2+1) scale_sq^{(rho+2)/2}
    sqrt|disc|), with the Gamma sqrt(pi) folded into the pi power."""
    g = gamma_half(rho + 2)
    pi_exp = (rho + 2 - g.sqrt_pi_power) / 2.0
    denom = (rho + 2) * float(g.rational) * float(scale_sq) ** ((rho + 2) / 2.0)
    return 2.0 * math.pi ** pi_exp * extra / (denom * math.sqrt(abs(disc)))


def coefficient_phase1(rho: int, omega_sq, disc_ns: int) -> CoefficientResult:
    """Leading coefficient of the untwisted count, N(R)/R^{rho+2} -> C."""
    rho = _positive_rho(rho)
    omega_sq = parse_rational(omega_sq)
    if omega_sq <= 0:
        raise InputError("omega_sq must be positive")
    if disc_ns == 0:
        raise InputError("disc_ns must be nonzero")
    value = _closed_form(rho, omega_sq, disc_ns)
    return CoefficientResult(
        value=value,
        formula_id="phase1",
        inputs={
            "rho": rho,
            "omega_sq": format_rational(omega_sq),
            "disc": int(disc_ns),
        },
    )


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_intervals: int = 1 << 20):
    """Adaptive Simpson on [a, b]: returns (integral, error_estimate).

    Standard interval-halving with the |S_fine - S_coarse|/15 error model and
    Richardson correction.  Intervals stop splitting once the cap is reached;
    the accumulated error estimate stays honest either way.
    """
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total = 0.0
    err = 0.0
    used = 1
    while stack:
        a0, b0, f0, f1, f2, coarse, t = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = (m0 - a0) / 6.0 * (f0 + 4.0 * flm + f1)
        right = (b0 - m0) / 6.0 * (f1 + 4.0 * frm + f2)
        delta = left + right - coarse
        used += 1
        if abs(delta) <= 15.0 * t or used >= max_intervals:
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
        else:
            stack.append((a0, m0, f0, flm, f1, left, 0.5 * t))
            stack.append((m0, b0, f1, frm, f2, right, 0.5 * t))
    return total, err


def shear_integral(rho: int, kappa: float, lam: float, tol: float = 1e-10):
    """(integral, error) of (cos^2 t + (sin t - kappa cos t)^2 / lam^2)^{rho/2}
    over [0, 2 pi]."""
    if lam <= 0:
        raise InputError("shear requires lambda > 0")
    half = 0.5 * rho
    inv_l2 = 1.0 / (lam * lam)

    def f(t: float) -> float:
        c, s = math.cos(t), math.sin(t)
        d = s - kappa * c
        return (c * c + d * d * inv_l2) ** half

    return adaptive_simpson(f, 0.0, TWO_PI, tol=tol)


def shear_integral_rho2(kappa: float, lam: float) -> float:
    """Closed form of shear_integral at rho = 2: pi (1 + (1 + kappa^2)/lam^2).

    cos^2 and (sin - kappa cos)^2 both average to 1/2 plus the cross terms;
    used as the exact cross-check for the quadrature.
    """
    if lam <= 0:
        raise InputError("shear requires lambda > 0")
    return math.pi * (1.0 + (1.0 + kappa * kappa) / (lam * lam))


def coefficient_gl(base: CoefficientResult, g: GLPlusElement, rho: int,
                   omega_sq, disc_ns: int) -> CoefficientResult:
    """Leading coefficient after a GL+(2,R) twist of the charge.

    The unique factorization g = scale * rotation * shear acts on the
    coefficient case by case: scale r divides it by r^{rho+2}, rotations
    leave it alone, and a proper shear replaces 2 pi by the shear_integral
    with an extra 1/lambda (the Jacobian of the shear in the value plane).
    """
    rho = _positive_rho(rho)
    omega_sq = parse_rational(omega_sq)
    if omega_sq <= 0:
        raise InputError("omega_sq must be positive")
    if disc_ns == 0:
        raise InputError("disc_ns must be nonzero")
    if not isinstance(g, GLPlusElement):
        g = GLPlusElement(g)
    r_sq, kappa, lam = gl_shear_params(g)
    if lam <= 0:
        raise InputError("shear requires lambda > 0")
    if g.approx:
        # float-entried twists: snap to rotation/scale when the shear part
        # is at rounding level
        trivial_shear = abs(kappa) <= 1e-12 and abs(lam - 1) <= 1e-12
    else:
        trivial_shear = kappa == 0 and lam == 1
    scale_pow = float(r_sq) ** ((rho + 2) / 2.0)
    echo = {
        "rho": rho,
        "omega_sq": format_rational(omega_sq),
        "disc": int(disc_ns),
        "kappa": float(kappa),
        "lam": float(lam),
        "scale_sq": float(r_sq),
    }
    if trivial_shear:
        if (r_sq == 1) if not g.approx else abs(float(r_sq) - 1.0) <= 1e-12:
            return CoefficientResult(base.value, "rotation", echo)
        return CoefficientResult(base.value / scale_pow, "scale", echo)
    integral, err = shear_integral(rho, float(kappa), float(lam))
    value = _closed_form(rho, omega_sq, disc_ns, extra=integral / (TWO_PI * float(lam)))
    return CoefficientResult(value / scale_pow, "shear", echo, quadrature_error=err)


def coefficient_slag_general(rank_lag: int, K_Omega, disc_lag: int) -> CoefficientResult:
    """Leading coefficient for Lagrangian class counts on a rank-d lattice:
    the phase-1 closed form with rho = rank - 2 and omega^2 replaced by the
    common square K of Re Omega and Im Omega."""
    if not isinstance(rank_lag, int) or rank_lag < 3:
        raise InputError("rank_lag must be an integer >= 3")
    K_Omega = parse_rational(K_Omega)
    if K_Omega <= 0:
        raise InputError("K_Omega must be positive")
    if disc_lag == 0:
        raise InputError("disc_lag must be nonzero")
    value = _closed_form(rank_lag - 2, K_Omega, disc_lag)
    return CoefficientResult(
        value=value,
        formula_id="slag",
        inputs={
            "rank_lag": rank_lag,
            "K_Omega": format_rational(K_Omega),
            "disc": int(disc_lag),
        },
    )


def coefficient_slag(K_Omega, disc_lag: int) -> CoefficientResult:
    """The rank-21 Lagrangian coefficient 2 pi^{21/2} / (21 Gamma(21/2)
    K^{21/2} sqrt|disc|)."""
    return coefficient_slag_general(21, K_Omega, disc_lag)


# ---------------------------------------------------------------------------
# Monte Carlo volumes


@dataclass(frozen=True)
class StabilityRegionSpec:
    """The region {|Z(v)| <= radius, v^2 >= 0} in the charge's coordinates.

    In the (alpha, beta) frame the region sits inside a disk-times-ball
    cylinder whose volume is known in closed form, and the change of basis
    back to lattice coordinates has determinant omega^2 / sqrt|disc|.
    """

    rho: int
    omega_sq: Fraction
    disc: int
    radius: Fraction = Fraction(1)

    def __post_init__(self):
        _positive_rho(self.rho)
        object.__setattr__(self, "omega_sq", parse_rational(self.omega_sq))
        object.__setattr__(self, "radius", parse_rational(self.radius))
        if self.omega_sq <= 0 or self.radius <= 0:
            raise InputError("omega_sq and radius must be positive")
        if self.disc == 0:
            raise InputError("disc must be nonzero")


@dataclass(frozen=True)
class SeminormRegionSpec:
    """The region {v^T gram v >= 0, v^T weight v <= radius^2} in lattice
    coordinates; weight is the plane-seminorm Gram and must majorize the
    positive directions of gram so the region is bounded."""

    gram: tuple
    weight: tuple
    radius: Fraction = Fraction(1)

    def __post_init__(self):
        gram = tuple(tuple(parse_rational(x) for x in row) for row in self.gram)
        weight = tuple(tuple(parse_rational(x) for x in row) for row in self.weight)
        if len(gram) != len(weight) or any(len(r) != len(gram) for r in gram + weight):
            raise InputError("gram and weight must be square matrices of equal size")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "radius", parse_rational(self.radius))
        if self.radius <= 0:
            raise InputError("radius must be positive")


def _chunk_sizes(samples: int):
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    return sizes


def _chunk_rng(seed: int, idx: int):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, idx))))


def _run_mc(samples: int, seed: int, threads: int, worker) -> int:
    """Total hit count over fixed-size chunks; chunk seeds depend only on
    (seed, chunk index), so the sum is independent of the schedule."""
    sizes = _chunk_sizes(samples)
    threads = max(1, int(threads))
    if threads == 1 or len(sizes) == 1:
        return sum(worker(idx, m) for idx, m in enumerate(sizes))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, idx, m) for idx, m in enumerate(sizes)]
        return sum(f.result() for f in futures)


def _mc_stability(spec: StabilityRegionSpec, samples, seed, threads):
    omega = math.sqrt(float(spec.omega_sq))
    r_disk = float(spec.radius) / float(spec.omega_sq)  # |alpha| <= R / omega^2
    r_ball = float(spec.radius) / omega  # beta ball radius at the disk rim
    rho = spec.rho
    boxvol = math.pi * r_disk * r_disk * ball_volume(rho, r_ball)
    det_change = float(spec.omega_sq) / math.sqrt(abs(spec.disc))
    inv_rho = 1.0 / rho

    def worker(idx: int, m: int) -> int:
        rng = _chunk_rng(seed, idx)
        # radial laws: |alpha| = r sqrt(u) on the disk, |beta| = r u^{1/rho}
        # on the ball; membership v^2 >= 0 compares the two radii
        disk_u = np.sqrt(rng.random(m))
        ball_u = rng.random(m) ** inv_rho
        return int(np.count_nonzero(ball_u <= disk_u))

    hits = _run_mc(samples, seed, threads, worker)
    p = hits / samples
    scale = det_change * boxvol
    return scale * p, scale * math.sqrt(p * (1.0 - p) / samples)


def _mc_seminorm(spec: SeminormRegionSpec, samples, seed, threads):
    n = len(spec.gram)
    G = np.array([[float(x) for x in row] for row in spec.gram])
    W = np.array([[float(x) for x in row] for row in spec.weight])
    A = 2.0 * W - G  # majorant: the region lies in {v^T A v <= 2 R^2}
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise InputError("degenerate bounding body: 2*weight - gram is not "
                         "positive definite") from exc
    r_sq = float(spec.radius) ** 2
    cap = 2.0 * r_sq
    det_A = float(np.prod(np.diagonal(L))) ** 2
    ellvol = ball_volume(n, math.sqrt(cap)) / math.sqrt(det_A)
    # uniform in {v^T A v <= cap}: v = sqrt(cap) L^-T y for y in the unit
    # ball, since A = L L^T makes |L^T v|^2 = cap |y|^2
    Linv = np.linalg.inv(L)
    inv_n = 1.0 / n

    def worker(idx: int, m: int) -> int:
        rng = _chunk_rng(seed, idx)
        y = rng.normal(size=(m, n))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        y *= rng.random((m, 1)) ** inv_n
        v = math.sqrt(cap) * (y @ Linv)
        qv = np.einsum("ij,ij->i", v @ G, v)
        wv = np.einsum("ij,ij->i", v @ W, v)
        return int(np.count_nonzero((qv >= 0.0) & (wv <= r_sq)))

    hits = _run_mc(samples, seed, threads, worker)
    p = hits / samples
    return ellvol * p, ellvol * math.sqrt(p * (1.0 - p) / samples)


def mc_volume(region, samples: int, seed: int, threads: int = 1):
    """Hit-or-miss Monte Carlo volume of a counting region.

    Returns (estimate, stderr).  Deterministic for a given seed: samples are
    drawn in fixed-size chunks whose substreams are seeded by (seed, chunk),
    so thread count and scheduling cannot change the result.
    """
    if not isinstance(samples, int) or samples < MIN_MC_SAMPLES:
        raise InputError("samples must be an integer >= %d" % MIN_MC_SAMPLES)
    if not isinstance(seed, int) or seed < 0:
        raise InputError("seed must be a nonnegative integer")
    if isinstance(region, StabilityRegionSpec):
        return _mc_stability(region, samples, seed, threads)
    if isinstance(region, SeminormRegionSpec):
        return _mc_seminorm(region, samples, seed, threads)
    raise InputError("unknown region spec: %r" % type(region).__name__)
