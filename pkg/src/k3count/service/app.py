"""HTTP service exposing the counting library.

One endpoint per CLI mode.  Domain errors map onto stable HTTP statuses so
thin clients can translate them to exit codes without parsing messages:
input errors 422, wall violations 409, budget refusals 413.  Every error
body is {"error": {"code": ..., "message": ..., ...}} with the extra fields
(witness class, estimated points) when the exception carries them.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..analytic import (
    SeminormRegionSpec,
    StabilityRegionSpec,
    coefficient_gl,
    coefficient_phase1,
    coefficient_slag,
    coefficient_slag_general,
    mc_volume,
)
from ..charges import GLPlusElement, StabilityCharge
from ..counting import convergence_sweep, count_semistable
from ..errors import BudgetError, InputError, K3CountError, WallViolationError
from ..lattices import IntegerLattice, Sublattice, hyperbolic_sum, standard_lattice
from ..rationals import parse_rational
from ..slag import SlagForm, TwistorPlane, lagrangian_lattice, slag_count, twistor_count
from .models import (
    ChargeDoc,
    CoefficientRequest,
    CountRequest,
    LatticeInfoRequest,
    SeminormRegionDoc,
    SlagRequest,
    SweepRequest,
    TwistorRequest,
    VolumeRequest,
)

_STATUS = {
    "input_error": 422,
    "wall_violation": 409,
    "budget_exceeded": 413,
    "error": 500,
}


def _charge_from_doc(doc: ChargeDoc) -> StabilityCharge:
    twist = GLPlusElement(doc.twist.matrix) if doc.twist is not None else None
    if (doc.t_sq is None) == (doc.omega_sq is None):
        raise InputError("give exactly one of t_sq or omega_sq")
    if doc.t_sq is not None:
        return StabilityCharge(doc.ns_gram, doc.B, doc.omega_ray, doc.t_sq, twist=twist)
    return StabilityCharge.from_omega_sq(
        doc.ns_gram, doc.B, doc.omega_ray, doc.omega_sq, twist=twist
    )


def _lattice_from_doc(doc) -> IntegerLattice:
    given = [doc.name is not None, doc.gram is not None, doc.hyperbolic_ns is not None]
    if sum(given) != 1:
        raise InputError("give exactly one of name, gram, or hyperbolic_ns")
    if doc.name is not None:
        return standard_lattice(doc.name)
    if doc.gram is not None:
        return IntegerLattice(doc.gram)
    return hyperbolic_sum(doc.hyperbolic_ns)


def _seminorm_spec(doc: SeminormRegionDoc) -> SeminormRegionSpec:
    if (doc.weight is None) == (doc.plane is None):
        raise InputError("give exactly one of weight or plane")
    gram = [[parse_rational(x) for x in row] for row in doc.gram]
    if doc.weight is not None:
        weight = [[parse_rational(x) for x in row] for row in doc.weight]
    else:
        if any(x.denominator != 1 for row in gram for x in row):
            raise InputError("plane-based regions need an integer ambient Gram")
        plane = TwistorPlane(IntegerLattice([[int(x) for x in row] for row in gram]),
                             doc.plane)
        weight = plane.weight
    return SeminormRegionSpec(gram, weight, parse_rational(doc.radius))


def create_app() -> FastAPI:
    app = FastAPI(title="k3count", version=__version__)

    @app.exception_handler(K3CountError)
    async def _domain_error(request, exc: K3CountError):
        body = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, WallViolationError):
            body["witness"] = list(exc.witness)
        if isinstance(exc, BudgetError):
            body["estimated_points"] = exc.estimated_points
            body["budget"] = exc.budget
        return JSONResponse(status_code=_STATUS.get(exc.code, 500),
                            content={"error": body})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/lattice-info")
    async def lattice_info(req: LatticeInfoRequest):
        lat = _lattice_from_doc(req.lattice)
        pos, neg, zero = lat.signature()
        return {
            "rank": lat.rank,
            "signature": [pos, neg, zero],
            "discriminant": lat.discriminant(),
            "is_even": lat.is_even(),
            "gram": [list(row) for row in lat.gram],
        }

    @app.post("/v1/count")
    async def count(req: CountRequest):
        sigma = _charge_from_doc(req.charge)
        rep = count_semistable(sigma, req.R, threads=req.threads, budget=req.budget)
        return rep.to_json()

    @app.post("/v1/sweep")
    async def sweep(req: SweepRequest):
        sigma = _charge_from_doc(req.charge)
        result = convergence_sweep(sigma, req.R_list, threads=req.threads,
                                   budget=req.budget)
        return {
            "coefficient": result.coefficient.to_json(),
            "rows": result.rows(),
        }

    @app.post("/v1/coefficient")
    async def coefficient(req: CoefficientRequest):
        if req.formula == "phase1":
            if req.rho is None or req.omega_sq is None or req.disc is None:
                raise InputError("phase1 needs rho, omega_sq, disc")
            return coefficient_phase1(req.rho, req.omega_sq, req.disc).to_json()
        if req.formula == "gl":
            if (req.rho is None or req.omega_sq is None or req.disc is None
                    or req.twist is None):
                raise InputError("gl needs rho, omega_sq, disc, twist")
            base = coefficient_phase1(req.rho, req.omega_sq, req.disc)
            g = GLPlusElement(req.twist.matrix)
            return coefficient_gl(base, g, req.rho, req.omega_sq, req.disc).to_json()
        if req.formula == "slag":
            if req.K_Omega is None or req.disc is None:
                raise InputError("slag needs K_Omega, disc")
            return coefficient_slag(req.K_Omega, req.disc).to_json()
        if req.rank_lag is None or req.K_Omega is None or req.disc is None:
            raise InputError("slag_general needs rank_lag, K_Omega, disc")
        return coefficient_slag_general(req.rank_lag, req.K_Omega, req.disc).to_json()

    @app.post("/v1/volume")
    async def volume(req: VolumeRequest):
        if isinstance(req.region, SeminormRegionDoc):
            spec = _seminorm_spec(req.region)
        else:
            spec = StabilityRegionSpec(
                req.region.rho,
                parse_rational(req.region.omega_sq),
                req.region.disc,
                parse_rational(req.region.radius),
            )
        est, se = mc_volume(spec, req.samples, req.seed, threads=req.threads)
        return {"estimate": est, "stderr": se, "samples": req.samples,
                "seed": req.seed}

    @app.post("/v1/twistor")
    async def twistor(req: TwistorRequest):
        lat = IntegerLattice(req.gram)
        plane = TwistorPlane(lat, req.plane)
        rep = twistor_count(lat, plane, req.R, threads=req.threads,
                            budget=req.budget)
        return rep.to_json()

    @app.post("/v1/slag")
    async def slag(req: SlagRequest):
        doc = req.slag
        ambient = IntegerLattice(doc.ambient_gram)
        if (doc.lag_basis is None) == (doc.omega is None):
            raise InputError("give exactly one of lag_basis or omega")
        if doc.omega is not None:
            lag = lagrangian_lattice(ambient, doc.omega)
        else:
            lag = Sublattice(ambient, doc.lag_basis)
        form = SlagForm(lag, doc.re_omega_form, doc.im_ray, doc.im_t_sq)
        rep = slag_count(form, req.R, threads=req.threads, budget=req.budget)
        return rep.to_json()

    return app


app = create_app()
