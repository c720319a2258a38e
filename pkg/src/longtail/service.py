"""HTTP service exposing the toolkit: theory, simulation, experiments, KS checks.

A thin FastAPI layer over the core package.  Endpoints mirror the CLI
subcommands one-to-one and the CLI can run against a server instead of
in-process, so both surfaces share the same request semantics:

    POST /theory      closed-form limit constants for (alpha, d, c_a[, A])
    POST /simulate    one path of the linear process
    POST /experiment  a full replicated experiment (synchronous; sized for
                      desk-scale configurations, not batch campaigns)
    POST /kscheck     KS distance of supplied samples to a stated limit law
    GET  /healthz     liveness probe

Configuration payloads reuse the flat/nested key scheme of the config
files; validation errors map to 422 and numerical-verification failures
to 500 with a NumericError detail.
"""

from __future__ import annotations

import math
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .limit_theory import theory_report
from .linear_process import ProcessSpec, simulate_path
from .mc_harness import (
    ConfigError,
    build_experiment_config,
    ks_distance,
    parse_limit_law,
    run_experiment,
)
from .innovations import InnovationSpec
from .stable_numerics import NumericError

__all__ = ["create_app", "app"]


# ----------------------------------------------------------------------
# request / response models
# ----------------------------------------------------------------------

class InnovationModel(BaseModel):
    family: Literal["Gaussian", "SymmetricStable", "StudentT"]
    nu: float | None = None
    scale: float = 1.0


class ProcessModel(BaseModel):
    innovation: InnovationModel
    d: float
    ca: float = 1.0
    J: int

    def to_spec(self) -> ProcessSpec:
        innov = InnovationSpec(self.innovation.family, nu=self.innovation.nu,
                               scale=self.innovation.scale)
        return ProcessSpec(innov, d=self.d, ca=self.ca, J=self.J)


class TheoryRequest(BaseModel):
    alpha: float
    d: float
    ca: float = 1.0
    A_const: float | None = Field(default=None, description="tail constant override")


class TheoryResponse(BaseModel):
    alpha: float
    d: float
    regime: str
    gamma0: float
    r0: float
    kappa0: float
    rate_exponent: float
    eta_or_sigma2: float


class SimulateRequest(BaseModel):
    process: ProcessModel
    n: int
    seed: int = 0
    method: Literal["direct", "fft"] = "fft"


class SimulateResponse(BaseModel):
    n: int
    x: list[float]


class ExperimentRequest(BaseModel):
    config: dict
    workers: int = 1


class AggregateModel(BaseModel):
    n: int
    ks: float | None
    empirical_scale: float | None
    lr_norm: float | None
    count_ok: int


class ExperimentResponse(BaseModel):
    corollary_id: str
    aggregates: list[AggregateModel]
    rate_slope: float | None
    rate_intercept: float | None
    rows_csv: str
    aggregates_csv: str


class KsCheckRequest(BaseModel):
    samples: list[float]
    limit: str


class KsCheckResponse(BaseModel):
    ks: float
    m: int
    limit: str


def _none_if_nan(x: float) -> float | None:
    return None if (x is None or not math.isfinite(x)) else x


# ----------------------------------------------------------------------
# application
# ----------------------------------------------------------------------

def create_app() -> FastAPI:
    app = FastAPI(title="longtail", version=__version__,
                  description="Long-memory heavy-tail limit-theorem toolkit")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/theory", response_model=TheoryResponse)
    def theory(req: TheoryRequest) -> TheoryResponse:
        try:
            rep = theory_report(req.d, alpha=req.alpha, c_a=req.ca, A=req.A_const)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except NumericError as exc:
            raise HTTPException(status_code=500, detail=f"NumericError: {exc}") from exc
        return TheoryResponse(**rep.to_dict())

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        try:
            spec = req.process.to_spec()
            path = simulate_path(spec, req.n, req.seed, method=req.method)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except NumericError as exc:
            raise HTTPException(status_code=500, detail=f"NumericError: {exc}") from exc
        return SimulateResponse(n=req.n, x=[float(v) for v in path])

    @app.post("/experiment", response_model=ExperimentResponse)
    def experiment(req: ExperimentRequest) -> ExperimentResponse:
        try:
            config = build_experiment_config(dict(req.config))
            table = run_experiment(config, workers=req.workers)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except NumericError as exc:
            raise HTTPException(status_code=500, detail=f"NumericError: {exc}") from exc
        aggs = [
            AggregateModel(
                n=a.n, ks=_none_if_nan(a.ks), empirical_scale=_none_if_nan(a.empirical_scale),
                lr_norm=_none_if_nan(a.lr_norm), count_ok=a.count_ok,
            )
            for a in table.aggregates
        ]
        return ExperimentResponse(
            corollary_id=config.corollary_id,
            aggregates=aggs,
            rate_slope=_none_if_nan(table.rate_slope),
            rate_intercept=_none_if_nan(table.rate_intercept),
            rows_csv=table.rows_csv(),
            aggregates_csv=table.aggregates_csv(),
        )

    @app.post("/kscheck", response_model=KsCheckResponse)
    def kscheck(req: KsCheckRequest) -> KsCheckResponse:
        try:
            cdf, label = parse_limit_law(req.limit)
            if not req.samples:
                raise ConfigError("samples must be nonempty")
            ks = ks_distance(req.samples, cdf)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except NumericError as exc:
            raise HTTPException(status_code=500, detail=f"NumericError: {exc}") from exc
        return KsCheckResponse(ks=ks, m=len(req.samples), limit=label)

    return app


app = create_app()
