"""FastAPI service exposing the experiment runners.

Every endpoint is stateless: it takes a fully-specified request, runs the
computation synchronously, and returns a :class:`~fockml.schemas.RunReport`
whose config echo suffices to reproduce the run.  Validation problems
surface as 422 (pydantic) or 400 with ``kind: config-error``; numerical
failures (singular solves, non-unitary matrices) as 400 with
``kind: numerical-failure`` so clients can distinguish the two.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, experiments
from .exceptions import NumericalError
from .schemas import (
    ClassifyKernelRequest,
    ClassifyVariationalRequest,
    DofTableRequest,
    FitFourierRequest,
    FitKernelRequest,
    GenDataRequest,
    HealthResponse,
    RksRequest,
    RunReport,
)

app = FastAPI(
    title="fockml",
    version=__version__,
    description=(
        "Exact simulation of linear optical circuits with Fock-state inputs, "
        "with variational, kernel, and random-feature classification runs."
    ),
)


@app.exception_handler(NumericalError)
async def numerical_error_handler(request: Request, exc: NumericalError):
    return JSONResponse(
        status_code=400,
        content={"detail": str(exc), "kind": "numerical-failure"},
    )


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError):
    return JSONResponse(
        status_code=400,
        content={"detail": str(exc), "kind": "config-error"},
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/datasets/generate", response_model=RunReport)
def gen_data(req: GenDataRequest) -> RunReport:
    return RunReport(**experiments.run_gen_data(**req.model_dump()))


@app.post("/experiments/fit-fourier", response_model=RunReport)
def fit_fourier(req: FitFourierRequest) -> RunReport:
    return RunReport(**experiments.run_fit_fourier(**req.model_dump()))


@app.post("/experiments/dof-table", response_model=RunReport)
def dof_table(req: DofTableRequest) -> RunReport:
    return RunReport(**experiments.run_dof_table(**req.model_dump()))


@app.post("/experiments/classify-variational", response_model=RunReport)
def classify_variational(req: ClassifyVariationalRequest) -> RunReport:
    return RunReport(**experiments.run_classify_variational(**req.model_dump()))


@app.post("/experiments/fit-kernel", response_model=RunReport)
def fit_kernel(req: FitKernelRequest) -> RunReport:
    return RunReport(**experiments.run_fit_kernel(**req.model_dump()))


@app.post("/experiments/classify-kernel", response_model=RunReport)
def classify_kernel(req: ClassifyKernelRequest) -> RunReport:
    return RunReport(**experiments.run_classify_kernel(**req.model_dump()))


@app.post("/experiments/rks", response_model=RunReport)
def rks(req: RksRequest) -> RunReport:
    return RunReport(**experiments.run_rks(**req.model_dump()))
