"""HTTP front end over the experiment harness.

One route per experiment kind, plus /selftest and /health.  Experiments
run synchronously in the request handler: they finish in seconds to a
couple of minutes, which suits a job-style client such as our CLI.
ConfigError maps to 422, any other domain error to 500 with the error
class named in the detail string.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import ConfigError, UavnetError
from ..experiments import render_csv, run_experiment, run_filter_report, \
    run_selftest
from .schemas import ConfigOverrides, ExperimentResponse, FilterResponse, \
    FilterSummary, HealthResponse, SelftestResponse


def _config_or_422(overrides: ConfigOverrides, kind: str):
    try:
        return overrides.to_config(kind)
    except ConfigError as err:
        raise HTTPException(status_code=422, detail=str(err)) from err


def _run_or_500(fn, *args):
    try:
        return fn(*args)
    except UavnetError as err:
        raise HTTPException(status_code=500,
                            detail=f"{type(err).__name__}: {err}") from err


def create_app() -> FastAPI:
    app = FastAPI(title="uavnet", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    def _experiment_response(kind: str, rows) -> dict:
        return {"kind": kind,
                "columns": list(rows[0].columns) if rows else [],
                "rows": [row.as_dict() for row in rows],
                "csv": render_csv(rows)}

    @app.post("/experiments/a2g-sweep", response_model=ExperimentResponse)
    def a2g_sweep(overrides: ConfigOverrides) -> ExperimentResponse:
        config = _config_or_422(overrides, "a2g-sweep")
        rows = _run_or_500(run_experiment, config)
        return ExperimentResponse(**_experiment_response(config.kind, rows))

    @app.post("/experiments/a2a-sinr", response_model=ExperimentResponse)
    def a2a_sinr(overrides: ConfigOverrides) -> ExperimentResponse:
        config = _config_or_422(overrides, "a2a-sinr")
        rows = _run_or_500(run_experiment, config)
        return ExperimentResponse(**_experiment_response(config.kind, rows))

    @app.post("/experiments/a2a-coverage", response_model=ExperimentResponse)
    def a2a_coverage(overrides: ConfigOverrides) -> ExperimentResponse:
        config = _config_or_422(overrides, "a2a-coverage")
        rows = _run_or_500(run_experiment, config)
        return ExperimentResponse(**_experiment_response(config.kind, rows))

    @app.post("/experiments/filter", response_model=FilterResponse)
    def filter_stream(overrides: ConfigOverrides) -> FilterResponse:
        config = _config_or_422(overrides, "filter")
        rows, report = _run_or_500(run_filter_report, config)
        summary = FilterSummary(total=report.total,
                                abandoned_count=report.abandoned_count,
                                supplement_count=report.supplement_count,
                                reduction_ratio=report.reduction_ratio)
        return FilterResponse(**_experiment_response(config.kind, rows),
                              summary=summary)

    @app.post("/selftest", response_model=SelftestResponse)
    def selftest(overrides: ConfigOverrides) -> SelftestResponse:
        config = _config_or_422(overrides, "a2a-coverage")
        ok, rows = _run_or_500(run_selftest, config)
        return SelftestResponse(**_experiment_response("selftest", rows),
                                ok=ok)

    return app


app = create_app()
