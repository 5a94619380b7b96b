"""FastAPI application exposing a :class:`HistogramService`.

Routes::

    GET    /api/ports
    PUT    /api/histogram/{port}        {"min_ns", "max_ns", "num_bins"}
    GET    /api/histogram/{port}
    DELETE /api/histogram/{port}
    POST   /api/traffic/{port}          synthetic traffic for demos and tests

Errors are JSON objects ``{"error": ..., "detail": ...}`` with status 400
(validation), 404 (unknown or unconfigured port) or 409 (capacity exceeded,
port busy).
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .exceptions import (
    CapacityError,
    NotFoundError,
    QuiescenceError,
    TcamHistError,
    ValidationError,
)
from .histogram import HistogramConfig
from .service import HistogramService
from .traffic import Constant, LogNormal, TrafficSpec, Uniform, generate


class ConfigBody(BaseModel):
    min_ns: int
    max_ns: int
    num_bins: int


class TrafficBody(BaseModel):
    distribution: Literal["lognormal", "constant", "uniform"] = "lognormal"
    mean_ns: Optional[float] = None
    stddev_ns: Optional[float] = None
    value_ns: Optional[int] = None
    lo_ns: Optional[int] = None
    hi_ns: Optional[int] = None
    count: int
    seed: int = 0

    def to_spec(self) -> TrafficSpec:
        try:
            if self.distribution == "lognormal":
                dist = LogNormal(self.mean_ns, self.stddev_ns)
            elif self.distribution == "constant":
                dist = Constant(self.value_ns)
            else:
                dist = Uniform(self.lo_ns, self.hi_ns)
        except TypeError as exc:
            raise ValidationError(f"missing parameter for {self.distribution}: {exc}") from None
        return TrafficSpec(dist, count=self.count, seed=self.seed)


_STATUS = [
    (ValidationError, 400, "validation"),
    (NotFoundError, 404, "not_found"),
    (CapacityError, 409, "capacity"),
    (QuiescenceError, 409, "busy"),
]


def _error(status, kind, detail):
    return JSONResponse(status_code=status, content={"error": kind, "detail": detail})


def create_app(service: Optional[HistogramService] = None, poll: bool = True) -> FastAPI:
    service = service if service is not None else HistogramService()

    @asynccontextmanager
    async def lifespan(app):
        if poll:
            service.start()
        try:
            yield
        finally:
            if poll:
                service.stop()

    app = FastAPI(title="tcamhist", lifespan=lifespan)
    app.state.service = service

    @app.exception_handler(TcamHistError)
    async def _domain_error(request: Request, exc: TcamHistError):
        for cls, status, kind in _STATUS:
            if isinstance(exc, cls):
                return _error(status, kind, str(exc))
        return _error(500, "internal", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _request_error(request: Request, exc: RequestValidationError):
        return _error(400, "validation", str(exc.errors()))

    @app.get("/api/ports")
    def ports():
        return service.list_ports()

    @app.put("/api/histogram/{port}")
    def configure(port: int, body: ConfigBody):
        return service.configure(port, HistogramConfig(body.min_ns, body.max_ns, body.num_bins))

    @app.get("/api/histogram/{port}")
    def get_stats(port: int):
        return service.get_stats(port)

    @app.delete("/api/histogram/{port}", status_code=204)
    def delete(port: int):
        service.delete_config(port)

    @app.post("/api/traffic/{port}")
    def traffic(port: int, body: TrafficBody):
        pipe = service.pipeline(port)
        stream = generate(body.to_spec())
        run = pipe.process_stream(stream)
        return {
            "port": port,
            "count": run.count,
            "clamped": stream.clamped,
            "wall_time_s": run.wall_time_s,
            "samples_per_sec": run.samples_per_sec,
        }

    return app
